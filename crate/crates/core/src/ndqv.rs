//! Nondemolition verification: each test `Ω` is coupled to a fresh ancilla
//! by `U = Ω⊗I + (I−Ω)⊗X`, and the copy passes when every ancilla reads 0.
//!
//! Qubit order is big-endian with the system first; in a protocol with `l`
//! settings, ancilla `i` is qubit `n + i`. Settings execute in list order,
//! so the protocol operator is `M = M_{l−1} ··· M_1 M_0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    dim_cap, gates, hermitian_eigs, orthocomplement_basis, qubits_for_dim, r, DensityMatrix, Matrix, StateVector, C64,
    SPECTRAL_TOL, STRUCTURAL_TOL,
};
use crate::state::TargetState;
use crate::strategy::{gap_relative_to, GapReport, Strategy};

/// Largest protocol whose full system-plus-ancillas operator is built.
pub const MAX_MATERIALIZED_ANCILLAS: usize = 6;

/// Pass probabilities below this are treated as "never passes".
pub const NEVER_PASSES: f64 = 1e-14;

/// Tolerance for `Ω_s = |ψ><ψ|` when composing.
pub const COMPOSE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct QndSetting {
    pub label: String,
    pub omega: Matrix,
    /// Coupling unitary on system ⊗ ancilla.
    pub u: Matrix,
    pub m_pass: Matrix,
    pub m_fail: Matrix,
    relaxed: bool,
}

impl QndSetting {
    pub fn n_system(&self) -> usize {
        qubits_for_dim(self.omega.rows()).expect("validated on construction")
    }

    /// True for settings built from a non-projective test.
    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    /// `M_pass†M_pass + M_fail†M_fail − I`, entrywise max.
    pub fn completeness_defect(&self) -> f64 {
        let sum = &self.m_pass.dagger().matmul(&self.m_pass) + &self.m_fail.dagger().matmul(&self.m_fail);
        sum.max_abs_diff(&Matrix::identity(sum.rows()))
    }
}

fn check_system_operator(omega: &Matrix) -> Result<usize> {
    if !omega.is_square() {
        return Err(Error::Size(format!("test is {}x{}", omega.rows(), omega.cols())));
    }
    qubits_for_dim(omega.rows())
}

fn split_ancilla(u: &Matrix) -> (Matrix, Matrix) {
    let p0 = Matrix::identity(u.rows() / 2).kron(&gates::proj0()).expect("within cap");
    let p1 = Matrix::identity(u.rows() / 2).kron(&gates::proj1()).expect("within cap");
    (p0.matmul(u), p1.matmul(u))
}

/// QND coupling for a projective test.
pub fn build_qnd_setting(label: impl Into<String>, omega: Matrix) -> Result<QndSetting> {
    let label = label.into();
    check_system_operator(&omega)?;
    if !omega.is_projector(STRUCTURAL_TOL) {
        return Err(Error::Contract(format!(
            "test '{label}' is not a projector, so its coupling would not be unitary"
        )));
    }
    let d = omega.rows();
    let rest = &Matrix::identity(d) - &omega;
    let u = &omega.kron(&gates::identity())? + &rest.kron(&gates::pauli_x())?;
    let (m_pass, m_fail) = split_ancilla(&u);
    Ok(QndSetting { label, omega, u, m_pass, m_fail, relaxed: false })
}

/// Coupling for a test `0 ≤ Ω ≤ I` that need not be a projector:
/// `U = Ω⊗I + √(I−Ω²)⊗(−iY)`, whose pass block is `Ω` itself.
pub fn build_relaxed_setting(label: impl Into<String>, omega: Matrix) -> Result<QndSetting> {
    let label = label.into();
    check_system_operator(&omega)?;
    if !omega.is_hermitian(STRUCTURAL_TOL) {
        return Err(Error::Contract(format!("test '{label}' is not Hermitian")));
    }
    let e = hermitian_eigs(&omega)?;
    let d = omega.rows();
    if e.eigenvalues[0] > 1.0 + SPECTRAL_TOL || e.eigenvalues[d - 1] < -SPECTRAL_TOL {
        return Err(Error::Contract(format!("test '{label}' is not between 0 and I")));
    }
    let mut comp = Matrix::zeros(d, d);
    for (lam, v) in e.eigenvalues.iter().zip(&e.eigenvectors) {
        let s = (1.0 - lam.clamp(0.0, 1.0).powi(2)).sqrt();
        comp = &comp + &v.projector().scale_real(s);
    }
    let rot = Matrix::from_real(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let u = &omega.kron(&gates::identity())? + &comp.kron(&rot)?;
    let (m_pass, m_fail) = split_ancilla(&u);
    Ok(QndSetting { label, omega, u, m_pass, m_fail, relaxed: true })
}

/// Lift an operator on system ⊗ one ancilla to system ⊗ `l` ancillas,
/// acting on ancilla `slot` and as identity on the others.
pub fn embed_on_ancilla(op: &Matrix, n_system: usize, l: usize, slot: usize) -> Result<Matrix> {
    assert!(slot < l);
    let local_dim = 1usize << (n_system + 1);
    if op.rows() != local_dim || op.cols() != local_dim {
        return Err(Error::Size(format!("operator is {}x{}, expected {local_dim}", op.rows(), op.cols())));
    }
    let total = n_system + l;
    let dim = 1usize << total;
    if dim > dim_cap() {
        return Err(Error::Size(format!("{total} qubits exceed the dimension cap {}", dim_cap())));
    }
    let shift = l - 1 - slot;
    let amask = (1usize << l) - 1;
    let mut out = Matrix::zeros(dim, dim);
    for col in 0..dim {
        let (s, a) = (col >> l, col & amask);
        let bit = (a >> shift) & 1;
        let lc = (s << 1) | bit;
        for lr in 0..local_dim {
            let v = op[(lr, lc)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            let a2 = (a & !(1 << shift)) | ((lr & 1) << shift);
            out[(((lr >> 1) << l) | a2, col)] += v;
        }
    }
    Ok(out)
}

/// `σ ⊗ |0…0><0…0|` on system ⊗ `l` ancillas.
pub fn with_ancilla_zero(sigma: &Matrix, l: usize) -> Result<Matrix> {
    let a = 1usize << l;
    let d = sigma.rows();
    if d * a > dim_cap() {
        return Err(Error::Size(format!("dimension {} exceeds the cap {}", d * a, dim_cap())));
    }
    let mut out = Matrix::zeros(d * a, d * a);
    for i in 0..d {
        for j in 0..d {
            out[(i * a, j * a)] = sigma[(i, j)];
        }
    }
    Ok(out)
}

/// Complement weights for an appended test
/// `λ₀|ψ><ψ| + Σ_p w_p |ψ_p><ψ_p|`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum ComplementWeights {
    #[default]
    Zero,
    AllOne,
    /// One bit per orthocomplement basis vector.
    Pattern(Vec<bool>),
}

#[derive(Clone, Debug)]
pub enum PassOutcome {
    Passed { probability: f64, post_state: DensityMatrix },
    NeverPasses { probability: f64 },
}

impl PassOutcome {
    pub fn probability(&self) -> f64 {
        match self {
            PassOutcome::Passed { probability, .. } | PassOutcome::NeverPasses { probability } => *probability,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SequentialProtocol {
    target: TargetState,
    settings: Vec<QndSetting>,
}

impl SequentialProtocol {
    /// Builds QND settings for `tests` (in execution order) and checks that
    /// together they accept the target and nothing else.
    pub fn compose(target: TargetState, tests: Vec<(String, Matrix)>) -> Result<Self> {
        let settings =
            tests.into_iter().map(|(label, omega)| build_qnd_setting(label, omega)).collect::<Result<Vec<_>>>()?;
        Self::compose_settings(target, settings)
    }

    pub fn compose_settings(target: TargetState, settings: Vec<QndSetting>) -> Result<Self> {
        let p = Self::unchecked(target, settings)?;
        let psi = p.target.psi();
        for s in &p.settings {
            if s.omega.apply(psi).max_abs_diff(psi) > STRUCTURAL_TOL {
                return Err(Error::Contract(format!("test '{}' does not accept the target", s.label)));
            }
        }
        let dev = p.effective_operator().max_abs_diff(&p.target.projector());
        if dev > COMPOSE_TOL {
            return Err(Error::IncompleteVerificationSet(format!(
                "product of the tests differs from the target projector by {dev:.3e}"
            )));
        }
        Ok(p)
    }

    /// No acceptance or completeness checks; only shapes are validated.
    pub fn unchecked(target: TargetState, settings: Vec<QndSetting>) -> Result<Self> {
        if settings.is_empty() {
            return Err(Error::Contract("a protocol needs at least one setting".into()));
        }
        for s in &settings {
            if s.omega.rows() != target.dim() {
                return Err(Error::Size(format!(
                    "setting '{}' has dimension {}, target has {}",
                    s.label,
                    s.omega.rows(),
                    target.dim()
                )));
            }
        }
        Ok(SequentialProtocol { target, settings })
    }

    /// The strategy's tests, one QND setting each, in the strategy's order.
    pub fn from_strategy(s: &Strategy) -> Result<Self> {
        let tests = s.settings().iter().map(|x| (x.label.clone(), x.omega.clone())).collect();
        Self::compose(s.target().clone(), tests)
    }

    pub fn target(&self) -> &TargetState {
        &self.target
    }

    pub fn settings(&self) -> &[QndSetting] {
        &self.settings
    }

    pub fn n_system(&self) -> usize {
        self.target.n_qubits()
    }

    pub fn n_ancilla(&self) -> usize {
        self.settings.len()
    }

    pub fn permuted(&self, order: &[usize]) -> SequentialProtocol {
        SequentialProtocol {
            target: self.target.clone(),
            settings: order.iter().map(|&i| self.settings[i].clone()).collect(),
        }
    }

    pub fn with_appended(&self, setting: QndSetting) -> Result<SequentialProtocol> {
        let mut settings = self.settings.clone();
        settings.push(setting);
        Self::unchecked(self.target.clone(), settings)
    }

    /// `Ω_s = Ω_{l−1} ··· Ω_0`
    pub fn effective_operator(&self) -> Matrix {
        let d = self.target.dim();
        self.settings.iter().fold(Matrix::identity(d), |acc, s| s.omega.matmul(&acc))
    }

    fn check_materializable(&self) -> Result<()> {
        let l = self.n_ancilla();
        if l > MAX_MATERIALIZED_ANCILLAS {
            return Err(Error::Size(format!(
                "{l} settings; full operators are built for at most {MAX_MATERIALIZED_ANCILLAS}"
            )));
        }
        let total = self.n_system() + l;
        if (1usize << total) > dim_cap() {
            return Err(Error::Size(format!("{total} qubits exceed the dimension cap {}", dim_cap())));
        }
        Ok(())
    }

    /// `M = M_{l−1} ··· M_0` on system ⊗ all ancillas.
    pub fn full_operator(&self) -> Result<Matrix> {
        self.check_materializable()?;
        let (n, l) = (self.n_system(), self.n_ancilla());
        let mut m = Matrix::identity(1 << (n + l));
        for (i, s) in self.settings.iter().enumerate() {
            m = embed_on_ancilla(&s.m_pass, n, l, i)?.matmul(&m);
        }
        Ok(m)
    }

    /// `Σ_k Π_i [I/2 + (−1)^{k_i}(2Ω_i − I)/2] ⊗ |0…0><k|`
    pub fn summation_form(&self) -> Result<Matrix> {
        self.check_materializable()?;
        let (d, l) = (self.target.dim(), self.n_ancilla());
        let a = 1usize << l;
        let half = Matrix::identity(d).scale_real(0.5);
        let signed: Vec<Matrix> =
            self.settings.iter().map(|s| (&s.omega.scale_real(2.0) - &Matrix::identity(d)).scale_real(0.5)).collect();
        let mut out = Matrix::zeros(d * a, d * a);
        for k in 0..a {
            let mut term = Matrix::identity(d);
            for (i, sg) in signed.iter().enumerate() {
                let bit = (k >> (l - 1 - i)) & 1;
                let factor = if bit == 0 { &half + sg } else { &half - sg };
                term = factor.matmul(&term);
            }
            for x in 0..d {
                for y in 0..d {
                    out[(x * a, y * a + k)] = term[(x, y)];
                }
            }
        }
        Ok(out)
    }

    fn check_sigma(&self, sigma: &DensityMatrix) -> Result<()> {
        if sigma.dim() != self.target.dim() {
            return Err(Error::Size(format!(
                "state has dimension {}, protocol acts on {}",
                sigma.dim(),
                self.target.dim()
            )));
        }
        Ok(())
    }

    /// Ancilla-zero block of `M(σ⊗P₀)`, applying one setting at a time
    /// with a single reused ancilla.
    fn one_sided_reused(&self, sigma: &Matrix) -> Result<(Matrix, f64)> {
        let mut x = sigma.clone();
        let mut leak: f64 = 0.0;
        for s in &self.settings {
            let y = s.m_pass.matmul(&with_ancilla_zero(&x, 1)?);
            leak = leak.max(y.max_abs_diff(&with_ancilla_zero(&y.ancilla_zero_block(1), 1)?));
            x = y.ancilla_zero_block(1);
        }
        Ok((x, leak))
    }

    /// `‖M(σ⊗P₀) − Ω_sσ⊗P₀‖_max`
    pub fn conditional_equivalence_check(&self, sigma: &DensityMatrix) -> Result<f64> {
        self.check_sigma(sigma)?;
        let expect = self.effective_operator().matmul(sigma.matrix());
        if self.n_ancilla() <= MAX_MATERIALIZED_ANCILLAS && self.check_materializable().is_ok() {
            let l = self.n_ancilla();
            let got = self.full_operator()?.matmul(&with_ancilla_zero(sigma.matrix(), l)?);
            Ok(got.max_abs_diff(&with_ancilla_zero(&expect, l)?))
        } else {
            let (block, leak) = self.one_sided_reused(sigma.matrix())?;
            Ok(block.max_abs_diff(&expect).max(leak))
        }
    }

    /// `|tr[M(σ⊗P₀)] − tr(Ω_s σ)|`
    pub fn trace_identity_deviation(&self, sigma: &DensityMatrix) -> Result<f64> {
        self.check_sigma(sigma)?;
        let want = self.effective_operator().matmul(sigma.matrix()).trace();
        let got = if self.check_materializable().is_ok() {
            let l = self.n_ancilla();
            self.full_operator()?.matmul(&with_ancilla_zero(sigma.matrix(), l)?).trace()
        } else {
            self.one_sided_reused(sigma.matrix())?.0.trace()
        };
        Ok((got - want).norm())
    }

    /// `ν = 1 − λ₂(Ω_s)`; one for a complete verification set.
    pub fn protocol_gap(&self) -> Result<GapReport> {
        gap_relative_to(&self.effective_operator(), self.target.psi())
    }

    /// Appends `λ₀|ψ><ψ| + Σ_p w_p|ψ_p><ψ_p|` as one more setting and
    /// returns the new gap, read as `λ₁ − λ₂` of the effective operator.
    pub fn appended_setting_gap(&self, lambda0: f64, weights: &ComplementWeights) -> Result<f64> {
        if !(lambda0 > 0.0 && lambda0 <= 1.0) {
            return Err(Error::Domain(format!("lambda0 {lambda0} must lie in (0, 1]")));
        }
        let psi = self.target.psi();
        let basis = orthocomplement_basis(psi);
        let flags: Vec<bool> = match weights {
            ComplementWeights::Zero => vec![false; basis.len()],
            ComplementWeights::AllOne => vec![true; basis.len()],
            ComplementWeights::Pattern(p) => {
                if p.len() != basis.len() {
                    return Err(Error::Size(format!(
                        "{} complement weights given, orthocomplement has dimension {}",
                        p.len(),
                        basis.len()
                    )));
                }
                p.clone()
            }
        };
        let mut omega = psi.projector().scale_real(lambda0);
        for (b, &on) in basis.iter().zip(&flags) {
            if on {
                omega = &omega + &b.projector();
            }
        }
        let extended = self.with_appended(build_relaxed_setting("appended", omega)?)?;
        let block = if extended.check_materializable().is_ok() {
            extended.full_operator()?.ancilla_zero_block(extended.n_ancilla())
        } else {
            extended.effective_operator()
        };
        let e = hermitian_eigs(&block.hermitian_part())?;
        Ok(e.eigenvalues[0] - e.eigenvalues[1])
    }

    /// Pass probability `tr[M(σ⊗P₀)M†]` and the normalized post-pass state.
    pub fn fidelity_transform(&self, sigma: &DensityMatrix) -> Result<PassOutcome> {
        self.check_sigma(sigma)?;
        let block = if self.check_materializable().is_ok() {
            let l = self.n_ancilla();
            let m = self.full_operator()?;
            m.matmul(&with_ancilla_zero(sigma.matrix(), l)?).matmul(&m.dagger()).ancilla_zero_block(l)
        } else {
            let mut x = sigma.matrix().clone();
            for s in &self.settings {
                x = s.m_pass.matmul(&with_ancilla_zero(&x, 1)?).matmul(&s.m_pass.dagger()).ancilla_zero_block(1);
            }
            x
        };
        let probability = block.trace().re;
        if probability < NEVER_PASSES {
            return Ok(PassOutcome::NeverPasses { probability: probability.max(0.0) });
        }
        let post = block.scale_real(1.0 / probability).hermitian_part();
        Ok(PassOutcome::Passed { probability, post_state: DensityMatrix::new(post)? })
    }

    /// `‖M(σ⊗P₀)M† − F|ψ><ψ|⊗P₀‖_max` with `F = <ψ|σ|ψ>`.
    pub fn fidelity_transform_deviation(&self, sigma: &DensityMatrix) -> Result<f64> {
        self.check_sigma(sigma)?;
        let l = self.n_ancilla();
        let m = self.full_operator()?;
        let out = m.matmul(&with_ancilla_zero(sigma.matrix(), l)?).matmul(&m.dagger());
        let f = sigma.expectation(self.target.psi());
        let want = with_ancilla_zero(&self.target.projector().scale_real(f), l)?;
        Ok(out.max_abs_diff(&want))
    }

    /// `‖M(|ψ>⊗|0…0>) − |ψ>⊗|0…0>‖_max`
    pub fn fixed_point_defect(&self) -> Result<f64> {
        let l = self.n_ancilla();
        let v = self.target.psi().with_ancillas(l)?;
        Ok(self.full_operator()?.apply(&v).max_abs_diff(&v))
    }

    pub fn to_json(&self) -> String {
        let doc = ProtocolDoc {
            schema: 1,
            target_label: self.target.label().to_string(),
            target: self.target.psi().amplitudes().to_vec(),
            settings: self
                .settings
                .iter()
                .map(|s| ProtocolSettingDoc {
                    label: s.label.clone(),
                    relaxed: s.relaxed,
                    dim: s.omega.rows(),
                    matrix: s.omega.data().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("protocol serializes")
    }

    /// Parses and re-validates a protocol. Protocols holding relaxed
    /// settings are restored without the completeness check.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ProtocolDoc = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        if doc.schema != 1 {
            return Err(Error::parse(1, format!("unsupported schema {}", doc.schema)));
        }
        let target = TargetState::new(doc.target_label, StateVector::from_amplitudes(doc.target)?)?;
        let any_relaxed = doc.settings.iter().any(|s| s.relaxed);
        let settings = doc
            .settings
            .into_iter()
            .map(|s| {
                let m = Matrix::from_vec(s.dim, s.dim, s.matrix)?;
                if s.relaxed {
                    build_relaxed_setting(s.label, m)
                } else {
                    build_qnd_setting(s.label, m)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if any_relaxed {
            Self::unchecked(target, settings)
        } else {
            Self::compose_settings(target, settings)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ProtocolDoc {
    schema: u32,
    target_label: String,
    target: Vec<C64>,
    settings: Vec<ProtocolSettingDoc>,
}

#[derive(Serialize, Deserialize)]
struct ProtocolSettingDoc {
    label: String,
    #[serde(default)]
    relaxed: bool,
    dim: usize,
    matrix: Vec<C64>,
}

/// CNOT from system qubit `control` onto the appended ancilla.
pub fn cnot_to_ancilla(n_system: usize, control: usize) -> Matrix {
    let d = 1usize << (n_system + 1);
    let mut m = Matrix::zeros(d, d);
    for col in 0..d {
        let flip = (col >> (n_system - control)) & 1;
        m[(col ^ flip, col)] = r(1.0);
    }
    m
}
