//! Standard (probabilistic) verification strategies `Ω = Σ μᵢ Ωᵢ` and their
//! spectral gaps.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gates, hermitian_eigs, kron_all, r, Matrix, StateVector, C64, SPECTRAL_TOL, STRUCTURAL_TOL};
use crate::state::{self, check_theta, StabilizerGroupSpec, TargetState};

/// Setting probability, kept as an exact ratio when it is one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    Ratio(u32, u32),
    Real(f64),
}

impl Weight {
    pub fn value(self) -> f64 {
        match self {
            Weight::Ratio(n, d) => n as f64 / d as f64,
            Weight::Real(x) => x,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Setting {
    pub label: String,
    pub weight: Weight,
    pub omega: Matrix,
}

impl Setting {
    pub fn new(label: impl Into<String>, weight: Weight, omega: Matrix) -> Self {
        Setting { label: label.into(), weight, omega }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Strategy {
    target: TargetState,
    theta: Option<f64>,
    settings: Vec<Setting>,
    adaptive: bool,
    relaxed: bool,
}

impl Strategy {
    /// Validates weights (positive, summing to one), projectivity of every
    /// test, and that every test accepts the target with certainty.
    pub fn new(target: TargetState, settings: Vec<Setting>, adaptive: bool) -> Result<Self> {
        check_weights(&settings)?;
        let psi = target.psi();
        for s in &settings {
            check_shape(&s.omega, target.dim(), &s.label)?;
            if !s.omega.is_projector(STRUCTURAL_TOL) {
                return Err(Error::Contract(format!("test '{}' is not a projector", s.label)));
            }
            if s.omega.apply(psi).max_abs_diff(psi) > STRUCTURAL_TOL {
                return Err(Error::Contract(format!("test '{}' does not accept the target", s.label)));
            }
        }
        Ok(Strategy { target, theta: None, settings, adaptive, relaxed: false })
    }

    /// POVM-style tests: each `Ωᵢ` only needs `0 ≤ Ωᵢ ≤ I`. The result is
    /// flagged as relaxed and the target need not be a fixed point.
    pub fn new_relaxed(target: TargetState, settings: Vec<Setting>) -> Result<Self> {
        check_weights(&settings)?;
        for s in &settings {
            check_shape(&s.omega, target.dim(), &s.label)?;
            let e = hermitian_eigs(&s.omega)?;
            let hi = e.eigenvalues.first().copied().unwrap_or(0.0);
            let lo = e.eigenvalues.last().copied().unwrap_or(0.0);
            if lo < -SPECTRAL_TOL || hi > 1.0 + SPECTRAL_TOL {
                return Err(Error::Contract(format!("test '{}' is not between 0 and I", s.label)));
            }
        }
        Ok(Strategy { target, theta: None, settings, adaptive: false, relaxed: true })
    }

    fn with_theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn target(&self) -> &TargetState {
        &self.target
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn settings(&self) -> &[Setting] {
        &self.settings
    }

    pub fn is_adaptive(&self) -> bool {
        self.adaptive
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    /// `Ω = Σ μᵢ Ωᵢ`
    pub fn operator(&self) -> Matrix {
        let d = self.target.dim();
        self.settings.iter().fold(Matrix::zeros(d, d), |acc, s| &acc + &s.omega.scale_real(s.weight.value()))
    }

    /// The same tests in a different order.
    pub fn permuted(&self, order: &[usize]) -> Strategy {
        let settings = order.iter().map(|&i| self.settings[i].clone()).collect();
        Strategy { settings, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        let doc = StrategyDoc {
            schema: 1,
            target_label: self.target.label().to_string(),
            theta: self.theta,
            adaptive: self.adaptive,
            target: self.target.psi().amplitudes().to_vec(),
            settings: self
                .settings
                .iter()
                .map(|s| SettingDoc {
                    label: s.label.clone(),
                    mu: s.weight.value(),
                    mu_exact: match s.weight {
                        Weight::Ratio(n, d) => Some([n, d]),
                        Weight::Real(_) => None,
                    },
                    dim: s.omega.rows(),
                    matrix: s.omega.data().to_vec(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("strategy serializes")
    }

    pub fn from_json(text: &str) -> Result<Strategy> {
        let doc: StrategyDoc = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        if doc.schema != 1 {
            return Err(Error::parse(1, format!("unsupported schema {}", doc.schema)));
        }
        let target = TargetState::new(doc.target_label, StateVector::from_amplitudes(doc.target)?)?;
        let settings = doc
            .settings
            .into_iter()
            .map(|s| {
                let weight = match s.mu_exact {
                    Some([n, d]) => Weight::Ratio(n, d),
                    None => Weight::Real(s.mu),
                };
                Ok(Setting::new(s.label, weight, Matrix::from_vec(s.dim, s.dim, s.matrix)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let s = Strategy::new(target, settings, doc.adaptive)?;
        Ok(match doc.theta {
            Some(t) => s.with_theta(t),
            None => s,
        })
    }
}

/// JSON layout of a serialized strategy. Complex numbers are `[re, im]`
/// pairs and matrices are flattened row-major.
#[derive(Serialize, Deserialize)]
struct StrategyDoc {
    schema: u32,
    target_label: String,
    theta: Option<f64>,
    adaptive: bool,
    target: Vec<C64>,
    settings: Vec<SettingDoc>,
}

#[derive(Serialize, Deserialize)]
struct SettingDoc {
    label: String,
    mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu_exact: Option<[u32; 2]>,
    dim: usize,
    matrix: Vec<C64>,
}

fn check_shape(m: &Matrix, dim: usize, label: &str) -> Result<()> {
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::Size(format!("test '{label}' is {}x{}, target dimension is {dim}", m.rows(), m.cols())));
    }
    Ok(())
}

fn check_weights(settings: &[Setting]) -> Result<()> {
    if settings.is_empty() {
        return Err(Error::Contract("a strategy needs at least one test".into()));
    }
    for s in settings {
        let ok = match s.weight {
            Weight::Ratio(n, d) => n > 0 && d > 0,
            Weight::Real(x) => x.is_finite() && x > 0.0,
        };
        if !ok {
            return Err(Error::Contract(format!("weight of '{}' must be positive", s.label)));
        }
    }
    let exact: Option<Vec<(u128, u128)>> = settings
        .iter()
        .map(|s| match s.weight {
            Weight::Ratio(n, d) => Some((n as u128, d as u128)),
            Weight::Real(_) => None,
        })
        .collect();
    match exact {
        Some(fracs) => {
            let (num, den) = fracs.into_iter().fold((0u128, 1u128), |(an, ad), (bn, bd)| {
                let n = an * bd + bn * ad;
                let d = ad * bd;
                let g = gcd(n, d);
                (n / g, d / g)
            });
            if num != den {
                return Err(Error::Contract(format!("weights sum to {num}/{den}, not 1")));
            }
        }
        None => {
            let sum: f64 = settings.iter().map(|s| s.weight.value()).sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Contract(format!("weights sum to {sum}, not 1")));
            }
        }
    }
    Ok(())
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// Spectral gap `ν = 1 − λ₂` with an eigenvector achieving `λ₂`.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub nu: f64,
    pub lambda2: f64,
    /// Unit vector orthogonal to the target with `<w|Ω|w> = λ₂`.
    pub witness: StateVector,
}

/// Gap of `op` relative to `psi`, which must be a fixed point of `op`.
///
/// Only the Hermitian part of `op` enters, since `tr(Ωσ)` only sees that
/// part for Hermitian `σ`. The `|ψ>` component is deflated to −1 before
/// diagonalizing, so a degenerate top eigenvalue still yields λ₂ on the
/// orthocomplement.
pub fn gap_relative_to(op: &Matrix, psi: &StateVector) -> Result<GapReport> {
    let d = psi.dim();
    if op.rows() != d || op.cols() != d {
        return Err(Error::Size(format!("operator is {}x{}, state has dimension {d}", op.rows(), op.cols())));
    }
    if d < 2 {
        return Err(Error::Size("gap needs at least a two-dimensional space".into()));
    }
    if op.apply(psi).max_abs_diff(psi) > SPECTRAL_TOL {
        return Err(Error::Contract("target is not a fixed point of the operator (lambda_1 < 1)".into()));
    }
    let h = op.hermitian_part();
    let p = &Matrix::identity(d) - &psi.projector();
    let deflated = &p.matmul(&h).matmul(&p) - &psi.projector();
    let e = hermitian_eigs(&deflated.hermitian_part())?;
    let lambda2 = e.eigenvalues[0];
    let w = &e.eigenvectors[0];
    let witness = w.sub(&psi.scale(psi.inner(w))).normalized()?;
    Ok(GapReport { nu: (1.0 - lambda2).clamp(0.0, 1.0), lambda2, witness })
}

pub fn spectral_gap(s: &Strategy) -> Result<GapReport> {
    gap_relative_to(&s.operator(), s.target().psi())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SampleComplexity {
    /// `⌈ln δ⁻¹ / ln (1−νε)⁻¹⌉`
    pub exact: u64,
    /// `⌈ν⁻¹ ε⁻¹ ln δ⁻¹⌉`
    pub approx: u64,
}

/// Number of copies needed to reach infidelity `epsilon` at confidence `1 − delta`.
///
/// `delta = 1` is accepted and needs no copies.
pub fn sample_complexity(nu: f64, epsilon: f64, delta: f64) -> Result<SampleComplexity> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::Domain(format!("spectral gap {nu} must lie in (0, 1]")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("infidelity {epsilon} must lie in (0, 1)")));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta {delta} must lie in (0, 1]")));
    }
    if nu * epsilon >= 1.0 {
        return Err(Error::Domain("nu * epsilon must be below 1".into()));
    }
    let log_inv_delta = -delta.ln();
    let exact = (log_inv_delta / -(-nu * epsilon).ln_1p()).ceil();
    let approx = (log_inv_delta / (nu * epsilon)).ceil();
    Ok(SampleComplexity { exact: exact as u64, approx: approx as u64 })
}

// ---------------------------------------------------------------------------
// Building blocks

fn ket(a: C64, b: C64) -> StateVector {
    StateVector::from_amplitudes(vec![a, b]).expect("finite")
}

fn ket2(a: &StateVector, b: &StateVector) -> StateVector {
    a.kron(b).expect("two qubits")
}

pub fn plus() -> StateVector {
    ket(r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2))
}

pub fn minus() -> StateVector {
    ket(r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2))
}

/// `|00><00| + |11><11|`
pub fn p_zz_plus() -> Matrix {
    Matrix::diag(&[r(1.0), r(0.0), r(0.0), r(1.0)])
}

/// `|++><++| + |−−><−−|`
pub fn p_xx_plus() -> Matrix {
    &ket2(&plus(), &plus()).projector() + &ket2(&minus(), &minus()).projector()
}

/// Projector onto the −1 eigenspace of `Y⊗Y`.
pub fn p_yy_minus() -> Matrix {
    let yy = gates::pauli_y().kron(&gates::pauli_y()).expect("4x4");
    (&Matrix::identity(4) - &yy).scale_real(0.5)
}

/// `|φ±> = cos θ|0> ∓ sin θ|1>`
pub fn phi_pm(theta: f64, sign: f64) -> StateVector {
    ket(r(theta.cos()), r(-sign * theta.sin()))
}

/// `|φ±⊥> = sin θ|0> ± cos θ|1>`
pub fn phi_pm_perp(theta: f64, sign: f64) -> StateVector {
    ket(r(theta.sin()), r(sign * theta.cos()))
}

/// `Ω₁ = P_ZZ⁺`, `Ω₂ = I − |+><+|⊗|φ₊><φ₊|`, `Ω₃ = I − |−><−|⊗|φ₋><φ₋|`.
pub fn two_qubit_three_tests(theta: f64) -> [Matrix; 3] {
    let id = Matrix::identity(4);
    [
        p_zz_plus(),
        &id - &ket2(&plus(), &phi_pm(theta, 1.0)).projector(),
        &id - &ket2(&minus(), &phi_pm(theta, -1.0)).projector(),
    ]
}

/// The three product states rejected by the optimal non-adaptive strategy.
pub fn four_setting_rejected_states(theta: f64) -> [StateVector; 3] {
    let a = 1.0 / (1.0 + theta.tan()).sqrt();
    let b = 1.0 / (1.0 + 1.0 / theta.tan()).sqrt();
    let local = |phase: C64| ket(r(a), phase * b);
    let e = |frac: f64| C64::from_polar(1.0, PI * frac);
    [
        ket2(&local(e(2.0 / 3.0)), &local(e(1.0 / 3.0))),
        ket2(&local(e(4.0 / 3.0)), &local(e(5.0 / 3.0))),
        ket2(&local(r(1.0)), &local(r(-1.0))),
    ]
}

/// `α(θ) = (2 − sin 2θ)/(4 + sin 2θ)`
pub fn four_setting_alpha(theta: f64) -> f64 {
    let s = (2.0 * theta).sin();
    (2.0 - s) / (4.0 + s)
}

/// Adaptive test `|+><+|⊗|φ₊⊥><φ₊⊥| + |−><−|⊗|φ₋⊥><φ₋⊥|`.
pub fn x_psi(theta: f64) -> Matrix {
    &ket2(&plus(), &phi_pm_perp(theta, 1.0)).projector() + &ket2(&minus(), &phi_pm_perp(theta, -1.0)).projector()
}

/// `|φ_k> = g^k |φ₀>` with `g = Υ⊗Υ†` and `|φ₀> = |+>⊗(sin θ|0> + cos θ|1>)`.
pub fn adaptive_orbit(theta: f64) -> [StateVector; 4] {
    let g = gates::phase().kron(&gates::phase().dagger()).expect("4x4");
    let mut out =
        [ket2(&plus(), &phi_pm_perp(theta, 1.0)), StateVector::zeros(4), StateVector::zeros(4), StateVector::zeros(4)];
    for k in 1..4 {
        out[k] = g.apply(&out[k - 1]);
    }
    out
}

/// `Y_Ψ = |φ₁><φ₁| + |φ₃><φ₃|`
pub fn y_psi(theta: f64) -> Matrix {
    let o = adaptive_orbit(theta);
    &o[1].projector() + &o[3].projector()
}

// ---------------------------------------------------------------------------
// Catalog

/// `{(1, |ψ><ψ|)}`, the optimal global strategy.
pub fn strategy_optimal(target: &TargetState) -> Strategy {
    let s = Setting::new("target", Weight::Ratio(1, 1), target.projector());
    Strategy::new(target.clone(), vec![s], false).expect("rank-one projector onto the target")
}

/// Bell-state strategy over `P_ZZ⁺` and `P_XX⁺`, optionally with `P_YY⁻`.
pub fn strategy_bell(extended: bool) -> Strategy {
    let w = if extended { Weight::Ratio(1, 3) } else { Weight::Ratio(1, 2) };
    let mut settings = vec![Setting::new("P_ZZ+", w, p_zz_plus()), Setting::new("P_XX+", w, p_xx_plus())];
    if extended {
        settings.push(Setting::new("P_YY-", w, p_yy_minus()));
    }
    Strategy::new(state::bell_state(), settings, false).expect("catalog strategy")
}

pub fn strategy_2qb_three(theta: f64) -> Result<Strategy> {
    let target = state::two_qubit_pure(theta)?;
    let w = Weight::Ratio(1, 3);
    let [o1, o2, o3] = two_qubit_three_tests(theta);
    let settings = vec![Setting::new("P_ZZ+", w, o1), Setting::new("Omega_2", w, o2), Setting::new("Omega_3", w, o3)];
    Ok(Strategy::new(target, settings, false)?.with_theta(theta))
}

pub fn strategy_2qb_four(theta: f64) -> Result<Strategy> {
    let target = state::two_qubit_pure(theta)?;
    let alpha = four_setting_alpha(theta);
    let rest = (1.0 - alpha) / 3.0;
    let mut settings = vec![Setting::new("P_ZZ+", Weight::Real(alpha), p_zz_plus())];
    for (k, phi) in four_setting_rejected_states(theta).iter().enumerate() {
        let omega = &Matrix::identity(4) - &phi.projector();
        settings.push(Setting::new(format!("reject_phi_{}", k + 1), Weight::Real(rest), omega));
    }
    Ok(Strategy::new(target, settings, false)?.with_theta(theta))
}

/// `½ P_ZZ⁺ + ½ X_Ψ`
pub fn strategy_adaptive_two(theta: f64) -> Result<Strategy> {
    let target = state::two_qubit_pure(theta)?;
    let w = Weight::Ratio(1, 2);
    let settings = vec![Setting::new("P_ZZ+", w, p_zz_plus()), Setting::new("X_Psi", w, x_psi(theta))];
    Ok(Strategy::new(target, settings, true)?.with_theta(theta))
}

/// `cos²θ/(1+cos²θ) P_ZZ⁺ + X_Ψ/(2(1+cos²θ)) + Y_Ψ/(2(1+cos²θ))`
pub fn strategy_adaptive_three(theta: f64) -> Result<Strategy> {
    let target = state::two_qubit_pure(theta)?;
    let c2 = theta.cos().powi(2);
    let side = 1.0 / (2.0 * (1.0 + c2));
    let settings = vec![
        Setting::new("P_ZZ+", Weight::Real(c2 / (1.0 + c2)), p_zz_plus()),
        Setting::new("X_Psi", Weight::Real(side), x_psi(theta)),
        Setting::new("Y_Psi", Weight::Real(side), y_psi(theta)),
    ];
    Ok(Strategy::new(target, settings, true)?.with_theta(theta))
}

/// Equal weights over the generator projectors `(I + Sᵢ)/2`, or over all
/// `2ⁿ − 1` nontrivial stabilizer projectors when `full`.
pub fn strategy_stabilizer(spec: &StabilizerGroupSpec, full: bool) -> Result<Strategy> {
    let target = state::stabilizer_state(spec)?;
    let elements = if full { spec.nontrivial_elements() } else { spec.generators().to_vec() };
    let w = Weight::Ratio(1, elements.len() as u32);
    let settings =
        elements.iter().map(|p| Ok(Setting::new(p.to_string(), w, p.plus_projector()?))).collect::<Result<Vec<_>>>()?;
    Strategy::new(target, settings, false)
}

/// Named entries of the strategy catalog, as accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Catalog {
    Bell,
    BellExtended,
    TwoQubitThree,
    TwoQubitFour,
    AdaptiveTwo,
    AdaptiveThree,
    Ghz { n: usize, full: bool },
}

impl Catalog {
    pub fn needs_theta(self) -> bool {
        matches!(self, Catalog::TwoQubitThree | Catalog::TwoQubitFour | Catalog::AdaptiveTwo | Catalog::AdaptiveThree)
    }

    pub fn strategy(self, theta: Option<f64>) -> Result<Strategy> {
        let th = || theta.ok_or_else(|| Error::Domain(format!("'{self}' needs a theta value")));
        match self {
            Catalog::Bell => Ok(strategy_bell(false)),
            Catalog::BellExtended => Ok(strategy_bell(true)),
            Catalog::TwoQubitThree => strategy_2qb_three(th()?),
            Catalog::TwoQubitFour => strategy_2qb_four(th()?),
            Catalog::AdaptiveTwo => strategy_adaptive_two(th()?),
            Catalog::AdaptiveThree => strategy_adaptive_three(th()?),
            Catalog::Ghz { n, full } => strategy_stabilizer(&ghz_generators(n)?, full),
        }
    }

    /// Closed-form spectral gap.
    pub fn analytic_nu(self, theta: Option<f64>) -> Result<f64> {
        let th = || theta.ok_or_else(|| Error::Domain(format!("'{self}' needs a theta value")));
        Ok(match self {
            Catalog::Bell => 0.5,
            Catalog::BellExtended => 2.0 / 3.0,
            Catalog::TwoQubitThree => {
                check_theta(th()?)?;
                1.0 / 3.0
            }
            Catalog::TwoQubitFour => {
                let t = th()?;
                check_theta(t)?;
                1.0 / (2.0 + t.sin() * t.cos())
            }
            Catalog::AdaptiveTwo => {
                check_theta(th()?)?;
                0.5
            }
            Catalog::AdaptiveThree => {
                let t = th()?;
                check_theta(t)?;
                1.0 / (1.0 + t.cos().powi(2))
            }
            Catalog::Ghz { n, full: false } => 1.0 / n as f64,
            Catalog::Ghz { n, full: true } => {
                let m = (1u64 << n) as f64;
                (m / 2.0) / (m - 1.0)
            }
        })
    }

    pub fn all_fixed() -> Vec<Catalog> {
        vec![
            Catalog::Bell,
            Catalog::BellExtended,
            Catalog::TwoQubitThree,
            Catalog::TwoQubitFour,
            Catalog::AdaptiveTwo,
            Catalog::AdaptiveThree,
            Catalog::Ghz { n: 3, full: false },
            Catalog::Ghz { n: 3, full: true },
        ]
    }
}

impl fmt::Display for Catalog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Catalog::Bell => write!(f, "bell"),
            Catalog::BellExtended => write!(f, "bell-ext"),
            Catalog::TwoQubitThree => write!(f, "2qb3"),
            Catalog::TwoQubitFour => write!(f, "2qb4"),
            Catalog::AdaptiveTwo => write!(f, "adp2"),
            Catalog::AdaptiveThree => write!(f, "adp3"),
            Catalog::Ghz { n, full: false } => write!(f, "ghz{n}"),
            Catalog::Ghz { n, full: true } => write!(f, "ghz{n}-full"),
        }
    }
}

impl FromStr for Catalog {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bell" => Catalog::Bell,
            "bell-ext" | "bell3" => Catalog::BellExtended,
            "2qb3" => Catalog::TwoQubitThree,
            "2qb4" => Catalog::TwoQubitFour,
            "adp2" => Catalog::AdaptiveTwo,
            "adp3" => Catalog::AdaptiveThree,
            other => {
                let rest =
                    other.strip_prefix("ghz").ok_or_else(|| Error::Domain(format!("unknown strategy '{other}'")))?;
                let (num, full) = match rest.strip_suffix("-full") {
                    Some(n) => (n, true),
                    None => (rest, false),
                };
                let n = num.parse().map_err(|_| Error::Domain(format!("unknown strategy '{other}'")))?;
                if !(2..=10).contains(&n) {
                    return Err(Error::Domain(format!("GHZ size {n} outside 2..=10")));
                }
                Catalog::Ghz { n, full }
            }
        })
    }
}

/// `X…X` plus neighbouring `ZZ` checks; for n = 3 this is `{XXX, ZIZ, ZZI}`.
pub fn ghz_generators(n: usize) -> Result<StabilizerGroupSpec> {
    if !(2..=10).contains(&n) {
        return Err(Error::Size(format!("GHZ generators need 2 <= n <= 10, got {n}")));
    }
    let mut gens = vec![format!("+{}", "X".repeat(n))];
    if n == 3 {
        gens.push("+ZIZ".into());
        gens.push("+ZZI".into());
    } else {
        for k in 0..n - 1 {
            let s: String = (0..n).map(|j| if j == k || j == k + 1 { 'Z' } else { 'I' }).collect();
            gens.push(format!("+{s}"));
        }
    }
    StabilizerGroupSpec::parse(&gens.join(" "))
}

/// `R(θ) = [[cos θ, −sin θ], [sin θ, cos θ]]`
pub fn rotation(theta: f64) -> Matrix {
    Matrix::from_real(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()])
}

/// Full Kronecker product of single-qubit matrices.
pub fn local(ops: &[Matrix]) -> Matrix {
    kron_all(ops).expect("local operator within cap")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigs;

    const GRID: [f64; 5] = [0.1, PI / 8.0, PI / 6.0, PI / 5.0, 0.7];

    #[test]
    fn bell_gaps() {
        assert!((spectral_gap(&strategy_bell(false)).unwrap().nu - 0.5).abs() < 1e-10);
        assert!((spectral_gap(&strategy_bell(true)).unwrap().nu - 2.0 / 3.0).abs() < 1e-10);
        let s = strategy_bell(false);
        let psi = s.target().psi();
        assert!(s.operator().apply(psi).max_abs_diff(psi) < 1e-12);
    }

    #[test]
    fn bell_operator_spectrum() {
        let e = hermitian_eigs(&strategy_bell(false).operator()).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-10);
        assert!((e.eigenvalues[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn three_setting_gap_is_one_third() {
        for th in GRID {
            let s = strategy_2qb_three(th).unwrap();
            assert!((spectral_gap(&s).unwrap().nu - 1.0 / 3.0).abs() < 1e-8, "theta={th}");
            for set in s.settings() {
                assert!(set.omega.apply(s.target().psi()).max_abs_diff(s.target().psi()) < 1e-12);
            }
            let rank = hermitian_eigs(&s.settings()[1].omega).unwrap().eigenvalues.iter().filter(|&&l| l > 0.5).count();
            assert_eq!(rank, 3);
        }
        let e = hermitian_eigs(&strategy_2qb_three(PI / 6.0).unwrap().operator()).unwrap();
        assert!((e.eigenvalues[1] - 2.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn four_setting_gap_formula() {
        for k in 1..=20 {
            let th = k as f64 * (PI / 4.0) / 21.0;
            let s = strategy_2qb_four(th).unwrap();
            let want = 1.0 / (2.0 + th.sin() * th.cos());
            assert!((spectral_gap(&s).unwrap().nu - want).abs() < 1e-8, "theta={th}");
            let total: f64 = s.settings().iter().map(|x| x.weight.value()).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!((four_setting_alpha(PI / 4.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn adaptive_gaps() {
        for th in GRID {
            assert!((spectral_gap(&strategy_adaptive_two(th).unwrap()).unwrap().nu - 0.5).abs() < 1e-8);
            let want = 1.0 / (1.0 + th.cos().powi(2));
            assert!((spectral_gap(&strategy_adaptive_three(th).unwrap()).unwrap().nu - want).abs() < 1e-8);
            let psi = state::two_qubit_pure(th).unwrap();
            assert!(x_psi(th).apply(psi.psi()).max_abs_diff(psi.psi()) < 1e-12);
            assert!(y_psi(th).apply(psi.psi()).max_abs_diff(psi.psi()) < 1e-12);
        }
    }

    #[test]
    fn x_psi_matches_orbit_form() {
        for th in GRID {
            let o = adaptive_orbit(th);
            let orbit_form = &o[0].projector() + &o[2].projector();
            assert!(orbit_form.max_abs_diff(&x_psi(th)) < 1e-12);
        }
    }

    #[test]
    fn stabilizer_gaps() {
        let spec = ghz_generators(3).unwrap();
        assert!((spectral_gap(&strategy_stabilizer(&spec, false).unwrap()).unwrap().nu - 1.0 / 3.0).abs() < 1e-8);
        assert!((spectral_gap(&strategy_stabilizer(&spec, true).unwrap()).unwrap().nu - 4.0 / 7.0).abs() < 1e-8);
        let bell = StabilizerGroupSpec::parse("+XX +ZZ").unwrap();
        let via_stab = hermitian_eigs(&strategy_stabilizer(&bell, false).unwrap().operator()).unwrap();
        let direct = hermitian_eigs(&strategy_bell(false).operator()).unwrap();
        for (a, b) in via_stab.eigenvalues.iter().zip(&direct.eigenvalues) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn optimal_strategy_gap_is_one() {
        let t = state::ghz(3).unwrap();
        let g = spectral_gap(&strategy_optimal(&t)).unwrap();
        assert!((g.nu - 1.0).abs() < 1e-12);
        assert!(t.psi().inner(&g.witness).norm() < 1e-8);
    }

    #[test]
    fn witness_is_orthogonal_and_tight() {
        let s = strategy_bell(false);
        let g = spectral_gap(&s).unwrap();
        assert!(s.target().psi().inner(&g.witness).norm() < 1e-8);
        let val = g.witness.inner(&s.operator().apply(&g.witness)).re;
        assert!((val - g.lambda2).abs() < 1e-10);
    }

    #[test]
    fn gap_requires_fixed_point() {
        let t = state::bell_state();
        let bad = Matrix::identity(4).scale_real(0.5);
        assert!(matches!(gap_relative_to(&bad, t.psi()), Err(Error::Contract(_))));
    }

    #[test]
    fn strategy_validation() {
        let t = state::bell_state();
        let bad_weights = vec![
            Setting::new("a", Weight::Ratio(1, 3), p_zz_plus()),
            Setting::new("b", Weight::Ratio(1, 3), p_xx_plus()),
        ];
        assert!(matches!(Strategy::new(t.clone(), bad_weights, false), Err(Error::Contract(_))));
        let rejects = vec![Setting::new("zz-", Weight::Ratio(1, 1), &Matrix::identity(4) - &p_zz_plus())];
        assert!(matches!(Strategy::new(t.clone(), rejects, false), Err(Error::Contract(_))));
        let povm = vec![Setting::new("half", Weight::Ratio(1, 1), Matrix::identity(4).scale_real(0.5))];
        assert!(Strategy::new(t.clone(), povm.clone(), false).is_err());
        assert!(Strategy::new_relaxed(t, povm).unwrap().is_relaxed());
    }

    #[test]
    fn sample_complexity_oracle() {
        // Frozen from an independent evaluation: ln 20 / ln(1/0.99) = 298.0729, ν⁻¹ε⁻¹ ln 20 = 299.573.
        let sc = sample_complexity(1.0, 0.01, 0.05).unwrap();
        assert_eq!(sc, SampleComplexity { exact: 299, approx: 300 });
        // ln 10 / ln(1/0.95) = 44.89
        assert_eq!(sample_complexity(1.0, 0.05, 0.1).unwrap().exact, 45);
        assert_eq!(sample_complexity(0.5, 0.01, 0.05).unwrap(), SampleComplexity { exact: 598, approx: 600 });
        assert_eq!(sample_complexity(1.0, 0.3, 1.0).unwrap().exact, 0);
        assert!(sample_complexity(0.0, 0.1, 0.1).is_err());
        assert!(sample_complexity(1.0, 1.0, 0.1).is_err());
        assert!(sample_complexity(1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn approx_is_linear_in_inverse_gap() {
        let a = sample_complexity(1.0, 0.001, 0.01).unwrap().approx;
        let b = sample_complexity(0.5, 0.001, 0.01).unwrap().approx;
        assert!(b == 2 * a || b + 1 == 2 * a || b == 2 * a - 1);
    }

    #[test]
    fn json_round_trip() {
        for s in [
            strategy_bell(true),
            strategy_2qb_four(0.3).unwrap(),
            strategy_stabilizer(&ghz_generators(3).unwrap(), true).unwrap(),
        ] {
            let back = Strategy::from_json(&s.to_json()).unwrap();
            assert_eq!(back, s);
        }
        assert!(matches!(Strategy::from_json("{\"schema\": 1"), Err(Error::Parse { .. })));
    }

    #[test]
    fn catalog_selectors() {
        for cat in Catalog::all_fixed() {
            assert_eq!(cat.to_string().parse::<Catalog>().unwrap(), cat);
        }
        assert!("nope".parse::<Catalog>().is_err());
        assert!("ghz11".parse::<Catalog>().is_err());
        assert!(Catalog::TwoQubitThree.strategy(None).is_err());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn permuting_settings_keeps_gap(th in 0.05f64..0.75, seed in 0usize..6) {
            let s = strategy_2qb_four(th).unwrap();
            let perms = [[0, 1, 2, 3], [3, 2, 1, 0], [1, 0, 3, 2], [2, 3, 0, 1], [0, 2, 1, 3], [3, 0, 2, 1]];
            let a = spectral_gap(&s).unwrap().nu;
            let b = spectral_gap(&s.permuted(&perms[seed])).unwrap().nu;
            proptest::prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn exact_complexity_is_monotone(nu in 0.05f64..1.0, eps in 0.001f64..0.5, delta in 0.001f64..0.9, bump in 1.01f64..1.5) {
            let base = sample_complexity(nu, eps, delta).unwrap().exact;
            proptest::prop_assert!(sample_complexity((nu * bump).min(1.0), eps, delta).unwrap().exact <= base);
            proptest::prop_assert!(sample_complexity(nu, (eps * bump).min(0.99), delta).unwrap().exact <= base);
            proptest::prop_assert!(sample_complexity(nu, eps, (delta * bump).min(1.0)).unwrap().exact <= base);
        }

        #[test]
        fn target_is_top_eigenvector(th in 0.05f64..0.75) {
            for s in [strategy_2qb_three(th).unwrap(), strategy_2qb_four(th).unwrap(), strategy_adaptive_three(th).unwrap()] {
                let e = hermitian_eigs(&s.operator()).unwrap();
                proptest::prop_assert!((e.eigenvalues[0] - 1.0).abs() < 1e-8);
                proptest::prop_assert!(s.target().psi().inner(&e.eigenvectors[0]).norm() >= 1.0 - 1e-8);
            }
        }
    }
}
