//! Target states, stabilizer states and imperfect sources.

mod pauli;

pub use pauli::{Pauli, PauliString, StabilizerGroupSpec};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, orthocomplement_basis, qubits_for_dim, r, DensityMatrix, Matrix, StateVector, C64, STRUCTURAL_TOL,
};
use crate::rng;

/// A normalized pure state that a verifier wants to certify.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetState {
    label: String,
    psi: StateVector,
    n_qubits: usize,
}

impl TargetState {
    pub fn new(label: impl Into<String>, psi: StateVector) -> Result<Self> {
        let n_qubits = qubits_for_dim(psi.dim())?;
        if !psi.is_normalized(STRUCTURAL_TOL) {
            return Err(Error::Contract(format!("target state has norm {}", psi.norm())));
        }
        Ok(TargetState { label: label.into(), psi, n_qubits })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn psi(&self) -> &StateVector {
        &self.psi
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.psi.dim()
    }

    pub fn projector(&self) -> Matrix {
        self.psi.projector()
    }
}

/// Rejects angles outside the open interval (0, π/4).
pub fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta > 0.0 && theta < std::f64::consts::FRAC_PI_4 {
        Ok(())
    } else {
        Err(Error::Domain(format!("theta = {theta} must lie in the open interval (0, pi/4)")))
    }
}

/// `(|00> + |11>)/√2`
pub fn bell_state() -> TargetState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    TargetState::new("bell", StateVector::from_real(&[h, 0.0, 0.0, h])).expect("normalized")
}

/// `sin θ |00> + cos θ |11>` for θ ∈ (0, π/4).
pub fn two_qubit_pure(theta: f64) -> Result<TargetState> {
    check_theta(theta)?;
    let psi = StateVector::from_real(&[theta.sin(), 0.0, 0.0, theta.cos()]);
    TargetState::new(format!("2qb(theta={theta})"), psi)
}

/// `(|0…0> + |1…1>)/√2` on `n` qubits, 2 ≤ n ≤ 10.
pub fn ghz(n: usize) -> Result<TargetState> {
    if !(2..=10).contains(&n) {
        return Err(Error::Size(format!("GHZ state needs 2 <= n <= 10 qubits, got {n}")));
    }
    let dim = 1usize << n;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = StateVector::zeros(dim);
    psi.amplitudes_mut()[0] = r(h);
    psi.amplitudes_mut()[dim - 1] = r(h);
    TargetState::new(format!("ghz{n}"), psi)
}

/// The unique joint +1 eigenstate of the generators.
///
/// Projects computational basis states, in index order, with `∏(I + Sᵢ)/2`
/// and keeps the first one whose image has norm above 1e-8. The result's
/// first nonzero amplitude is made real and positive.
pub fn stabilizer_state(spec: &StabilizerGroupSpec) -> Result<TargetState> {
    let n = spec.n_qubits();
    if n > 14 {
        return Err(Error::Size(format!("{n}-qubit stabilizer state is too large for dense synthesis")));
    }
    let dim = 1usize << n;
    for seed in 0..dim {
        let mut v = StateVector::basis(dim, seed);
        for g in spec.generators() {
            v = v.add(&g.apply(&v)).scale(r(0.5));
        }
        if v.norm() > 1e-8 {
            let psi = v.normalized()?.canonical_phase(1e-12);
            let label = spec.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",");
            return TargetState::new(format!("stab[{label}]"), psi);
        }
    }
    Err(Error::Internal("stabilizer projector annihilated every basis state".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `√(1−ε)|ψ> + √ε|ψ⊥>` with a fixed, adversarially chosen `|ψ⊥>`.
    WorstCaseOrthogonal,
    /// As above with `|ψ⊥>` Haar-random in the orthocomplement.
    RandomOrthogonal,
    /// `(1−ε)|ψ><ψ| + ε I/d`
    Depolarizing,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "worst_case" | "worst_case_orthogonal" => Ok(NoiseKind::WorstCaseOrthogonal),
            "random" | "random_orthogonal" => Ok(NoiseKind::RandomOrthogonal),
            "depolarizing" => Ok(NoiseKind::Depolarizing),
            other => Err(Error::Domain(format!("unknown noise kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub epsilon: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, epsilon: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::Domain(format!("infidelity {epsilon} must lie in [0, 1)")));
        }
        Ok(NoiseSpec { kind, epsilon, seed })
    }

    pub fn perfect() -> Self {
        NoiseSpec { kind: NoiseKind::WorstCaseOrthogonal, epsilon: 0.0, seed: 0 }
    }
}

/// Output of an imperfect source.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl SourceState {
    pub fn dim(&self) -> usize {
        match self {
            SourceState::Pure(v) => v.dim(),
            SourceState::Mixed(m) => m.dim(),
        }
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        match self {
            SourceState::Pure(v) => DensityMatrix::from_pure(v),
            SourceState::Mixed(m) => m.clone(),
        }
    }
}

/// Builds the state emitted by a source with the given noise.
///
/// For the worst case, `witness` (typically the λ₂ eigenvector of the
/// strategy under test) supplies `|ψ⊥>`; without it the first Gram–Schmidt
/// complement vector is used.
pub fn perturbed_state(target: &TargetState, noise: &NoiseSpec, witness: Option<&StateVector>) -> Result<SourceState> {
    let eps = noise.epsilon;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::Domain(format!("infidelity {eps} must lie in [0, 1)")));
    }
    let psi = target.psi();
    match noise.kind {
        NoiseKind::Depolarizing => {
            let d = psi.dim() as f64;
            let m = &psi.projector().scale_real(1.0 - eps) + &Matrix::identity(psi.dim()).scale_real(eps / d);
            Ok(SourceState::Mixed(DensityMatrix::new(m)?))
        }
        NoiseKind::WorstCaseOrthogonal | NoiseKind::RandomOrthogonal => {
            if eps == 0.0 {
                return Ok(SourceState::Pure(psi.clone()));
            }
            let perp = match (noise.kind, witness) {
                (NoiseKind::WorstCaseOrthogonal, Some(w)) => project_out(psi, w)?,
                (NoiseKind::WorstCaseOrthogonal, None) => orthocomplement_basis(psi)
                    .into_iter()
                    .next()
                    .ok_or_else(|| Error::Size("one-dimensional space has no orthocomplement".into()))?,
                _ => {
                    let mut rng = rng::stream(noise.seed, &[0x50_52_50]);
                    project_out(psi, &haar_state(psi.dim(), &mut rng))?
                }
            };
            let v = psi.scale(r((1.0 - eps).sqrt())).add(&perp.scale(r(eps.sqrt())));
            Ok(SourceState::Pure(v))
        }
    }
}

fn project_out(psi: &StateVector, w: &StateVector) -> Result<StateVector> {
    let v = w.sub(&psi.scale(psi.inner(w)));
    if v.norm() < 1e-8 {
        return Err(Error::Contract("witness has no component orthogonal to the target".into()));
    }
    v.normalized()
}

/// `F = <ψ|σ|ψ>`
pub fn fidelity(sigma: &SourceState, target: &TargetState) -> Result<f64> {
    if sigma.dim() != target.dim() {
        return Err(Error::Size(format!(
            "state of dimension {} compared with target of dimension {}",
            sigma.dim(),
            target.dim()
        )));
    }
    let f = match sigma {
        SourceState::Pure(v) => target.psi().inner(v).norm_sqr(),
        SourceState::Mixed(m) => m.expectation(target.psi()),
    };
    Ok(f.clamp(0.0, 1.0))
}

/// Haar-random pure state.
pub fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let amps: Vec<C64> = (0..dim).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let v = StateVector::from_amplitudes(amps).expect("finite normals");
        if let Ok(n) = v.normalized() {
            return n;
        }
    }
}

/// Random density matrix `G G† / tr(G G†)` with a complex Ginibre `G` of the given rank.
pub fn random_density_matrix<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let rank = rank.clamp(1, dim);
    let mut m = Matrix::zeros(dim, dim);
    for _ in 0..rank {
        let amps: Vec<C64> = (0..dim).map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let v = StateVector::from_amplitudes(amps).expect("finite normals");
        m = &m + &v.projector();
    }
    let tr = m.trace().re;
    let m = m.scale_real(1.0 / tr).hermitian_part();
    DensityMatrix::new(m).expect("Ginibre construction is a density matrix")
}

/// Haar-random 2×2 unitary.
pub fn random_unitary_2x2<R: Rng + ?Sized>(rng: &mut R) -> Matrix {
    // Columns: a Haar state and its orthogonal partner, times a random phase.
    let v = haar_state(2, rng);
    let [a, b] = [v.amplitudes()[0], v.amplitudes()[1]];
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let ph = C64::from_polar(1.0, phi);
    Matrix::from_rows(&[&[a, -b.conj() * ph], &[b, a.conj() * ph]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigs;

    fn spec(s: &str) -> StabilizerGroupSpec {
        StabilizerGroupSpec::parse(s).unwrap()
    }

    #[test]
    fn bell_amplitudes() {
        let b = bell_state();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(b.psi().max_abs_diff(&StateVector::from_real(&[h, 0.0, 0.0, h])) < 1e-15);
        assert!((b.psi().norm() - 1.0).abs() < 1e-15);
        let pzz = spec("+ZZ +XX").generators()[0].plus_projector().unwrap();
        assert!(pzz.apply(b.psi()).max_abs_diff(b.psi()) < 1e-15);
    }

    #[test]
    fn two_qubit_pure_domain_and_values() {
        let t = two_qubit_pure(std::f64::consts::PI / 6.0).unwrap();
        let expect = StateVector::from_real(&[0.5, 0.0, 0.0, 3f64.sqrt() / 2.0]);
        assert!(t.psi().max_abs_diff(&expect) < 1e-15);
        let near = two_qubit_pure(std::f64::consts::FRAC_PI_4 - 1e-6).unwrap();
        assert!(near.psi().max_abs_diff(bell_state().psi()) < 1e-6);
        for bad in [0.0, std::f64::consts::FRAC_PI_4, -0.1, 1.0, f64::NAN] {
            assert!(matches!(two_qubit_pure(bad), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn ghz_states() {
        let g3 = ghz(3).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = [0.0; 8];
        amps[0] = h;
        amps[7] = h;
        assert!(g3.psi().max_abs_diff(&StateVector::from_real(&amps)) < 1e-15);
        assert_eq!(ghz(2).unwrap().psi(), bell_state().psi());
        let xxx: PauliString = "+XXX".parse().unwrap();
        assert!(xxx.apply(g3.psi()).max_abs_diff(g3.psi()) < 1e-15);
        assert!(matches!(ghz(1), Err(Error::Size(_))));
        assert!(matches!(ghz(11), Err(Error::Size(_))));
    }

    #[test]
    fn stabilizer_synthesis() {
        let zero = stabilizer_state(&spec("+Z")).unwrap();
        assert_eq!(zero.psi(), &StateVector::basis(2, 0));
        let g = stabilizer_state(&spec("+XXX +ZIZ +ZZI")).unwrap();
        assert!(g.psi().max_abs_diff(ghz(3).unwrap().psi()) < 1e-12);
        let minus = stabilizer_state(&spec("-X")).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(minus.psi().max_abs_diff(&StateVector::from_real(&[h, -h])) < 1e-12);
    }

    #[test]
    fn stabilizer_bell_matches_brute_force() {
        // Oracle: unique +1 eigenvector of (I+XX)(I+ZZ)/4 by diagonalization.
        let s = spec("+XX +ZZ");
        let p0 = s.generators()[0].plus_projector().unwrap();
        let p1 = s.generators()[1].plus_projector().unwrap();
        let e = hermitian_eigs(&p0.matmul(&p1).hermitian_part()).unwrap();
        assert!((e.eigenvalues[0] - 1.0).abs() < 1e-10);
        assert!(e.eigenvalues[1] < 0.5);
        let brute = e.eigenvectors[0].canonical_phase(1e-12);
        let built = stabilizer_state(&s).unwrap();
        assert!(built.psi().max_abs_diff(&brute) < 1e-10);
        assert!(built.psi().max_abs_diff(bell_state().psi()) < 1e-12);
    }

    #[test]
    fn stabilizer_state_is_fixed_by_generators() {
        for text in ["+XXX +ZIZ +ZZI", "-XX +ZZ", "+XZI +ZXZ +IZX", "-YY +XX", "+XZZX +ZXXZ +XXZZ -ZZZZ"] {
            let Ok(s) = StabilizerGroupSpec::parse(text) else { continue };
            let t = stabilizer_state(&s).unwrap();
            for g in s.generators() {
                assert!(g.apply(t.psi()).max_abs_diff(t.psi()) < 1e-10, "{text}: {g}");
            }
        }
    }

    #[test]
    fn generator_order_does_not_change_state() {
        let a = stabilizer_state(&spec("+XXX +ZIZ +ZZI")).unwrap();
        let b = stabilizer_state(&spec("+ZZI +XXX +ZIZ")).unwrap();
        assert!(a.psi().max_abs_diff(b.psi()) < 1e-12);
    }

    #[test]
    fn perturbed_state_fidelity() {
        let t = ghz(3).unwrap();
        assert_eq!(perturbed_state(&t, &NoiseSpec::perfect(), None).unwrap(), SourceState::Pure(t.psi().clone()));
        for kind in [NoiseKind::WorstCaseOrthogonal, NoiseKind::RandomOrthogonal] {
            for eps in [0.01, 0.2, 0.5, 0.9] {
                let s = perturbed_state(&t, &NoiseSpec::new(kind, eps, 11).unwrap(), None).unwrap();
                assert!((fidelity(&s, &t).unwrap() - (1.0 - eps)).abs() < 1e-10);
                if let SourceState::Pure(v) = &s {
                    assert!((v.norm() - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn random_orthogonal_is_reproducible() {
        let t = bell_state();
        let n = NoiseSpec::new(NoiseKind::RandomOrthogonal, 0.3, 99).unwrap();
        let a = perturbed_state(&t, &n, None).unwrap();
        let b = perturbed_state(&t, &n, None).unwrap();
        assert_eq!(a, b);
        let other = perturbed_state(&t, &NoiseSpec { seed: 100, ..n }, None).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn depolarizing_fidelity() {
        // <ψ|((1−ε)|ψ><ψ| + εI/4)|ψ> = 1 − ε + ε/4
        let t = bell_state();
        let eps = 0.4;
        let s = perturbed_state(&t, &NoiseSpec::new(NoiseKind::Depolarizing, eps, 0).unwrap(), None).unwrap();
        assert!((fidelity(&s, &t).unwrap() - (1.0 - eps + eps / 4.0)).abs() < 1e-12);
    }

    #[test]
    fn fidelity_edge_cases() {
        let t = bell_state();
        let psi = SourceState::Pure(t.psi().clone());
        assert!((fidelity(&psi, &t).unwrap() - 1.0).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let perp = SourceState::Pure(StateVector::from_real(&[h, 0.0, 0.0, -h]));
        assert!(fidelity(&perp, &t).unwrap() < 1e-15);
        let wrong = SourceState::Pure(StateVector::basis(8, 0));
        assert!(matches!(fidelity(&wrong, &t), Err(Error::Size(_))));
    }

    #[test]
    fn noise_spec_rejects_bad_epsilon() {
        assert!(NoiseSpec::new(NoiseKind::Depolarizing, 1.0, 0).is_err());
        assert!(NoiseSpec::new(NoiseKind::Depolarizing, -0.1, 0).is_err());
    }

    #[test]
    fn random_helpers_are_valid() {
        let mut rng = rng::stream(5, &[1]);
        let u = random_unitary_2x2(&mut rng);
        assert!(u.is_unitary(1e-12));
        let rho = random_density_matrix(4, 4, &mut rng);
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
    }
}
