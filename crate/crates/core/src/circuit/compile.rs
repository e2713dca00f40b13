//! Gate-level realizations of the QND tests.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{gates, kron_all, Matrix, StateVector};
use crate::state::{check_theta, Pauli, PauliString};
use crate::strategy::{rotation, Catalog};

use super::{circuit_unitary, Branch, Circuit, Gate, PassRule};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoQubitVariant {
    /// One ancilla and an X-conjugated Toffoli.
    Toffoli,
    /// Two ancillas and two CNOTs; the copy passes unless both read 0.
    CnotPair,
}

impl FromStr for TwoQubitVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toffoli" => Ok(TwoQubitVariant::Toffoli),
            "cnot_pair" | "cnot-pair" => Ok(TwoQubitVariant::CnotPair),
            other => Err(Error::Domain(format!("unknown variant '{other}'"))),
        }
    }
}

fn hadamards(qs: &[usize]) -> Vec<Gate> {
    qs.iter().map(|&q| Gate::H(q)).collect()
}

fn cnots_to(controls: &[usize], target: usize) -> Vec<Gate> {
    controls.iter().map(|&c| Gate::Cnot { control: c, target }).collect()
}

fn qnd(label: &str, n_system: usize, body: Vec<Gate>) -> Circuit {
    let a = n_system;
    let mut g = body;
    g.push(Gate::MeasureZ(a));
    Circuit::new(label, n_system, 1, g, None, PassRule::AllZero(vec![a])).expect("well-formed compiled circuit")
}

/// Parity check of two qubits, and the same check in the X basis.
pub fn compile_bell() -> Vec<Circuit> {
    let zz = cnots_to(&[0, 1], 2);
    let mut xx = hadamards(&[0, 1]);
    xx.extend(cnots_to(&[0, 1], 2));
    xx.extend(hadamards(&[0, 1]));
    vec![qnd("P_ZZ+", 2, zz), qnd("P_XX+", 2, xx)]
}

/// `R₂ = H ⊗ R(θ)` and `R₃ = XH ⊗ R(−θ)`; they send the rejected product
/// states of the three-setting strategy to `|00>`.
pub fn two_qubit_rotations(theta: f64) -> [(Matrix, Matrix); 2] {
    [(gates::hadamard(), rotation(theta)), (gates::pauli_x().matmul(&gates::hadamard()), rotation(-theta))]
}

fn rotate(pair: &(Matrix, Matrix), inverse: bool) -> Vec<Gate> {
    let f = |m: &Matrix| if inverse { m.dagger() } else { m.clone() };
    vec![Gate::u1q(0, &f(&pair.0)), Gate::u1q(1, &f(&pair.1))]
}

/// Circuits for the three-setting two-qubit protocol, in the order
/// `P_ZZ⁺`, `Ω₂`, `Ω₃`.
pub fn compile_two_qubit(theta: f64, variant: TwoQubitVariant) -> Result<Vec<Circuit>> {
    check_theta(theta)?;
    let mut out = vec![qnd("P_ZZ+", 2, cnots_to(&[0, 1], 2))];
    for (k, rot) in two_qubit_rotations(theta).iter().enumerate() {
        let label = format!("Omega_{}", k + 2);
        let mut g = rotate(rot, false);
        match variant {
            TwoQubitVariant::Toffoli => {
                g.extend([
                    Gate::X(0),
                    Gate::X(1),
                    Gate::Toffoli { controls: vec![0, 1], target: 2 },
                    Gate::X(0),
                    Gate::X(1),
                ]);
                g.extend(rotate(rot, true));
                out.push(qnd(&label, 2, g));
            }
            TwoQubitVariant::CnotPair => {
                g.extend([Gate::Cnot { control: 0, target: 2 }, Gate::Cnot { control: 1, target: 3 }]);
                g.extend(rotate(rot, true));
                g.extend([Gate::MeasureZ(2), Gate::MeasureZ(3)]);
                out.push(Circuit::new(label, 2, 2, g, None, PassRule::NotAllZero(vec![2, 3]))?);
            }
        }
    }
    Ok(out)
}

/// Generalized-Toffoli test and its CNOT replacement on `n` system qubits.
///
/// The first circuit conjugates an `n`-control Toffoli by `X⊗n` and the
/// local rotations, with one ancilla. The second couples qubit `i` to its
/// own ancilla through a rotated CNOT and passes unless every ancilla
/// reads 0. Ancilla `i` of the second circuit is wire `n + i`, so the
/// first circuit's single ancilla lines up with ancilla 0.
pub fn decompose_generalized_toffoli(n: usize, rotations: Option<&[Matrix]>) -> Result<(Circuit, Circuit)> {
    if !(1..=8).contains(&n) {
        return Err(Error::Size(format!("generalized Toffoli needs 1 <= n <= 8, got {n}")));
    }
    let rots: Vec<Matrix> = match rotations {
        Some(r) if r.len() == n => r.to_vec(),
        Some(r) => return Err(Error::Size(format!("{} rotations for {n} qubits", r.len()))),
        None => vec![gates::identity(); n],
    };
    for m in &rots {
        if m.rows() != 2 || m.cols() != 2 || !m.is_unitary(1e-10) {
            return Err(Error::Contract("local rotation must be a 2x2 unitary".into()));
        }
    }
    let sys: Vec<usize> = (0..n).collect();
    let fwd: Vec<Gate> = rots.iter().enumerate().map(|(q, m)| Gate::u1q(q, m)).collect();
    let back: Vec<Gate> = rots.iter().enumerate().map(|(q, m)| Gate::u1q(q, &m.dagger())).collect();

    let mut g = fwd.clone();
    g.extend(sys.iter().map(|&q| Gate::X(q)));
    g.push(Gate::Toffoli { controls: sys.clone(), target: n });
    g.extend(sys.iter().map(|&q| Gate::X(q)));
    g.extend(back.clone());
    g.push(Gate::MeasureZ(n));
    let toffoli = Circuit::new(format!("toffoli_{n}"), n, 1, g, None, PassRule::AllZero(vec![n]))?;

    let mut g = fwd;
    g.extend(sys.iter().map(|&q| Gate::Cnot { control: q, target: n + q }));
    g.extend(back);
    g.extend((n..2 * n).map(Gate::MeasureZ));
    let pair = Circuit::new(format!("cnots_{n}"), n, n, g, None, PassRule::NotAllZero((n..2 * n).collect()))?;
    Ok((toffoli, pair))
}

/// Largest deviation between `I − K` of the CNOT replacement and the Toffoli
/// test (padded with idle ancillas) on inputs `|v>⊗|0…0>`.
pub fn toffoli_equivalence_deviation(toffoli: &Circuit, pair: &Circuit, inputs: &[StateVector]) -> Result<f64> {
    let n = toffoli.n_system();
    let mut worst: f64 = 0.0;
    let reject: Vec<u8> = vec![0; n];
    for v in inputs {
        let wide = v.with_ancillas(n)?;
        let lhs = wide.sub(&pair.run_unnormalized(&wide, &reject)?);
        let narrow = toffoli.run_unnormalized(&v.with_ancillas(1)?, &[0])?;
        let rhs = narrow.kron(&StateVector::basis(1 << (n - 1), 0))?;
        worst = worst.max(lhs.max_abs_diff(&rhs));
    }
    Ok(worst)
}

/// `R₊` and `R₋`, sending `|φ±⊥>` to `|0>`.
pub fn adaptive_rotations(theta: f64) -> (Matrix, Matrix) {
    let (s, c) = (theta.sin(), theta.cos());
    (Matrix::from_real(2, 2, &[s, c, -c, s]), Matrix::from_real(2, 2, &[s, -c, c, s]))
}

/// Adaptive test `X_Ψ`: measure qubit 0 in the X basis through ancilla 2,
/// then check qubit 1 against `|φ±⊥>` through ancilla 3.
pub fn compile_adaptive(theta: f64) -> Result<Circuit> {
    check_theta(theta)?;
    let (rp, rm) = adaptive_rotations(theta);
    let arm = |r: &Matrix| {
        vec![
            Gate::u1q(1, r),
            Gate::Cnot { control: 1, target: 3 },
            Gate::u1q(1, &r.dagger()),
            Gate::H(0),
            Gate::MeasureZ(3),
        ]
    };
    let branch = Branch { qubit: 2, on_zero: arm(&rp), on_one: arm(&rm), labels: ["plus".into(), "minus".into()] };
    Circuit::new(
        "X_Psi",
        2,
        2,
        vec![Gate::H(0), Gate::Cnot { control: 0, target: 2 }, Gate::MeasureZ(2)],
        Some(branch),
        PassRule::AllZero(vec![3]),
    )
}

fn on4(ops: [&Matrix; 4]) -> Matrix {
    kron_all(ops).expect("four qubits")
}

/// `|0><0|_c ⊗ I + |1><1|_c ⊗ X_t` on four wires.
fn cnot4(control: usize, target: usize) -> Matrix {
    let id = gates::identity();
    let factors = |ctrl: Matrix, tgt: Matrix| {
        let mut f = [id.clone(), id.clone(), id.clone(), id.clone()];
        f[control] = ctrl;
        f[target] = tgt;
        kron_all(&f).expect("four qubits")
    };
    &factors(gates::proj0(), id.clone()) + &factors(gates::proj1(), gates::pauli_x())
}

/// Two-term adaptive operator with the first ancilla measured mid-way.
pub fn adaptive_reference_operator(theta: f64) -> Result<Matrix> {
    check_theta(theta)?;
    let (rp, rm) = adaptive_rotations(theta);
    let (id, h) = (gates::identity(), gates::hadamard());
    let (p0, p1) = (gates::proj0(), gates::proj1());
    let term = |r: &Matrix, pa: &Matrix| {
        on4([&h, &r.dagger(), &id, &id])
            .matmul(&on4([&id, &id, &id, &p0]))
            .matmul(&cnot4(1, 3))
            .matmul(&on4([&id, r, &id, &id]))
            .matmul(&on4([&id, &id, pa, &id]))
            .matmul(&cnot4(0, 2))
            .matmul(&on4([&h, &id, &id, &id]))
    };
    Ok(&term(&rp, &p0) + &term(&rm, &p1))
}

/// The same operator with both ancilla projections moved to the end.
pub fn adaptive_deferred_operator(theta: f64) -> Result<Matrix> {
    check_theta(theta)?;
    let (rp, rm) = adaptive_rotations(theta);
    let (id, h) = (gates::identity(), gates::hadamard());
    let (p0, p1) = (gates::proj0(), gates::proj1());
    let term = |r: &Matrix, pa: &Matrix| {
        on4([&id, &id, pa, &p0])
            .matmul(&on4([&h, &r.dagger(), &id, &id]))
            .matmul(&cnot4(1, 3))
            .matmul(&on4([&id, r, &id, &id]))
            .matmul(&cnot4(0, 2))
            .matmul(&on4([&h, &id, &id, &id]))
    };
    Ok(&term(&rp, &p0) + &term(&rm, &p1))
}

/// Stabilizer checks `XXX`, `ZIZ`, `ZZI` for the three-qubit GHZ state.
pub fn compile_ghz() -> Vec<Circuit> {
    let mut m1 = hadamards(&[0, 1, 2]);
    m1.extend(cnots_to(&[0, 1, 2], 3));
    m1.extend(hadamards(&[0, 1, 2]));
    vec![qnd("+XXX", 3, m1), qnd("+ZIZ", 3, cnots_to(&[0, 2], 3)), qnd("+ZZI", 3, cnots_to(&[0, 1], 3))]
}

/// QND check of `(I + S)/2` for a Pauli string `S`: each non-identity
/// factor is rotated to Z, its parity is copied to the ancilla, and a
/// negative sign flips the ancilla before it is read.
pub fn compile_pauli_check(p: &PauliString) -> Result<Circuit> {
    if p.is_identity() {
        return Err(Error::Contract("identity check carries no information".into()));
    }
    let n = p.n_qubits();
    let to_z_y = gates::hadamard().matmul(&gates::phase().dagger());
    let mut pre = Vec::new();
    let mut post = Vec::new();
    let mut controls = Vec::new();
    for (q, op) in p.ops().iter().enumerate() {
        match op {
            Pauli::I => continue,
            Pauli::Z => {}
            Pauli::X => {
                pre.push(Gate::H(q));
                post.push(Gate::H(q));
            }
            Pauli::Y => {
                pre.push(Gate::u1q(q, &to_z_y));
                post.push(Gate::u1q(q, &to_z_y.dagger()));
            }
        }
        controls.push(q);
    }
    let mut g = pre;
    g.extend(cnots_to(&controls, n));
    g.extend(post);
    if p.is_negative() {
        g.push(Gate::X(n));
    }
    Ok(qnd(&p.to_string(), n, g))
}

/// Compiled QND circuits for a catalog entry, one per test and in the
/// strategy's order. `None` when some test has no circuit.
pub fn circuits_for_catalog(
    cat: Catalog,
    theta: Option<f64>,
    variant: TwoQubitVariant,
) -> Result<Option<Vec<Circuit>>> {
    let th = || theta.ok_or_else(|| Error::Domain(format!("'{cat}' needs a theta value")));
    Ok(match cat {
        Catalog::Bell => Some(compile_bell()),
        Catalog::BellExtended => {
            let mut v = compile_bell();
            v.push(compile_pauli_check(&"-YY".parse()?)?);
            Some(v)
        }
        Catalog::TwoQubitThree => Some(compile_two_qubit(th()?, variant)?),
        Catalog::AdaptiveTwo => Some(vec![qnd("P_ZZ+", 2, cnots_to(&[0, 1], 2)), compile_adaptive(th()?)?]),
        Catalog::TwoQubitFour | Catalog::AdaptiveThree => None,
        Catalog::Ghz { n: 3, full: false } => Some(compile_ghz()),
        Catalog::Ghz { .. } => {
            let s = cat.strategy(theta)?;
            let spec_paulis: Vec<PauliString> = s.settings().iter().map(|x| x.label.parse()).collect::<Result<_>>()?;
            Some(spec_paulis.iter().map(compile_pauli_check).collect::<Result<_>>()?)
        }
    })
}

/// Unitary of the gates before the final ancilla readout, for circuits
/// whose only measurements come last.
pub fn coupling_unitary(c: &Circuit) -> Result<Matrix> {
    if c.branch().is_some() {
        return Err(Error::Contract("branching circuit has no single coupling unitary".into()));
    }
    let first_meas = c.gates().iter().position(|g| matches!(g, Gate::MeasureZ(_))).unwrap_or(c.gates().len());
    if c.gates()[first_meas..].iter().any(|g| !matches!(g, Gate::MeasureZ(_))) {
        return Err(Error::Contract("gates follow a measurement".into()));
    }
    let body = Circuit::unitary_only(c.label.clone(), c.n_qubits(), c.gates()[..first_meas].to_vec())?;
    circuit_unitary(&body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ndqv::{build_qnd_setting, with_ancilla_zero, SequentialProtocol};
    use crate::rng;
    use crate::state::{self, haar_state, random_density_matrix, random_unitary_2x2};
    use crate::strategy::{self, p_xx_plus, p_zz_plus, x_psi};
    use std::f64::consts::PI;

    const THETAS: [f64; 3] = [0.2, PI / 6.0, 0.7];

    #[test]
    fn bell_couplings_match_engine() {
        let [c1, c2]: [Circuit; 2] = compile_bell().try_into().unwrap();
        let u1 = build_qnd_setting("zz", p_zz_plus()).unwrap();
        let u2 = build_qnd_setting("xx", p_xx_plus()).unwrap();
        assert!(coupling_unitary(&c1).unwrap().max_abs_diff(&u1.u) < 1e-10);
        assert!(coupling_unitary(&c2).unwrap().max_abs_diff(&u2.u) < 1e-10);
        assert!(c1.pass_operator().unwrap().max_abs_diff(&u1.m_pass) < 1e-10);
        assert!(c2.pass_operator().unwrap().max_abs_diff(&u2.m_pass) < 1e-10);
    }

    #[test]
    fn bell_circuit_outcomes() {
        let c = &compile_bell()[0];
        let phi = state::bell_state().psi().with_ancillas(1).unwrap();
        let (post, rec) = c.run_forced(&phi, &[0]).unwrap();
        assert!((rec.probability - 1.0).abs() < 1e-12);
        assert!(post.max_abs_diff(&phi) < 1e-12);
        let odd = StateVector::basis(8, 0b010);
        let (_, rec) = c.run_forced(&odd, &[1]).unwrap();
        assert!((rec.probability - 1.0).abs() < 1e-12);
        assert!(c.run_forced(&odd, &[0]).is_err());
    }

    #[test]
    fn rotations_send_rejected_states_to_zero() {
        for th in THETAS {
            let [r2, r3] = two_qubit_rotations(th);
            let v2 = strategy::plus().kron(&strategy::phi_pm(th, 1.0)).unwrap();
            let v3 = strategy::minus().kron(&strategy::phi_pm(th, -1.0)).unwrap();
            let m2 = r2.0.kron(&r2.1).unwrap();
            let m3 = r3.0.kron(&r3.1).unwrap();
            assert!(m2.apply(&v2).max_abs_diff(&StateVector::basis(4, 0)) < 1e-10);
            assert!(m3.apply(&v3).max_abs_diff(&StateVector::basis(4, 0)) < 1e-10);
            let (rp, rm) = adaptive_rotations(th);
            assert!(rp.apply(&strategy::phi_pm_perp(th, 1.0)).max_abs_diff(&StateVector::basis(2, 0)) < 1e-12);
            assert!(rm.apply(&strategy::phi_pm_perp(th, -1.0)).max_abs_diff(&StateVector::basis(2, 0)) < 1e-12);
        }
    }

    #[test]
    fn toffoli_variant_matches_engine() {
        for th in THETAS {
            let circuits = compile_two_qubit(th, TwoQubitVariant::Toffoli).unwrap();
            for (c, omega) in circuits.iter().zip(strategy::two_qubit_three_tests(th)) {
                let s = build_qnd_setting("t", omega).unwrap();
                assert!(coupling_unitary(c).unwrap().max_abs_diff(&s.u) < 1e-10);
                assert!(c.pass_operator().unwrap().max_abs_diff(&s.m_pass) < 1e-10);
            }
        }
    }

    #[test]
    fn cnot_pair_is_conditionally_equivalent() {
        let mut g = rng::stream(21, &[0]);
        for th in THETAS {
            let tof = compile_two_qubit(th, TwoQubitVariant::Toffoli).unwrap();
            let pair = compile_two_qubit(th, TwoQubitVariant::CnotPair).unwrap();
            for i in 1..3 {
                let mt = tof[i].pass_operator().unwrap();
                let mb = pair[i].pass_operator().unwrap();
                for _ in 0..10 {
                    let sigma = random_density_matrix(4, 2, &mut g);
                    let lhs = mt.matmul(&with_ancilla_zero(sigma.matrix(), 1).unwrap()).ancilla_zero_block(1);
                    let rhs = mb.matmul(&with_ancilla_zero(sigma.matrix(), 2).unwrap()).ancilla_zero_block(2);
                    assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
                    let full = mb.matmul(&with_ancilla_zero(sigma.matrix(), 2).unwrap());
                    assert!(full.max_abs_diff(&with_ancilla_zero(&rhs, 2).unwrap()) <= 1e-9);
                }
                assert!(
                    pair[i]
                        .effective_system_operator()
                        .unwrap()
                        .max_abs_diff(&tof[i].effective_system_operator().unwrap())
                        < 1e-10
                );
            }
        }
    }

    #[test]
    fn cnot_pair_pass_probability_is_born() {
        let th = 0.3;
        let pair = compile_two_qubit(th, TwoQubitVariant::CnotPair).unwrap();
        let omegas = strategy::two_qubit_three_tests(th);
        let mut g = rng::stream(2, &[2]);
        for _ in 0..10 {
            let v = haar_state(4, &mut g);
            for i in 1..3 {
                let want = v.inner(&omegas[i].apply(&v)).re;
                assert!((pair[i].pass_probability(&v).unwrap() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn two_qubit_sequential_gap_is_one() {
        for variant in [TwoQubitVariant::Toffoli, TwoQubitVariant::CnotPair] {
            for th in THETAS {
                let t = state::two_qubit_pure(th).unwrap();
                let c = compile_two_qubit(th, variant).unwrap();
                let prod =
                    c.iter().fold(Matrix::identity(4), |acc, x| x.effective_system_operator().unwrap().matmul(&acc));
                assert!(prod.max_abs_diff(&t.projector()) < 1e-9);
                let gap = strategy::gap_relative_to(&prod, t.psi()).unwrap();
                assert!((gap.nu - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn generalized_toffoli_equivalence() {
        let mut g = rng::stream(4, &[4]);
        for n in 1..=4 {
            for rotated in [false, true] {
                let rots: Option<Vec<Matrix>> = rotated.then(|| (0..n).map(|_| random_unitary_2x2(&mut g)).collect());
                let (tof, pair) = decompose_generalized_toffoli(n, rots.as_deref()).unwrap();
                let inputs: Vec<StateVector> = (0..20).map(|_| haar_state(1 << n, &mut g)).collect();
                assert!(toffoli_equivalence_deviation(&tof, &pair, &inputs).unwrap() <= 1e-10, "n={n}");
            }
        }
        assert!(matches!(decompose_generalized_toffoli(0, None), Err(Error::Size(_))));
        assert!(matches!(decompose_generalized_toffoli(9, None), Err(Error::Size(_))));
    }

    #[test]
    fn single_qubit_toffoli_is_rotated_cnot() {
        let (tof, pair) = decompose_generalized_toffoli(1, None).unwrap();
        assert_eq!(tof.gates().iter().filter(|g| matches!(g, Gate::Toffoli { .. })).count(), 1);
        assert_eq!(pair.gates().iter().filter(|g| matches!(g, Gate::Cnot { .. })).count(), 1);
        let p = tof.effective_system_operator().unwrap();
        assert!(p.max_abs_diff(&gates::proj1()) < 1e-12);
        assert!(pair.effective_system_operator().unwrap().max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn hadamard_rotated_toffoli_n3() {
        let h = vec![gates::hadamard(); 3];
        let (tof, pair) = decompose_generalized_toffoli(3, Some(&h)).unwrap();
        let mut g = rng::stream(9, &[3]);
        let inputs: Vec<StateVector> = (0..20).map(|_| haar_state(8, &mut g)).collect();
        assert!(toffoli_equivalence_deviation(&tof, &pair, &inputs).unwrap() <= 1e-9);
        let plus3 = kron_all(&vec![strategy::plus().projector(); 3]).unwrap();
        assert!(tof.effective_system_operator().unwrap().max_abs_diff(&(&Matrix::identity(8) - &plus3)) < 1e-10);
    }

    #[test]
    fn adaptive_branch_sum_matches_references() {
        for th in THETAS {
            let c = compile_adaptive(th).unwrap();
            let sum = c.pass_operator().unwrap();
            assert!(sum.max_abs_diff(&adaptive_reference_operator(th).unwrap()) < 1e-10);
            assert!(sum.max_abs_diff(&adaptive_deferred_operator(th).unwrap()) < 1e-10);
            assert!(c.effective_system_operator().unwrap().max_abs_diff(&x_psi(th)) < 1e-10);
            let psi = state::two_qubit_pure(th).unwrap();
            assert!((c.pass_probability(psi.psi()).unwrap() - 1.0).abs() < 1e-10);
            let combined = c.effective_system_operator().unwrap().matmul(&p_zz_plus());
            assert!(combined.max_abs_diff(&psi.projector()) < 1e-10);
        }
        assert!(compile_adaptive(0.0).is_err());
    }

    #[test]
    fn ghz_circuits_match_engine() {
        let t = state::ghz(3).unwrap();
        let p = SequentialProtocol::from_strategy(
            &strategy::strategy_stabilizer(&strategy::ghz_generators(3).unwrap(), false).unwrap(),
        )
        .unwrap();
        let circuits = compile_ghz();
        for (c, s) in circuits.iter().zip(p.settings()) {
            assert!(c.pass_operator().unwrap().max_abs_diff(&s.m_pass) < 1e-10);
            assert!((c.pass_probability(t.psi()).unwrap() - 1.0).abs() < 1e-12);
        }
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for perm in perms {
            let prod = perm
                .iter()
                .fold(Matrix::identity(8), |acc, &i| circuits[i].effective_system_operator().unwrap().matmul(&acc));
            assert!(prod.max_abs_diff(&t.projector()) < 1e-10);
        }
    }

    #[test]
    fn pauli_checks_match_projectors() {
        for s in ["-YY", "+XYZ", "+ZIZ", "-XXX"] {
            let p: PauliString = s.parse().unwrap();
            let c = compile_pauli_check(&p).unwrap();
            let set = build_qnd_setting(s, p.plus_projector().unwrap()).unwrap();
            assert!(c.pass_operator().unwrap().max_abs_diff(&set.m_pass) < 1e-10, "{s}");
        }
    }

    #[test]
    fn qnd_circuits_preserve_target() {
        let cases: Vec<(Vec<Circuit>, StateVector)> = vec![
            (compile_bell(), state::bell_state().psi().clone()),
            (compile_ghz(), state::ghz(3).unwrap().psi().clone()),
            (
                compile_two_qubit(0.4, TwoQubitVariant::Toffoli).unwrap(),
                state::two_qubit_pure(0.4).unwrap().psi().clone(),
            ),
        ];
        for (circuits, psi) in cases {
            for c in circuits {
                let (post, rec) = c.run_forced(&psi.with_ancillas(1).unwrap(), &[0]).unwrap();
                assert!((rec.probability - 1.0).abs() < 1e-9);
                assert!(c.system_state(&post, &rec).unwrap().max_abs_diff(&psi) < 1e-9);
            }
        }
    }

    #[test]
    fn sampled_trajectory_follows_threshold() {
        let c = &compile_bell()[1];
        let v = StateVector::from_real(&[0.8, 0.0, 0.0, 0.6]);
        let p = c.pass_probability(&v).unwrap();
        let wide = v.with_ancillas(1).unwrap();
        assert!(c.pass_rule().passes(&c.sample_trajectory(&wide, p - 1e-9).unwrap().1));
        assert!(!c.pass_rule().passes(&c.sample_trajectory(&wide, p + 1e-9).unwrap().1));
        assert!(p > 0.0 && p < 1.0);
    }
}
