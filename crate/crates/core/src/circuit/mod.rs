//! Gate-level circuits with mid-circuit ancilla measurement.
//!
//! Wires are numbered big-endian: system qubits `0..n_system`, then the
//! ancillas. A circuit runs its main gate list, optionally branches on the
//! outcome of one ancilla measurement, and is judged by a [`PassRule`] over
//! the final ancilla readings.

pub mod compile;
pub mod text;

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{dim_cap, Matrix, StateVector, C64, STRUCTURAL_TOL};

/// Forced outcomes below this probability are rejected.
pub const IMPOSSIBLE_BRANCH: f64 = 1e-14;

/// Largest register `circuit_unitary` will flatten.
pub const MAX_UNITARY_QUBITS: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    H(usize),
    X(usize),
    /// Phase gate `diag(1, i)`.
    S(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// X on `target` when every control reads 1.
    Toffoli {
        controls: Vec<usize>,
        target: usize,
    },
    /// Row-major 2×2 unitary.
    U1q {
        qubit: usize,
        matrix: [C64; 4],
    },
    MeasureZ(usize),
}

impl Gate {
    pub fn u1q(qubit: usize, m: &Matrix) -> Gate {
        assert!(m.rows() == 2 && m.cols() == 2);
        Gate::U1q { qubit, matrix: [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]] }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::X(q) | Gate::S(q) | Gate::MeasureZ(q) | Gate::U1q { qubit: q, .. } => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Toffoli { controls, target } => {
                let mut v = controls.clone();
                v.push(*target);
                v
            }
        }
    }

    fn validate(&self, total: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= total {
                return Err(Error::Size(format!("qubit {q} out of range for {total} wires")));
            }
            if qs[..i].contains(&q) {
                return Err(Error::Contract(format!("gate uses qubit {q} twice")));
            }
        }
        if let Gate::Toffoli { controls, .. } = self {
            if controls.is_empty() {
                return Err(Error::Contract("Toffoli needs at least one control".into()));
            }
        }
        if let Gate::U1q { matrix, .. } = self {
            let m = Matrix::from_vec(2, 2, matrix.to_vec())?;
            if !m.is_unitary(STRUCTURAL_TOL) {
                return Err(Error::Contract("single-qubit gate is not unitary".into()));
            }
        }
        Ok(())
    }

    /// Applies a unitary gate in place. Measurements are handled by the caller.
    fn apply(&self, amps: &mut [C64], total: usize) {
        let bit = |q: usize| 1usize << (total - 1 - q);
        match self {
            Gate::H(q) => {
                let b = bit(*q);
                for i in (0..amps.len()).filter(|i| i & b == 0) {
                    let (x, y) = (amps[i], amps[i | b]);
                    amps[i] = (x + y) * FRAC_1_SQRT_2;
                    amps[i | b] = (x - y) * FRAC_1_SQRT_2;
                }
            }
            Gate::X(q) => {
                let b = bit(*q);
                for i in (0..amps.len()).filter(|i| i & b == 0) {
                    amps.swap(i, i | b);
                }
            }
            Gate::S(q) => {
                let b = bit(*q);
                for (i, a) in amps.iter_mut().enumerate() {
                    if i & b != 0 {
                        *a *= C64::i();
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (bit(*control), bit(*target));
                for i in (0..amps.len()).filter(|i| i & c != 0 && i & t == 0) {
                    amps.swap(i, i | t);
                }
            }
            Gate::Toffoli { controls, target } => {
                let mask = controls.iter().fold(0, |m, &q| m | bit(q));
                let t = bit(*target);
                for i in (0..amps.len()).filter(|i| i & mask == mask && i & t == 0) {
                    amps.swap(i, i | t);
                }
            }
            Gate::U1q { qubit, matrix: m } => {
                let b = bit(*qubit);
                for i in (0..amps.len()).filter(|i| i & b == 0) {
                    let (x, y) = (amps[i], amps[i | b]);
                    amps[i] = m[0] * x + m[1] * y;
                    amps[i | b] = m[2] * x + m[3] * y;
                }
            }
            Gate::MeasureZ(_) => unreachable!("measurements are applied by the executor"),
        }
    }
}

/// Continuation chosen by the outcome of one ancilla measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub qubit: usize,
    pub on_zero: Vec<Gate>,
    pub on_one: Vec<Gate>,
    /// Section names used by the text format.
    pub labels: [String; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PassRule {
    /// Pass iff every listed ancilla reads 0.
    AllZero(Vec<usize>),
    /// Pass unless every listed ancilla reads 0. The coherent pass operator
    /// of such a circuit is `I − K`, with `K` the all-zero Kraus operator.
    NotAllZero(Vec<usize>),
}

impl PassRule {
    pub fn qubits(&self) -> &[usize] {
        match self {
            PassRule::AllZero(q) | PassRule::NotAllZero(q) => q,
        }
    }

    pub fn passes(&self, record: &MeasurementRecord) -> bool {
        let all_zero = self.qubits().iter().all(|&q| record.last(q) == Some(0));
        match self {
            PassRule::AllZero(_) => all_zero,
            PassRule::NotAllZero(_) => !all_zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub outcomes: Vec<(usize, u8)>,
    pub probability: f64,
}

impl MeasurementRecord {
    /// Latest outcome on `qubit`.
    pub fn last(&self, qubit: usize) -> Option<u8> {
        self.outcomes.iter().rev().find(|(q, _)| *q == qubit).map(|&(_, b)| b)
    }

    pub fn bits(&self) -> Vec<u8> {
        self.outcomes.iter().map(|&(_, b)| b).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub label: String,
    n_system: usize,
    n_ancilla: usize,
    gates: Vec<Gate>,
    branch: Option<Branch>,
    pass: PassRule,
}

impl Circuit {
    pub fn new(
        label: impl Into<String>,
        n_system: usize,
        n_ancilla: usize,
        gates: Vec<Gate>,
        branch: Option<Branch>,
        pass: PassRule,
    ) -> Result<Self> {
        let c = Circuit { label: label.into(), n_system, n_ancilla, gates, branch, pass };
        c.validate()?;
        Ok(c)
    }

    /// Measurement-free circuit on `n_system` wires with an empty pass rule.
    pub fn unitary_only(label: impl Into<String>, n_system: usize, gates: Vec<Gate>) -> Result<Self> {
        Circuit::new(label, n_system, 0, gates, None, PassRule::AllZero(vec![]))
    }

    fn validate(&self) -> Result<()> {
        let total = self.n_qubits();
        if total == 0 {
            return Err(Error::Size("circuit has no wires".into()));
        }
        if (1usize << total.min(63)) > dim_cap() || total >= 63 {
            return Err(Error::Size(format!("{total} wires exceed the dimension cap {}", dim_cap())));
        }
        let is_ancilla = |q: usize| q >= self.n_system && q < total;
        let all_gates = self.gates.iter().chain(self.branch.iter().flat_map(|b| b.on_zero.iter().chain(&b.on_one)));
        for g in all_gates {
            g.validate(total)?;
            if let Gate::MeasureZ(q) = g {
                if !is_ancilla(*q) {
                    return Err(Error::Contract(format!("measurement on system wire {q}")));
                }
            }
        }
        if let Some(b) = &self.branch {
            if !self.gates.contains(&Gate::MeasureZ(b.qubit)) {
                return Err(Error::Contract(format!("branch on qubit {} which the main body never measures", b.qubit)));
            }
        }
        for &q in self.pass.qubits() {
            if !is_ancilla(q) {
                return Err(Error::Contract(format!("pass rule reads non-ancilla wire {q}")));
            }
        }
        Ok(())
    }

    pub fn n_system(&self) -> usize {
        self.n_system
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    pub fn n_qubits(&self) -> usize {
        self.n_system + self.n_ancilla
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn branch(&self) -> Option<&Branch> {
        self.branch.as_ref()
    }

    pub fn pass_rule(&self) -> &PassRule {
        &self.pass
    }

    pub fn has_measurements(&self) -> bool {
        self.branch.is_some() || self.gates.iter().any(|g| matches!(g, Gate::MeasureZ(_)))
    }

    fn execute(
        &self,
        input: &StateVector,
        choose: &mut dyn FnMut(usize, f64) -> Result<u8>,
        renormalize: bool,
    ) -> Result<(StateVector, MeasurementRecord)> {
        if input.dim() != self.dim() {
            return Err(Error::Size(format!("input has dimension {}, circuit needs {}", input.dim(), self.dim())));
        }
        let total = self.n_qubits();
        let mut amps = input.amplitudes().to_vec();
        let mut outcomes = Vec::new();
        let mut probability = 1.0;
        let mut run = |gates: &[Gate], amps: &mut Vec<C64>, outcomes: &mut Vec<(usize, u8)>| -> Result<()> {
            for g in gates {
                if let Gate::MeasureZ(q) = g {
                    let b = 1usize << (total - 1 - q);
                    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
                    let p0: f64 = amps.iter().enumerate().filter(|(i, _)| i & b == 0).map(|(_, a)| a.norm_sqr()).sum();
                    let p0 = if norm > 0.0 { (p0 / norm).clamp(0.0, 1.0) } else { 0.0 };
                    let bit = choose(*q, p0)?;
                    let p = if bit == 0 { p0 } else { 1.0 - p0 };
                    for (i, a) in amps.iter_mut().enumerate() {
                        if ((i & b != 0) as u8) != bit {
                            *a = C64::new(0.0, 0.0);
                        }
                    }
                    if renormalize && p > 0.0 {
                        let s = 1.0 / (p * norm).sqrt();
                        amps.iter_mut().for_each(|a| *a *= s);
                    }
                    probability *= p;
                    outcomes.push((*q, bit));
                } else {
                    g.apply(amps, total);
                }
            }
            Ok(())
        };
        run(&self.gates, &mut amps, &mut outcomes)?;
        if let Some(b) = &self.branch {
            let bit = outcomes.iter().rev().find(|(q, _)| *q == b.qubit).map(|&(_, v)| v).expect("validated");
            let cont = if bit == 0 { &b.on_zero } else { &b.on_one };
            run(cont, &mut amps, &mut outcomes)?;
        }
        Ok((StateVector::from_amplitudes(amps)?, MeasurementRecord { outcomes, probability }))
    }

    /// Runs with Born-sampled measurement outcomes.
    pub fn run_sampled<R: Rng + ?Sized>(
        &self,
        input: &StateVector,
        rng: &mut R,
    ) -> Result<(StateVector, MeasurementRecord)> {
        let mut choose = |_q: usize, p0: f64| -> Result<u8> { Ok(if rng.random::<f64>() < p0 { 0 } else { 1 }) };
        self.execute(input, &mut choose, true)
    }

    /// Runs following `forced` outcomes in measurement order.
    pub fn run_forced(&self, input: &StateVector, forced: &[u8]) -> Result<(StateVector, MeasurementRecord)> {
        let mut it = forced.iter();
        let mut choose = |q: usize, p0: f64| -> Result<u8> {
            let &bit = it.next().ok_or_else(|| Error::Contract("too few forced outcomes".into()))?;
            let p = if bit == 0 { p0 } else { 1.0 - p0 };
            if p < IMPOSSIBLE_BRANCH {
                return Err(Error::ImpossibleBranch { qubit: q, outcome: bit, probability: p });
            }
            Ok(bit)
        };
        let out = self.execute(input, &mut choose, true)?;
        if it.next().is_some() {
            return Err(Error::Contract("too many forced outcomes".into()));
        }
        Ok(out)
    }

    /// Unnormalized trajectory: projections without renormalization.
    pub fn run_unnormalized(&self, input: &StateVector, forced: &[u8]) -> Result<StateVector> {
        let mut it = forced.iter();
        let mut choose = |_q: usize, _p: f64| -> Result<u8> {
            it.next().copied().ok_or_else(|| Error::Contract("too few forced outcomes".into()))
        };
        Ok(self.execute(input, &mut choose, false)?.0)
    }

    fn count_measurements(gates: &[Gate]) -> usize {
        gates.iter().filter(|g| matches!(g, Gate::MeasureZ(_))).count()
    }

    /// Every outcome sequence the circuit can record, in lexicographic order.
    pub fn outcome_sequences(&self) -> Vec<Vec<u8>> {
        let main = Self::count_measurements(&self.gates);
        let mut out = Vec::new();
        for head in 0..(1usize << main) {
            let prefix: Vec<u8> = (0..main).rev().map(|k| ((head >> k) & 1) as u8).collect();
            match &self.branch {
                None => out.push(prefix),
                Some(b) => {
                    let pos = self
                        .gates
                        .iter()
                        .filter(|g| matches!(g, Gate::MeasureZ(_)))
                        .enumerate()
                        .filter(|(_, g)| **g == Gate::MeasureZ(b.qubit))
                        .map(|(i, _)| i)
                        .last()
                        .expect("validated");
                    let cont = if prefix[pos] == 0 { &b.on_zero } else { &b.on_one };
                    let m = Self::count_measurements(cont);
                    for tail in 0..(1usize << m) {
                        let mut seq = prefix.clone();
                        seq.extend((0..m).rev().map(|k| ((tail >> k) & 1) as u8));
                        out.push(seq);
                    }
                }
            }
        }
        out
    }

    /// Measured wires, in order, for a given outcome sequence.
    fn record_for(&self, seq: &[u8]) -> MeasurementRecord {
        let mut qubits: Vec<usize> = self
            .gates
            .iter()
            .filter_map(|g| match g {
                Gate::MeasureZ(q) => Some(*q),
                _ => None,
            })
            .collect();
        if let Some(b) = &self.branch {
            let pos = qubits.iter().rposition(|&q| q == b.qubit).expect("validated");
            let cont = if seq[pos] == 0 { &b.on_zero } else { &b.on_one };
            qubits.extend(cont.iter().filter_map(|g| match g {
                Gate::MeasureZ(q) => Some(*q),
                _ => None,
            }));
        }
        MeasurementRecord { outcomes: qubits.into_iter().zip(seq.iter().copied()).collect(), probability: 0.0 }
    }

    pub fn sequence_passes(&self, seq: &[u8]) -> bool {
        self.pass.passes(&self.record_for(seq))
    }

    /// Unnormalized Kraus operator of one outcome sequence.
    pub fn kraus(&self, seq: &[u8]) -> Result<Matrix> {
        let d = self.dim();
        let mut m = Matrix::zeros(d, d);
        for col in 0..d {
            let v = self.run_unnormalized(&StateVector::basis(d, col), seq)?;
            for (row, a) in v.amplitudes().iter().enumerate() {
                m[(row, col)] = *a;
            }
        }
        Ok(m)
    }

    /// Coherent pass operator: the sum of passing Kraus operators, or
    /// `I − Σ failing Kraus` under a [`PassRule::NotAllZero`] rule.
    pub fn pass_operator(&self) -> Result<Matrix> {
        let d = self.dim();
        let mut acc = Matrix::zeros(d, d);
        let not_all = matches!(self.pass, PassRule::NotAllZero(_));
        for seq in self.outcome_sequences() {
            if self.sequence_passes(&seq) != not_all {
                acc = &acc + &self.kraus(&seq)?;
            }
        }
        Ok(if not_all { &Matrix::identity(d) - &acc } else { acc })
    }

    /// Pass operator seen by a system state with all ancillas in `|0>`:
    /// the sum over passing sequences of `<a|K|0>`, `a` being the ancilla
    /// readings. For a QND circuit this is its test projector.
    pub fn effective_system_operator(&self) -> Result<Matrix> {
        let ds = 1usize << self.n_system;
        let a = 1usize << self.n_ancilla;
        let not_all = matches!(self.pass, PassRule::NotAllZero(_));
        let mut acc = Matrix::zeros(ds, ds);
        for seq in self.outcome_sequences() {
            if self.sequence_passes(&seq) == not_all {
                continue;
            }
            let rec = self.record_for(&seq);
            let mut anc = 0usize;
            for q in self.n_system..self.n_qubits() {
                anc = (anc << 1) | rec.last(q).unwrap_or(0) as usize;
            }
            let k = self.kraus(&seq)?;
            for i in 0..ds {
                for j in 0..ds {
                    acc[(i, j)] += k[(i * a + anc, j * a)];
                }
            }
        }
        Ok(if not_all { &Matrix::identity(ds) - &acc } else { acc })
    }

    /// Born probability that a system state (ancillas prepared in `|0>`) passes.
    pub fn pass_probability(&self, system: &StateVector) -> Result<f64> {
        let input = system.with_ancillas(self.n_ancilla)?;
        let mut p = 0.0;
        for seq in self.outcome_sequences() {
            if self.sequence_passes(&seq) {
                p += self.run_unnormalized(&input, &seq)?.norm_sqr();
            }
        }
        Ok(p)
    }

    /// Picks a trajectory by inverse CDF over outcome sequences, passing
    /// sequences first, so the copy passes iff `u < pass_probability`.
    pub fn sample_trajectory(&self, input: &StateVector, u: f64) -> Result<(StateVector, MeasurementRecord)> {
        let mut seqs = self.outcome_sequences();
        seqs.sort_by_key(|s| !self.sequence_passes(s));
        let mut cum = 0.0;
        let mut last_possible = None;
        for seq in &seqs {
            let p = self.run_unnormalized(input, seq)?.norm_sqr();
            if p < IMPOSSIBLE_BRANCH {
                continue;
            }
            cum += p;
            last_possible = Some(seq);
            if u < cum {
                return self.run_forced(input, seq);
            }
        }
        let seq = last_possible.ok_or_else(|| Error::Internal("no possible trajectory".into()))?;
        self.run_forced(input, seq)
    }

    /// System part of a post-measurement state, reading unmeasured ancillas as 0.
    pub fn system_state(&self, post: &StateVector, record: &MeasurementRecord) -> Result<StateVector> {
        let a = 1usize << self.n_ancilla;
        let mut anc = 0usize;
        for q in self.n_system..self.n_qubits() {
            anc = (anc << 1) | record.last(q).unwrap_or(0) as usize;
        }
        let amps: Vec<C64> = (0..(1usize << self.n_system)).map(|i| post.amplitudes()[i * a + anc]).collect();
        StateVector::from_amplitudes(amps)?
            .normalized()
            .map_err(|_| Error::Internal("post-measurement state has no weight on the recorded ancillas".into()))
    }
}

/// Full matrix of one unitary gate on `total` wires.
pub fn gate_matrix(g: &Gate, total: usize) -> Result<Matrix> {
    if matches!(g, Gate::MeasureZ(_)) {
        return Err(Error::Contract("measurement has no unitary matrix".into()));
    }
    g.validate(total)?;
    let d = 1usize << total;
    let mut m = Matrix::zeros(d, d);
    for col in 0..d {
        let mut v = StateVector::basis(d, col).into_amplitudes();
        g.apply(&mut v, total);
        for (row, a) in v.into_iter().enumerate() {
            m[(row, col)] = a;
        }
    }
    Ok(m)
}

/// Product of all gate matrices of a measurement-free circuit.
pub fn circuit_unitary(c: &Circuit) -> Result<Matrix> {
    if c.has_measurements() {
        return Err(Error::Contract(format!("circuit '{}' contains measurements", c.label)));
    }
    if c.n_qubits() > MAX_UNITARY_QUBITS {
        return Err(Error::Size(format!("{} wires exceed the {MAX_UNITARY_QUBITS}-qubit limit", c.n_qubits())));
    }
    let d = c.dim();
    let mut m = Matrix::zeros(d, d);
    for col in 0..d {
        let mut v = StateVector::basis(d, col).into_amplitudes();
        for g in c.gates() {
            g.apply(&mut v, c.n_qubits());
        }
        for (row, a) in v.into_iter().enumerate() {
            m[(row, col)] = a;
        }
    }
    Ok(m)
}
