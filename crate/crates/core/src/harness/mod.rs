//! Monte Carlo verification experiments.
//!
//! A run draws `n_copies` states from one or more imperfect sources, feeds
//! each copy through a standard strategy (one randomly chosen test) or a
//! sequential protocol (every test in order), and tallies the passes.
//! Randomness for copy `k` and setting `i` comes from the stream
//! `(seed, k, i)`, so results do not depend on evaluation order and the
//! matrix and circuit backends consume identical uniforms.

pub mod stats;

use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, StateVector};
use crate::ndqv::SequentialProtocol;
use crate::rng;
use crate::state::{fidelity, perturbed_state, NoiseKind, NoiseSpec, SourceState, TargetState};
use crate::strategy::{spectral_gap, Strategy};

pub use stats::{confidence_chernoff, confidence_exponential, kl_divergence, wilson_interval, ChernoffBound, Z_95};

pub const REPORT_SCHEMA: u32 = 1;

/// Circuits must reproduce the pass effect of their setting to this accuracy.
pub const CIRCUIT_MATCH_TOL: f64 = 1e-8;

const SELECT_STREAM: u64 = u64::MAX;
const SOURCE_STREAM: u64 = u64::MAX - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Halt at the first failing copy.
    StopOnFail,
    /// Run every copy and record the pass frequency.
    CountFrequency,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stop_on_fail" | "stop-on-fail" => Ok(Mode::StopOnFail),
            "count_frequency" | "count-frequency" => Ok(Mode::CountFrequency),
            other => Err(Error::Domain(format!("unknown mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Kraus operators applied to state vectors.
    Matrix,
    /// Gate-level simulation with mid-circuit measurement.
    Circuit,
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matrix" => Ok(Backend::Matrix),
            "circuit" => Ok(Backend::Circuit),
            other => Err(Error::Domain(format!("unknown backend '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Protocol {
    Strategy(Strategy),
    Sequential(SequentialProtocol),
}

impl Protocol {
    pub fn target(&self) -> &TargetState {
        match self {
            Protocol::Strategy(s) => s.target(),
            Protocol::Sequential(p) => p.target(),
        }
    }

    pub fn n_settings(&self) -> usize {
        match self {
            Protocol::Strategy(s) => s.settings().len(),
            Protocol::Sequential(p) => p.settings().len(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Protocol::Strategy(_) => "strategy",
            Protocol::Sequential(_) => "sequential",
        }
    }

    /// Gap used in the confidence bounds, with a worst-case witness.
    pub fn gap(&self) -> Result<(f64, StateVector)> {
        let g = match self {
            Protocol::Strategy(s) => spectral_gap(s)?,
            Protocol::Sequential(p) => p.protocol_gap()?,
        };
        Ok((g.nu, g.witness))
    }

    /// Operator whose expectation is the pass probability of setting `i`.
    fn pass_effect(&self, i: usize) -> Matrix {
        match self {
            Protocol::Strategy(s) => s.settings()[i].omega.clone(),
            Protocol::Sequential(p) => {
                let w = &p.settings()[i].omega;
                w.dagger().matmul(w)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    /// Name echoed in the report.
    pub name: String,
    pub protocol: Protocol,
    pub backend: Backend,
    /// One circuit per setting; required by the circuit backend.
    pub circuits: Option<Vec<Circuit>>,
    /// Copy `k` is drawn from `sources[k % len]`.
    pub sources: Vec<NoiseSpec>,
    pub n_copies: u64,
    pub seed: u64,
    pub mode: Mode,
    /// Infidelity `ε` of the alternative hypothesis in the confidence bounds.
    pub hypothesis_epsilon: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub name: String,
    pub target: String,
    pub protocol: String,
    pub backend: Backend,
    pub mode: Mode,
    pub seed: u64,
    pub n_requested: u64,
    pub n_run: u64,
    pub n_pass: u64,
    /// `n_pass / n_run`.
    pub f: f64,
    /// Mean fidelity of the sources over the copies run.
    pub source_fidelity: f64,
    pub nu: f64,
    pub hypothesis_epsilon: f64,
    /// Whether the hypothesis `F ≥ 1 − ε` is accepted.
    pub accepted: bool,
    /// Index of the first failing copy.
    pub first_failure: Option<u64>,
    /// `(1 − εν)^n_run` if every copy passed, otherwise 1.
    pub delta_exponential: f64,
    /// Count-frequency runs only; `None` there means inconclusive.
    pub delta_chernoff: Option<f64>,
    pub fidelity: Option<FidelityEstimate>,
    pub per_setting_trials: Vec<u64>,
    pub per_setting_pass_counts: Vec<u64>,
}

impl RunReport {
    pub const CSV_HEADER: &'static str = "name,target,protocol,backend,mode,seed,n_requested,n_run,n_pass,f,\
source_fidelity,nu,hypothesis_epsilon,accepted,first_failure,delta_exponential,delta_chernoff,\
fidelity_estimate,fidelity_ci_low,fidelity_ci_high";

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: RunReport = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
        if r.schema != REPORT_SCHEMA {
            return Err(Error::Spec(format!("unsupported report schema {}", r.schema)));
        }
        Ok(r)
    }

    /// One CSV row matching [`RunReport::CSV_HEADER`]; floats use `{:.16e}`
    /// and absent values are empty.
    pub fn to_csv_row(&self) -> String {
        let fl = |x: f64| format!("{x:.16e}");
        let opt = |x: Option<f64>| x.map(fl).unwrap_or_default();
        let fid = self.fidelity.as_ref();
        let mode = match self.mode {
            Mode::StopOnFail => "stop_on_fail",
            Mode::CountFrequency => "count_frequency",
        };
        let backend = match self.backend {
            Backend::Matrix => "matrix",
            Backend::Circuit => "circuit",
        };
        let mut s = String::new();
        write!(
            s,
            "{},{},{},{backend},{mode},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_field(&self.name),
            csv_field(&self.target),
            self.protocol,
            self.seed,
            self.n_requested,
            self.n_run,
            self.n_pass,
            fl(self.f),
            fl(self.source_fidelity),
            fl(self.nu),
            fl(self.hypothesis_epsilon),
            self.accepted,
            self.first_failure.map(|k| k.to_string()).unwrap_or_default(),
            fl(self.delta_exponential),
            opt(self.delta_chernoff),
            opt(fid.map(|e| e.estimate)),
            opt(fid.map(|e| e.ci_low)),
            opt(fid.map(|e| e.ci_high)),
        )
        .unwrap();
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Fidelity estimate with a Wilson interval. Only a sequential protocol in
/// count-frequency mode passes with probability equal to the fidelity.
pub fn estimate_fidelity(report: &RunReport) -> Result<FidelityEstimate> {
    if report.protocol != "sequential" || report.mode != Mode::CountFrequency {
        return Err(Error::Contract(
            "fidelity is estimable only from a sequential protocol run in count_frequency mode".into(),
        ));
    }
    let (ci_low, ci_high) = wilson_interval(report.n_pass, report.n_run, Z_95)?;
    Ok(FidelityEstimate { estimate: report.f, ci_low, ci_high })
}

/// Per-source sampler: a fixed pure state, or the depolarized ensemble.
enum Source {
    Pure(StateVector),
    Depolarized { psi: StateVector, epsilon: f64 },
}

impl Source {
    fn draw(&self, seed: u64, copy: u64) -> StateVector {
        match self {
            Source::Pure(v) => v.clone(),
            Source::Depolarized { psi, epsilon } => {
                let mut g = rng::stream(seed, &[copy, SOURCE_STREAM]);
                if g.random::<f64>() < *epsilon {
                    StateVector::basis(psi.dim(), g.random_range(0..psi.dim()))
                } else {
                    psi.clone()
                }
            }
        }
    }
}

/// Pass effect `E = Σ_pass K†K` of a circuit on a system state with
/// ancillas in `|0>`.
fn circuit_pass_effect(c: &Circuit) -> Result<Matrix> {
    let ds = 1usize << c.n_system();
    let seqs: Vec<Vec<u8>> = c.outcome_sequences().into_iter().filter(|s| c.sequence_passes(s)).collect();
    let mut outs = Vec::with_capacity(ds);
    for j in 0..ds {
        let input = StateVector::basis(ds, j).with_ancillas(c.n_ancilla())?;
        outs.push(seqs.iter().map(|s| c.run_unnormalized(&input, s)).collect::<Result<Vec<_>>>()?);
    }
    let mut e = Matrix::zeros(ds, ds);
    for i in 0..ds {
        for j in 0..ds {
            e[(i, j)] = outs[i].iter().zip(&outs[j]).map(|(a, b)| a.inner(b)).sum();
        }
    }
    Ok(e)
}

fn validate(spec: &ExperimentSpec) -> Result<()> {
    if spec.sources.is_empty() {
        return Err(Error::Domain("at least one source is required".into()));
    }
    if !(spec.hypothesis_epsilon > 0.0 && spec.hypothesis_epsilon < 1.0) {
        return Err(Error::Domain(format!("hypothesis epsilon {} must lie in (0, 1)", spec.hypothesis_epsilon)));
    }
    if spec.n_copies == 0 {
        return Err(Error::Domain("n_copies must be positive".into()));
    }
    if spec.backend == Backend::Circuit {
        let circuits = spec
            .circuits
            .as_ref()
            .ok_or_else(|| Error::Contract("the circuit backend needs one circuit per setting".into()))?;
        if circuits.len() != spec.protocol.n_settings() {
            return Err(Error::Contract(format!(
                "{} circuits supplied for {} settings",
                circuits.len(),
                spec.protocol.n_settings()
            )));
        }
        let n = spec.protocol.target().n_qubits();
        for (i, c) in circuits.iter().enumerate() {
            if c.n_system() != n {
                return Err(Error::Size(format!(
                    "circuit '{}' acts on {} system qubits, target has {n}",
                    c.label,
                    c.n_system()
                )));
            }
            let dev = circuit_pass_effect(c)?.max_abs_diff(&spec.protocol.pass_effect(i));
            if dev > CIRCUIT_MATCH_TOL {
                return Err(Error::Contract(format!(
                    "circuit '{}' does not implement setting {i} (pass effect differs by {dev:.3e})",
                    c.label
                )));
            }
        }
    }
    Ok(())
}

struct Tally {
    trials: Vec<u64>,
    passes: Vec<u64>,
}

fn run_copy(spec: &ExperimentSpec, copy: u64, mut phi: StateVector, tally: &mut Tally) -> Result<bool> {
    let uniform = |i: usize| rng::stream(spec.seed, &[copy, i as u64]).random::<f64>();
    let circuits = spec.circuits.as_deref().filter(|_| spec.backend == Backend::Circuit);
    match &spec.protocol {
        Protocol::Strategy(s) => {
            let v: f64 = rng::stream(spec.seed, &[copy, SELECT_STREAM]).random();
            let mut cum = 0.0;
            let mut pick = s.settings().len() - 1;
            for (i, st) in s.settings().iter().enumerate() {
                cum += st.weight.value();
                if v < cum {
                    pick = i;
                    break;
                }
            }
            let u = uniform(pick);
            let passed = match circuits {
                Some(cs) => {
                    let c = &cs[pick];
                    let (_, rec) = c.sample_trajectory(&phi.with_ancillas(c.n_ancilla())?, u)?;
                    c.pass_rule().passes(&rec)
                }
                None => u < s.settings()[pick].omega.apply(&phi).inner(&phi).re,
            };
            tally.trials[pick] += 1;
            tally.passes[pick] += passed as u64;
            Ok(passed)
        }
        Protocol::Sequential(p) => {
            for (i, st) in p.settings().iter().enumerate() {
                let u = uniform(i);
                tally.trials[i] += 1;
                let next = match circuits {
                    Some(cs) => {
                        let c = &cs[i];
                        let (post, rec) = c.sample_trajectory(&phi.with_ancillas(c.n_ancilla())?, u)?;
                        if c.pass_rule().passes(&rec) {
                            Some(c.system_state(&post, &rec)?)
                        } else {
                            None
                        }
                    }
                    None => {
                        let kept = st.m_pass.apply(&phi.with_ancillas(1)?).ancilla_zero_component(1);
                        if u < kept.norm_sqr() {
                            Some(kept.normalized()?)
                        } else {
                            None
                        }
                    }
                };
                match next {
                    Some(v) => {
                        tally.passes[i] += 1;
                        phi = v;
                    }
                    None => return Ok(false),
                }
            }
            Ok(true)
        }
    }
}

/// Runs the experiment.
pub fn run(spec: &ExperimentSpec) -> Result<RunReport> {
    validate(spec)?;
    let target = spec.protocol.target();
    let (nu, witness) = spec.protocol.gap()?;
    let mut sources = Vec::with_capacity(spec.sources.len());
    let mut fids = Vec::with_capacity(spec.sources.len());
    for noise in &spec.sources {
        let w = (noise.kind == NoiseKind::WorstCaseOrthogonal).then_some(&witness);
        let sigma = perturbed_state(target, noise, w)?;
        fids.push(fidelity(&sigma, target)?);
        sources.push(match sigma {
            SourceState::Pure(v) => Source::Pure(v),
            SourceState::Mixed(_) => Source::Depolarized { psi: target.psi().clone(), epsilon: noise.epsilon },
        });
    }

    let l = spec.protocol.n_settings();
    let mut tally = Tally { trials: vec![0; l], passes: vec![0; l] };
    let (mut n_run, mut n_pass, mut fid_sum) = (0u64, 0u64, 0.0);
    let mut first_failure = None;
    for copy in 0..spec.n_copies {
        let k = (copy % sources.len() as u64) as usize;
        let phi = sources[k].draw(spec.seed, copy);
        let passed = run_copy(spec, copy, phi, &mut tally)?;
        n_run += 1;
        fid_sum += fids[k];
        if passed {
            n_pass += 1;
        } else if first_failure.is_none() {
            first_failure = Some(copy);
            if spec.mode == Mode::StopOnFail {
                break;
            }
        }
    }

    let eps = spec.hypothesis_epsilon;
    let f = n_pass as f64 / n_run as f64;
    let all_passed = first_failure.is_none();
    let delta_exponential = if all_passed { confidence_exponential(eps, nu, n_run)? } else { 1.0 };
    let (delta_chernoff, accepted) = match spec.mode {
        Mode::StopOnFail => (None, all_passed),
        Mode::CountFrequency => {
            let d = confidence_chernoff(f, eps, nu, n_run)?.delta();
            (d, d.is_some())
        }
    };
    let mut report = RunReport {
        schema: REPORT_SCHEMA,
        name: spec.name.clone(),
        target: target.label().to_string(),
        protocol: spec.protocol.kind().to_string(),
        backend: spec.backend,
        mode: spec.mode,
        seed: spec.seed,
        n_requested: spec.n_copies,
        n_run,
        n_pass,
        f,
        source_fidelity: fid_sum / n_run as f64,
        nu,
        hypothesis_epsilon: eps,
        accepted,
        first_failure,
        delta_exponential,
        delta_chernoff,
        fidelity: None,
        per_setting_trials: tally.trials,
        per_setting_pass_counts: tally.passes,
    };
    if let Ok(est) = estimate_fidelity(&report) {
        report.fidelity = Some(est);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::compile::{circuits_for_catalog, TwoQubitVariant};
    use crate::strategy::{strategy_bell, Catalog};

    fn spec(protocol: Protocol, sources: Vec<NoiseSpec>, n: u64, mode: Mode) -> ExperimentSpec {
        ExperimentSpec {
            name: "t".into(),
            protocol,
            backend: Backend::Matrix,
            circuits: None,
            sources,
            n_copies: n,
            seed: 11,
            mode,
            hypothesis_epsilon: 0.05,
        }
    }

    fn bell_seq() -> Protocol {
        Protocol::Sequential(SequentialProtocol::from_strategy(&strategy_bell(false)).unwrap())
    }

    fn worst(eps: f64) -> NoiseSpec {
        NoiseSpec::new(NoiseKind::WorstCaseOrthogonal, eps, 0).unwrap()
    }

    #[test]
    fn perfect_source_always_passes() {
        for p in [bell_seq(), Protocol::Strategy(strategy_bell(false))] {
            let r = run(&spec(p, vec![NoiseSpec::perfect()], 500, Mode::StopOnFail)).unwrap();
            assert_eq!((r.n_run, r.n_pass), (500, 500));
            assert!(r.accepted);
        }
    }

    #[test]
    fn pass_frequencies() {
        let r = run(&spec(bell_seq(), vec![worst(0.1)], 20_000, Mode::CountFrequency)).unwrap();
        assert!((r.f - 0.9).abs() < 0.01, "{}", r.f);
        let est = r.fidelity.unwrap();
        assert!(est.ci_low < 0.9 && est.ci_high > 0.9);
        let r = run(&spec(Protocol::Strategy(strategy_bell(false)), vec![worst(0.1)], 20_000, Mode::CountFrequency))
            .unwrap();
        assert!((r.f - 0.95).abs() < 0.01, "{}", r.f);
        assert!(r.fidelity.is_none());
        assert!(estimate_fidelity(&r).is_err());
    }

    #[test]
    fn depolarized_ensemble_has_the_right_fidelity() {
        let noise = NoiseSpec::new(NoiseKind::Depolarizing, 0.2, 0).unwrap();
        let r = run(&spec(bell_seq(), vec![noise], 20_000, Mode::CountFrequency)).unwrap();
        assert!((r.source_fidelity - 0.85).abs() < 1e-12);
        assert!((r.f - 0.85).abs() < 0.01, "{}", r.f);
    }

    #[test]
    fn reproducible_and_serializable() {
        let s = spec(bell_seq(), vec![worst(0.1), NoiseSpec::perfect()], 2000, Mode::CountFrequency);
        let a = run(&s).unwrap();
        let b = run(&s).unwrap();
        assert_eq!(a, b);
        assert_eq!(RunReport::from_json(&a.to_json()).unwrap(), a);
        let row = a.to_csv_row();
        assert_eq!(row.split(',').count(), RunReport::CSV_HEADER.split(',').count());
    }

    #[test]
    fn backends_agree() {
        let strat = Catalog::Bell.strategy(None).unwrap();
        let circuits = circuits_for_catalog(Catalog::Bell, None, TwoQubitVariant::Toffoli).unwrap();
        for protocol in [bell_seq(), Protocol::Strategy(strat)] {
            let mut s = spec(protocol, vec![worst(0.3)], 400, Mode::CountFrequency);
            let m = run(&s).unwrap();
            s.backend = Backend::Circuit;
            s.circuits = circuits.clone();
            let c = run(&s).unwrap();
            assert_eq!(m.per_setting_pass_counts, c.per_setting_pass_counts);
            assert_eq!(m.n_pass, c.n_pass);
        }
    }

    #[test]
    fn mismatched_circuits_are_rejected() {
        let mut s = spec(bell_seq(), vec![NoiseSpec::perfect()], 10, Mode::StopOnFail);
        s.backend = Backend::Circuit;
        assert!(matches!(run(&s), Err(Error::Contract(_))));
        let mut cs = circuits_for_catalog(Catalog::Bell, None, TwoQubitVariant::Toffoli).unwrap().unwrap();
        cs.reverse();
        s.circuits = Some(cs);
        assert!(matches!(run(&s), Err(Error::Contract(_))));
    }

    #[test]
    fn stop_on_fail_halts() {
        let r = run(&spec(bell_seq(), vec![worst(0.5)], 10_000, Mode::StopOnFail)).unwrap();
        assert!(!r.accepted);
        assert_eq!(r.first_failure, Some(r.n_run - 1));
        assert_eq!(r.delta_exponential, 1.0);
    }
}
