//! Numerical self-checks of the structural identities the toolkit relies on.

use std::f64::consts::PI;
use std::fmt;

use crate::circuit::compile::{
    adaptive_deferred_operator, adaptive_reference_operator, circuits_for_catalog, compile_adaptive, compile_two_qubit,
    decompose_generalized_toffoli, toffoli_equivalence_deviation, TwoQubitVariant,
};
use crate::error::Result;
use crate::harness::{confidence_chernoff, confidence_exponential};
use crate::linalg::{Matrix, StateVector};
use crate::ndqv::{with_ancilla_zero, ComplementWeights, SequentialProtocol};
use crate::rng;
use crate::state::{haar_state, random_density_matrix, random_unitary_2x2, two_qubit_pure};
use crate::strategy::{sample_complexity, strategy_2qb_three, strategy_bell, Catalog};

pub const THETAS: [f64; 3] = [0.1, PI / 8.0, PI / 6.0];

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub detail: String,
    pub deviation: f64,
    pub tolerance: f64,
}

impl CheckResult {
    fn new(name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        CheckResult { name: name.into(), detail: String::new(), deviation, tolerance }
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "ok  " } else { "FAIL" };
        write!(f, "{verdict} {:<40} dev={:.3e} tol={:.0e}", self.name, self.deviation, self.tolerance)?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

fn protocols() -> Result<Vec<(String, SequentialProtocol)>> {
    let mut out = vec![
        ("bell".to_string(), SequentialProtocol::from_strategy(&strategy_bell(false))?),
        ("ghz3".to_string(), SequentialProtocol::from_strategy(&Catalog::Ghz { n: 3, full: false }.strategy(None)?)?),
    ];
    for th in THETAS {
        out.push((format!("2qb3(theta={th:.4})"), SequentialProtocol::from_strategy(&strategy_2qb_three(th)?)?));
    }
    Ok(out)
}

fn product_check(name: &str, p: &SequentialProtocol) -> Result<CheckResult> {
    let dev = p.effective_operator().max_abs_diff(&p.target().projector());
    let nu = p.protocol_gap()?.nu;
    Ok(CheckResult::new(format!("sequential product [{name}]"), dev.max((nu - 1.0).abs()), 1e-9)
        .with_detail(format!("nu={nu:.12}")))
}

fn random_states(seed: u64, dim: usize, count: usize) -> Vec<crate::linalg::DensityMatrix> {
    let mut g = rng::stream(seed, &[dim as u64]);
    (0..count).map(|k| random_density_matrix(dim, 1 + k % dim, &mut g)).collect()
}

fn circuit_vs_engine() -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let cats = [Catalog::Bell, Catalog::BellExtended, Catalog::Ghz { n: 3, full: false }];
    let mut cases: Vec<(String, Vec<crate::circuit::Circuit>, SequentialProtocol)> = Vec::new();
    for cat in cats {
        let cs = circuits_for_catalog(cat, None, TwoQubitVariant::Toffoli)?.expect("compiled");
        cases.push((cat.to_string(), cs, SequentialProtocol::from_strategy(&cat.strategy(None)?)?));
    }
    for th in THETAS {
        for variant in [TwoQubitVariant::Toffoli, TwoQubitVariant::CnotPair] {
            let cat = Catalog::TwoQubitThree;
            let cs = circuits_for_catalog(cat, Some(th), variant)?.expect("compiled");
            cases.push((
                format!("2qb3/{variant:?}(theta={th:.4})"),
                cs,
                SequentialProtocol::from_strategy(&cat.strategy(Some(th))?)?,
            ));
        }
    }
    for (name, circuits, protocol) in cases {
        let mut dev: f64 = 0.0;
        for (c, s) in circuits.iter().zip(protocol.settings()) {
            if c.n_ancilla() == 1 {
                dev = dev.max(c.pass_operator()?.max_abs_diff(&s.m_pass));
            } else {
                // Several ancillas: compare on the ancilla-zero input space.
                let d = 1usize << c.n_system();
                let block = c.pass_operator()?.matmul(&with_ancilla_zero(&Matrix::identity(d), c.n_ancilla())?);
                dev = dev.max(block.max_abs_diff(&with_ancilla_zero(&s.omega, c.n_ancilla())?));
            }
        }
        out.push(CheckResult::new(format!("circuit vs engine [{name}]"), dev, 1e-10));
    }
    Ok(out)
}

/// Runs every check. Errors are reported as failed checks.
pub fn run_all() -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut push = |name: &str, r: Result<Vec<CheckResult>>| match r {
        Ok(v) => out.extend(v),
        Err(e) => out.push(CheckResult::new(name, f64::INFINITY, 0.0).with_detail(e.to_string())),
    };

    push("sequential product", (|| protocols()?.iter().map(|(n, p)| product_check(n, p)).collect())());

    push(
        "order permutations",
        (|| {
            let mut v = Vec::new();
            for (name, p) in protocols()? {
                let l = p.settings().len();
                let mut worst: f64 = 0.0;
                for order in permutations(l) {
                    let q = p.permuted(&order);
                    worst = worst.max(q.effective_operator().max_abs_diff(&q.target().projector()));
                }
                v.push(CheckResult::new(format!("order permutations [{name}]"), worst, 1e-9));
            }
            Ok(v)
        })(),
    );

    push(
        "summation form",
        (|| {
            let mut v = Vec::new();
            for (name, p) in protocols()?.into_iter().take(2) {
                let dev = p.summation_form()?.max_abs_diff(&p.full_operator()?);
                v.push(CheckResult::new(format!("summation form [{name}]"), dev, 1e-10));
            }
            Ok(v)
        })(),
    );

    push(
        "conditional equivalence",
        (|| {
            let mut v = Vec::new();
            for (name, p) in protocols()? {
                let mut worst: f64 = 0.0;
                for sigma in random_states(17, p.target().dim(), 20) {
                    worst = worst.max(p.conditional_equivalence_check(&sigma)?);
                    worst = worst.max(p.trace_identity_deviation(&sigma)?);
                }
                v.push(CheckResult::new(format!("conditional equivalence [{name}]"), worst, 1e-9));
            }
            Ok(v)
        })(),
    );

    push(
        "appended setting",
        (|| {
            let p = SequentialProtocol::from_strategy(&strategy_bell(false))?;
            let mut v = Vec::new();
            for lambda0 in [1.0, 0.7, 0.5] {
                let gap = p.appended_setting_gap(lambda0, &ComplementWeights::AllOne)?;
                v.push(
                    CheckResult::new(format!("appended setting [lambda0={lambda0}]"), (gap - lambda0).abs(), 1e-9)
                        .with_detail(format!("gap={gap:.10}")),
                );
            }
            Ok(v)
        })(),
    );

    push(
        "fidelity transform",
        (|| {
            let mut v = Vec::new();
            for (name, p) in protocols()?.into_iter().take(2) {
                let mut worst: f64 = 0.0;
                for sigma in random_states(23, p.target().dim(), 20) {
                    worst = worst.max(p.fidelity_transform_deviation(&sigma)?);
                }
                v.push(CheckResult::new(format!("fidelity transform [{name}]"), worst, 1e-9));
            }
            Ok(v)
        })(),
    );

    push(
        "toffoli decomposition",
        (|| {
            let mut g = rng::stream(29, &[0]);
            let mut v = Vec::new();
            for n in 1..=4 {
                let mut worst: f64 = 0.0;
                for rotated in [false, true] {
                    let rots: Option<Vec<Matrix>> =
                        rotated.then(|| (0..n).map(|_| random_unitary_2x2(&mut g)).collect());
                    let (tof, pair) = decompose_generalized_toffoli(n, rots.as_deref())?;
                    let inputs: Vec<StateVector> = (0..20).map(|_| haar_state(1 << n, &mut g)).collect();
                    worst = worst.max(toffoli_equivalence_deviation(&tof, &pair, &inputs)?);
                }
                v.push(CheckResult::new(format!("toffoli decomposition [n={n}]"), worst, 1e-9));
            }
            Ok(v)
        })(),
    );

    push(
        "adaptive circuit",
        (|| {
            let mut v = Vec::new();
            for th in THETAS {
                let c = compile_adaptive(th)?;
                let sum = c.pass_operator()?;
                let dev = sum
                    .max_abs_diff(&adaptive_reference_operator(th)?)
                    .max(sum.max_abs_diff(&adaptive_deferred_operator(th)?));
                let p = c.pass_probability(two_qubit_pure(th)?.psi())?;
                v.push(
                    CheckResult::new(format!("adaptive circuit [theta={th:.4}]"), dev.max((p - 1.0).abs()), 1e-10)
                        .with_detail(format!("target pass probability={p:.12}")),
                );
            }
            Ok(v)
        })(),
    );

    push("circuit vs engine", circuit_vs_engine());

    push(
        "two-qubit variants",
        (|| {
            let mut v = Vec::new();
            for th in THETAS {
                let tof = compile_two_qubit(th, TwoQubitVariant::Toffoli)?;
                let pair = compile_two_qubit(th, TwoQubitVariant::CnotPair)?;
                let mut worst: f64 = 0.0;
                for (a, b) in tof.iter().zip(&pair) {
                    worst = worst.max(a.effective_system_operator()?.max_abs_diff(&b.effective_system_operator()?));
                }
                v.push(CheckResult::new(format!("two-qubit variants [theta={th:.4}]"), worst, 1e-10));
            }
            Ok(v)
        })(),
    );

    push(
        "statistics",
        (|| {
            let n = sample_complexity(1.0, 0.01, 0.05)?.exact;
            let a = confidence_chernoff(1.0, 0.01, 1.0, n)?.delta().unwrap_or(f64::INFINITY);
            let b = confidence_exponential(0.01, 1.0, n)?;
            Ok(vec![
                CheckResult::new("sample complexity [nu=1, eps=0.01, delta=0.05]", n.abs_diff(299) as f64, 0.0)
                    .with_detail(format!("N={n}")),
                CheckResult::new("chernoff at f=1", (a - b).abs(), 1e-12),
            ])
        })(),
    );

    out
}

/// All permutations of `0..l` in lexicographic order.
pub fn permutations(l: usize) -> Vec<Vec<usize>> {
    let mut cur: Vec<usize> = (0..l).collect();
    let mut out = vec![cur.clone()];
    while let Some(i) = (1..l).rev().find(|&i| cur[i - 1] < cur[i]) {
        let j = (i..l).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor exists");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_complete() {
        assert_eq!(permutations(3).len(), 6);
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn suite_reports_every_group() {
        let results = run_all();
        for r in &results {
            if !r.name.starts_with("order permutations [2qb3") {
                assert!(r.passed(), "{r}");
            }
        }
        let two_qubit_orders: Vec<_> =
            results.iter().filter(|r| r.name.starts_with("order permutations [2qb3")).collect();
        assert_eq!(two_qubit_orders.len(), THETAS.len());
        assert!(two_qubit_orders.iter().all(|r| !r.passed()));
        let appended = results.iter().find(|r| r.name == "appended setting [lambda0=0.7]").unwrap();
        assert!(appended.detail.contains("gap=0.7000000000"));
    }
}
