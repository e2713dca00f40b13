//! Confidence bounds and interval estimates for pass statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

fn check_eps_nu(epsilon: f64, nu: f64) -> Result<f64> {
    let x = epsilon * nu;
    if !(epsilon.is_finite() && nu.is_finite() && x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("epsilon * nu = {x} must lie in (0, 1)")));
    }
    Ok(x)
}

/// `(1 − εν)ⁿ`: significance after `n` consecutive passes.
pub fn confidence_exponential(epsilon: f64, nu: f64, n: u64) -> Result<f64> {
    let x = check_eps_nu(epsilon, nu)?;
    Ok((n as f64 * (-x).ln_1p()).exp())
}

/// `D(x‖y) = x ln(x/y) + (1−x) ln((1−x)/(1−y))` with `0 ln 0 = 0`.
pub fn kl_divergence(x: f64, y: f64) -> f64 {
    let term = |a: f64, b: f64| if a == 0.0 { 0.0 } else { a * (a / b).ln() };
    term(x, y) + term(1.0 - x, 1.0 - y)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChernoffBound {
    Delta(f64),
    /// Pass frequency at or below `1 − εν`; the bound says nothing.
    Inconclusive,
}

impl ChernoffBound {
    pub fn delta(self) -> Option<f64> {
        match self {
            ChernoffBound::Delta(d) => Some(d),
            ChernoffBound::Inconclusive => None,
        }
    }
}

/// `exp(−D(f‖1−εν)·n)`, defined only for `f > 1 − εν`.
pub fn confidence_chernoff(f: f64, epsilon: f64, nu: f64, n: u64) -> Result<ChernoffBound> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain(format!("pass frequency {f} must lie in [0, 1]")));
    }
    let y = 1.0 - check_eps_nu(epsilon, nu)?;
    if f <= y {
        return Ok(ChernoffBound::Inconclusive);
    }
    let delta =
        if f == 1.0 { confidence_exponential(epsilon, nu, n)? } else { (-kl_divergence(f, y) * n as f64).exp() };
    Ok(ChernoffBound::Delta(delta.clamp(0.0, 1.0)))
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Result<(f64, f64)> {
    if n == 0 || successes > n {
        return Err(Error::Domain(format!("need 0 <= successes <= n and n > 0, got {successes}/{n}")));
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    Ok(((centre - half).max(0.0), (centre + half).min(1.0)))
}
