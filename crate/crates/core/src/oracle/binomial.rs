use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::problem::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeConfig {
    pub steps: usize,
    /// Richardson extrapolation `2 V(2n) - V(n)`.
    pub smoothing: bool,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        LatticeConfig {
            steps: 10_000,
            smoothing: true,
        }
    }
}

/// American put value at spot `s0` with the full maturity of `spec`.
pub fn binomial_put(spec: &ProblemSpec, s0: f64, cfg: LatticeConfig) -> Result<f64> {
    binomial_put_at(spec, s0, spec.maturity, cfg)
}

/// American put value at spot `s0` with `time` years to expiry.
pub fn binomial_put_at(spec: &ProblemSpec, s0: f64, time: f64, cfg: LatticeConfig) -> Result<f64> {
    if !(s0 > 0.0) {
        return Err(domain(format!("spot must be > 0, got {s0}")));
    }
    if cfg.steps == 0 {
        return Err(domain("lattice needs at least one step"));
    }
    if time <= 0.0 {
        return Ok((spec.strike - s0).max(0.0));
    }
    let coarse = crr(spec, s0, time, cfg.steps);
    if !cfg.smoothing {
        return Ok(coarse);
    }
    let fine = crr(spec, s0, time, 2 * cfg.steps);
    Ok(2.0 * fine - coarse)
}

fn crr(spec: &ProblemSpec, s0: f64, time: f64, n: usize) -> f64 {
    let k = spec.strike;
    let dt = time / n as f64;
    let u = (spec.sigma * dt.sqrt()).exp();
    let d = 1.0 / u;
    let growth = (spec.rate * dt).exp();
    let pu = (growth - d) / (u - d);
    let disc = 1.0 / growth;
    let (wu, wd) = (disc * pu, disc * (1.0 - pu));
    let u2 = u * u;

    let mut values: Vec<f64> = Vec::with_capacity(n + 1);
    let mut s = s0 * d.powi(n as i32);
    for _ in 0..=n {
        values.push((k - s).max(0.0));
        s *= u2;
    }
    for i in (0..n).rev() {
        let mut s = s0 * d.powi(i as i32);
        for j in 0..=i {
            let hold = wd * values[j] + wu * values[j + 1];
            values[j] = hold.max(k - s);
            s *= u2;
        }
    }
    values[0]
}
