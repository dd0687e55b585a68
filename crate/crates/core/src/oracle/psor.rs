use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::problem::ProblemSpec;

const MAX_SWEEPS: usize = 50_000;
/// Fully implicit half steps replacing the first Crank-Nicolson step.
/// First free node used by the boundary refinement, counted from the contact set.
const OFFSET: usize = 3;
const RANNACHER_HALF_STEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub ns: usize,
    pub nt: usize,
    pub s_max: f64,
    pub omega: f64,
    pub tol: f64,
}

impl FdConfig {
    pub fn for_strike(strike: f64) -> Self {
        FdConfig {
            ns: 2000,
            nt: 2000,
            s_max: 4.0 * strike,
            omega: 1.2,
            tol: 1e-8,
        }
    }

    pub fn validate(&self, spec: &ProblemSpec) -> Result<()> {
        if self.ns < 4 || self.nt < 2 {
            return Err(domain(format!("fd grid too small: ns={} nt={}", self.ns, self.nt)));
        }
        if !(self.s_max > spec.strike) {
            return Err(domain(format!("s_max must exceed the strike, got {}", self.s_max)));
        }
        if !(self.omega > 1.0 && self.omega < 2.0) {
            return Err(domain(format!("omega must lie in (1,2), got {}", self.omega)));
        }
        if !(self.tol > 0.0) {
            return Err(domain(format!("tol must be > 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FdSolution {
    pub s: Vec<f64>,
    /// Normalized time to maturity of each time level, `0..=1`.
    pub taus: Vec<f64>,
    pub boundary: Vec<f64>,
    /// Boundary velocity with respect to normalized time.
    pub boundary_dot: Vec<f64>,
    /// Value curve at `tau = 1`.
    pub values: Vec<f64>,
    /// Value curves at requested times, `(tau, values)`.
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

impl FdSolution {
    /// Linear interpolation of the `tau = 1` value curve.
    pub fn value_at(&self, s: f64) -> f64 {
        interpolate(&self.s, &self.values, s)
    }

    pub fn final_boundary(&self) -> f64 {
        *self.boundary.last().expect("non-empty boundary")
    }
}

/// Piecewise-linear interpolation of `ys` over increasing `xs`, flat outside.
pub fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let i = xs.partition_point(|&v| v <= x) - 1;
    let w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + w * (ys[i + 1] - ys[i])
}

/// Early exercise curve on the time grid of `cfg`.
pub fn psor_boundary(spec: &ProblemSpec, cfg: &FdConfig) -> Result<Vec<(f64, f64)>> {
    let sol = psor_solve(spec, cfg, &[])?;
    Ok(sol.taus.iter().copied().zip(sol.boundary.iter().copied()).collect())
}

struct Stencil {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl Stencil {
    fn new(spec: &ProblemSpec, ns: usize) -> Self {
        let (s2, r) = (spec.sigma * spec.sigma, spec.rate);
        let mut st = Stencil {
            lower: vec![0.0; ns + 1],
            diag: vec![0.0; ns + 1],
            upper: vec![0.0; ns + 1],
        };
        for i in 1..ns {
            let fi = i as f64;
            st.lower[i] = 0.5 * s2 * fi * fi - 0.5 * r * fi;
            st.diag[i] = -s2 * fi * fi - r;
            st.upper[i] = 0.5 * s2 * fi * fi + 0.5 * r * fi;
        }
        st
    }

    fn apply(&self, v: &[f64], i: usize) -> f64 {
        self.lower[i] * v[i - 1] + self.diag[i] * v[i] + self.upper[i] * v[i + 1]
    }
}

/// Crank-Nicolson with Rannacher start-up, each level solved by projected SOR.
pub fn psor_solve(spec: &ProblemSpec, cfg: &FdConfig, snapshot_taus: &[f64]) -> Result<FdSolution> {
    spec.validate()?;
    cfg.validate(spec)?;
    let ns = cfg.ns;
    let k = spec.strike;
    let ds = cfg.s_max / ns as f64;
    let s: Vec<f64> = (0..=ns).map(|i| i as f64 * ds).collect();
    let payoff: Vec<f64> = s.iter().map(|&x| (k - x).max(0.0)).collect();
    let stencil = Stencil::new(spec, ns);
    let dt = spec.maturity / cfg.nt as f64;

    let mut snap_steps: Vec<(usize, f64)> = snapshot_taus
        .iter()
        .map(|&t| ((t.clamp(0.0, 1.0) * cfg.nt as f64).round() as usize, t))
        .collect();
    snap_steps.sort_by_key(|&(n, _)| n);
    let mut snapshots = Vec::with_capacity(snap_steps.len());

    let mut v = payoff.clone();
    let mut rhs = vec![0.0; ns + 1];
    let mut taus = Vec::with_capacity(cfg.nt + 1);
    let mut boundary = Vec::with_capacity(cfg.nt + 1);
    taus.push(0.0);
    boundary.push(k);
    push_snapshots(&mut snapshots, &snap_steps, 0, &v);

    for n in 1..=cfg.nt {
        if n == 1 {
            let h = dt / RANNACHER_HALF_STEPS as f64;
            for _ in 0..RANNACHER_HALF_STEPS {
                theta_step(&stencil, &payoff, &mut v, &mut rhs, h, 1.0, cfg, k, n)?;
            }
        } else {
            theta_step(&stencil, &payoff, &mut v, &mut rhs, dt, 0.5, cfg, k, n)?;
        }
        taus.push(n as f64 / cfg.nt as f64);
        boundary.push(extract_boundary(&s, &v, &payoff, k));
        push_snapshots(&mut snapshots, &snap_steps, n, &v);
    }

    let boundary_dot = gradient(&taus, &boundary);
    Ok(FdSolution {
        s,
        taus,
        boundary,
        boundary_dot,
        values: v,
        snapshots,
    })
}

fn push_snapshots(out: &mut Vec<(f64, Vec<f64>)>, wanted: &[(usize, f64)], n: usize, v: &[f64]) {
    for &(step, tau) in wanted {
        if step == n {
            out.push((tau, v.to_vec()));
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn theta_step(
    st: &Stencil,
    payoff: &[f64],
    v: &mut [f64],
    rhs: &mut [f64],
    dt: f64,
    theta: f64,
    cfg: &FdConfig,
    k: f64,
    step: usize,
) -> Result<()> {
    let ns = cfg.ns;
    let explicit = (1.0 - theta) * dt;
    for i in 1..ns {
        rhs[i] = v[i] + explicit * st.apply(v, i);
    }
    v[0] = k;
    v[ns] = 0.0;
    let imp = theta * dt;
    for sweep in 0..MAX_SWEEPS {
        let mut change: f64 = 0.0;
        for i in 1..ns {
            let a = -imp * st.lower[i];
            let b = 1.0 - imp * st.diag[i];
            let c = -imp * st.upper[i];
            let gs = (rhs[i] - a * v[i - 1] - c * v[i + 1]) / b;
            let next = (v[i] + cfg.omega * (gs - v[i])).max(payoff[i]);
            change = change.max((next - v[i]).abs());
            v[i] = next;
        }
        if change < cfg.tol {
            return Ok(());
        }
        if !change.is_finite() {
            return Err(Error::PsorNoConvergence {
                step,
                iterations: sweep + 1,
            });
        }
    }
    Err(Error::PsorNoConvergence {
        step,
        iterations: MAX_SWEEPS,
    })
}

/// Last contact node, refined by extrapolating the square root of the gap,
/// which grows linearly away from a smooth-pasting boundary. The nodes right
/// next to the contact set are distorted by the projection, so the line runs
/// through nodes `OFFSET` and `OFFSET + 1` past it. The root may land one cell
/// below the last contact node.
fn extract_boundary(s: &[f64], v: &[f64], payoff: &[f64], k: f64) -> f64 {
    let mut ib = 0;
    while ib + 1 < s.len() && s[ib + 1] < k && v[ib + 1] <= payoff[ib + 1] {
        ib += 1;
    }
    let (i1, i2) = (ib + OFFSET, ib + OFFSET + 1);
    if i2 >= s.len() {
        return s[ib];
    }
    let r1 = (v[i1] - payoff[i1]).max(0.0).sqrt();
    let r2 = (v[i2] - payoff[i2]).max(0.0).sqrt();
    if r2 <= r1 {
        return s[ib];
    }
    let root = s[i1] - r1 * (s[i2] - s[i1]) / (r2 - r1);
    root.clamp(s[ib.saturating_sub(1)], s[ib + 1]).min(k)
}

fn gradient(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut g = vec![0.0; n];
    if n < 2 {
        return g;
    }
    g[0] = (y[1] - y[0]) / (x[1] - x[0]);
    g[n - 1] = (y[n - 1] - y[n - 2]) / (x[n - 1] - x[n - 2]);
    for i in 1..n - 1 {
        g[i] = (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]);
    }
    g
}
