//! Structured `(tau, y)` grids: uniform, randomly spaced, and power-stretched
//! towards the payoff corner `tau -> 0`, `y -> 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridKind {
    Uniform,
    RandomStructured,
    Stretched,
}

impl GridKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Some(GridKind::Uniform),
            "random" | "random_structured" => Some(GridKind::RandomStructured),
            "stretched" => Some(GridKind::Stretched),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GridKind::Uniform => "uniform",
            GridKind::RandomStructured => "random",
            GridKind::Stretched => "stretched",
        }
    }
}

/// Cartesian product `taus x ys`; both axes strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub taus: Vec<f64>,
    pub ys: Vec<f64>,
    pub kind: GridKind,
    /// Stretch exponent; 1 for unstretched kinds.
    pub p: f64,
    pub seed: Option<u64>,
}

fn check_sizes(n_tau: usize, n_y: usize) -> Result<()> {
    if n_tau < 2 || n_y < 2 {
        return Err(Error::Config(format!("grid sizes must be >= 2, got {n_tau} x {n_y}")));
    }
    Ok(())
}

fn check_tau_min(tau_min: f64) -> Result<()> {
    if !(tau_min > 0.0 && tau_min < 1.0) {
        return Err(Error::Config(format!("tau_min must lie in (0, 1), got {tau_min}")));
    }
    Ok(())
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

/// `n` equispaced values from `a` to `b`, both endpoints exact.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect();
    v[n - 1] = b;
    v
}

/// `tau_unif^p`.
pub fn stretch_tau(u: f64, p: f64) -> f64 {
    u.powf(p)
}

/// `y_unif^sqrt(p)`.
pub fn stretch_y(v: f64, p: f64) -> f64 {
    v.powf(p.sqrt())
}

impl Grid {
    pub fn uniform(n_tau: usize, n_y: usize, tau_min: f64) -> Result<Grid> {
        check_sizes(n_tau, n_y)?;
        check_tau_min(tau_min)?;
        Ok(Grid {
            taus: linspace(tau_min, 1.0, n_tau),
            ys: linspace(0.0, 1.0, n_y),
            kind: GridKind::Uniform,
            p: 1.0,
            seed: None,
        })
    }

    /// Sorted uniform draws per axis, affinely rescaled so the axis spans
    /// `[tau_min, 1]` and `[0, 1]` exactly.
    pub fn random_structured(n_tau: usize, n_y: usize, seed: u64, tau_min: f64) -> Result<Grid> {
        check_sizes(n_tau, n_y)?;
        check_tau_min(tau_min)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let taus = random_axis(&mut rng, n_tau, tau_min, 1.0);
        let ys = random_axis(&mut rng, n_y, 0.0, 1.0);
        Ok(Grid {
            taus,
            ys,
            kind: GridKind::RandomStructured,
            p: 1.0,
            seed: Some(seed),
        })
    }

    /// Power-stretched grid. The uniform tau axis starts at `tau_min^(1/p)`
    /// so the stretched axis starts exactly at `tau_min`.
    pub fn stretched(n_tau: usize, n_y: usize, p: f64, tau_min: f64) -> Result<Grid> {
        check_sizes(n_tau, n_y)?;
        check_tau_min(tau_min)?;
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Config(format!("stretch exponent must be >= 1, got {p}")));
        }
        let u0 = tau_min.powf(1.0 / p);
        let mut taus: Vec<f64> = linspace(u0, 1.0, n_tau).into_iter().map(|u| stretch_tau(u, p)).collect();
        taus[0] = tau_min;
        taus[n_tau - 1] = 1.0;
        let ys = linspace(0.0, 1.0, n_y).into_iter().map(|v| stretch_y(v, p)).collect();
        Ok(Grid {
            taus,
            ys,
            kind: GridKind::Stretched,
            p,
            seed: None,
        })
    }

    /// Grid from explicit axes (evaluation grids, tests).
    pub fn from_axes(taus: Vec<f64>, ys: Vec<f64>) -> Result<Grid> {
        if taus.is_empty() || ys.is_empty() {
            return Err(Error::Config("grid axes must be non-empty".into()));
        }
        if !strictly_increasing(&taus) || !strictly_increasing(&ys) {
            return Err(Error::Config("grid axes must be strictly increasing".into()));
        }
        if ys[0] < 0.0 || ys[ys.len() - 1] > 1.0 || taus[0] <= 0.0 || taus[taus.len() - 1] > 1.0 {
            return Err(Error::Config("grid axes must lie in (0, 1] x [0, 1]".into()));
        }
        Ok(Grid {
            taus,
            ys,
            kind: GridKind::Uniform,
            p: 1.0,
            seed: None,
        })
    }

    pub fn build(kind: GridKind, n_tau: usize, n_y: usize, p: f64, seed: u64, tau_min: f64) -> Result<Grid> {
        match kind {
            GridKind::Uniform => Grid::uniform(n_tau, n_y, tau_min),
            GridKind::RandomStructured => Grid::random_structured(n_tau, n_y, seed, tau_min),
            GridKind::Stretched => Grid::stretched(n_tau, n_y, p, tau_min),
        }
    }

    pub fn len(&self) -> usize {
        self.taus.len() * self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All points, tau-major: `(taus[i], ys[j])` sits at index `i * ny + j`.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.taus
            .iter()
            .flat_map(|&t| self.ys.iter().map(move |&y| (t, y)))
            .collect()
    }
}

fn random_axis(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    loop {
        let mut u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        u.sort_by(|a, b| a.total_cmp(b));
        let (umin, umax) = (u[0], u[n - 1]);
        if umax <= umin {
            continue;
        }
        let mut v: Vec<f64> = u.iter().map(|&x| lo + (x - umin) / (umax - umin) * (hi - lo)).collect();
        v[0] = lo;
        v[n - 1] = hi;
        if strictly_increasing(&v) {
            return v;
        }
    }
}
