//! Reference bundles from the finite-difference and lattice pricers, in the
//! same CSV schemas as trained runs.

use std::path::Path;

use frontfix::export::{BoundaryRow, GreeksRow, ReportRow};
use frontfix::oracle::{binomial_put, psor_solve, FdConfig, FdSolution, LatticeConfig};
use frontfix::ProblemSpec;

use crate::bundle::{create_dir, write_csv, BOUNDARY, GREEKS, SUMMARY};
use crate::config::ExperimentConfig;
use crate::error::CliResult;

pub const LATTICE: &str = "lattice.csv";

#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub fd: FdConfig,
    pub lattice: LatticeConfig,
    pub spots: Vec<f64>,
}

/// Value, Delta and Gamma at `s` from central differences on the FD nodes.
fn fd_greeks(sol: &FdSolution, values: &[f64], s: f64) -> (f64, f64, f64) {
    let ds = sol.s[1] - sol.s[0];
    let last = sol.s.len() - 2;
    let i = ((s / ds).floor() as usize).clamp(1, last);
    let w = (s - sol.s[i]) / ds;
    let node = |j: usize| {
        let d = (values[j + 1] - values[j - 1]) / (2.0 * ds);
        let g = (values[j + 1] - 2.0 * values[j] + values[j - 1]) / (ds * ds);
        (d, g)
    };
    let (d0, g0) = node(i);
    let (d1, g1) = node((i + 1).min(last));
    let v = values[i] + w * (values[i + 1] - values[i]);
    (v, d0 + w * (d1 - d0), g0 + w * (g1 - g0))
}

/// Lattice Delta and Gamma by symmetric bumps of the spot.
fn lattice_greeks(spec: &ProblemSpec, s: f64, cfg: LatticeConfig) -> frontfix::Result<GreeksRow> {
    let h = 0.01 * s;
    let v = binomial_put(spec, s, cfg)?;
    let up = binomial_put(spec, s + h, cfg)?;
    let down = binomial_put(spec, s - h, cfg)?;
    Ok(GreeksRow {
        tau: 1.0,
        s,
        v,
        delta: (up - down) / (2.0 * h),
        gamma: (up - 2.0 * v + down) / (h * h),
    })
}

pub fn run(cfg: &ExperimentConfig, opts: &OracleOptions, dir: &Path) -> CliResult<FdSolution> {
    let spec = &cfg.spec;
    create_dir(dir)?;
    let predict = cfg.predict.build(spec.tau_min)?;
    let sol = psor_solve(spec, &opts.fd, &predict.taus)?;

    let boundary: Vec<BoundaryRow> = (0..sol.taus.len())
        .map(|i| BoundaryRow {
            tau: sol.taus[i],
            sf: sol.boundary[i],
            sf_dot: sol.boundary_dot[i],
        })
        .collect();
    write_csv(&dir.join(BOUNDARY), &boundary)?;

    let s_top = sol.s[sol.s.len() - 2];
    let mut greeks = Vec::new();
    for (tau, values) in &sol.snapshots {
        let sf = frontfix::oracle::interpolate_curve(&sol.taus, &sol.boundary, *tau);
        for &y in &predict.ys {
            let s = sf * (y * spec.x_max).exp();
            if s > s_top {
                break;
            }
            let (v, delta, gamma) = fd_greeks(&sol, values, s);
            greeks.push(GreeksRow {
                tau: *tau,
                s,
                v,
                delta,
                gamma,
            });
        }
    }
    write_csv(&dir.join(GREEKS), &greeks)?;

    let lattice = frontfix::par::map(&opts.spots, |&s| lattice_greeks(spec, s, opts.lattice))
        .into_iter()
        .collect::<frontfix::Result<Vec<_>>>()?;
    write_csv(&dir.join(LATTICE), &lattice)?;

    let report = vec![
        ReportRow::new("experiment", format!("oracle {}", cfg.name)),
        ReportRow::new("config_hash", cfg.hash()),
        ReportRow::new("fd_grid", format!("ns={} nt={} s_max={}", opts.fd.ns, opts.fd.nt, opts.fd.s_max)),
        ReportRow::new("lattice_steps", opts.lattice.steps),
        ReportRow::new("sf_T", sol.final_boundary()),
        ReportRow::new("sf_dot_T", *sol.boundary_dot.last().expect("non-empty")),
    ];
    write_csv(&dir.join(SUMMARY), &report)?;
    Ok(sol)
}
