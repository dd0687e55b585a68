//! Residual of the normalized front-fixed PDE and the mean-squared loss over a
//! training grid, with its exact parameter gradient.

use serde::{Deserialize, Serialize};

use crate::auxiliary::{assemble, AuxEval, BoundaryMode, Jet};
use crate::dual::{Dual, Scalar};
use crate::error::{Error, Result};
use crate::network::{Channels, NetJet, NetworkParams, Tape, CHUNK_POINTS};
use crate::par;
use crate::problem::ProblemSpec;
use crate::sampler::Grid;

/// `|sf|` below `SF_GUARD * K` makes the drift term `sf'/sf` meaningless.
pub const SF_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub tau: f64,
    pub y: f64,
    pub r_value: f64,
}

/// `P_tau/T - sigma^2/(2 x^2) P_yy - (r - sigma^2/2 + sf'/(T sf)) P_y / x + r P`.
pub fn residual_of<T: Scalar>(spec: &ProblemSpec, aux: &AuxEval<T>) -> T {
    let x = spec.x_max;
    let sig2 = spec.sigma * spec.sigma;
    let drift = aux.sf_dot / (aux.sf * spec.maturity) + (spec.rate - 0.5 * sig2);
    aux.p_tau * (1.0 / spec.maturity) - aux.p_yy * (0.5 * sig2 / (x * x)) - drift * aux.p_y / x
        + aux.p * spec.rate
}

fn guard(spec: &ProblemSpec, tau: f64, sf: f64) -> Result<()> {
    let floor = SF_GUARD * spec.strike;
    if !(sf.abs() >= floor) {
        return Err(Error::BoundaryGuard { tau, sf, floor });
    }
    Ok(())
}

fn edge_channels(mode: BoundaryMode) -> Channels {
    match mode {
        BoundaryMode::Case1 => Channels::Boundary,
        BoundaryMode::Case2 => Channels::Full,
    }
}

fn check_grid(spec: &ProblemSpec, grid: &Grid) -> Result<()> {
    if grid.taus.is_empty() || grid.ys.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    if grid.taus[0] < spec.tau_min {
        return Err(Error::Domain(format!(
            "grid starts at tau={} below tau_min={}",
            grid.taus[0], spec.tau_min
        )));
    }
    Ok(())
}

pub fn pde_residual(
    params: &NetworkParams,
    spec: &ProblemSpec,
    tau: f64,
    y: f64,
    mode: BoundaryMode,
) -> Result<f64> {
    let aux = crate::auxiliary::evaluate(params, spec, tau, y, mode)?;
    guard(spec, tau, aux.sf)?;
    Ok(residual_of(spec, &aux))
}

/// Residual at every grid point, in grid order (tau-major).
pub fn residuals(
    params: &NetworkParams,
    spec: &ProblemSpec,
    grid: &Grid,
    mode: BoundaryMode,
) -> Result<Vec<ResidualPoint>> {
    check_grid(spec, grid)?;
    let edges = edge_jets(params, grid, mode);
    let points = grid.points();
    let main = params.jets(&points, Channels::Interior);
    let ny = grid.ys.len();
    points
        .iter()
        .zip(&main)
        .enumerate()
        .map(|(i, (&(tau, y), jet))| {
            let aux = assemble(spec, tau, y, &Jet::from(*jet), &Jet::from(edges[i / ny]), mode);
            guard(spec, tau, aux.sf)?;
            Ok(ResidualPoint {
                tau,
                y,
                r_value: residual_of(spec, &aux),
            })
        })
        .collect()
}

fn edge_jets(params: &NetworkParams, grid: &Grid, mode: BoundaryMode) -> Vec<NetJet> {
    let pts: Vec<(f64, f64)> = grid.taus.iter().map(|&t| (t, 0.0)).collect();
    params.jets(&pts, edge_channels(mode))
}

/// Compensated (Neumaier) sum.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Mean of squared residuals over every grid point.
pub fn loss(params: &NetworkParams, spec: &ProblemSpec, grid: &Grid, mode: BoundaryMode) -> Result<f64> {
    let r = residuals(params, spec, grid, mode)?;
    Ok(neumaier_sum(r.iter().map(|p| p.r_value * p.r_value)) / r.len() as f64)
}

/// Loss and its gradient with respect to every network parameter.
pub fn loss_and_gradient(
    params: &NetworkParams,
    spec: &ProblemSpec,
    grid: &Grid,
    mode: BoundaryMode,
) -> Result<(f64, Vec<f64>)> {
    loss_and_gradient_with(par::Mode::default(), params, spec, grid, mode)
}

struct ChunkResult {
    squares: Vec<f64>,
    grad: Vec<f64>,
    /// `(tau index, adjoint of the edge jet)` for the taus this chunk touches.
    edge_adj: Vec<(usize, [f64; 6])>,
}

const MAIN_SLOTS: usize = 4;
type D = Dual<10>;

fn seeded_main(j: &NetJet) -> Jet<D> {
    Jet {
        n: D::variable(j.n, 0),
        n_tau: D::variable(j.n_tau, 1),
        n_y: D::variable(j.n_y, 2),
        n_yy: D::variable(j.n_yy, 3),
        n_tau_y: D::constant(0.0),
        n_tau_yy: D::constant(0.0),
    }
}

fn seeded_edge(j: &NetJet) -> Jet<D> {
    let a = j.to_array();
    Jet {
        n: D::variable(a[0], MAIN_SLOTS),
        n_tau: D::variable(a[1], MAIN_SLOTS + 1),
        n_y: D::variable(a[2], MAIN_SLOTS + 2),
        n_yy: D::variable(a[3], MAIN_SLOTS + 3),
        n_tau_y: D::variable(a[4], MAIN_SLOTS + 4),
        n_tau_yy: D::variable(a[5], MAIN_SLOTS + 5),
    }
}

/// [`loss_and_gradient`] with an explicit scheduling mode. Every mode returns
/// bit-identical results.
pub fn loss_and_gradient_with(
    mode_par: par::Mode,
    params: &NetworkParams,
    spec: &ProblemSpec,
    grid: &Grid,
    mode: BoundaryMode,
) -> Result<(f64, Vec<f64>)> {
    check_grid(spec, grid)?;
    let ny = grid.ys.len();
    let total = (grid.taus.len() * ny) as f64;

    let edge_points: Vec<(f64, f64)> = grid.taus.iter().map(|&t| (t, 0.0)).collect();
    let edge_chunks: Vec<&[(f64, f64)]> = edge_points.chunks(CHUNK_POINTS).collect();
    let edge_tapes = par::map_with(mode_par, &edge_chunks, |c| Tape::forward(params, c, edge_channels(mode)));
    let edges: Vec<NetJet> = edge_tapes.iter().flat_map(|t| t.outputs()).collect();

    let points = grid.points();
    let ranges: Vec<(usize, usize)> = (0..points.len())
        .step_by(CHUNK_POINTS)
        .map(|s| (s, (s + CHUNK_POINTS).min(points.len())))
        .collect();

    let chunk_results = par::map_with(mode_par, &ranges, |&(start, end)| -> Result<ChunkResult> {
        let tape = Tape::forward(params, &points[start..end], Channels::Interior);
        let jets = tape.outputs();
        let mut squares = Vec::with_capacity(end - start);
        let mut adjoints = Vec::with_capacity(end - start);
        let mut edge_adj: Vec<(usize, [f64; 6])> = Vec::new();
        for (offset, jet) in jets.iter().enumerate() {
            let idx = start + offset;
            let (tau, y) = points[idx];
            let ti = idx / ny;
            let aux = assemble(spec, tau, y, &seeded_main(jet), &seeded_edge(&edges[ti]), mode);
            guard(spec, tau, aux.sf.re)?;
            let r = residual_of(spec, &aux);
            squares.push(r.re * r.re);
            let scale = 2.0 * r.re / total;
            let e = r.eps;
            adjoints.push(NetJet {
                n: scale * e[0],
                n_tau: scale * e[1],
                n_y: scale * e[2],
                n_yy: scale * e[3],
                ..NetJet::default()
            });
            let contrib = std::array::from_fn(|k| scale * e[MAIN_SLOTS + k]);
            match edge_adj.last_mut() {
                Some((last, acc)) if *last == ti => {
                    for (a, c) in acc.iter_mut().zip(contrib) {
                        *a += c;
                    }
                }
                _ => edge_adj.push((ti, contrib)),
            }
        }
        let mut grad = vec![0.0; params.len()];
        tape.backward(params, &adjoints, &mut grad);
        Ok(ChunkResult {
            squares,
            grad,
            edge_adj,
        })
    });

    let mut grad = vec![0.0; params.len()];
    let mut edge_adj = vec![[0.0; 6]; grid.taus.len()];
    let mut squares = Vec::with_capacity(points.len());
    for res in chunk_results {
        let res = res?;
        for (g, v) in grad.iter_mut().zip(&res.grad) {
            *g += v;
        }
        for (ti, c) in res.edge_adj {
            for (a, v) in edge_adj[ti].iter_mut().zip(c) {
                *a += v;
            }
        }
        squares.extend(res.squares);
    }

    let edge_adj: Vec<NetJet> = edge_adj.into_iter().map(NetJet::from_array).collect();
    let work: Vec<(&Tape, &[NetJet])> = edge_tapes.iter().zip(edge_adj.chunks(CHUNK_POINTS)).collect();
    let partials = par::map_with(mode_par, &work, |(tape, adj)| {
        let mut g = vec![0.0; params.len()];
        tape.backward(params, adj, &mut g);
        g
    });
    for p in &partials {
        for (g, v) in grad.iter_mut().zip(p) {
            *g += v;
        }
    }

    Ok((neumaier_sum(squares) / total, grad))
}
