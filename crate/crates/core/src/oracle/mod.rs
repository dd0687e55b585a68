//! Reference pricers independent of the network: a CRR lattice for values
//! and a Crank-Nicolson/PSOR finite-difference solver for the exercise
//! boundary and the value curve.

mod binomial;
mod psor;

pub use binomial::{binomial_put, binomial_put_at, LatticeConfig};
pub use psor::{interpolate as interpolate_curve, psor_boundary, psor_solve, FdConfig, FdSolution};
