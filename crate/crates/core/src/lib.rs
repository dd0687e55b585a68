//! Front-fixing neural solver for the American put.
//!
//! The option value is represented in normalized Landau coordinates `(tau, y)`
//! by an auxiliary function wrapped around a small sigmoid MLP. The network
//! output at `y = 0` doubles as the early exercise boundary, so one training
//! run recovers the value surface, Delta/Gamma and the boundary with its
//! velocity. A CRR lattice and a Crank-Nicolson/PSOR solver serve as
//! independent references.

pub mod auxiliary;
pub mod dual;
pub mod error;
pub mod export;
pub mod network;
pub mod optimizer;
pub mod oracle;
pub mod par;
pub mod problem;
pub mod residual;
pub mod sampler;
pub mod trainer;

pub use auxiliary::{AuxEval, BoundaryMode, Greeks};
pub use error::{Error, Result};
pub use network::{Architecture, NetJet, NetworkParams};
pub use optimizer::{AdamHyper, AdamState, TrainRecord};
pub use problem::{ProblemSpec, Scenario};
pub use sampler::{Grid, GridKind};
pub use trainer::{Method, TrainConfig, TrainOutcome};
