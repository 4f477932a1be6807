//! Causal graph verification and adaptive search under stochastic off-target interventions.

pub mod baselines;
pub mod bench;
pub mod checks;
pub mod chordal;
pub mod cover;
pub mod error;
pub mod extension;
pub mod graph;
pub mod intervention;
pub mod lp;
pub mod meek;
pub mod search;
pub mod simulator;
pub mod state;

pub use error::{Error, Result};
pub use graph::{Dag, Edge, UndirectedGraph};
pub use state::{ChainComponent, OrientationState};
