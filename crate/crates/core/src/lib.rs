//! Single-robot line coverage: service every required edge of a graph with
//! asymmetric service and deadhead costs in one closed walk.
//!
//! [`approx::solve`] runs the full pipeline. It returns an optimal tour when
//! the required graph is Eulerian. It stays within twice the optimum when
//! the required graph is connected, and adds one ATSP over the pieces
//! otherwise.

pub mod approx;
pub mod cost;
pub mod error;
pub mod flow;
pub mod graph;
pub mod improve;
pub mod io;
pub mod mcf;
pub mod oracle;
pub mod paths;

pub use approx::{solve, AtspMode, SolveReport, SolverConfig, StitchMode};
pub use error::{Error, Result};
pub use graph::{Arc, ArcMultiset, CoverageTour, LineCoverageInstance, Mode, VertexId};
