use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("instance has no required edges")]
    NoRequiredEdges,

    #[error("deadhead graph is not strongly connected: no path from {from} to {to}")]
    DisconnectedInstance { from: VertexId, to: VertexId },

    #[error("cost model needs vertex coordinates")]
    MissingCoordinates,

    #[error("edge {edge}: {detail}")]
    CostInvariantViolated { edge: usize, detail: String },

    #[error("wind speed {wind} m/s is not below travel speed {speed} m/s")]
    WindTooStrong { speed: f64, wind: f64 },

    #[error("arc multiset is not balanced at vertex {vertex} (imbalance {imbalance})")]
    NotBalanced { vertex: VertexId, imbalance: i64 },

    #[error("arc multiset is not connected to the start vertex")]
    NotConnected,

    #[error("no deadhead path from {from} to {to}")]
    Unreachable { from: VertexId, to: VertexId },

    #[error("invalid flow network: {0}")]
    InvalidNetwork(String),

    #[error("flow demands cannot be satisfied")]
    InfeasibleFlow,

    #[error("no feasible coverage tour (cost {cost:e} reaches the infeasibility threshold)")]
    Infeasible { cost: f64 },

    #[error("problem size {size} exceeds the limit of {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("ATSP needs at least 3 cities, got {size}")]
    AtspTooSmall { size: usize },

    #[error("generator profile cannot be satisfied: {0}")]
    UnsatisfiableProfile(String),

    #[error("solver produced an invalid tour: {0}")]
    InvalidTour(String),

    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
