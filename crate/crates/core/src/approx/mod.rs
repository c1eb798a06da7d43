//! The approximation pipeline: flow relaxation, ambiguity resolution,
//! component stitching, Euler tour, then local improvements.

mod ambiguity;
pub mod atsp;
mod stitch;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::lp_solve;
use crate::graph::{euler_tour, is_infeasible, validate_tour, CoverageTour, LineCoverageInstance, VertexId};
use crate::improve::{short_circuit_with, two_opt_with, DEFAULT_MOVE_CAP};
use crate::paths::ShortestPaths;

pub use ambiguity::{resolve_ambiguous, resolve_with, Resolution};
pub use atsp::{held_karp_atsp, heuristic_atsp, AtspInstance, DP_LIMIT};
pub use stitch::{
    connect_components, connect_with, gtsp_connect, gtsp_with, prune_deadhead_pieces, StitchOutcome,
    GTSP_NODE_LIMIT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtspMode {
    ExactDp,
    Heuristic,
    /// Exact when the ATSP has at most `dp_threshold` cities.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StitchMode {
    Atsp,
    Gtsp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub atsp_mode: AtspMode,
    pub stitch_mode: StitchMode,
    pub short_circuit: bool,
    pub two_opt: bool,
    pub two_opt_move_cap: usize,
    pub seed: u64,
    pub dp_threshold: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            atsp_mode: AtspMode::Auto,
            stitch_mode: StitchMode::Atsp,
            short_circuit: true,
            two_opt: true,
            two_opt_move_cap: DEFAULT_MOVE_CAP,
            seed: 0,
            dp_threshold: 18,
        }
    }
}

/// Cost after each phase and wall time per phase in seconds.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    pub lp_seconds: f64,
    pub resolve_seconds: f64,
    pub stitch_seconds: f64,
    pub improve_seconds: f64,
    /// Cost of the balanced arcs after ambiguity resolution.
    pub resolved_cost: f64,
    /// Cost once the pieces are joined (the Euler tour's cost).
    pub stitched_cost: f64,
    pub short_circuit_cost: f64,
    pub two_opt_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub lower_bound: f64,
    pub cost: f64,
    /// `cost / lower_bound`; 1 when the bound is zero.
    pub ratio: f64,
    /// Connected pieces of the required graph.
    pub components: usize,
    /// Pieces the ATSP/GTSP actually joined.
    pub stitched_components: usize,
    pub ambiguous: usize,
    pub exact_atsp: bool,
    pub phases: PhaseStats,
}

/// Solves an instance end to end. The returned tour always passes
/// [`validate_tour`].
pub fn solve(inst: &LineCoverageInstance, cfg: &SolverConfig) -> Result<(CoverageTour, SolveReport)> {
    let mut phases = PhaseStats::default();

    let clock = Instant::now();
    let lp = lp_solve(inst)?;
    phases.lp_seconds = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let ends: Vec<VertexId> = lp.ambiguous.iter().flat_map(|&a| [inst.tail(a), inst.head(a)]).collect();
    let mut paths = ShortestPaths::with_sources(inst, &ends);
    let resolution = resolve_with(inst, &lp, &paths)?;
    phases.resolved_cost = resolution.arcs.cost(inst);
    phases.resolve_seconds = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let body = prune_deadhead_pieces(inst, &resolution.arcs);
    let stitched = match cfg.stitch_mode {
        StitchMode::Atsp => connect_with(inst, &body, cfg, &mut paths)?,
        StitchMode::Gtsp => gtsp_with(inst, &body, cfg, &mut paths)?,
    };
    let start = stitched
        .arcs
        .iter()
        .filter(|a| a.is_service())
        .min_by_key(|a| a.edge)
        .map(|&a| inst.tail(a))
        .expect("at least one required edge");
    let mut tour = euler_tour(inst, &stitched.arcs, start)?;
    tour.lower_bound = Some(lp.lower_bound);
    phases.stitched_cost = tour.total_cost;
    phases.stitch_seconds = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    if cfg.short_circuit {
        tour = short_circuit_with(inst, &tour, &mut paths);
    }
    phases.short_circuit_cost = tour.total_cost;
    if cfg.two_opt {
        tour = two_opt_with(inst, &tour, cfg.two_opt_move_cap, &mut paths);
    }
    phases.two_opt_cost = tour.total_cost;
    phases.improve_seconds = clock.elapsed().as_secs_f64();

    let check = validate_tour(inst, &tour);
    if !check.is_valid() {
        return Err(Error::InvalidTour(check.to_string()));
    }
    if is_infeasible(tour.total_cost) {
        return Err(Error::Infeasible { cost: tour.total_cost });
    }
    let ratio = if lp.lower_bound > 0.0 { tour.total_cost / lp.lower_bound } else { 1.0 };
    let report = SolveReport {
        lower_bound: lp.lower_bound,
        cost: tour.total_cost,
        ratio,
        components: inst.required_components().len(),
        stitched_components: stitched.components,
        ambiguous: lp.ambiguous.len(),
        exact_atsp: stitched.exact,
        phases,
    };
    Ok((tour, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{nonreq, req, triangle};

    #[test]
    fn triangle_is_its_own_tour() {
        let inst = triangle();
        let (tour, report) = solve(&inst, &SolverConfig::default()).unwrap();
        assert!(validate_tour(&inst, &tour).is_valid());
        assert_eq!(report.cost, report.lower_bound);
        assert_eq!(report.components, 1);
    }

    #[test]
    fn two_pieces_are_joined() {
        let inst = LineCoverageInstance::new(
            4,
            None,
            vec![
                req(0, 1, (1.0, 1.0), (1.0, 1.0)),
                req(2, 3, (1.0, 1.0), (1.0, 1.0)),
                nonreq(1, 2, (5.0, 3.0)),
                nonreq(0, 3, (9.0, 9.0)),
            ],
        )
        .unwrap();
        for stitch_mode in [StitchMode::Atsp, StitchMode::Gtsp] {
            let cfg = SolverConfig { stitch_mode, ..SolverConfig::default() };
            let (tour, report) = solve(&inst, &cfg).unwrap();
            assert!(validate_tour(&inst, &tour).is_valid());
            assert_eq!(report.components, 2);
            assert!(report.cost >= report.lower_bound);
        }
    }
}
