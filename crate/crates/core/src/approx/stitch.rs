//! Joining the Eulerian pieces of a balanced digraph into one closed walk.

use super::atsp::{held_karp_atsp, heuristic_atsp, AtspInstance};
use super::{AtspMode, SolverConfig};
use crate::error::{Error, Result};
use crate::graph::{ArcMultiset, LineCoverageInstance, VertexId};
use crate::paths::ShortestPaths;

/// Largest Noon-Bean transformed instance accepted by [`gtsp_connect`].
pub const GTSP_NODE_LIMIT: usize = 2000;

#[derive(Clone, Debug, PartialEq)]
pub struct StitchOutcome {
    pub arcs: ArcMultiset,
    /// Weakly connected pieces before stitching (after dropping pieces
    /// without service arcs).
    pub components: usize,
    /// Graph vertex visited per piece, in tour order.
    pub tour: Vec<VertexId>,
    /// Deadhead cost added to join the pieces.
    pub stitch_cost: f64,
    /// Whether the ATSP was solved exactly.
    pub exact: bool,
}

/// Drops weakly connected pieces that contain no service arc. Such pieces
/// are balanced deadhead circulations, so removing them keeps balance and
/// never raises cost.
pub fn prune_deadhead_pieces(inst: &LineCoverageInstance, body: &ArcMultiset) -> ArcMultiset {
    let comps = body.weak_components(inst);
    let arcs = body.as_slice();
    let mut keep = vec![false; arcs.len()];
    for comp in &comps {
        if comp.iter().any(|&i| arcs[i].is_service()) {
            for &i in comp {
                keep[i] = true;
            }
        }
    }
    if keep.iter().all(|&k| k) {
        return body.clone();
    }
    log::debug!("dropping {} deadhead arcs not attached to any service arc", keep.iter().filter(|k| !**k).count());
    arcs.iter().zip(keep).filter(|(_, k)| *k).map(|(&a, _)| a).collect()
}

/// Smallest vertex incident to a service arc in each piece.
fn representatives(inst: &LineCoverageInstance, body: &ArcMultiset, comps: &[Vec<usize>]) -> Vec<VertexId> {
    let arcs = body.as_slice();
    comps
        .iter()
        .map(|comp| {
            comp.iter()
                .filter(|&&i| arcs[i].is_service())
                .flat_map(|&i| [inst.tail(arcs[i]), inst.head(arcs[i])])
                .min()
                .expect("piece with a service arc")
        })
        .collect()
}

fn solve_atsp(m: &AtspInstance, cfg: &SolverConfig) -> Result<(Vec<usize>, f64, bool)> {
    let exact = match cfg.atsp_mode {
        AtspMode::ExactDp => true,
        AtspMode::Heuristic => false,
        AtspMode::Auto => m.size() <= cfg.dp_threshold,
    };
    let (order, cost) = if exact { held_karp_atsp(m, cfg.dp_threshold)? } else { heuristic_atsp(m, cfg.seed)? };
    Ok((order, cost, exact))
}

/// Expands a cyclic vertex sequence into shortest deadhead paths.
fn close_loop(
    inst: &LineCoverageInstance,
    paths: &ShortestPaths,
    stops: &[VertexId],
    into: &mut ArcMultiset,
) -> Result<f64> {
    let mut added = 0.0;
    for k in 0..stops.len() {
        let (a, b) = (stops[k], stops[(k + 1) % stops.len()]);
        let p = paths.path(inst, a, b)?;
        added += p.cost;
        into.extend(p.arcs);
    }
    Ok(added)
}

/// Connects the pieces of a balanced body through one representative
/// vertex each (the smallest vertex on a service arc), ordered by an ATSP
/// tour over shortest deadhead costs. With exactly two pieces one
/// representative is duplicated with a zero-cost link so the ATSP has three
/// cities.
pub fn connect_components(
    inst: &LineCoverageInstance,
    body: &ArcMultiset,
    cfg: &SolverConfig,
) -> Result<ArcMultiset> {
    let body = prune_deadhead_pieces(inst, body);
    let comps = body.weak_components(inst);
    let reps = representatives(inst, &body, &comps);
    let mut paths = ShortestPaths::with_sources(inst, &reps);
    Ok(connect_with(inst, &body, cfg, &mut paths)?.arcs)
}

/// As [`connect_components`] with a caller-owned path cache; missing source
/// rows are added on demand. `body` must already be pruned.
pub fn connect_with(
    inst: &LineCoverageInstance,
    body: &ArcMultiset,
    cfg: &SolverConfig,
    paths: &mut ShortestPaths,
) -> Result<StitchOutcome> {
    let comps = body.weak_components(inst);
    let reps = representatives(inst, body, &comps);
    if comps.len() <= 1 {
        return Ok(StitchOutcome { arcs: body.clone(), components: comps.len(), tour: reps, stitch_cost: 0.0, exact: true });
    }
    paths.add_sources(&reps);

    let mut cities = reps.clone();
    if cities.len() == 2 {
        cities.push(cities[0]);
    }
    let m = AtspInstance::from_fn(cities.len(), cities.clone(), |i, j| paths.cost(cities[i], cities[j]));
    let (order, _, exact) = solve_atsp(&m, cfg)?;
    let mut tour: Vec<VertexId> = order.iter().map(|&c| cities[c]).collect();
    tour.dedup();
    if tour.len() > 1 && tour.first() == tour.last() {
        tour.pop();
    }

    let mut arcs = body.clone();
    let stitch_cost = close_loop(inst, paths, &tour, &mut arcs)?;
    Ok(StitchOutcome { arcs, components: comps.len(), tour, stitch_cost, exact })
}

/// Connects the pieces by a generalized TSP that may enter each piece at
/// any of its vertices, solved as an ATSP after the Noon-Bean transform.
pub fn gtsp_connect(inst: &LineCoverageInstance, body: &ArcMultiset, cfg: &SolverConfig) -> Result<ArcMultiset> {
    let body = prune_deadhead_pieces(inst, body);
    let mut paths = ShortestPaths::with_sources(inst, &[]);
    Ok(gtsp_with(inst, &body, cfg, &mut paths)?.arcs)
}

pub fn gtsp_with(
    inst: &LineCoverageInstance,
    body: &ArcMultiset,
    cfg: &SolverConfig,
    paths: &mut ShortestPaths,
) -> Result<StitchOutcome> {
    let comps = body.weak_components(inst);
    if comps.len() <= 1 {
        return connect_with(inst, body, cfg, paths);
    }
    let arcs = body.as_slice();
    let clusters: Vec<Vec<VertexId>> = comps
        .iter()
        .map(|comp| {
            let mut vs: Vec<VertexId> = comp.iter().flat_map(|&i| [inst.tail(arcs[i]), inst.head(arcs[i])]).collect();
            vs.sort_unstable();
            vs.dedup();
            vs
        })
        .collect();
    let nodes: Vec<VertexId> = clusters.iter().flatten().copied().collect();
    if nodes.len() < 3 {
        // every cluster is a single vertex, so this is the plain ATSP case
        return connect_with(inst, body, cfg, paths);
    }
    if nodes.len() > GTSP_NODE_LIMIT {
        return Err(Error::TooLarge { size: nodes.len(), limit: GTSP_NODE_LIMIT });
    }
    paths.add_sources(&nodes);

    let (order, exact) = noon_bean_order(&clusters, |a, b| paths.cost(a, b), cfg)?;
    let mut arcs = body.clone();
    let stitch_cost = close_loop(inst, paths, &order, &mut arcs)?;
    Ok(StitchOutcome { arcs, components: comps.len(), tour: order, stitch_cost, exact })
}

/// One vertex per cluster, in visiting order, chosen by solving the
/// Noon-Bean ATSP: each cluster becomes a zero-cost directed cycle over its
/// nodes, and leaving a cluster from node `x` is charged as if leaving from
/// its cycle successor (the node where the cluster was entered), plus a
/// large constant that forces each cluster to be visited contiguously.
pub(crate) fn noon_bean_order(
    clusters: &[Vec<VertexId>],
    cost: impl Fn(VertexId, VertexId) -> f64,
    cfg: &SolverConfig,
) -> Result<(Vec<VertexId>, bool)> {
    let mut node_cluster = Vec::new();
    let mut succ = Vec::new();
    let mut vertex = Vec::new();
    for (c, cl) in clusters.iter().enumerate() {
        let base = vertex.len();
        for k in 0..cl.len() {
            node_cluster.push(c);
            succ.push(base + (k + 1) % cl.len());
            vertex.push(cl[k]);
        }
    }
    let n = vertex.len();
    let mut max_cost: f64 = 0.0;
    for &a in &vertex {
        for &b in &vertex {
            max_cost = max_cost.max(cost(a, b));
        }
    }
    let big_m = (clusters.len() as f64 + 1.0) * (max_cost + 1.0);
    let forbidden = (n as f64 + 1.0) * (big_m + max_cost + 1.0);
    let m = AtspInstance::from_fn(n, vertex.clone(), |i, j| {
        if node_cluster[i] == node_cluster[j] {
            if succ[i] == j {
                0.0
            } else {
                forbidden
            }
        } else {
            cost(vertex[succ[i]], vertex[j]) + big_m
        }
    });
    let (order, _, exact) = solve_atsp(&m, cfg)?;

    // entry node of each cluster = first node of it on the tour; decoding by
    // first appearance stays a valid choice even if a heuristic tour splits a
    // cluster
    let mut seen = vec![false; clusters.len()];
    let mut picks = Vec::with_capacity(clusters.len());
    for &node in &order {
        let c = node_cluster[node];
        if !seen[c] {
            seen[c] = true;
            picks.push(vertex[node]);
        }
    }
    Ok((picks, exact))
}
