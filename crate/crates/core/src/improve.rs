//! Local improvements applied to a finished coverage tour.

use crate::graph::{Arc, CoverageTour, LineCoverageInstance, VertexId};
use crate::paths::ShortestPaths;

/// Default bound on accepted 2-opt moves.
pub const DEFAULT_MOVE_CAP: usize = 10_000;

fn endpoints(inst: &LineCoverageInstance, steps: &[Arc]) -> Vec<VertexId> {
    steps.iter().flat_map(|&a| [inst.tail(a), inst.head(a)]).collect()
}

/// Replaces every maximal run of consecutive deadhead steps with a shortest
/// deadhead path between the run's ends when that path is strictly cheaper.
/// A run that wraps past the end of the tour is handled by rotating the tour
/// to start at its first service step.
pub fn short_circuit(inst: &LineCoverageInstance, tour: &CoverageTour) -> CoverageTour {
    let mut paths = ShortestPaths::with_sources(inst, &endpoints(inst, &tour.steps));
    short_circuit_with(inst, tour, &mut paths)
}

pub fn short_circuit_with(inst: &LineCoverageInstance, tour: &CoverageTour, paths: &mut ShortestPaths) -> CoverageTour {
    let steps = &tour.steps;
    let wraps = steps.len() > 1 && !steps[0].is_service() && !steps[steps.len() - 1].is_service();
    let first_service = steps.iter().position(Arc::is_service);
    let rotated: Vec<Arc> = match (wraps, first_service) {
        (true, Some(k)) => steps[k..].iter().chain(&steps[..k]).copied().collect(),
        _ => steps.clone(),
    };

    let mut out = Vec::with_capacity(rotated.len());
    let mut changed = false;
    let mut i = 0;
    while i < rotated.len() {
        if rotated[i].is_service() {
            out.push(rotated[i]);
            i += 1;
            continue;
        }
        let mut j = i;
        while j < rotated.len() && !rotated[j].is_service() {
            j += 1;
        }
        let run = &rotated[i..j];
        let run_cost: f64 = run.iter().map(|&a| inst.arc_cost(a)).sum();
        let (from, to) = (inst.tail(run[0]), inst.head(run[run.len() - 1]));
        paths.add_sources(&[from]);
        let direct = paths.cost(from, to);
        match paths.path(inst, from, to) {
            Ok(p) if direct < run_cost - crate::graph::EPS * run_cost.max(1.0) => {
                out.extend(p.arcs);
                changed = true;
            }
            _ => out.extend_from_slice(run),
        }
        i = j;
    }
    if !changed {
        return tour.clone();
    }
    CoverageTour::from_steps(inst, out, tour.lower_bound)
}

/// First-improvement 2-opt over the cyclic sequence of service steps.
///
/// A move reverses a contiguous block of services, which also flips each
/// service direction in the block; consecutive services are always joined
/// by shortest deadhead paths. At most `move_cap` moves are accepted. When
/// no move is accepted the input is returned unchanged, and the result never
/// costs more than the input.
pub fn two_opt(inst: &LineCoverageInstance, tour: &CoverageTour, move_cap: usize) -> CoverageTour {
    let mut paths = ShortestPaths::with_sources(inst, &endpoints(inst, &tour.steps));
    two_opt_with(inst, tour, move_cap, &mut paths)
}

pub fn two_opt_with(
    inst: &LineCoverageInstance,
    tour: &CoverageTour,
    move_cap: usize,
    paths: &mut ShortestPaths,
) -> CoverageTour {
    let mut seq: Vec<Arc> = tour.service_steps().copied().collect();
    let m = seq.len();
    if move_cap == 0 || m < 2 {
        return tour.clone();
    }
    let ends: Vec<VertexId> = seq.iter().flat_map(|&a| [inst.tail(a), inst.head(a)]).collect();
    paths.add_sources(&ends);

    let mut pre = Prefix::build(inst, paths, &seq);
    let mut moves = 0;
    'passes: loop {
        let mut accepted = false;
        for i in 0..m {
            // blocks of length 1..m-1 so both neighbours lie outside the block
            let mut j = i;
            while j < m && j - i + 1 < m {
                if pre.delta(inst, paths, &seq, i, j) < -crate::graph::EPS * pre.total.max(1.0) {
                    seq[i..=j].reverse();
                    for a in &mut seq[i..=j] {
                        *a = a.reversed();
                    }
                    pre = Prefix::build(inst, paths, &seq);
                    moves += 1;
                    accepted = true;
                    if moves >= move_cap {
                        break 'passes;
                    }
                }
                j += 1;
            }
        }
        if !accepted {
            break;
        }
    }
    if moves == 0 {
        return tour.clone();
    }
    let mut steps = Vec::with_capacity(2 * m);
    for k in 0..m {
        let (a, b) = (seq[k], seq[(k + 1) % m]);
        steps.push(a);
        steps.extend(paths.path(inst, inst.head(a), inst.tail(b)).expect("strongly connected").arcs);
    }
    let improved = CoverageTour::from_steps(inst, steps, tour.lower_bound);
    if improved.total_cost > tour.total_cost {
        return tour.clone();
    }
    log::debug!("2-opt accepted {moves} moves: {} -> {}", tour.total_cost, improved.total_cost);
    improved
}

/// Prefix sums over a service sequence for O(1) pricing of block reversal.
struct Prefix {
    /// `fwd[k]` = sum of SP(head_i, tail_{i+1}) for i < k.
    fwd: Vec<f64>,
    /// `bwd[k]` = sum of SP(tail_{i+1}, head_i) for i < k.
    bwd: Vec<f64>,
    /// `flip[k]` = sum of (reversed service - service) for i < k.
    flip: Vec<f64>,
    total: f64,
}

impl Prefix {
    fn build(inst: &LineCoverageInstance, paths: &ShortestPaths, seq: &[Arc]) -> Self {
        let m = seq.len();
        let (mut fwd, mut bwd, mut flip) = (vec![0.0; m], vec![0.0; m], vec![0.0; m + 1]);
        let mut total = 0.0;
        for k in 0..m {
            let (a, b) = (seq[k], seq[(k + 1) % m]);
            let link = paths.cost(inst.head(a), inst.tail(b));
            total += inst.arc_cost(a) + link;
            flip[k + 1] = flip[k] + inst.arc_cost(a.reversed()) - inst.arc_cost(a);
            if k + 1 < m {
                fwd[k + 1] = fwd[k] + link;
                bwd[k + 1] = bwd[k] + paths.cost(inst.tail(b), inst.head(a));
            }
        }
        Self { fwd, bwd, flip, total }
    }

    /// Cost change from reversing block `i..=j` (with `j - i + 1 < m`).
    fn delta(&self, inst: &LineCoverageInstance, paths: &ShortestPaths, seq: &[Arc], i: usize, j: usize) -> f64 {
        let m = seq.len();
        let (p, q) = (seq[(i + m - 1) % m], seq[(j + 1) % m]);
        let (a, b) = (seq[i], seq[j]);
        let old = paths.cost(inst.head(p), inst.tail(a)) + paths.cost(inst.head(b), inst.tail(q));
        let new = paths.cost(inst.head(p), inst.head(b)) + paths.cost(inst.tail(a), inst.tail(q));
        let inner = (self.bwd[j] - self.bwd[i]) - (self.fwd[j] - self.fwd[i]);
        new - old + inner + (self.flip[j + 1] - self.flip[i])
    }
}
