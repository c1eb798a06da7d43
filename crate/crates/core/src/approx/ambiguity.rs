use crate::error::Result;
use crate::flow::LpSolveResult;
use crate::graph::{Arc, ArcMultiset, LineCoverageInstance, VertexId};
use crate::paths::ShortestPaths;

/// Outcome of orienting the ambiguous edges.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub arcs: ArcMultiset,
    /// Number of ambiguous cycles oriented without deadheading.
    pub cycles: usize,
    /// Ambiguous edges oriented one at a time with a return path.
    pub singles: usize,
}

/// Orients every ambiguous edge so the result is balanced.
///
/// Cycles among the ambiguous edges are peeled off first and oriented along
/// their DFS discovery order; a consistently oriented cycle needs no extra
/// arcs. Each remaining ambiguous edge is serviced in the direction whose
/// service cost plus shortest return path is cheaper, and that return path
/// is added as deadhead arcs.
pub fn resolve_ambiguous(inst: &LineCoverageInstance, lp: &LpSolveResult) -> Result<ArcMultiset> {
    let ends: Vec<VertexId> = lp.ambiguous.iter().flat_map(|&a| [inst.tail(a), inst.head(a)]).collect();
    let paths = ShortestPaths::with_sources(inst, &ends);
    Ok(resolve_with(inst, lp, &paths)?.arcs)
}

/// As [`resolve_ambiguous`], with precomputed paths from every endpoint of
/// an ambiguous edge.
pub fn resolve_with(inst: &LineCoverageInstance, lp: &LpSolveResult, paths: &ShortestPaths) -> Result<Resolution> {
    let mut arcs = lp.balanced.clone();
    let (cycles, leftover) = peel_cycles(inst, &lp.ambiguous);
    for cycle in &cycles {
        let oriented: f64 = cycle.iter().map(|&a| inst.arc_cost(a)).sum();
        let opposite: f64 = cycle.iter().map(|&a| inst.arc_cost(a.reversed())).sum();
        if (oriented - opposite).abs() > 1e-6 {
            log::warn!(
                "ambiguous cycle orientations differ in cost ({oriented} vs {opposite}); flow may be suboptimal"
            );
        }
        arcs.extend(cycle.iter().copied());
    }

    for &a in &leftover {
        let b = a.reversed();
        let via_a = inst.arc_cost(a) + paths.cost(inst.head(a), inst.tail(a));
        let via_b = inst.arc_cost(b) + paths.cost(inst.head(b), inst.tail(b));
        let pick = if via_a <= via_b { a } else { b };
        arcs.push(pick);
        arcs.extend(paths.path(inst, inst.head(pick), inst.tail(pick))?.arcs);
    }
    Ok(Resolution { arcs, cycles: cycles.len(), singles: leftover.len() })
}

/// Splits ambiguous arcs into edge-disjoint cycles (each returned as
/// consistently oriented service arcs) and a leftover forest.
pub(crate) fn peel_cycles(inst: &LineCoverageInstance, ambiguous: &[Arc]) -> (Vec<Vec<Arc>>, Vec<Arc>) {
    let mut alive = vec![true; ambiguous.len()];
    let mut cycles = Vec::new();
    while let Some(cycle) = find_cycle(inst, ambiguous, &alive) {
        for &(i, _) in &cycle {
            alive[i] = false;
        }
        cycles.push(cycle.into_iter().map(|(i, forward)| Arc::service(ambiguous[i].edge, forward)).collect());
    }
    let leftover = ambiguous.iter().zip(&alive).filter(|(_, &on)| on).map(|(&a, _)| a).collect();
    (cycles, leftover)
}

/// First cycle found by an iterative DFS over the live ambiguous edges, as
/// `(index, forward)` pairs in traversal order. Parallel edges form 2-cycles
/// and self-loops 1-cycles.
fn find_cycle(inst: &LineCoverageInstance, ambiguous: &[Arc], alive: &[bool]) -> Option<Vec<(usize, bool)>> {
    let n = inst.vertex_count();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut roots = Vec::new();
    for (i, a) in ambiguous.iter().enumerate().filter(|(i, _)| alive[*i]) {
        let e = inst.edge(a.edge);
        if e.is_loop() {
            return Some(vec![(i, true)]);
        }
        adj[e.u.0].push((e.v.0, i));
        adj[e.v.0].push((e.u.0, i));
        roots.push(e.u.0.min(e.v.0));
    }
    roots.sort_unstable();
    roots.dedup();

    const UNSEEN: usize = usize::MAX;
    let mut depth = vec![UNSEEN; n];
    // edge index used to reach each vertex
    let mut via: Vec<Option<usize>> = vec![None; n];
    let mut parent = vec![UNSEEN; n];
    let mut cursor = vec![0usize; n];
    for root in roots {
        if depth[root] != UNSEEN {
            continue;
        }
        depth[root] = 0;
        let mut stack = vec![root];
        while let Some(&u) = stack.last() {
            if cursor[u] == adj[u].len() {
                stack.pop();
                continue;
            }
            let (w, i) = adj[u][cursor[u]];
            cursor[u] += 1;
            if via[u] == Some(i) {
                continue;
            }
            if depth[w] == UNSEEN {
                depth[w] = depth[u] + 1;
                via[w] = Some(i);
                parent[w] = u;
                stack.push(w);
                continue;
            }
            // back edge to the ancestor w: walk the tree path w -> u, then u -> w
            let mut tree = Vec::new();
            let mut x = u;
            while x != w {
                let j = via[x].expect("tree edge");
                tree.push((j, traversed_forward(inst, ambiguous[j], parent[x], x)));
                x = parent[x];
            }
            tree.reverse();
            tree.push((i, traversed_forward(inst, ambiguous[i], u, w)));
            return Some(tree);
        }
    }
    None
}

fn traversed_forward(inst: &LineCoverageInstance, a: Arc, from: usize, to: usize) -> bool {
    let e = inst.edge(a.edge);
    debug_assert!((e.u.0, e.v.0) == (from, to) || (e.v.0, e.u.0) == (from, to));
    e.u.0 == from && e.v.0 == to
}
