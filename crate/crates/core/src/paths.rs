//! Shortest deadhead paths over all edges in both directions.
//!
//! Arcs whose deadhead cost reaches the infeasibility threshold are left out
//! of the search graph entirely.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::{is_infeasible, Arc, LineCoverageInstance, VertexId};

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub cost: f64,
    /// Deadhead arcs in travel order.
    pub arcs: Vec<Arc>,
}

/// Deadhead arcs grouped by tail.
#[derive(Clone, Debug)]
pub(crate) struct DeadheadGraph {
    out: Vec<Vec<(usize, f64, Arc)>>,
}

impl DeadheadGraph {
    pub(crate) fn new(inst: &LineCoverageInstance) -> Self {
        let mut out = vec![Vec::new(); inst.vertex_count()];
        for e in inst.edges() {
            if e.is_loop() {
                continue;
            }
            for forward in [true, false] {
                let c = e.deadhead_cost(forward);
                if !is_infeasible(c) {
                    out[e.tail(forward).0].push((e.head(forward).0, c, Arc::deadhead(e.id, forward)));
                }
            }
        }
        Self { out }
    }

    fn dijkstra(&self, src: usize) -> Row {
        let n = self.out.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut last = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(HeapItem { cost: 0.0, vertex: src });
        while let Some(HeapItem { cost, vertex }) = heap.pop() {
            if cost > dist[vertex] {
                continue;
            }
            for &(h, c, a) in &self.out[vertex] {
                let nd = cost + c;
                if nd < dist[h] {
                    dist[h] = nd;
                    last[h] = Some(a);
                    heap.push(HeapItem { cost: nd, vertex: h });
                }
            }
        }
        Row { dist, last }
    }
}

/// Min-heap entry ordered by cost, then vertex index.
#[derive(Clone, Copy, Debug)]
pub(crate) struct HeapItem {
    pub(crate) cost: f64,
    pub(crate) vertex: usize,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.vertex.cmp(&self.vertex))
    }
}

#[derive(Clone, Debug)]
struct Row {
    dist: Vec<f64>,
    /// Last arc of the shortest path into each target.
    last: Vec<Option<Arc>>,
}

/// Shortest deadhead path costs and predecessor arcs from a set of sources.
///
/// With many sources (more than a quarter of the vertices) all rows are
/// filled by Floyd-Warshall; otherwise each source runs its own Dijkstra.
#[derive(Clone, Debug)]
pub struct ShortestPaths {
    graph: DeadheadGraph,
    rows: Vec<Option<Row>>,
}

impl ShortestPaths {
    pub fn with_sources(inst: &LineCoverageInstance, sources: &[VertexId]) -> Self {
        let n = inst.vertex_count();
        let mut wanted = vec![false; n];
        for s in sources {
            wanted[s.0] = true;
        }
        let distinct = wanted.iter().filter(|&&w| w).count();
        if distinct * 4 > n {
            return Self::all_pairs(inst);
        }
        let mut sp = Self { graph: DeadheadGraph::new(inst), rows: vec![None; n] };
        sp.add_sources(sources);
        sp
    }

    /// All-pairs shortest deadhead paths via Floyd-Warshall.
    pub fn all_pairs(inst: &LineCoverageInstance) -> Self {
        let graph = DeadheadGraph::new(inst);
        let n = inst.vertex_count();
        let mut dist = vec![vec![f64::INFINITY; n]; n];
        let mut last: Vec<Vec<Option<Arc>>> = vec![vec![None; n]; n];
        for (t, arcs) in graph.out.iter().enumerate() {
            dist[t][t] = 0.0;
            for &(h, c, a) in arcs {
                // ties keep the first arc seen, i.e. lowest edge id
                if c < dist[t][h] {
                    dist[t][h] = c;
                    last[t][h] = Some(a);
                }
            }
        }
        for k in 0..n {
            let dk = dist[k].clone();
            let lk = last[k].clone();
            for i in 0..n {
                let dik = dist[i][k];
                if dik == f64::INFINITY || i == k {
                    continue;
                }
                let (di, li) = (&mut dist[i], &mut last[i]);
                for j in 0..n {
                    let nd = dik + dk[j];
                    if nd < di[j] {
                        di[j] = nd;
                        li[j] = lk[j];
                    }
                }
            }
        }
        let rows = dist.into_iter().zip(last).map(|(dist, last)| Some(Row { dist, last })).collect();
        Self { graph, rows }
    }

    /// Runs Dijkstra for every source that has no row yet.
    pub fn add_sources(&mut self, sources: &[VertexId]) {
        for s in sources {
            if self.rows[s.0].is_none() {
                self.rows[s.0] = Some(self.graph.dijkstra(s.0));
            }
        }
    }

    pub fn has_source(&self, v: VertexId) -> bool {
        self.rows[v.0].is_some()
    }

    /// Shortest deadhead cost; `INFINITY` when unreachable.
    ///
    /// Panics if `from` was not requested as a source.
    pub fn cost(&self, from: VertexId, to: VertexId) -> f64 {
        self.row(from).dist[to.0]
    }

    pub fn path(&self, inst: &LineCoverageInstance, from: VertexId, to: VertexId) -> Result<PathResult> {
        let row = self.row(from);
        let cost = row.dist[to.0];
        if cost == f64::INFINITY {
            return Err(Error::Unreachable { from, to });
        }
        let mut arcs = Vec::new();
        let mut at = to;
        while at != from {
            let a = row.last[at.0].expect("predecessor on a reachable path");
            arcs.push(a);
            at = inst.tail(a);
        }
        arcs.reverse();
        Ok(PathResult { cost, arcs })
    }

    fn row(&self, from: VertexId) -> &Row {
        self.rows[from.0]
            .as_ref()
            .unwrap_or_else(|| panic!("no shortest-path row for source {from}"))
    }
}

/// Single-pair shortest deadhead path (Dijkstra).
pub fn shortest_deadhead_path(inst: &LineCoverageInstance, src: VertexId, dst: VertexId) -> Result<PathResult> {
    let mut sp = ShortestPaths { graph: DeadheadGraph::new(inst), rows: vec![None; inst.vertex_count()] };
    sp.add_sources(&[src]);
    sp.path(inst, src, dst)
}

/// All-pairs shortest deadhead paths (Floyd-Warshall).
pub fn all_pairs_deadhead(inst: &LineCoverageInstance) -> ShortestPaths {
    ShortestPaths::all_pairs(inst)
}
