//! Multigraph and digraph primitives for line coverage.
//!
//! An instance is an undirected multigraph whose edges each expose two
//! directed arcs. Required edges must be serviced exactly once; every edge
//! may be deadheaded any number of times. Each direction carries its own
//! service and deadhead cost, so costs are asymmetric in general.

mod euler;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use euler::euler_tour;
pub use validate::{validate_tour, ValidationReport, Violation};

/// Cost that forbids traversal in a direction.
pub const INFEASIBLE: f64 = 1e15;

/// Any tour or bound at or above this value is treated as infeasible.
pub const INFEASIBLE_THRESHOLD: f64 = 1e14;

/// Relative tolerance for cost comparisons.
pub const EPS: f64 = 1e-9;

pub fn is_infeasible(cost: f64) -> bool {
    !(cost < INFEASIBLE_THRESHOLD)
}

/// `true` when `a` and `b` agree within [`EPS`] relative (absolute below 1).
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS * a.abs().max(b.abs()).max(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A pair of costs, one per direction of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirCosts {
    pub fwd: f64,
    pub rev: f64,
}

impl DirCosts {
    pub fn new(fwd: f64, rev: f64) -> Self {
        Self { fwd, rev }
    }

    pub fn symmetric(cost: f64) -> Self {
        Self { fwd: cost, rev: cost }
    }

    pub fn get(&self, forward: bool) -> f64 {
        if forward {
            self.fwd
        } else {
            self.rev
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub id: usize,
    /// Tail of the forward arc.
    pub u: VertexId,
    /// Head of the forward arc.
    pub v: VertexId,
    /// Present exactly when the edge is required.
    pub service: Option<DirCosts>,
    pub deadhead: DirCosts,
}

impl Edge {
    pub fn required(&self) -> bool {
        self.service.is_some()
    }

    pub fn is_loop(&self) -> bool {
        self.u == self.v
    }

    pub fn tail(&self, forward: bool) -> VertexId {
        if forward {
            self.u
        } else {
            self.v
        }
    }

    pub fn head(&self, forward: bool) -> VertexId {
        if forward {
            self.v
        } else {
            self.u
        }
    }

    /// Service cost in a direction; [`INFEASIBLE`] on non-required edges.
    pub fn service_cost(&self, forward: bool) -> f64 {
        self.service.map_or(INFEASIBLE, |c| c.get(forward))
    }

    pub fn deadhead_cost(&self, forward: bool) -> f64 {
        self.deadhead.get(forward)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Service,
    Deadhead,
}

/// One directed traversal of an edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub edge: usize,
    /// Direction relative to `Edge::u -> Edge::v`.
    pub forward: bool,
    pub mode: Mode,
}

impl Arc {
    pub fn service(edge: usize, forward: bool) -> Self {
        Self { edge, forward, mode: Mode::Service }
    }

    pub fn deadhead(edge: usize, forward: bool) -> Self {
        Self { edge, forward, mode: Mode::Deadhead }
    }

    pub fn reversed(self) -> Self {
        Self { forward: !self.forward, ..self }
    }

    pub fn is_service(&self) -> bool {
        self.mode == Mode::Service
    }

    /// Sort key used wherever arcs need a deterministic order.
    pub(crate) fn order_key(&self) -> (usize, bool, Mode) {
        // forward arcs first
        (self.edge, !self.forward, self.mode)
    }
}

/// The problem input: an undirected multigraph with required flags and four
/// directional costs per edge. Construction validates every structural
/// invariant, so a value of this type is always a solvable instance.
#[derive(Clone, Debug, PartialEq)]
pub struct LineCoverageInstance {
    vertex_count: usize,
    coordinates: Option<Vec<(f64, f64)>>,
    edges: Vec<Edge>,
    required: Vec<usize>,
}

impl LineCoverageInstance {
    /// Builds and validates an instance. Edge ids are reassigned to their
    /// position in `edges`.
    pub fn new(
        vertex_count: usize,
        coordinates: Option<Vec<(f64, f64)>>,
        mut edges: Vec<Edge>,
    ) -> Result<Self> {
        if let Some(coords) = &coordinates {
            if coords.len() != vertex_count {
                return Err(Error::InvalidInstance(format!(
                    "{} coordinates for {} vertices",
                    coords.len(),
                    vertex_count
                )));
            }
            if coords.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(Error::InvalidInstance("non-finite coordinate".into()));
            }
        }
        for (i, e) in edges.iter_mut().enumerate() {
            e.id = i;
            if e.u.0 >= vertex_count || e.v.0 >= vertex_count {
                return Err(Error::InvalidInstance(format!(
                    "edge {i} references a vertex outside 0..{vertex_count}"
                )));
            }
            check_edge_costs(e)?;
        }
        let required: Vec<usize> = edges.iter().filter(|e| e.required()).map(|e| e.id).collect();
        if required.is_empty() {
            return Err(Error::NoRequiredEdges);
        }
        let inst = Self { vertex_count, coordinates, edges, required };
        inst.check_strongly_connected()?;
        Ok(inst)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn coordinates(&self) -> Option<&[(f64, f64)]> {
        self.coordinates.as_deref()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// Ids of the required edges, ascending.
    pub fn required_edge_ids(&self) -> &[usize] {
        &self.required
    }

    pub fn tail(&self, arc: Arc) -> VertexId {
        self.edges[arc.edge].tail(arc.forward)
    }

    pub fn head(&self, arc: Arc) -> VertexId {
        self.edges[arc.edge].head(arc.forward)
    }

    pub fn arc_cost(&self, arc: Arc) -> f64 {
        let e = &self.edges[arc.edge];
        match arc.mode {
            Mode::Service => e.service_cost(arc.forward),
            Mode::Deadhead => e.deadhead_cost(arc.forward),
        }
    }

    /// Connected components of the required graph, each as a sorted vertex
    /// list. Components are ordered by their smallest vertex.
    pub fn required_components(&self) -> Vec<Vec<VertexId>> {
        let mut dsu = DisjointSets::new(self.vertex_count);
        let mut touched = vec![false; self.vertex_count];
        for &id in &self.required {
            let e = &self.edges[id];
            touched[e.u.0] = true;
            touched[e.v.0] = true;
            dsu.union(e.u.0, e.v.0);
        }
        dsu.groups(|v| touched[v])
    }

    /// Vertices incident to at least one required edge, ascending.
    pub fn required_vertices(&self) -> Vec<VertexId> {
        let mut touched = vec![false; self.vertex_count];
        for &id in &self.required {
            let e = &self.edges[id];
            touched[e.u.0] = true;
            touched[e.v.0] = true;
        }
        (0..self.vertex_count).filter(|&v| touched[v]).map(VertexId).collect()
    }

    /// Forward-search and reverse-search from vertex 0 over finite deadhead
    /// arcs; both must reach every vertex.
    fn check_strongly_connected(&self) -> Result<()> {
        let n = self.vertex_count;
        if n == 0 {
            return Err(Error::InvalidInstance("no vertices".into()));
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for e in &self.edges {
            for forward in [true, false] {
                if !is_infeasible(e.deadhead_cost(forward)) {
                    let (t, h) = (e.tail(forward).0, e.head(forward).0);
                    out_adj[t].push(h);
                    in_adj[h].push(t);
                }
            }
        }
        let reach = |adj: &[Vec<usize>]| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
            seen
        };
        if let Some(v) = reach(&out_adj).iter().position(|s| !s) {
            return Err(Error::DisconnectedInstance { from: VertexId(0), to: VertexId(v) });
        }
        if let Some(v) = reach(&in_adj).iter().position(|s| !s) {
            return Err(Error::DisconnectedInstance { from: VertexId(v), to: VertexId(0) });
        }
        Ok(())
    }
}

fn check_edge_costs(e: &Edge) -> Result<()> {
    let bad = |detail: String| Error::CostInvariantViolated { edge: e.id, detail };
    let mut all = vec![e.deadhead.fwd, e.deadhead.rev];
    if let Some(s) = e.service {
        all.extend([s.fwd, s.rev]);
    }
    if all.iter().any(|c| c.is_nan() || *c < 0.0) {
        return Err(bad("costs must be nonnegative numbers".into()));
    }
    if let Some(s) = e.service {
        for (forward, dir) in [(true, "forward"), (false, "reverse")] {
            let (sc, dc) = (s.get(forward), e.deadhead.get(forward));
            if sc < dc {
                return Err(bad(format!(
                    "{dir} service cost {sc} is below deadhead cost {dc}"
                )));
            }
        }
    }
    Ok(())
}

/// A multiset of directed arcs over an instance's vertices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArcMultiset {
    arcs: Vec<Arc>,
}

impl ArcMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, arc: Arc) {
        self.arcs.push(arc);
    }

    pub fn push_copies(&mut self, arc: Arc, copies: usize) {
        self.arcs.extend(std::iter::repeat_n(arc, copies));
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Arc> {
        self.arcs.iter()
    }

    pub fn as_slice(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Out-degree minus in-degree of `v`.
    pub fn imbalance(&self, inst: &LineCoverageInstance, v: VertexId) -> i64 {
        self.arcs
            .iter()
            .map(|&a| (inst.tail(a) == v) as i64 - (inst.head(a) == v) as i64)
            .sum()
    }

    /// Imbalance of every vertex at once.
    pub fn imbalances(&self, inst: &LineCoverageInstance) -> Vec<i64> {
        let mut imb = vec![0i64; inst.vertex_count()];
        for &a in &self.arcs {
            imb[inst.tail(a).0] += 1;
            imb[inst.head(a).0] -= 1;
        }
        imb
    }

    pub fn is_balanced(&self, inst: &LineCoverageInstance) -> bool {
        self.imbalances(inst).iter().all(|&d| d == 0)
    }

    /// Sum of service costs of service arcs plus deadhead costs of deadhead arcs.
    pub fn cost(&self, inst: &LineCoverageInstance) -> f64 {
        self.arcs.iter().map(|&a| inst.arc_cost(a)).sum()
    }

    pub fn service_count(&self, edge: usize) -> usize {
        self.arcs.iter().filter(|a| a.edge == edge && a.is_service()).count()
    }

    /// Weakly connected components over vertices with at least one incident
    /// arc. Each component lists the indices of its arcs; components are
    /// ordered by their smallest vertex.
    pub fn weak_components(&self, inst: &LineCoverageInstance) -> Vec<Vec<usize>> {
        let mut dsu = DisjointSets::new(inst.vertex_count());
        for &a in &self.arcs {
            dsu.union(inst.tail(a).0, inst.head(a).0);
        }
        let mut root_min: Vec<Option<usize>> = vec![None; inst.vertex_count()];
        for &a in &self.arcs {
            for v in [inst.tail(a).0, inst.head(a).0] {
                let r = dsu.find(v);
                root_min[r] = Some(root_min[r].map_or(v, |m| m.min(v)));
            }
        }
        let mut roots: Vec<(usize, usize)> = root_min
            .iter()
            .enumerate()
            .filter_map(|(r, m)| m.map(|m| (m, r)))
            .collect();
        roots.sort_unstable();
        let mut slot = vec![usize::MAX; inst.vertex_count()];
        for (i, &(_, r)) in roots.iter().enumerate() {
            slot[r] = i;
        }
        let mut comps = vec![Vec::new(); roots.len()];
        for (i, &a) in self.arcs.iter().enumerate() {
            comps[slot[dsu.find(inst.tail(a).0)]].push(i);
        }
        comps
    }
}

impl From<Vec<Arc>> for ArcMultiset {
    fn from(arcs: Vec<Arc>) -> Self {
        Self { arcs }
    }
}

impl FromIterator<Arc> for ArcMultiset {
    fn from_iter<I: IntoIterator<Item = Arc>>(iter: I) -> Self {
        Self { arcs: iter.into_iter().collect() }
    }
}

impl Extend<Arc> for ArcMultiset {
    fn extend<I: IntoIterator<Item = Arc>>(&mut self, iter: I) {
        self.arcs.extend(iter);
    }
}

impl<'a> IntoIterator for &'a ArcMultiset {
    type Item = &'a Arc;
    type IntoIter = std::slice::Iter<'a, Arc>;

    fn into_iter(self) -> Self::IntoIter {
        self.arcs.iter()
    }
}

/// A closed walk. The walk starts at the tail of the first step.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageTour {
    pub steps: Vec<Arc>,
    pub total_cost: f64,
    pub lower_bound: Option<f64>,
}

impl CoverageTour {
    /// Builds a tour from steps, computing its cost.
    pub fn from_steps(inst: &LineCoverageInstance, steps: Vec<Arc>, lower_bound: Option<f64>) -> Self {
        let total_cost = steps.iter().map(|&a| inst.arc_cost(a)).sum();
        Self { steps, total_cost, lower_bound }
    }

    pub fn start(&self, inst: &LineCoverageInstance) -> Option<VertexId> {
        self.steps.first().map(|&a| inst.tail(a))
    }

    pub fn arcs(&self) -> ArcMultiset {
        ArcMultiset::from(self.steps.clone())
    }

    pub fn service_steps(&self) -> impl Iterator<Item = &Arc> {
        self.steps.iter().filter(|a| a.is_service())
    }
}

#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), rank: vec![0; n] }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    /// Vertex groups restricted to `keep`, sorted, ordered by smallest member.
    pub(crate) fn groups(&mut self, keep: impl Fn(usize) -> bool) -> Vec<Vec<VertexId>> {
        let n = self.parent.len();
        let mut slot = vec![usize::MAX; n];
        let mut out: Vec<Vec<VertexId>> = Vec::new();
        for v in 0..n {
            if !keep(v) {
                continue;
            }
            let r = self.find(v);
            if slot[r] == usize::MAX {
                slot[r] = out.len();
                out.push(Vec::new());
            }
            out[slot[r]].push(VertexId(v));
        }
        out
    }
}
