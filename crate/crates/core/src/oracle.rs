//! Exact brute-force solver for small instances and a seeded instance
//! generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{build_instance, CostSpec, EdgeSpec, ExplicitCosts, WindModel};
use crate::error::{Error, Result};
use crate::graph::{Arc, CoverageTour, DirCosts, DisjointSets, LineCoverageInstance, VertexId};
use crate::paths::ShortestPaths;

/// Largest number of required edges [`brute_force_optimal`] accepts.
pub const ORACLE_CAP: usize = 8;

/// Optimal coverage tour by enumerating every cyclic order and direction of
/// the required edges, joining consecutive services by shortest deadhead
/// paths. The lowest-id required edge is fixed first; branches whose partial
/// cost already reaches the incumbent are cut.
pub fn brute_force_optimal(inst: &LineCoverageInstance) -> Result<(CoverageTour, f64)> {
    let req = inst.required_edge_ids();
    if req.len() > ORACLE_CAP {
        return Err(Error::TooLarge { size: req.len(), limit: ORACLE_CAP });
    }
    let ends: Vec<VertexId> = req.iter().flat_map(|&e| [inst.edge(e).u, inst.edge(e).v]).collect();
    let paths = ShortestPaths::with_sources(inst, &ends);

    let mut search = Search {
        inst,
        paths: &paths,
        req,
        used: vec![false; req.len()],
        seq: Vec::with_capacity(req.len()),
        best: f64::INFINITY,
        best_seq: Vec::new(),
    };
    search.used[0] = true;
    for forward in [true, false] {
        let a = Arc::service(req[0], forward);
        search.seq.push(a);
        search.extend(inst.arc_cost(a));
        search.seq.pop();
    }

    let seq = search.best_seq;
    let best = search.best;
    let mut steps = Vec::with_capacity(2 * seq.len());
    for k in 0..seq.len() {
        let (a, b) = (seq[k], seq[(k + 1) % seq.len()]);
        steps.push(a);
        steps.extend(paths.path(inst, inst.head(a), inst.tail(b))?.arcs);
    }
    let tour = CoverageTour::from_steps(inst, steps, None);
    if crate::graph::is_infeasible(best) {
        return Err(Error::Infeasible { cost: best });
    }
    Ok((tour, best))
}

struct Search<'a> {
    inst: &'a LineCoverageInstance,
    paths: &'a ShortestPaths,
    req: &'a [usize],
    used: Vec<bool>,
    seq: Vec<Arc>,
    best: f64,
    best_seq: Vec<Arc>,
}

impl Search<'_> {
    fn extend(&mut self, cost: f64) {
        if cost >= self.best {
            return;
        }
        let last = *self.seq.last().expect("sequence starts non-empty");
        if self.seq.len() == self.req.len() {
            let close = cost + self.paths.cost(self.inst.head(last), self.inst.tail(self.seq[0]));
            if close < self.best {
                self.best = close;
                self.best_seq = self.seq.clone();
            }
            return;
        }
        for k in 1..self.req.len() {
            if self.used[k] {
                continue;
            }
            self.used[k] = true;
            for forward in [true, false] {
                let a = Arc::service(self.req[k], forward);
                let step = self.paths.cost(self.inst.head(last), self.inst.tail(a)) + self.inst.arc_cost(a);
                self.seq.push(a);
                self.extend(cost + step);
                self.seq.pop();
            }
            self.used[k] = false;
        }
    }
}

/// Structure of the required subgraph produced by [`random_instance`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum Profile {
    /// Exactly `components` vertex-disjoint connected required pieces.
    General { components: usize },
    /// One connected required piece.
    ConnectedRequired,
    /// A connected union of cycles, so every required degree is even.
    EulerianRequired,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum GenCosts {
    Wind(WindModel),
    Euclidean,
    /// Integer costs: deadhead in `1..=max` per direction, service adds
    /// `0..=max/2` on top.
    RandomAsymmetric { max: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub vertices: usize,
    pub required: usize,
    /// Extra random non-required edges beyond those needed for connectivity.
    pub extra: usize,
    pub costs: GenCosts,
    pub profile: Profile,
    /// Adds a non-required edge between every vertex pair lacking an edge.
    pub complete_nonrequired: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            vertices: 8,
            required: 5,
            extra: 4,
            costs: GenCosts::Wind(WindModel::default()),
            profile: Profile::ConnectedRequired,
            complete_nonrequired: false,
        }
    }
}

/// Seeded random instance. Vertex coordinates are uniform in
/// `[0, 1000]^2`; non-required edges keep the deadhead graph connected.
pub fn random_instance(seed: u64, p: &GenParams) -> Result<LineCoverageInstance> {
    if p.required == 0 {
        return Err(Error::UnsatisfiableProfile("at least one required edge is needed".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.vertices;
    let coords: Vec<(f64, f64)> =
        (0..n).map(|_| (rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0))).collect();

    let mut required: Vec<(usize, usize)> = match p.profile {
        Profile::ConnectedRequired => {
            if n < 2 {
                return Err(Error::UnsatisfiableProfile("need at least 2 vertices".into()));
            }
            let mut pool: Vec<usize> = (0..n).collect();
            pool.shuffle(&mut rng);
            let k = (p.required + 1).min(n);
            random_connected(&mut rng, &pool[..k], p.required)
        }
        Profile::General { components } => general_pieces(&mut rng, n, p.required, components)?,
        Profile::EulerianRequired => cycle_union(&mut rng, n, p.required)?,
    };
    // orient each required edge at random
    for e in &mut required {
        if rng.gen_bool(0.5) {
            *e = (e.1, e.0);
        }
    }

    let mut dsu = DisjointSets::new(n);
    let mut present = vec![false; n * n];
    let mark = |present: &mut Vec<bool>, u: usize, v: usize| {
        present[u * n + v] = true;
        present[v * n + u] = true;
    };
    for &(u, v) in &required {
        dsu.union(u, v);
        mark(&mut present, u, v);
    }
    let mut nonreq: Vec<(usize, usize)> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    for k in 1..n {
        let v = order[k];
        let u = order[rng.gen_range(0..k)];
        if dsu.union(u, v) {
            nonreq.push((u, v));
            mark(&mut present, u, v);
        }
    }
    if n >= 2 {
        for _ in 0..p.extra {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            nonreq.push((u, v));
            mark(&mut present, u, v);
        }
    }
    if p.complete_nonrequired {
        for u in 0..n {
            for v in u + 1..n {
                if !present[u * n + v] {
                    nonreq.push((u, v));
                }
            }
        }
    }

    let topology: Vec<EdgeSpec> = required
        .iter()
        .map(|&(u, v)| EdgeSpec { u: VertexId(u), v: VertexId(v), required: true })
        .chain(nonreq.iter().map(|&(u, v)| EdgeSpec { u: VertexId(u), v: VertexId(v), required: false }))
        .collect();
    let spec = match p.costs {
        GenCosts::Wind(model) => CostSpec::Wind(model),
        GenCosts::Euclidean => CostSpec::EuclideanDistance,
        GenCosts::RandomAsymmetric { max } => {
            let max = max.max(1);
            CostSpec::Explicit(
                topology
                    .iter()
                    .map(|t| {
                        let d = DirCosts::new(rng.gen_range(1..=max) as f64, rng.gen_range(1..=max) as f64);
                        let extra = max / 2;
                        let s = DirCosts::new(
                            d.fwd + rng.gen_range(0..=extra) as f64,
                            d.rev + rng.gen_range(0..=extra) as f64,
                        );
                        ExplicitCosts { service: t.required.then_some(s), deadhead: d }
                    })
                    .collect(),
            )
        }
    };
    let inst = build_instance(n, Some(coords), &topology, &spec)?;
    check_profile(&inst, p.profile)?;
    Ok(inst)
}

fn check_profile(inst: &LineCoverageInstance, profile: Profile) -> Result<()> {
    let comps = inst.required_components().len();
    let ok = match profile {
        Profile::General { components } => comps == components,
        Profile::ConnectedRequired => comps == 1,
        Profile::EulerianRequired => {
            let mut degree = vec![0usize; inst.vertex_count()];
            for &e in inst.required_edge_ids() {
                degree[inst.edge(e).u.0] += 1;
                degree[inst.edge(e).v.0] += 1;
            }
            comps == 1 && degree.iter().all(|d| d % 2 == 0)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::UnsatisfiableProfile(format!("generated instance does not match {profile:?}")))
    }
}

/// `count` edges over `verts` forming one connected piece: a random
/// spanning tree plus random extra edges (parallel edges allowed).
fn random_connected(rng: &mut ChaCha8Rng, verts: &[usize], count: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(count);
    for k in 1..verts.len() {
        edges.push((verts[rng.gen_range(0..k)], verts[k]));
    }
    while edges.len() < count {
        let a = rng.gen_range(0..verts.len());
        let mut b = rng.gen_range(0..verts.len() - 1);
        if b >= a {
            b += 1;
        }
        edges.push((verts[a], verts[b]));
    }
    edges
}

fn general_pieces(rng: &mut ChaCha8Rng, n: usize, count: usize, pieces: usize) -> Result<Vec<(usize, usize)>> {
    if pieces == 0 || count < pieces || n < 2 * pieces {
        return Err(Error::UnsatisfiableProfile(format!(
            "{pieces} required pieces need at least {pieces} required edges and {} vertices",
            2 * pieces
        )));
    }
    // split the required edges: one each, the rest at random
    let mut sizes = vec![1usize; pieces];
    for _ in pieces..count {
        sizes[rng.gen_range(0..pieces)] += 1;
    }
    let mut pool: Vec<usize> = (0..n).collect();
    pool.shuffle(rng);
    let mut left = n;
    let mut at = 0;
    let mut edges = Vec::with_capacity(count);
    for (k, &size) in sizes.iter().enumerate() {
        let reserve = 2 * (pieces - k - 1);
        let verts = (size + 1).min(left - reserve).max(2);
        edges.extend(random_connected(rng, &pool[at..at + verts], size));
        at += verts;
        left -= verts;
    }
    Ok(edges)
}

fn cycle_union(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Result<Vec<(usize, usize)>> {
    if count < 2 || n < 2 || (n == 2 && count % 2 == 1) {
        return Err(Error::UnsatisfiableProfile(format!(
            "no connected even-degree multigraph with {count} edges on {n} vertices"
        )));
    }
    let mut edges = Vec::with_capacity(count);
    let mut touched: Vec<usize> = Vec::new();
    let mut left = count;
    while left > 0 {
        // cycle length in 2..=min(n, left), never leaving exactly 1 edge
        let hi = n.min(left);
        let mut len = rng.gen_range(2..=hi);
        if left - len == 1 {
            len = if len == hi { len - 1 } else { len + 1 };
        }
        let start = if touched.is_empty() { rng.gen_range(0..n) } else { touched[rng.gen_range(0..touched.len())] };
        let mut others: Vec<usize> = (0..n).filter(|&v| v != start).collect();
        others.shuffle(rng);
        let mut cycle = vec![start];
        cycle.extend_from_slice(&others[..len - 1]);
        for k in 0..len {
            edges.push((cycle[k], cycle[(k + 1) % len]));
        }
        for v in cycle {
            if !touched.contains(&v) {
                touched.push(v);
            }
        }
        left -= len;
    }
    Ok(edges)
}
