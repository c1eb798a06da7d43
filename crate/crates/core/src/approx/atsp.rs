//! Asymmetric TSP on small complete digraphs: exact Held-Karp dynamic
//! programming and a local-search heuristic for larger sizes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::VertexId;

/// Largest instance Held-Karp accepts.
pub const DP_LIMIT: usize = 20;

/// Nearest-neighbour starts tried by the heuristic before sampling kicks in.
const MAX_STARTS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct AtspInstance {
    size: usize,
    /// Row-major `size * size`, zero diagonal.
    cost: Vec<f64>,
    /// City index -> graph vertex.
    pub vertex_map: Vec<VertexId>,
}

impl AtspInstance {
    pub fn new(cost: Vec<Vec<f64>>, vertex_map: Vec<VertexId>) -> Self {
        let size = cost.len();
        assert!(cost.iter().all(|r| r.len() == size), "cost matrix must be square");
        assert_eq!(vertex_map.len(), size);
        let mut flat: Vec<f64> = cost.into_iter().flatten().collect();
        for i in 0..size {
            flat[i * size + i] = 0.0;
        }
        Self { size, cost: flat, vertex_map }
    }

    pub fn from_fn(size: usize, vertex_map: Vec<VertexId>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert_eq!(vertex_map.len(), size);
        let mut cost = vec![0.0; size * size];
        for i in 0..size {
            for j in 0..size {
                if i != j {
                    cost[i * size + j] = f(i, j);
                }
            }
        }
        Self { size, cost, vertex_map }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.size + j]
    }

    pub fn tour_cost(&self, order: &[usize]) -> f64 {
        (0..order.len()).map(|k| self.cost(order[k], order[(k + 1) % order.len()])).sum()
    }
}

/// Exact ATSP by Held-Karp, O(n^2 2^n). The tour starts at city 0. Among
/// equal-cost predecessors the smallest index wins.
pub fn held_karp_atsp(m: &AtspInstance, limit: usize) -> Result<(Vec<usize>, f64)> {
    let n = m.size();
    if n < 3 {
        return Err(Error::AtspTooSmall { size: n });
    }
    if n > limit.min(DP_LIMIT) {
        return Err(Error::TooLarge { size: n, limit: limit.min(DP_LIMIT) });
    }
    // subsets of cities 1..n, bit k-1 for city k
    let k = n - 1;
    let full = (1usize << k) - 1;
    let mut dp = vec![f64::INFINITY; (full + 1) * k];
    let mut pred = vec![u8::MAX; (full + 1) * k];
    for j in 0..k {
        dp[(1 << j) * k + j] = m.cost(0, j + 1);
        pred[(1 << j) * k + j] = 0;
    }
    for mask in 1..=full {
        for j in 0..k {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask * k + j];
            if cur == f64::INFINITY {
                continue;
            }
            let mut rest = full & !mask;
            while rest != 0 {
                let t = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                let next = mask | (1 << t);
                let cand = cur + m.cost(j + 1, t + 1);
                let slot = next * k + t;
                // each (next, t) is reached from one mask with j ascending,
                // so strict '<' keeps the smallest predecessor
                if cand < dp[slot] {
                    dp[slot] = cand;
                    pred[slot] = (j + 1) as u8;
                }
            }
        }
    }
    let mut best = f64::INFINITY;
    let mut last = 0;
    for j in 0..k {
        let c = dp[full * k + j] + m.cost(j + 1, 0);
        if c < best {
            best = c;
            last = j + 1;
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut mask = full;
    let mut at = last;
    while at != 0 {
        order.push(at);
        let p = pred[mask * k + at - 1] as usize;
        mask &= !(1 << (at - 1));
        at = p;
    }
    order.push(0);
    order.reverse();
    Ok((order, best))
}

/// Nearest-neighbour construction from the best of up to 256 starts,
/// followed by 2-opt and or-opt moves (first improvement) until no move
/// helps. The returned tour starts at city 0.
pub fn heuristic_atsp(m: &AtspInstance, seed: u64) -> Result<(Vec<usize>, f64)> {
    let n = m.size();
    if n < 3 {
        return Err(Error::AtspTooSmall { size: n });
    }
    let mut starts: Vec<usize> = (0..n).collect();
    if n > MAX_STARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        starts.shuffle(&mut rng);
        starts.truncate(MAX_STARTS);
        starts.sort_unstable();
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for &s in &starts {
        let tour = nearest_neighbour(m, s);
        let c = m.tour_cost(&tour);
        if best.as_ref().is_none_or(|(_, bc)| c < *bc) {
            best = Some((tour, c));
        }
    }
    let (mut tour, _) = best.expect("at least one start");
    local_search(m, &mut tour);
    let zero = tour.iter().position(|&c| c == 0).unwrap();
    tour.rotate_left(zero);
    let cost = m.tour_cost(&tour);
    Ok((tour, cost))
}

fn nearest_neighbour(m: &AtspInstance, start: usize) -> Vec<usize> {
    let n = m.size();
    let mut used = vec![false; n];
    let mut tour = Vec::with_capacity(n);
    let mut at = start;
    used[at] = true;
    tour.push(at);
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut best = f64::INFINITY;
        for j in 0..n {
            if !used[j] && (next == usize::MAX || m.cost(at, j) < best) {
                best = m.cost(at, j);
                next = j;
            }
        }
        used[next] = true;
        tour.push(next);
        at = next;
    }
    tour
}

fn improves(delta: f64, scale: f64) -> bool {
    delta < -1e-12 * scale.max(1.0)
}

fn local_search(m: &AtspInstance, tour: &mut Vec<usize>) {
    loop {
        let scale = m.tour_cost(tour);
        if two_opt_pass(m, tour, scale) {
            continue;
        }
        if or_opt_pass(m, tour, scale) {
            continue;
        }
        break;
    }
}

/// Reverses `tour[i..=j]`. Under asymmetric costs the inner arcs flip, so
/// prefix sums of forward and backward arc costs price a move in O(1).
fn two_opt_pass(m: &AtspInstance, tour: &mut [usize], scale: f64) -> bool {
    let n = tour.len();
    let mut fwd = vec![0.0; n];
    let mut bwd = vec![0.0; n];
    for k in 1..n {
        fwd[k] = fwd[k - 1] + m.cost(tour[k - 1], tour[k]);
        bwd[k] = bwd[k - 1] + m.cost(tour[k], tour[k - 1]);
    }
    for i in 1..n - 1 {
        for j in i + 1..n {
            let (a, b, c) = (tour[i - 1], tour[i], tour[j]);
            let d = tour[(j + 1) % n];
            let old = m.cost(a, b) + (fwd[j] - fwd[i]) + m.cost(c, d);
            let new = m.cost(a, c) + (bwd[j] - bwd[i]) + m.cost(b, d);
            if improves(new - old, scale) {
                tour[i..=j].reverse();
                return true;
            }
        }
    }
    false
}

/// Moves a segment of 1 to 3 cities to another position without reversing it.
fn or_opt_pass(m: &AtspInstance, tour: &mut Vec<usize>, scale: f64) -> bool {
    let n = tour.len();
    for len in 1..=3.min(n - 2) {
        for i in 0..n {
            // segment tour[i..i+len] (cyclic)
            let seg: Vec<usize> = (0..len).map(|k| tour[(i + k) % n]).collect();
            let prev = tour[(i + n - 1) % n];
            let next = tour[(i + len) % n];
            let removed = m.cost(prev, seg[0]) + m.cost(seg[len - 1], next) - m.cost(prev, next);
            for g in 0..n {
                // insert between tour[g] and tour[g+1], both outside the segment
                let x = tour[g];
                let y = tour[(g + 1) % n];
                let offset = (g + n - i) % n;
                if offset < len || offset == n - 1 {
                    continue;
                }
                let added = m.cost(x, seg[0]) + m.cost(seg[len - 1], y) - m.cost(x, y);
                if improves(added - removed, scale) {
                    let mut rest: Vec<usize> = (0..n - len).map(|k| tour[(i + len + k) % n]).collect();
                    let at = rest.iter().position(|&c| c == x).unwrap() + 1;
                    rest.splice(at..at, seg);
                    *tour = rest;
                    return true;
                }
            }
        }
    }
    false
}
