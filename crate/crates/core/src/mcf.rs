//! Integral minimum-cost flow with node demands.
//!
//! Demand convention: `demand[v]` is the required net *inflow* at `v`
//! (inflow minus outflow). Positive demand absorbs flow, negative demand
//! supplies it.
//!
//! The solver runs successive shortest augmenting paths from a super source
//! to a super sink, with Dijkstra on reduced costs. Every unit cost must be
//! nonnegative, so the initial potentials are zero.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::paths::HeapItem;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Capacity {
    Finite(u64),
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowArc<T> {
    pub tail: usize,
    pub head: usize,
    pub capacity: Capacity,
    pub unit_cost: f64,
    pub tag: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowNetwork<T> {
    pub node_count: usize,
    pub demands: Vec<i64>,
    pub arcs: Vec<FlowArc<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSolution {
    /// Flow per arc, in network arc order.
    pub flow: Vec<u64>,
    pub total_cost: f64,
}

impl<T> FlowNetwork<T> {
    pub fn new(node_count: usize) -> Self {
        Self { node_count, demands: vec![0; node_count], arcs: Vec::new() }
    }

    pub fn add_arc(&mut self, tail: usize, head: usize, capacity: Capacity, unit_cost: f64, tag: T) -> usize {
        self.arcs.push(FlowArc { tail, head, capacity, unit_cost, tag });
        self.arcs.len() - 1
    }

    /// Total positive demand, which bounds the useful flow on any arc.
    pub fn total_supply(&self) -> u64 {
        self.demands.iter().filter(|&&d| d > 0).map(|&d| d as u64).sum()
    }

    pub fn check(&self) -> Result<()> {
        if self.demands.len() != self.node_count {
            return Err(Error::InvalidNetwork("demand vector length differs from node count".into()));
        }
        if self.demands.iter().sum::<i64>() != 0 {
            return Err(Error::InvalidNetwork("demands do not sum to zero".into()));
        }
        for (i, a) in self.arcs.iter().enumerate() {
            if a.tail >= self.node_count || a.head >= self.node_count {
                return Err(Error::InvalidNetwork(format!("arc {i} has an endpoint out of range")));
            }
            if !(a.unit_cost >= 0.0) || !a.unit_cost.is_finite() {
                return Err(Error::InvalidNetwork(format!("arc {i} has cost {}", a.unit_cost)));
            }
        }
        Ok(())
    }

    fn effective_capacity(&self, cap: Capacity) -> u64 {
        match cap {
            Capacity::Finite(c) => c,
            Capacity::Unbounded => self.demands.iter().map(|d| d.unsigned_abs()).sum(),
        }
    }

    pub fn flow_cost(&self, flow: &[u64]) -> f64 {
        self.arcs.iter().zip(flow).map(|(a, &f)| a.unit_cost * f as f64).sum()
    }
}

struct Residual {
    head: Vec<usize>,
    cap: Vec<i64>,
    cost: Vec<f64>,
    /// Outgoing residual edge ids per node; edge `e ^ 1` is the reverse of `e`.
    adj: Vec<Vec<usize>>,
}

impl Residual {
    fn with_nodes(n: usize) -> Self {
        Self { head: Vec::new(), cap: Vec::new(), cost: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn link(&mut self, u: usize, v: usize, cap: i64, cost: f64) -> usize {
        let e = self.head.len();
        self.head.extend([v, u]);
        self.cap.extend([cap, 0]);
        self.cost.extend([cost, -cost]);
        self.adj[u].push(e);
        self.adj[v].push(e + 1);
        e
    }
}

/// Minimum-cost integral flow meeting every demand.
pub fn solve_min_cost_flow<T>(net: &FlowNetwork<T>) -> Result<FlowSolution> {
    net.check()?;
    let n = net.node_count;
    let (source, sink) = (n, n + 1);
    let mut res = Residual::with_nodes(n + 2);
    let arc_edges: Vec<usize> = net
        .arcs
        .iter()
        .map(|a| {
            let cap = net.effective_capacity(a.capacity).min(i64::MAX as u64) as i64;
            res.link(a.tail, a.head, cap, a.unit_cost)
        })
        .collect();
    let mut required = 0i64;
    for (v, &d) in net.demands.iter().enumerate() {
        if d < 0 {
            res.link(source, v, -d, 0.0);
        } else if d > 0 {
            res.link(v, sink, d, 0.0);
            required += d;
        }
    }

    let nodes = n + 2;
    let mut potential = vec![0.0f64; nodes];
    let mut dist = vec![f64::INFINITY; nodes];
    let mut parent = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];
    let mut sent = 0i64;
    while sent < required {
        dist.fill(f64::INFINITY);
        parent.fill(usize::MAX);
        done.fill(false);
        dist[source] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem { cost: 0.0, vertex: source });
        while let Some(HeapItem { cost, vertex: u }) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == sink {
                break;
            }
            for &e in &res.adj[u] {
                if res.cap[e] <= 0 {
                    continue;
                }
                let v = res.head[e];
                if done[v] {
                    continue;
                }
                // rounding can leave reduced costs a hair below zero
                let reduced = (res.cost[e] + potential[u] - potential[v]).max(0.0);
                let nd = cost + reduced;
                if nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = e;
                    heap.push(HeapItem { cost: nd, vertex: v });
                }
            }
        }
        if !done[sink] {
            return Err(Error::InfeasibleFlow);
        }
        let reach = dist[sink];
        for v in 0..nodes {
            potential[v] += if done[v] { dist[v] } else { reach };
        }

        let mut push = required - sent;
        let mut v = sink;
        while v != source {
            let e = parent[v];
            push = push.min(res.cap[e]);
            v = res.head[e ^ 1];
        }
        let mut v = sink;
        while v != source {
            let e = parent[v];
            res.cap[e] -= push;
            res.cap[e ^ 1] += push;
            v = res.head[e ^ 1];
        }
        sent += push;
    }

    let flow: Vec<u64> = arc_edges.iter().map(|&e| res.cap[e ^ 1] as u64).collect();
    let total_cost = net.flow_cost(&flow);
    Ok(FlowSolution { flow, total_cost })
}

/// Independent check of a flow: nonnegativity, capacities, conservation,
/// recorded cost, and optimality (no negative-cost cycle in the residual
/// graph, via Bellman-Ford).
pub fn verify_flow<T>(net: &FlowNetwork<T>, sol: &FlowSolution) -> bool {
    if net.check().is_err() || sol.flow.len() != net.arcs.len() {
        return false;
    }
    let n = net.node_count;
    let mut net_in = vec![0i128; n];
    for (a, &f) in net.arcs.iter().zip(&sol.flow) {
        if let Capacity::Finite(c) = a.capacity {
            if f > c {
                return false;
            }
        }
        net_in[a.head] += f as i128;
        net_in[a.tail] -= f as i128;
    }
    if net_in.iter().zip(&net.demands).any(|(&got, &want)| got != want as i128) {
        return false;
    }
    let cost = net.flow_cost(&sol.flow);
    let scale = cost.abs().max(1.0);
    if (cost - sol.total_cost).abs() > 1e-9 * scale {
        return false;
    }

    let mut residual: Vec<(usize, usize, f64)> = Vec::new();
    for (a, &f) in net.arcs.iter().zip(&sol.flow) {
        let has_room = match a.capacity {
            Capacity::Finite(c) => f < c,
            Capacity::Unbounded => true,
        };
        if has_room {
            residual.push((a.tail, a.head, a.unit_cost));
        }
        if f > 0 {
            residual.push((a.head, a.tail, -a.unit_cost));
        }
    }
    let tol = 1e-9 * scale;
    let mut dist = vec![0.0f64; n];
    for round in 0..=n {
        let mut changed = false;
        for &(u, v, c) in &residual {
            if dist[u] + c < dist[v] - tol {
                dist[v] = dist[u] + c;
                changed = true;
            }
        }
        if !changed {
            return true;
        }
        if round == n {
            return false;
        }
    }
    true
}
