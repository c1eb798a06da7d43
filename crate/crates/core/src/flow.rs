//! The flow relaxation: pick the cheaper service direction of every required
//! edge, then balance the resulting digraph with a minimum-cost flow whose
//! arcs either deadhead an edge or reverse a chosen service arc.
//!
//! The optimal flow value plus the chosen service costs is a lower bound on
//! any coverage tour. Reversal flow of 0 or 2 fixes a service direction; a
//! flow of 1 leaves the edge ambiguous.

use crate::error::{Error, Result};
use crate::graph::{is_infeasible, Arc, ArcMultiset, LineCoverageInstance, VertexId};
use crate::mcf::{solve_min_cost_flow, Capacity, FlowNetwork, FlowSolution};

/// Cheaper service arc of each required edge, in required-edge order.
#[derive(Clone, Debug, PartialEq)]
pub struct MinCostDigraph {
    pub chosen: Vec<Arc>,
}

impl MinCostDigraph {
    pub fn service_cost(&self, inst: &LineCoverageInstance) -> f64 {
        self.chosen.iter().map(|&a| inst.arc_cost(a)).sum()
    }

    pub fn arcs(&self) -> ArcMultiset {
        ArcMultiset::from(self.chosen.clone())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowArcRole {
    /// Deadheading `edge` in the given direction.
    Deadhead { edge: usize, forward: bool },
    /// Reversing the chosen service direction of `edge`; cost per unit is
    /// half the service cost difference, capacity 2.
    Reversal { edge: usize },
}

#[derive(Clone, Debug)]
pub struct LpSolveResult {
    /// Decided service arcs plus every deadhead arc the flow asks for.
    pub balanced: ArcMultiset,
    /// Chosen-direction arcs of edges whose reversal flow is 1.
    pub ambiguous: Vec<Arc>,
    pub lower_bound: f64,
    pub min_cost_digraph: MinCostDigraph,
    pub network: FlowNetwork<FlowArcRole>,
    pub flow: FlowSolution,
}

/// For each required edge select the direction with the smaller service
/// cost; ties go to the forward arc.
pub fn min_cost_digraph(inst: &LineCoverageInstance) -> MinCostDigraph {
    let chosen = inst
        .required_edge_ids()
        .iter()
        .map(|&id| {
            let e = inst.edge(id);
            Arc::service(id, e.service_cost(true) <= e.service_cost(false))
        })
        .collect();
    MinCostDigraph { chosen }
}

/// Flow network over the instance's vertices. Per required edge: deadhead
/// arcs along and against the chosen direction (unbounded) and a reversal
/// arc against it (capacity 2). Per non-required edge: two deadhead arcs.
/// Demand of each vertex is its imbalance in the min-cost digraph.
///
/// Deadhead arcs with an infeasible cost are left out.
pub fn construct_flow_digraph(inst: &LineCoverageInstance, mcd: &MinCostDigraph) -> FlowNetwork<FlowArcRole> {
    let mut net = FlowNetwork::new(inst.vertex_count());
    let add_deadhead = |net: &mut FlowNetwork<FlowArcRole>, edge: usize, forward: bool| {
        let e = inst.edge(edge);
        let c = e.deadhead_cost(forward);
        if !is_infeasible(c) {
            net.add_arc(
                e.tail(forward).0,
                e.head(forward).0,
                Capacity::Unbounded,
                c,
                FlowArcRole::Deadhead { edge, forward },
            );
        }
    };
    for &a in &mcd.chosen {
        add_deadhead(&mut net, a.edge, a.forward);
        add_deadhead(&mut net, a.edge, !a.forward);
        let e = inst.edge(a.edge);
        let reversal = (e.service_cost(!a.forward) - e.service_cost(a.forward)) / 2.0;
        assert!(reversal >= 0.0, "reversal cost must be nonnegative");
        net.add_arc(
            inst.head(a).0,
            inst.tail(a).0,
            Capacity::Finite(2),
            reversal,
            FlowArcRole::Reversal { edge: a.edge },
        );
    }
    for e in inst.edges().iter().filter(|e| !e.required()) {
        add_deadhead(&mut net, e.id, true);
        add_deadhead(&mut net, e.id, false);
    }
    net.demands = mcd.arcs().imbalances(inst);
    net
}

/// Solves the flow relaxation and decodes it into a balanced arc multiset,
/// the ambiguous arcs, and the lower bound.
pub fn lp_solve(inst: &LineCoverageInstance) -> Result<LpSolveResult> {
    let mcd = min_cost_digraph(inst);
    let network = construct_flow_digraph(inst, &mcd);
    let flow = solve_min_cost_flow(&network)?;
    let lower_bound = mcd.service_cost(inst) + flow.total_cost;
    if is_infeasible(lower_bound) {
        return Err(Error::Infeasible { cost: lower_bound });
    }

    let mut reversal = vec![0u64; inst.edges().len()];
    let mut deadhead = vec![[0u64; 2]; inst.edges().len()];
    for (arc, &f) in network.arcs.iter().zip(&flow.flow) {
        match arc.tag {
            FlowArcRole::Reversal { edge } => reversal[edge] = f,
            FlowArcRole::Deadhead { edge, forward } => deadhead[edge][forward as usize] += f,
        }
    }

    let mut balanced = ArcMultiset::new();
    let mut ambiguous = Vec::new();
    for &a in &mcd.chosen {
        match reversal[a.edge] {
            0 => balanced.push(a),
            2 => balanced.push(a.reversed()),
            1 => ambiguous.push(a),
            f => unreachable!("reversal flow {f} exceeds capacity 2"),
        }
    }
    for e in inst.edges() {
        for forward in [true, false] {
            balanced.push_copies(Arc::deadhead(e.id, forward), deadhead[e.id][forward as usize] as usize);
        }
    }

    Ok(LpSolveResult { balanced, ambiguous, lower_bound, min_cost_digraph: mcd, network, flow })
}

impl LpSolveResult {
    /// Imbalance left at each vertex once every ambiguous edge is oriented;
    /// used by tests to check parity. Ambiguous arcs count in their chosen
    /// direction.
    pub fn imbalance_with_ambiguous(&self, inst: &LineCoverageInstance, v: VertexId) -> i64 {
        let amb: i64 = self
            .ambiguous
            .iter()
            .map(|&a| (inst.tail(a) == v) as i64 - (inst.head(a) == v) as i64)
            .sum();
        self.balanced.imbalance(inst, v) + amb
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::tests::{nonreq, req};

    #[test]
    fn picks_cheaper_direction_forward_on_ties() {
        let inst = LineCoverageInstance::new(
            3,
            None,
            vec![req(0, 1, (3.0, 5.0), (1.0, 1.0)), req(1, 2, (4.0, 4.0), (1.0, 1.0)), req(2, 0, (6.0, 2.0), (1.0, 1.0))],
        )
        .unwrap();
        let mcd = min_cost_digraph(&inst);
        assert_eq!(mcd.chosen, vec![Arc::service(0, true), Arc::service(1, true), Arc::service(2, false)]);
    }

    #[test]
    fn network_shape() {
        let inst = LineCoverageInstance::new(
            2,
            None,
            vec![req(0, 1, (3.0, 5.0), (1.0, 2.0)), nonreq(1, 0, (1.0, 1.0))],
        )
        .unwrap();
        let mcd = min_cost_digraph(&inst);
        let net = construct_flow_digraph(&inst, &mcd);
        assert_eq!(net.arcs.len(), 5);
        let rev = net.arcs.iter().find(|a| matches!(a.tag, FlowArcRole::Reversal { .. })).unwrap();
        assert_eq!((rev.tail, rev.head, rev.capacity, rev.unit_cost), (1, 0, Capacity::Finite(2), 1.0));
        assert_eq!(net.demands, vec![1, -1]);
    }

    #[test]
    fn two_outgoing_chosen_arcs_give_demand_two() {
        let inst = LineCoverageInstance::new(
            3,
            None,
            vec![req(0, 1, (1.0, 2.0), (1.0, 1.0)), req(0, 2, (1.0, 2.0), (1.0, 1.0)), nonreq(1, 2, (1.0, 1.0))],
        )
        .unwrap();
        let net = construct_flow_digraph(&inst, &min_cost_digraph(&inst));
        assert_eq!(net.demands[0], 2);
    }

    #[test]
    fn consistent_cycle_needs_no_flow() {
        let inst = LineCoverageInstance::new(
            3,
            None,
            vec![req(0, 1, (2.0, 2.0), (1.0, 1.0)), req(1, 2, (2.0, 2.0), (1.0, 1.0)), req(2, 0, (2.0, 2.0), (1.0, 1.0))],
        )
        .unwrap();
        let lp = lp_solve(&inst).unwrap();
        assert!(lp.ambiguous.is_empty());
        assert_eq!(lp.balanced.len(), 3);
        assert!(lp.balanced.is_balanced(&inst));
        assert_eq!(lp.lower_bound, 6.0);
    }

    /// One required edge 0-1 plus a non-required edge. The single unit of
    /// flow from vertex 1 into vertex 0 can deadhead the required edge
    /// backwards, use the reversal arc, or deadhead the non-required edge.
    #[test]
    fn single_edge_unit_flow_choices() {
        // reversal (5 - 3) / 2 = 1 is cheapest against deadheads 4 and 3
        let inst = LineCoverageInstance::new(
            2,
            None,
            vec![req(0, 1, (3.0, 5.0), (1.0, 4.0)), nonreq(0, 1, (3.0, 3.0))],
        )
        .unwrap();
        let lp = lp_solve(&inst).unwrap();
        assert_eq!(lp.ambiguous, vec![Arc::service(0, true)]);
        assert_eq!(lp.lower_bound, 3.0 + 1.0);

        // non-required return at 0.5 beats reversal 1 and deadhead 4
        let inst = LineCoverageInstance::new(
            2,
            None,
            vec![req(0, 1, (3.0, 5.0), (1.0, 4.0)), nonreq(0, 1, (0.5, 0.5))],
        )
        .unwrap();
        let lp = lp_solve(&inst).unwrap();
        assert!(lp.ambiguous.is_empty());
        assert_eq!(lp.lower_bound, 3.5);
        assert_eq!(lp.balanced.as_slice(), &[Arc::service(0, true), Arc::deadhead(1, false)]);
    }
}
