use std::fmt;

use super::{approx_eq, is_infeasible, ArcMultiset, CoverageTour, LineCoverageInstance, Mode, VertexId};

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    EmptyTour,
    UnknownEdge { step: usize, edge: usize },
    ServiceOnNonRequired { step: usize, edge: usize },
    /// Head of `step` is not the tail of the following step.
    Discontinuity { step: usize, head: VertexId, next_tail: VertexId },
    ServiceCount { edge: usize, count: usize },
    Unbalanced { vertex: VertexId, imbalance: i64 },
    CostMismatch { recorded: f64, recomputed: f64 },
    InfeasibleStep { step: usize, cost: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyTour => write!(f, "tour has no steps"),
            Violation::UnknownEdge { step, edge } => write!(f, "step {step}: edge {edge} does not exist"),
            Violation::ServiceOnNonRequired { step, edge } => {
                write!(f, "step {step}: services non-required edge {edge}")
            }
            Violation::Discontinuity { step, head, next_tail } => {
                write!(f, "step {step}: ends at {head} but the next step starts at {next_tail}")
            }
            Violation::ServiceCount { edge, count } => {
                write!(f, "required edge {edge} serviced {count} times")
            }
            Violation::Unbalanced { vertex, imbalance } => {
                write!(f, "vertex {vertex} has imbalance {imbalance}")
            }
            Violation::CostMismatch { recorded, recomputed } => {
                write!(f, "recorded cost {recorded} differs from recomputed cost {recomputed}")
            }
            Violation::InfeasibleStep { step, cost } => {
                write!(f, "step {step}: uses a forbidden direction (cost {cost:e})")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Cost recomputed from the steps (only meaningful when every edge exists).
    pub recomputed_cost: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid (cost {})", self.recomputed_cost);
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks a tour against the feasibility semantics of a coverage tour:
/// closed walk over existing edges, every required edge serviced exactly
/// once, balanced induced digraph, consistent cost, no forbidden direction.
pub fn validate_tour(inst: &LineCoverageInstance, tour: &CoverageTour) -> ValidationReport {
    let mut violations = Vec::new();
    let steps = &tour.steps;
    if steps.is_empty() {
        violations.push(Violation::EmptyTour);
    }

    let edge_count = inst.edges().len();
    let mut known = true;
    for (i, a) in steps.iter().enumerate() {
        if a.edge >= edge_count {
            violations.push(Violation::UnknownEdge { step: i, edge: a.edge });
            known = false;
        } else if a.mode == Mode::Service && !inst.edge(a.edge).required() {
            violations.push(Violation::ServiceOnNonRequired { step: i, edge: a.edge });
        }
    }
    if !known {
        return ValidationReport { violations, recomputed_cost: f64::NAN };
    }

    for i in 0..steps.len() {
        let next = steps[(i + 1) % steps.len()];
        let (head, next_tail) = (inst.head(steps[i]), inst.tail(next));
        if head != next_tail {
            violations.push(Violation::Discontinuity { step: i, head, next_tail });
        }
    }

    let mut serviced = vec![0usize; edge_count];
    for a in steps.iter().filter(|a| a.is_service()) {
        serviced[a.edge] += 1;
    }
    for &e in inst.required_edge_ids() {
        if serviced[e] != 1 {
            violations.push(Violation::ServiceCount { edge: e, count: serviced[e] });
        }
    }

    let multiset = ArcMultiset::from(steps.clone());
    for (v, &d) in multiset.imbalances(inst).iter().enumerate() {
        if d != 0 {
            violations.push(Violation::Unbalanced { vertex: VertexId(v), imbalance: d });
        }
    }

    let mut recomputed = 0.0;
    for (i, &a) in steps.iter().enumerate() {
        let c = inst.arc_cost(a);
        if is_infeasible(c) {
            violations.push(Violation::InfeasibleStep { step: i, cost: c });
        }
        recomputed += c;
    }
    if !approx_eq(recomputed, tour.total_cost) {
        violations.push(Violation::CostMismatch { recorded: tour.total_cost, recomputed });
    }

    ValidationReport { violations, recomputed_cost: recomputed }
}
