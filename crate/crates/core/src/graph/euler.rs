use super::{Arc, ArcMultiset, CoverageTour, LineCoverageInstance, VertexId};
use crate::error::{Error, Result};

/// Closed diwalk using every arc of a balanced, connected multiset exactly
/// once (Hierholzer). At each vertex the unused outgoing arc with the
/// smallest `(edge, direction, mode)` key is taken first.
pub fn euler_tour(inst: &LineCoverageInstance, arcs: &ArcMultiset, start: VertexId) -> Result<CoverageTour> {
    let n = inst.vertex_count();
    if start.0 >= n {
        return Err(Error::InvalidInstance(format!("start vertex {start} out of range")));
    }
    for (v, &d) in arcs.imbalances(inst).iter().enumerate() {
        if d != 0 {
            return Err(Error::NotBalanced { vertex: VertexId(v), imbalance: d });
        }
    }
    if arcs.is_empty() {
        return Ok(CoverageTour { steps: Vec::new(), total_cost: 0.0, lower_bound: None });
    }

    let mut out: Vec<Vec<Arc>> = vec![Vec::new(); n];
    for &a in arcs {
        out[inst.tail(a).0].push(a);
    }
    for list in &mut out {
        list.sort_by_key(Arc::order_key);
    }
    let mut next = vec![0usize; n];

    let mut circuit: Vec<Arc> = Vec::with_capacity(arcs.len());
    let mut stack: Vec<(VertexId, Option<Arc>)> = vec![(start, None)];
    while let Some(&(v, via)) = stack.last() {
        let i = next[v.0];
        if i < out[v.0].len() {
            next[v.0] += 1;
            let a = out[v.0][i];
            stack.push((inst.head(a), Some(a)));
        } else {
            stack.pop();
            if let Some(a) = via {
                circuit.push(a);
            }
        }
    }
    if circuit.len() != arcs.len() {
        return Err(Error::NotConnected);
    }
    circuit.reverse();
    Ok(CoverageTour::from_steps(inst, circuit, None))
}
