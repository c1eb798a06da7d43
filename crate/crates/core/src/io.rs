//! JSON instance and tour files, and GeoJSON export.
//!
//! Tour files refer to vertices by their position in the instance file's
//! `vertices` array and to edges by their position in the normalized edge
//! list (file edges first, then synthesized non-required edges).

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::approx::{SolveReport, SolverConfig};
use crate::cost::{build_instance, CostSpec, EdgeSpec, ExplicitCosts, WindModel};
use crate::error::{Error, Result};
use crate::graph::{Arc, CoverageTour, DirCosts, LineCoverageInstance, Mode, VertexId, EPS};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    #[serde(default)]
    pub cost_model: CostModelRecord,
    #[serde(default)]
    pub complete_nonrequired: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub u: u64,
    pub v: u64,
    pub required: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub costs: Option<CostRecord>,
}

/// Service (`sf`, `sr`) and deadhead (`df`, `dr`) costs, forward meaning
/// from `u` to `v`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sr: Option<f64>,
    pub df: f64,
    pub dr: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CostModelRecord {
    #[default]
    Explicit,
    Wind {
        #[serde(flatten)]
        model: WindModel,
    },
    Euclidean,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema { path: path.into(), message: message.into() }
}

/// Reads and validates an instance file.
pub fn parse_instance(path: impl AsRef<Path>) -> Result<LineCoverageInstance> {
    parse_instance_str(&fs::read_to_string(path)?)
}

pub fn parse_instance_str(text: &str) -> Result<LineCoverageInstance> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    instance_from_file(&file)
}

/// Builds an instance from a parsed file: remaps vertex ids to positions,
/// synthesizes complete non-required edges if asked, and applies the cost
/// model.
pub fn instance_from_file(file: &InstanceFile) -> Result<LineCoverageInstance> {
    let n = file.vertices.len();
    let mut index = HashMap::with_capacity(n);
    for (i, v) in file.vertices.iter().enumerate() {
        if index.insert(v.id, i).is_some() {
            return Err(schema(format!("vertices[{i}].id"), format!("duplicate vertex id {}", v.id)));
        }
    }
    let with_xy = file.vertices.iter().filter(|v| v.x.is_some() && v.y.is_some()).count();
    let coords = if with_xy == n && n > 0 {
        Some(file.vertices.iter().map(|v| (v.x.unwrap(), v.y.unwrap())).collect::<Vec<_>>())
    } else if let Some(i) = file.vertices.iter().position(|v| v.x.is_some() || v.y.is_some()) {
        if with_xy != 0 || file.vertices.iter().any(|v| v.x.is_some() != v.y.is_some()) {
            return Err(schema(format!("vertices[{i}]"), "coordinates must be given for every vertex or none"));
        }
        None
    } else {
        None
    };

    let mut topology = Vec::with_capacity(file.edges.len());
    for (i, e) in file.edges.iter().enumerate() {
        let lookup = |id: u64, field: &str| {
            index
                .get(&id)
                .map(|&k| VertexId(k))
                .ok_or_else(|| schema(format!("edges[{i}].{field}"), format!("unknown vertex id {id}")))
        };
        topology.push(EdgeSpec { u: lookup(e.u, "u")?, v: lookup(e.v, "v")?, required: e.required });
    }

    let explicit = matches!(file.cost_model, CostModelRecord::Explicit);
    if file.complete_nonrequired {
        if explicit {
            return Err(schema(
                "complete_nonrequired",
                "synthesized edges need a wind or euclidean cost model",
            ));
        }
        let mut present = vec![false; n * n];
        for t in &topology {
            present[t.u.0 * n + t.v.0] = true;
            present[t.v.0 * n + t.u.0] = true;
        }
        for u in 0..n {
            for v in u + 1..n {
                if !present[u * n + v] {
                    topology.push(EdgeSpec { u: VertexId(u), v: VertexId(v), required: false });
                }
            }
        }
    }

    let spec = match &file.cost_model {
        CostModelRecord::Explicit => {
            let mut costs = Vec::with_capacity(file.edges.len());
            for (i, e) in file.edges.iter().enumerate() {
                let c = e.costs.ok_or_else(|| schema(format!("edges[{i}].costs"), "explicit cost model needs costs"))?;
                let service = match (c.sf, c.sr) {
                    (Some(f), Some(r)) => Some(DirCosts::new(f, r)),
                    (None, None) if !e.required => None,
                    _ if !e.required => {
                        return Err(schema(format!("edges[{i}].costs"), "give both sf and sr or neither"))
                    }
                    _ => return Err(schema(format!("edges[{i}].costs"), "required edge needs sf and sr")),
                };
                costs.push(ExplicitCosts { service, deadhead: DirCosts::new(c.df, c.dr) });
            }
            CostSpec::Explicit(costs)
        }
        CostModelRecord::Wind { model } => CostSpec::Wind(*model),
        CostModelRecord::Euclidean => CostSpec::EuclideanDistance,
    };
    if !explicit {
        if let Some(i) = file.edges.iter().position(|e| e.costs.is_some()) {
            return Err(schema(format!("edges[{i}].costs"), "costs are derived from the cost model; remove them"));
        }
    }
    build_instance(n, coords, &topology, &spec)
}

/// Normalized explicit form of an instance: dense ids, every edge listed
/// with its four costs.
pub fn instance_to_file(inst: &LineCoverageInstance) -> InstanceFile {
    let vertices = (0..inst.vertex_count())
        .map(|i| {
            let xy = inst.coordinates().map(|c| c[i]);
            VertexRecord { id: i as u64, x: xy.map(|p| p.0), y: xy.map(|p| p.1) }
        })
        .collect();
    let edges = inst
        .edges()
        .iter()
        .map(|e| EdgeRecord {
            u: e.u.0 as u64,
            v: e.v.0 as u64,
            required: e.required(),
            costs: Some(CostRecord {
                sf: e.service.map(|s| s.fwd),
                sr: e.service.map(|s| s.rev),
                df: e.deadhead.fwd,
                dr: e.deadhead.rev,
            }),
        })
        .collect();
    InstanceFile { vertices, edges, cost_model: CostModelRecord::Explicit, complete_nonrequired: false }
}

pub fn instance_to_json(inst: &LineCoverageInstance) -> String {
    serde_json::to_string_pretty(&instance_to_file(inst)).expect("instance serializes")
}

pub fn write_instance(inst: &LineCoverageInstance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, instance_to_json(inst) + "\n")?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TourStep {
    pub edge_id: usize,
    pub from: usize,
    pub to: usize,
    pub mode: Mode,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TourTotals {
    pub cost: f64,
    pub lower_bound: Option<f64>,
    pub ratio: Option<f64>,
    pub components: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TourFile {
    pub steps: Vec<TourStep>,
    pub totals: TourTotals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TourFile {
    pub fn new(
        inst: &LineCoverageInstance,
        tour: &CoverageTour,
        report: Option<&SolveReport>,
        config: Option<&SolverConfig>,
    ) -> Self {
        let steps = tour
            .steps
            .iter()
            .map(|&a| TourStep {
                edge_id: a.edge,
                from: inst.tail(a).0,
                to: inst.head(a).0,
                mode: a.mode,
                cost: inst.arc_cost(a),
            })
            .collect();
        let totals = TourTotals {
            cost: tour.total_cost,
            lower_bound: tour.lower_bound.or(report.map(|r| r.lower_bound)),
            ratio: report.map(|r| r.ratio),
            components: report.map(|r| r.components),
        };
        Self { steps, totals, config: config.cloned(), seed: config.map(|c| c.seed) }
    }

    /// Rebuilds the tour against `inst`. Each step's `from`/`to` must match
    /// the edge's endpoints and `cost` must match the instance; the stored
    /// total must match the recomputed one.
    pub fn to_tour(&self, inst: &LineCoverageInstance) -> Result<CoverageTour> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, s) in self.steps.iter().enumerate() {
            let e = inst
                .edges()
                .get(s.edge_id)
                .ok_or_else(|| schema(format!("steps[{i}].edge_id"), format!("no edge {}", s.edge_id)))?;
            let forward = if (e.u.0, e.v.0) == (s.from, s.to) {
                true
            } else if (e.v.0, e.u.0) == (s.from, s.to) {
                false
            } else {
                return Err(schema(
                    format!("steps[{i}]"),
                    format!("edge {} does not join {} and {}", s.edge_id, s.from, s.to),
                ));
            };
            let arc = Arc { edge: s.edge_id, forward, mode: s.mode };
            let c = inst.arc_cost(arc);
            if (c - s.cost).abs() > EPS * c.abs().max(1.0) {
                return Err(schema(format!("steps[{i}].cost"), format!("recorded {} but the instance gives {c}", s.cost)));
            }
            steps.push(arc);
        }
        let tour = CoverageTour::from_steps(inst, steps, self.totals.lower_bound);
        if (tour.total_cost - self.totals.cost).abs() > EPS * tour.total_cost.abs().max(1.0) {
            return Err(schema(
                "totals.cost",
                format!("recorded {} but the steps sum to {}", self.totals.cost, tour.total_cost),
            ));
        }
        Ok(tour)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tour serializes")
    }
}

pub fn write_tour(file: &TourFile, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, file.to_json() + "\n")?;
    Ok(())
}

pub fn read_tour(path: impl AsRef<Path>) -> Result<TourFile> {
    let text = fs::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })
}

/// GeoJSON FeatureCollection with one LineString per tour step.
pub fn tour_geojson(inst: &LineCoverageInstance, tour: &CoverageTour) -> Result<Value> {
    let coords = inst.coordinates().ok_or(Error::MissingCoordinates)?;
    let features: Vec<Value> = tour
        .steps
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let (t, h) = (coords[inst.tail(a).0], coords[inst.head(a).0]);
            json!({
                "type": "Feature",
                "geometry": { "type": "LineString", "coordinates": [[t.0, t.1], [h.0, h.1]] },
                "properties": { "mode": a.mode, "step_index": k, "cost": inst.arc_cost(a), "edge_id": a.edge },
            })
        })
        .collect();
    Ok(json!({ "type": "FeatureCollection", "features": features }))
}

pub fn export_geojson(inst: &LineCoverageInstance, tour: &CoverageTour, path: impl AsRef<Path>) -> Result<()> {
    let value = tour_geojson(inst, tour)?;
    fs::write(path, serde_json::to_string_pretty(&value).expect("geojson serializes") + "\n")?;
    Ok(())
}
