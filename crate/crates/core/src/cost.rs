//! Directional edge costs: explicit, Euclidean, or travel time under a
//! constant wind.
//!
//! Wind direction is the angle (radians from +x) the wind blows *toward*,
//! so a travel vector pointing along the wind gets a tailwind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DirCosts, Edge, LineCoverageInstance, Mode, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindModel {
    pub service_speed: f64,
    pub deadhead_speed: f64,
    pub wind_speed: f64,
    pub wind_direction: f64,
}

impl Default for WindModel {
    /// 7 m/s servicing, 10 m/s deadheading, 2 m/s wind toward pi/4.
    fn default() -> Self {
        Self {
            service_speed: 7.0,
            deadhead_speed: 10.0,
            wind_speed: 2.0,
            wind_direction: std::f64::consts::FRAC_PI_4,
        }
    }
}

impl WindModel {
    pub fn validate(&self) -> Result<()> {
        for speed in [self.service_speed, self.deadhead_speed] {
            if !(speed > 0.0) || !speed.is_finite() {
                return Err(Error::InvalidInstance(format!("travel speed {speed} must be positive")));
            }
            if !(self.wind_speed >= 0.0) || self.wind_speed >= speed {
                return Err(Error::WindTooStrong { speed, wind: self.wind_speed });
            }
        }
        if !self.wind_direction.is_finite() {
            return Err(Error::InvalidInstance("wind direction must be finite".into()));
        }
        Ok(())
    }

    fn speed(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Service => self.service_speed,
            Mode::Deadhead => self.deadhead_speed,
        }
    }
}

/// Costs supplied for one edge under [`CostSpec::Explicit`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExplicitCosts {
    /// Ignored for non-required edges.
    pub service: Option<DirCosts>,
    pub deadhead: DirCosts,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CostSpec {
    /// One entry per edge, in edge order.
    Explicit(Vec<ExplicitCosts>),
    Wind(WindModel),
    /// Service and deadhead cost both equal the edge length.
    EuclideanDistance,
}

/// Structure of one edge before costs are attached.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeSpec {
    pub u: VertexId,
    pub v: VertexId,
    pub required: bool,
}

/// Ground speed when flying at airspeed `v` through wind `w` whose direction
/// makes angle `phi` with the travel vector.
pub fn effective_speed(v: f64, w: f64, phi: f64) -> Result<f64> {
    if !(w < v) || w < 0.0 {
        return Err(Error::WindTooStrong { speed: v, wind: w });
    }
    let s = phi.sin();
    Ok(w * phi.cos() + (v * v - w * w * s * s).sqrt())
}

/// Travel time from `tail` to `head` in the given mode.
pub fn edge_travel_cost(tail: (f64, f64), head: (f64, f64), model: &WindModel, mode: Mode) -> Result<f64> {
    let (dx, dy) = (head.0 - tail.0, head.1 - tail.1);
    let length = dx.hypot(dy);
    let v = model.speed(mode);
    if length == 0.0 {
        // still reject impossible wind
        effective_speed(v, model.wind_speed, 0.0)?;
        return Ok(0.0);
    }
    let phi = dy.atan2(dx) - model.wind_direction;
    Ok(length / effective_speed(v, model.wind_speed, phi)?)
}

/// Re-derives all four directional costs of an instance's edges from `spec`.
pub fn build_costs(inst: &LineCoverageInstance, spec: &CostSpec) -> Result<LineCoverageInstance> {
    let topology: Vec<EdgeSpec> = inst
        .edges()
        .iter()
        .map(|e| EdgeSpec { u: e.u, v: e.v, required: e.required() })
        .collect();
    build_instance(inst.vertex_count(), inst.coordinates().map(<[_]>::to_vec), &topology, spec)
}

/// Attaches costs from `spec` to an edge list and validates the result.
pub fn build_instance(
    vertex_count: usize,
    coordinates: Option<Vec<(f64, f64)>>,
    topology: &[EdgeSpec],
    spec: &CostSpec,
) -> Result<LineCoverageInstance> {
    let mut edges = Vec::with_capacity(topology.len());
    match spec {
        CostSpec::Explicit(costs) => {
            if costs.len() != topology.len() {
                return Err(Error::InvalidInstance(format!(
                    "{} explicit cost entries for {} edges",
                    costs.len(),
                    topology.len()
                )));
            }
            for (id, (t, c)) in topology.iter().zip(costs).enumerate() {
                let service = if t.required {
                    Some(c.service.ok_or_else(|| Error::CostInvariantViolated {
                        edge: id,
                        detail: "required edge has no service costs".into(),
                    })?)
                } else {
                    None
                };
                edges.push(Edge { id, u: t.u, v: t.v, service, deadhead: c.deadhead });
            }
        }
        CostSpec::Wind(model) => {
            model.validate()?;
            let coords = coordinates.as_deref().ok_or(Error::MissingCoordinates)?;
            for (id, t) in topology.iter().enumerate() {
                let (a, b) = endpoints(coords, t, vertex_count)?;
                warn_if_zero_length(id, a, b);
                let dir = |mode| -> Result<DirCosts> {
                    Ok(DirCosts::new(edge_travel_cost(a, b, model, mode)?, edge_travel_cost(b, a, model, mode)?))
                };
                let deadhead = dir(Mode::Deadhead)?;
                let service = if t.required { Some(dir(Mode::Service)?) } else { None };
                edges.push(Edge { id, u: t.u, v: t.v, service, deadhead });
            }
        }
        CostSpec::EuclideanDistance => {
            let coords = coordinates.as_deref().ok_or(Error::MissingCoordinates)?;
            for (id, t) in topology.iter().enumerate() {
                let (a, b) = endpoints(coords, t, vertex_count)?;
                warn_if_zero_length(id, a, b);
                let len = DirCosts::symmetric((b.0 - a.0).hypot(b.1 - a.1));
                edges.push(Edge { id, u: t.u, v: t.v, service: t.required.then_some(len), deadhead: len });
            }
        }
    }
    LineCoverageInstance::new(vertex_count, coordinates, edges)
}

fn endpoints(coords: &[(f64, f64)], t: &EdgeSpec, n: usize) -> Result<((f64, f64), (f64, f64))> {
    if t.u.0 >= n || t.v.0 >= n || coords.len() != n {
        return Err(Error::InvalidInstance("edge endpoint without coordinates".into()));
    }
    Ok((coords[t.u.0], coords[t.v.0]))
}

fn warn_if_zero_length(id: usize, a: (f64, f64), b: (f64, f64)) {
    if a == b {
        log::warn!("edge {id} has zero length; its costs are zero");
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn effective_speed_cases() {
        assert!(close(effective_speed(10.0, 0.0, 1.234).unwrap(), 10.0, 1e-12));
        assert!(close(effective_speed(10.0, 2.0, 0.0).unwrap(), 12.0, 1e-12));
        assert!(close(effective_speed(10.0, 2.0, PI).unwrap(), 8.0, 1e-12));
        assert!(close(effective_speed(7.0, 2.0, FRAC_PI_2).unwrap(), 45f64.sqrt(), 1e-12));
        assert!(close(45f64.sqrt(), 6.7082039, 1e-7));
        assert!(matches!(effective_speed(2.0, 2.0, 0.0), Err(Error::WindTooStrong { .. })));
    }

    #[test]
    fn travel_cost_is_asymmetric_under_wind() {
        let model = WindModel { service_speed: 7.0, deadhead_speed: 10.0, wind_speed: 2.0, wind_direction: 0.0 };
        let east = edge_travel_cost((0.0, 0.0), (100.0, 0.0), &model, Mode::Service).unwrap();
        let west = edge_travel_cost((100.0, 0.0), (0.0, 0.0), &model, Mode::Service).unwrap();
        assert!(close(east, 100.0 / 9.0, 1e-12));
        assert!(close(west, 20.0, 1e-12));

        let calm = WindModel { wind_speed: 0.0, ..model };
        let a = edge_travel_cost((3.0, 1.0), (-4.0, 7.5), &calm, Mode::Deadhead).unwrap();
        let b = edge_travel_cost((-4.0, 7.5), (3.0, 1.0), &calm, Mode::Deadhead).unwrap();
        assert_eq!(a, b);
    }

    fn unit_east_topology() -> (Vec<(f64, f64)>, Vec<EdgeSpec>) {
        (
            vec![(0.0, 0.0), (1.0, 0.0)],
            vec![EdgeSpec { u: VertexId(0), v: VertexId(1), required: true }],
        )
    }

    #[test]
    fn calm_wind_gives_speed_ratio() {
        let (coords, topo) = unit_east_topology();
        let model = WindModel { wind_speed: 0.0, ..WindModel::default() };
        let inst = build_instance(2, Some(coords), &topo, &CostSpec::Wind(model)).unwrap();
        let e = inst.edge(0);
        let s = e.service.unwrap();
        assert_eq!(s.fwd, s.rev);
        assert!(close(s.fwd / e.deadhead.fwd, 10.0 / 7.0, 1e-12));
    }

    #[test]
    fn default_wind_on_unit_east_edge() {
        // oracle: evaluate the effective-speed formula directly
        let phi = -FRAC_PI_4;
        let v_eff = 2.0 * phi.cos() + (49.0 - 4.0 * phi.sin().powi(2)).sqrt();
        let (coords, topo) = unit_east_topology();
        let inst = build_instance(2, Some(coords), &topo, &CostSpec::Wind(WindModel::default())).unwrap();
        assert!(close(inst.edge(0).service.unwrap().fwd, 1.0 / v_eff, 1e-15));
        assert!(close(1.0 / v_eff, 1.0 / 8.26986816277414, 1e-12));
    }

    #[test]
    fn explicit_costs_are_checked() {
        let topo = [EdgeSpec { u: VertexId(0), v: VertexId(1), required: true }];
        let costs = vec![ExplicitCosts { service: Some(DirCosts::new(3.0, 2.0)), deadhead: DirCosts::new(1.0, 4.0) }];
        let err = build_instance(2, None, &topo, &CostSpec::Explicit(costs)).unwrap_err();
        assert!(matches!(err, Error::CostInvariantViolated { edge: 0, .. }));
    }

    #[test]
    fn geometric_specs_need_coordinates() {
        let topo = [EdgeSpec { u: VertexId(0), v: VertexId(1), required: true }];
        assert!(matches!(build_instance(2, None, &topo, &CostSpec::EuclideanDistance), Err(Error::MissingCoordinates)));
    }
}
