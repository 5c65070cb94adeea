//! Social invasiveness of a robot moving through a stochastic crowd flow.
//!
//! The instantaneous invasiveness of a robot with velocity `v` at a point
//! with crowd state `(ρ, V̄, σ²)` is `ρ (|V̄ - v|² + σ²)`. Travelling a
//! distance `ds` at speed `v` accrues `I ds / v`, which is minimised by the
//! direction-independent speed `v* = sqrt(|V̄|² + σ²)`. Edge costs integrate
//! the resulting per-meter cost along straight segments.

use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowfield::{FlowField, FlowSample};
use crate::geom::Vec2;

/// Quadrature step used when none is given, in meters.
pub const DEFAULT_QUADRATURE_STEP: f64 = 0.05;

/// Tolerance on `|direction| = 1` accepted by [`cost_density`].
pub const UNIT_TOLERANCE: f64 = 1e-9;

/// Admissible robot speeds, `0 < v_min <= v_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedLimits {
    pub v_min: f64,
    pub v_max: f64,
}

impl SpeedLimits {
    pub const DEFAULT_MIN: f64 = 0.1;
    pub const DEFAULT_MAX: f64 = 2.0;

    pub fn new(v_min: f64, v_max: f64) -> Result<Self> {
        let limits = Self { v_min, v_max };
        if limits.is_valid() {
            Ok(limits)
        } else {
            Err(Error::Input(format!(
                "speed limits must satisfy 0 < v_min <= v_max, got [{v_min}, {v_max}]"
            )))
        }
    }

    pub fn is_valid(&self) -> bool {
        self.v_min.is_finite()
            && self.v_max.is_finite()
            && self.v_min > 0.0
            && self.v_min <= self.v_max
    }

    pub fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.v_min, self.v_max)
    }
}

impl Default for SpeedLimits {
    fn default() -> Self {
        Self {
            v_min: Self::DEFAULT_MIN,
            v_max: Self::DEFAULT_MAX,
        }
    }
}

/// Accumulated cost of traversing a segment or path.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EdgeCost {
    /// Time integral of invasiveness (dimensionless up to the interaction width).
    pub invasiveness: f64,
    /// Seconds.
    pub travel_time: f64,
    /// Meters.
    pub length: f64,
}

impl Add for EdgeCost {
    type Output = EdgeCost;
    fn add(self, rhs: EdgeCost) -> EdgeCost {
        EdgeCost {
            invasiveness: self.invasiveness + rhs.invasiveness,
            travel_time: self.travel_time + rhs.travel_time,
            length: self.length + rhs.length,
        }
    }
}

impl AddAssign for EdgeCost {
    fn add_assign(&mut self, rhs: EdgeCost) {
        *self = *self + rhs;
    }
}

/// `ρ (|V̄ - v|² + σ²)`; with `σ² = 0` this is the deterministic-flow measure.
pub fn instantaneous_invasiveness(s: &FlowSample, v_robot: Vec2) -> f64 {
    s.density * ((s.mean_velocity - v_robot).norm_squared() + s.variance)
}

/// Minimally invasive speed `sqrt(|V̄|² + σ²)`, clamped to the speed limits.
///
/// Takes no direction: the optimum per unit distance is the same whichever
/// way the robot travels.
pub fn optimal_speed(s: &FlowSample, limits: &SpeedLimits) -> f64 {
    limits.clamp(s.speed_moment().sqrt())
}

/// Invasiveness per meter travelled along the unit vector `direction` at the
/// optimal speed.
pub fn cost_density(s: &FlowSample, direction: Vec2, limits: &SpeedLimits) -> Result<f64> {
    let norm = direction.norm();
    if norm.is_nan() || (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Contract(format!(
            "cost density needs a unit direction, got |u| = {norm}"
        )));
    }
    Ok(cost_per_meter(s, direction, limits).0)
}

/// Returns `(cost per meter, speed)` without checking the direction.
///
/// `ρ [(|V̄|² + σ²)/v + v - 2 V̄·û]` at `v = optimal_speed`; when the speed is
/// not clamped this equals `2ρ (v* - V̄·û)`.
#[inline]
pub(crate) fn cost_per_meter(s: &FlowSample, direction: Vec2, limits: &SpeedLimits) -> (f64, f64) {
    let moment = s.speed_moment();
    let v = limits.clamp(moment.sqrt());
    let cost = s.density * (moment / v + v - 2.0 * s.mean_velocity.dot(direction));
    (cost.max(0.0), v)
}

/// Number of equal midpoint subintervals used for a segment of `length`.
pub fn quadrature_intervals(length: f64, step: f64) -> usize {
    // The small offset keeps exact multiples of the step from rounding up.
    ((length / step) - 1e-9).ceil().max(1.0) as usize
}

/// Cost of the straight segment `a -> b` by composite midpoint quadrature.
///
/// Direction matters: `edge_cost(a, b)` and `edge_cost(b, a)` differ
/// whenever the mean flow has a component along the segment.
pub fn edge_cost<F: FlowField + ?Sized>(
    flow: &F,
    a: Vec2,
    b: Vec2,
    limits: &SpeedLimits,
    quadrature_step: f64,
) -> Result<EdgeCost> {
    if !(quadrature_step.is_finite() && quadrature_step > 0.0) {
        return Err(Error::Contract(format!(
            "quadrature step must be positive, got {quadrature_step}"
        )));
    }
    if a == b {
        return Err(Error::DegenerateEdge(a));
    }
    let length = a.distance(b);
    let intervals = quadrature_intervals(length, quadrature_step);
    Ok(integrate_segment(flow, a, b, length, intervals, limits))
}

pub(crate) fn integrate_segment<F: FlowField + ?Sized>(
    flow: &F,
    a: Vec2,
    b: Vec2,
    length: f64,
    intervals: usize,
    limits: &SpeedLimits,
) -> EdgeCost {
    let delta = b - a;
    let direction = delta / length;
    let ds = length / intervals as f64;
    let mut cost = 0.0;
    let mut time = 0.0;
    for k in 0..intervals {
        let t = (k as f64 + 0.5) / intervals as f64;
        let s = flow.sample(a + delta * t);
        let (c, v) = cost_per_meter(&s, direction, limits);
        cost += c;
        time += 1.0 / v;
    }
    EdgeCost {
        invasiveness: cost * ds,
        travel_time: time * ds,
        length,
    }
}

/// Sum of [`edge_cost`] over consecutive waypoints.
pub fn path_invasiveness<F: FlowField + ?Sized>(
    flow: &F,
    waypoints: &[Vec2],
    limits: &SpeedLimits,
    quadrature_step: f64,
) -> Result<EdgeCost> {
    if waypoints.len() < 2 {
        return Err(Error::Contract(format!(
            "a path needs at least 2 waypoints, got {}",
            waypoints.len()
        )));
    }
    let mut total = EdgeCost::default();
    for pair in waypoints.windows(2) {
        total += edge_cost(flow, pair[0], pair[1], limits, quadrature_step)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::CrowdFlow;
    use crate::geom::Rect;

    fn wide() -> SpeedLimits {
        SpeedLimits::new(1e-6, 100.0).unwrap()
    }

    fn uniform(density: f64, v: Vec2, var: f64) -> CrowdFlow {
        CrowdFlow::uniform(Rect::from_coords(-50.0, -50.0, 50.0, 50.0), density, v, var).unwrap()
    }

    #[test]
    fn invasiveness_examples() {
        let matched = FlowSample::new(1.0, Vec2::new(1.0, 0.0), 0.0);
        assert_eq!(
            instantaneous_invasiveness(&matched, Vec2::new(1.0, 0.0)),
            0.0
        );
        let still = FlowSample::new(2.0, Vec2::ZERO, 0.25);
        assert_eq!(instantaneous_invasiveness(&still, Vec2::new(1.0, 0.0)), 2.5);
        let head_on = FlowSample::new(1.0, Vec2::new(0.0, 1.0), 0.5);
        assert_eq!(
            instantaneous_invasiveness(&head_on, Vec2::new(0.0, -1.0)),
            4.5
        );
    }

    #[test]
    fn optimal_speed_examples() {
        assert_eq!(
            optimal_speed(&FlowSample::new(1.0, Vec2::new(3.0, 4.0), 0.0), &wide()),
            5.0
        );
        assert_eq!(
            optimal_speed(&FlowSample::new(1.0, Vec2::ZERO, 1.0), &wide()),
            1.0
        );
        let limits = SpeedLimits::new(0.2, 2.0).unwrap();
        assert_eq!(
            optimal_speed(&FlowSample::new(1.0, Vec2::ZERO, 0.0), &limits),
            0.2
        );
    }

    #[test]
    fn cost_density_examples() {
        let s = FlowSample::new(1.0, Vec2::ZERO, 1.0);
        for angle in [0.0, 1.0, 2.5, -0.7] {
            let u = Vec2::new(1.0, 0.0).rotate(angle);
            assert!((cost_density(&s, u, &wide()).unwrap() - 2.0).abs() < 1e-15);
        }
        let empty = FlowSample::new(0.0, Vec2::new(1.0, 1.0), 3.0);
        assert_eq!(
            cost_density(&empty, Vec2::new(0.0, 1.0), &wide()).unwrap(),
            0.0
        );
        let with_flow = FlowSample::new(1.0, Vec2::new(1.0, 0.0), 0.0);
        assert_eq!(
            cost_density(&with_flow, Vec2::new(1.0, 0.0), &wide()).unwrap(),
            0.0
        );
    }

    #[test]
    fn cost_density_matches_numerical_minimum_of_invasiveness_per_speed() {
        // Brute-force scan of I(v û)/v over the admissible speeds.
        let s = FlowSample::new(1.0, Vec2::ZERO, 1.0);
        let u = Vec2::new(0.6, 0.8);
        let limits = SpeedLimits::new(0.1, 2.0).unwrap();
        let best = (0..=190_000)
            .map(|k| limits.v_min + k as f64 * 1e-5)
            .map(|v| instantaneous_invasiveness(&s, u * v) / v)
            .fold(f64::INFINITY, f64::min);
        assert!((best - 2.0).abs() < 1e-9);
    }

    #[test]
    fn non_unit_direction_is_contract_violation() {
        let s = FlowSample::new(1.0, Vec2::ZERO, 1.0);
        assert!(matches!(
            cost_density(&s, Vec2::new(1.0, 1.0), &wide()),
            Err(Error::Contract(_))
        ));
        assert!(cost_density(&s, Vec2::new(1.0 + 5e-10, 0.0), &wide()).is_ok());
    }

    #[test]
    fn edge_cost_uniform_still_crowd() {
        let flow = uniform(1.0, Vec2::ZERO, 1.0);
        let c = edge_cost(
            &flow,
            Vec2::new(0.0, 0.0),
            Vec2::new(0.0, 3.0),
            &wide(),
            0.05,
        )
        .unwrap();
        assert!((c.invasiveness - 6.0).abs() < 1e-12);
        assert!((c.travel_time - 3.0).abs() < 1e-12);
        assert_eq!(c.length, 3.0);
    }

    #[test]
    fn edge_cost_with_deterministic_flow_is_free() {
        let flow = uniform(1.0, Vec2::new(1.0, 0.0), 0.0);
        let c = edge_cost(
            &flow,
            Vec2::new(-1.0, 2.0),
            Vec2::new(1.0, 2.0),
            &wide(),
            0.05,
        )
        .unwrap();
        assert_eq!(c.invasiveness, 0.0);
        assert!((c.travel_time - 2.0).abs() < 1e-12);
        let back = edge_cost(
            &flow,
            Vec2::new(1.0, 2.0),
            Vec2::new(-1.0, 2.0),
            &wide(),
            0.05,
        )
        .unwrap();
        assert!((back.invasiveness - 8.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_edge_and_bad_step_rejected() {
        let flow = uniform(1.0, Vec2::ZERO, 1.0);
        let p = Vec2::new(1.0, 1.0);
        assert!(matches!(
            edge_cost(&flow, p, p, &wide(), 0.05),
            Err(Error::DegenerateEdge(_))
        ));
        assert!(matches!(
            edge_cost(&flow, p, Vec2::ZERO, &wide(), 0.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn path_needs_two_waypoints() {
        let flow = uniform(1.0, Vec2::ZERO, 1.0);
        assert!(matches!(
            path_invasiveness(&flow, &[Vec2::ZERO], &wide(), 0.05),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn three_leg_path_in_uniform_field() {
        let flow = uniform(1.0, Vec2::ZERO, 1.0);
        let pts = [
            Vec2::ZERO,
            Vec2::new(3.0, 0.0),
            Vec2::new(3.0, 4.0),
            Vec2::new(0.0, 0.0),
        ];
        let c = path_invasiveness(&flow, &pts, &wide(), 0.05).unwrap();
        assert!((c.length - 12.0).abs() < 1e-12);
        assert!((c.invasiveness - 24.0).abs() < 1e-11);
    }

    #[test]
    fn single_segment_path_equals_edge() {
        let flow = uniform(0.7, Vec2::new(0.3, -0.2), 0.4);
        let (a, b) = (Vec2::new(1.0, 2.0), Vec2::new(-3.0, 0.5));
        let e = edge_cost(&flow, a, b, &wide(), 0.05).unwrap();
        assert_eq!(path_invasiveness(&flow, &[a, b], &wide(), 0.05).unwrap(), e);
    }

    #[test]
    fn quadrature_interval_count() {
        assert_eq!(quadrature_intervals(3.0, 0.05), 60);
        assert_eq!(quadrature_intervals(0.01, 0.05), 1);
        assert_eq!(quadrature_intervals(0.051, 0.05), 2);
    }
}
