use serde::{Deserialize, Serialize};

use crate::error::{Error, NoPathDiagnostics, Result};
use crate::flowfield::FlowField;
use crate::geom::Vec2;
use crate::invasiveness::EdgeCost;

use super::{build, dijkstra, EdgeWeight, Environment, PlannerConfig, Roadmap, GOAL, START};

/// A planned route through the roadmap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    /// From start to goal.
    pub waypoints: Vec<Vec2>,
    /// Mean speed per segment: segment length over integrated segment time.
    pub speeds: Vec<f64>,
    pub total_invasiveness: f64,
    /// Seconds.
    pub total_time: f64,
    /// Meters.
    pub total_length: f64,
    /// Roadmap node ids along the route.
    #[serde(skip)]
    pub node_path: Vec<usize>,
}

impl PlanResult {
    /// Path-length-weighted mean of `V̄·û` along the route, sampled with the
    /// midpoint rule at spacing `step`. Positive when the route mostly
    /// travels with the crowd.
    pub fn mean_flow_alignment<F: FlowField + ?Sized>(&self, flow: &F, step: f64) -> f64 {
        let mut weighted = 0.0;
        for pair in self.waypoints.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let length = a.distance(b);
            let dir = (b - a) / length;
            let n = crate::invasiveness::quadrature_intervals(length, step);
            let mut acc = 0.0;
            for k in 0..n {
                let p = a.lerp(b, (k as f64 + 0.5) / n as f64);
                acc += flow.sample(p).mean_velocity.dot(dir);
            }
            weighted += acc * length / n as f64;
        }
        weighted / self.total_length
    }
}

/// Extracts the start-to-goal route of the shortest-path tree under
/// `weight`. Totals are summed along the route from the start, in the same
/// order Dijkstra accumulated them.
pub fn plan_on(roadmap: &Roadmap, weight: EdgeWeight) -> Result<PlanResult> {
    let tree = dijkstra(roadmap, START, weight)?;
    let node_path = tree.path_to(GOAL).ok_or_else(|| {
        Error::NoPath(Box::new(NoPathDiagnostics {
            nodes: roadmap.node_count(),
            edges: roadmap.edges().len(),
            reachable: tree.reachable_count(),
            connection_radius: roadmap.connection_radius(),
            seed: roadmap.seed(),
        }))
    })?;
    let mut total = EdgeCost::default();
    let mut speeds = Vec::with_capacity(node_path.len().saturating_sub(1));
    for pair in node_path.windows(2) {
        let edge = roadmap
            .edge(pair[0], pair[1])
            .expect("tree edges are roadmap edges");
        speeds.push(edge.cost.length / edge.cost.travel_time);
        total += edge.cost;
    }
    Ok(PlanResult {
        waypoints: node_path.iter().map(|&k| roadmap.nodes()[k]).collect(),
        speeds,
        total_invasiveness: total.invasiveness,
        total_time: total.travel_time,
        total_length: total.length,
        node_path,
    })
}

/// Minimally invasive plan: PRM* roadmap plus Dijkstra on invasiveness.
pub fn plan<F: FlowField + ?Sized>(
    env: &Environment,
    flow: &F,
    start: Vec2,
    goal: Vec2,
    config: &PlannerConfig,
) -> Result<PlanResult> {
    plan_on(
        &build(env, flow, start, goal, config)?,
        EdgeWeight::Invasiveness,
    )
}

/// Shortest-length plan on the same roadmap, scored with the same
/// invasiveness measure and speed policy.
pub fn plan_naive<F: FlowField + ?Sized>(
    env: &Environment,
    flow: &F,
    start: Vec2,
    goal: Vec2,
    config: &PlannerConfig,
) -> Result<PlanResult> {
    plan_on(&build(env, flow, start, goal, config)?, EdgeWeight::Length)
}

/// Social and naive plans sharing one roadmap, as `(social, naive)`.
pub fn plan_pair<F: FlowField + ?Sized>(
    env: &Environment,
    flow: &F,
    start: Vec2,
    goal: Vec2,
    config: &PlannerConfig,
) -> Result<(PlanResult, PlanResult)> {
    let roadmap = build(env, flow, start, goal, config)?;
    Ok((
        plan_on(&roadmap, EdgeWeight::Invasiveness)?,
        plan_on(&roadmap, EdgeWeight::Length)?,
    ))
}
