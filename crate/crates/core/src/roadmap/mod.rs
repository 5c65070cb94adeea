//! PRM* roadmaps over free space with invasiveness-weighted directed edges.
//!
//! Node 0 is always the start and node 1 the goal. The remaining nodes are
//! drawn uniformly over the workspace (see [`sampling`] for the exact
//! generator) and rejected when they fall inside an obstacle. Every ordered
//! pair of nodes closer than the PRM* connection radius whose segment is
//! collision-free gets a directed edge carrying its [`EdgeCost`].

mod dijkstra;
mod environment;
mod neighbors;
mod plan;
pub mod sampling;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowfield::FlowField;
use crate::geom::Vec2;
use crate::invasiveness::{edge_cost, EdgeCost, DEFAULT_QUADRATURE_STEP};

pub use dijkstra::{dijkstra, shortest_path_tree, EdgeWeight, ShortestPathTree};
pub use environment::{Environment, Obstacle};
pub use neighbors::{radius_pairs, NeighborSearch, GRID_INDEX_THRESHOLD};
pub use plan::{plan, plan_naive, plan_on, plan_pair, PlanResult};
pub use sampling::PointSampler;

pub const START: usize = 0;
pub const GOAL: usize = 1;

/// Multiplier applied to the two-dimensional PRM* lower bound on `γ`.
pub const GAMMA_MARGIN: f64 = 1.1;

/// Rejection sampling gives up after this many draws per requested node.
pub const MAX_ATTEMPTS_PER_SAMPLE: usize = 100;

/// PRM* radius constant `γ = 1.1 · 2 · sqrt(1.5 · free_area / π)`.
pub fn gamma(free_area: f64) -> f64 {
    GAMMA_MARGIN * 2.0 * (1.5 * free_area / std::f64::consts::PI).sqrt()
}

/// PRM* connection radius `γ · sqrt(ln n / n)` for `n` roadmap nodes.
pub fn connection_radius(n: usize, free_area: f64) -> f64 {
    let n = n as f64;
    gamma(free_area) * (n.ln() / n).sqrt()
}

/// Sampling and discretization settings for roadmap construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    /// Total node count including start and goal.
    pub samples: usize,
    pub seed: u64,
    pub quadrature_step: f64,
    pub neighbor_search: NeighborSearch,
}

impl PlannerConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            quadrature_step: DEFAULT_QUADRATURE_STEP,
            neighbor_search: NeighborSearch::Auto,
        }
    }

    pub fn with_quadrature_step(mut self, step: f64) -> Self {
        self.quadrature_step = step;
        self
    }

    pub fn with_neighbor_search(mut self, search: NeighborSearch) -> Self {
        self.neighbor_search = search;
        self
    }
}

/// Directed roadmap edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadmapEdge {
    pub from: usize,
    pub to: usize,
    pub cost: EdgeCost,
}

impl RoadmapEdge {
    pub fn weight(&self, weight: EdgeWeight) -> f64 {
        match weight {
            EdgeWeight::Invasiveness => self.cost.invasiveness,
            EdgeWeight::Length => self.cost.length,
        }
    }
}

/// Immutable PRM* graph. Edges are stored sorted by `(from, to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Roadmap {
    nodes: Vec<Vec2>,
    edges: Vec<RoadmapEdge>,
    offsets: Vec<usize>,
    connection_radius: f64,
    seed: u64,
}

impl Roadmap {
    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &[RoadmapEdge] {
        &self.edges
    }

    pub fn out_edges(&self, node: usize) -> &[RoadmapEdge] {
        &self.edges[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn edge(&self, from: usize, to: usize) -> Option<&RoadmapEdge> {
        let out = self.out_edges(from);
        out.binary_search_by_key(&to, |e| e.to)
            .ok()
            .map(|k| &out[k])
    }

    pub fn connection_radius(&self) -> f64 {
        self.connection_radius
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn start(&self) -> Vec2 {
        self.nodes[START]
    }

    pub fn goal(&self) -> Vec2 {
        self.nodes[GOAL]
    }

    fn from_parts(
        nodes: Vec<Vec2>,
        mut edges: Vec<RoadmapEdge>,
        connection_radius: f64,
        seed: u64,
    ) -> Self {
        edges.sort_by_key(|e| (e.from, e.to));
        let mut offsets = vec![0usize; nodes.len() + 1];
        for e in &edges {
            offsets[e.from + 1] += 1;
        }
        for k in 1..offsets.len() {
            offsets[k] += offsets[k - 1];
        }
        Self {
            nodes,
            edges,
            offsets,
            connection_radius,
            seed,
        }
    }
}

fn check_endpoint(env: &Environment, p: Vec2, name: &str) -> Result<()> {
    if !p.is_finite() || !env.bounds.contains(p) {
        return Err(Error::Input(format!(
            "{name} ({}, {}) lies outside the workspace",
            p.x, p.y
        )));
    }
    if !env.point_free(p) {
        return Err(Error::Input(format!(
            "{name} ({}, {}) lies inside an obstacle",
            p.x, p.y
        )));
    }
    Ok(())
}

/// Samples nodes: start, goal, then `samples - 2` collision-free draws.
pub fn sample_nodes(
    env: &Environment,
    start: Vec2,
    goal: Vec2,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec2>> {
    let mut sampler = PointSampler::new(env.bounds, seed);
    let mut nodes = Vec::with_capacity(samples);
    nodes.push(start);
    nodes.push(goal);
    let budget = MAX_ATTEMPTS_PER_SAMPLE.saturating_mul(samples);
    let mut attempts = 0;
    while nodes.len() < samples {
        if attempts >= budget {
            return Err(Error::InfeasibleEnvironment {
                attempts,
                accepted: nodes.len() - 2,
            });
        }
        attempts += 1;
        let p = sampler.next_point();
        if env.point_free(p) {
            nodes.push(p);
        }
    }
    Ok(nodes)
}

/// Builds the PRM* roadmap. Edge costs are evaluated in parallel; each edge
/// is integrated independently so the result does not depend on thread count.
pub fn build<F: FlowField + ?Sized>(
    env: &Environment,
    flow: &F,
    start: Vec2,
    goal: Vec2,
    config: &PlannerConfig,
) -> Result<Roadmap> {
    env.validate()?;
    if config.samples < 2 {
        return Err(Error::Contract(format!(
            "a roadmap needs at least 2 nodes, got {}",
            config.samples
        )));
    }
    if !(config.quadrature_step.is_finite() && config.quadrature_step > 0.0) {
        return Err(Error::Contract(format!(
            "quadrature step must be positive, got {}",
            config.quadrature_step
        )));
    }
    check_endpoint(env, start, "start")?;
    check_endpoint(env, goal, "goal")?;

    let nodes = sample_nodes(env, start, goal, config.samples, config.seed)?;
    let radius = connection_radius(config.samples, env.free_area());
    let pairs = radius_pairs(&nodes, radius, config.neighbor_search);

    let limits = env.limits;
    let step = config.quadrature_step;
    let edges: Vec<RoadmapEdge> = pairs
        .par_iter()
        .filter(|&&(i, j)| nodes[i] != nodes[j] && env.collision_free(nodes[i], nodes[j]))
        .flat_map_iter(|&(i, j)| {
            let (a, b) = (nodes[i], nodes[j]);
            // a != b was checked above, so edge_cost cannot fail.
            let forward = edge_cost(flow, a, b, &limits, step).expect("distinct endpoints");
            let backward = edge_cost(flow, b, a, &limits, step).expect("distinct endpoints");
            [
                RoadmapEdge {
                    from: i,
                    to: j,
                    cost: forward,
                },
                RoadmapEdge {
                    from: j,
                    to: i,
                    cost: backward,
                },
            ]
        })
        .collect();

    Ok(Roadmap::from_parts(nodes, edges, radius, config.seed))
}
