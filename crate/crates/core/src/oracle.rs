//! Brute-force reference planner: Dijkstra over a dense square lattice.
//!
//! Lattice nodes sit on the vertices of a square grid laid over the
//! workspace; each node connects to its 8 or 16 lattice neighbors with the
//! same straight-line edge costs the roadmap uses. Refining the resolution by
//! an integer factor nests the coarse lattice inside the fine one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::invasiveness::edge_cost;
use crate::roadmap::shortest_path_tree;
use crate::scenarios::Scenario;

pub const MIN_RESOLUTION: usize = 16;

/// Neighborhood of a lattice node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    #[serde(rename = "8")]
    Eight,
    #[serde(rename = "16")]
    Sixteen,
}

impl Connectivity {
    pub fn from_count(n: usize) -> Result<Self> {
        match n {
            8 => Ok(Connectivity::Eight),
            16 => Ok(Connectivity::Sixteen),
            _ => Err(Error::Input(format!(
                "connectivity must be 8 or 16, got {n}"
            ))),
        }
    }

    pub fn count(self) -> usize {
        match self {
            Connectivity::Eight => 8,
            Connectivity::Sixteen => 16,
        }
    }

    /// Integer moves `(di, dj)`.
    pub fn moves(self) -> &'static [(i64, i64)] {
        const EIGHT: [(i64, i64); 8] = [
            (1, 0),
            (1, 1),
            (0, 1),
            (-1, 1),
            (-1, 0),
            (-1, -1),
            (0, -1),
            (1, -1),
        ];
        const SIXTEEN: [(i64, i64); 16] = [
            (1, 0),
            (2, 1),
            (1, 1),
            (1, 2),
            (0, 1),
            (-1, 2),
            (-1, 1),
            (-2, 1),
            (-1, 0),
            (-2, -1),
            (-1, -1),
            (-1, -2),
            (0, -1),
            (1, -2),
            (1, -1),
            (2, -1),
        ];
        match self {
            Connectivity::Eight => &EIGHT,
            Connectivity::Sixteen => &SIXTEEN,
        }
    }
}

/// Result of a lattice search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticePlan {
    /// Cells along the longer workspace side.
    pub resolution: usize,
    pub connectivity: Connectivity,
    /// Total invasiveness of the lattice path.
    pub cost: f64,
    pub length: f64,
    /// Lattice nodes from the node nearest the start to the node nearest the goal.
    pub path: Vec<Vec2>,
}

struct Lattice {
    origin: Vec2,
    spacing: f64,
    nx: usize,
    ny: usize,
}

impl Lattice {
    fn position(&self, k: usize) -> Vec2 {
        let (i, j) = (k % self.nx, k / self.nx);
        self.origin + Vec2::new(i as f64, j as f64) * self.spacing
    }

    fn nearest(&self, p: Vec2) -> usize {
        let i = (((p.x - self.origin.x) / self.spacing).round().max(0.0) as usize).min(self.nx - 1);
        let j = (((p.y - self.origin.y) / self.spacing).round().max(0.0) as usize).min(self.ny - 1);
        j * self.nx + i
    }

    fn offset(&self, k: usize, (di, dj): (i64, i64)) -> Option<usize> {
        let i = (k % self.nx) as i64 + di;
        let j = (k / self.nx) as i64 + dj;
        (i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny)
            .then(|| j as usize * self.nx + i as usize)
    }
}

/// Lowest-invasiveness path on a `resolution`-cell lattice from the node
/// nearest the start to the node nearest the goal.
pub fn lattice_plan(
    scenario: &Scenario,
    resolution: usize,
    connectivity: Connectivity,
) -> Result<LatticePlan> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Input(format!(
            "lattice resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    let env = &scenario.environment;
    let bounds = env.bounds;
    let spacing = bounds.width().max(bounds.height()) / resolution as f64;
    let count = |extent: f64| ((extent / spacing) + 1e-9).floor() as usize + 1;
    let lattice = Lattice {
        origin: bounds.min,
        spacing,
        nx: count(bounds.width()),
        ny: count(bounds.height()),
    };
    let n = lattice.nx * lattice.ny;
    let free: Vec<bool> = (0..n)
        .map(|k| env.point_free(lattice.position(k)))
        .collect();

    let source = lattice.nearest(scenario.start);
    let target = lattice.nearest(scenario.goal);
    for (name, k) in [("start", source), ("goal", target)] {
        if !free[k] {
            return Err(Error::Input(format!(
                "lattice node nearest the {name} is blocked"
            )));
        }
    }

    let step = scenario.defaults.quadrature_step;
    let limits = env.limits;
    let adjacency: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            if !free[k] {
                return Vec::new();
            }
            let a = lattice.position(k);
            connectivity
                .moves()
                .iter()
                .filter_map(|&m| lattice.offset(k, m))
                .filter(|&t| free[t])
                .filter_map(|t| {
                    let b = lattice.position(t);
                    env.collision_free(a, b).then(|| {
                        let c = edge_cost(&scenario.flow, a, b, &limits, step)
                            .expect("distinct lattice nodes");
                        (t, c.invasiveness)
                    })
                })
                .collect()
        })
        .collect();

    let tree = shortest_path_tree(n, source, |u, visit| {
        for &(v, w) in &adjacency[u] {
            visit(v, w);
        }
    });
    let nodes = tree.path_to(target).ok_or_else(|| {
        Error::NoPath(Box::new(crate::error::NoPathDiagnostics {
            nodes: n,
            edges: adjacency.iter().map(Vec::len).sum(),
            reachable: tree.reachable_count(),
            connection_radius: spacing
                * if connectivity == Connectivity::Sixteen {
                    5f64.sqrt()
                } else {
                    2f64.sqrt()
                },
            seed: 0,
        }))
    })?;
    let path: Vec<Vec2> = nodes.iter().map(|&k| lattice.position(k)).collect();
    let length = path.windows(2).map(|w| w[0].distance(w[1])).sum();
    Ok(LatticePlan {
        resolution,
        connectivity,
        cost: tree.cost_to_come[target],
        length,
        path,
    })
}

/// Shortest lattice-path length between two lattice-aligned points in an
/// open plane, `displacement` given in lattice steps. Splits the vector
/// between the two generator directions that bracket it.
pub fn lattice_distance(displacement: Vec2, connectivity: Connectivity) -> f64 {
    let (ax, ay) = (displacement.x.abs(), displacement.y.abs());
    let (hi, lo) = if ax >= ay { (ax, ay) } else { (ay, ax) };
    match connectivity {
        // Diagonal moves for `lo`, straight moves for the rest.
        Connectivity::Eight => lo * 2f64.sqrt() + (hi - lo),
        Connectivity::Sixteen => {
            if 2.0 * lo <= hi {
                // Between (1,0) and (2,1).
                lo * 5f64.sqrt() + (hi - 2.0 * lo)
            } else {
                // Between (2,1) and (1,1).
                (hi - lo) * 5f64.sqrt() + (2.0 * lo - hi) * 2f64.sqrt()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::CrowdFlow;
    use crate::geom::Rect;
    use crate::roadmap::Environment;
    use crate::scenarios::PlannerDefaults;

    fn uniform_scenario(density: f64, start: Vec2, goal: Vec2) -> Scenario {
        let bounds = Rect::from_coords(0.0, 0.0, 10.0, 10.0);
        Scenario {
            name: "uniform".into(),
            environment: Environment::open(bounds).unwrap(),
            flow: CrowdFlow::uniform(bounds, density, Vec2::ZERO, 1.0).unwrap(),
            start,
            goal,
            defaults: PlannerDefaults::default(),
        }
    }

    #[test]
    fn lattice_distance_matches_brute_force_enumeration() {
        // Minimize over nonnegative combinations of the two bracketing moves
        // by enumerating integer step counts.
        let brute = |dx: i64, dy: i64, moves: &[(i64, i64)]| {
            let mut best = f64::INFINITY;
            for &a in moves {
                for &b in moves {
                    for p in 0..=40i64 {
                        for q in 0..=40i64 {
                            if p * a.0 + q * b.0 == dx && p * a.1 + q * b.1 == dy {
                                let len = p as f64 * ((a.0 * a.0 + a.1 * a.1) as f64).sqrt()
                                    + q as f64 * ((b.0 * b.0 + b.1 * b.1) as f64).sqrt();
                                best = best.min(len);
                            }
                        }
                    }
                }
            }
            best
        };
        for conn in [Connectivity::Eight, Connectivity::Sixteen] {
            for (dx, dy) in [
                (7, 0),
                (7, 1),
                (7, 3),
                (7, 4),
                (6, 6),
                (2, 9),
                (-5, 3),
                (-4, -8),
            ] {
                let expected = brute(dx, dy, conn.moves());
                let got = lattice_distance(Vec2::new(dx as f64, dy as f64), conn);
                assert!(
                    (got - expected).abs() < 1e-12,
                    "{conn:?} ({dx},{dy}): {got} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn uniform_field_cost_within_lattice_distortion() {
        let worst_16 = 1.0 / ((0.5f64).atan() / 2.0).cos();
        for goal in [
            Vec2::new(9.0, 1.0),
            Vec2::new(9.0, 3.3),
            Vec2::new(6.1, 9.4),
            Vec2::new(9.0, 9.0),
        ] {
            let sc = uniform_scenario(1.0, Vec2::new(1.0, 1.0), goal);
            let plan = lattice_plan(&sc, 40, Connectivity::Sixteen).unwrap();
            let (a, b) = (plan.path[0], *plan.path.last().unwrap());
            let straight = a.distance(b);
            let spacing = 10.0 / 40.0;
            let lattice = lattice_distance((b - a) / spacing, Connectivity::Sixteen) * spacing;
            assert!(plan.cost >= 2.0 * straight - 1e-9);
            assert!(
                (plan.cost - 2.0 * lattice).abs() < 1e-9,
                "{} vs {}",
                plan.cost,
                2.0 * lattice
            );
            assert!(plan.cost <= 2.0 * straight * worst_16 + 1e-9);
        }
    }

    #[test]
    fn zero_density_costs_nothing() {
        let sc = uniform_scenario(0.0, Vec2::new(1.0, 1.0), Vec2::new(8.0, 6.0));
        assert_eq!(
            lattice_plan(&sc, 20, Connectivity::Eight).unwrap().cost,
            0.0
        );
    }

    #[test]
    fn rejects_bad_arguments() {
        let sc = uniform_scenario(1.0, Vec2::new(1.0, 1.0), Vec2::new(8.0, 6.0));
        assert!(matches!(
            lattice_plan(&sc, 8, Connectivity::Sixteen),
            Err(Error::Input(_))
        ));
        assert!(Connectivity::from_count(4).is_err());
        assert_eq!(Connectivity::from_count(16).unwrap().count(), 16);
    }

    #[test]
    fn blocked_start_node_is_input_error() {
        let mut sc = uniform_scenario(1.0, Vec2::new(1.0, 1.0), Vec2::new(8.0, 6.0));
        // The obstacle covers the lattice node at (1.25, 1.25) nearest the start
        // while the start itself stays free.
        sc.environment
            .obstacles
            .push(crate::roadmap::Obstacle::circle(Vec2::new(1.25, 1.25), 0.1));
        sc.start = Vec2::new(1.16, 1.16);
        assert!(sc.validate().is_ok());
        assert!(matches!(
            lattice_plan(&sc, 40, Connectivity::Sixteen),
            Err(Error::Input(_))
        ));
    }
}
