use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Rect, Vec2};
use crate::invasiveness::SpeedLimits;

/// Static obstacle. Obstacles are open sets: their boundary is free space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Obstacle {
    Circle { center: Vec2, radius: f64 },
    Rect { min: Vec2, max: Vec2 },
}

impl Obstacle {
    pub fn circle(center: Vec2, radius: f64) -> Self {
        Obstacle::Circle { center, radius }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Obstacle::Rect {
            min: Vec2::new(x0, y0),
            max: Vec2::new(x1, y1),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        match *self {
            Obstacle::Circle { center, radius } => (p - center).norm_squared() < radius * radius,
            Obstacle::Rect { min, max } => Rect::new(min, max).contains_strict(p),
        }
    }

    /// Exact segment test against the obstacle interior.
    pub fn intersects_segment(&self, a: Vec2, b: Vec2) -> bool {
        match *self {
            Obstacle::Circle { center, radius } => {
                segment_point_distance_squared(a, b, center) < radius * radius
            }
            Obstacle::Rect { min, max } => segment_hits_open_box(a, b, min, max),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Obstacle::Circle { radius, .. } => std::f64::consts::PI * radius * radius,
            Obstacle::Rect { min, max } => Rect::new(min, max).area(),
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            Obstacle::Circle { center, radius } => {
                center.is_finite() && radius.is_finite() && radius > 0.0
            }
            Obstacle::Rect { min, max } => Rect::new(min, max).is_proper(),
        }
    }
}

fn segment_point_distance_squared(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    let t = if len2 > 0.0 {
        ((p - a).dot(d) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + d * t - p).norm_squared()
}

/// Slab test: does some point of the closed segment lie strictly inside the box?
fn segment_hits_open_box(a: Vec2, b: Vec2, min: Vec2, max: Vec2) -> bool {
    let d = b - a;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (origin, dir, lo_edge, hi_edge) in [(a.x, d.x, min.x, max.x), (a.y, d.y, min.y, max.y)] {
        if dir == 0.0 {
            if !(origin > lo_edge && origin < hi_edge) {
                return false;
            }
        } else {
            let t0 = (lo_edge - origin) / dir;
            let t1 = (hi_edge - origin) / dir;
            let (enter, exit) = if t0 < t1 { (t0, t1) } else { (t1, t0) };
            lo = lo.max(enter);
            hi = hi.min(exit);
        }
    }
    // Open interval (lo, hi) must meet [0, 1].
    lo < hi && lo < 1.0 && hi > 0.0
}

/// Rectangular workspace with static obstacles and the robot's speed limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub bounds: Rect,
    #[serde(default)]
    pub obstacles: Vec<Obstacle>,
    #[serde(default)]
    pub limits: SpeedLimits,
}

impl Environment {
    pub fn new(bounds: Rect, obstacles: Vec<Obstacle>, limits: SpeedLimits) -> Result<Self> {
        let env = Self {
            bounds,
            obstacles,
            limits,
        };
        env.validate()?;
        Ok(env)
    }

    /// Empty workspace with default speed limits.
    pub fn open(bounds: Rect) -> Result<Self> {
        Self::new(bounds, Vec::new(), SpeedLimits::default())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.bounds.is_proper() {
            return Err(Error::validation(
                "/bounds",
                "workspace bounds must be a non-degenerate rectangle",
            ));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.is_valid() {
                return Err(Error::validation(
                    format!("/obstacles/{i}"),
                    "obstacle must be finite with positive size",
                ));
            }
        }
        if !self.limits.is_valid() {
            return Err(Error::validation(
                "/limits",
                "speed limits must satisfy 0 < v_min <= v_max",
            ));
        }
        if self.free_area() <= 0.0 {
            return Err(Error::validation(
                "/obstacles",
                "obstacles leave no free area",
            ));
        }
        Ok(())
    }

    /// Bounds area minus obstacle areas. Overlapping obstacles are counted
    /// twice, which only underestimates the free area.
    pub fn free_area(&self) -> f64 {
        let blocked: f64 = self
            .obstacles
            .iter()
            .map(|o| match *o {
                Obstacle::Rect { min, max } => {
                    let w = (max.x.min(self.bounds.max.x) - min.x.max(self.bounds.min.x)).max(0.0);
                    let h = (max.y.min(self.bounds.max.y) - min.y.max(self.bounds.min.y)).max(0.0);
                    w * h
                }
                Obstacle::Circle { .. } => o.area(),
            })
            .sum();
        self.bounds.area() - blocked
    }

    /// In bounds and outside every obstacle.
    pub fn point_free(&self, p: Vec2) -> bool {
        self.bounds.contains(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Exact test that the segment stays in bounds and misses every obstacle.
    pub fn collision_free(&self, a: Vec2, b: Vec2) -> bool {
        // The bounds are convex, so checking both endpoints suffices.
        self.bounds.contains(a)
            && self.bounds.contains(b)
            && !self.obstacles.iter().any(|o| o.intersects_segment(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(obstacles: Vec<Obstacle>) -> Environment {
        Environment::new(
            Rect::from_coords(0.0, 0.0, 10.0, 10.0),
            obstacles,
            SpeedLimits::default(),
        )
        .unwrap()
    }

    #[test]
    fn grazing_circle_is_free() {
        let e = env(vec![Obstacle::circle(Vec2::new(5.0, 5.0), 1.0)]);
        let y = 5.0 + 1.0 + 1e-9;
        assert!(e.collision_free(Vec2::new(1.0, y), Vec2::new(9.0, y)));
        let y = 5.0 + 1.0 - 1e-9;
        assert!(!e.collision_free(Vec2::new(1.0, y), Vec2::new(9.0, y)));
    }

    #[test]
    fn endpoint_inside_rectangle_collides() {
        let e = env(vec![Obstacle::rect(4.0, 4.0, 6.0, 6.0)]);
        assert!(!e.collision_free(Vec2::new(1.0, 1.0), Vec2::new(5.0, 5.0)));
        assert!(!e.collision_free(Vec2::new(5.0, 5.0), Vec2::new(5.5, 5.5)));
    }

    #[test]
    fn segment_through_rectangle_collides() {
        let e = env(vec![Obstacle::rect(4.0, 4.0, 6.0, 6.0)]);
        assert!(!e.collision_free(Vec2::new(1.0, 5.0), Vec2::new(9.0, 5.0)));
        assert!(!e.collision_free(Vec2::new(3.0, 3.0), Vec2::new(7.0, 7.0)));
        // Along an edge and past a corner.
        assert!(e.collision_free(Vec2::new(1.0, 6.0), Vec2::new(9.0, 6.0)));
        assert!(e.collision_free(Vec2::new(3.0, 5.0), Vec2::new(5.0, 7.0)));
    }

    #[test]
    fn empty_bounds_segment_is_free() {
        let e = env(vec![]);
        assert!(e.collision_free(Vec2::new(0.5, 0.5), Vec2::new(9.5, 9.9)));
        assert!(!e.collision_free(Vec2::new(0.5, 0.5), Vec2::new(10.5, 9.9)));
    }

    #[test]
    fn segment_inside_circle_collides() {
        let e = env(vec![Obstacle::circle(Vec2::new(5.0, 5.0), 2.0)]);
        assert!(!e.collision_free(Vec2::new(4.9, 5.0), Vec2::new(5.1, 5.0)));
    }

    #[test]
    fn free_area_subtracts_obstacles() {
        let e = env(vec![
            Obstacle::rect(-1.0, 0.0, 1.0, 10.0),
            Obstacle::circle(Vec2::new(5.0, 5.0), 1.0),
        ]);
        let expected = 100.0 - 10.0 - std::f64::consts::PI;
        assert!((e.free_area() - expected).abs() < 1e-12);
    }

    #[test]
    fn invalid_environment_rejected() {
        assert!(Environment::open(Rect::from_coords(0.0, 0.0, 0.0, 1.0)).is_err());
        let err = Environment::new(
            Rect::from_coords(0.0, 0.0, 1.0, 1.0),
            vec![Obstacle::circle(Vec2::new(0.5, 0.5), -1.0)],
            SpeedLimits::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("/obstacles/0"));
        assert!(Environment::new(
            Rect::from_coords(0.0, 0.0, 1.0, 1.0),
            vec![Obstacle::rect(-1.0, -1.0, 2.0, 2.0)],
            SpeedLimits::default(),
        )
        .is_err());
    }
}
