//! Built-in experiment scenarios and the scenario file format.
//!
//! Geometry (workspace extents, bump widths, start and goal placement, hall
//! layout) is fixed by the named constants below so results are reproducible.

mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowfield::{ComponentFlow, CrowdFlow, ScalarField, VectorField};
use crate::geom::{Rect, Vec2};
use crate::invasiveness::{SpeedLimits, DEFAULT_QUADRATURE_STEP};
use crate::roadmap::{Environment, Obstacle, PlannerConfig};

pub use io::{load, parse, save, to_canonical_json, SCHEMA_VERSION};

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 4] = ["density", "velocity", "variance", "concert-hall"];

/// Side length of the square workspace used by the three simple scenarios.
pub const SIMPLE_WORKSPACE: f64 = 20.0;

pub const DENSITY_FLOOR: f64 = 0.5;
pub const DENSITY_PEAK: f64 = 1.5;
pub const DENSITY_BUMP_STD: f64 = 3.0;
pub const DENSITY_VARIANCE: f64 = 1.0;
pub const DENSITY_START: Vec2 = Vec2::new(2.0, 10.0);
pub const DENSITY_GOAL: Vec2 = Vec2::new(18.0, 10.0);

pub const VELOCITY_DENSITY: f64 = 1.0;
pub const VELOCITY_SPEED: f64 = 1.0;
pub const VELOCITY_VARIANCE: f64 = 0.25;
pub const VELOCITY_START: Vec2 = Vec2::new(10.0, 3.0);
pub const VELOCITY_GOAL: Vec2 = Vec2::new(10.0, 15.0);

/// Variance at the left and right edges of the variance scenario.
pub const VARIANCE_RANGE: (f64, f64) = (0.25, 1.25);
/// Speed of the two opposing streams. With unit total density the mixture
/// variance is `2 f s²` for stream fraction `f`; `s² = 1.25` lets `f` reach
/// `0.5` without the filler density going negative.
pub const VARIANCE_STREAM_SPEED_SQUARED: f64 = 1.25;
/// Band `(x0, x1)` over which the stream share ramps up; constant outside.
pub const VARIANCE_RAMP_X: (f64, f64) = (6.0, 14.0);
pub const VARIANCE_START: Vec2 = Vec2::new(11.0, 2.0);
pub const VARIANCE_GOAL: Vec2 = Vec2::new(11.0, 18.0);

pub const DEFAULT_SAMPLES: usize = 2000;

/// Default planner settings stored with a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerDefaults {
    pub samples: usize,
    pub seed: u64,
    pub quadrature_step: f64,
}

impl Default for PlannerDefaults {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            quadrature_step: DEFAULT_QUADRATURE_STEP,
        }
    }
}

impl PlannerDefaults {
    pub fn config(&self) -> PlannerConfig {
        PlannerConfig::new(self.samples, self.seed).with_quadrature_step(self.quadrature_step)
    }
}

/// A complete planning problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub environment: Environment,
    pub flow: CrowdFlow,
    pub start: Vec2,
    pub goal: Vec2,
    pub defaults: PlannerDefaults,
}

impl Scenario {
    /// Checks environment, endpoints and defaults; errors carry JSON pointers
    /// into the file representation.
    pub fn validate(&self) -> Result<()> {
        self.environment.validate()?;
        for (ptr, p) in [("/start", self.start), ("/goal", self.goal)] {
            if !p.is_finite() || !self.environment.bounds.contains(p) {
                return Err(Error::validation(
                    ptr,
                    "must lie inside the workspace bounds",
                ));
            }
            if !self.environment.point_free(p) {
                return Err(Error::validation(ptr, "lies inside an obstacle"));
            }
        }
        if self.defaults.samples < 2 {
            return Err(Error::validation("/defaults/samples", "must be at least 2"));
        }
        let step = self.defaults.quadrature_step;
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::validation(
                "/defaults/quadrature_step",
                "must be positive",
            ));
        }
        Ok(())
    }

    /// Planner configuration from the stored defaults, optionally overridden.
    pub fn config(&self, samples: Option<usize>, seed: Option<u64>) -> PlannerConfig {
        let mut cfg = self.defaults.config();
        if let Some(n) = samples {
            cfg.samples = n;
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg
    }
}

/// Looks up a built-in scenario by name.
pub fn builtin(name: &str) -> Option<Scenario> {
    match name {
        "density" => Some(density_scenario()),
        "velocity" => Some(velocity_scenario()),
        "variance" => Some(variance_scenario()),
        "concert-hall" | "concert_hall" => Some(concert_hall()),
        _ => None,
    }
}

fn simple_bounds() -> Rect {
    Rect::from_coords(0.0, 0.0, SIMPLE_WORKSPACE, SIMPLE_WORKSPACE)
}

fn constant(value: f64) -> ScalarField {
    ScalarField::Constant { value }
}

fn assemble(
    name: &str,
    environment: Environment,
    components: Vec<ComponentFlow>,
    start: Vec2,
    goal: Vec2,
) -> Scenario {
    let flow =
        CrowdFlow::from_components(environment.bounds, components).expect("built-in flow is valid");
    let scenario = Scenario {
        name: name.to_string(),
        environment,
        flow,
        start,
        goal,
        defaults: PlannerDefaults::default(),
    };
    debug_assert!(scenario.validate().is_ok());
    scenario
}

/// Stationary crowd gathered around a point of interest: a Gaussian density
/// bump between start and goal, still mean flow, unit variance.
pub fn density_scenario() -> Scenario {
    let bounds = simple_bounds();
    let env = Environment::open(bounds).expect("valid bounds");
    let crowd = ComponentFlow::new(
        ScalarField::GaussianBump {
            floor: DENSITY_FLOOR,
            peak: DENSITY_PEAK,
            center: bounds.center(),
            std: DENSITY_BUMP_STD,
        },
        VectorField::Constant { value: Vec2::ZERO },
    )
    .with_variance(constant(DENSITY_VARIANCE));
    assemble("density", env, vec![crowd], DENSITY_START, DENSITY_GOAL)
}

/// Crowd orbiting the workspace center at unit speed.
pub fn velocity_scenario() -> Scenario {
    let bounds = simple_bounds();
    let env = Environment::open(bounds).expect("valid bounds");
    let crowd = ComponentFlow::new(
        constant(VELOCITY_DENSITY),
        VectorField::Circulation {
            center: bounds.center(),
            speed: VELOCITY_SPEED,
        },
    )
    .with_variance(constant(VELOCITY_VARIANCE));
    assemble("velocity", env, vec![crowd], VELOCITY_START, VELOCITY_GOAL)
}

/// Two opposing vertical streams whose share of the crowd grows from left to
/// right, topped up by a still filler crowd so total density is uniform.
pub fn variance_scenario() -> Scenario {
    let bounds = simple_bounds();
    let env = Environment::open(bounds).expect("valid bounds");
    let speed = VARIANCE_STREAM_SPEED_SQUARED.sqrt();
    let (lo, hi) = VARIANCE_RANGE;
    // Each stream carries fraction f with σ² = 2 f s².
    let f_left = lo / (2.0 * VARIANCE_STREAM_SPEED_SQUARED);
    let f_right = hi / (2.0 * VARIANCE_STREAM_SPEED_SQUARED);
    let left = Vec2::new(VARIANCE_RAMP_X.0, bounds.center().y);
    let right = Vec2::new(VARIANCE_RAMP_X.1, bounds.center().y);
    let ramp = |start_value, end_value| ScalarField::LinearRamp {
        from: left,
        to: right,
        start_value,
        end_value,
    };
    let up = ComponentFlow::new(
        ramp(f_left, f_right),
        VectorField::Constant {
            value: Vec2::new(0.0, speed),
        },
    );
    let down = ComponentFlow::new(
        ramp(f_left, f_right),
        VectorField::Constant {
            value: Vec2::new(0.0, -speed),
        },
    );
    let filler = ComponentFlow::new(
        ramp(1.0 - 2.0 * f_left, 1.0 - 2.0 * f_right),
        VectorField::Constant { value: Vec2::ZERO },
    );
    assemble(
        "variance",
        env,
        vec![up, down, filler],
        VARIANCE_START,
        VARIANCE_GOAL,
    )
}

/// Concert hall layout constants, in meters.
pub mod hall {
    use crate::geom::{Rect, Vec2};

    pub const BOUNDS: Rect = Rect {
        min: Vec2::new(0.0, 0.0),
        max: Vec2::new(32.0, 24.0),
    };
    /// Interior of the outer room.
    pub const OUTER: Rect = Rect {
        min: Vec2::new(1.0, 1.0),
        max: Vec2::new(31.0, 21.0),
    };
    /// Interior of the inner room (the auditorium).
    pub const INNER: Rect = Rect {
        min: Vec2::new(6.0, 5.0),
        max: Vec2::new(20.0, 14.0),
    };
    pub const WALL: f64 = 0.4;
    /// Door spans along the top wall of the inner room, `(x0, x1)`.
    pub const LEFT_DOOR: (f64, f64) = (8.0, 10.0);
    pub const RIGHT_DOOR: (f64, f64) = (16.0, 18.0);
    /// Main exit span along the top wall of the outer room.
    pub const MAIN_EXIT: (f64, f64) = (23.0, 26.0);
    pub const START: Vec2 = Vec2::new(28.0, 3.0);
    pub const GOAL: Vec2 = Vec2::new(3.0, 19.0);

    pub fn door_center(door: (f64, f64), y: f64) -> Vec2 {
        Vec2::new(0.5 * (door.0 + door.1), y)
    }
}

fn horizontal_wall_with_gap(
    x0: f64,
    x1: f64,
    y: f64,
    gap: (f64, f64),
    thickness: f64,
) -> [Obstacle; 2] {
    [
        Obstacle::rect(x0, y, gap.0, y + thickness),
        Obstacle::rect(gap.1, y, x1, y + thickness),
    ]
}

/// Audience leaving an inner auditorium through two doors and the outer room
/// through a single main exit, with the heavier stream at the right door.
pub fn concert_hall() -> Scenario {
    use hall::*;
    let w = WALL;
    let mut obstacles = Vec::new();
    // Outer room walls; the top wall carries the main exit.
    obstacles.push(Obstacle::rect(
        OUTER.min.x - w,
        OUTER.min.y - w,
        OUTER.max.x + w,
        OUTER.min.y,
    ));
    obstacles.push(Obstacle::rect(
        OUTER.min.x - w,
        OUTER.min.y,
        OUTER.min.x,
        OUTER.max.y,
    ));
    obstacles.push(Obstacle::rect(
        OUTER.max.x,
        OUTER.min.y,
        OUTER.max.x + w,
        OUTER.max.y,
    ));
    obstacles.extend(horizontal_wall_with_gap(
        OUTER.min.x - w,
        OUTER.max.x + w,
        OUTER.max.y,
        MAIN_EXIT,
        w,
    ));
    // Inner room walls; the top wall carries both doors.
    obstacles.push(Obstacle::rect(
        INNER.min.x - w,
        INNER.min.y - w,
        INNER.max.x + w,
        INNER.min.y,
    ));
    obstacles.push(Obstacle::rect(
        INNER.min.x - w,
        INNER.min.y,
        INNER.min.x,
        INNER.max.y,
    ));
    obstacles.push(Obstacle::rect(
        INNER.max.x,
        INNER.min.y,
        INNER.max.x + w,
        INNER.max.y,
    ));
    let top = INNER.max.y;
    obstacles.push(Obstacle::rect(INNER.min.x - w, top, LEFT_DOOR.0, top + w));
    obstacles.push(Obstacle::rect(LEFT_DOOR.1, top, RIGHT_DOOR.0, top + w));
    obstacles.push(Obstacle::rect(RIGHT_DOOR.1, top, INNER.max.x + w, top + w));
    let env = Environment::new(BOUNDS, obstacles, SpeedLimits::default()).expect("valid hall");

    let door_y = top + 0.5 * w;
    let left_door = door_center(LEFT_DOOR, door_y);
    let right_door = door_center(RIGHT_DOOR, door_y);
    let exit = door_center(MAIN_EXIT, OUTER.max.y + 0.5 * w);
    // Streams aim past the door so velocity stays outward inside the gap.
    let beyond_left = left_door + Vec2::new(0.0, 1.5);
    let beyond_right = right_door + Vec2::new(0.0, 1.5);
    let beyond_exit = exit + Vec2::new(0.0, 2.0);
    let bump = |peak: f64, center: Vec2, std: f64| ScalarField::GaussianBump {
        floor: 0.0,
        peak,
        center,
        std,
    };
    let stream = |density: ScalarField, target: Vec2, speed: f64, variance: f64| {
        ComponentFlow::new(density, VectorField::Sink { target, speed })
            .with_variance(constant(variance))
    };
    let components = vec![
        // Audience inside the auditorium drifting to either door.
        stream(bump(0.6, Vec2::new(9.0, 10.5), 2.5), beyond_left, 0.6, 0.2),
        stream(
            bump(1.0, Vec2::new(16.5, 10.5), 2.5),
            beyond_right,
            0.6,
            0.2,
        ),
        // Queues at the doors.
        stream(bump(0.9, left_door, 1.2), beyond_left, 0.8, 0.15),
        stream(bump(1.8, right_door, 1.4), beyond_right, 0.8, 0.15),
        // Streams from each door across the foyer to the main exit.
        stream(bump(0.5, Vec2::new(13.0, 17.5), 2.2), beyond_exit, 1.0, 0.2),
        stream(bump(1.1, Vec2::new(20.5, 17.5), 2.0), beyond_exit, 1.1, 0.2),
        // Crowd converging on the main exit.
        stream(
            bump(2.0, Vec2::new(exit.x, OUTER.max.y - 1.0), 1.8),
            beyond_exit,
            1.0,
            0.1,
        ),
        // Stragglers everywhere.
        stream(constant(0.05), beyond_exit, 0.3, 0.3),
    ];
    assemble("concert-hall", env, components, START, GOAL)
}
