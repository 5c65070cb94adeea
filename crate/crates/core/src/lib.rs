//! Minimally invasive robot navigation through crowds modelled as
//! stochastic flow fields.
//!
//! * [`flowfield`]: crowd density, mean velocity and velocity variance fields.
//! * [`invasiveness`]: instantaneous invasiveness, the minimally invasive
//!   speed, and line-integral edge costs.
//! * [`roadmap`]: PRM* roadmaps, Dijkstra trees, social and naive plans.
//! * [`scenarios`]: the built-in experiments and the scenario file format.
//! * [`oracle`]: dense-lattice Dijkstra used to validate roadmap plans.

pub mod error;
pub mod flowfield;
pub mod geom;
pub mod invasiveness;
pub mod oracle;
pub mod roadmap;
pub mod scenarios;

pub use error::{Error, NoPathDiagnostics, Result};
pub use flowfield::{
    ComponentFlow, CrowdFlow, FlowField, FlowSample, FlowSource, GridField, ScalarField,
    VectorField,
};
pub use geom::{Rect, Vec2};
pub use invasiveness::{EdgeCost, SpeedLimits};
pub use roadmap::{
    EdgeWeight, Environment, Obstacle, PlanResult, PlannerConfig, Roadmap, ShortestPathTree,
};
pub use scenarios::Scenario;
