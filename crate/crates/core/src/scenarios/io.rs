//! JSON scenario documents.
//!
//! ```json
//! {
//!   "version": 1,
//!   "name": "density",
//!   "bounds": {"min": {"x": 0.0, "y": 0.0}, "max": {"x": 20.0, "y": 20.0}},
//!   "obstacles": [{"shape": "circle", "center": {"x": 5.0, "y": 5.0}, "radius": 1.0}],
//!   "limits": {"v_min": 0.1, "v_max": 2.0},
//!   "flow": {"components": [...]} | {"grid": {...}},
//!   "start": {"x": 2.0, "y": 10.0},
//!   "goal": {"x": 18.0, "y": 10.0},
//!   "defaults": {"samples": 2000, "seed": 0, "quadrature_step": 0.05}
//! }
//! ```
//!
//! All quantities are SI. Grid node arrays are row-major with x varying
//! fastest. The pretty-printed output of [`to_canonical_json`] is the
//! canonical form: loading and re-saving it reproduces the same bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowfield::{CrowdFlow, FlowSource};
use crate::geom::{Rect, Vec2};
use crate::invasiveness::SpeedLimits;
use crate::roadmap::{Environment, Obstacle};

use super::{PlannerDefaults, Scenario};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    version: u32,
    name: String,
    bounds: Rect,
    #[serde(default)]
    obstacles: Vec<Obstacle>,
    #[serde(default)]
    limits: SpeedLimits,
    flow: FlowSource,
    start: Vec2,
    goal: Vec2,
    #[serde(default)]
    defaults: PlannerDefaults,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => {
                out.push('/');
                out.push_str(&key.replace('~', "~0").replace('/', "~1"));
            }
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

fn validate_flow(source: &FlowSource) -> Result<()> {
    match source {
        FlowSource::Components(components) => {
            if components.is_empty() {
                return Err(Error::validation(
                    "/flow/components",
                    "needs at least one component",
                ));
            }
            for (i, c) in components.iter().enumerate() {
                c.validate().map_err(|(member, field, msg)| {
                    Error::validation(format!("/flow/components/{i}/{member}/{field}"), msg)
                })?;
            }
        }
        FlowSource::Grid(grid) => {
            grid.validate()
                .map_err(|(field, msg)| Error::validation(format!("/flow/grid/{field}"), msg))?;
        }
    }
    Ok(())
}

/// Parses and validates a scenario document.
pub fn parse(text: &str) -> Result<Scenario> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        pointer: pointer(e.path()),
        message: e.inner().to_string(),
    })?;
    if doc.version != SCHEMA_VERSION {
        return Err(Error::validation(
            "/version",
            format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                doc.version
            ),
        ));
    }
    validate_flow(&doc.flow)?;
    let environment = Environment {
        bounds: doc.bounds,
        obstacles: doc.obstacles,
        limits: doc.limits,
    };
    environment.validate()?;
    let flow = CrowdFlow::new(doc.bounds, doc.flow)
        .map_err(|e| Error::validation("/flow", e.to_string()))?;
    let scenario = Scenario {
        name: doc.name,
        environment,
        flow,
        start: doc.start,
        goal: doc.goal,
        defaults: doc.defaults,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Canonical pretty-printed JSON, terminated by a newline.
pub fn to_canonical_json(scenario: &Scenario) -> String {
    let doc = ScenarioDoc {
        version: SCHEMA_VERSION,
        name: scenario.name.clone(),
        bounds: scenario.environment.bounds,
        obstacles: scenario.environment.obstacles.clone(),
        limits: scenario.environment.limits,
        flow: scenario.flow.source().clone(),
        start: scenario.start,
        goal: scenario.goal,
        defaults: scenario.defaults,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("scenario serializes");
    text.push('\n');
    text
}

pub fn load(path: impl AsRef<Path>) -> Result<Scenario> {
    parse(&std::fs::read_to_string(path)?)
}

pub fn save(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_canonical_json(scenario))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowfield::GridField;
    use crate::scenarios::{builtin, density_scenario, BUILTIN_NAMES};

    #[test]
    fn builtins_round_trip_byte_identical() {
        for name in BUILTIN_NAMES {
            let sc = builtin(name).unwrap();
            let text = to_canonical_json(&sc);
            let back = parse(&text).unwrap();
            assert_eq!(back, sc);
            assert_eq!(to_canonical_json(&back), text);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("density.json");
        let sc = density_scenario();
        save(&sc, &path).unwrap();
        assert_eq!(load(&path).unwrap(), sc);
    }

    #[test]
    fn grid_flow_round_trip() {
        let mut sc = density_scenario();
        sc.flow = sc.flow.baked(1.0).unwrap();
        let text = to_canonical_json(&sc);
        assert!(text.contains("\"grid\""));
        let back = parse(&text).unwrap();
        assert_eq!(back, sc);
        assert_eq!(to_canonical_json(&back), text);
    }

    fn mutate(f: impl FnOnce(&mut serde_json::Value)) -> String {
        let mut v: serde_json::Value =
            serde_json::from_str(&to_canonical_json(&density_scenario())).unwrap();
        f(&mut v);
        v.to_string()
    }

    #[test]
    fn negative_variance_names_field() {
        let text = mutate(|v| v["flow"]["components"][0]["variance"]["value"] = (-0.1).into());
        let err = parse(&text).unwrap_err();
        match err {
            Error::Validation { pointer, .. } => {
                assert_eq!(pointer, "/flow/components/0/variance/value")
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn negative_grid_density_names_node() {
        let mut sc = density_scenario();
        sc.flow = sc.flow.baked(5.0).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&to_canonical_json(&sc)).unwrap();
        v["flow"]["grid"]["density"][3] = (-1.0).into();
        match parse(&v.to_string()).unwrap_err() {
            Error::Validation { pointer, .. } => assert_eq!(pointer, "/flow/grid/density/3"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn start_inside_obstacle_rejected() {
        let text = mutate(|v| {
            v["obstacles"] = serde_json::json!([
                {"shape": "circle", "center": {"x": 2.0, "y": 10.0}, "radius": 1.0}
            ])
        });
        match parse(&text).unwrap_err() {
            Error::Validation { pointer, message } => {
                assert_eq!(pointer, "/start");
                assert!(message.contains("obstacle"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn schema_violation_reports_pointer() {
        let text = mutate(|v| {
            v["obstacles"] =
                serde_json::json!([{"shape": "circle", "center": {"x": 1.0}, "radius": 1.0}])
        });
        match parse(&text).unwrap_err() {
            Error::Parse { pointer, message } => {
                // Tagged enums are buffered, so the pointer stops at the obstacle.
                assert_eq!(pointer, "/obstacles/0");
                assert!(message.contains("missing field `y`"), "{message}");
            }
            other => panic!("unexpected {other}"),
        }
        let text = mutate(|v| v["start"]["x"] = "left".into());
        match parse(&text).unwrap_err() {
            Error::Parse { pointer, .. } => assert_eq!(pointer, "/start/x"),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let text = mutate(|v| v["version"] = 7.into());
        assert!(
            matches!(parse(&text), Err(Error::Validation { ref pointer, .. }) if pointer == "/version")
        );
    }

    #[test]
    fn mismatched_grid_shape_rejected() {
        let grid = GridField::bake(
            &density_scenario().flow,
            Rect::from_coords(0.0, 0.0, 20.0, 20.0),
            10.0,
        )
        .unwrap();
        let mut v = serde_json::to_value(&grid).unwrap();
        v["nx"] = 5.into();
        let text = mutate(|d| d["flow"] = serde_json::json!({ "grid": v }));
        match parse(&text).unwrap_err() {
            Error::Validation { pointer, .. } => assert_eq!(pointer, "/flow/grid/density"),
            other => panic!("unexpected {other}"),
        }
    }
}
