//! Macroscopic crowd representation: stochastic flow fields.
//!
//! A crowd is described at every point `x` of the workspace by a
//! [`FlowSample`]: the expected pedestrian density, the mean pedestrian
//! velocity, and the scalar velocity variance `E|V - E V|^2`. Fields are
//! built either from analytic [`ComponentFlow`]s mixed by density, or from a
//! bilinearly interpolated [`GridField`].
//!
//! Every field is immutable once constructed, so sampling is safe from any
//! number of threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Rect, Vec2};

/// Default upper bound on the number of nodes [`GridField::bake`] may allocate.
pub const DEFAULT_GRID_NODE_CAP: usize = 4_000_000;

/// Crowd state at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    /// Pedestrians per square meter.
    pub density: f64,
    /// Mean pedestrian velocity in m/s.
    pub mean_velocity: Vec2,
    /// Scalar velocity variance in m^2/s^2.
    pub variance: f64,
}

impl FlowSample {
    /// Empty space.
    pub const ZERO: FlowSample = FlowSample {
        density: 0.0,
        mean_velocity: Vec2::ZERO,
        variance: 0.0,
    };

    pub fn new(density: f64, mean_velocity: Vec2, variance: f64) -> Self {
        Self {
            density,
            mean_velocity,
            variance,
        }
    }

    /// Clamps density and variance at zero; interpolation and moment
    /// arithmetic can leave tiny negative residues.
    pub fn clamped(self) -> Self {
        Self {
            density: self.density.max(0.0),
            mean_velocity: self.mean_velocity,
            variance: self.variance.max(0.0),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.density.is_finite()
            && self.variance.is_finite()
            && self.mean_velocity.is_finite()
            && self.density >= 0.0
            && self.variance >= 0.0
    }

    /// Second raw moment of the velocity distribution, `|V̄|² + σ²`.
    pub fn speed_moment(&self) -> f64 {
        self.mean_velocity.norm_squared() + self.variance
    }
}

/// Anything that can be queried for the crowd state at a point.
pub trait FlowField: Sync {
    fn sample(&self, x: Vec2) -> FlowSample;
}

impl<F: FlowField + ?Sized> FlowField for &F {
    fn sample(&self, x: Vec2) -> FlowSample {
        (**self).sample(x)
    }
}

/// Analytic scalar field used for component densities and variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarField {
    Constant {
        value: f64,
    },
    /// Isotropic Gaussian: `floor + (peak - floor) * exp(-|x - center|² / (2 std²))`.
    /// `peak` is the value attained at the center.
    GaussianBump {
        floor: f64,
        peak: f64,
        center: Vec2,
        std: f64,
    },
    /// Linear interpolation between `start_value` at `from` and `end_value` at
    /// `to`, measured along the `from -> to` axis and held constant beyond.
    LinearRamp {
        from: Vec2,
        to: Vec2,
        start_value: f64,
        end_value: f64,
    },
    /// `value` inside the closed `region`, zero elsewhere.
    Box {
        region: Rect,
        value: f64,
    },
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField::Constant { value: 0.0 }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        match *self {
            ScalarField::Constant { value } => value,
            ScalarField::GaussianBump {
                floor,
                peak,
                center,
                std,
            } => {
                let r2 = (x - center).norm_squared();
                floor + (peak - floor) * (-r2 / (2.0 * std * std)).exp()
            }
            ScalarField::LinearRamp {
                from,
                to,
                start_value,
                end_value,
            } => {
                let axis = to - from;
                let t = ((x - from).dot(axis) / axis.norm_squared()).clamp(0.0, 1.0);
                start_value + (end_value - start_value) * t
            }
            ScalarField::Box { region, value } => {
                if region.contains(x) {
                    value
                } else {
                    0.0
                }
            }
        }
    }

    /// Checks that the field is well defined and nonnegative everywhere.
    /// Errors carry the offending member name.
    pub fn validate_nonnegative(&self) -> Result<(), (&'static str, String)> {
        let nonneg = |name: &'static str, v: f64| {
            if !v.is_finite() {
                Err((name, format!("must be finite, got {v}")))
            } else if v < 0.0 {
                Err((name, format!("must be nonnegative, got {v}")))
            } else {
                Ok(())
            }
        };
        match *self {
            ScalarField::Constant { value } => nonneg("value", value),
            ScalarField::GaussianBump {
                floor,
                peak,
                center,
                std,
            } => {
                nonneg("floor", floor)?;
                nonneg("peak", peak)?;
                if !center.is_finite() {
                    return Err(("center", "must be finite".into()));
                }
                if !(std.is_finite() && std > 0.0) {
                    return Err(("std", format!("must be positive, got {std}")));
                }
                Ok(())
            }
            ScalarField::LinearRamp {
                from,
                to,
                start_value,
                end_value,
            } => {
                nonneg("start_value", start_value)?;
                nonneg("end_value", end_value)?;
                if !(from.is_finite() && to.is_finite()) || from == to {
                    return Err(("to", "ramp axis must have nonzero finite length".into()));
                }
                Ok(())
            }
            ScalarField::Box { region, value } => {
                if !region.is_proper() {
                    return Err(("region", "must be a non-degenerate rectangle".into()));
                }
                nonneg("value", value)
            }
        }
    }
}

impl Default for ScalarField {
    fn default() -> Self {
        ScalarField::zero()
    }
}

/// Analytic velocity field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VectorField {
    Constant {
        value: Vec2,
    },
    /// Solid-body rotation: `ω · (-(y - c_y), x - c_x)`.
    Vortex {
        center: Vec2,
        angular_rate: f64,
    },
    /// Tangential flow of constant magnitude about `center`, counter-clockwise
    /// for positive `speed`. Zero at the center itself.
    Circulation {
        center: Vec2,
        speed: f64,
    },
    /// Flow of constant magnitude towards `target`. Zero at the target itself.
    Sink {
        target: Vec2,
        speed: f64,
    },
}

impl VectorField {
    pub fn eval(&self, x: Vec2) -> Vec2 {
        match *self {
            VectorField::Constant { value } => value,
            VectorField::Vortex {
                center,
                angular_rate,
            } => (x - center).perp() * angular_rate,
            VectorField::Circulation { center, speed } => match (x - center).normalized() {
                Some(radial) => radial.perp() * speed,
                None => Vec2::ZERO,
            },
            VectorField::Sink { target, speed } => match (target - x).normalized() {
                Some(dir) => dir * speed,
                None => Vec2::ZERO,
            },
        }
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        let finite = |name: &'static str, ok: bool| {
            if ok {
                Ok(())
            } else {
                Err((name, "must be finite".to_string()))
            }
        };
        match *self {
            VectorField::Constant { value } => finite("value", value.is_finite()),
            VectorField::Vortex {
                center,
                angular_rate,
            } => {
                finite("center", center.is_finite())?;
                finite("angular_rate", angular_rate.is_finite())
            }
            VectorField::Circulation { center, speed } => {
                finite("center", center.is_finite())?;
                finite("speed", speed.is_finite())
            }
            VectorField::Sink { target, speed } => {
                finite("target", target.is_finite())?;
                finite("speed", speed.is_finite())
            }
        }
    }
}

/// One pedestrian population: a density, a velocity, and an optional
/// velocity variance (zero for deterministic components).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFlow {
    pub density: ScalarField,
    pub velocity: VectorField,
    #[serde(default)]
    pub variance: ScalarField,
}

impl ComponentFlow {
    pub fn new(density: ScalarField, velocity: VectorField) -> Self {
        Self {
            density,
            velocity,
            variance: ScalarField::zero(),
        }
    }

    pub fn with_variance(mut self, variance: ScalarField) -> Self {
        self.variance = variance;
        self
    }

    /// Returns `(member, field, message)` for the first invalid parameter.
    pub fn validate(&self) -> Result<(), (&'static str, &'static str, String)> {
        self.density
            .validate_nonnegative()
            .map_err(|(f, m)| ("density", f, m))?;
        self.velocity
            .validate()
            .map_err(|(f, m)| ("velocity", f, m))?;
        self.variance
            .validate_nonnegative()
            .map_err(|(f, m)| ("variance", f, m))
    }
}

impl FlowField for ComponentFlow {
    fn sample(&self, x: Vec2) -> FlowSample {
        FlowSample::new(
            self.density.eval(x),
            self.velocity.eval(x),
            self.variance.eval(x),
        )
        .clamped()
    }
}

/// Density-weighted moment mixture of co-located crowd samples.
///
/// Total density is the sum of the component densities; the mean velocity and
/// the second raw moment `E|V|²` are density-weighted averages, and the
/// variance is `E|V|² - |V̄|²`. A single sample is returned unchanged and an
/// empty crowd (`ρ = 0`) yields [`FlowSample::ZERO`].
pub fn mix_samples(samples: &[FlowSample]) -> Result<FlowSample> {
    match samples {
        [] => Err(Error::Config("mixture needs at least one component".into())),
        [single] => Ok(single.clamped()),
        _ => {
            let mut density = 0.0;
            let mut momentum = Vec2::ZERO;
            let mut second_moment = 0.0;
            for s in samples {
                density += s.density;
                momentum += s.mean_velocity * s.density;
                second_moment += s.density * s.speed_moment();
            }
            if density <= 0.0 {
                return Ok(FlowSample::ZERO);
            }
            let mean = momentum / density;
            let variance = second_moment / density - mean.norm_squared();
            Ok(FlowSample::new(density, mean, variance).clamped())
        }
    }
}

/// Samples every component at `x` and mixes them with [`mix_samples`].
pub fn mixture(components: &[ComponentFlow], x: Vec2) -> Result<FlowSample> {
    if components.is_empty() {
        return Err(Error::Config("mixture needs at least one component".into()));
    }
    Ok(mix_components(components, x))
}

// Non-empty slice guaranteed by callers.
fn mix_components(components: &[ComponentFlow], x: Vec2) -> FlowSample {
    if let [single] = components {
        return single.sample(x);
    }
    let mut density = 0.0;
    let mut momentum = Vec2::ZERO;
    let mut second_moment = 0.0;
    for c in components {
        let s = c.sample(x);
        density += s.density;
        momentum += s.mean_velocity * s.density;
        second_moment += s.density * s.speed_moment();
    }
    if density <= 0.0 {
        return FlowSample::ZERO;
    }
    let mean = momentum / density;
    FlowSample::new(density, mean, second_moment / density - mean.norm_squared()).clamped()
}

/// Flow field sampled on a regular lattice and bilinearly interpolated.
///
/// Node `(i, j)` sits at `origin + (i, j) * cell_size`; node arrays are stored
/// row-major with `x` varying fastest (index `j * nx + i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    origin: Vec2,
    cell_size: f64,
    nx: usize,
    ny: usize,
    density: Vec<f64>,
    velocity_x: Vec<f64>,
    velocity_y: Vec<f64>,
    variance: Vec<f64>,
}

impl GridField {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        origin: Vec2,
        cell_size: f64,
        nx: usize,
        ny: usize,
        density: Vec<f64>,
        velocity_x: Vec<f64>,
        velocity_y: Vec<f64>,
        variance: Vec<f64>,
    ) -> Result<Self> {
        let grid = Self {
            origin,
            cell_size,
            nx,
            ny,
            density,
            velocity_x,
            velocity_y,
            variance,
        };
        grid.validate()
            .map_err(|(field, msg)| Error::validation(format!("/{field}"), msg))?;
        Ok(grid)
    }

    /// Checks structural and physical invariants, returning the offending
    /// member name (or `member/index`) on failure.
    pub fn validate(&self) -> Result<(), (String, String)> {
        if !self.origin.is_finite() {
            return Err(("origin".into(), "must be finite".into()));
        }
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return Err((
                "cell_size".into(),
                format!("must be positive, got {}", self.cell_size),
            ));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err((
                "nx".into(),
                format!("grid needs at least 2x2 nodes, got {}x{}", self.nx, self.ny),
            ));
        }
        let count = self.nx * self.ny;
        let arrays: [(&str, &Vec<f64>, bool); 4] = [
            ("density", &self.density, true),
            ("velocity_x", &self.velocity_x, false),
            ("velocity_y", &self.velocity_y, false),
            ("variance", &self.variance, true),
        ];
        for (name, values, nonneg) in arrays {
            if values.len() != count {
                return Err((
                    name.into(),
                    format!("expected {count} values (nx*ny), got {}", values.len()),
                ));
            }
            for (i, &v) in values.iter().enumerate() {
                if !v.is_finite() {
                    return Err((format!("{name}/{i}"), format!("must be finite, got {v}")));
                }
                if nonneg && v < 0.0 {
                    return Err((
                        format!("{name}/{i}"),
                        format!("must be nonnegative, got {v}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Samples `flow` at every node of a lattice covering `bounds`.
    pub fn bake(flow: &impl FlowField, bounds: Rect, cell_size: f64) -> Result<Self> {
        Self::bake_with_cap(flow, bounds, cell_size, DEFAULT_GRID_NODE_CAP)
    }

    pub fn bake_with_cap(
        flow: &impl FlowField,
        bounds: Rect,
        cell_size: f64,
        node_cap: usize,
    ) -> Result<Self> {
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(Error::Config(format!(
                "cell size must be positive, got {cell_size}"
            )));
        }
        if !bounds.is_proper() {
            return Err(Error::Config("bake bounds are degenerate".into()));
        }
        // Tolerance keeps exact multiples of the cell size from gaining a column.
        let cells = |extent: f64| ((extent / cell_size) - 1e-9).ceil().max(1.0);
        let (cx, cy) = (cells(bounds.width()), cells(bounds.height()));
        let requested = (cx + 1.0) * (cy + 1.0);
        if !requested.is_finite() || requested > node_cap as f64 {
            return Err(Error::Resource {
                requested: if requested.is_finite() {
                    requested as usize
                } else {
                    usize::MAX
                },
                cap: node_cap,
            });
        }
        let (nx, ny) = (cx as usize + 1, cy as usize + 1);
        let count = nx * ny;
        let mut density = Vec::with_capacity(count);
        let mut velocity_x = Vec::with_capacity(count);
        let mut velocity_y = Vec::with_capacity(count);
        let mut variance = Vec::with_capacity(count);
        for j in 0..ny {
            for i in 0..nx {
                let p = bounds.min + Vec2::new(i as f64, j as f64) * cell_size;
                let s = flow.sample(p);
                density.push(s.density);
                velocity_x.push(s.mean_velocity.x);
                velocity_y.push(s.mean_velocity.y);
                variance.push(s.variance);
            }
        }
        Ok(Self {
            origin: bounds.min,
            cell_size,
            nx,
            ny,
            density,
            velocity_x,
            velocity_y,
            variance,
        })
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn node_position(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64, j as f64) * self.cell_size
    }

    /// Stored values at node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> FlowSample {
        let k = j * self.nx + i;
        FlowSample::new(
            self.density[k],
            Vec2::new(self.velocity_x[k], self.velocity_y[k]),
            self.variance[k],
        )
    }

    /// Rectangle spanned by the lattice nodes.
    pub fn extent(&self) -> Rect {
        Rect::new(self.origin, self.node_position(self.nx - 1, self.ny - 1))
    }
}

impl FlowField for GridField {
    fn sample(&self, x: Vec2) -> FlowSample {
        let u = (x.x - self.origin.x) / self.cell_size;
        let v = (x.y - self.origin.y) / self.cell_size;
        let (max_u, max_v) = ((self.nx - 1) as f64, (self.ny - 1) as f64);
        // Negated comparisons also reject NaN.
        if !(u >= 0.0 && u <= max_u && v >= 0.0 && v <= max_v) {
            return FlowSample::ZERO;
        }
        let i = (u.floor() as usize).min(self.nx - 2);
        let j = (v.floor() as usize).min(self.ny - 2);
        let (tx, ty) = (u - i as f64, v - j as f64);
        let k00 = j * self.nx + i;
        let k10 = k00 + 1;
        let k01 = k00 + self.nx;
        let k11 = k01 + 1;
        let lerp2 = |a: &[f64]| {
            let bottom = a[k00] + (a[k10] - a[k00]) * tx;
            let top = a[k01] + (a[k11] - a[k01]) * tx;
            bottom + (top - bottom) * ty
        };
        FlowSample::new(
            lerp2(&self.density),
            Vec2::new(lerp2(&self.velocity_x), lerp2(&self.velocity_y)),
            lerp2(&self.variance),
        )
        .clamped()
    }
}

/// Where a [`CrowdFlow`] gets its values from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowSource {
    /// Density-weighted mixture of analytic components.
    Components(Vec<ComponentFlow>),
    Grid(GridField),
}

/// A stochastic crowd flow restricted to a rectangular workspace. Queries
/// outside the workspace see empty space.
#[derive(Debug, Clone, PartialEq)]
pub struct CrowdFlow {
    bounds: Rect,
    source: FlowSource,
}

impl CrowdFlow {
    pub fn new(bounds: Rect, source: FlowSource) -> Result<Self> {
        if !bounds.is_proper() {
            return Err(Error::Config("workspace bounds are degenerate".into()));
        }
        match &source {
            FlowSource::Components(c) if c.is_empty() => {
                return Err(Error::Config("mixture needs at least one component".into()))
            }
            FlowSource::Components(c) => {
                for (i, comp) in c.iter().enumerate() {
                    comp.validate().map_err(|(member, field, msg)| {
                        Error::Config(format!("component {i} {member}.{field}: {msg}"))
                    })?;
                }
            }
            FlowSource::Grid(g) => {
                g.validate()
                    .map_err(|(field, msg)| Error::Config(format!("grid {field}: {msg}")))?;
            }
        }
        Ok(Self { bounds, source })
    }

    /// Mixture of analytic components.
    pub fn from_components(bounds: Rect, components: Vec<ComponentFlow>) -> Result<Self> {
        Self::new(bounds, FlowSource::Components(components))
    }

    /// Single homogeneous component everywhere in `bounds`.
    pub fn uniform(bounds: Rect, density: f64, mean_velocity: Vec2, variance: f64) -> Result<Self> {
        Self::from_components(
            bounds,
            vec![ComponentFlow::new(
                ScalarField::Constant { value: density },
                VectorField::Constant {
                    value: mean_velocity,
                },
            )
            .with_variance(ScalarField::Constant { value: variance })],
        )
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn source(&self) -> &FlowSource {
        &self.source
    }

    /// Replaces the analytic source with a baked lattice over the workspace.
    pub fn baked(&self, cell_size: f64) -> Result<CrowdFlow> {
        let grid = GridField::bake(self, self.bounds, cell_size)?;
        Ok(CrowdFlow {
            bounds: self.bounds,
            source: FlowSource::Grid(grid),
        })
    }
}

impl FlowField for CrowdFlow {
    fn sample(&self, x: Vec2) -> FlowSample {
        if !self.bounds.contains(x) {
            return FlowSample::ZERO;
        }
        match &self.source {
            FlowSource::Components(c) => mix_components(c, x),
            FlowSource::Grid(g) => g.sample(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds() -> Rect {
        Rect::from_coords(0.0, 0.0, 20.0, 20.0)
    }

    fn comp(density: f64, v: Vec2, var: f64) -> ComponentFlow {
        ComponentFlow::new(
            ScalarField::Constant { value: density },
            VectorField::Constant { value: v },
        )
        .with_variance(ScalarField::Constant { value: var })
    }

    fn bump() -> ScalarField {
        ScalarField::GaussianBump {
            floor: 0.5,
            peak: 1.5,
            center: Vec2::new(10.0, 10.0),
            std: 3.0,
        }
    }

    #[test]
    fn uniform_flow_interior_sample() {
        let flow = CrowdFlow::uniform(bounds(), 1.0, Vec2::new(1.0, 0.0), 0.25).unwrap();
        let s = flow.sample(Vec2::new(3.0, 17.0));
        assert_eq!(s, FlowSample::new(1.0, Vec2::new(1.0, 0.0), 0.25));
    }

    #[test]
    fn far_outside_workspace_is_empty() {
        let flow = CrowdFlow::uniform(bounds(), 1.0, Vec2::new(1.0, 0.0), 0.25).unwrap();
        assert_eq!(flow.sample(Vec2::new(1000.0, 10.0)), FlowSample::ZERO);
        assert_eq!(flow.sample(Vec2::new(10.0, -1000.0)), FlowSample::ZERO);
    }

    #[test]
    fn gaussian_bump_peak_and_floor() {
        let b = bump();
        assert_eq!(b.eval(Vec2::new(10.0, 10.0)), 1.5);
        assert!((b.eval(Vec2::new(10.0, 200.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn opposing_flows_mix_to_unit_variance() {
        let s = mixture(
            &[
                comp(1.0, Vec2::new(0.0, 1.0), 0.0),
                comp(1.0, Vec2::new(0.0, -1.0), 0.0),
            ],
            Vec2::new(5.0, 5.0),
        )
        .unwrap();
        assert_eq!(s, FlowSample::new(2.0, Vec2::ZERO, 1.0));
    }

    #[test]
    fn single_component_mixture_is_identity() {
        let c = comp(0.7, Vec2::new(1.0, 0.0), 0.2);
        let x = Vec2::new(1.0, 2.0);
        assert_eq!(mixture(std::slice::from_ref(&c), x).unwrap(), c.sample(x));
        assert_eq!(c.sample(x), FlowSample::new(0.7, Vec2::new(1.0, 0.0), 0.2));
    }

    #[test]
    fn three_component_mixture_matches_weighted_moments() {
        // Expected values from direct moment arithmetic: E|V|² = 3/4, V̄ = (0, -1/4).
        let s = mixture(
            &[
                comp(1.0, Vec2::new(0.0, 1.0), 0.0),
                comp(2.0, Vec2::new(0.0, -1.0), 0.0),
                comp(1.0, Vec2::ZERO, 0.0),
            ],
            Vec2::ZERO,
        )
        .unwrap();
        assert_eq!(s.density, 4.0);
        assert_eq!(s.mean_velocity, Vec2::new(0.0, -0.25));
        assert!((s.variance - 0.6875).abs() < 1e-15);
    }

    #[test]
    fn three_component_mixture_agrees_with_monte_carlo() {
        use rand::{Rng, SeedableRng};
        // Draw a pedestrian with probability ∝ ρᵢ, then its velocity.
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let weights = [1.0, 2.0, 1.0];
        let vels = [Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0), Vec2::ZERO];
        let n = 400_000;
        let mut draws = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.random::<f64>() * 4.0;
            let k = if u < weights[0] {
                0
            } else if u < weights[0] + weights[1] {
                1
            } else {
                2
            };
            draws.push(vels[k]);
        }
        let mean = draws.iter().fold(Vec2::ZERO, |acc, &v| acc + v) / n as f64;
        let var = draws
            .iter()
            .map(|&v| (v - mean).norm_squared())
            .sum::<f64>()
            / n as f64;
        assert!((mean.y + 0.25).abs() < 5e-3);
        assert!((var - 0.6875).abs() < 5e-3);
    }

    #[test]
    fn empty_mixture_is_config_error() {
        assert!(matches!(mixture(&[], Vec2::ZERO), Err(Error::Config(_))));
        assert!(matches!(mix_samples(&[]), Err(Error::Config(_))));
        assert!(CrowdFlow::from_components(bounds(), vec![]).is_err());
    }

    #[test]
    fn zero_density_mixture_is_zero_sample() {
        let s = mixture(
            &[
                comp(0.0, Vec2::new(3.0, 0.0), 1.0),
                comp(0.0, Vec2::new(0.0, 1.0), 0.0),
            ],
            Vec2::ZERO,
        )
        .unwrap();
        assert_eq!(s, FlowSample::ZERO);
    }

    #[test]
    fn mix_samples_matches_component_mixture() {
        let comps = [
            comp(1.0, Vec2::new(0.3, 1.0), 0.1),
            comp(2.5, Vec2::new(-1.0, 0.2), 0.4),
        ];
        let x = Vec2::new(1.0, 1.0);
        let samples: Vec<_> = comps.iter().map(|c| c.sample(x)).collect();
        assert_eq!(mix_samples(&samples).unwrap(), mixture(&comps, x).unwrap());
    }

    #[test]
    fn vortex_is_solid_rotation() {
        let v = VectorField::Vortex {
            center: Vec2::new(1.0, 1.0),
            angular_rate: 2.0,
        };
        assert_eq!(v.eval(Vec2::new(2.0, 1.0)), Vec2::new(0.0, 2.0));
        assert_eq!(v.eval(Vec2::new(1.0, 3.0)), Vec2::new(-4.0, 0.0));
    }

    #[test]
    fn circulation_and_sink_vanish_at_their_center() {
        let c = Vec2::new(4.0, 4.0);
        assert_eq!(
            VectorField::Circulation {
                center: c,
                speed: 1.0
            }
            .eval(c),
            Vec2::ZERO
        );
        assert_eq!(
            VectorField::Sink {
                target: c,
                speed: 1.0
            }
            .eval(c),
            Vec2::ZERO
        );
        let s = VectorField::Sink {
            target: c,
            speed: 2.0,
        }
        .eval(Vec2::new(4.0, 0.0));
        assert_eq!(s, Vec2::new(0.0, 2.0));
    }

    #[test]
    fn ramp_holds_constant_past_its_ends() {
        let r = ScalarField::LinearRamp {
            from: Vec2::new(0.0, 0.0),
            to: Vec2::new(10.0, 0.0),
            start_value: 1.0,
            end_value: 3.0,
        };
        assert_eq!(r.eval(Vec2::new(-5.0, 2.0)), 1.0);
        assert_eq!(r.eval(Vec2::new(5.0, 7.0)), 2.0);
        assert_eq!(r.eval(Vec2::new(50.0, 0.0)), 3.0);
    }

    #[test]
    fn negative_component_parameters_rejected() {
        let c = comp(1.0, Vec2::ZERO, -0.1);
        let err = CrowdFlow::from_components(bounds(), vec![c]).unwrap_err();
        assert!(err.to_string().contains("variance"), "{err}");
    }

    fn small_grid() -> GridField {
        // 2x2 nodes, density (0,0) on the bottom row and (1,1) on top.
        GridField::new(
            Vec2::ZERO,
            1.0,
            2,
            2,
            vec![0.0, 0.0, 1.0, 1.0],
            vec![1.0, 2.0, 3.0, 4.0],
            vec![0.0; 4],
            vec![0.5, 0.5, 0.5, 0.5],
        )
        .unwrap()
    }

    #[test]
    fn grid_sample_reproduces_nodes() {
        let g = small_grid();
        for j in 0..2 {
            for i in 0..2 {
                assert_eq!(g.sample(g.node_position(i, j)), g.node(i, j));
            }
        }
    }

    #[test]
    fn grid_sample_cell_center_is_bilinear_midpoint() {
        let s = small_grid().sample(Vec2::new(0.5, 0.5));
        assert_eq!(s.density, 0.5);
        assert_eq!(s.mean_velocity.x, 2.5);
    }

    #[test]
    fn grid_sample_outside_is_zero() {
        let g = small_grid();
        assert_eq!(g.sample(Vec2::new(-0.01, 0.5)), FlowSample::ZERO);
        assert_eq!(g.sample(Vec2::new(0.5, 1.01)), FlowSample::ZERO);
        assert_eq!(g.sample(Vec2::new(f64::NAN, 0.5)), FlowSample::ZERO);
    }

    #[test]
    fn grid_rejects_bad_shapes_and_negative_values() {
        let err = GridField::new(
            Vec2::ZERO,
            1.0,
            2,
            2,
            vec![0.0; 3],
            vec![0.0; 4],
            vec![0.0; 4],
            vec![0.0; 4],
        )
        .unwrap_err();
        assert!(err.to_string().contains("density"));
        let err = GridField::new(
            Vec2::ZERO,
            1.0,
            2,
            2,
            vec![0.0; 4],
            vec![0.0; 4],
            vec![0.0; 4],
            vec![0.0, -0.1, 0.0, 0.0],
        )
        .unwrap_err();
        assert!(err.to_string().contains("/variance/1"), "{err}");
    }

    #[test]
    fn bake_round_trips_at_nodes() {
        let flow = CrowdFlow::from_components(
            bounds(),
            vec![ComponentFlow::new(
                bump(),
                VectorField::Vortex {
                    center: Vec2::new(10.0, 10.0),
                    angular_rate: 0.1,
                },
            )],
        )
        .unwrap();
        let grid = GridField::bake(&flow, bounds(), 0.5).unwrap();
        assert_eq!(grid.dims(), (41, 41));
        for j in (0..41).step_by(7) {
            for i in (0..41).step_by(5) {
                let p = grid.node_position(i, j);
                assert_eq!(grid.sample(p), flow.sample(p));
            }
        }
    }

    #[test]
    fn bake_uniform_gives_identical_nodes() {
        let flow = CrowdFlow::uniform(bounds(), 0.8, Vec2::new(0.2, -0.1), 0.3).unwrap();
        let grid = GridField::bake(&flow, bounds(), 1.0).unwrap();
        let first = grid.node(0, 0);
        let (nx, ny) = grid.dims();
        for j in 0..ny {
            for i in 0..nx {
                assert_eq!(grid.node(i, j), first);
            }
        }
    }

    #[test]
    fn bake_respects_node_cap() {
        let flow = CrowdFlow::uniform(bounds(), 1.0, Vec2::ZERO, 0.0).unwrap();
        let err = GridField::bake_with_cap(&flow, bounds(), 0.01, 10_000).unwrap_err();
        assert!(matches!(err, Error::Resource { cap: 10_000, .. }));
    }

    #[test]
    fn bake_bump_within_interpolation_error_bound() {
        use rand::{Rng, SeedableRng};
        let flow = CrowdFlow::from_components(
            bounds(),
            vec![ComponentFlow::new(
                bump(),
                VectorField::Constant { value: Vec2::ZERO },
            )],
        )
        .unwrap();
        let h = 0.1;
        let grid = GridField::bake(&flow, bounds(), h).unwrap();
        // Bilinear error ≤ h²/8 · (max|f_xx| + max|f_yy|); for a Gaussian of
        // amplitude A and std s, max|f_xx| = A / s².
        let amplitude = 1.0;
        let bound = h * h / 8.0 * 2.0 * amplitude / 9.0;
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = Vec2::new(rng.random_range(0.0..20.0), rng.random_range(0.0..20.0));
            worst = worst.max((grid.sample(p).density - flow.sample(p).density).abs());
        }
        assert!(worst <= bound, "worst {worst} > bound {bound}");
        assert!(worst > 0.0);
    }
}
