//! Static SVG figures: field heatmaps, quiver plots, trees and paths.

use std::fmt::Write;

use crowdflow::roadmap::Obstacle;
use crowdflow::{FlowField, Rect, Scenario, Vec2};

/// A drawable layer. Obstacles are always drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Layer {
    Density,
    Variance,
    Quiver,
    Tree,
    Social,
    Naive,
    Start,
    Goal,
}

impl Layer {
    pub const ALL: [Layer; 8] = [
        Layer::Density,
        Layer::Variance,
        Layer::Quiver,
        Layer::Tree,
        Layer::Social,
        Layer::Naive,
        Layer::Start,
        Layer::Goal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Density => "density",
            Layer::Variance => "variance",
            Layer::Quiver => "quiver",
            Layer::Tree => "tree",
            Layer::Social => "social",
            Layer::Naive => "naive",
            Layer::Start => "start",
            Layer::Goal => "goal",
        }
    }

    pub fn parse(s: &str) -> Option<Layer> {
        Layer::ALL.into_iter().find(|l| l.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colormap {
    Viridis,
    Magma,
    Gray,
}

impl Colormap {
    pub const NAMES: [&'static str; 3] = ["viridis", "magma", "gray"];

    pub fn parse(s: &str) -> Option<Colormap> {
        match s {
            "viridis" => Some(Colormap::Viridis),
            "magma" => Some(Colormap::Magma),
            "gray" | "grey" => Some(Colormap::Gray),
            _ => None,
        }
    }

    fn stops(self) -> &'static [[u8; 3]] {
        match self {
            Colormap::Viridis => &[
                [68, 1, 84],
                [72, 40, 120],
                [62, 74, 137],
                [49, 104, 142],
                [38, 130, 142],
                [31, 158, 137],
                [53, 183, 121],
                [110, 206, 88],
                [181, 222, 43],
                [253, 231, 37],
            ],
            Colormap::Magma => &[
                [0, 0, 4],
                [28, 16, 68],
                [79, 18, 123],
                [129, 37, 129],
                [181, 54, 122],
                [229, 80, 100],
                [251, 135, 97],
                [254, 194, 135],
                [252, 253, 191],
            ],
            Colormap::Gray => &[[20, 20, 20], [235, 235, 235]],
        }
    }

    /// Hex color for `t` in `[0, 1]`.
    pub fn color(self, t: f64) -> String {
        let stops = self.stops();
        let t = if t.is_finite() {
            t.clamp(0.0, 1.0)
        } else {
            0.0
        };
        let x = t * (stops.len() - 1) as f64;
        let k = (x.floor() as usize).min(stops.len() - 2);
        let f = x - k as f64;
        let c: Vec<u8> = (0..3)
            .map(|i| {
                (stops[k][i] as f64 + (stops[k + 1][i] as f64 - stops[k][i] as f64) * f).round()
                    as u8
            })
            .collect();
        format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
    }
}

/// Which layers to draw and how.
#[derive(Debug, Clone)]
pub struct RenderSpec {
    pub layers: Vec<Layer>,
    /// Width of the longer image side in pixels.
    pub size_px: u32,
    pub colormap: Colormap,
}

impl RenderSpec {
    pub fn new(layers: Vec<Layer>, size_px: u32, colormap: Colormap) -> anyhow::Result<Self> {
        if layers.is_empty() {
            anyhow::bail!(
                "at least one layer must be enabled (available: {})",
                layer_names()
            );
        }
        if size_px < 16 {
            anyhow::bail!("image size must be at least 16 px, got {size_px}");
        }
        Ok(Self {
            layers,
            size_px,
            colormap,
        })
    }

    pub fn has(&self, layer: Layer) -> bool {
        self.layers.contains(&layer)
    }
}

pub fn layer_names() -> String {
    Layer::ALL
        .iter()
        .map(|l| l.name())
        .collect::<Vec<_>>()
        .join(", ")
}

/// Tree edge prepared for drawing.
pub struct TreeSegment {
    pub from: Vec2,
    pub to: Vec2,
    pub cost_per_length: f64,
}

/// Optional overlays for a figure.
#[derive(Default)]
pub struct Overlays<'a> {
    pub tree: &'a [TreeSegment],
    pub social: Option<&'a [Vec2]>,
    pub naive: Option<&'a [Vec2]>,
}

/// Arrow base point and mean velocity.
pub struct Arrow {
    pub at: Vec2,
    pub velocity: Vec2,
}

/// Quiver sample points: cell centers of a `count`-per-long-side grid.
pub fn quiver_arrows(scenario: &Scenario, count: usize) -> Vec<Arrow> {
    let b = scenario.environment.bounds;
    let step = b.width().max(b.height()) / count as f64;
    let nx = (b.width() / step).round().max(1.0) as usize;
    let ny = (b.height() / step).round().max(1.0) as usize;
    let mut arrows = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let at = b.min
                + Vec2::new(
                    (i as f64 + 0.5) * b.width() / nx as f64,
                    (j as f64 + 0.5) * b.height() / ny as f64,
                );
            if !scenario.environment.point_free(at) {
                continue;
            }
            arrows.push(Arrow {
                at,
                velocity: scenario.flow.sample(at).mean_velocity,
            });
        }
    }
    arrows
}

struct Canvas {
    bounds: Rect,
    scale: f64,
    width: f64,
    height: f64,
    margin: f64,
    legend: f64,
    body: String,
}

impl Canvas {
    fn new(bounds: Rect, size_px: u32) -> Self {
        let scale = size_px as f64 / bounds.width().max(bounds.height());
        Self {
            bounds,
            scale,
            width: bounds.width() * scale,
            height: bounds.height() * scale,
            margin: 10.0,
            legend: 0.0,
            body: String::new(),
        }
    }

    fn px(&self, p: Vec2) -> (f64, f64) {
        (
            self.margin + (p.x - self.bounds.min.x) * self.scale,
            self.margin + (self.bounds.max.y - p.y) * self.scale,
        )
    }

    fn polyline(&mut self, points: &[Vec2], attrs: &str) {
        let pts: Vec<String> = points
            .iter()
            .map(|&p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" {attrs}/>"#,
            pts.join(" ")
        );
    }

    fn colorbar(&mut self, id: &str, label: &str, min: f64, max: f64, cmap: Colormap) {
        let x = self.margin * 2.0 + self.width + self.legend;
        let (top, h, w) = (self.margin, self.height.min(240.0), 14.0);
        let steps = 32;
        let _ = writeln!(
            self.body,
            r#"<g id="{id}" data-min="{min}" data-max="{max}" font-family="sans-serif" font-size="11">"#
        );
        for k in 0..steps {
            let t = 1.0 - (k as f64 + 0.5) / steps as f64;
            let _ = writeln!(
                self.body,
                r#"<rect x="{x:.2}" y="{:.2}" width="{w}" height="{:.2}" fill="{}"/>"#,
                top + h * k as f64 / steps as f64,
                h / steps as f64 + 0.5,
                cmap.color(t)
            );
        }
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}">{max:.3}</text>"#,
            x + w + 3.0,
            top + 10.0
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}">{min:.3}</text>"#,
            x + w + 3.0,
            top + h
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{:.2}">{label}</text></g>"#,
            top + h + 14.0
        );
        self.legend += 90.0;
    }

    fn finish(self) -> String {
        let total_w = self.width
            + 2.0 * self.margin
            + self.legend
            + if self.legend > 0.0 { self.margin } else { 0.0 };
        let total_h =
            (self.height + 2.0 * self.margin).max(if self.legend > 0.0 { 280.0 } else { 0.0 });
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w:.0}\" height=\"{total_h:.0}\" viewBox=\"0 0 {total_w:.2} {total_h:.2}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn heatmap(canvas: &mut Canvas, scenario: &Scenario, spec: &RenderSpec, variance: bool) {
    let b = scenario.environment.bounds;
    let cells = 120usize;
    let step = b.width().max(b.height()) / cells as f64;
    let nx = (b.width() / step).round().max(1.0) as usize;
    let ny = (b.height() / step).round().max(1.0) as usize;
    let (dx, dy) = (b.width() / nx as f64, b.height() / ny as f64);
    let mut values = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = b.min + Vec2::new((i as f64 + 0.5) * dx, (j as f64 + 0.5) * dy);
            let s = scenario.flow.sample(p);
            values.push(if variance { s.variance } else { s.density });
        }
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };
    let id = if variance {
        "layer-variance"
    } else {
        "layer-density"
    };
    let _ = writeln!(canvas.body, r#"<g id="{id}" shape-rendering="crispEdges">"#);
    for j in 0..ny {
        for i in 0..nx {
            let v = values[j * nx + i];
            let (x, y) = canvas.px(b.min + Vec2::new(i as f64 * dx, (j + 1) as f64 * dy));
            let _ = writeln!(
                canvas.body,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                dx * canvas.scale + 0.3,
                dy * canvas.scale + 0.3,
                spec.colormap.color((v - min) / span)
            );
        }
    }
    canvas.body.push_str("</g>\n");
    let (legend_id, label) = if variance {
        ("legend-variance", "variance m²/s²")
    } else {
        ("legend-density", "density 1/m²")
    };
    canvas.colorbar(legend_id, label, min, max, spec.colormap);
}

fn quiver(canvas: &mut Canvas, scenario: &Scenario) {
    let arrows = quiver_arrows(scenario, 24);
    let b = scenario.environment.bounds;
    let spacing = b.width().max(b.height()) / 24.0;
    let vmax = arrows.iter().map(|a| a.velocity.norm()).fold(0.0, f64::max);
    if vmax <= 0.0 {
        return;
    }
    let _ = writeln!(
        canvas.body,
        r#"<g id="layer-quiver" stroke="black" stroke-width="1" fill="none">"#
    );
    for a in &arrows {
        let v = a.velocity * (0.8 * spacing / vmax);
        if v.norm() * canvas.scale < 1.0 {
            continue;
        }
        let tip = a.at + v;
        let back = v * -0.3;
        let head1 = tip + back.rotate(0.45);
        let head2 = tip + back.rotate(-0.45);
        let (x0, y0) = canvas.px(a.at);
        let (x1, y1) = canvas.px(tip);
        let (h1x, h1y) = canvas.px(head1);
        let (h2x, h2y) = canvas.px(head2);
        let _ = writeln!(
            canvas.body,
            r#"<path d="M{x0:.2},{y0:.2} L{x1:.2},{y1:.2} M{h1x:.2},{h1y:.2} L{x1:.2},{y1:.2} L{h2x:.2},{h2y:.2}"/>"#
        );
    }
    canvas.body.push_str("</g>\n");
}

fn obstacles(canvas: &mut Canvas, scenario: &Scenario) {
    let _ = writeln!(canvas.body, r##"<g id="obstacles" fill="#606060">"##);
    for o in &scenario.environment.obstacles {
        match *o {
            Obstacle::Circle { center, radius } => {
                let (x, y) = canvas.px(center);
                let _ = writeln!(
                    canvas.body,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}"/>"#,
                    radius * canvas.scale
                );
            }
            Obstacle::Rect { min, max } => {
                let (x, y) = canvas.px(Vec2::new(min.x, max.y));
                let _ = writeln!(
                    canvas.body,
                    r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}"/>"#,
                    (max.x - min.x) * canvas.scale,
                    (max.y - min.y) * canvas.scale
                );
            }
        }
    }
    canvas.body.push_str("</g>\n");
}

/// Bounds of the cost-per-length color scale for a tree.
pub fn tree_scale(tree: &[TreeSegment]) -> Option<(f64, f64)> {
    let min = tree
        .iter()
        .map(|s| s.cost_per_length)
        .fold(f64::INFINITY, f64::min);
    let max = tree
        .iter()
        .map(|s| s.cost_per_length)
        .fold(f64::NEG_INFINITY, f64::max);
    (min <= max).then_some((min, max))
}

/// Renders the requested layers of a scenario with optional overlays.
pub fn render(scenario: &Scenario, spec: &RenderSpec, overlays: &Overlays<'_>) -> String {
    let mut canvas = Canvas::new(scenario.environment.bounds, spec.size_px);
    // One heatmap per figure; density wins when both are requested.
    if spec.has(Layer::Density) {
        heatmap(&mut canvas, scenario, spec, false);
    } else if spec.has(Layer::Variance) {
        heatmap(&mut canvas, scenario, spec, true);
    }
    obstacles(&mut canvas, scenario);
    if spec.has(Layer::Quiver) {
        quiver(&mut canvas, scenario);
    }
    if spec.has(Layer::Tree) {
        if let Some((min, max)) = tree_scale(overlays.tree) {
            let span = if max > min { max - min } else { 1.0 };
            let _ = writeln!(canvas.body, r#"<g id="layer-tree" stroke-width="1.2">"#);
            for s in overlays.tree {
                let (x0, y0) = canvas.px(s.from);
                let (x1, y1) = canvas.px(s.to);
                let _ = writeln!(
                    canvas.body,
                    r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y1:.2}" stroke="{}"/>"#,
                    spec.colormap.color((s.cost_per_length - min) / span)
                );
            }
            canvas.body.push_str("</g>\n");
            canvas.colorbar("legend-tree", "invasiveness per m", min, max, spec.colormap);
        }
    }
    if spec.has(Layer::Naive) {
        if let Some(path) = overlays.naive {
            canvas.polyline(
                path,
                r#"id="layer-naive" stroke="white" stroke-width="2.5" stroke-dasharray="2,4""#,
            );
        }
    }
    if spec.has(Layer::Social) {
        if let Some(path) = overlays.social {
            canvas.polyline(
                path,
                r#"id="layer-social" stroke="white" stroke-width="2.5""#,
            );
        }
    }
    if spec.has(Layer::Start) {
        let (x, y) = canvas.px(scenario.start);
        let _ = writeln!(
            canvas.body,
            r#"<circle id="layer-start" cx="{x:.2}" cy="{y:.2}" r="6" fill="none" stroke="red" stroke-width="2"/>"#
        );
    }
    if spec.has(Layer::Goal) {
        let (x, y) = canvas.px(scenario.goal);
        let _ = writeln!(
            canvas.body,
            r#"<path id="layer-goal" d="M{:.2},{:.2} L{:.2},{:.2} M{:.2},{:.2} L{:.2},{:.2}" stroke="red" stroke-width="2"/>"#,
            x - 6.0,
            y - 6.0,
            x + 6.0,
            y + 6.0,
            x - 6.0,
            y + 6.0,
            x + 6.0,
            y - 6.0
        );
    }
    canvas.finish()
}
