//! `crowdflow`: plan minimally invasive paths through crowd flows and export
//! figures and tables.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 no path found.

mod svg;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crowdflow::oracle::{lattice_plan, Connectivity, LatticePlan};
use crowdflow::roadmap::{build, dijkstra, plan_on, EdgeWeight, PlannerConfig, START};
use crowdflow::scenarios::{self, builtin, BUILTIN_NAMES};
use crowdflow::{NoPathDiagnostics, PlanResult, Scenario, SpeedLimits};

use svg::{Colormap, Layer, Overlays, RenderSpec, TreeSegment};

/// Version tag written into every JSON output.
const OUTPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "crowdflow",
    version,
    about = "Minimally invasive path planning through crowd flows"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a minimally invasive path and write it as JSON (plus optional SVG).
    Plan(PlanArgs),
    /// Export the minimally invasive tree from a roadmap node as CSV and SVG.
    Tree(TreeArgs),
    /// Compare social and naive plans over several seeds.
    Compare(CompareArgs),
    /// Solve on a dense lattice for reference.
    Oracle(OracleArgs),
    /// Render the scenario's fields to SVG.
    Render(RenderArgs),
    /// Write a scenario (built-in or file) in canonical JSON form.
    Export(ExportArgs),
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in name (density, velocity, variance, concert-hall) or a JSON file.
    #[arg(long)]
    scenario: String,
    /// Override the quadrature step in meters.
    #[arg(long)]
    quadrature_step: Option<f64>,
    /// Override the minimum robot speed in m/s.
    #[arg(long)]
    vmin: Option<f64>,
    /// Override the maximum robot speed in m/s.
    #[arg(long)]
    vmax: Option<f64>,
}

#[derive(Args)]
struct FigureArgs {
    /// Comma-separated layers: density, variance, quiver, tree, social, naive, start, goal.
    #[arg(long)]
    layers: Option<String>,
    /// Longer image side in pixels.
    #[arg(long, default_value_t = 800)]
    size: u32,
    #[arg(long, default_value = "viridis")]
    colormap: String,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Roadmap nodes including start and goal.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Plan the shortest path instead of the minimally invasive one.
    #[arg(long)]
    naive: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    figure: FigureArgs,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Roadmap node the tree grows from (0 is the start, 1 the goal).
    #[arg(long, default_value_t = START)]
    source: usize,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Edge CSV output.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[command(flatten)]
    figure: FigureArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Scenario to compare; repeat for several.
    #[arg(long = "scenario", required = true)]
    scenarios: Vec<String>,
    #[arg(long)]
    samples: Option<usize>,
    /// Seeds as a list and/or half-open ranges, e.g. `0..10` or `1,4,7..9`.
    #[arg(long, default_value = "0..10")]
    seeds: String,
    #[arg(long)]
    quadrature_step: Option<f64>,
    #[arg(long)]
    vmin: Option<f64>,
    #[arg(long)]
    vmax: Option<f64>,
    /// CSV table output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Lattice cells along the longer workspace side.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long, default_value_t = 16)]
    connectivity: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    figure: FigureArgs,
    #[arg(long)]
    out: PathBuf,
    /// Also write the quiver arrows (x, y, vx, vy) as CSV.
    #[arg(long)]
    quiver_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    out: PathBuf,
}

/// Failure carrying the process exit code.
enum Failure {
    Usage(anyhow::Error),
    NoPath,
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Tree(a) => cmd_tree(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Render(a) => cmd_render(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::NoPath) => ExitCode::from(2),
    }
}

fn resolve_scenario(reference: &str) -> Result<Scenario> {
    if let Some(sc) = builtin(reference) {
        return Ok(sc);
    }
    let mut candidates = vec![PathBuf::from(reference)];
    if let Some(dir) = std::env::var_os("CROWDFLOW_SCENARIO_DIR") {
        let dir = PathBuf::from(dir);
        candidates.push(dir.join(reference));
        candidates.push(dir.join(format!("{reference}.json")));
    }
    for path in &candidates {
        if path.is_file() {
            return scenarios::load(path)
                .with_context(|| format!("loading scenario {}", path.display()));
        }
    }
    bail!(
        "unknown scenario `{reference}`: not a built-in ({}) and no such file{}",
        BUILTIN_NAMES.join(", "),
        if std::env::var_os("CROWDFLOW_SCENARIO_DIR").is_some() {
            " in the working directory or CROWDFLOW_SCENARIO_DIR"
        } else {
            ""
        }
    )
}

fn apply_overrides(
    sc: &mut Scenario,
    step: Option<f64>,
    vmin: Option<f64>,
    vmax: Option<f64>,
) -> Result<()> {
    if let Some(h) = step {
        if !(h.is_finite() && h > 0.0) {
            bail!("--quadrature-step must be positive, got {h}");
        }
        sc.defaults.quadrature_step = h;
    }
    if vmin.is_some() || vmax.is_some() {
        let limits = sc.environment.limits;
        sc.environment.limits =
            SpeedLimits::new(vmin.unwrap_or(limits.v_min), vmax.unwrap_or(limits.v_max))?;
    }
    Ok(())
}

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario> {
    let mut sc = resolve_scenario(&args.scenario)?;
    apply_overrides(&mut sc, args.quadrature_step, args.vmin, args.vmax)?;
    Ok(sc)
}

fn render_spec(args: &FigureArgs, default_layers: &[Layer]) -> Result<RenderSpec> {
    let layers = match &args.layers {
        None => default_layers.to_vec(),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                Layer::parse(s).ok_or_else(|| {
                    anyhow!("unknown layer `{s}` (available: {})", svg::layer_names())
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    let colormap = Colormap::parse(&args.colormap).ok_or_else(|| {
        anyhow!(
            "unknown colormap `{}` (available: {})",
            args.colormap,
            Colormap::NAMES.join(", ")
        )
    })?;
    RenderSpec::new(layers, args.size, colormap)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, &text)
}

#[derive(Serialize)]
struct PlanDoc<'a> {
    schema_version: u32,
    kind: &'static str,
    scenario: &'a str,
    planner: &'static str,
    n: usize,
    seed: u64,
    quadrature_step: f64,
    #[serde(flatten)]
    plan: &'a PlanResult,
}

#[derive(Serialize)]
struct NoPathDoc<'a> {
    schema_version: u32,
    kind: &'static str,
    scenario: &'a str,
    n: usize,
    seed: u64,
    diagnostics: &'a NoPathDiagnostics,
}

#[derive(Serialize)]
struct LatticeDoc<'a> {
    schema_version: u32,
    kind: &'static str,
    scenario: &'a str,
    #[serde(flatten)]
    plan: &'a LatticePlan,
}

/// Runs a roadmap plan, turning "no path" into exit code 2 with diagnostics.
fn plan_or_report(
    roadmap: &crowdflow::Roadmap,
    weight: EdgeWeight,
    sc: &Scenario,
    cfg: &PlannerConfig,
    out: Option<&Path>,
) -> Result<PlanResult, Failure> {
    match plan_on(roadmap, weight) {
        Ok(p) => Ok(p),
        Err(crowdflow::Error::NoPath(diag)) => {
            let doc = NoPathDoc {
                schema_version: OUTPUT_SCHEMA_VERSION,
                kind: "no_path",
                scenario: &sc.name,
                n: cfg.samples,
                seed: cfg.seed,
                diagnostics: &diag,
            };
            eprintln!("no path from start to goal: {diag}");
            if let Some(path) = out {
                write_json(path, &doc)?;
            }
            Err(Failure::NoPath)
        }
        Err(e) => Err(Failure::Usage(e.into())),
    }
}

fn cmd_plan(args: PlanArgs) -> Result<(), Failure> {
    let sc = load_scenario(&args.scenario)?;
    let spec = args
        .svg
        .as_ref()
        .map(|_| {
            render_spec(
                &args.figure,
                &[
                    Layer::Density,
                    Layer::Quiver,
                    Layer::Social,
                    Layer::Naive,
                    Layer::Start,
                    Layer::Goal,
                ],
            )
        })
        .transpose()?;
    let cfg = sc.config(args.samples, args.seed);
    let roadmap =
        build(&sc.environment, &sc.flow, sc.start, sc.goal, &cfg).map_err(anyhow::Error::from)?;
    let weight = if args.naive {
        EdgeWeight::Length
    } else {
        EdgeWeight::Invasiveness
    };
    let plan = plan_or_report(&roadmap, weight, &sc, &cfg, Some(&args.out))?;
    let doc = PlanDoc {
        schema_version: OUTPUT_SCHEMA_VERSION,
        kind: "plan",
        scenario: &sc.name,
        planner: if args.naive { "naive" } else { "social" },
        n: cfg.samples,
        seed: cfg.seed,
        quadrature_step: cfg.quadrature_step,
        plan: &plan,
    };
    write_json(&args.out, &doc)?;
    if let (Some(path), Some(spec)) = (&args.svg, spec) {
        let other_weight = if args.naive {
            EdgeWeight::Invasiveness
        } else {
            EdgeWeight::Length
        };
        let other = plan_on(&roadmap, other_weight).map_err(anyhow::Error::from)?;
        let (social, naive) = if args.naive {
            (&other, &plan)
        } else {
            (&plan, &other)
        };
        let overlays = Overlays {
            tree: &[],
            social: Some(&social.waypoints),
            naive: Some(&naive.waypoints),
        };
        write_file(path, &svg::render(&sc, &spec, &overlays))?;
    }
    println!(
        "{} {} plan: invasiveness {:.4}, length {:.3} m, time {:.3} s, {} waypoints",
        sc.name,
        doc.planner,
        plan.total_invasiveness,
        plan.total_length,
        plan.total_time,
        plan.waypoints.len()
    );
    Ok(())
}

fn cmd_tree(args: TreeArgs) -> Result<(), Failure> {
    let sc = load_scenario(&args.scenario)?;
    let spec = args
        .svg
        .as_ref()
        .map(|_| render_spec(&args.figure, &[Layer::Tree, Layer::Start]))
        .transpose()?;
    let cfg = sc.config(args.samples, args.seed);
    let roadmap =
        build(&sc.environment, &sc.flow, sc.start, sc.goal, &cfg).map_err(anyhow::Error::from)?;
    if args.source >= roadmap.node_count() {
        return Err(anyhow!(
            "--source {} out of range for {} roadmap nodes",
            args.source,
            roadmap.node_count()
        )
        .into());
    }
    let tree =
        dijkstra(&roadmap, args.source, EdgeWeight::Invasiveness).map_err(anyhow::Error::from)?;
    let mut csv = String::from("from_x,from_y,to_x,to_y,invasiveness,length,cost_per_length\n");
    let mut segments = Vec::new();
    for (parent, child) in tree.tree_edges() {
        let edge = roadmap
            .edge(parent, child)
            .expect("tree edges exist in the roadmap");
        let (a, b) = (roadmap.nodes()[parent], roadmap.nodes()[child]);
        let per_length = edge.cost.invasiveness / edge.cost.length;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            a.x, a.y, b.x, b.y, edge.cost.invasiveness, edge.cost.length, per_length
        ));
        segments.push(TreeSegment {
            from: a,
            to: b,
            cost_per_length: per_length,
        });
    }
    write_file(&args.out, &csv)?;
    if let (Some(path), Some(spec)) = (&args.svg, spec) {
        let overlays = Overlays {
            tree: &segments,
            ..Default::default()
        };
        write_file(path, &svg::render(&sc, &spec, &overlays))?;
    }
    println!(
        "{} tree from node {}: {} edges, {} of {} nodes reachable",
        sc.name,
        args.source,
        segments.len(),
        tree.reachable_count(),
        roadmap.node_count()
    );
    Ok(())
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>> {
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let (a, b): (u64, u64) = (
                a.trim()
                    .parse()
                    .with_context(|| format!("bad seed range `{part}`"))?,
                b.trim()
                    .parse()
                    .with_context(|| format!("bad seed range `{part}`"))?,
            );
            if a >= b {
                bail!("empty seed range `{part}`");
            }
            seeds.extend(a..b);
        } else {
            seeds.push(part.parse().with_context(|| format!("bad seed `{part}`"))?);
        }
    }
    if seeds.is_empty() {
        bail!("no seeds given");
    }
    Ok(seeds)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), Failure> {
    let seeds = parse_seeds(&args.seeds)?;
    let mut loaded = Vec::new();
    for reference in &args.scenarios {
        let mut sc = resolve_scenario(reference)?;
        apply_overrides(&mut sc, args.quadrature_step, args.vmin, args.vmax)?;
        loaded.push(sc);
    }
    let mut csv = String::from("scenario,seed,social,naive,ratio\n");
    let mut summary = Vec::new();
    for sc in &loaded {
        let (mut social, mut naive, mut ratio) = (Vec::new(), Vec::new(), Vec::new());
        for &seed in &seeds {
            let cfg = sc.config(args.samples, Some(seed));
            let roadmap = build(&sc.environment, &sc.flow, sc.start, sc.goal, &cfg)
                .map_err(anyhow::Error::from)?;
            let s = plan_or_report(&roadmap, EdgeWeight::Invasiveness, sc, &cfg, None)?;
            let n = plan_or_report(&roadmap, EdgeWeight::Length, sc, &cfg, None)?;
            let r = s.total_invasiveness / n.total_invasiveness;
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                sc.name, seed, s.total_invasiveness, n.total_invasiveness, r
            ));
            social.push(s.total_invasiveness);
            naive.push(n.total_invasiveness);
            ratio.push(r);
        }
        summary.push((
            sc.name.clone(),
            median(&mut social),
            median(&mut naive),
            median(&mut ratio),
        ));
    }
    write_file(&args.out, &csv)?;
    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "median over {} seeds", seeds.len());
    let _ = writeln!(
        stdout,
        "{:<14} {:>10} {:>10} {:>8}",
        "scenario", "social", "naive", "ratio"
    );
    for (name, s, n, r) in summary {
        let _ = writeln!(stdout, "{name:<14} {s:>10.2} {n:>10.2} {r:>8.3}");
    }
    Ok(())
}

fn cmd_oracle(args: OracleArgs) -> Result<(), Failure> {
    let sc = load_scenario(&args.scenario)?;
    let connectivity = Connectivity::from_count(args.connectivity).map_err(anyhow::Error::from)?;
    let plan = match lattice_plan(&sc, args.grid, connectivity) {
        Ok(p) => p,
        Err(crowdflow::Error::NoPath(diag)) => {
            eprintln!("no lattice path from start to goal: {diag}");
            return Err(Failure::NoPath);
        }
        Err(e) => return Err(anyhow::Error::from(e).into()),
    };
    let doc = LatticeDoc {
        schema_version: OUTPUT_SCHEMA_VERSION,
        kind: "lattice_plan",
        scenario: &sc.name,
        plan: &plan,
    };
    write_json(&args.out, &doc)?;
    println!(
        "{} lattice {}x{} ({}-connected): invasiveness {:.4}, length {:.3} m",
        sc.name,
        args.grid,
        args.grid,
        connectivity.count(),
        plan.cost,
        plan.length
    );
    Ok(())
}

fn cmd_render(args: RenderArgs) -> Result<(), Failure> {
    let sc = load_scenario(&args.scenario)?;
    let spec = render_spec(
        &args.figure,
        &[Layer::Density, Layer::Quiver, Layer::Start, Layer::Goal],
    )?;
    write_file(&args.out, &svg::render(&sc, &spec, &Overlays::default()))?;
    if let Some(path) = &args.quiver_csv {
        let mut csv = String::from("x,y,vx,vy\n");
        for a in svg::quiver_arrows(&sc, 24) {
            csv.push_str(&format!(
                "{},{},{},{}\n",
                a.at.x, a.at.y, a.velocity.x, a.velocity.y
            ));
        }
        write_file(path, &csv)?;
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<(), Failure> {
    let sc = resolve_scenario(&args.scenario)?;
    scenarios::save(&sc, &args.out).map_err(anyhow::Error::from)?;
    Ok(())
}
