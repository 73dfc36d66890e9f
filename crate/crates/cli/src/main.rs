use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use idcp_core::delaunay::delaunay_report;
use idcp_core::flow::{
    corner_flow, flatten_disk, maximal_principle_campaign, CampaignConfig, FlowConfig,
};
use idcp_core::geom::Point;
use idcp_core::layout::{develop, embedding_check, svg, SvgOptions};
use idcp_core::mesh::{hexagonal_approximation, standard_subdivision, MeshFile};
use idcp_core::packing::{PackingState, StateFile};
use idcp_core::pipeline::{
    export_artifacts, run_pipeline, DomainFile, ExportOptions, PipelineConfig,
};
use idcp_core::spiral::{
    degenerate_pattern, rigidity_experiment, solve_degenerate_constants_from,
    verify_spiral_flatness, SpiralConfig,
};

#[derive(Parser)]
#[command(
    name = "idcp",
    version,
    about = "Inversive distance circle packings and discrete conformal maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate the conformal map from the unit triangle onto a polygon.
    Map(MapArgs),
    /// Run curvature flows.
    #[command(subcommand)]
    Flow(FlowCommand),
    /// Spiral packings on the hexagonal lattice.
    #[command(subcommand)]
    Spiral(SpiralCommand),
    /// Check packings and run the randomized checks.
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Args)]
struct MapArgs {
    /// Domain JSON `{"polygon": [[x, y], ...]}`.
    #[arg(long)]
    domain: PathBuf,
    /// Three boundary points `x1,y1;x2,y2;x3,y3`, sent to the corners of the unit triangle.
    #[arg(long)]
    markers: String,
    #[arg(long, default_value_t = 2.0)]
    weight: f64,
    /// Strictly decreasing lattice spacings.
    #[arg(long, value_delimiter = ',', required = true)]
    scales: Vec<f64>,
    /// One subdivision for every scale, or one per scale.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    subdiv: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Flow settings as JSON; defaults apply to missing keys.
    #[arg(long)]
    flow_config: Option<PathBuf>,
    /// Overridden by `IDCP_SEED`.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also draw each flat layout as `flat.svg`.
    #[arg(long)]
    svg: bool,
    /// Draw packing circles in `flat.svg`.
    #[arg(long)]
    circles: bool,
    /// Label vertices in the drawings.
    #[arg(long)]
    labels: bool,
}

#[derive(Subcommand)]
enum FlowCommand {
    /// Flow a subdivided equilateral triangle to corner angle `alpha`.
    Corner {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        weight: f64,
        #[arg(long)]
        flow_config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flatten the lattice approximation of a polygon onto an equilateral triangle.
    Flatten {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        markers: String,
        #[arg(long)]
        scale: f64,
        #[arg(long, default_value_t = 1)]
        subdiv: usize,
        #[arg(long, default_value_t = 2.0)]
        weight: f64,
        #[arg(long)]
        flow_config: Option<PathBuf>,
        /// Directory for `mesh.json`, `factor.json` and `flat.svg`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SpiralCommand {
    /// Solve for the constants of the degenerate spiral.
    Constants {
        /// Weights along v1, v2 and v2 - v1.
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 2.0, 2.0])]
        weights: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        u: f64,
        /// Starting bracket `lo,hi` for both ratios.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 2.0])]
        bracket: Vec<f64>,
        /// Radius of the ball used to classify the pattern.
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    /// Curvatures of a spiral factor on a hexagonal ball.
    Check {
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 2.0, 2.0])]
        weights: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        u: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        mu: f64,
        #[arg(long, default_value_t = 4)]
        m: usize,
        /// Write an SVG of the spiral layout.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Screen flat factors on a hexagonal ball for non-constant survivors.
    Rigidity {
        #[arg(long, default_value_t = 2.0)]
        weight: f64,
        #[arg(long, default_value_t = 6)]
        m: usize,
        #[arg(long, default_value_t = 8)]
        draws: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Curvature, Delaunay margins and layout of a packing.
    State {
        /// Mesh JSON with `vertices` and `faces`.
        #[arg(long)]
        mesh: PathBuf,
        /// State JSON `{"weights": {"i-j": I}, "labels": [u]}`.
        #[arg(long)]
        state: PathBuf,
    },
    /// Random pairs of star packings tested against the maximal principle.
    Campaign {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    env_logger::init();
    match Cli::parse().command {
        Command::Map(args) => map(args),
        Command::Flow(cmd) => flow(cmd),
        Command::Spiral(cmd) => spiral(cmd),
        Command::Verify(cmd) => verify(cmd),
    }
}

fn parse_markers(s: &str) -> Result<[Point; 3]> {
    let points: Vec<Point> = s
        .split(';')
        .map(|p| {
            let xy: Vec<f64> = p
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .with_context(|| format!("bad marker {p:?}"))?;
            match xy[..] {
                [x, y] => Ok([x, y]),
                _ => bail!("marker {p:?} must be x,y"),
            }
        })
        .collect::<Result<_>>()?;
    points
        .try_into()
        .map_err(|_| anyhow::anyhow!("expected three markers separated by ';'"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn flow_config(path: Option<&Path>) -> Result<FlowConfig> {
    path.map_or_else(|| Ok(FlowConfig::default()), read_json)
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn map(args: MapArgs) -> Result<()> {
    let domain: DomainFile = read_json(&args.domain)?;
    let mut config = PipelineConfig {
        polygon: domain.polygon,
        markers: parse_markers(&args.markers)?,
        weight: args.weight,
        scales: args.scales,
        subdiv: args.subdiv,
        flow: flow_config(args.flow_config.as_deref())?,
        seed: args.seed,
    };
    config.apply_env();
    let output = run_pipeline(&config)?;
    let options = ExportOptions {
        flat_svg: args.svg || args.circles,
        circles: args.circles,
        labels: args.labels,
    };
    export_artifacts(&output, &config, &args.out, &options)?;
    for s in &output.report.scales {
        let status = match (&s.status, &s.error) {
            (_, Some(e)) => format!("failed: {e}"),
            (Some(st), None) => format!("{st:?}"),
            (None, None) => "not run".into(),
        };
        println!(
            "scale {:<10} n={:<3} V={:<7} K={:<10} succ={:<12} {}",
            s.scale,
            s.subdiv,
            s.vertices,
            s.global_dilatation
                .map_or("-".into(), |k| format!("{k:.5}")),
            s.successive_distance
                .map_or("-".into(), |d| format!("{d:.3e}")),
            status
        );
    }
    println!("wrote {}", args.out.join("report.json").display());
    Ok(())
}

fn flow(cmd: FlowCommand) -> Result<()> {
    match cmd {
        FlowCommand::Corner {
            n,
            alpha,
            weight,
            flow_config: fc,
            out,
        } => {
            let r = corner_flow(n, alpha, weight, &flow_config(fc.as_deref())?)?;
            let k = r.flow.curvature[r.apex];
            eprintln!(
                "{:?}: K_apex = {k:.12} (target {:.12}), ledger {:.3e}, angles [{:.6}, {:.6}]",
                r.flow.status,
                std::f64::consts::PI - alpha,
                r.ledger_total,
                r.angle_range.0,
                r.angle_range.1
            );
            emit(&r, out.as_deref())
        }
        FlowCommand::Flatten {
            domain,
            markers,
            scale,
            subdiv,
            weight,
            flow_config: fc,
            out,
        } => {
            let domain: DomainFile = read_json(&domain)?;
            let lattice =
                hexagonal_approximation(&domain.polygon, scale, parse_markers(&markers)?)?;
            let sub = standard_subdivision(&lattice.disk.mesh, subdiv)?;
            let config = flow_config(fc.as_deref())?;
            let r = flatten_disk(&lattice.disk, &sub, weight, 0.0, &config)?;
            let residual = r
                .curvature
                .iter()
                .enumerate()
                .filter(|(v, _)| !r.markers.contains(v))
                .map(|(_, k)| k.abs())
                .fold(0.0, f64::max);
            eprintln!(
                "{:?} on {} faces; largest non-marker curvature {residual:.3e}",
                r.status,
                sub.mesh.n_faces()
            );
            if let Some(stage) = &r.failed_stage {
                eprintln!("stopped in {stage}");
            }
            let Some(dir) = out else {
                return emit(&r.status, None);
            };
            fs::create_dir_all(&dir)?;
            let coords = sub.interpolate(&lattice.disk.mesh, &lattice.coords);
            let file = MeshFile::from_mesh(&sub.mesh, Some(&coords), Some(r.markers));
            fs::write(dir.join("mesh.json"), serde_json::to_string(&file)? + "\n")?;
            emit(&r, Some(&dir.join("factor.json")))?;
            if r.status.is_completed() {
                let state = PackingState::constant(Arc::new(sub.mesh.clone()), weight, 0.0)?
                    .shifted(&r.w)?;
                let layout = develop(&sub.mesh, &state.lengths())?;
                let radii: Vec<f64> = state.labels().iter().map(|u| u.exp()).collect();
                let opts = SvgOptions {
                    circles: Some(&radii),
                    labels: false,
                    markers: Some(r.markers),
                };
                fs::write(dir.join("flat.svg"), svg(&sub.mesh, &layout, &opts))?;
            }
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ConstantsOutput {
    constants: idcp_core::spiral::DegenerateConstants,
    pattern: idcp_core::spiral::DegeneratePattern,
    case_one: bool,
}

fn weights3(w: &[f64]) -> Result<[f64; 3]> {
    w.try_into()
        .map_err(|_| anyhow::anyhow!("expected three weights"))
}

fn spiral(cmd: SpiralCommand) -> Result<()> {
    match cmd {
        SpiralCommand::Constants {
            weights,
            u,
            bracket,
            m,
        } => {
            let weights = weights3(&weights)?;
            let [lo, hi]: [f64; 2] = bracket[..]
                .try_into()
                .map_err(|_| anyhow::anyhow!("expected a bracket lo,hi"))?;
            let constants = solve_degenerate_constants_from(weights, u, (lo, hi))?;
            let pattern = degenerate_pattern(&SpiralConfig {
                weights,
                u,
                lambda: constants.lambda,
                mu: constants.mu,
                m,
            })?;
            let case_one = pattern.is_case_one();
            emit(
                &ConstantsOutput {
                    constants,
                    pattern,
                    case_one,
                },
                None,
            )
        }
        SpiralCommand::Check {
            weights,
            u,
            lambda,
            mu,
            m,
            svg: svg_path,
        } => {
            let config = SpiralConfig {
                weights: weights3(&weights)?,
                u,
                lambda,
                mu,
                m,
            };
            let report = verify_spiral_flatness(&config)?;
            if let Some(path) = svg_path {
                let (ball, state) = idcp_core::spiral::spiral_state(&config)?;
                let layout = develop(ball.mesh_arc().as_ref(), &state.lengths())?;
                let radii: Vec<f64> = state.labels().iter().map(|u| u.exp()).collect();
                let opts = SvgOptions {
                    circles: Some(&radii),
                    ..Default::default()
                };
                fs::write(&path, svg(ball.mesh_arc().as_ref(), &layout, &opts))?;
                eprintln!(
                    "embedding: {:?}",
                    embedding_check(ball.mesh_arc().as_ref(), &layout)
                );
            }
            emit(&report, None)
        }
        SpiralCommand::Rigidity {
            weight,
            m,
            draws,
            seed,
        } => emit(&rigidity_experiment(weight, m, draws, seed)?, None),
    }
}

#[derive(Serialize)]
struct StateSummary {
    any_inadmissible: bool,
    any_degenerate: bool,
    min_angle: f64,
    max_angle: f64,
    min_conductance: Option<f64>,
    curvature: Vec<f64>,
    total_curvature: f64,
    delaunay: Option<idcp_core::delaunay::DelaunayFile>,
    delaunay_error: Option<String>,
    isometry_defect: Option<f64>,
    embedding: Option<idcp_core::layout::Embedding>,
}

fn verify(cmd: VerifyCommand) -> Result<()> {
    match cmd {
        VerifyCommand::State { mesh, state } => {
            let mesh = Arc::new(read_json::<MeshFile>(&mesh)?.to_mesh()?);
            let file: StateFile = read_json(&state)?;
            let state = PackingState::from_file(Arc::clone(&mesh), &file)?;
            let report = state.report()?;
            let (delaunay, delaunay_error) = match delaunay_report(&state) {
                Ok(r) => (Some(r.to_file(&state)), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let lengths = state.lengths();
            let layout = develop(&mesh, &lengths).ok();
            let summary = StateSummary {
                any_inadmissible: report.any_inadmissible,
                any_degenerate: report.any_degenerate,
                min_angle: report.min_angle,
                max_angle: report.max_angle,
                min_conductance: report.min_conductance,
                total_curvature: report.curvature.iter().sum(),
                curvature: report.curvature,
                delaunay,
                delaunay_error,
                isometry_defect: layout.as_ref().map(|l| l.isometry_defect(&mesh, &lengths)),
                embedding: layout.as_ref().map(|l| embedding_check(&mesh, l)),
            };
            emit(&summary, None)
        }
        VerifyCommand::Campaign { samples, seed } => {
            let config = CampaignConfig {
                target: samples,
                max_draws: samples.saturating_mul(20),
                seed,
                ..Default::default()
            };
            let report = maximal_principle_campaign(&config);
            eprintln!(
                "{} samples met the hypotheses, {} proportional, {} counterexamples",
                report.hypotheses_met, report.proportional, report.counterexamples
            );
            emit(&report, None)
        }
    }
}
