//! End-to-end construction of piecewise-linear maps from the unit equilateral triangle onto
//! a polygonal domain, over a sequence of lattice scales.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{flatten_disk, FlattenResult, FlowConfig, FlowStatus};
use crate::geom::{self, Point};
use crate::layout::{
    barycentric_grid, develop, embedding_check, evaluate_map, normalize_to_unit_triangle, pl_map,
    svg, Embedding, Layout, SvgOptions,
};
use crate::mesh::{hexagonal_approximation, standard_subdivision, MeshFile, TriangulatedDisk};
use crate::packing::PackingState;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("every scale failed; first failure: {0}")]
    AllScalesFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Domain file `{"polygon": [[x, y], ...]}`, closed implicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    pub polygon: Vec<Point>,
}

/// Points of the evaluation grid per side.
pub const GRID_DIVISIONS: usize = 32;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub polygon: Vec<Point>,
    pub markers: [Point; 3],
    pub weight: f64,
    /// Strictly decreasing lattice spacings.
    pub scales: Vec<f64>,
    /// Subdivision per scale; a single entry applies to all scales.
    pub subdiv: Vec<usize>,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub seed: u64,
}

impl PipelineConfig {
    /// Replaces the seed with `IDCP_SEED` when that variable holds an integer.
    pub fn apply_env(&mut self) {
        if let Some(seed) = std::env::var("IDCP_SEED").ok().and_then(|s| s.parse().ok()) {
            self.seed = seed;
        }
        self.flow.seed = self.seed;
    }

    pub fn subdiv_at(&self, k: usize) -> usize {
        if self.subdiv.len() == 1 {
            self.subdiv[0]
        } else {
            self.subdiv[k]
        }
    }

    /// Markers must sit on the polygon within this distance.
    pub fn snap_tolerance(&self) -> f64 {
        let (lo, hi) = self.polygon.iter().fold(
            ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
            |(lo, hi), p| {
                (
                    [lo[0].min(p[0]), lo[1].min(p[1])],
                    [hi[0].max(p[0]), hi[1].max(p[1])],
                )
            },
        );
        1e-6 * geom::dist(lo, hi)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        if self.polygon.len() < 3 || !geom::polygon_is_simple(&self.polygon) {
            return bad("domain is not a simple polygon".into());
        }
        if !(self.weight.is_finite() && self.weight > 1.0) {
            return bad(format!("weight {} must exceed one", self.weight));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad("scales must be positive".into());
        }
        if self.scales.windows(2).any(|w| w[1] >= w[0]) {
            return bad("scales must be strictly decreasing".into());
        }
        if self.subdiv.is_empty()
            || (self.subdiv.len() != 1 && self.subdiv.len() != self.scales.len())
            || self.subdiv.contains(&0)
        {
            return bad("give one positive subdivision or one per scale".into());
        }
        let tol = self.snap_tolerance();
        for (a, p) in self.markers.iter().enumerate() {
            if geom::boundary_distance(*p, &self.polygon) > tol {
                return bad(format!("marker {a} is not on the domain boundary"));
            }
            for q in &self.markers[a + 1..] {
                if geom::dist(*p, *q) <= tol {
                    return bad("markers must be distinct".into());
                }
            }
        }
        Ok(())
    }
}

/// Everything computed at one scale.
#[derive(Debug, Clone)]
pub struct ScaleResult {
    pub scale: f64,
    pub subdiv: usize,
    pub mesh: Option<TriangulatedDisk>,
    pub coarse_vertices: usize,
    /// Fine indices of the markers.
    pub markers: Option<[usize; 3]>,
    /// Constant starting label; every edge then has length `scale / subdiv`.
    pub label: f64,
    pub flatten: Option<FlattenResult>,
    /// Subdivided lattice disk in the domain.
    pub domain_layout: Option<Layout>,
    /// Flattened metric normalized to the unit triangle.
    pub flat_layout: Option<Layout>,
    pub third_marker_residual: Option<f64>,
    pub embedding: Option<Embedding>,
    pub global_dilatation: Option<f64>,
    pub dilatations: Vec<f64>,
    /// Images of the evaluation grid.
    pub grid_images: Option<Vec<Point>>,
    pub marker_drift: Option<f64>,
    pub adjustments: Vec<String>,
    pub error: Option<String>,
}

impl ScaleResult {
    pub fn completed(&self) -> bool {
        self.grid_images.is_some()
    }
}

/// Upper edges of the dilatation histogram bins; the last bin is open.
pub const DILATATION_BINS: [f64; 5] = [1.1, 1.25, 1.5, 2.0, 4.0];

#[derive(Debug, Clone, Serialize)]
pub struct ScaleReport {
    pub scale: f64,
    pub subdiv: usize,
    pub coarse_vertices: usize,
    pub vertices: usize,
    pub faces: usize,
    pub status: Option<FlowStatus>,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    pub global_dilatation: Option<f64>,
    pub dilatation_histogram: Vec<usize>,
    /// Sup distance of the map from the identity on the grid.
    pub identity_distance: Option<f64>,
    /// Sup distance on the grid from the map at the previous completed scale.
    pub successive_distance: Option<f64>,
    pub marker_drift: Option<f64>,
    pub third_marker_residual: Option<f64>,
    pub embedding: Option<Embedding>,
    pub adjustments: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub weight: f64,
    pub grid_points: usize,
    pub scales: Vec<ScaleReport>,
    /// Convergence is measured between successive maps; the identity distance is the
    /// error only when the domain is the unit triangle with markers at its corners.
    pub note: String,
}

pub struct PipelineOutput {
    pub report: ConvergenceReport,
    pub results: Vec<ScaleResult>,
}

/// Runs every scale in parallel. Failures at one scale are recorded in its report; the
/// call fails only if no scale completes.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;
    let results: Vec<ScaleResult> = config
        .scales
        .par_iter()
        .enumerate()
        .map(|(k, &s)| run_scale(config, s, config.subdiv_at(k)))
        .collect();
    if !results.iter().any(|r| r.completed()) {
        let first = results
            .iter()
            .find_map(|r| r.error.clone())
            .unwrap_or_else(|| "no scale completed".into());
        return Err(PipelineError::AllScalesFailed(first));
    }
    let report = assemble_report(config, &results);
    Ok(PipelineOutput { report, results })
}

fn run_scale(config: &PipelineConfig, scale: f64, n: usize) -> ScaleResult {
    let mut r = ScaleResult {
        scale,
        subdiv: n,
        mesh: None,
        coarse_vertices: 0,
        markers: None,
        label: (scale / (n as f64 * (2.0 + 2.0 * config.weight).sqrt())).ln(),
        flatten: None,
        domain_layout: None,
        flat_layout: None,
        third_marker_residual: None,
        embedding: None,
        global_dilatation: None,
        dilatations: Vec::new(),
        grid_images: None,
        marker_drift: None,
        adjustments: Vec::new(),
        error: None,
    };
    log::info!("scale {scale}: subdivision {n}");
    if let Err(e) = scale_steps(config, &mut r) {
        log::warn!("scale {scale}: {e}");
        r.error = Some(e);
    }
    r
}

fn scale_steps(config: &PipelineConfig, r: &mut ScaleResult) -> Result<(), String> {
    let lattice = hexagonal_approximation(&config.polygon, r.scale, config.markers)
        .map_err(|e| e.to_string())?;
    r.adjustments = lattice.adjustments.clone();
    r.coarse_vertices = lattice.disk.mesh.n_vertices();
    r.marker_drift = Some(
        (0..3)
            .map(|a| geom::dist(lattice.coords[lattice.disk.markers[a]], config.markers[a]))
            .sum(),
    );
    let sub = standard_subdivision(&lattice.disk.mesh, r.subdiv).map_err(|e| e.to_string())?;
    let coords = sub.interpolate(&lattice.disk.mesh, &lattice.coords);
    let mesh = sub.mesh.clone();
    let markers = lattice.disk.markers.map(|v| sub.vertex_map[v]);
    r.markers = Some(markers);
    r.domain_layout = Some(Layout::from_coords(&mesh, coords).map_err(|e| e.to_string())?);
    r.mesh = Some(mesh);
    let mesh = r.mesh.as_ref().unwrap();

    let flat = flatten_disk(&lattice.disk, &sub, config.weight, r.label, &config.flow)
        .map_err(|e| e.to_string())?;
    let done = flat.status.is_completed();
    let w = flat.w.clone();
    r.flatten = Some(flat);
    if !done {
        return Err("flattening did not complete".into());
    }
    let state = PackingState::constant(std::sync::Arc::new(mesh.clone()), config.weight, r.label)
        .and_then(|s| s.shifted(&w))
        .map_err(|e| e.to_string())?;
    let developed = develop(mesh, &state.lengths()).map_err(|e| e.to_string())?;
    let normalized =
        normalize_to_unit_triangle(mesh, &developed, markers).map_err(|e| e.to_string())?;
    r.third_marker_residual = Some(normalized.residual);
    r.embedding = Some(embedding_check(mesh, &normalized.layout));
    let map = pl_map(mesh, &normalized.layout, r.domain_layout.as_ref().unwrap())
        .map_err(|e| e.to_string())?;
    r.global_dilatation = Some(map.global_dilatation);
    r.dilatations = map.faces.iter().map(|f| f.dilatation).collect();
    r.flat_layout = Some(normalized.layout);
    let grid = barycentric_grid(GRID_DIVISIONS);
    r.grid_images = Some(evaluate_map(mesh, &map, &grid).map_err(|e| e.to_string())?);
    Ok(())
}

fn sup_distance(a: &[Point], b: &[Point]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| geom::dist(*p, *q))
        .fold(0.0, f64::max)
}

fn histogram(values: &[f64]) -> Vec<usize> {
    let mut h = vec![0; DILATATION_BINS.len() + 1];
    for &k in values {
        let bin = DILATATION_BINS
            .iter()
            .position(|&b| k < b)
            .unwrap_or(DILATATION_BINS.len());
        h[bin] += 1;
    }
    h
}

fn assemble_report(config: &PipelineConfig, results: &[ScaleResult]) -> ConvergenceReport {
    let grid = barycentric_grid(GRID_DIVISIONS);
    let mut previous: Option<&Vec<Point>> = None;
    let mut scales = Vec::new();
    for r in results {
        let flat = r.flatten.as_ref();
        let successive_distance = match (&r.grid_images, previous) {
            (Some(cur), Some(prev)) => Some(sup_distance(cur, prev)),
            _ => None,
        };
        if let Some(g) = &r.grid_images {
            previous = Some(g);
        }
        scales.push(ScaleReport {
            scale: r.scale,
            subdiv: r.subdiv,
            coarse_vertices: r.coarse_vertices,
            vertices: r.mesh.as_ref().map_or(0, |m| m.n_vertices()),
            faces: r.mesh.as_ref().map_or(0, |m| m.n_faces()),
            status: flat.map(|f| f.status.clone()),
            failed_stage: flat.and_then(|f| f.failed_stage.clone()),
            error: r.error.clone(),
            global_dilatation: r.global_dilatation,
            dilatation_histogram: histogram(&r.dilatations),
            identity_distance: r.grid_images.as_ref().map(|g| sup_distance(g, &grid)),
            successive_distance,
            marker_drift: r.marker_drift,
            third_marker_residual: r.third_marker_residual,
            embedding: r.embedding,
            adjustments: r.adjustments.clone(),
        });
    }
    ConvergenceReport {
        weight: config.weight,
        grid_points: grid.len(),
        scales,
        note: "successive distances compare maps on a fixed barycentric grid of the unit \
               triangle; the limit map has no closed form for a general domain"
            .into(),
    }
}

#[derive(Debug, Clone, Serialize)]
struct FactorFile<'a> {
    label: f64,
    weight: f64,
    status: Option<&'a FlowStatus>,
    w: Option<&'a [f64]>,
}

/// Optional drawings written next to `map.svg`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExportOptions {
    /// Also draw the flat layout on the unit triangle as `flat.svg`.
    pub flat_svg: bool,
    /// Draw the packing circles in `flat.svg`.
    pub circles: bool,
    /// Print vertex indices in every drawing.
    pub labels: bool,
}

/// Writes `report.json` and, per scale, a directory `scale_<k>` with `mesh.json`,
/// `factor.json`, `layout_src.json` (flat layout on the unit triangle),
/// `layout_dst.json` (layout in the domain) and `map.svg` (the image in the domain).
pub fn export_artifacts(
    output: &PipelineOutput,
    config: &PipelineConfig,
    dir: &Path,
    options: &ExportOptions,
) -> Result<(), PipelineError> {
    fs::create_dir_all(dir)?;
    fs::write(
        dir.join("report.json"),
        serde_json::to_string_pretty(&output.report)? + "\n",
    )?;
    for (k, r) in output.results.iter().enumerate() {
        let sub = dir.join(format!("scale_{k}"));
        fs::create_dir_all(&sub)?;
        let Some(mesh) = &r.mesh else {
            continue;
        };
        let coords = r.domain_layout.as_ref().map(|l| l.coords.as_slice());
        let file = MeshFile::from_mesh(mesh, coords, r.markers);
        fs::write(sub.join("mesh.json"), serde_json::to_string(&file)? + "\n")?;
        let factor = FactorFile {
            label: r.label,
            weight: config.weight,
            status: r.flatten.as_ref().map(|f| &f.status),
            w: r.flatten
                .as_ref()
                .filter(|f| f.status.is_completed())
                .map(|f| f.w.as_slice()),
        };
        fs::write(
            sub.join("factor.json"),
            serde_json::to_string(&factor)? + "\n",
        )?;
        if let Some(l) = &r.flat_layout {
            fs::write(
                sub.join("layout_src.json"),
                serde_json::to_string(&l.to_file())? + "\n",
            )?;
            if options.flat_svg {
                let radii = options
                    .circles
                    .then(|| flat_radii(mesh, l, config.weight, r))
                    .flatten();
                let opts = SvgOptions {
                    circles: radii.as_deref(),
                    labels: options.labels,
                    markers: r.markers,
                };
                fs::write(sub.join("flat.svg"), svg(mesh, l, &opts))?;
            }
        }
        if let Some(l) = &r.domain_layout {
            fs::write(
                sub.join("layout_dst.json"),
                serde_json::to_string(&l.to_file())? + "\n",
            )?;
            let opts = SvgOptions {
                markers: r.markers,
                labels: options.labels,
                ..Default::default()
            };
            fs::write(sub.join("map.svg"), svg(mesh, l, &opts))?;
        }
    }
    Ok(())
}

/// Radii of the flat packing in the frame of the normalized layout.
fn flat_radii(
    mesh: &TriangulatedDisk,
    layout: &Layout,
    weight: f64,
    r: &ScaleResult,
) -> Option<Vec<f64>> {
    let flat = r.flatten.as_ref()?;
    let state = PackingState::constant(std::sync::Arc::new(mesh.clone()), weight, r.label)
        .and_then(|s| s.shifted(&flat.w))
        .ok()?;
    let [a, b] = mesh.edge(0).vertices;
    let k = geom::dist(layout.coords[a], layout.coords[b]) / state.edge_length(0);
    Some(state.labels().iter().map(|u| k * u.exp()).collect())
}
