//! Flow that bends one corner of a subdivided equilateral triangle.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::integrate::{integrate_flow, FlowConfig, FlowProblem, FlowResult};
use super::FlowError;
use crate::mesh::{standard_subdivision, Subdivision, TriangulatedDisk};
use crate::packing::PackingState;

#[derive(Debug, Clone, Serialize)]
pub struct CornerFlowResult {
    pub n: usize,
    pub alpha: f64,
    pub weight: f64,
    /// Fine index of the corner whose angle is prescribed.
    pub apex: usize,
    /// Fine vertices on the side opposite the apex; labels there stay fixed.
    pub base_side: Vec<usize>,
    pub flow: FlowResult,
    /// `(vertex, |K_i(1) - K_i(0)|)` for every vertex of the fixed side.
    pub ledger: Vec<(usize, f64)>,
    pub ledger_total: f64,
    pub ledger_max: f64,
    /// Smallest and largest inner angle seen along the trajectory.
    pub angle_range: (f64, f64),
    /// Largest `eta_ij |w'_i - w'_j|` seen along the trajectory.
    pub max_gradient: f64,
    #[serde(skip)]
    pub subdivision: Subdivision,
}

impl CornerFlowResult {
    pub fn mesh(&self) -> &TriangulatedDisk {
        &self.subdivision.mesh
    }
}

/// Subdivides an equilateral triangle `n` times, fixes the labels on the side opposite
/// the apex, and flows from the uniform packing to the curvature `pi - alpha` at the apex
/// and zero at every other free vertex.
pub fn corner_flow(
    n: usize,
    alpha: f64,
    weight: f64,
    config: &FlowConfig,
) -> Result<CornerFlowResult, FlowError> {
    if !(PI / 6.0 - 1e-12..=PI / 2.0 + 1e-12).contains(&alpha) {
        return Err(FlowError::AlphaOutOfRange(alpha));
    }
    let coarse = TriangulatedDisk::build_from_faces(&[[0, 1, 2]])?;
    let sub = standard_subdivision(&coarse, n)?;
    let mesh = Arc::new(sub.mesh.clone());
    let apex = sub.vertex_map[0];
    let base_side: Vec<usize> = (0..=n).map(|j| sub.fine_vertex(0, [0, j, n - j])).collect();
    let state = PackingState::constant(Arc::clone(&mesh), weight, 0.0)?;
    let mut target = vec![0.0; mesh.n_vertices()];
    target[apex] = PI - alpha;
    let problem = FlowProblem {
        state: state.clone(),
        dirichlet: base_side.clone(),
        target,
        config: config.clone(),
    };
    let flow = integrate_flow(&problem)?;
    let k0 = state.curvature()?;
    let ledger: Vec<(usize, f64)> = base_side
        .iter()
        .map(|&v| (v, (flow.curvature[v] - k0[v]).abs()))
        .collect();
    let ledger_total = ledger.iter().map(|x| x.1).sum();
    let ledger_max = ledger.iter().map(|x| x.1).fold(0.0, f64::max);
    let angle_range = flow
        .trajectory
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.min_angle), hi.max(s.max_angle))
        });
    let max_gradient = flow
        .trajectory
        .iter()
        .map(|s| s.max_gradient)
        .fold(0.0, f64::max);
    Ok(CornerFlowResult {
        n,
        alpha,
        weight,
        apex,
        base_side,
        flow,
        ledger,
        ledger_total,
        ledger_max,
        angle_range,
        max_gradient,
        subdivision: sub,
    })
}
