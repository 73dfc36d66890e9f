//! Flattening a subdivided lattice disk onto an equilateral triangle.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::corner::corner_flow;
use super::integrate::{integrate_flow, FlowConfig, FlowProblem, FlowResult, FlowStatus};
use super::FlowError;
use crate::mesh::{MarkedDisk, Subdivision};
use crate::packing::PackingState;

/// Summary of the corner flow used for every boundary corner of one degree.
#[derive(Debug, Clone, Serialize)]
pub struct CornerSummary {
    pub degree: usize,
    pub alpha: f64,
    pub status: FlowStatus,
    pub ledger_total: f64,
    pub angle_range: (f64, f64),
    pub corners: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlattenResult {
    /// Label increments on the fine mesh; meaningful when `status` is `Completed`.
    pub w: Vec<f64>,
    /// Increments produced by the corner flows alone.
    pub w_corners: Vec<f64>,
    pub status: FlowStatus,
    /// Which stage stopped the computation, when it did not complete.
    pub failed_stage: Option<String>,
    /// Combinatorial radius of the ball straightened around each corner.
    pub ball_radius: usize,
    pub corner_flows: Vec<CornerSummary>,
    pub final_flow: Option<FlowResult>,
    /// Fine indices of the markers.
    pub markers: [usize; 3],
    pub curvature: Vec<f64>,
}

/// Finds labels on the `n`-subdivision of an equilateral lattice disk whose curvature is
/// zero everywhere except `2 pi / 3` at the three markers.
///
/// Each non-marker boundary vertex of the coarse disk with degree `m != 4` is first
/// straightened by gluing `m - 1` copies of the corner flow with angle `pi / (m - 1)` on
/// the ball of radius `n / 3` around it. A second flow then removes the remaining
/// curvature. It fixes the label of the first marker and prescribes `2 pi / 3` at the
/// other two, so Gauss-Bonnet forces the same value at the first.
///
/// `label` is the uniform starting label of every fine vertex.
pub fn flatten_disk(
    coarse: &MarkedDisk,
    sub: &Subdivision,
    weight: f64,
    label: f64,
    config: &FlowConfig,
) -> Result<FlattenResult, FlowError> {
    let cm = &coarse.mesh;
    if sub.vertex_map.len() != cm.n_vertices() {
        return Err(FlowError::InvalidProblem(
            "subdivision does not belong to this disk".into(),
        ));
    }
    for v in cm.interior_vertices() {
        if cm.degree(v) != 6 {
            return Err(FlowError::InteriorNotFlat {
                vertex: v,
                degree: cm.degree(v),
            });
        }
    }
    let mut corners: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &v in cm.boundary_cycle() {
        if coarse.markers.contains(&v) {
            continue;
        }
        let m = cm.degree(v);
        if !(3..=6).contains(&m) {
            return Err(FlowError::CornerDegreeUnsupported {
                vertex: v,
                degree: m,
            });
        }
        if m != 4 {
            corners.entry(m).or_default().push(v);
        }
    }

    let fine = Arc::new(sub.mesh.clone());
    let nv = fine.n_vertices();
    let n = sub.n;
    let k = n / 3;
    let markers = coarse.markers.map(|v| sub.vertex_map[v]);
    let mut w1 = vec![0.0; nv];
    let mut owner: Vec<Option<usize>> = vec![None; nv];
    let mut summaries = Vec::new();

    let failed = |w1: Vec<f64>, status, stage: String, summaries, curvature| FlattenResult {
        w: w1.clone(),
        w_corners: w1,
        status,
        failed_stage: Some(stage),
        ball_radius: k,
        corner_flows: summaries,
        final_flow: None,
        markers,
        curvature,
    };

    if k >= 1 {
        for (&m, vs) in &corners {
            let alpha = PI / (m - 1) as f64;
            let cf = corner_flow(k, alpha, weight, config)?;
            summaries.push(CornerSummary {
                degree: m,
                alpha,
                status: cf.flow.status.clone(),
                ledger_total: cf.ledger_total,
                angle_range: cf.angle_range,
                corners: vs.clone(),
            });
            if !cf.flow.status.is_completed() {
                let status = cf.flow.status.clone();
                return Ok(failed(
                    w1,
                    status,
                    format!("corner flow for degree {m}"),
                    summaries,
                    Vec::new(),
                ));
            }
            for &v in vs {
                for f in cm.faces_around(v) {
                    let t = cm.face(f);
                    let p = t.iter().position(|&x| x == v).unwrap();
                    for a in 0..=k {
                        for b in 0..=(k - a) {
                            let c = k - a - b;
                            let value = cf.flow.w[cf.subdivision.fine_vertex(0, [a, b, c])];
                            let mut bary = [0; 3];
                            bary[p] = n - k + a;
                            bary[(p + 1) % 3] = b;
                            bary[(p + 2) % 3] = c;
                            let x = sub.fine_vertex(f, bary);
                            match owner[x] {
                                Some(o) if o != v => {
                                    return Err(FlowError::OverlappingCornerBalls { a: o, b: v })
                                }
                                Some(_) => {
                                    let diff = (w1[x] - value).abs();
                                    if diff > 1e-12 {
                                        return Err(FlowError::RayMismatch { vertex: x, diff });
                                    }
                                }
                                None => {
                                    owner[x] = Some(v);
                                    w1[x] = value;
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    let base = PackingState::constant(Arc::clone(&fine), weight, label)?.shifted(&w1)?;
    let mut target = vec![0.0; nv];
    for &m in &markers {
        target[m] = 2.0 * PI / 3.0;
    }
    let problem = FlowProblem {
        state: base,
        dirichlet: vec![markers[0]],
        target,
        config: config.clone(),
    };
    let flow = match integrate_flow(&problem) {
        Ok(f) => f,
        Err(FlowError::InitialStateOutsideCorridor(msg)) => {
            let status = FlowStatus::AbortedAngle {
                face: usize::MAX,
                t: 0.0,
            };
            let mut r = failed(
                w1,
                status,
                format!("final flow: {msg}"),
                summaries,
                Vec::new(),
            );
            r.failed_stage = Some(format!("final flow: {msg}"));
            return Ok(r);
        }
        Err(e) => return Err(e),
    };
    let w: Vec<f64> = w1.iter().zip(&flow.w).map(|(a, b)| a + b).collect();
    let status = flow.status.clone();
    let failed_stage = (!status.is_completed()).then(|| "final flow".to_string());
    Ok(FlattenResult {
        w,
        w_corners: w1,
        status,
        failed_stage,
        ball_radius: k,
        corner_flows: summaries,
        curvature: flow.curvature.clone(),
        final_flow: Some(flow),
        markers,
    })
}
