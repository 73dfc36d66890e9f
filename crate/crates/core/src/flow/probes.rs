//! Randomized checks of the discrete maximal principle and the ring lemma on stars.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::FlowError;
use crate::delaunay::delaunay_report;
use crate::mesh::{star_polygon, TriangulatedDisk};
use crate::packing::{Classification, PackingState};

/// Relative tolerance for calling two radius vectors proportional.
pub const PROPORTIONAL_TOL: f64 = 1e-9;
/// Slack allowed in the hypotheses before a sample counts as satisfying them.
pub const HYPOTHESIS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MaxPrincipleVerdict {
    /// `r = c rbar` with the reported `c`.
    Proportional { ratio: f64 },
    /// Hypotheses hold yet the radii are not proportional.
    Counterexample { spread: f64 },
}

/// Checks the maximal principle on a star whose center is vertex `0`.
///
/// Hypotheses: both packings are generalized weighted Delaunay, the center curvature of
/// `labels` is at most that of `labels_bar`, and the center maximizes `r_i / rbar_i`.
/// Under them the two packings must differ by a global scale.
pub fn maximal_principle_check(
    mesh: &Arc<TriangulatedDisk>,
    weights: &[f64],
    labels: &[f64],
    labels_bar: &[f64],
) -> Result<MaxPrincipleVerdict, FlowError> {
    if mesh.is_boundary(0) || mesh.interior_vertices().count() != 1 {
        return Err(FlowError::InvalidProblem(
            "mesh is not a star centered at 0".into(),
        ));
    }
    let s = PackingState::new(Arc::clone(mesh), weights.to_vec(), labels.to_vec())?;
    let sb = PackingState::new(Arc::clone(mesh), weights.to_vec(), labels_bar.to_vec())?;
    for (name, st) in [("r", &s), ("rbar", &sb)] {
        match delaunay_report(st) {
            Ok(r) if r.violations.is_empty() => {}
            _ => {
                return Err(FlowError::HypothesesNotMet(format!(
                    "{name} is not generalized weighted Delaunay"
                )))
            }
        }
    }
    let (k, kb) = (s.curvature()?[0], sb.curvature()?[0]);
    if k > kb + HYPOTHESIS_TOL {
        return Err(FlowError::HypothesesNotMet(format!(
            "center curvature {k} exceeds {kb}"
        )));
    }
    let log_ratio: Vec<f64> = labels.iter().zip(labels_bar).map(|(a, b)| a - b).collect();
    let top = log_ratio[1..].iter().cloned().fold(f64::MIN, f64::max);
    if top > log_ratio[0] + HYPOTHESIS_TOL {
        return Err(FlowError::HypothesesNotMet(
            "a boundary ratio exceeds the center ratio".into(),
        ));
    }
    let spread = log_ratio
        .iter()
        .map(|x| (x - log_ratio[0]).abs())
        .fold(0.0, f64::max);
    if spread <= PROPORTIONAL_TOL {
        Ok(MaxPrincipleVerdict::Proportional {
            ratio: log_ratio[0].exp(),
        })
    } else {
        Ok(MaxPrincipleVerdict::Counterexample { spread })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CampaignConfig {
    /// Stop after this many samples satisfy the hypotheses.
    pub target: usize,
    /// Give up after this many draws.
    pub max_draws: usize,
    pub petals: (usize, usize),
    pub max_weight: f64,
    pub seed: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            target: 100_000,
            max_draws: 2_000_000,
            petals: (5, 8),
            max_weight: 5.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CampaignReport {
    pub drawn: usize,
    pub hypotheses_met: usize,
    pub proportional: usize,
    pub counterexamples: usize,
    pub rejected_delaunay: usize,
    pub rejected_curvature: usize,
    pub rejected_ratio: usize,
    /// Draws per generator: scaled copies, boundary shrinks, independent pairs.
    pub draws_by_mode: [usize; 3],
    /// Hypothesis-satisfying samples per generator.
    pub met_by_mode: [usize; 3],
}

/// Random pairs of star packings tested against the maximal principle.
///
/// Three generators are mixed: exact rescalings of `rbar`; rescalings with some boundary
/// radii shrunk by factors `exp(-delta)`, `delta` log-uniform in `[1e-10, 1]`; and
/// independent labels with the center raised until it attains the largest ratio.
pub fn maximal_principle_campaign(config: &CampaignConfig) -> CampaignReport {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let meshes: Vec<Arc<TriangulatedDisk>> = (config.petals.0..=config.petals.1)
        .map(|n| Arc::new(star_polygon(n).unwrap()))
        .collect();
    let mut rep = CampaignReport::default();
    while rep.hypotheses_met < config.target && rep.drawn < config.max_draws {
        rep.drawn += 1;
        let mesh = &meshes[rng.gen_range(0..meshes.len())];
        let n = mesh.n_vertices();
        let weights: Vec<f64> = (0..mesh.n_edges())
            .map(|_| config.max_weight - (config.max_weight - 1.0) * rng.gen::<f64>())
            .collect();
        let ubar: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: f64 = rng.gen_range(-2.0..2.0);
        let mode = rng.gen_range(0..3);
        rep.draws_by_mode[mode] += 1;
        let u: Vec<f64> = match mode {
            0 => ubar.iter().map(|x| x + c).collect(),
            1 => {
                let mut u: Vec<f64> = ubar.iter().map(|x| x + c).collect();
                let mut shrunk = false;
                for x in u.iter_mut().skip(1) {
                    if rng.gen_bool(0.5) {
                        *x -= 10f64.powf(rng.gen_range(-10.0..0.0));
                        shrunk = true;
                    }
                }
                if !shrunk {
                    u[1] -= 10f64.powf(rng.gen_range(-10.0..0.0));
                }
                u
            }
            _ => {
                let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let top = (1..n).map(|i| u[i] - ubar[i]).fold(f64::MIN, f64::max);
                u[0] = ubar[0] + top;
                u
            }
        };
        match maximal_principle_check(mesh, &weights, &u, &ubar) {
            Ok(v) => {
                rep.hypotheses_met += 1;
                rep.met_by_mode[mode] += 1;
                match v {
                    MaxPrincipleVerdict::Proportional { .. } => rep.proportional += 1,
                    MaxPrincipleVerdict::Counterexample { .. } => rep.counterexamples += 1,
                }
            }
            Err(FlowError::HypothesesNotMet(msg)) => {
                if msg.contains("Delaunay") {
                    rep.rejected_delaunay += 1;
                } else if msg.contains("curvature") {
                    rep.rejected_curvature += 1;
                } else {
                    rep.rejected_ratio += 1;
                }
            }
            Err(_) => rep.rejected_delaunay += 1,
        }
    }
    rep
}

#[derive(Debug, Clone, Serialize)]
pub struct RingProbeReport {
    pub petals: usize,
    pub weight: f64,
    pub draws: usize,
    pub solved: usize,
    /// Draws where no sign change of the center curvature was found.
    pub not_bracketed: usize,
    /// Draws whose flat center produced an inadmissible face.
    pub not_generalized: usize,
    /// Largest `r0 / min_i r_i` over solved draws.
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// Center curvature of a star with the given boundary labels and center label `u0`.
pub fn star_center_curvature(state: &PackingState, u0: f64) -> f64 {
    let mut labels = state.labels().to_vec();
    labels[0] = u0;
    let s = state.with_labels(labels).expect("finite labels");
    s.curvature().map(|k| k[0]).unwrap_or(f64::NAN)
}

/// Finds the center label making the star flat, by bisection.
pub fn flat_center_label(state: &PackingState) -> Result<f64, FlowError> {
    let b = &state.labels()[1..];
    let lo0 = b.iter().cloned().fold(f64::MAX, f64::min) - 30.0;
    let hi0 = b.iter().cloned().fold(f64::MIN, f64::max) + 30.0;
    let (klo, khi) = (
        star_center_curvature(state, lo0),
        star_center_curvature(state, hi0),
    );
    if !(klo < 0.0 && khi > 0.0) {
        return Err(FlowError::RootNotBracketed);
    }
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if star_center_curvature(state, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Samples boundary labels uniformly in `[-1, 1]`, makes the center flat, and records
/// the ratio of the center radius to the smallest petal radius.
pub fn ring_constant_probe(
    petals: usize,
    weight: f64,
    draws: usize,
    seed: u64,
) -> Result<RingProbeReport, FlowError> {
    let mesh = Arc::new(star_polygon(petals)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = RingProbeReport {
        petals,
        weight,
        draws,
        solved: 0,
        not_bracketed: 0,
        not_generalized: 0,
        max_ratio: 0.0,
        mean_ratio: 0.0,
    };
    let mut sum = 0.0;
    for _ in 0..draws {
        let labels: Vec<f64> = (0..=petals)
            .map(|i| {
                if i == 0 {
                    0.0
                } else {
                    rng.gen_range(-1.0..1.0)
                }
            })
            .collect();
        let state = PackingState::new(Arc::clone(&mesh), vec![weight; mesh.n_edges()], labels)?;
        let u0 = match flat_center_label(&state) {
            Ok(u) => u,
            Err(_) => {
                rep.not_bracketed += 1;
                continue;
            }
        };
        let mut labels = state.labels().to_vec();
        labels[0] = u0;
        let flat = state.with_labels(labels)?;
        let admissible = (0..mesh.n_faces()).all(|f| {
            !matches!(
                flat.triangle(f).classify(),
                Ok(Classification::Inadmissible(_)) | Err(_)
            )
        });
        if !admissible {
            rep.not_generalized += 1;
            continue;
        }
        let min_petal = flat.labels()[1..].iter().cloned().fold(f64::MAX, f64::min);
        let ratio = (u0 - min_petal).exp();
        rep.solved += 1;
        sum += ratio;
        rep.max_ratio = rep.max_ratio.max(ratio);
    }
    if rep.solved > 0 {
        rep.mean_ratio = sum / rep.solved as f64;
    }
    Ok(rep)
}
