//! Linear discrete conformal factors on the hexagonal lattice.
//!
//! Lattice points are integer pairs `(a, b)` standing for `a v1 + b v2` with `v1 = (1, 0)`
//! and `v2 = (1/2, sqrt 3 / 2)`. Each face has a base point `(a, b)`: the up face is
//! `(a, b), (a + 1, b), (a, b + 1)` and the down face is `(a, b), (a, b + 1), (a - 1, b + 1)`,
//! both listed counterclockwise with the base first. Edges parallel to `v1`, `v2` and
//! `v2 - v1` carry the weights `I[0]`, `I[1]` and `I[2]`.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::delaunay::delaunay_report;
use crate::flow::{integrate_flow, FlowConfig, FlowProblem};
use crate::layout::{develop, embedding_check, Embedding};
use crate::mesh::TriangulatedDisk;
use crate::packing::{Classification, PackingError, PackingState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpiralError {
    #[error("weights must be finite and above one, got {0:?}")]
    InvalidWeight([f64; 3]),
    #[error("lambda and mu must be finite and positive")]
    InvalidFactor,
    #[error("face {0} is inadmissible")]
    InadmissibleFace(usize),
    #[error("no sign change of the constant equation found up to a factor of 1e6")]
    BracketNotFound,
    #[error(transparent)]
    Packing(#[from] PackingError),
}

/// `{"I": [i1, i2, i3], "u": u, "lambda": l, "mu": m, "m": radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpiralConfig {
    #[serde(rename = "I")]
    pub weights: [f64; 3],
    pub u: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Combinatorial radius of the hexagonal ball around the origin.
    pub m: usize,
}

impl SpiralConfig {
    fn validate(&self) -> Result<(), SpiralError> {
        if !self.weights.iter().all(|&w| w.is_finite() && w > 1.0) {
            return Err(SpiralError::InvalidWeight(self.weights));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0 && self.mu.is_finite() && self.mu > 0.0)
            || !self.u.is_finite()
        {
            return Err(SpiralError::InvalidFactor);
        }
        Ok(())
    }

    /// Factor `a log(lambda) + b log(mu)` at `(a, b)`.
    pub fn factor(&self, p: [i64; 2]) -> f64 {
        p[0] as f64 * self.lambda.ln() + p[1] as f64 * self.mu.ln()
    }
}

/// The ball `max(|a|, |b|, |a + b|) <= m` of the hexagonal lattice.
#[derive(Debug, Clone)]
pub struct HexBall {
    pub mesh: Arc<TriangulatedDisk>,
    pub points: Vec<[i64; 2]>,
    pub origin: usize,
    /// Base point of every face, listed first in the face.
    pub face_base: Vec<[i64; 2]>,
    pub face_up: Vec<bool>,
}

pub fn hex_norm(p: [i64; 2]) -> i64 {
    p[0].abs().max(p[1].abs()).max((p[0] + p[1]).abs())
}

/// Direction class of the edge from `p` to `q`.
pub fn edge_direction(p: [i64; 2], q: [i64; 2]) -> Option<usize> {
    match [q[0] - p[0], q[1] - p[1]] {
        [1, 0] | [-1, 0] => Some(0),
        [0, 1] | [0, -1] => Some(1),
        [-1, 1] | [1, -1] => Some(2),
        _ => None,
    }
}

impl HexBall {
    pub fn new(m: usize) -> Self {
        let m = m as i64;
        let mut points = Vec::new();
        for b in -m..=m {
            for a in -m..=m {
                if hex_norm([a, b]) <= m {
                    points.push([a, b]);
                }
            }
        }
        let index: HashMap<[i64; 2], usize> =
            points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut faces = Vec::new();
        let mut face_base = Vec::new();
        let mut face_up = Vec::new();
        for &[a, b] in &points {
            let up = [[a, b], [a + 1, b], [a, b + 1]];
            let down = [[a, b], [a, b + 1], [a - 1, b + 1]];
            for (tri, is_up) in [(up, true), (down, false)] {
                if let (Some(&x), Some(&y), Some(&z)) =
                    (index.get(&tri[0]), index.get(&tri[1]), index.get(&tri[2]))
                {
                    faces.push([x, y, z]);
                    face_base.push([a, b]);
                    face_up.push(is_up);
                }
            }
        }
        let mesh = TriangulatedDisk::build_from_faces(&faces).expect("hexagonal ball is a disk");
        Self {
            mesh: Arc::new(mesh),
            origin: index[&[0, 0]],
            points,
            face_base,
            face_up,
        }
    }

    pub fn mesh_arc(&self) -> Arc<TriangulatedDisk> {
        Arc::clone(&self.mesh)
    }

    pub fn edge_weights(&self, weights: [f64; 3]) -> Vec<f64> {
        self.mesh
            .edges()
            .iter()
            .map(|e| {
                let [a, b] = e.vertices;
                weights[edge_direction(self.points[a], self.points[b]).expect("lattice edge")]
            })
            .collect()
    }

    /// Planar positions of the lattice points for unit spacing.
    pub fn coords(&self) -> Vec<[f64; 2]> {
        let h = 3f64.sqrt() / 2.0;
        self.points
            .iter()
            .map(|&[a, b]| [a as f64 + b as f64 / 2.0, b as f64 * h])
            .collect()
    }
}

/// Packing on the hexagonal ball with label `u + a log(lambda) + b log(mu)` at `(a, b)`.
pub fn spiral_state(config: &SpiralConfig) -> Result<(HexBall, PackingState), SpiralError> {
    config.validate()?;
    let ball = HexBall::new(config.m);
    let labels = ball
        .points
        .iter()
        .map(|&p| config.u + config.factor(p))
        .collect();
    let state = PackingState::new(ball.mesh_arc(), ball.edge_weights(config.weights), labels)?;
    Ok((ball, state))
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessReport {
    /// `(vertex, K)` for every vertex with a full hexagonal star.
    pub curvatures: Vec<(usize, f64)>,
    pub max_abs_curvature: f64,
    /// Largest difference between angle triples of faces in the same translation class,
    /// for up and down faces.
    pub class_spread: [f64; 2],
    pub any_degenerate: bool,
}

/// Curvature at the interior vertices of the spiral packing. Fails on an inadmissible face.
pub fn verify_spiral_flatness(config: &SpiralConfig) -> Result<FlatnessReport, SpiralError> {
    let (ball, state) = spiral_state(config)?;
    let geoms = state.face_geoms()?;
    if let Some(f) = geoms
        .iter()
        .position(|g| matches!(g.class, Classification::Inadmissible(_)))
    {
        return Err(SpiralError::InadmissibleFace(f));
    }
    let angles: Vec<[f64; 3]> = geoms.iter().map(|g| g.angles).collect();
    let k = state.curvature_from_angles(&angles);
    let curvatures: Vec<(usize, f64)> = ball.mesh.interior_vertices().map(|v| (v, k[v])).collect();
    let max_abs_curvature = curvatures.iter().map(|x| x.1.abs()).fold(0.0, f64::max);
    let mut class_spread = [0.0f64; 2];
    for (c, up) in [(0, true), (1, false)] {
        let class: Vec<&[f64; 3]> = (0..angles.len())
            .filter(|&f| ball.face_up[f] == up)
            .map(|f| &angles[f])
            .collect();
        if let Some(first) = class.first() {
            for a in &class {
                for i in 0..3 {
                    class_spread[c] = class_spread[c].max((a[i] - first[i]).abs());
                }
            }
        }
    }
    Ok(FlatnessReport {
        curvatures,
        max_abs_curvature,
        class_spread,
        any_degenerate: geoms
            .iter()
            .any(|g| g.class != Classification::NonDegenerate),
    })
}

/// Curvature at which a face becomes flat at a vertex with neighbors of curvature `kj`,
/// `kk`. `i_opp` is the weight opposite that vertex, `ij`, `ik` the weights opposite the
/// neighbors.
fn flat_curvature(kj: f64, kk: f64, i_opp: f64, ij: f64, ik: f64) -> f64 {
    let d = i_opp * i_opp + ij * ij + ik * ik + 2.0 * i_opp * ij * ik - 1.0;
    let gj = ij + i_opp * ik;
    let gk = ik + i_opp * ij;
    (kj * gk + kk * gj + (d * (kj * kj + kk * kk + 2.0 * kj * kk * i_opp)).sqrt())
        / (i_opp * i_opp - 1.0)
}

/// Right side of the first constant equation: the curvature of `-v2` that makes the face
/// `0, -v1, -v2` flat there, with curvature `kappa` at `0` and `kappa lambda` at `-v1`.
fn f1(w: [f64; 3], kappa: f64, lambda: f64) -> f64 {
    // opposite -v2 is the v1 edge, opposite 0 is the v2 - v1 edge, opposite -v1 the v2 edge
    flat_curvature(kappa, kappa * lambda, w[0], w[2], w[1])
}

/// Right side of the second constant equation: the curvature of `-v2` that makes the face
/// `0, -v2, v1 - v2` flat there, with curvature `kappa mu / lambda` at `v1 - v2`.
fn f2(w: [f64; 3], kappa: f64, ratio: f64) -> f64 {
    // opposite -v2 is the v2 - v1 edge, opposite 0 the v1 edge, opposite v1 - v2 the v2 edge
    flat_curvature(kappa, kappa * ratio, w[2], w[0], w[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegenerateConstants {
    pub lambda: f64,
    pub mu: f64,
    /// `kappa mu - f1` and `kappa mu - f2`, relative to `kappa`.
    pub residuals: [f64; 2],
    pub iterations: usize,
}

/// Residuals of both constant equations at `(lambda, mu)`, relative to `e^{-u}`.
pub fn degenerate_residuals(weights: [f64; 3], u: f64, lambda: f64, mu: f64) -> [f64; 2] {
    let kappa = (-u).exp();
    [
        (kappa * mu - f1(weights, kappa, lambda)) / kappa,
        (kappa * mu - f2(weights, kappa, mu / lambda)) / kappa,
    ]
}

/// `f1(lambda) - f2(lambda)` with `mu` taken from the first equation. Strictly increasing.
pub fn constant_gap(weights: [f64; 3], u: f64, lambda: f64) -> f64 {
    let kappa = (-u).exp();
    let mu = f1(weights, kappa, lambda) / kappa;
    (f1(weights, kappa, lambda) - f2(weights, kappa, mu / lambda)) / kappa
}

/// Solves for the factors of the linear degenerate packing, starting from the bracket
/// `[1/2, 2]` in `lambda`.
pub fn solve_degenerate_constants(
    weights: [f64; 3],
    u: f64,
) -> Result<DegenerateConstants, SpiralError> {
    solve_degenerate_constants_from(weights, u, (0.5, 2.0))
}

/// As [`solve_degenerate_constants`] with a caller-chosen initial bracket. The bracket is
/// widened geometrically up to `[1e-6, 1e6]`; bisection runs on `log lambda` until the
/// interval is below `1e-13`.
pub fn solve_degenerate_constants_from(
    weights: [f64; 3],
    u: f64,
    bracket: (f64, f64),
) -> Result<DegenerateConstants, SpiralError> {
    if !weights.iter().all(|&w| w.is_finite() && w > 1.0) {
        return Err(SpiralError::InvalidWeight(weights));
    }
    let g = |x: f64| constant_gap(weights, u, x.exp());
    let (mut lo, mut hi) = (bracket.0.ln(), bracket.1.ln());
    let limit = 1e6f64.ln();
    let mut step = (hi - lo).max(1.0);
    while g(lo) > 0.0 {
        if lo <= -limit {
            return Err(SpiralError::BracketNotFound);
        }
        lo = (lo - step).max(-limit);
        step *= 2.0;
    }
    let mut step = (hi - lo).max(1.0);
    while g(hi) < 0.0 {
        if hi >= limit {
            return Err(SpiralError::BracketNotFound);
        }
        hi = (hi + step).min(limit);
        step *= 2.0;
    }
    let mut iterations = 0;
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let lambda = (0.5 * (lo + hi)).exp();
    let kappa = (-u).exp();
    let mu = f1(weights, kappa, lambda) / kappa;
    Ok(DegenerateConstants {
        lambda,
        mu,
        residuals: degenerate_residuals(weights, u, lambda, mu),
        iterations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DegeneratePattern {
    pub faces: usize,
    /// Faces that are not flat at their base point.
    pub mismatches: Vec<usize>,
    /// Angle of the origin in `(0, v1, v2)` and `(0, v2, v2 - v1)`.
    pub origin_angles: [f64; 2],
}

impl DegeneratePattern {
    /// Every face is flat at its base point.
    pub fn is_case_one(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Classifies every face of the spiral packing. In the pattern reached by the degenerate
/// constants, each face is flat at its base point, so the origin has angle `pi` in both
/// faces based there.
pub fn degenerate_pattern(config: &SpiralConfig) -> Result<DegeneratePattern, SpiralError> {
    let (ball, state) = spiral_state(config)?;
    let mut mismatches = Vec::new();
    let mut origin_angles = [f64::NAN; 2];
    for f in 0..ball.mesh.n_faces() {
        let t = state.triangle(f);
        match t.classify() {
            Ok(Classification::DegenerateFlatAt(0)) => {}
            _ => mismatches.push(f),
        }
        if ball.face_base[f] == [0, 0] {
            let a = t.extended_angles().map(|a| a[0]).unwrap_or(f64::NAN);
            origin_angles[usize::from(!ball.face_up[f])] = a;
        }
    }
    Ok(DegeneratePattern {
        faces: ball.mesh.n_faces(),
        mismatches,
        origin_angles,
    })
}

/// Outcome of the three filters for one candidate factor.
#[derive(Debug, Clone, Serialize)]
pub struct RigidityCandidate {
    pub kind: String,
    pub max_abs_curvature: f64,
    pub flat: bool,
    pub delaunay: bool,
    pub embedding: Option<Embedding>,
    pub survived: bool,
    /// Spread `max w - min w` over the whole ball and over the half-radius ball.
    pub spread: f64,
    pub inner_spread: f64,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub weight: f64,
    pub m: usize,
    pub candidates: Vec<RigidityCandidate>,
}

pub const FLAT_TOL: f64 = 1e-9;

fn screen(ball: &HexBall, state: &PackingState, w: &[f64], kind: &str) -> RigidityCandidate {
    let k = state.curvature().ok();
    let max_abs_curvature = k
        .as_ref()
        .map(|k| {
            ball.mesh
                .interior_vertices()
                .map(|v| k[v].abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY);
    let flat = max_abs_curvature < FLAT_TOL;
    let delaunay = flat && matches!(delaunay_report(state), Ok(r) if r.violations.is_empty());
    let embedding = if flat && delaunay {
        develop(&ball.mesh, &state.lengths())
            .ok()
            .map(|l| embedding_check(&ball.mesh, &l))
    } else {
        None
    };
    let survived = embedding == Some(Embedding::Embedded);
    let half = (ball.points.iter().map(|&p| hex_norm(p)).max().unwrap_or(0) / 2).max(1);
    let range = |it: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
            (a.min(x), b.max(x))
        });
        (hi - lo).max(0.0)
    };
    let spread = range(&mut w.iter().copied());
    let inner_spread = range(
        &mut (0..w.len())
            .filter(|&v| hex_norm(ball.points[v]) <= half)
            .map(|v| w[v]),
    );
    RigidityCandidate {
        kind: kind.to_string(),
        max_abs_curvature,
        flat,
        delaunay,
        embedding,
        survived,
        spread,
        inner_spread,
        note: String::new(),
    }
}

/// Screens candidate factors on the ball of radius `m` with constant weight.
///
/// Candidates are a constant shift, spiral factors (which should fail to embed once the
/// ball is large enough), random perturbations of the constant label (which should fail
/// flatness), and flat factors driven by random boundary values. A finite ball carries
/// non-constant flat factors, so the last kind may survive; its note records how much
/// smaller the factor's variation is on the inner half of the ball than on the boundary.
pub fn rigidity_experiment(
    weight: f64,
    m: usize,
    draws: usize,
    seed: u64,
) -> Result<RigidityReport, SpiralError> {
    let weights = [weight; 3];
    let base = SpiralConfig {
        weights,
        u: 0.0,
        lambda: 1.0,
        mu: 1.0,
        m,
    };
    base.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = Vec::new();
    let (ball, state0) = spiral_state(&base)?;
    let nv = ball.mesh.n_vertices();

    let c = 0.37;
    let shifted = state0.shifted(&vec![c; nv])?;
    candidates.push(screen(&ball, &shifted, &vec![c; nv], "constant"));

    if let Some(cfg) = find_overlapping_spiral(weights, m) {
        let (_, s) = spiral_state(&cfg)?;
        let w: Vec<f64> = ball.points.iter().map(|&p| cfg.factor(p)).collect();
        let mut cand = screen(&ball, &s, &w, "spiral");
        cand.note = format!("lambda = {}, mu = {}", cfg.lambda, cfg.mu);
        candidates.push(cand);
    }

    for _ in 0..draws {
        let w: Vec<f64> = (0..nv).map(|_| rng.gen_range(-0.05..0.05)).collect();
        let s = state0.shifted(&w)?;
        candidates.push(screen(&ball, &s, &w, "perturbed"));
    }

    let boundary: Vec<usize> = ball.mesh.boundary_cycle().to_vec();
    for _ in 0..draws {
        let mut start = vec![0.0; nv];
        for &v in &boundary {
            start[v] = rng.gen_range(-0.1..0.1);
        }
        let problem = FlowProblem {
            state: state0.shifted(&start)?,
            dirichlet: boundary.clone(),
            target: vec![0.0; nv],
            config: FlowConfig::default(),
        };
        let Ok(flow) = integrate_flow(&problem) else {
            continue;
        };
        if !flow.status.is_completed() {
            continue;
        }
        let w: Vec<f64> = start.iter().zip(&flow.w).map(|(a, b)| a + b).collect();
        let s = state0.shifted(&w)?;
        let mut cand = screen(&ball, &s, &w, "boundary-driven");
        cand.note = format!(
            "finite-ball effect: inner/boundary variation ratio {:.3e}",
            cand.inner_spread / cand.spread.max(f64::MIN_POSITIVE)
        );
        candidates.push(cand);
    }
    Ok(RigidityReport {
        weight,
        m,
        candidates,
    })
}

/// Searches a grid of factors for a spiral packing on the ball of radius `m` that is
/// nondegenerate, flat and weighted Delaunay but whose layout overlaps itself.
pub fn find_overlapping_spiral(weights: [f64; 3], m: usize) -> Option<SpiralConfig> {
    let steps: [f64; 5] = [0.3, 0.5, 0.7, 0.9, 1.1];
    for &s in &steps {
        for (x, y) in [(1.0, 0.0), (0.0, 1.0), (1.0, -1.0), (1.0, 1.0), (1.0, -0.5)] {
            let cfg = SpiralConfig {
                weights,
                u: 0.0,
                lambda: (s * x).exp(),
                mu: (s * y).exp(),
                m,
            };
            let Ok((ball, state)) = spiral_state(&cfg) else {
                continue;
            };
            let Ok(geoms) = state.face_geoms() else {
                continue;
            };
            if geoms
                .iter()
                .any(|g| g.class != Classification::NonDegenerate)
            {
                continue;
            }
            if !matches!(delaunay_report(&state), Ok(r) if r.violations.is_empty()) {
                continue;
            }
            let Ok(layout) = develop(&ball.mesh, &state.lengths()) else {
                continue;
            };
            if matches!(
                embedding_check(&ball.mesh, &layout),
                Embedding::Overlap { .. }
            ) {
                return Some(cfg);
            }
        }
    }
    None
}
