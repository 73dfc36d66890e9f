//! Curvature flow with prescribed labels on a Dirichlet set.
//!
//! The flow moves the free labels so that the curvature interpolates linearly between its
//! initial value and a target, `K(w(t)) = (1 - t) K0 + t K*`. Differentiating gives the
//! linear system `Delta w' = K* - K0` at every time, solved with the current conductances.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};
use sprs_ldl::LdlSymbolic;

use super::dirichlet::DirichletOperator;
use super::FlowError;
use crate::packing::{Classification, PackingState};

/// `min(pi / 1000, asin(1 / (10 (20 + I))))`.
pub fn theta0(weight: f64) -> f64 {
    (std::f64::consts::PI / 1000.0).min((1.0 / (10.0 * (20.0 + weight))).asin())
}

/// Integrator settings. JSON keys follow the field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    /// Nominal number of steps on `[0, 1]`; the initial step is `1 / steps`.
    pub steps: usize,
    /// Lower end of the angle corridor; `pi/6 - theta0(I_max)` when absent.
    pub angle_floor: Option<f64>,
    /// Upper end of the angle corridor; `pi/2 + theta0(I_max)` when absent.
    pub angle_ceiling: Option<f64>,
    /// The flow aborts when some edge conductance is at or below this value.
    pub conductance_floor: f64,
    /// Target accuracy of the terminal curvature on free vertices.
    pub curvature_tol: f64,
    pub max_correction_iters: usize,
    /// Smallest step before a failed step aborts the flow.
    pub min_step: f64,
    /// Steps are not halved for corridor proximity below this size.
    pub proximity_min_step: f64,
    /// Seed for randomized campaigns; the flow itself is deterministic.
    pub seed: u64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            steps: 32,
            angle_floor: None,
            angle_ceiling: None,
            conductance_floor: 0.0,
            curvature_tol: 1e-9,
            max_correction_iters: 50,
            min_step: 1e-7,
            proximity_min_step: 1.0 / 64.0,
            seed: 0,
        }
    }
}

impl FlowConfig {
    /// Angle corridor for a mesh whose largest inversive distance is `weight`.
    pub fn corridor(&self, weight: f64) -> (f64, f64) {
        let t0 = theta0(weight);
        let pi = std::f64::consts::PI;
        (
            self.angle_floor.unwrap_or(pi / 6.0 - t0),
            self.angle_ceiling.unwrap_or(pi / 2.0 + t0),
        )
    }
}

#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub state: PackingState,
    pub dirichlet: Vec<usize>,
    /// Target curvature for every vertex; entries on the Dirichlet set are ignored.
    pub target: Vec<f64>,
    pub config: FlowConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum FlowStatus {
    Completed,
    AbortedAngle { face: usize, t: f64 },
    AbortedConductance { edge: usize, t: f64 },
    SolverFailure { t: f64, reason: String },
}

impl FlowStatus {
    pub fn is_completed(&self) -> bool {
        matches!(self, FlowStatus::Completed)
    }
}

/// Diagnostics recorded after every accepted step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    pub w: Vec<f64>,
    pub curvature: Vec<f64>,
    pub min_angle: f64,
    pub max_angle: f64,
    pub min_conductance: f64,
    /// Smallest and largest single-face conductance term.
    pub conductance_terms: (f64, f64),
    /// Largest ratio of two radii within one face.
    pub max_radius_ratio: f64,
    /// `max_e eta_e |w'_i - w'_j|` for the velocity at this state.
    pub max_gradient: f64,
    /// Sup distance of the free curvatures from the linear interpolation.
    pub consistency_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowResult {
    /// Label increments, zero on the Dirichlet set.
    pub w: Vec<f64>,
    pub curvature: Vec<f64>,
    pub status: FlowStatus,
    pub trajectory: Vec<FlowSample>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub correction_iters: usize,
    /// Sup norm of the free curvature error after the terminal correction.
    pub final_residual: f64,
}

enum Failure {
    Angle(usize),
    Conductance(usize),
    Solver(String),
}

/// Geometry of the state `u0 + w` needed by the flow.
pub(crate) struct Eval {
    pub curvature: Vec<f64>,
    pub eta: Vec<f64>,
    pub min_angle: f64,
    pub max_angle: f64,
    pub term_range: (f64, f64),
    pub max_radius_ratio: f64,
    pub margin: f64,
}

pub(crate) struct Corridor {
    pub floor: f64,
    pub ceiling: f64,
    pub conductance_floor: f64,
}

fn evaluate(base: &PackingState, w: &[f64], c: &Corridor) -> Result<Eval, Failure> {
    let state = base
        .shifted(w)
        .map_err(|e| Failure::Solver(e.to_string()))?;
    let mesh = state.mesh();
    let mut angles = Vec::with_capacity(mesh.n_faces());
    let mut terms = Vec::with_capacity(mesh.n_faces());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut tlo, mut thi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut ratio = 1.0f64;
    for f in 0..mesh.n_faces() {
        let tri = state.triangle(f);
        match tri.classify() {
            Ok(Classification::NonDegenerate) => {}
            _ => return Err(Failure::Angle(f)),
        }
        let a = tri.euclidean_angles();
        for &x in &a {
            if !(x >= c.floor && x <= c.ceiling) {
                return Err(Failure::Angle(f));
            }
            lo = lo.min(x);
            hi = hi.max(x);
        }
        let t = tri.conductance_terms().map_err(|_| Failure::Angle(f))?;
        for &x in &t {
            tlo = tlo.min(x);
            thi = thi.max(x);
        }
        let u = tri.u;
        let (umin, umax) = u
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        ratio = ratio.max((umax - umin).exp());
        angles.push(a);
        terms.push(t);
    }
    let eta = state.conductance_from_terms(&terms);
    let mut min_eta = f64::INFINITY;
    for (e, &x) in eta.iter().enumerate() {
        if !(x > c.conductance_floor) {
            return Err(Failure::Conductance(e));
        }
        min_eta = min_eta.min(x);
    }
    let curvature = state.curvature_from_angles(&angles);
    let margin = (lo - c.floor).min(c.ceiling - hi);
    Ok(Eval {
        curvature,
        eta,
        min_angle: lo,
        max_angle: hi,
        term_range: (tlo, thi),
        max_radius_ratio: ratio,
        margin,
    })
}

struct Stage {
    eval: Eval,
    velocity: Vec<f64>,
}

struct Stepper<'a> {
    base: &'a PackingState,
    corridor: Corridor,
    dirichlet: &'a [usize],
    rhs: Vec<f64>,
    symbolic: RefCell<Option<LdlSymbolic<usize>>>,
}

impl Stepper<'_> {
    fn operator(&self, eta: &[f64]) -> Result<DirichletOperator, FlowError> {
        let mut sym = self.symbolic.borrow_mut();
        DirichletOperator::assemble_cached(self.base.mesh(), eta, self.dirichlet, &mut sym)
    }

    fn stage(&self, w: &[f64]) -> Result<Stage, Failure> {
        stage(self, w)
    }
}

fn stage(st: &Stepper, w: &[f64]) -> Result<Stage, Failure> {
    let eval = evaluate(st.base, w, &st.corridor)?;
    let rhs = &st.rhs;
    let op = st
        .operator(&eval.eta)
        .map_err(|e| Failure::Solver(e.to_string()))?;
    let velocity = op.solve(rhs).map_err(|e| Failure::Solver(e.to_string()))?;
    Ok(Stage { eval, velocity })
}

/// Velocity `w'` solving `Delta w' = delta_k` on the free vertices with `w' = 0` on `V0`.
pub fn flow_velocity(
    state: &PackingState,
    dirichlet: &[usize],
    delta_k: &[f64],
) -> Result<Vec<f64>, FlowError> {
    let eta = state.conductance()?;
    let op = DirichletOperator::assemble(state.mesh(), &eta, dirichlet)?;
    op.solve(delta_k)
}

fn max_gradient(base: &PackingState, eta: &[f64], v: &[f64]) -> f64 {
    base.mesh()
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| eta[e] * (v[edge.vertices[0]] - v[edge.vertices[1]]).abs())
        .fold(0.0, f64::max)
}

fn sup_free(a: &[f64], b: &[f64], fixed: &[bool]) -> f64 {
    a.iter()
        .zip(b)
        .zip(fixed)
        .filter(|(_, &f)| !f)
        .map(|((x, y), _)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Integrates the flow from `t = 0` to `t = 1` with classical Runge-Kutta steps, then
/// applies Newton corrections `w += L^{-1} (K* - K(w))` on the free vertices.
///
/// A step is retried at half size when any stage leaves the angle or conductance corridor
/// or the linear solve fails; the flow aborts once the step would drop below
/// `config.min_step`. After an accepted step whose state lies within ten percent of the
/// corridor width from its edge, the next step is halved, down to
/// `config.proximity_min_step`.
pub fn integrate_flow(problem: &FlowProblem) -> Result<FlowResult, FlowError> {
    let base = &problem.state;
    let mesh = base.mesh();
    let n = mesh.n_vertices();
    if problem.target.len() != n {
        return Err(FlowError::InvalidProblem(format!(
            "target has {} entries for {n} vertices",
            problem.target.len()
        )));
    }
    let cfg = &problem.config;
    let (floor, ceiling) = cfg.corridor(base.max_weight());
    let corridor = Corridor {
        floor,
        ceiling,
        conductance_floor: cfg.conductance_floor,
    };
    let mut fixed = vec![false; n];
    for &v in &problem.dirichlet {
        if v >= n {
            return Err(FlowError::InvalidProblem(format!(
                "vertex {v} out of range"
            )));
        }
        fixed[v] = true;
    }

    let zero = vec![0.0; n];
    let k0 = match evaluate(base, &zero, &corridor) {
        Ok(e) => e.curvature,
        Err(Failure::Angle(f)) => {
            return Err(FlowError::InitialStateOutsideCorridor(format!(
                "face {f} has an angle outside [{floor}, {ceiling}]"
            )))
        }
        Err(Failure::Conductance(e)) => {
            return Err(FlowError::InitialStateOutsideCorridor(format!(
                "edge {e} has conductance at or below the floor"
            )))
        }
        Err(Failure::Solver(s)) => return Err(FlowError::SolverFailure(s)),
    };
    let rhs: Vec<f64> = (0..n)
        .map(|v| {
            if fixed[v] {
                0.0
            } else {
                problem.target[v] - k0[v]
            }
        })
        .collect();
    let width = ceiling - floor;
    let st = Stepper {
        base,
        corridor,
        dirichlet: &problem.dirichlet,
        rhs,
        symbolic: RefCell::new(None),
    };
    let interp = |t: f64| -> Vec<f64> {
        (0..n)
            .map(|v| (1.0 - t) * k0[v] + t * problem.target[v])
            .collect()
    };

    let mut h = 1.0 / cfg.steps.max(1) as f64;
    let mut t = 0.0;
    let mut w = zero.clone();
    let mut trajectory = Vec::new();
    let (mut accepted, mut rejected) = (0, 0);

    let abort = |fail: Failure, t: f64, w: Vec<f64>, cur: Vec<f64>, traj, acc, rej| {
        let status = match fail {
            Failure::Angle(face) => FlowStatus::AbortedAngle { face, t },
            Failure::Conductance(edge) => FlowStatus::AbortedConductance { edge, t },
            Failure::Solver(reason) => FlowStatus::SolverFailure { t, reason },
        };
        log::debug!("flow stopped: {status:?}");
        Ok(FlowResult {
            w,
            curvature: cur,
            status,
            trajectory: traj,
            accepted_steps: acc,
            rejected_steps: rej,
            correction_iters: 0,
            final_residual: f64::NAN,
        })
    };

    let mut current = match st.stage(&w) {
        Ok(s) => s,
        Err(f) => return abort(f, 0.0, w, k0.clone(), trajectory, 0, 0),
    };
    let record = |t: f64, w: &[f64], s: &Stage| FlowSample {
        t,
        w: w.to_vec(),
        curvature: s.eval.curvature.clone(),
        min_angle: s.eval.min_angle,
        max_angle: s.eval.max_angle,
        min_conductance: s.eval.eta.iter().cloned().fold(f64::INFINITY, f64::min),
        conductance_terms: s.eval.term_range,
        max_radius_ratio: s.eval.max_radius_ratio,
        max_gradient: max_gradient(base, &s.eval.eta, &s.velocity),
        consistency_error: sup_free(&s.eval.curvature, &interp(t), &fixed),
    };
    trajectory.push(record(0.0, &w, &current));

    while t < 1.0 {
        h = h.min(1.0 - t);
        let k1 = &current.velocity;
        let attempt = (|| -> Result<(Vec<f64>, Stage), Failure> {
            let at = |c: f64, k: &[f64]| -> Vec<f64> {
                w.iter().zip(k).map(|(a, b)| a + c * b).collect()
            };
            let s2 = st.stage(&at(h / 2.0, k1))?;
            let s3 = st.stage(&at(h / 2.0, &s2.velocity))?;
            let s4 = st.stage(&at(h, &s3.velocity))?;
            let next: Vec<f64> = (0..n)
                .map(|v| {
                    w[v] + h / 6.0
                        * (k1[v] + 2.0 * s2.velocity[v] + 2.0 * s3.velocity[v] + s4.velocity[v])
                })
                .collect();
            let s = st.stage(&next)?;
            Ok((next, s))
        })();
        match attempt {
            Ok((next, s)) => {
                t = if 1.0 - (t + h) < 1e-15 { 1.0 } else { t + h };
                w = next;
                current = s;
                accepted += 1;
                trajectory.push(record(t, &w, &current));
                if current.eval.margin < 0.1 * width && h / 2.0 >= cfg.proximity_min_step {
                    h /= 2.0;
                }
            }
            Err(fail) => {
                rejected += 1;
                h /= 2.0;
                if h < cfg.min_step {
                    let cur = current.eval.curvature.clone();
                    return abort(fail, t, w, cur, trajectory, accepted, rejected);
                }
            }
        }
    }

    // Newton corrections toward the exact target.
    let mut iters = 0;
    let mut residual = sup_free(&current.eval.curvature, &problem.target, &fixed);
    while residual >= cfg.curvature_tol && iters < cfg.max_correction_iters {
        let err: Vec<f64> = (0..n)
            .map(|v| {
                if fixed[v] {
                    0.0
                } else {
                    problem.target[v] - current.eval.curvature[v]
                }
            })
            .collect();
        let op = st.operator(&current.eval.eta);
        let dw = match op.and_then(|op| op.solve(&err)) {
            Ok(d) => d,
            Err(e) => {
                let cur = current.eval.curvature.clone();
                return abort(
                    Failure::Solver(e.to_string()),
                    1.0,
                    w,
                    cur,
                    trajectory,
                    accepted,
                    rejected,
                );
            }
        };
        let next: Vec<f64> = w.iter().zip(&dw).map(|(a, b)| a + b).collect();
        match st.stage(&next) {
            Ok(s) => {
                w = next;
                current = s;
            }
            Err(f) => {
                let cur = current.eval.curvature.clone();
                return abort(f, 1.0, w, cur, trajectory, accepted, rejected);
            }
        }
        iters += 1;
        residual = sup_free(&current.eval.curvature, &problem.target, &fixed);
    }
    let status = if residual < cfg.curvature_tol {
        FlowStatus::Completed
    } else {
        FlowStatus::SolverFailure {
            t: 1.0,
            reason: format!("terminal correction stalled at residual {residual:e}"),
        }
    };
    log::debug!("flow finished: {accepted} accepted, {rejected} rejected, {iters} corrections, residual {residual:e}");
    if iters > 0 {
        trajectory.push(record(1.0, &w, &current));
    }
    Ok(FlowResult {
        w,
        curvature: current.eval.curvature,
        status,
        trajectory,
        accepted_steps: accepted,
        rejected_steps: rejected,
        correction_iters: iters,
        final_residual: residual,
    })
}
