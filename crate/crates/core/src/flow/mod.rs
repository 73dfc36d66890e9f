//! Combinatorial curvature flows with Dirichlet conditions and related probes.

mod corner;
mod dirichlet;
mod flatten;
mod integrate;
mod probes;

pub use corner::{corner_flow, CornerFlowResult};
pub use dirichlet::{apply_laplacian, DirichletOperator};
pub use flatten::{flatten_disk, CornerSummary, FlattenResult};
pub use integrate::{
    flow_velocity, integrate_flow, theta0, FlowConfig, FlowProblem, FlowResult, FlowSample,
    FlowStatus,
};
pub use probes::{
    flat_center_label, maximal_principle_campaign, maximal_principle_check, ring_constant_probe,
    star_center_curvature, CampaignConfig, CampaignReport, MaxPrincipleVerdict, RingProbeReport,
    HYPOTHESIS_TOL, PROPORTIONAL_TOL,
};

use thiserror::Error;

use crate::mesh::MeshError;
use crate::packing::PackingError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("conductance of edge {0} is not positive")]
    NonPositiveConductance(usize),
    #[error("linear solve failed: {0}")]
    SolverFailure(String),
    #[error("invalid flow problem: {0}")]
    InvalidProblem(String),
    #[error("initial state is outside the corridor: {0}")]
    InitialStateOutsideCorridor(String),
    #[error("corner angle {0} is outside [pi/6, pi/2]")]
    AlphaOutOfRange(f64),
    #[error("boundary vertex {vertex} has unsupported degree {degree}")]
    CornerDegreeUnsupported { vertex: usize, degree: usize },
    #[error("interior vertex {vertex} has degree {degree}, not 6")]
    InteriorNotFlat { vertex: usize, degree: usize },
    #[error("balls around corners {a} and {b} overlap; use a finer subdivision")]
    OverlappingCornerBalls { a: usize, b: usize },
    #[error("glued corner sectors disagree by {diff:e} at vertex {vertex}")]
    RayMismatch { vertex: usize, diff: f64 },
    #[error("hypotheses not met: {0}")]
    HypothesesNotMet(String),
    #[error("no sign change of the center curvature in the search interval")]
    RootNotBracketed,
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
