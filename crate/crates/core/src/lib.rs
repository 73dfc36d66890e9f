//! Inversive distance circle packings on triangulated disks.
//!
//! The crate covers the combinatorics of lattice disks, the per-triangle geometry of
//! packings with inversive distances greater than one, weighted Delaunay tests,
//! combinatorial curvature flows with Dirichlet conditions, planar layouts and
//! piecewise-linear maps, experiments with spiral packings, and an end-to-end pipeline
//! that approximates the map from an equilateral triangle onto a polygonal domain.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod delaunay;
pub mod flow;
pub mod geom;
pub mod layout;
pub mod mesh;
pub mod packing;
pub mod pipeline;
pub mod spiral;
