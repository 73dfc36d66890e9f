//! Inversive distance circle packing metrics on a triangulated disk.

mod triangle;

pub use triangle::{edge_length, Classification, TriangleData, TriangleGeom};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mesh::{MeshError, TriangulatedDisk};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PackingError {
    #[error("inversive distance {value} on edge {edge} must be a finite number above one")]
    InvalidWeight { edge: usize, value: f64 },
    #[error("expected {expected} {what}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("label of vertex {0} is not finite")]
    InvalidLabel(usize),
    #[error("degeneracy could not be attributed to a single vertex")]
    AmbiguousDegeneracy,
    #[error("triangle is degenerate or inadmissible")]
    DegenerateInput,
    #[error("triangle is inadmissible")]
    InadmissibleInput,
    #[error("face {0} is not a nondegenerate triangle")]
    DegenerateFace(usize),
    #[error("an endpoint of the radius interval is not admissible")]
    IntervalNotAdmissible,
    #[error("`{0}` does not name an edge of the mesh")]
    UnknownEdge(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Inversive distances on edges and logarithmic radii on vertices of a fixed mesh.
#[derive(Debug, Clone)]
pub struct PackingState {
    mesh: Arc<TriangulatedDisk>,
    weights: Vec<f64>,
    labels: Vec<f64>,
}

/// Geometry of every face together with vertex curvatures and edge conductances.
#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    pub faces: Vec<TriangleGeom>,
    pub curvature: Vec<f64>,
    /// Per-edge conductance; absent when some face is degenerate or inadmissible.
    pub conductance: Option<Vec<f64>>,
    pub any_inadmissible: bool,
    pub any_degenerate: bool,
    pub min_angle: f64,
    pub max_angle: f64,
    pub min_conductance: Option<f64>,
}

impl PackingState {
    pub fn new(
        mesh: Arc<TriangulatedDisk>,
        weights: Vec<f64>,
        labels: Vec<f64>,
    ) -> Result<Self, PackingError> {
        if weights.len() != mesh.n_edges() {
            return Err(PackingError::LengthMismatch {
                what: "weights",
                expected: mesh.n_edges(),
                got: weights.len(),
            });
        }
        if labels.len() != mesh.n_vertices() {
            return Err(PackingError::LengthMismatch {
                what: "labels",
                expected: mesh.n_vertices(),
                got: labels.len(),
            });
        }
        if let Some(e) = weights.iter().position(|&w| !(w > 1.0 && w.is_finite())) {
            return Err(PackingError::InvalidWeight {
                edge: e,
                value: weights[e],
            });
        }
        if let Some(v) = labels.iter().position(|u| !u.is_finite()) {
            return Err(PackingError::InvalidLabel(v));
        }
        Ok(Self {
            mesh,
            weights,
            labels,
        })
    }

    /// Same inversive distance on every edge and the same label on every vertex.
    pub fn constant(
        mesh: Arc<TriangulatedDisk>,
        weight: f64,
        label: f64,
    ) -> Result<Self, PackingError> {
        let (e, v) = (mesh.n_edges(), mesh.n_vertices());
        Self::new(mesh, vec![weight; e], vec![label; v])
    }

    pub fn mesh(&self) -> &TriangulatedDisk {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<TriangulatedDisk> {
        Arc::clone(&self.mesh)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(f64::MIN, f64::max)
    }

    /// Copy of this state with new labels.
    pub fn with_labels(&self, labels: Vec<f64>) -> Result<Self, PackingError> {
        Self::new(Arc::clone(&self.mesh), self.weights.clone(), labels)
    }

    /// Copy of this state with `w` added to every label.
    pub fn shifted(&self, w: &[f64]) -> Result<Self, PackingError> {
        let labels = self.labels.iter().zip(w).map(|(u, d)| u + d).collect();
        self.with_labels(labels)
    }

    pub fn triangle(&self, f: usize) -> TriangleData {
        let t = self.mesh.face(f);
        let e = self.mesh.face_edges(f);
        TriangleData::new(t.map(|v| self.labels[v]), e.map(|x| self.weights[x]))
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let [a, b] = self.mesh.edge(e).vertices;
        edge_length(self.labels[a], self.labels[b], self.weights[e])
    }

    pub fn lengths(&self) -> Vec<f64> {
        (0..self.mesh.n_edges())
            .map(|e| self.edge_length(e))
            .collect()
    }

    pub fn face_geoms(&self) -> Result<Vec<TriangleGeom>, PackingError> {
        (0..self.mesh.n_faces())
            .map(|f| self.triangle(f).geom())
            .collect()
    }

    /// Extended inner angles of every face, in face vertex order.
    pub fn angles(&self) -> Result<Vec<[f64; 3]>, PackingError> {
        (0..self.mesh.n_faces())
            .map(|f| self.triangle(f).extended_angles())
            .collect()
    }

    /// Discrete curvature from extended angles: `2 pi - sum` inside, `pi - sum` on the boundary.
    pub fn curvature(&self) -> Result<Vec<f64>, PackingError> {
        Ok(self.curvature_from_angles(&self.angles()?))
    }

    pub fn curvature_from_angles(&self, angles: &[[f64; 3]]) -> Vec<f64> {
        let m = &self.mesh;
        let mut sum = vec![0.0; m.n_vertices()];
        for (f, a) in angles.iter().enumerate() {
            for (k, &v) in m.face(f).iter().enumerate() {
                sum[v] += a[k];
            }
        }
        (0..m.n_vertices())
            .map(|v| if m.is_boundary(v) { PI } else { 2.0 * PI } - sum[v])
            .collect()
    }

    /// Per-face conductance terms, indexed by the opposite local vertex.
    pub fn conductance_terms(&self) -> Result<Vec<[f64; 3]>, PackingError> {
        (0..self.mesh.n_faces())
            .map(|f| {
                self.triangle(f)
                    .conductance_terms()
                    .map_err(|_| PackingError::DegenerateFace(f))
            })
            .collect()
    }

    /// Edge conductances `eta_ij`, summed over the faces containing each edge.
    pub fn conductance(&self) -> Result<Vec<f64>, PackingError> {
        Ok(self.conductance_from_terms(&self.conductance_terms()?))
    }

    pub fn conductance_from_terms(&self, terms: &[[f64; 3]]) -> Vec<f64> {
        let mut eta = vec![0.0; self.mesh.n_edges()];
        for (f, t) in terms.iter().enumerate() {
            for (k, &e) in self.mesh.face_edges(f).iter().enumerate() {
                eta[e] += t[k];
            }
        }
        eta
    }

    pub fn angle_jacobian(&self, f: usize) -> Result<[[f64; 3]; 3], PackingError> {
        self.triangle(f)
            .angle_jacobian()
            .map_err(|_| PackingError::DegenerateFace(f))
    }

    pub fn report(&self) -> Result<MetricReport, PackingError> {
        let faces = self.face_geoms()?;
        let angles: Vec<[f64; 3]> = faces.iter().map(|g| g.angles).collect();
        let curvature = self.curvature_from_angles(&angles);
        let any_inadmissible = faces
            .iter()
            .any(|g| matches!(g.class, Classification::Inadmissible(_)));
        let any_degenerate = faces
            .iter()
            .any(|g| matches!(g.class, Classification::DegenerateFlatAt(_)));
        let conductance = if any_inadmissible || any_degenerate {
            None
        } else {
            Some(self.conductance()?)
        };
        let min_conductance = conductance
            .as_ref()
            .map(|c| c.iter().cloned().fold(f64::INFINITY, f64::min));
        let all = angles.iter().flat_map(|a| a.iter().cloned());
        let (min_angle, max_angle) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
            (lo.min(a), hi.max(a))
        });
        Ok(MetricReport {
            faces,
            curvature,
            conductance,
            any_inadmissible,
            any_degenerate,
            min_angle,
            max_angle,
            min_conductance,
        })
    }

    pub fn to_file(&self) -> StateFile {
        let weights = self
            .mesh
            .edges()
            .iter()
            .zip(&self.weights)
            .map(|(e, &w)| (format!("{}-{}", e.vertices[0], e.vertices[1]), w))
            .collect();
        StateFile {
            weights,
            labels: self.labels.clone(),
        }
    }

    pub fn from_file(mesh: Arc<TriangulatedDisk>, file: &StateFile) -> Result<Self, PackingError> {
        let mut weights = vec![f64::NAN; mesh.n_edges()];
        for (k, &w) in &file.weights {
            let bad = || PackingError::UnknownEdge(k.clone());
            let (a, b) = k.split_once('-').ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            let e = mesh.edge_between(a, b).ok_or_else(bad)?;
            weights[e] = w;
        }
        Self::new(mesh, weights, file.labels.clone())
    }
}

/// JSON form of a packing state: `{"weights": {"i-j": I}, "labels": [u]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub weights: BTreeMap<String, f64>,
    pub labels: Vec<f64>,
}

/// Samples the signed angle at the first vertex toward the edge between the first two
/// circles while the third radius sweeps an admissible interval.
///
/// Returns `(r3, theta)` pairs on a uniform grid of `samples` points including both ends.
pub fn monotonicity_probe(
    r1: f64,
    r2: f64,
    weights: [f64; 3],
    interval: (f64, f64),
    samples: usize,
) -> Result<Vec<(f64, f64)>, PackingError> {
    let tri = |r3: f64| TriangleData::new([r1.ln(), r2.ln(), r3.ln()], weights);
    let (lo, hi) = interval;
    if !(lo > 0.0 && hi > lo) {
        return Err(PackingError::IntervalNotAdmissible);
    }
    for end in [lo, hi] {
        if let Classification::Inadmissible(_) = tri(end).classify()? {
            return Err(PackingError::IntervalNotAdmissible);
        }
    }
    let n = samples.max(2);
    (0..n)
        .map(|s| {
            let r3 = lo + (hi - lo) * s as f64 / (n - 1) as f64;
            Ok((r3, tri(r3).signed_angle(0, 1)?))
        })
        .collect()
}
