//! Weighted Delaunay margins of interior edges.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::packing::{Classification, PackingError, PackingState};

/// Margins within this distance of zero count as neither positive nor violating.
pub const ZERO_MARGIN_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DelaunayError {
    #[error("face {0} is inadmissible")]
    InadmissibleFace(usize),
    #[error("edge {0} is a boundary edge")]
    BoundaryEdge(usize),
    #[error(transparent)]
    Packing(#[from] PackingError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelaunayReport {
    /// `(edge, margin)` for every interior edge, in edge order.
    pub margins: Vec<(usize, f64)>,
    /// Interior edges whose margin is below `-ZERO_MARGIN_TOL`.
    pub violations: Vec<usize>,
    /// Whether every margin exceeds `ZERO_MARGIN_TOL`.
    pub strict: bool,
}

/// JSON form: `{"margins": {"i-j": m}, "violations": ["i-j"], "strict": bool}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelaunayFile {
    pub margins: BTreeMap<String, f64>,
    pub violations: Vec<String>,
    pub strict: bool,
}

/// Sum of the signed angles at one endpoint of an interior edge, one from each side.
///
/// The sign agrees with the sign of the sum of the two perpendiculars from the power
/// centers of the adjacent faces.
pub fn edge_margin(state: &PackingState, e: usize) -> Result<f64, DelaunayError> {
    let mesh = state.mesh();
    let edge = mesh.edge(e);
    if !edge.is_interior() {
        return Err(DelaunayError::BoundaryEdge(e));
    }
    let [a, b] = edge.vertices;
    let mut total = 0.0;
    for &f in &edge.faces {
        let tri = state.triangle(f);
        if let Classification::Inadmissible(_) = tri.classify()? {
            return Err(DelaunayError::InadmissibleFace(f));
        }
        let t = mesh.face(f);
        let i = t.iter().position(|&x| x == a).unwrap();
        let j = t.iter().position(|&x| x == b).unwrap();
        total += tri.signed_angle(i, j)?;
    }
    Ok(total)
}

pub fn delaunay_report(state: &PackingState) -> Result<DelaunayReport, DelaunayError> {
    let mut margins = Vec::new();
    for e in state.mesh().interior_edges() {
        margins.push((e, edge_margin(state, e)?));
    }
    let violations = margins
        .iter()
        .filter(|(_, m)| *m < -ZERO_MARGIN_TOL)
        .map(|&(e, _)| e)
        .collect();
    let strict = margins.iter().all(|(_, m)| *m > ZERO_MARGIN_TOL);
    Ok(DelaunayReport {
        margins,
        violations,
        strict,
    })
}

/// No interior edge has a negative margin and no face is inadmissible.
pub fn is_generalized_delaunay(state: &PackingState) -> bool {
    delaunay_report(state).is_ok_and(|r| r.violations.is_empty())
}

impl DelaunayReport {
    pub fn to_file(&self, state: &PackingState) -> DelaunayFile {
        let name = |e: usize| {
            let [a, b] = state.mesh().edge(e).vertices;
            format!("{a}-{b}")
        };
        DelaunayFile {
            margins: self.margins.iter().map(|&(e, m)| (name(e), m)).collect(),
            violations: self.violations.iter().map(|&e| name(e)).collect(),
            strict: self.strict,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::star_polygon;
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn regular_star_margins() {
        let mesh = Arc::new(star_polygon(6).unwrap());
        let s = PackingState::constant(mesh, 2.0, 0.0).unwrap();
        let r = delaunay_report(&s).unwrap();
        assert_eq!(r.margins.len(), 6);
        for (_, m) in &r.margins {
            assert!((m - PI / 3.0).abs() < 1e-12);
        }
        assert!(r.strict && r.violations.is_empty());
        let f = r.to_file(&s);
        assert_eq!(f.margins.len(), 6);
        assert!(f.margins.contains_key("0-3"));
    }

    #[test]
    fn boundary_edge_has_no_margin() {
        let mesh = Arc::new(star_polygon(5).unwrap());
        let s = PackingState::constant(Arc::clone(&mesh), 2.0, 0.0).unwrap();
        let rim = mesh.edge_between(1, 2).unwrap();
        assert_eq!(edge_margin(&s, rim), Err(DelaunayError::BoundaryEdge(rim)));
    }

    #[test]
    fn inadmissible_face_is_an_error() {
        let mesh = Arc::new(star_polygon(5).unwrap());
        let mut labels = vec![0.0; 6];
        labels[0] = 0.01f64.ln();
        let s = PackingState::new(Arc::clone(&mesh), vec![2.0; mesh.n_edges()], labels).unwrap();
        assert!(matches!(
            delaunay_report(&s),
            Err(DelaunayError::InadmissibleFace(_))
        ));
        assert!(!is_generalized_delaunay(&s));
    }

    #[test]
    fn shrinking_the_opposite_circles_breaks_delaunay() {
        // Two faces sharing edge 0-2; huge circles at 0 and 2 push both power centers
        // across the shared edge.
        let mesh = Arc::new(
            crate::mesh::TriangulatedDisk::build_from_faces(&[[0, 1, 2], [0, 2, 3]]).unwrap(),
        );
        let s = PackingState::new(
            Arc::clone(&mesh),
            vec![1.2; mesh.n_edges()],
            vec![0.0, -2.0, 0.0, -2.0],
        )
        .unwrap();
        let e = mesh.edge_between(0, 2).unwrap();
        let m = edge_margin(&s, e).unwrap();
        let hp: f64 = mesh
            .edge(e)
            .faces
            .iter()
            .map(|&f| {
                let k = mesh.face_edges(f).iter().position(|&x| x == e).unwrap();
                s.triangle(f).perpendiculars().unwrap()[k]
            })
            .sum();
        assert_eq!(m.signum(), hp.signum());
    }
}
