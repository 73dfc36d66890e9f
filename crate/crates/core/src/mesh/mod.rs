//! Combinatorial triangulated disks, subdivision, and lattice approximations.

mod hex;
mod io;
mod subdivision;

pub use hex::{hexagonal_approximation, LatticeDisk};
pub use io::MeshFile;
pub use subdivision::{standard_subdivision, Subdivision};

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("not a topological disk: {0}")]
    NotADisk(String),
    #[error("edge ({0}, {1}) has more than two incident faces")]
    NonManifoldEdge(usize, usize),
    #[error("faces disagree on the orientation of edge ({0}, {1})")]
    OrientationConflict(usize, usize),
    #[error("face {0} repeats a vertex")]
    DegenerateFace(usize),
    #[error("invalid markers: {0}")]
    InvalidMarkers(String),
    #[error("invalid domain polygon: {0}")]
    InvalidDomain(String),
    #[error("no lattice triangle of this scale fits inside the domain")]
    ScaleTooCoarse,
    #[error("could not realize marker {index} near ({x}, {y}) as a boundary vertex with one incident face")]
    MarkerAdjustmentFailed { index: usize, x: f64, y: f64 },
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("subdivision order must be at least 1")]
    ZeroSubdivision,
}

/// An undirected edge with its sorted endpoints and the one or two faces containing it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub faces: Vec<usize>,
}

impl Edge {
    pub fn is_interior(&self) -> bool {
        self.faces.len() == 2
    }
}

/// A connected, consistently oriented triangulated surface with Euler characteristic one
/// and a single boundary cycle.
///
/// Faces are stored counterclockwise. The boundary cycle is traversed in the direction
/// induced by the faces, starting at the smallest boundary vertex.
#[derive(Debug, Clone)]
pub struct TriangulatedDisk {
    n_vertices: usize,
    faces: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<(usize, usize), usize>,
    face_edges: Vec<[usize; 3]>,
    vertex_faces: Vec<Vec<usize>>,
    neighbors: Vec<Vec<usize>>,
    boundary_cycle: Vec<usize>,
    is_boundary: Vec<bool>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriangulatedDisk {
    /// Validates a face list and builds the disk. The vertex count is one more than the
    /// largest index used; every vertex must belong to some face.
    pub fn build_from_faces(faces: &[[usize; 3]]) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::NotADisk("no faces".into()));
        }
        for (f, t) in faces.iter().enumerate() {
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(MeshError::DegenerateFace(f));
            }
        }
        let n_vertices = faces.iter().flat_map(|t| t.iter()).max().unwrap() + 1;

        let mut edge_lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut face_edges = vec![[0usize; 3]; faces.len()];
        for (f, t) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                let id = *edge_lookup.entry(key(a, b)).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [a.min(b), a.max(b)],
                        faces: Vec::new(),
                    });
                    edges.len() - 1
                });
                edges[id].faces.push(f);
                face_edges[f][k] = id;
            }
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &edges {
            if e.faces.len() > 2 {
                return Err(MeshError::NonManifoldEdge(e.vertices[0], e.vertices[1]));
            }
        }
        for (f, t) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if directed.insert((a, b), f).is_some() {
                    return Err(MeshError::OrientationConflict(a.min(b), a.max(b)));
                }
            }
        }

        let mut vertex_faces = vec![Vec::new(); n_vertices];
        for (f, t) in faces.iter().enumerate() {
            for &v in t {
                vertex_faces[v].push(f);
            }
        }
        if let Some(v) = vertex_faces.iter().position(|fs| fs.is_empty()) {
            return Err(MeshError::NotADisk(format!(
                "vertex {v} belongs to no face"
            )));
        }

        // Connectivity through shared edges.
        let mut seen = vec![false; faces.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(f) = queue.pop_front() {
            for &e in &face_edges[f] {
                for &g in &edges[e].faces {
                    if !seen[g] {
                        seen[g] = true;
                        reached += 1;
                        queue.push_back(g);
                    }
                }
            }
        }
        if reached != faces.len() {
            return Err(MeshError::NotADisk("faces are not edge-connected".into()));
        }

        // Each vertex link must be a single path (boundary) or a single cycle (interior).
        let mut is_boundary = vec![false; n_vertices];
        for v in 0..n_vertices {
            let mut next: HashMap<usize, usize> = HashMap::new();
            let mut has_pred: HashMap<usize, bool> = HashMap::new();
            for &f in &vertex_faces[v] {
                let t = faces[f];
                let k = t.iter().position(|&x| x == v).unwrap();
                let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                next.insert(a, b);
                has_pred.insert(b, true);
                has_pred.entry(a).or_insert(false);
            }
            let starts: Vec<usize> = has_pred
                .iter()
                .filter(|(_, &p)| !p)
                .map(|(&x, _)| x)
                .collect();
            let start = match starts.len() {
                0 => *next.keys().min().unwrap(),
                1 => {
                    is_boundary[v] = true;
                    starts[0]
                }
                _ => {
                    return Err(MeshError::NotADisk(format!(
                        "vertex {v} has a pinched neighborhood"
                    )))
                }
            };
            let mut count = 0;
            let mut cur = start;
            while let Some(&nx) = next.get(&cur) {
                count += 1;
                cur = nx;
                if cur == start || count > next.len() {
                    break;
                }
            }
            if count != next.len() {
                return Err(MeshError::NotADisk(format!(
                    "vertex {v} has a disconnected link"
                )));
            }
        }

        let chi = n_vertices as i64 - edges.len() as i64 + faces.len() as i64;
        if chi != 1 {
            return Err(MeshError::NotADisk(format!(
                "Euler characteristic is {chi}"
            )));
        }

        let mut boundary_next: HashMap<usize, usize> = HashMap::new();
        for (f, t) in faces.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                if edges[face_edges[f][k]].faces.len() == 1 {
                    boundary_next.insert(a, b);
                }
            }
        }
        let start = (0..n_vertices)
            .find(|&v| is_boundary[v])
            .ok_or_else(|| MeshError::NotADisk("no boundary".into()))?;
        let mut boundary_cycle = vec![start];
        let mut cur = boundary_next[&start];
        while cur != start {
            boundary_cycle.push(cur);
            cur = boundary_next[&cur];
            if boundary_cycle.len() > boundary_next.len() {
                break;
            }
        }
        if boundary_cycle.len() != boundary_next.len() {
            return Err(MeshError::NotADisk("more than one boundary cycle".into()));
        }

        let mut neighbors = vec![Vec::new(); n_vertices];
        for e in &edges {
            neighbors[e.vertices[0]].push(e.vertices[1]);
            neighbors[e.vertices[1]].push(e.vertices[0]);
        }
        for ns in &mut neighbors {
            ns.sort_unstable();
        }

        Ok(Self {
            n_vertices,
            faces: faces.to_vec(),
            edges,
            edge_lookup,
            face_edges,
            vertex_faces,
            neighbors,
            boundary_cycle,
            is_boundary,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face(&self, f: usize) -> [usize; 3] {
        self.faces[f]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    /// Edge ids of face `f`; entry `k` is the edge opposite the face's `k`-th vertex.
    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn boundary_cycle(&self) -> &[usize] {
        &self.boundary_cycle
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_vertices).filter(|&v| !self.is_boundary[v])
    }

    pub fn interior_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].is_interior())
    }

    /// The vertex of face `f` not on edge `e`.
    pub fn opposite_vertex(&self, f: usize, e: usize) -> usize {
        let k = self.face_edges[f].iter().position(|&x| x == e).unwrap();
        self.faces[f][k]
    }

    /// Faces around `v` in counterclockwise order. For a boundary vertex the order starts
    /// at the face containing the outgoing boundary edge.
    pub fn faces_around(&self, v: usize) -> Vec<usize> {
        let mut by_first: HashMap<usize, usize> = HashMap::new();
        let mut seconds: Vec<usize> = Vec::new();
        for &f in &self.vertex_faces[v] {
            let t = self.faces[f];
            let k = t.iter().position(|&x| x == v).unwrap();
            by_first.insert(t[(k + 1) % 3], f);
            seconds.push(t[(k + 2) % 3]);
        }
        let start_vertex = if self.is_boundary[v] {
            *by_first.keys().find(|a| !seconds.contains(a)).unwrap()
        } else {
            let f0 = *self.vertex_faces[v].iter().min().unwrap();
            let t = self.faces[f0];
            let k = t.iter().position(|&x| x == v).unwrap();
            t[(k + 1) % 3]
        };
        let mut out = Vec::with_capacity(self.vertex_faces[v].len());
        let mut a = start_vertex;
        while let Some(&f) = by_first.get(&a) {
            out.push(f);
            let t = self.faces[f];
            let k = t.iter().position(|&x| x == v).unwrap();
            a = t[(k + 2) % 3];
            if out.len() == self.vertex_faces[v].len() {
                break;
            }
        }
        out
    }

    /// Vertices within graph distance `m` of `center`, together with the faces all of whose
    /// vertices lie in that set.
    pub fn combinatorial_ball(&self, center: usize, m: usize) -> Result<Ball, MeshError> {
        if center >= self.n_vertices {
            return Err(MeshError::VertexOutOfRange(center));
        }
        let dist = self.graph_distances(center);
        let inside: Vec<bool> = dist.iter().map(|d| d.is_some_and(|d| d <= m)).collect();
        let vertices = (0..self.n_vertices).filter(|&v| inside[v]).collect();
        let faces = (0..self.faces.len())
            .filter(|&f| self.faces[f].iter().all(|&v| inside[v]))
            .collect();
        Ok(Ball { vertices, faces })
    }

    pub fn graph_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n_vertices];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap();
            for &w in &self.neighbors[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ball {
    pub vertices: Vec<usize>,
    pub faces: Vec<usize>,
}

/// A disk with three distinct boundary markers listed in boundary order.
#[derive(Debug, Clone)]
pub struct MarkedDisk {
    pub mesh: TriangulatedDisk,
    pub markers: [usize; 3],
}

impl MarkedDisk {
    pub fn new(mesh: TriangulatedDisk, markers: [usize; 3]) -> Result<Self, MeshError> {
        let [p, q, r] = markers;
        if p == q || q == r || p == r {
            return Err(MeshError::InvalidMarkers("markers must be distinct".into()));
        }
        let cycle = mesh.boundary_cycle();
        let pos = |v: usize| cycle.iter().position(|&x| x == v);
        let (Some(a), Some(b), Some(c)) = (pos(p), pos(q), pos(r)) else {
            return Err(MeshError::InvalidMarkers(
                "markers must be boundary vertices".into(),
            ));
        };
        let n = cycle.len();
        let (db, dc) = ((b + n - a) % n, (c + n - a) % n);
        if db > dc {
            return Err(MeshError::InvalidMarkers(
                "markers must appear counterclockwise along the boundary".into(),
            ));
        }
        Ok(Self { mesh, markers })
    }
}

/// Star of a single interior vertex `0` with boundary vertices `1..=n` counterclockwise.
pub fn star_polygon(n: usize) -> Result<TriangulatedDisk, MeshError> {
    if n < 3 {
        return Err(MeshError::NotADisk(format!(
            "star needs at least 3 petals, got {n}"
        )));
    }
    let faces: Vec<[usize; 3]> = (1..=n).map(|i| [0, i, i % n + 1]).collect();
    TriangulatedDisk::build_from_faces(&faces)
}

/// Vertex positions of the regular star: center at the origin, petals on the unit circle.
pub fn star_coords(n: usize) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0, 0.0]];
    for i in 0..n {
        let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        out.push([a.cos(), a.sin()]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle() {
        let m = TriangulatedDisk::build_from_faces(&[[0, 1, 2]]).unwrap();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (3, 3, 1));
        assert_eq!(m.boundary_cycle(), &[0, 1, 2]);
    }

    #[test]
    fn two_triangles() {
        let m = TriangulatedDisk::build_from_faces(&[[0, 1, 2], [0, 2, 3]]).unwrap();
        assert_eq!((m.n_vertices(), m.n_edges(), m.n_faces()), (4, 5, 2));
        assert_eq!(m.interior_edges().count(), 1);
        assert_eq!(m.boundary_cycle(), &[0, 1, 2, 3]);
    }

    #[test]
    fn rejects_disconnected() {
        let err = TriangulatedDisk::build_from_faces(&[[0, 1, 2], [3, 4, 5]]).unwrap_err();
        assert!(matches!(err, MeshError::NotADisk(_)));
    }

    #[test]
    fn rejects_flipped_face() {
        let err = TriangulatedDisk::build_from_faces(&[[0, 1, 2], [0, 3, 2]]).unwrap_err();
        assert_eq!(err, MeshError::OrientationConflict(0, 2));
    }

    #[test]
    fn rejects_fin() {
        let err =
            TriangulatedDisk::build_from_faces(&[[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap_err();
        assert_eq!(err, MeshError::NonManifoldEdge(0, 1));
    }

    #[test]
    fn rejects_bowtie() {
        let err = TriangulatedDisk::build_from_faces(&[[0, 1, 2], [0, 3, 4]]).unwrap_err();
        assert!(matches!(err, MeshError::NotADisk(_)));
    }

    #[test]
    fn rejects_closed_surface() {
        // Boundary of a tetrahedron, consistently oriented.
        let faces = [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]];
        assert!(matches!(
            TriangulatedDisk::build_from_faces(&faces),
            Err(MeshError::NotADisk(_))
        ));
    }

    #[test]
    fn rejects_annulus() {
        // Two concentric triangles joined by a strip of six faces.
        let faces = [
            [0, 1, 4],
            [0, 4, 3],
            [1, 2, 5],
            [1, 5, 4],
            [2, 0, 3],
            [2, 3, 5],
        ];
        assert!(matches!(
            TriangulatedDisk::build_from_faces(&faces),
            Err(MeshError::NotADisk(_))
        ));
    }

    #[test]
    fn star_structure() {
        let m = star_polygon(6).unwrap();
        assert!(!m.is_boundary(0));
        assert_eq!(m.degree(0), 6);
        assert_eq!(m.boundary_cycle(), &[1, 2, 3, 4, 5, 6]);
        assert_eq!(m.faces_around(0).len(), 6);
        let around = m.faces_around(3);
        assert_eq!(around, vec![2, 1]);
    }

    #[test]
    fn ball_in_star() {
        let m = star_polygon(6).unwrap();
        let b0 = m.combinatorial_ball(0, 0).unwrap();
        assert_eq!(b0.vertices, vec![0]);
        assert!(b0.faces.is_empty());
        let b1 = m.combinatorial_ball(0, 1).unwrap();
        assert_eq!((b1.vertices.len(), b1.faces.len()), (7, 6));
    }

    #[test]
    fn markers_must_follow_boundary_order() {
        let m = star_polygon(6).unwrap();
        assert!(MarkedDisk::new(m.clone(), [1, 3, 5]).is_ok());
        assert!(MarkedDisk::new(m.clone(), [3, 5, 1]).is_ok());
        assert!(MarkedDisk::new(m.clone(), [1, 5, 3]).is_err());
        assert!(MarkedDisk::new(m.clone(), [0, 1, 2]).is_err());
        assert!(MarkedDisk::new(m, [1, 1, 2]).is_err());
    }
}
