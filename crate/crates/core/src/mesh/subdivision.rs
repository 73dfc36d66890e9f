use std::collections::HashMap;

use super::{MeshError, TriangulatedDisk};

/// Result of the standard `n`-subdivision of a disk.
///
/// Every coarse face `(a, b, c)` is cut into `n^2` faces whose vertices are the points
/// `(i a + j b + k c) / n` with `i + j + k = n`.
#[derive(Debug, Clone)]
pub struct Subdivision {
    pub mesh: TriangulatedDisk,
    pub n: usize,
    /// Fine index of each coarse vertex.
    pub vertex_map: Vec<usize>,
    /// Coarse face of each fine face.
    pub parent_face: Vec<usize>,
    face_points: Vec<Vec<usize>>,
}

#[derive(Hash, PartialEq, Eq)]
enum PointKey {
    Corner(usize),
    OnEdge(usize, usize, usize),
    Inside(usize, usize, usize),
}

impl Subdivision {
    /// Fine vertex at barycentric integer coordinates `bary` (summing to `n`) in coarse
    /// face `f`, with weights listed in the face's vertex order.
    pub fn fine_vertex(&self, f: usize, bary: [usize; 3]) -> usize {
        debug_assert_eq!(bary.iter().sum::<usize>(), self.n);
        self.face_points[f][row_start(self.n, bary[0]) + bary[1]]
    }

    /// Linearly interpolates coarse vertex positions onto the fine vertices.
    pub fn interpolate(&self, coarse: &TriangulatedDisk, coords: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.mesh.n_vertices()];
        let n = self.n as f64;
        for (f, t) in coarse.faces().iter().enumerate() {
            for i in 0..=self.n {
                for j in 0..=(self.n - i) {
                    let k = self.n - i - j;
                    let v = self.fine_vertex(f, [i, j, k]);
                    let (a, b, c) = (i as f64 / n, j as f64 / n, k as f64 / n);
                    for d in 0..2 {
                        out[v][d] = a * coords[t[0]][d] + b * coords[t[1]][d] + c * coords[t[2]][d];
                    }
                }
            }
        }
        for (old, &new) in self.vertex_map.iter().enumerate() {
            out[new] = coords[old];
        }
        out
    }
}

fn row_start(n: usize, i: usize) -> usize {
    // Rows 0..i have lengths n+1, n, ..., n-i+2.
    i * (n + 1) - i * i.saturating_sub(1) / 2
}

/// Standard `n`-subdivision. Coarse vertices keep their ids; new vertices follow in order
/// of first appearance when faces are visited by id and their points by ascending
/// barycentric coordinates.
pub fn standard_subdivision(mesh: &TriangulatedDisk, n: usize) -> Result<Subdivision, MeshError> {
    if n == 0 {
        return Err(MeshError::ZeroSubdivision);
    }
    let mut ids: HashMap<PointKey, usize> = (0..mesh.n_vertices())
        .map(|v| (PointKey::Corner(v), v))
        .collect();
    let mut face_points = Vec::with_capacity(mesh.n_faces());
    for (f, t) in mesh.faces().iter().enumerate() {
        let mut pts = Vec::with_capacity((n + 1) * (n + 2) / 2);
        for i in 0..=n {
            for j in 0..=(n - i) {
                let w = [i, j, n - i - j];
                let nonzero: Vec<usize> = (0..3).filter(|&s| w[s] > 0).collect();
                let key = match nonzero.len() {
                    1 => PointKey::Corner(t[nonzero[0]]),
                    2 => {
                        let (a, b) = (t[nonzero[0]], t[nonzero[1]]);
                        let wa = w[nonzero[0]];
                        if a < b {
                            PointKey::OnEdge(a, b, wa)
                        } else {
                            PointKey::OnEdge(b, a, n - wa)
                        }
                    }
                    _ => PointKey::Inside(f, i, j),
                };
                let next = ids.len();
                pts.push(*ids.entry(key).or_insert(next));
            }
        }
        face_points.push(pts);
    }
    let vertex_map = (0..mesh.n_vertices())
        .map(|v| ids[&PointKey::Corner(v)])
        .collect();

    let mut faces = Vec::with_capacity(n * n * mesh.n_faces());
    let mut parent_face = Vec::with_capacity(faces.capacity());
    for (f, pts) in face_points.iter().enumerate() {
        let at = |i: usize, j: usize| pts[row_start(n, i) + j];
        for i in 0..n {
            for j in 0..(n - i) {
                // Upward face at the point (i, j, k) with i + j + k = n - 1.
                faces.push([at(i + 1, j), at(i, j + 1), at(i, j)]);
                parent_face.push(f);
            }
        }
        for i in 0..n.saturating_sub(1) {
            for j in 0..(n - 1 - i) {
                faces.push([at(i, j + 1), at(i + 1, j), at(i + 1, j + 1)]);
                parent_face.push(f);
            }
        }
    }
    let fine = TriangulatedDisk::build_from_faces(&faces)?;
    Ok(Subdivision {
        mesh: fine,
        n,
        vertex_map,
        parent_face,
        face_points,
    })
}
