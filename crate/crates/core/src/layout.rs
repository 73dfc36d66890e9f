//! Planar layouts of flat metrics and piecewise-linear maps between them.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{dist, orient, Point};
use crate::mesh::TriangulatedDisk;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("face {0} violates the strict triangle inequality")]
    TriangleInequalityViolation(usize),
    #[error("marker images are collinear")]
    MarkersCollinear,
    #[error("face {0} is degenerate")]
    DegenerateFace(usize),
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("point ({x}, {y}) lies outside the source layout")]
    PointOutsideDomain { x: f64, y: f64 },
    #[error("seed face {0} does not exist")]
    InvalidSeed(usize),
}

/// Vertex positions of one mesh together with the signed area of every face.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub coords: Vec<Point>,
    pub signed_areas: Vec<f64>,
}

impl Layout {
    pub fn from_coords(mesh: &TriangulatedDisk, coords: Vec<Point>) -> Result<Self, LayoutError> {
        if coords.len() != mesh.n_vertices() {
            return Err(LayoutError::LengthMismatch {
                expected: mesh.n_vertices(),
                got: coords.len(),
            });
        }
        let signed_areas = mesh
            .faces()
            .iter()
            .map(|t| orient(coords[t[0]], coords[t[1]], coords[t[2]]) / 2.0)
            .collect();
        Ok(Self {
            coords,
            signed_areas,
        })
    }

    pub fn to_file(&self) -> LayoutFile {
        LayoutFile {
            coords: self.coords.clone(),
        }
    }

    /// Largest relative difference between a laid-out edge and its prescribed length.
    pub fn isometry_defect(&self, mesh: &TriangulatedDisk, lengths: &[f64]) -> f64 {
        mesh.edges()
            .iter()
            .zip(lengths)
            .map(|(e, &l)| {
                let [a, b] = e.vertices;
                (dist(self.coords[a], self.coords[b]) - l).abs() / l
            })
            .fold(0.0, f64::max)
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        self.coords.iter().fold(
            ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
            |(lo, hi), p| {
                (
                    [lo[0].min(p[0]), lo[1].min(p[1])],
                    [hi[0].max(p[0]), hi[1].max(p[1])],
                )
            },
        )
    }
}

/// JSON form `{"coords": [[x, y], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutFile {
    pub coords: Vec<Point>,
}

fn strict_triangle(l: [f64; 3]) -> bool {
    l.iter().all(|&x| x > 0.0 && x.is_finite())
        && l[0] < l[1] + l[2]
        && l[1] < l[0] + l[2]
        && l[2] < l[0] + l[1]
}

/// Position of `c` with `|ac| = lac`, `|bc| = lbc`, to the left of the directed line `a -> b`.
fn apex(a: Point, b: Point, lab: f64, lac: f64, lbc: f64) -> Point {
    // Half-angle form of the cosine law at `a`.
    let s = (lab + lac + lbc) / 2.0;
    let angle = 2.0 * ((s - lab) * (s - lac)).sqrt().atan2((s * (s - lbc)).sqrt());
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let norm = dx.hypot(dy);
    let (ux, uy) = (dx / norm, dy / norm);
    let (c, sn) = (angle.cos(), angle.sin());
    [
        a[0] + lac * (c * ux - sn * uy),
        a[1] + lac * (sn * ux + c * uy),
    ]
}

/// Lays out a flat metric given per edge, starting from face 0.
pub fn develop(mesh: &TriangulatedDisk, lengths: &[f64]) -> Result<Layout, LayoutError> {
    develop_from(mesh, lengths, 0)
}

/// Breadth-first layout from `seed`. The lower-indexed vertex of the seed face's
/// lowest-index edge goes to the origin and the other endpoint onto the positive x axis;
/// every other face is attached across an edge to a face placed before it. Faces keep
/// their counterclockwise orientation.
pub fn develop_from(
    mesh: &TriangulatedDisk,
    lengths: &[f64],
    seed: usize,
) -> Result<Layout, LayoutError> {
    if lengths.len() != mesh.n_edges() {
        return Err(LayoutError::LengthMismatch {
            expected: mesh.n_edges(),
            got: lengths.len(),
        });
    }
    if seed >= mesh.n_faces() {
        return Err(LayoutError::InvalidSeed(seed));
    }
    let face_lengths = |f: usize| mesh.face_edges(f).map(|e| lengths[e]);
    for f in 0..mesh.n_faces() {
        if !strict_triangle(face_lengths(f)) {
            return Err(LayoutError::TriangleInequalityViolation(f));
        }
    }
    let nv = mesh.n_vertices();
    let mut pos: Vec<Option<Point>> = vec![None; nv];
    let t = mesh.face(seed);
    let (mut a, mut b) = (t[0].min(t[1]), t[0].max(t[1]));
    for k in 0..3 {
        let (x, y) = (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]));
        if (x, y) < (a, b) {
            (a, b) = (x, y);
        }
    }
    let lab = lengths[mesh.edge_between(a, b).expect("face edge")];
    pos[a] = Some([0.0, 0.0]);
    pos[b] = Some([lab, 0.0]);
    place_face(mesh, lengths, seed, &mut pos);

    let mut placed = vec![false; mesh.n_faces()];
    placed[seed] = true;
    let mut queue = VecDeque::from([seed]);
    while let Some(f) = queue.pop_front() {
        for e in mesh.face_edges(f) {
            for &g in &mesh.edge(e).faces {
                if !placed[g] {
                    placed[g] = true;
                    place_face(mesh, lengths, g, &mut pos);
                    queue.push_back(g);
                }
            }
        }
    }
    let coords = pos
        .into_iter()
        .map(|p| p.expect("disk is connected"))
        .collect();
    Layout::from_coords(mesh, coords)
}

/// Places the unplaced vertex of `f`, given that at least two of its vertices are placed.
fn place_face(mesh: &TriangulatedDisk, lengths: &[f64], f: usize, pos: &mut [Option<Point>]) {
    let t = mesh.face(f);
    let Some(k) = (0..3).find(|&k| pos[t[k]].is_none()) else {
        return;
    };
    let (a, b, c) = (t[(k + 1) % 3], t[(k + 2) % 3], t[k]);
    let e = mesh.face_edges(f);
    // face_edges[i] is opposite t[i]
    let lab = lengths[e[k]];
    let lbc = lengths[e[(k + 1) % 3]];
    let lac = lengths[e[(k + 2) % 3]];
    pos[c] = Some(apex(pos[a].unwrap(), pos[b].unwrap(), lab, lac, lbc));
}

/// Result of mapping three marker images onto the unit equilateral triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub layout: Layout,
    /// Multiplier `a` of the similarity `z -> a z + b`.
    pub scale: Complex64,
    pub shift: Complex64,
    /// Distance of the third marker's image from `(1/2, sqrt(3)/2)`.
    pub residual: f64,
}

pub const UNIT_TRIANGLE: [Point; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.866_025_403_784_438_6]];

/// Applies the similarity sending the first two markers to `(0, 0)` and `(1, 0)`.
pub fn normalize_to_unit_triangle(
    mesh: &TriangulatedDisk,
    layout: &Layout,
    markers: [usize; 3],
) -> Result<Normalized, LayoutError> {
    let z = markers.map(|m| Complex64::new(layout.coords[m][0], layout.coords[m][1]));
    let span = (z[1] - z[0]).norm().max((z[2] - z[0]).norm());
    let area2 = orient(
        layout.coords[markers[0]],
        layout.coords[markers[1]],
        layout.coords[markers[2]],
    );
    if !(area2.abs() > 1e-12 * span * span) {
        return Err(LayoutError::MarkersCollinear);
    }
    let scale = Complex64::new(1.0, 0.0) / (z[1] - z[0]);
    let shift = -z[0] * scale;
    let coords: Vec<Point> = layout
        .coords
        .iter()
        .map(|p| {
            let w = scale * Complex64::new(p[0], p[1]) + shift;
            [w.re, w.im]
        })
        .collect();
    let third = coords[markers[2]];
    let residual = dist(third, UNIT_TRIANGLE[2]);
    Ok(Normalized {
        layout: Layout::from_coords(mesh, coords)?,
        scale,
        shift,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaceMap {
    /// Row-major linear part.
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
    /// `(|a| + |b|) / ||a| - |b||` for the complex-linear coefficients `a`, `b`.
    pub dilatation: f64,
    pub orientation_preserving: bool,
}

/// Piecewise-affine map between two layouts of one mesh.
#[derive(Debug, Clone)]
pub struct PlMap {
    pub src: Layout,
    pub dst: Layout,
    pub faces: Vec<FaceMap>,
    pub global_dilatation: f64,
}

fn degenerate(p: [Point; 3]) -> bool {
    let scale = dist(p[0], p[1]).max(dist(p[0], p[2])).max(dist(p[1], p[2]));
    !(orient(p[0], p[1], p[2]).abs() > 1e-14 * scale * scale)
}

/// Builds the affine map of every face from its three vertex correspondences.
pub fn pl_map(mesh: &TriangulatedDisk, src: &Layout, dst: &Layout) -> Result<PlMap, LayoutError> {
    for l in [src, dst] {
        if l.coords.len() != mesh.n_vertices() {
            return Err(LayoutError::LengthMismatch {
                expected: mesh.n_vertices(),
                got: l.coords.len(),
            });
        }
    }
    let mut faces = Vec::with_capacity(mesh.n_faces());
    for (f, t) in mesh.faces().iter().enumerate() {
        let s = t.map(|v| src.coords[v]);
        let d = t.map(|v| dst.coords[v]);
        if degenerate(s) || degenerate(d) {
            return Err(LayoutError::DegenerateFace(f));
        }
        let (s1, s2) = (sub(s[1], s[0]), sub(s[2], s[0]));
        let (d1, d2) = (sub(d[1], d[0]), sub(d[2], d[0]));
        let det = s1[0] * s2[1] - s2[0] * s1[1];
        // inverse of the matrix with columns s1, s2
        let inv = [[s2[1] / det, -s2[0] / det], [-s1[1] / det, s1[0] / det]];
        let m = [
            [
                d1[0] * inv[0][0] + d2[0] * inv[1][0],
                d1[0] * inv[0][1] + d2[0] * inv[1][1],
            ],
            [
                d1[1] * inv[0][0] + d2[1] * inv[1][0],
                d1[1] * inv[0][1] + d2[1] * inv[1][1],
            ],
        ];
        let translation = [
            d[0][0] - m[0][0] * s[0][0] - m[0][1] * s[0][1],
            d[0][1] - m[1][0] * s[0][0] - m[1][1] * s[0][1],
        ];
        let a = Complex64::new(m[0][0] + m[1][1], m[1][0] - m[0][1]) / 2.0;
        let b = Complex64::new(m[0][0] - m[1][1], m[1][0] + m[0][1]) / 2.0;
        let (na, nb) = (a.norm(), b.norm());
        faces.push(FaceMap {
            linear: m,
            translation,
            dilatation: (na + nb) / (na - nb).abs(),
            orientation_preserving: na > nb,
        });
    }
    let global_dilatation = faces.iter().map(|f| f.dilatation).fold(1.0, f64::max);
    Ok(PlMap {
        src: src.clone(),
        dst: dst.clone(),
        faces,
        global_dilatation,
    })
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// Uniform bucket grid over the faces of a layout, for point location.
struct FaceGrid {
    lo: Point,
    cell: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl FaceGrid {
    fn new(mesh: &TriangulatedDisk, layout: &Layout) -> Self {
        let (lo, hi) = layout.bounding_box();
        let nf = mesh.n_faces().max(1);
        let w = (hi[0] - lo[0]).max(1e-300);
        let h = (hi[1] - lo[1]).max(1e-300);
        let cell = ((w * h) / nf as f64).sqrt().max(w.max(h) / 4096.0);
        let dims = [
            ((w / cell).ceil() as usize).max(1),
            ((h / cell).ceil() as usize).max(1),
        ];
        let mut buckets = vec![Vec::new(); dims[0] * dims[1]];
        for (f, t) in mesh.faces().iter().enumerate() {
            let p = t.map(|v| layout.coords[v]);
            let (a0, a1) = Self::range(lo, cell, dims, p.iter().map(|q| q[0]), 0);
            let (b0, b1) = Self::range(lo, cell, dims, p.iter().map(|q| q[1]), 1);
            for i in a0..=a1 {
                for j in b0..=b1 {
                    buckets[j * dims[0] + i].push(f);
                }
            }
        }
        Self {
            lo,
            cell,
            dims,
            buckets,
        }
    }

    fn range(
        lo: Point,
        cell: f64,
        dims: [usize; 2],
        xs: impl Iterator<Item = f64> + Clone,
        axis: usize,
    ) -> (usize, usize) {
        let mn = xs.clone().fold(f64::INFINITY, f64::min);
        let mx = xs.fold(f64::NEG_INFINITY, f64::max);
        (
            Self::index(lo[axis], cell, dims[axis], mn),
            Self::index(lo[axis], cell, dims[axis], mx),
        )
    }

    fn index(lo: f64, cell: f64, n: usize, x: f64) -> usize {
        (((x - lo) / cell).floor().max(0.0) as usize).min(n - 1)
    }

    fn neighbourhood(&self, p: Point) -> impl Iterator<Item = usize> + '_ {
        let i = Self::index(self.lo[0], self.cell, self.dims[0], p[0]);
        let j = Self::index(self.lo[1], self.cell, self.dims[1], p[1]);
        let (i0, i1) = (i.saturating_sub(1), (i + 1).min(self.dims[0] - 1));
        let (j0, j1) = (j.saturating_sub(1), (j + 1).min(self.dims[1] - 1));
        (j0..=j1).flat_map(move |j| {
            (i0..=i1).flat_map(move |i| self.buckets[j * self.dims[0] + i].iter().copied())
        })
    }

    fn candidates(&self, p: Point) -> &[usize] {
        let i = Self::index(self.lo[0], self.cell, self.dims[0], p[0]);
        let j = Self::index(self.lo[1], self.cell, self.dims[1], p[1]);
        &self.buckets[j * self.dims[0] + i]
    }
}

/// Barycentric coordinates may be this negative, relative to the face, before a point
/// counts as outside.
pub const SNAP_TOL: f64 = 1e-9;

/// Points outside every face but within this distance of the layout, relative to its
/// diameter, are mapped through the nearest face with clamped coordinates. Flat layouts
/// are straight along their sides only up to the flow tolerance.
pub const BOUNDARY_TOL: f64 = 1e-6;

fn barycentric(s: [Point; 3], p: Point) -> [f64; 3] {
    let area = orient(s[0], s[1], s[2]);
    [
        orient(p, s[1], s[2]) / area,
        orient(s[0], p, s[2]) / area,
        orient(s[0], s[1], p) / area,
    ]
}

/// Euclidean distance from `p` to the closed face.
fn face_distance(s: [Point; 3], p: Point) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..3 {
        let (a, b) = (s[(i + 1) % 3], s[(i + 2) % 3]);
        let ab = [b[0] - a[0], b[1] - a[1]];
        let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1]))
            .clamp(0.0, 1.0);
        best = best.min(dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]]));
    }
    best
}

/// Images of `points` under the map. Each point is located in the source face where its
/// smallest barycentric coordinate is largest, and mapped by the same barycentric
/// combination of the target vertices.
pub fn evaluate_map(
    mesh: &TriangulatedDisk,
    map: &PlMap,
    points: &[Point],
) -> Result<Vec<Point>, LayoutError> {
    let grid = FaceGrid::new(mesh, &map.src);
    let (lo, hi) = map.src.bounding_box();
    let reach = BOUNDARY_TOL * dist(lo, hi);
    let image = |f: usize, bary: [f64; 3]| {
        let d = mesh.face(f).map(|v| map.dst.coords[v]);
        [
            bary[0] * d[0][0] + bary[1] * d[1][0] + bary[2] * d[2][0],
            bary[0] * d[0][1] + bary[1] * d[1][1] + bary[2] * d[2][1],
        ]
    };
    points
        .iter()
        .map(|&p| {
            let src = |f: usize| mesh.face(f).map(|v| map.src.coords[v]);
            let mut best: Option<(f64, usize, [f64; 3])> = None;
            for &f in grid.candidates(p) {
                let bary = barycentric(src(f), p);
                let m = bary[0].min(bary[1]).min(bary[2]);
                if best.is_none_or(|(bm, _, _)| m > bm) {
                    best = Some((m, f, bary));
                }
            }
            if let Some((m, f, bary)) = best {
                if m >= -SNAP_TOL {
                    return Ok(image(f, bary));
                }
            }
            // Near the boundary the nearest face may sit in a neighbouring cell.
            let mut near: Option<(f64, usize)> = None;
            for f in grid.neighbourhood(p) {
                let d = face_distance(src(f), p);
                if near.is_none_or(|(bd, _)| d < bd) {
                    near = Some((d, f));
                }
            }
            match near {
                Some((d, f)) if d <= reach => {
                    let b = barycentric(src(f), p).map(|x| x.max(0.0));
                    let total = b[0] + b[1] + b[2];
                    Ok(image(f, b.map(|x| x / total)))
                }
                _ => Err(LayoutError::PointOutsideDomain { x: p[0], y: p[1] }),
            }
        })
        .collect()
}

/// Points `(i / k) p1 + (j / k) p2 + (1 - (i + j) / k) p0` of the unit triangle, `i + j <= k`.
pub fn barycentric_grid(k: usize) -> Vec<Point> {
    let [p0, p1, p2] = UNIT_TRIANGLE;
    let mut out = Vec::new();
    for j in 0..=k {
        for i in 0..=(k - j) {
            let (a, b) = (i as f64 / k as f64, j as f64 / k as f64);
            let c = 1.0 - a - b;
            out.push([
                c * p0[0] + a * p1[0] + b * p2[0],
                c * p0[1] + a * p1[1] + b * p2[1],
            ]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum Embedding {
    Embedded,
    Overlap { faces: (usize, usize) },
}

/// Looks for two faces whose interiors overlap.
///
/// Faces sharing an edge are compared only by checking that their opposite vertices lie
/// on different sides of it. Other pairs use a separating-axis test on the six edge
/// lines, with exact orientation signs and a tolerance of `1e-12` times the bounding-box
/// diagonal so that faces touching along an edge or at a vertex count as separate.
pub fn embedding_check(mesh: &TriangulatedDisk, layout: &Layout) -> Embedding {
    let (lo, hi) = layout.bounding_box();
    let eps = 1e-12 * dist(lo, hi);
    let c = &layout.coords;

    let folds = mesh.interior_edges().find_map(|e| {
        let edge = mesh.edge(e);
        let [a, b] = edge.vertices;
        let [f, g] = [edge.faces[0], edge.faces[1]];
        let x = mesh.opposite_vertex(f, e);
        let y = mesh.opposite_vertex(g, e);
        let sx = robust_orient(c[a], c[b], c[x]);
        let sy = robust_orient(c[a], c[b], c[y]);
        let tol = eps * dist(c[a], c[b]);
        (sx * sy > 0.0 && sx.abs() > tol && sy.abs() > tol).then_some((f.min(g), f.max(g)))
    });
    if let Some(faces) = folds {
        return Embedding::Overlap { faces };
    }

    let nf = mesh.n_faces();
    let boxes: Vec<(f64, f64, f64, f64)> = mesh
        .faces()
        .iter()
        .map(|t| {
            let p = t.map(|v| c[v]);
            (
                p[0][0].min(p[1][0]).min(p[2][0]),
                p[0][0].max(p[1][0]).max(p[2][0]),
                p[0][1].min(p[1][1]).min(p[2][1]),
                p[0][1].max(p[1][1]).max(p[2][1]),
            )
        })
        .collect();
    let mut order: Vec<usize> = (0..nf).collect();
    order.sort_by(|&a, &b| boxes[a].0.total_cmp(&boxes[b].0).then(a.cmp(&b)));
    let hit = (0..nf)
        .into_par_iter()
        .filter_map(|i| {
            let f = order[i];
            let tf = mesh.face(f);
            let mut first: Option<(usize, usize)> = None;
            for &g in &order[i + 1..] {
                if boxes[g].0 > boxes[f].1 + eps {
                    break;
                }
                if boxes[g].2 > boxes[f].3 + eps || boxes[f].2 > boxes[g].3 + eps {
                    continue;
                }
                let tg = mesh.face(g);
                let shared = tf.iter().filter(|v| tg.contains(v)).count();
                if shared >= 2 {
                    continue;
                }
                if interiors_overlap(tf.map(|v| c[v]), tg.map(|v| c[v]), eps) {
                    let pair = (f.min(g), f.max(g));
                    if first.is_none_or(|p| pair < p) {
                        first = Some(pair);
                    }
                }
            }
            first
        })
        .min();
    match hit {
        Some(faces) => Embedding::Overlap { faces },
        None => Embedding::Embedded,
    }
}

fn robust_orient(a: Point, b: Point, c: Point) -> f64 {
    let p = |q: Point| robust::Coord { x: q[0], y: q[1] };
    robust::orient2d(p(a), p(b), p(c))
}

fn interiors_overlap(s: [Point; 3], t: [Point; 3], eps: f64) -> bool {
    !(separated_by_edges(s, t, eps) || separated_by_edges(t, s, eps))
}

/// True when some edge line of `s` has all of `t` on the far side from `s`.
fn separated_by_edges(s: [Point; 3], t: [Point; 3], eps: f64) -> bool {
    let sign = robust_orient(s[0], s[1], s[2]).signum();
    (0..3).any(|k| {
        let (a, b) = (s[k], s[(k + 1) % 3]);
        let tol = eps * dist(a, b);
        t.iter().all(|&q| sign * robust_orient(a, b, q) <= tol)
    })
}

/// Rotation and translation minimizing the squared distance from `a` to `b`; returns the
/// largest remaining vertex discrepancy.
pub fn rigid_alignment_error(a: &[Point], b: &[Point]) -> f64 {
    let n = a.len() as f64;
    let ca = a
        .iter()
        .fold([0.0, 0.0], |s, p| [s[0] + p[0] / n, s[1] + p[1] / n]);
    let cb = b
        .iter()
        .fold([0.0, 0.0], |s, p| [s[0] + p[0] / n, s[1] + p[1] / n]);
    let (mut dot, mut cross) = (0.0, 0.0);
    for (p, q) in a.iter().zip(b) {
        let (x, y) = (sub(*p, ca), sub(*q, cb));
        dot += x[0] * y[0] + x[1] * y[1];
        cross += x[0] * y[1] - x[1] * y[0];
    }
    let (sn, cs) = cross.atan2(dot).sin_cos();
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let x = sub(*p, ca);
            let r = [cs * x[0] - sn * x[1] + cb[0], sn * x[0] + cs * x[1] + cb[1]];
            dist(r, *q)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Default)]
pub struct SvgOptions<'a> {
    /// Circle radius per vertex.
    pub circles: Option<&'a [f64]>,
    pub labels: bool,
    pub markers: Option<[usize; 3]>,
}

/// SVG drawing of a layout: one polygon per face, optional vertex circles and labels,
/// markers in red.
pub fn svg(mesh: &TriangulatedDisk, layout: &Layout, opts: &SvgOptions) -> String {
    let (lo, hi) = layout.bounding_box();
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-300);
    let size = 800.0;
    let pad = 20.0;
    let k = (size - 2.0 * pad) / span;
    let tx = |p: Point| (pad + (p[0] - lo[0]) * k, size - pad - (p[1] - lo[1]) * k);
    let stroke = 0.5f64.min(200.0 / (mesh.n_faces() as f64).sqrt().max(1.0));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(
        out,
        r##"<g fill="#dde7f3" stroke="#1f3b5c" stroke-width="{stroke:.3}">"##
    );
    for t in mesh.faces() {
        let pts: Vec<String> = t
            .iter()
            .map(|&v| {
                let (x, y) = tx(layout.coords[v]);
                format!("{x:.4},{y:.4}")
            })
            .collect();
        let _ = writeln!(out, r#"<polygon points="{}"/>"#, pts.join(" "));
    }
    let _ = writeln!(out, "</g>");
    if let Some(radii) = opts.circles {
        let _ = writeln!(
            out,
            r##"<g fill="none" stroke="#7a4f9a" stroke-width="{stroke:.3}">"##
        );
        for (v, &r) in radii.iter().enumerate() {
            let (x, y) = tx(layout.coords[v]);
            let _ = writeln!(out, r#"<circle cx="{x:.4}" cy="{y:.4}" r="{:.4}"/>"#, r * k);
        }
        let _ = writeln!(out, "</g>");
    }
    if let Some(markers) = opts.markers {
        let _ = writeln!(out, r##"<g fill="#c0392b">"##);
        for m in markers {
            let (x, y) = tx(layout.coords[m]);
            let _ = writeln!(out, r#"<circle cx="{x:.4}" cy="{y:.4}" r="4"/>"#);
        }
        let _ = writeln!(out, "</g>");
    }
    if opts.labels {
        let _ = writeln!(out, r#"<g font-size="8" font-family="monospace">"#);
        for (v, &p) in layout.coords.iter().enumerate() {
            let (x, y) = tx(p);
            let _ = writeln!(out, r#"<text x="{x:.4}" y="{y:.4}">{v}</text>"#);
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    out
}
