use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{MarkedDisk, MeshError, TriangulatedDisk};
use crate::geom::{self, Point};

/// A marked lattice disk approximating a planar domain from inside.
#[derive(Debug, Clone)]
pub struct LatticeDisk {
    pub disk: MarkedDisk,
    /// Planar position of each vertex.
    pub coords: Vec<[f64; 2]>,
    /// Lattice coordinates `(i, j)` of each vertex, position `scale * (i v1 + j v2)`.
    pub lattice: Vec<[i64; 2]>,
    pub scale: f64,
    /// Human-readable record of every local edit made while placing markers.
    pub adjustments: Vec<String>,
}

/// Lattice triangle: upward `(i,j),(i+1,j),(i,j+1)` or downward `(i+1,j),(i+1,j+1),(i,j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Tri {
    j: i64,
    i: i64,
    down: bool,
}

type Lv = [i64; 2];

impl Tri {
    fn verts(self) -> [Lv; 3] {
        let (i, j) = (self.i, self.j);
        if self.down {
            [[i + 1, j], [i + 1, j + 1], [i, j + 1]]
        } else {
            [[i, j], [i + 1, j], [i, j + 1]]
        }
    }
}

fn position(v: Lv, scale: f64) -> Point {
    let h = 3f64.sqrt() / 2.0;
    [
        scale * (v[0] as f64 + 0.5 * v[1] as f64),
        scale * h * v[1] as f64,
    ]
}

fn lkey(a: Lv, b: Lv) -> (Lv, Lv) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn edge_map(set: &BTreeSet<Tri>) -> HashMap<(Lv, Lv), Vec<Tri>> {
    let mut m: HashMap<(Lv, Lv), Vec<Tri>> = HashMap::new();
    for &t in set {
        let v = t.verts();
        for k in 0..3 {
            m.entry(lkey(v[k], v[(k + 1) % 3])).or_default().push(t);
        }
    }
    m
}

fn vertex_map(set: &BTreeSet<Tri>) -> BTreeMap<Lv, Vec<Tri>> {
    let mut m: BTreeMap<Lv, Vec<Tri>> = BTreeMap::new();
    for &t in set {
        for v in t.verts() {
            m.entry(v).or_default().push(t);
        }
    }
    m
}

fn component(set: &BTreeSet<Tri>, seed: Tri) -> BTreeSet<Tri> {
    let edges = edge_map(set);
    let mut out = BTreeSet::from([seed]);
    let mut stack = vec![seed];
    while let Some(t) = stack.pop() {
        let v = t.verts();
        for k in 0..3 {
            for &u in &edges[&lkey(v[k], v[(k + 1) % 3])] {
                if out.insert(u) {
                    stack.push(u);
                }
            }
        }
    }
    out
}

/// Splits the faces around `v` into groups connected through edges at `v`.
fn fans(v: Lv, faces: &[Tri]) -> Vec<Vec<Tri>> {
    let mut groups: Vec<Vec<Tri>> = Vec::new();
    let mut left: Vec<Tri> = faces.to_vec();
    while let Some(first) = left.pop() {
        let mut group = vec![first];
        let mut grew = true;
        while grew {
            grew = false;
            let mut i = 0;
            while i < left.len() {
                let shares = group.iter().any(|g| {
                    let a = g.verts();
                    let b = left[i].verts();
                    a.iter().filter(|&&x| x != v && b.contains(&x)).count() > 0
                });
                if shares {
                    group.push(left.swap_remove(i));
                    grew = true;
                } else {
                    i += 1;
                }
            }
        }
        group.sort();
        groups.push(group);
    }
    groups
}

/// Removes pinch points and holes until the set is a single disk-like component.
fn make_disk(mut set: BTreeSet<Tri>, seed: Tri) -> BTreeSet<Tri> {
    loop {
        if set.is_empty() {
            return set;
        }
        let s = if set.contains(&seed) {
            seed
        } else {
            largest_component_seed(&set)
        };
        set = component(&set, s);
        let mut changed = false;
        for (v, faces) in vertex_map(&set) {
            let mut groups = fans(v, &faces);
            if groups.len() > 1 {
                groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
                for g in &groups[1..] {
                    for t in g {
                        set.remove(t);
                    }
                }
                changed = true;
                break;
            }
        }
        if changed {
            continue;
        }
        let holes = hole_vertices(&set);
        if !holes.is_empty() {
            set.retain(|t| !t.verts().iter().any(|v| holes.contains(v)));
            continue;
        }
        return set;
    }
}

fn largest_component_seed(set: &BTreeSet<Tri>) -> Tri {
    let mut best: Option<(usize, Tri)> = None;
    let mut seen: BTreeSet<Tri> = BTreeSet::new();
    for &t in set {
        if seen.contains(&t) {
            continue;
        }
        let c = component(set, t);
        if best.is_none_or(|(n, _)| c.len() > n) {
            best = Some((c.len(), t));
        }
        seen.extend(c);
    }
    best.unwrap().1
}

/// Vertices on boundary cycles other than the outer one.
fn hole_vertices(set: &BTreeSet<Tri>) -> BTreeSet<Lv> {
    let edges = edge_map(set);
    let mut next: BTreeMap<Lv, Lv> = BTreeMap::new();
    for &t in set {
        let v = t.verts();
        for k in 0..3 {
            let (a, b) = (v[k], v[(k + 1) % 3]);
            if edges[&lkey(a, b)].len() == 1 {
                next.insert(a, b);
            }
        }
    }
    let mut cycles: Vec<Vec<Lv>> = Vec::new();
    let mut used: BTreeSet<Lv> = BTreeSet::new();
    for &start in next.keys() {
        if used.contains(&start) {
            continue;
        }
        let mut cyc = vec![start];
        used.insert(start);
        let mut cur = next[&start];
        while cur != start && used.insert(cur) {
            cyc.push(cur);
            cur = next[&cur];
        }
        cycles.push(cyc);
    }
    if cycles.len() <= 1 {
        return BTreeSet::new();
    }
    let area =
        |c: &Vec<Lv>| geom::polygon_area(&c.iter().map(|&v| position(v, 1.0)).collect::<Vec<_>>());
    let outer = (0..cycles.len())
        .max_by(|&a, &b| area(&cycles[a]).total_cmp(&area(&cycles[b])))
        .unwrap();
    cycles
        .into_iter()
        .enumerate()
        .filter(|&(k, _)| k != outer)
        .flat_map(|(_, c)| c)
        .collect()
}

struct Built {
    mesh: TriangulatedDisk,
    verts: Vec<Lv>,
    index: HashMap<Lv, usize>,
}

fn build(set: &BTreeSet<Tri>) -> Result<Built, MeshError> {
    let verts: Vec<Lv> = vertex_map(set).keys().copied().collect();
    let mut sorted = verts.clone();
    sorted.sort_by_key(|v| (v[1], v[0]));
    let index: HashMap<Lv, usize> = sorted.iter().enumerate().map(|(k, &v)| (v, k)).collect();
    let faces: Vec<[usize; 3]> = set.iter().map(|t| t.verts().map(|v| index[&v])).collect();
    let mesh = TriangulatedDisk::build_from_faces(&faces)?;
    Ok(Built {
        mesh,
        verts: sorted,
        index,
    })
}

fn faces_at(set: &BTreeSet<Tri>, v: Lv) -> Vec<Tri> {
    set.iter()
        .filter(|t| t.verts().contains(&v))
        .copied()
        .collect()
}

fn boundary_vertices(set: &BTreeSet<Tri>) -> Vec<Lv> {
    let edges = edge_map(set);
    let mut out: BTreeSet<Lv> = BTreeSet::new();
    for ((a, b), fs) in edges {
        if fs.len() == 1 {
            out.insert(a);
            out.insert(b);
        }
    }
    out.into_iter().collect()
}

/// Approximates `polygon` from inside by triangles of the equilateral lattice with spacing
/// `scale`, and chooses three boundary vertices with exactly one incident triangle near the
/// requested marker points.
///
/// A lattice triangle is kept when no polygon edge meets its open interior and its
/// barycenter lies inside the polygon. The kept set is reduced to the edge-connected part
/// containing the triangle nearest the polygon centroid, with pinch vertices and holes cut
/// away. Other boundary vertices with a single incident triangle have that triangle
/// removed, so only the markers carry the extreme boundary curvature.
pub fn hexagonal_approximation(
    polygon: &[[f64; 2]],
    scale: f64,
    markers: [[f64; 2]; 3],
) -> Result<LatticeDisk, MeshError> {
    if polygon.len() < 3 {
        return Err(MeshError::InvalidDomain("fewer than three vertices".into()));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(MeshError::InvalidDomain(format!("bad scale {scale}")));
    }
    let mut poly: Vec<Point> = polygon.to_vec();
    let area = geom::polygon_area(&poly);
    if area == 0.0 || !geom::polygon_is_simple(&poly) {
        return Err(MeshError::InvalidDomain("polygon is not simple".into()));
    }
    if area < 0.0 {
        poly.reverse();
    }

    let h = 3f64.sqrt() / 2.0 * scale;
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in &poly {
        xmin = xmin.min(p[0]);
        xmax = xmax.max(p[0]);
        ymin = ymin.min(p[1]);
        ymax = ymax.max(p[1]);
    }
    let tol = 1e-9 * scale;
    let (j0, j1) = ((ymin / h).floor() as i64 - 1, (ymax / h).ceil() as i64 + 1);
    let mut kept: BTreeSet<Tri> = BTreeSet::new();
    for j in j0..=j1 {
        let shift = 0.5 * j as f64;
        let (i0, i1) = (
            (xmin / scale - shift).floor() as i64 - 1,
            (xmax / scale - shift).ceil() as i64 + 1,
        );
        for i in i0..=i1 {
            for down in [false, true] {
                let t = Tri { j, i, down };
                let pts = t.verts().map(|v| position(v, scale));
                let bc = [
                    (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0,
                    (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0,
                ];
                if geom::winding_number(bc, &poly) == 0 {
                    continue;
                }
                let n = poly.len();
                let cut = (0..n).any(|e| {
                    geom::segment_meets_open_triangle(poly[e], poly[(e + 1) % n], pts, tol)
                });
                if !cut {
                    kept.insert(t);
                }
            }
        }
    }
    if kept.is_empty() {
        return Err(MeshError::ScaleTooCoarse);
    }
    let centroid = geom::polygon_centroid(&poly);
    let barycenter = |t: &Tri| {
        let p = t.verts().map(|v| position(v, scale));
        [
            (p[0][0] + p[1][0] + p[2][0]) / 3.0,
            (p[0][1] + p[1][1] + p[2][1]) / 3.0,
        ]
    };
    let seed = *kept
        .iter()
        .min_by(|a, b| {
            geom::dist(barycenter(a), centroid).total_cmp(&geom::dist(barycenter(b), centroid))
        })
        .unwrap();
    let mut set = make_disk(kept, seed);
    if set.is_empty() {
        return Err(MeshError::ScaleTooCoarse);
    }
    build(&set)?;

    let mut adjustments = Vec::new();
    let mut chosen: Vec<Lv> = Vec::new();
    let reach = 3.0 * scale * (1.0 + 1e-9);
    for (index, &m) in markers.iter().enumerate() {
        let fail = MeshError::MarkerAdjustmentFailed {
            index,
            x: m[0],
            y: m[1],
        };
        let bverts = boundary_vertices(&set);
        let near = |v: &Lv| geom::dist(position(*v, scale), m);
        let candidate = bverts
            .iter()
            .filter(|v| !chosen.contains(v) && faces_at(&set, **v).len() == 1 && near(v) <= reach)
            .min_by(|a, b| near(a).total_cmp(&near(b)));
        if let Some(&v) = candidate {
            chosen.push(v);
            continue;
        }
        let &v = bverts
            .iter()
            .filter(|v| !chosen.contains(v))
            .min_by(|a, b| near(a).total_cmp(&near(b)))
            .ok_or(fail.clone())?;
        // Peel faces off either end of the fan at v until one remains.
        while faces_at(&set, v).len() > 1 {
            let built = build(&set)?;
            let vi = built.index[&v];
            let around = built.mesh.faces_around(vi);
            let ends = [around[0], *around.last().unwrap()];
            let mut done = false;
            for f in ends {
                let t = built.mesh.face(f).map(|x| built.verts[x]);
                let tri = *set
                    .iter()
                    .find(|s| {
                        let sv = s.verts();
                        t.iter().all(|x| sv.contains(x))
                    })
                    .unwrap();
                let mut trial = set.clone();
                trial.remove(&tri);
                let keeps_markers = chosen.iter().all(|c| faces_at(&trial, *c).len() == 1);
                if keeps_markers && build(&trial).is_ok() {
                    adjustments.push(format!(
                        "marker {index}: removed lattice triangle at ({}, {}) to isolate vertex ({}, {})",
                        tri.i, tri.j, v[0], v[1]
                    ));
                    set = trial;
                    done = true;
                    break;
                }
            }
            if !done {
                return Err(fail);
            }
        }
        chosen.push(v);
    }

    // Remove stray single-triangle boundary vertices.
    loop {
        let stray = boundary_vertices(&set)
            .into_iter()
            .find(|v| !chosen.contains(v) && faces_at(&set, *v).len() == 1);
        let Some(v) = stray else { break };
        let tri = faces_at(&set, v)[0];
        let mut trial = set.clone();
        trial.remove(&tri);
        let keeps_markers = chosen.iter().all(|c| faces_at(&trial, *c).len() == 1);
        if trial.is_empty() || !keeps_markers || build(&trial).is_err() {
            let index = (0..3)
                .min_by(|&a, &b| {
                    geom::dist(markers[a], position(v, scale))
                        .total_cmp(&geom::dist(markers[b], position(v, scale)))
                })
                .unwrap();
            return Err(MeshError::MarkerAdjustmentFailed {
                index,
                x: markers[index][0],
                y: markers[index][1],
            });
        }
        adjustments.push(format!(
            "removed lattice triangle at ({}, {}) with lone vertex ({}, {})",
            tri.i, tri.j, v[0], v[1]
        ));
        set = trial;
    }

    let built = build(&set)?;
    let marker_ids = [0, 1, 2].map(|k| built.index[&chosen[k]]);
    let disk = MarkedDisk::new(built.mesh, marker_ids)?;
    let coords = built.verts.iter().map(|&v| position(v, scale)).collect();
    Ok(LatticeDisk {
        disk,
        coords,
        lattice: built.verts,
        scale,
        adjustments,
    })
}
