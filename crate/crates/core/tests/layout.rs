use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use idcp_core::flow::{corner_flow, FlowConfig};
use idcp_core::layout::{
    develop, embedding_check, evaluate_map, normalize_to_unit_triangle, pl_map, Embedding, Layout,
    LayoutError, UNIT_TRIANGLE,
};
use idcp_core::mesh::{standard_subdivision, TriangulatedDisk};
use idcp_core::packing::PackingState;

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn apply(m: &idcp_core::layout::FaceMap, p: [f64; 2]) -> [f64; 2] {
    [
        m.linear[0][0] * p[0] + m.linear[0][1] * p[1] + m.translation[0],
        m.linear[1][0] * p[0] + m.linear[1][1] * p[1] + m.translation[1],
    ]
}

fn inner_angles(mesh: &TriangulatedDisk, layout: &Layout) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in mesh.faces() {
        for k in 0..3 {
            let (a, b, c) = (
                layout.coords[t[k]],
                layout.coords[t[(k + 1) % 3]],
                layout.coords[t[(k + 2) % 3]],
            );
            let (u, v) = ([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]);
            let ang = (u[0] * v[1] - u[1] * v[0]).atan2(u[0] * v[0] + u[1] * v[1]);
            lo = lo.min(ang);
            hi = hi.max(ang);
        }
    }
    (lo, hi)
}

#[test]
fn corner_flow_layout() {
    let r = corner_flow(8, PI / 4.0, 2.0, &FlowConfig::default()).unwrap();
    let mesh = r.mesh().clone();
    let state = PackingState::constant(Arc::new(mesh.clone()), 2.0, 0.0)
        .unwrap()
        .shifted(&r.flow.w)
        .unwrap();
    let lengths = state.lengths();
    let flat = develop(&mesh, &lengths).unwrap();
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = edge.vertices;
        let l = dist(flat.coords[a], flat.coords[b]);
        assert!((l - lengths[e]).abs() <= 1e-9 * lengths[e]);
    }
    assert_eq!(embedding_check(&mesh, &flat), Embedding::Embedded);

    // The apex keeps the prescribed angle in the plane.
    let apex = r.apex;
    let nbrs = mesh.neighbors(apex);
    let boundary: Vec<usize> = nbrs
        .iter()
        .copied()
        .filter(|&v| mesh.is_boundary(v))
        .collect();
    assert_eq!(boundary.len(), 2);
    let p = flat.coords[apex];
    let (u, v) = (flat.coords[boundary[0]], flat.coords[boundary[1]]);
    let a =
        ((u[0] - p[0]) * (v[0] - p[0]) + (u[1] - p[1]) * (v[1] - p[1])) / (dist(u, p) * dist(v, p));
    assert!((a.acos() - PI / 4.0).abs() < 1e-8);

    // Dilatation stays inside the envelope given by the smallest angle of either layout.
    let coarse = TriangulatedDisk::build_from_faces(&[[0, 1, 2]]).unwrap();
    let sub = standard_subdivision(&coarse, 8).unwrap();
    let src = Layout::from_coords(&mesh, sub.interpolate(&coarse, &UNIT_TRIANGLE)).unwrap();
    let map = pl_map(&mesh, &src, &flat).unwrap();
    let theta_min = inner_angles(&mesh, &flat).0.min(PI / 3.0);
    let envelope = (PI / 2.0 - theta_min / 2.0).tan() / (theta_min / 2.0).tan();
    assert!(map.global_dilatation >= 1.0 && map.global_dilatation <= envelope);
}

#[test]
fn equilateral_flat_metric_normalizes_exactly() {
    let coarse = TriangulatedDisk::build_from_faces(&[[0, 1, 2]]).unwrap();
    let sub = standard_subdivision(&coarse, 6).unwrap();
    let state = PackingState::constant(Arc::new(sub.mesh.clone()), 3.0, 0.7).unwrap();
    let flat = develop(&sub.mesh, &state.lengths()).unwrap();
    let n = normalize_to_unit_triangle(&sub.mesh, &flat, [0, 1, 2]).unwrap();
    assert!(n.residual < 1e-6);
    let expected = sub.interpolate(&coarse, &UNIT_TRIANGLE);
    for (p, q) in n.layout.coords.iter().zip(&expected) {
        assert!(dist(*p, *q) < 1e-12);
    }
}

#[test]
fn shared_edges_map_consistently() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let coarse = TriangulatedDisk::build_from_faces(&[[0, 1, 2]]).unwrap();
    let sub = standard_subdivision(&coarse, 6).unwrap();
    let mesh = &sub.mesh;
    let base = sub.interpolate(&coarse, &UNIT_TRIANGLE);
    let moved: Vec<[f64; 2]> = base
        .iter()
        .map(|p| {
            [
                p[0] + rng.gen_range(-0.03..0.03),
                p[1] + rng.gen_range(-0.03..0.03),
            ]
        })
        .collect();
    let src = Layout::from_coords(mesh, base).unwrap();
    let dst = Layout::from_coords(mesh, moved).unwrap();
    let map = pl_map(mesh, &src, &dst).unwrap();
    let mut points = Vec::new();
    let mut expected = Vec::new();
    for e in mesh.interior_edges() {
        let edge = mesh.edge(e);
        let [a, b] = edge.vertices;
        for s in [0.25, 0.5, 0.8] {
            let lerp =
                |p: [f64; 2], q: [f64; 2]| [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
            let x = lerp(src.coords[a], src.coords[b]);
            let from_faces: Vec<[f64; 2]> = edge
                .faces
                .iter()
                .map(|&f| apply(&map.faces[f], x))
                .collect();
            assert!(dist(from_faces[0], from_faces[1]) < 1e-12);
            points.push(x);
            expected.push(lerp(dst.coords[a], dst.coords[b]));
        }
    }
    let images = evaluate_map(mesh, &map, &points).unwrap();
    for (p, q) in images.iter().zip(&expected) {
        assert!(dist(*p, *q) < 1e-12);
    }
}

#[test]
fn points_outside_the_source_are_rejected() {
    let coarse = TriangulatedDisk::build_from_faces(&[[0, 1, 2]]).unwrap();
    let sub = standard_subdivision(&coarse, 3).unwrap();
    let src = Layout::from_coords(&sub.mesh, sub.interpolate(&coarse, &UNIT_TRIANGLE)).unwrap();
    let map = pl_map(&sub.mesh, &src, &src).unwrap();
    let err = evaluate_map(&sub.mesh, &map, &[[0.5, -0.1]]).unwrap_err();
    assert!(matches!(err, LayoutError::PointOutsideDomain { .. }));
    assert!(map.faces.iter().all(|f| (f.dilatation - 1.0).abs() < 1e-12));
}

#[test]
fn points_on_a_slightly_bent_side_are_mapped() {
    let coarse = TriangulatedDisk::build_from_faces(&[[0, 1, 2]]).unwrap();
    let sub = standard_subdivision(&coarse, 4).unwrap();
    let mut coords = sub.interpolate(&coarse, &UNIT_TRIANGLE);
    // Push the midpoint of the bottom side inward, so the segment's own midpoint falls outside.
    let mid = coords
        .iter()
        .position(|p| dist(*p, [0.5, 0.0]) < 1e-12)
        .unwrap();
    coords[mid][1] += 1e-8;
    let src = Layout::from_coords(&sub.mesh, coords).unwrap();
    let map = pl_map(&sub.mesh, &src, &src).unwrap();
    let images = evaluate_map(&sub.mesh, &map, &[[0.5, 0.0], [0.4, 0.0]]).unwrap();
    assert!(dist(images[0], [0.5, 1e-8]) < 1e-12);
    assert!(dist(images[1], [0.4, 0.0]) < 1e-8);
    assert!(evaluate_map(&sub.mesh, &map, &[[0.5, -1e-4]]).is_err());
}
