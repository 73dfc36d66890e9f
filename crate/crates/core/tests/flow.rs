use std::f64::consts::PI;
use std::sync::Arc;

use idcp_core::flow::{
    corner_flow, flatten_disk, flow_velocity, integrate_flow, FlowConfig, FlowProblem, FlowStatus,
};
use idcp_core::mesh::{
    hexagonal_approximation, standard_subdivision, star_polygon, MarkedDisk, TriangulatedDisk,
};
use idcp_core::packing::PackingState;

fn lat(i: f64, j: f64) -> [f64; 2] {
    [i + j / 2.0, j * 3f64.sqrt() / 2.0]
}

/// Lattice pentagon with one reflex corner of degree 5 and one convex corner of degree 3.
fn l_shape() -> idcp_core::mesh::LatticeDisk {
    let polygon = vec![
        lat(0.0, 0.0),
        lat(3.0, 0.0),
        lat(2.0, 1.0),
        lat(1.0, 1.0),
        lat(0.0, 2.0),
    ];
    let markers = [lat(0.0, 0.0), lat(3.0, 0.0), lat(0.0, 2.0)];
    hexagonal_approximation(&polygon, 1.0, markers).unwrap()
}

/// Inner angle at `v`, summed over its faces, from the cosine law on the state's lengths.
fn angle_sum(state: &PackingState, v: usize) -> f64 {
    let mesh = state.mesh();
    let mut total = 0.0;
    for &f in mesh.vertex_faces(v) {
        let t = mesh.face(f);
        let p = t.iter().position(|&x| x == v).unwrap();
        let (a, b) = (t[(p + 1) % 3], t[(p + 2) % 3]);
        let len = |x: usize, y: usize| state.edge_length(mesh.edge_between(x, y).unwrap());
        let (la, lb, lo) = (len(v, a), len(v, b), len(a, b));
        total += ((la * la + lb * lb - lo * lo) / (2.0 * la * lb)).acos();
    }
    total
}

#[test]
fn unchanged_target_gives_zero_factor() {
    let mesh = Arc::new(star_polygon(7).unwrap());
    let state = PackingState::new(
        Arc::clone(&mesh),
        vec![2.0; mesh.n_edges()],
        vec![0.1, 0.0, 0.05, -0.05, 0.0, 0.02, 0.0, -0.03],
    )
    .unwrap();
    let target = state.curvature().unwrap();
    let problem = FlowProblem {
        state,
        dirichlet: vec![1],
        target,
        config: FlowConfig::default(),
    };
    let r = integrate_flow(&problem).unwrap();
    assert!(r.status.is_completed());
    assert!(r.w.iter().all(|&w| w == 0.0));
}

#[test]
fn star_velocity_is_scalar_division() {
    let mesh = Arc::new(star_polygon(6).unwrap());
    let state = PackingState::constant(Arc::clone(&mesh), 2.0, 0.0).unwrap();
    let eps = 1e-3;
    let mut dk = vec![0.0; 7];
    dk[0] = eps;
    let v = flow_velocity(&state, &[1, 2, 3, 4, 5, 6], &dk).unwrap();
    let eta = 1.0 / 3f64.sqrt();
    assert!((v[0] - eps / (6.0 * eta)).abs() < 1e-15);
    assert!(v[1..].iter().all(|&x| x == 0.0));
}

#[test]
fn corner_flow_at_sixty_degrees_is_constant() {
    let r = corner_flow(6, PI / 3.0, 2.0, &FlowConfig::default()).unwrap();
    assert!(r.flow.status.is_completed());
    let wmax = r.flow.w.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    assert!(wmax < 1e-12, "{wmax:e}");
    assert!(r.ledger_total < 1e-12);
}

#[test]
fn corner_flow_quarter_turn() {
    let alpha = PI / 4.0;
    let r = corner_flow(8, alpha, 2.0, &FlowConfig::default()).unwrap();
    assert!(r.flow.status.is_completed());
    assert!((r.flow.curvature[r.apex] - 3.0 * PI / 4.0).abs() < 1e-9);
    let spread = (alpha - PI / 3.0).abs();
    let (lo, hi) = r.angle_range;
    assert!(lo >= PI / 3.0 - spread - 1e-6 && hi <= PI / 3.0 + spread + 1e-6);
    assert!(r.ledger_total <= PI / 6.0 + 1e-6);

    let dk = PI - alpha - 2.0 * PI / 3.0;
    let mut t_prev = 0.0;
    for s in &r.flow.trajectory {
        let step = s.t - t_prev;
        t_prev = s.t;
        assert!(
            s.consistency_error <= 10.0 * step.powi(4) * dk.abs() + 1e-8,
            "t={}",
            s.t
        );
        assert!(
            s.max_gradient <= 0.5 * spread + 1e-8,
            "gradient {} at t={}",
            s.max_gradient,
            s.t
        );
        assert!(s.max_radius_ratio <= 20.0);
        assert!(s.conductance_terms.0 > 0.0 && s.conductance_terms.1.is_finite());
    }
}

#[test]
fn corner_flow_right_angle() {
    let r = corner_flow(8, PI / 2.0, 2.0, &FlowConfig::default()).unwrap();
    assert!(r.flow.status.is_completed());
    let state = PackingState::constant(Arc::new(r.mesh().clone()), 2.0, 0.0)
        .unwrap()
        .shifted(&r.flow.w)
        .unwrap();
    assert!((angle_sum(&state, r.apex) - PI / 2.0).abs() < 1e-8);
}

#[test]
fn corner_ledger_shrinks_with_refinement() {
    let config = FlowConfig::default();
    let coarse = corner_flow(4, PI / 6.0, 2.0, &config).unwrap();
    let fine = corner_flow(16, PI / 6.0, 2.0, &config).unwrap();
    assert!(coarse.flow.status.is_completed() && fine.flow.status.is_completed());
    assert!(fine.ledger_max < coarse.ledger_max);
}

#[test]
fn corner_angle_outside_range_is_rejected() {
    assert!(corner_flow(4, PI / 8.0, 2.0, &FlowConfig::default()).is_err());
    assert!(corner_flow(4, 0.6 * PI, 2.0, &FlowConfig::default()).is_err());
}

#[test]
fn equilateral_triangle_needs_no_flattening() {
    let mesh = TriangulatedDisk::build_from_faces(&[[0, 1, 2]]).unwrap();
    let disk = MarkedDisk::new(mesh, [0, 1, 2]).unwrap();
    let sub = standard_subdivision(&disk.mesh, 5).unwrap();
    let r = flatten_disk(&disk, &sub, 2.0, 0.0, &FlowConfig::default()).unwrap();
    assert!(r.status.is_completed());
    assert!(r.corner_flows.is_empty());
    let wmax = r.w.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    assert!(wmax < 1e-12, "{wmax:e}");
}

#[test]
fn l_shape_flattens_at_eighteen() {
    let lattice = l_shape();
    let degrees: Vec<usize> = lattice
        .disk
        .mesh
        .boundary_cycle()
        .iter()
        .filter(|v| !lattice.disk.markers.contains(v))
        .map(|&v| lattice.disk.mesh.degree(v))
        .filter(|&d| d != 4)
        .collect();
    assert_eq!(degrees.iter().filter(|&&d| d == 3).count(), 1);
    assert_eq!(degrees.iter().filter(|&&d| d == 5).count(), 1);

    let sub = standard_subdivision(&lattice.disk.mesh, 18).unwrap();
    let r = flatten_disk(&lattice.disk, &sub, 2.0, 0.0, &FlowConfig::default()).unwrap();
    assert!(r.status.is_completed(), "{:?}", r.status);
    assert_eq!(r.ball_radius, 6);
    assert_eq!(r.corner_flows.len(), 2);
    let state = PackingState::constant(Arc::new(sub.mesh.clone()), 2.0, 0.0)
        .unwrap()
        .shifted(&r.w)
        .unwrap();
    for (v, k) in state.curvature().unwrap().into_iter().enumerate() {
        let want = if r.markers.contains(&v) {
            2.0 * PI / 3.0
        } else {
            0.0
        };
        assert!((k - want).abs() < 1e-8, "vertex {v}: {k}");
    }
}

#[test]
fn coarse_l_shape_reports_corridor_exit() {
    let lattice = l_shape();
    let sub = standard_subdivision(&lattice.disk.mesh, 6).unwrap();
    let r = flatten_disk(&lattice.disk, &sub, 2.0, 0.0, &FlowConfig::default()).unwrap();
    assert!(matches!(r.status, FlowStatus::AbortedAngle { .. }));
    assert!(r.failed_stage.is_some());
}
