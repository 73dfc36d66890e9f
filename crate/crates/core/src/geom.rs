//! Small planar predicates shared by the lattice builder and the layout code.

pub type Point = [f64; 2];

/// Twice the signed area of `(a, b, c)`; positive when counterclockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Signed area of a closed polygon; positive when counterclockwise.
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        / 2.0
}

pub fn polygon_centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let c = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
        a2 += c;
    }
    [cx / (3.0 * a2), cy / (3.0 * a2)]
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let s = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + s * dx, a[1] + s * dy])
}

pub fn boundary_distance(p: Point, poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Winding number of a closed polygon around `p`.
pub fn winding_number(p: Point, poly: &[Point]) -> i32 {
    let n = poly.len();
    let mut w = 0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a[1] <= p[1] {
            if b[1] > p[1] && orient(a, b, p) > 0.0 {
                w += 1;
            }
        } else if b[1] <= p[1] && orient(a, b, p) < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Whether segments `ab` and `cd` cross at a single point interior to both.
pub fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Whether segment `cd` meets the open counterclockwise triangle `t` by more than `tol`.
pub fn segment_meets_open_triangle(c: Point, d: Point, t: [Point; 3], tol: f64) -> bool {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for k in 0..3 {
        let (a, b) = (t[k], t[(k + 1) % 3]);
        let margin = tol * dist(a, b);
        let f0 = orient(a, b, c) - margin;
        let f1 = orient(a, b, d) - margin;
        // Keep s in [lo, hi] with f0 + s (f1 - f0) > 0.
        if f0 <= 0.0 && f1 <= 0.0 {
            return false;
        }
        if f0 <= 0.0 {
            lo = lo.max(f0 / (f0 - f1));
        } else if f1 <= 0.0 {
            hi = hi.min(f0 / (f0 - f1));
        }
        if lo >= hi {
            return false;
        }
    }
    true
}

/// Whether a closed polygon is simple (no two non-adjacent edges touch).
pub fn polygon_is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if a == b {
            return false;
        }
        for j in (i + 1)..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (poly[j], poly[(j + 1) % n]);
            if segments_cross(a, b, c, d)
                || point_segment_distance(c, a, b) == 0.0
                || point_segment_distance(d, a, b) == 0.0
                || point_segment_distance(a, c, d) == 0.0
                || point_segment_distance(b, c, d) == 0.0
            {
                return false;
            }
        }
    }
    true
}
