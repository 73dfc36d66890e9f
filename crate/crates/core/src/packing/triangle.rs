//! Geometry of a single triangle of an inversive distance circle packing.
//!
//! Local vertex `k` has label `u[k]` (radius `exp(u[k])`), and `weight[k]` is the
//! inversive distance on the edge opposite vertex `k`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::PackingError;

/// Length of the edge between circles of labels `ui`, `uj` at inversive distance `weight`.
pub fn edge_length(ui: f64, uj: f64, weight: f64) -> f64 {
    let (ri, rj) = (ui.exp(), uj.exp());
    (ri * ri + rj * rj + 2.0 * ri * rj * weight).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    NonDegenerate,
    /// The three centers are collinear with the named local vertex between the others.
    DegenerateFlatAt(usize),
    /// The lengths violate the triangle inequality at the named local vertex.
    Inadmissible(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleData {
    pub u: [f64; 3],
    pub weight: [f64; 3],
}

/// Derived geometry of one face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleGeom {
    /// `lengths[k]` is the length of the edge opposite local vertex `k`.
    pub lengths: [f64; 3],
    pub q: f64,
    pub class: Classification,
    /// Extended inner angles.
    pub angles: [f64; 3],
    /// Twice the Euclidean area, `l_ij l_ik sin(theta_i)`.
    pub double_area: f64,
}

fn others(i: usize) -> (usize, usize) {
    ((i + 1) % 3, (i + 2) % 3)
}

impl TriangleData {
    pub fn new(u: [f64; 3], weight: [f64; 3]) -> Self {
        Self { u, weight }
    }

    pub fn radii(&self) -> [f64; 3] {
        self.u.map(f64::exp)
    }

    pub fn curvatures(&self) -> [f64; 3] {
        self.u.map(|x| (-x).exp())
    }

    pub fn lengths(&self) -> [f64; 3] {
        std::array::from_fn(|k| {
            let (i, j) = others(k);
            edge_length(self.u[i], self.u[j], self.weight[k])
        })
    }

    /// `gamma_i = I_i + I_j I_k`.
    pub fn gammas(&self) -> [f64; 3] {
        let w = self.weight;
        std::array::from_fn(|i| {
            let (j, k) = others(i);
            w[i] + w[j] * w[k]
        })
    }

    /// The quadratic form in the curvatures whose sign decides admissibility.
    pub fn q(&self) -> f64 {
        let k = self.curvatures();
        let w = self.weight;
        let g = self.gammas();
        let mut q = 0.0;
        for i in 0..3 {
            q += k[i] * k[i] * (1.0 - w[i] * w[i]);
        }
        q + 2.0 * (k[0] * k[1] * g[2] + k[0] * k[2] * g[1] + k[1] * k[2] * g[0])
    }

    /// `I_1^2 + I_2^2 + I_3^2 + 2 I_1 I_2 I_3 - 1`.
    pub fn discriminant_factor(&self) -> f64 {
        let w = self.weight;
        w[0] * w[0] + w[1] * w[1] + w[2] * w[2] + 2.0 * w[0] * w[1] * w[2] - 1.0
    }

    /// The curvature of vertex `i` at which the face becomes flat at `i`, given the other
    /// two curvatures. Faces with `kappa_i` above this value are inadmissible at `i`.
    pub fn critical_curvature(&self, i: usize) -> f64 {
        let k = self.curvatures();
        let (j, l) = others(i);
        let w = self.weight;
        let g = self.gammas();
        let s = self.discriminant_factor() * (k[j] * k[j] + k[l] * k[l] + 2.0 * k[j] * k[l] * w[i]);
        (k[j] * g[l] + k[l] * g[j] + s.sqrt()) / (w[i] * w[i] - 1.0)
    }

    /// Tolerance on `Q` below which a face counts as degenerate.
    pub fn q_tolerance(&self) -> f64 {
        let k = self.curvatures();
        let imax = self.weight.iter().cloned().fold(f64::MIN, f64::max);
        let kmax = k.iter().cloned().fold(0.0, f64::max);
        1e-12 * (kmax * kmax * imax * imax).max(1.0)
    }

    pub fn classify(&self) -> Result<Classification, PackingError> {
        let q = self.q();
        let tol = self.q_tolerance();
        if q > tol {
            return Ok(Classification::NonDegenerate);
        }
        let k = self.curvatures();
        let excess: [f64; 3] = std::array::from_fn(|i| {
            let c = self.critical_curvature(i);
            (k[i] - c) / c
        });
        let best = (0..3)
            .max_by(|&a, &b| excess[a].total_cmp(&excess[b]))
            .unwrap();
        if q < -tol {
            if excess[best] > 0.0 {
                Ok(Classification::Inadmissible(best))
            } else {
                Err(PackingError::AmbiguousDegeneracy)
            }
        } else {
            let nearest = (0..3)
                .min_by(|&a, &b| excess[a].abs().total_cmp(&excess[b].abs()))
                .unwrap();
            if excess[nearest].abs() < 1e-6 {
                Ok(Classification::DegenerateFlatAt(nearest))
            } else {
                Err(PackingError::AmbiguousDegeneracy)
            }
        }
    }

    /// Inner angles from the lengths via the half-angle form of the cosine law.
    pub fn euclidean_angles(&self) -> [f64; 3] {
        let l = self.lengths();
        std::array::from_fn(|i| {
            let (j, k) = others(i);
            let (a, b, c) = (l[i], l[j], l[k]);
            let num = ((a - b + c) * (a + b - c)).max(0.0);
            let den = ((a + b + c) * (b + c - a)).max(0.0);
            2.0 * num.sqrt().atan2(den.sqrt())
        })
    }

    pub fn extended_angles(&self) -> Result<[f64; 3], PackingError> {
        Ok(match self.classify()? {
            Classification::NonDegenerate => self.euclidean_angles(),
            Classification::DegenerateFlatAt(i) | Classification::Inadmissible(i) => {
                let mut a = [0.0; 3];
                a[i] = PI;
                a
            }
        })
    }

    pub fn geom(&self) -> Result<TriangleGeom, PackingError> {
        let lengths = self.lengths();
        let class = self.classify()?;
        let angles = self.extended_angles()?;
        let double_area = match class {
            Classification::NonDegenerate => {
                let r = self.radii();
                r[0] * r[1] * r[2] * self.q().sqrt()
            }
            _ => 0.0,
        };
        Ok(TriangleGeom {
            lengths,
            q: self.q(),
            class,
            angles,
            double_area,
        })
    }

    /// `d[i][j]`: distance from the center of circle `i` to the power-line foot on edge `ij`.
    pub fn center_distances(&self) -> [[f64; 3]; 3] {
        let r = self.radii();
        let l = self.lengths();
        let mut d = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let k = 3 - i - j;
                    d[i][j] = (r[i] * r[i] + r[i] * r[j] * self.weight[k]) / l[k];
                }
            }
        }
        d
    }

    /// `h_k = kappa_k (1 - I_k^2) + kappa_i gamma_j + kappa_j gamma_i`.
    pub fn h(&self) -> [f64; 3] {
        let k = self.curvatures();
        let w = self.weight;
        let g = self.gammas();
        std::array::from_fn(|c| {
            let (i, j) = others(c);
            k[c] * (1.0 - w[c] * w[c]) + k[i] * g[j] + k[j] * g[i]
        })
    }

    /// Signed distances from the power center to each edge; entry `k` belongs to the edge
    /// opposite local vertex `k`.
    pub fn perpendiculars(&self) -> Result<[f64; 3], PackingError> {
        match self.classify()? {
            Classification::NonDegenerate => {}
            _ => return Err(PackingError::DegenerateInput),
        }
        let r = self.radii();
        let k = self.curvatures();
        let l = self.lengths();
        let h = self.h();
        let area = r[0] * r[1] * r[2] * self.q().sqrt();
        let p = r[0] * r[1] * r[2];
        Ok(std::array::from_fn(|c| p * p / (area * l[c]) * k[c] * h[c]))
    }

    /// Signed angle `theta_{ij,k}` at vertex `i` between edge `ij` and the segment to the
    /// power center.
    pub fn signed_angle(&self, i: usize, j: usize) -> Result<f64, PackingError> {
        assert!(i != j && i < 3 && j < 3);
        let k = 3 - i - j;
        match self.classify()? {
            Classification::NonDegenerate => {
                let hp = self.perpendiculars()?[k];
                let d = self.center_distances()[i][j];
                Ok((hp / d).atan())
            }
            Classification::DegenerateFlatAt(f) => Ok(if f == k { -FRAC_PI_2 } else { FRAC_PI_2 }),
            Classification::Inadmissible(_) => Err(PackingError::InadmissibleInput),
        }
    }

    /// `J[i][j] = d theta_i / d u_j`.
    pub fn angle_jacobian(&self) -> Result<[[f64; 3]; 3], PackingError> {
        let hp = self.perpendiculars()?;
        let l = self.lengths();
        let mut jac = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    let k = 3 - i - j;
                    jac[i][j] = hp[k] / l[k];
                }
            }
        }
        for i in 0..3 {
            let (j, k) = others(i);
            jac[i][i] = -(jac[i][j] + jac[i][k]);
        }
        Ok(jac)
    }

    /// Per-face conductance contributions `h_{ij,k} / l_ij`, indexed by opposite vertex.
    pub fn conductance_terms(&self) -> Result<[f64; 3], PackingError> {
        let hp = self.perpendiculars()?;
        let l = self.lengths();
        Ok(std::array::from_fn(|k| hp[k] / l[k]))
    }
}
