//! The conductance Laplacian restricted to the free vertices.

use sprs::{CsMat, TriMat};
use sprs_ldl::{Ldl, LdlNumeric, LdlSymbolic};

use super::FlowError;
use crate::mesh::TriangulatedDisk;

/// `(Delta f)_i = sum_j eta_ij (f_i - f_j)` over all neighbors.
pub fn apply_laplacian(mesh: &TriangulatedDisk, eta: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_vertices()];
    for (e, edge) in mesh.edges().iter().enumerate() {
        let [a, b] = edge.vertices;
        let d = eta[e] * (f[a] - f[b]);
        out[a] += d;
        out[b] -= d;
    }
    out
}

/// Reduced Laplacian on `V \ V0`, factored once.
///
/// Diagonal entries sum the conductances of the full star, including edges to `V0`;
/// off-diagonal entries are `-eta_ij` between free vertices. With positive conductances
/// on a connected mesh and nonempty `V0` the matrix is symmetric positive definite.
pub struct DirichletOperator {
    free: Vec<usize>,
    index: Vec<Option<usize>>,
    matrix: CsMat<f64>,
    factor: Factor,
}

// sprs-ldl cannot factor systems smaller than 2x2.
#[allow(clippy::large_enum_variant)]
enum Factor {
    Scalar(f64),
    Ldl(LdlNumeric<f64, usize>),
}

impl Factor {
    fn solve(&self, b: Vec<f64>) -> Vec<f64> {
        match self {
            Factor::Scalar(d) => b.iter().map(|x| x / d).collect(),
            Factor::Ldl(f) => f.solve(b),
        }
    }
}

impl std::fmt::Debug for DirichletOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirichletOperator")
            .field("free", &self.free.len())
            .field("nnz", &self.matrix.nnz())
            .finish()
    }
}

impl DirichletOperator {
    pub fn assemble(
        mesh: &TriangulatedDisk,
        eta: &[f64],
        dirichlet: &[usize],
    ) -> Result<Self, FlowError> {
        Self::assemble_cached(mesh, eta, dirichlet, &mut None)
    }

    /// As [`Self::assemble`], reusing the fill-reducing ordering and elimination tree
    /// kept in `symbolic`, which must come from the same mesh and Dirichlet set.
    pub fn assemble_cached(
        mesh: &TriangulatedDisk,
        eta: &[f64],
        dirichlet: &[usize],
        symbolic: &mut Option<LdlSymbolic<usize>>,
    ) -> Result<Self, FlowError> {
        let n = mesh.n_vertices();
        let mut fixed = vec![false; n];
        for &v in dirichlet {
            if v >= n {
                return Err(FlowError::InvalidProblem(format!(
                    "vertex {v} out of range"
                )));
            }
            fixed[v] = true;
        }
        if !fixed.iter().any(|&x| x) {
            return Err(FlowError::InvalidProblem("empty Dirichlet set".into()));
        }
        if let Some(e) = (0..mesh.n_edges()).find(|&e| !(eta[e] > 0.0)) {
            return Err(FlowError::NonPositiveConductance(e));
        }
        let free: Vec<usize> = (0..n).filter(|&v| !fixed[v]).collect();
        let mut index = vec![None; n];
        for (k, &v) in free.iter().enumerate() {
            index[v] = Some(k);
        }
        let m = free.len();
        let mut tri = TriMat::new((m, m));
        let mut diag = vec![0.0; m];
        for (e, edge) in mesh.edges().iter().enumerate() {
            let [a, b] = edge.vertices;
            if let Some(i) = index[a] {
                diag[i] += eta[e];
            }
            if let Some(j) = index[b] {
                diag[j] += eta[e];
            }
            if let (Some(i), Some(j)) = (index[a], index[b]) {
                tri.add_triplet(i, j, -eta[e]);
                tri.add_triplet(j, i, -eta[e]);
            }
        }
        for (i, &d) in diag.iter().enumerate() {
            tri.add_triplet(i, i, d);
        }
        let matrix: CsMat<f64> = tri.to_csc();
        let factor = if m <= 1 {
            let d = diag.first().copied().unwrap_or(1.0);
            if !(d > 0.0) {
                return Err(FlowError::SolverFailure(format!(
                    "non-positive pivot {d} at position 0"
                )));
            }
            Factor::Scalar(d)
        } else {
            let sym = symbolic
                .get_or_insert_with(|| Ldl::new().symbolic(matrix.view()))
                .clone();
            let f = sym
                .factor(matrix.view())
                .map_err(|e| FlowError::SolverFailure(format!("factorization failed: {e}")))?;
            if let Some(p) = f.d().iter().position(|&d| !(d > 0.0)) {
                return Err(FlowError::SolverFailure(format!(
                    "non-positive pivot {} at position {p}",
                    f.d()[p]
                )));
            }
            Factor::Ldl(f)
        };
        Ok(Self {
            free,
            index,
            matrix,
            factor,
        })
    }

    pub fn free_vertices(&self) -> &[usize] {
        &self.free
    }

    pub fn dim(&self) -> usize {
        self.free.len()
    }

    /// Dense copy of the reduced matrix, for inspection and small tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let m = self.free.len();
        let mut out = vec![vec![0.0; m]; m];
        for (v, (i, j)) in self.matrix.iter() {
            out[i][j] = *v;
        }
        out
    }

    fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for (v, (i, j)) in self.matrix.iter() {
            y[i] += v * x[j];
        }
        y
    }

    fn solve_reduced(&self, b: &[f64]) -> Result<Vec<f64>, FlowError> {
        if b.is_empty() {
            return Ok(Vec::new());
        }
        let mut x: Vec<f64> = self.factor.solve(b.to_vec());
        let ax = self.mul(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let dx: Vec<f64> = self.factor.solve(r);
        for (a, d) in x.iter_mut().zip(&dx) {
            *a += d;
        }
        let ax = self.mul(&x);
        let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let res = b
            .iter()
            .zip(&ax)
            .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        if !(res <= 1e-10 * (1.0 + bnorm)) {
            return Err(FlowError::SolverFailure(format!(
                "residual {res:e} too large"
            )));
        }
        Ok(x)
    }

    /// Solves `L x = rhs` on the free vertices with `x = 0` on `V0`. `rhs` is indexed by
    /// all vertices; its entries on `V0` are ignored.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, FlowError> {
        let b: Vec<f64> = self.free.iter().map(|&v| rhs[v]).collect();
        let x = self.solve_reduced(&b)?;
        let mut out = vec![0.0; self.index.len()];
        for (k, &v) in self.free.iter().enumerate() {
            out[v] = x[k];
        }
        Ok(out)
    }

    /// Solves `Delta f = rhs` on the free vertices with `f = g` on `V0`.
    pub fn solve_with_boundary(
        &self,
        mesh: &TriangulatedDisk,
        eta: &[f64],
        rhs: &[f64],
        g: &[f64],
    ) -> Result<Vec<f64>, FlowError> {
        let mut b: Vec<f64> = self.free.iter().map(|&v| rhs[v]).collect();
        for (e, edge) in mesh.edges().iter().enumerate() {
            let [a, c] = edge.vertices;
            match (self.index[a], self.index[c]) {
                (Some(i), None) => b[i] += eta[e] * g[c],
                (None, Some(j)) => b[j] += eta[e] * g[a],
                _ => {}
            }
        }
        let x = self.solve_reduced(&b)?;
        let mut out = g.to_vec();
        for (k, &v) in self.free.iter().enumerate() {
            out[v] = x[k];
        }
        Ok(out)
    }
}
