//! Sparse symmetric assembly of the coupled two-subdomain system.
//!
//! Element contributions are accumulated as (i, j, value) triplets and
//! compressed to CSR for solving. The element loops run through
//! [`crate::par`], so parallel and sequential builds produce identical
//! triplet streams.

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::Mesh;
use crate::par::map_indexed;
use crate::quadrature::triangle_rule;
use crate::space::{eval_basis, eval_basis_grad, DofMap, MAX_LOCAL};

/// Symmetric sparse matrix in triplet (accumulation) form.
#[derive(Debug, Clone)]
pub struct SymSparseMatrix {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SymSparseMatrix {
    pub fn new(n: usize) -> Self {
        SymSparseMatrix {
            n,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    /// Adds a dense local block with the given global indices.
    pub fn add_local(&mut self, dofs: &[usize], local: &[f64]) {
        let n = dofs.len();
        debug_assert_eq!(local.len(), n * n);
        for (a, &i) in dofs.iter().enumerate() {
            for (b, &j) in dofs.iter().enumerate() {
                self.add(i, j, local[a * n + b]);
            }
        }
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Compress to CSR, merging duplicate positions.
    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.n, &self.entries)
    }

    /// Relative asymmetry ‖A − Aᵀ‖_max / ‖A‖_max of the compressed matrix.
    pub fn max_asymmetry(&self) -> f64 {
        self.to_csr().max_asymmetry()
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> CsrMatrix {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in entries {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut order = counts.clone();
        let mut cols = vec![0usize; entries.len()];
        let mut vals = vec![0.0f64; entries.len()];
        for &(i, j, v) in entries {
            let slot = order[i];
            cols[slot] = j;
            vals[slot] = v;
            order[i] += 1;
        }
        // Sort each row by column and merge duplicates.
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(entries.len());
        let mut values = Vec::with_capacity(entries.len());
        for i in 0..n {
            let lo = counts[i];
            let hi = counts[i + 1];
            let mut row: Vec<(usize, f64)> = cols[lo..hi]
                .iter()
                .cloned()
                .zip(vals[lo..hi].iter().cloned())
                .collect();
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if indices.len() > indptr[i] && *indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr[i + 1] = indices.len();
        }
        CsrMatrix {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.indptr[i];
        let hi = self.indptr[i + 1];
        (&self.indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, out) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            *out = acc;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_asymmetry(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Dense copy, row-major; for small diagnostic problems only.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n * self.n];
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                dense[i * self.n + j] += v;
            }
        }
        dense
    }
}

/// The coupled system over both subdomains. DOFs of Ω1 come first; Ω2
/// DOFs start at `offset`.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub matrix: SymSparseMatrix,
    pub rhs: Vec<f64>,
    pub offset: usize,
}

impl CoupledSystem {
    pub fn new(n: usize, offset: usize) -> Self {
        CoupledSystem {
            matrix: SymSparseMatrix::new(n),
            rhs: vec![0.0; n],
            offset,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

fn stiffness_quad_degree(dm: &DofMap) -> usize {
    2 * (dm.degree.value() - 1) + 2
}

fn load_quad_degree(dm: &DofMap) -> usize {
    2 * dm.degree.value() + 2
}

fn local_stiffness(
    mesh: &Mesh,
    dofmap: &DofMap,
    t: usize,
    rule_pts: &[(f64, f64)],
    rule_wts: &[f64],
) -> [f64; MAX_LOCAL * MAX_LOCAL] {
    let n = dofmap.degree.n_local();
    let geo = mesh.element_geometry(t).expect("valid element");
    let mut local = [0.0; MAX_LOCAL * MAX_LOCAL];
    for (&(xi, eta), &w) in rule_pts.iter().zip(rule_wts) {
        let grads = eval_basis_grad(dofmap.degree, xi, eta);
        let mut phys = [Point::default(); MAX_LOCAL];
        for k in 0..n {
            phys[k] = geo.push_gradient(grads[k]);
        }
        let scale = w * geo.det;
        for a in 0..n {
            for b in 0..n {
                local[a * MAX_LOCAL + b] += scale * phys[a].dot(phys[b]);
            }
        }
    }
    local
}

fn assemble_stiffness_impl(mesh: &Mesh, dofmap: &DofMap, par: bool) -> SymSparseMatrix {
    let rule = triangle_rule(stiffness_quad_degree(dofmap)).expect("supported degree");
    let n_local = dofmap.degree.n_local();
    let locals = map_indexed(mesh.n_triangles(), par, |t| {
        local_stiffness(mesh, dofmap, t, &rule.points, &rule.weights)
    });
    let mut matrix = SymSparseMatrix::new(dofmap.n_dofs);
    for (t, local) in locals.iter().enumerate() {
        let dofs = dofmap.cell_dofs(t);
        for a in 0..n_local {
            for b in 0..n_local {
                matrix.add(dofs[a], dofs[b], local[a * MAX_LOCAL + b]);
            }
        }
    }
    matrix
}

/// Stiffness matrix of one subdomain: A_ij = ∫ ∇φ_j · ∇φ_i.
pub fn assemble_stiffness(mesh: &Mesh, dofmap: &DofMap) -> SymSparseMatrix {
    assemble_stiffness_impl(mesh, dofmap, true)
}

/// Sequential reference path of [`assemble_stiffness`].
pub fn assemble_stiffness_seq(mesh: &Mesh, dofmap: &DofMap) -> SymSparseMatrix {
    assemble_stiffness_impl(mesh, dofmap, false)
}

fn assemble_load_impl<F>(mesh: &Mesh, dofmap: &DofMap, f: &F, par: bool) -> Vec<f64>
where
    F: Fn(Point) -> f64 + Send + Sync,
{
    let rule = triangle_rule(load_quad_degree(dofmap)).expect("supported degree");
    let n_local = dofmap.degree.n_local();
    let locals = map_indexed(mesh.n_triangles(), par, |t| {
        let geo = mesh.element_geometry(t).expect("valid element");
        let v0 = mesh.vertex(mesh.triangle(t)[0]);
        let mut local = [0.0; MAX_LOCAL];
        for (&(xi, eta), &w) in rule.points.iter().zip(&rule.weights) {
            let basis = eval_basis(dofmap.degree, xi, eta);
            let x = geo.map_point(v0, xi, eta);
            let fx = f(x);
            let scale = w * geo.det * fx;
            for k in 0..n_local {
                local[k] += scale * basis[k];
            }
        }
        local
    });
    let mut b = vec![0.0; dofmap.n_dofs];
    for (t, local) in locals.iter().enumerate() {
        for (k, &d) in dofmap.cell_dofs(t).iter().enumerate() {
            b[d] += local[k];
        }
    }
    b
}

/// Load vector of one subdomain: b_i = ∫ f φ_i.
pub fn assemble_load<F>(mesh: &Mesh, dofmap: &DofMap, f: F) -> Vec<f64>
where
    F: Fn(Point) -> f64 + Send + Sync,
{
    assemble_load_impl(mesh, dofmap, &f, true)
}

/// Sequential reference path of [`assemble_load`].
pub fn assemble_load_seq<F>(mesh: &Mesh, dofmap: &DofMap, f: F) -> Vec<f64>
where
    F: Fn(Point) -> f64 + Send + Sync,
{
    assemble_load_impl(mesh, dofmap, &f, false)
}

/// Applies Dirichlet constraints by symmetric elimination: constrained
/// rows and columns are removed, the diagonal is set to 1 and the rhs
/// carries the lifted values, so the solve reproduces `values` exactly.
///
/// `values[i]` must hold the prescribed value for every constrained
/// global DOF `i` (entries of unconstrained DOFs are ignored).
pub fn apply_dirichlet(
    system: CoupledSystem,
    constrained: &[bool],
    values: &[f64],
) -> Result<CoupledSystem> {
    let n = system.dim();
    if constrained.len() != n || values.len() != n {
        return Err(Error::InvalidArgument(
            "apply_dirichlet: mask/values length mismatch".into(),
        ));
    }
    let mut rhs = system.rhs;
    let mut matrix = SymSparseMatrix::new(n);
    for &(i, j, v) in system.matrix.entries() {
        match (constrained[i], constrained[j]) {
            (false, false) => matrix.add(i, j, v),
            // Column elimination: move the known value to the rhs.
            (false, true) => rhs[i] -= v * values[j],
            // Row of a constrained DOF: dropped (replaced by identity).
            (true, _) => {}
        }
    }
    for i in 0..n {
        if constrained[i] {
            matrix.add(i, i, 1.0);
            rhs[i] = values[i];
        }
    }
    Ok(CoupledSystem {
        matrix,
        rhs,
        offset: system.offset,
    })
}
