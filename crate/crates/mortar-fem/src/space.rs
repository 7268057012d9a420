//! Lagrange P1/P2 spaces: DOF numbering, reference basis evaluation and
//! nodal interpolation.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::{edge_key, BoundaryTag, EdgeKey, Mesh};

/// Polynomial degree of the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degree {
    P1,
    P2,
}

impl Degree {
    pub fn from_u8(p: u8) -> Result<Degree> {
        match p {
            1 => Ok(Degree::P1),
            2 => Ok(Degree::P2),
            _ => Err(Error::InvalidArgument(format!("unsupported degree {p}"))),
        }
    }

    pub fn value(self) -> usize {
        match self {
            Degree::P1 => 1,
            Degree::P2 => 2,
        }
    }

    /// Shape functions per triangle.
    pub fn n_local(self) -> usize {
        match self {
            Degree::P1 => 3,
            Degree::P2 => 6,
        }
    }
}

pub const MAX_LOCAL: usize = 6;

/// Degree-of-freedom numbering of a Lagrange space over one mesh.
/// Vertex DOFs come first; P2 appends one DOF per edge (midpoint node).
#[derive(Debug, Clone)]
pub struct DofMap {
    pub degree: Degree,
    pub n_dofs: usize,
    cell_dofs: Vec<usize>,
    pub dirichlet_dofs: BTreeSet<usize>,
    pub dof_coords: Vec<Point>,
}

impl DofMap {
    pub fn cell_dofs(&self, t: usize) -> &[usize] {
        let n = self.degree.n_local();
        &self.cell_dofs[t * n..(t + 1) * n]
    }

    pub fn n_cells(&self) -> usize {
        self.cell_dofs.len() / self.degree.n_local()
    }
}

/// Numbers the DOFs of a degree-p Lagrange space on `mesh` and collects
/// the Dirichlet-constrained ones.
pub fn build_dofmap(mesh: &Mesh, degree: Degree) -> DofMap {
    let nv = mesh.n_vertices();
    let mut dof_coords: Vec<Point> = mesh.vertices().to_vec();
    let mut edge_index: BTreeMap<EdgeKey, usize> = BTreeMap::new();
    if degree == Degree::P2 {
        for t in 0..mesh.n_triangles() {
            for e in 0..3 {
                let key = mesh.edge_key_of(t, e);
                edge_index.entry(key).or_insert(0);
            }
        }
        // Deterministic numbering: edges in sorted key order.
        for (i, (key, slot)) in edge_index.iter_mut().enumerate() {
            *slot = nv + i;
            dof_coords.push(mesh.vertex(key.0).midpoint(mesh.vertex(key.1)));
        }
    }
    let n_local = degree.n_local();
    let mut cell_dofs = Vec::with_capacity(mesh.n_triangles() * n_local);
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        cell_dofs.extend_from_slice(&tri);
        if degree == Degree::P2 {
            // Local node 3+i sits at the midpoint of the edge opposite
            // local vertex i.
            for e in 0..3 {
                let key = mesh.edge_key_of(t, e);
                cell_dofs.push(edge_index[&key]);
            }
        }
    }
    let mut dirichlet_dofs = BTreeSet::new();
    for (&(a, b), &tag) in mesh.boundary_tags() {
        if tag != BoundaryTag::Dirichlet {
            continue;
        }
        dirichlet_dofs.insert(a);
        dirichlet_dofs.insert(b);
        if degree == Degree::P2 {
            dirichlet_dofs.insert(edge_index[&edge_key(a, b)]);
        }
    }
    DofMap {
        degree,
        n_dofs: dof_coords.len(),
        cell_dofs,
        dirichlet_dofs,
        dof_coords,
    }
}

/// Values of all local shape functions at reference point (ξ, η).
/// Evaluation outside the reference triangle is permitted (used for
/// traces); the values always sum to 1.
pub fn eval_basis(degree: Degree, xi: f64, eta: f64) -> [f64; MAX_LOCAL] {
    let l0 = 1.0 - xi - eta;
    let l1 = xi;
    let l2 = eta;
    match degree {
        Degree::P1 => [l0, l1, l2, 0.0, 0.0, 0.0],
        Degree::P2 => [
            l0 * (2.0 * l0 - 1.0),
            l1 * (2.0 * l1 - 1.0),
            l2 * (2.0 * l2 - 1.0),
            4.0 * l1 * l2,
            4.0 * l2 * l0,
            4.0 * l0 * l1,
        ],
    }
}

/// Reference gradients (∂/∂ξ, ∂/∂η) of all local shape functions.
pub fn eval_basis_grad(degree: Degree, xi: f64, eta: f64) -> [(f64, f64); MAX_LOCAL] {
    match degree {
        Degree::P1 => [
            (-1.0, -1.0),
            (1.0, 0.0),
            (0.0, 1.0),
            (0.0, 0.0),
            (0.0, 0.0),
            (0.0, 0.0),
        ],
        Degree::P2 => {
            let l0 = 1.0 - xi - eta;
            let l1 = xi;
            let l2 = eta;
            [
                (1.0 - 4.0 * l0, 1.0 - 4.0 * l0),
                (4.0 * l1 - 1.0, 0.0),
                (0.0, 4.0 * l2 - 1.0),
                (4.0 * l2, 4.0 * l1),
                (-4.0 * l2, 4.0 * (l0 - l2)),
                (4.0 * (l0 - l1), -4.0 * l1),
            ]
        }
    }
}

/// Reference Hessians (∂²/∂ξ², ∂²/∂ξ∂η, ∂²/∂η²), constant for P2.
pub fn eval_basis_hessian(degree: Degree) -> [(f64, f64, f64); MAX_LOCAL] {
    match degree {
        Degree::P1 => [(0.0, 0.0, 0.0); MAX_LOCAL],
        Degree::P2 => [
            (4.0, 4.0, 4.0),
            (4.0, 0.0, 0.0),
            (0.0, 0.0, 4.0),
            (0.0, 4.0, 0.0),
            (0.0, -4.0, -8.0),
            (-8.0, -4.0, 0.0),
        ],
    }
}

/// Nodal interpolant: evaluates `f` at every DOF node.
pub fn interpolate<F: Fn(Point) -> f64>(dofmap: &DofMap, f: F) -> Vec<f64> {
    dofmap.dof_coords.iter().map(|&p| f(p)).collect()
}

/// Evaluates the FE function with the given coefficients at reference
/// point (ξ, η) of triangle `t`.
pub fn eval_function(dofmap: &DofMap, coeffs: &[f64], t: usize, xi: f64, eta: f64) -> f64 {
    let basis = eval_basis(dofmap.degree, xi, eta);
    dofmap
        .cell_dofs(t)
        .iter()
        .zip(basis.iter())
        .map(|(&d, &phi)| coeffs[d] * phi)
        .sum()
}
