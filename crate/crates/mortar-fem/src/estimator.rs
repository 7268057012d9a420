//! Residual a posteriori error estimation for both coupling methods,
//! plus Dörfler marking.
//!
//! Per-triangle indicators collect the element residual, half of each
//! interior edge jump, and half of each adjacent interface-segment term
//! (the other half goes to the element on the far side of Γ, so marking
//! refines both meshes).

use crate::coupling::StabParam;
use crate::error::Result;
use crate::geom::Point;
use crate::interface::{eval_normal_deriv_trace, eval_trace, MortarSegment};
use crate::mesh::{BoundaryTag, EdgeKey, Mesh};
use crate::par::map_indexed;
use crate::quadrature::{gauss_1d, triangle_rule};
use crate::space::{eval_basis_grad, eval_basis_hessian, DofMap};

/// Weight of the Nitsche jump indicator h_E^w ‖u1 − u2‖²: w = −1 matches
/// the 1/h_E weighting of the energy-norm jump, w = +1 the plain h_E
/// scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpScaling {
    #[default]
    HInv,
    H,
}

impl JumpScaling {
    fn weight(self, h_e: f64) -> f64 {
        match self {
            JumpScaling::HInv => 1.0 / h_e,
            JumpScaling::H => h_e,
        }
    }
}

/// Which interface terms enter the estimator.
pub enum InterfaceEstimator<'a> {
    /// Penalty interface terms with the given per-segment ε: the
    /// spring-condition flux residual plus the per-edge h_E modelling
    /// contribution. The modelling term is what keeps the interface
    /// marked for refinement however well the discrete solution matches
    /// the penalized problem.
    Penalty(&'a StabParam),
    /// Nitsche flux-imbalance and jump terms.
    Nitsche(JumpScaling),
}

/// Per-triangle squared indicators over both meshes.
#[derive(Debug, Clone)]
pub struct EstimatorBreakdown {
    pub eta_sq_1: Vec<f64>,
    pub eta_sq_2: Vec<f64>,
    /// Sum of the squared interface-term contributions alone.
    pub interface_sq: f64,
}

impl EstimatorBreakdown {
    pub fn total_sq(&self) -> f64 {
        self.eta_sq_1.iter().sum::<f64>() + self.eta_sq_2.iter().sum::<f64>()
    }

    /// Total estimator η = sqrt(Σ η_K²).
    pub fn total(&self) -> f64 {
        self.total_sq().sqrt()
    }

    /// Interface part in the same units as [`total`](Self::total).
    pub fn interface_part(&self) -> f64 {
        self.interface_sq.sqrt()
    }
}

/// Per-triangle h_K² ‖f + Δu_h‖²_{0,K}. Δu_h vanishes for P1 and is the
/// elementwise-constant trace of the Hessian for P2.
pub fn element_residual<F>(mesh: &Mesh, dofmap: &DofMap, coeffs: &[f64], f: &F) -> Vec<f64>
where
    F: Fn(Point) -> f64 + Send + Sync,
{
    element_residual_impl(mesh, dofmap, coeffs, f, true)
}

/// Sequential reference path of [`element_residual`].
pub fn element_residual_seq<F>(mesh: &Mesh, dofmap: &DofMap, coeffs: &[f64], f: &F) -> Vec<f64>
where
    F: Fn(Point) -> f64 + Send + Sync,
{
    element_residual_impl(mesh, dofmap, coeffs, f, false)
}

fn element_residual_impl<F>(
    mesh: &Mesh,
    dofmap: &DofMap,
    coeffs: &[f64],
    f: &F,
    par: bool,
) -> Vec<f64>
where
    F: Fn(Point) -> f64 + Send + Sync,
{
    let rule = triangle_rule(2 * dofmap.degree.value() + 2).expect("supported degree");
    let hessians = eval_basis_hessian(dofmap.degree);
    map_indexed(mesh.n_triangles(), par, |t| {
        let geo = mesh.element_geometry(t).expect("valid element");
        let v0 = mesh.vertex(mesh.triangle(t)[0]);
        // Physical Laplacian of u_h on this element (constant): the
        // reference Hessian H maps to J⁻ᵀ H J⁻¹.
        let it = geo.inv_jac_t;
        let mut laplacian = 0.0;
        for (k, &dof) in dofmap.cell_dofs(t).iter().enumerate() {
            let (hxx, hxy, hyy) = hessians[k];
            let c = coeffs[dof];
            let uxx = it[0][0] * (hxx * it[0][0] + hxy * it[0][1])
                + it[0][1] * (hxy * it[0][0] + hyy * it[0][1]);
            let uyy = it[1][0] * (hxx * it[1][0] + hxy * it[1][1])
                + it[1][1] * (hxy * it[1][0] + hyy * it[1][1]);
            laplacian += c * (uxx + uyy);
        }
        let mut norm_sq = 0.0;
        for (&(xi, eta), &w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.map_point(v0, xi, eta);
            let r = f(x) + laplacian;
            norm_sq += w * geo.det * r * r;
        }
        let h_k = geo.diameter();
        h_k * h_k * norm_sq
    })
}

/// Jump of the normal derivative across one interior edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeJump {
    pub key: EdgeKey,
    pub tris: (usize, usize),
    /// h_e ‖[∂u_h/∂n]‖²_{0,e}.
    pub value: f64,
}

/// Gradient-jump terms h_e‖[∂u_h/∂n]‖² over all interior edges of one
/// mesh. Boundary and interface facets are excluded (the interface is
/// handled by the dedicated interface estimators).
pub fn interior_edge_jumps(mesh: &Mesh, dofmap: &DofMap, coeffs: &[f64]) -> Vec<EdgeJump> {
    let adjacency = mesh.edge_adjacency();
    let interior: Vec<(EdgeKey, usize, usize)> = adjacency
        .iter()
        .filter(|(_, tris)| tris.len() == 2)
        .map(|(&key, tris)| (key, tris[0], tris[1]))
        .collect();
    let rule = gauss_1d(2 * dofmap.degree.value()).expect("supported degree");

    let values = map_indexed(interior.len(), true, |idx| {
        let (key, t1, t2) = interior[idx];
        let (a, b) = (mesh.vertex(key.0), mesh.vertex(key.1));
        let tangent = b - a;
        let len = tangent.norm();
        let normal = Point::new(tangent.y, -tangent.x).normalized();
        let mut int_sq = 0.0;
        for (&(q, _), &w) in rule.points.iter().zip(&rule.weights) {
            let x = a + tangent * q;
            let g1 = fe_gradient_at(mesh, dofmap, coeffs, t1, x);
            let g2 = fe_gradient_at(mesh, dofmap, coeffs, t2, x);
            let jump = (g1 - g2).dot(normal);
            int_sq += w * len * jump * jump;
        }
        len * int_sq
    });
    interior
        .into_iter()
        .zip(values)
        .map(|((key, t1, t2), value)| EdgeJump {
            key,
            tris: (t1, t2),
            value,
        })
        .collect()
}

/// Gradient of the FE function at physical point `x` inside triangle `t`.
fn fe_gradient_at(mesh: &Mesh, dofmap: &DofMap, coeffs: &[f64], t: usize, x: Point) -> Point {
    let geo = mesh.element_geometry(t).expect("valid element");
    let v0 = mesh.vertex(mesh.triangle(t)[0]);
    let d = x - v0;
    let xi = (geo.jac[1][1] * d.x - geo.jac[0][1] * d.y) / geo.det;
    let eta = (-geo.jac[1][0] * d.x + geo.jac[0][0] * d.y) / geo.det;
    let grads = eval_basis_grad(dofmap.degree, xi, eta);
    let mut g = Point::default();
    for (k, &dof) in dofmap.cell_dofs(t).iter().enumerate() {
        g = g + geo.push_gradient(grads[k]) * coeffs[dof];
    }
    g
}

/// Penalty interface term per segment:
/// η_E² = h_E ‖∂u1/∂n1 + ε⁻¹(u1−u2)‖² + h_E ‖∂u2/∂n2 + ε⁻¹(u2−u1)‖².
pub fn interface_estimator_penalty(
    segments: &[MortarSegment],
    meshes: (&Mesh, &Mesh),
    dofmaps: (&DofMap, &DofMap),
    coeffs: (&[f64], &[f64]),
    stab: &StabParam,
) -> Result<Vec<f64>> {
    let (mesh1, mesh2) = meshes;
    let (dm1, dm2) = dofmaps;
    let (u1, u2) = coeffs;
    let rule = gauss_1d(2 * dm1.degree.value().max(dm2.degree.value()) + 1)?;
    let mut out = Vec::with_capacity(segments.len());
    for (si, seg) in segments.iter().enumerate() {
        let inv_eps = 1.0 / stab.value(si);
        let len = seg.length();
        let n1 = seg.normal1;
        let mut side1_sq = 0.0;
        let mut side2_sq = 0.0;
        for (&(q, _), &w) in rule.points.iter().zip(&rule.weights) {
            let s = seg.s0 + q * len;
            let v1 = eval_trace(dm1, u1, &seg.side1, s)?;
            let v2 = eval_trace(dm2, u2, &seg.side2, s)?;
            let dn1 = eval_normal_deriv_trace(mesh1, dm1, u1, &seg.side1, s, n1)?;
            let dn2 = eval_normal_deriv_trace(mesh2, dm2, u2, &seg.side2, s, -n1)?;
            let r1 = dn1 + inv_eps * (v1 - v2);
            let r2 = dn2 + inv_eps * (v2 - v1);
            side1_sq += w * len * r1 * r1;
            side2_sq += w * len * r2 * r2;
        }
        out.push(seg.h_e * (side1_sq + side2_sq));
    }
    Ok(out)
}

/// Nitsche interface terms per segment: the flux imbalance
/// h_E‖∂u1/∂n1 + ∂u2/∂n2‖² and the jump term h_E^w‖u1 − u2‖².
pub fn interface_estimator_nitsche(
    segments: &[MortarSegment],
    meshes: (&Mesh, &Mesh),
    dofmaps: (&DofMap, &DofMap),
    coeffs: (&[f64], &[f64]),
    scaling: JumpScaling,
) -> Result<Vec<(f64, f64)>> {
    let (mesh1, mesh2) = meshes;
    let (dm1, dm2) = dofmaps;
    let (u1, u2) = coeffs;
    let rule = gauss_1d(2 * dm1.degree.value().max(dm2.degree.value()) + 1)?;
    let mut out = Vec::with_capacity(segments.len());
    for seg in segments {
        let len = seg.length();
        let n1 = seg.normal1;
        let mut flux_sq = 0.0;
        let mut jump_sq = 0.0;
        for (&(q, _), &w) in rule.points.iter().zip(&rule.weights) {
            let s = seg.s0 + q * len;
            let v1 = eval_trace(dm1, u1, &seg.side1, s)?;
            let v2 = eval_trace(dm2, u2, &seg.side2, s)?;
            let dn1 = eval_normal_deriv_trace(mesh1, dm1, u1, &seg.side1, s, n1)?;
            let dn2 = eval_normal_deriv_trace(mesh2, dm2, u2, &seg.side2, s, -n1)?;
            let flux = dn1 + dn2;
            let jump = v1 - v2;
            flux_sq += w * len * flux * flux;
            jump_sq += w * len * jump * jump;
        }
        out.push((seg.h_e * flux_sq, scaling.weight(seg.h_e) * jump_sq));
    }
    Ok(out)
}

/// Assembles the full per-triangle breakdown: element residuals, half of
/// each interior edge jump to both neighbours, and half of each interface
/// segment term to the adjacent element of each mesh.
pub fn estimate<F1, F2>(
    meshes: (&Mesh, &Mesh),
    dofmaps: (&DofMap, &DofMap),
    coeffs: (&[f64], &[f64]),
    rhs: (&F1, &F2),
    segments: &[MortarSegment],
    interface: InterfaceEstimator<'_>,
) -> Result<EstimatorBreakdown>
where
    F1: Fn(Point) -> f64 + Send + Sync,
    F2: Fn(Point) -> f64 + Send + Sync,
{
    let (mesh1, mesh2) = meshes;
    let (dm1, dm2) = dofmaps;
    let (u1, u2) = coeffs;
    let mut eta_sq_1 = element_residual(mesh1, dm1, u1, rhs.0);
    let mut eta_sq_2 = element_residual(mesh2, dm2, u2, rhs.1);
    for jump in interior_edge_jumps(mesh1, dm1, u1) {
        eta_sq_1[jump.tris.0] += 0.5 * jump.value;
        eta_sq_1[jump.tris.1] += 0.5 * jump.value;
    }
    for jump in interior_edge_jumps(mesh2, dm2, u2) {
        eta_sq_2[jump.tris.0] += 0.5 * jump.value;
        eta_sq_2[jump.tris.1] += 0.5 * jump.value;
    }
    let per_segment: Vec<f64> = match interface {
        InterfaceEstimator::Penalty(stab) => {
            // Flux residual plus the modelling contribution: one h_E per
            // interface edge, distributed over its segments by length
            // (a segment of the full facet carries h_E·|seg|/h_E = |seg|).
            interface_estimator_penalty(segments, meshes, dofmaps, coeffs, stab)?
                .into_iter()
                .zip(segments)
                .map(|(residual, seg)| seg.length() + residual)
                .collect()
        }
        InterfaceEstimator::Nitsche(scaling) => {
            interface_estimator_nitsche(segments, meshes, dofmaps, coeffs, scaling)?
                .into_iter()
                .map(|(flux, jump)| flux + jump)
                .collect()
        }
    };
    let mut interface_sq = 0.0;
    for (seg, eta) in segments.iter().zip(&per_segment) {
        interface_sq += eta;
        eta_sq_1[seg.side1.tri] += 0.5 * eta;
        eta_sq_2[seg.side2.tri] += 0.5 * eta;
    }
    Ok(EstimatorBreakdown {
        eta_sq_1,
        eta_sq_2,
        interface_sq,
    })
}

/// Dörfler marking: the minimal-cardinality greedy set (descending η²)
/// with Σ_marked η² ≥ θ·Σ η². Ties are broken by index.
pub fn dorfler_mark(eta_sq: &[f64], theta: f64) -> Vec<usize> {
    assert!(theta > 0.0 && theta <= 1.0, "theta must be in (0, 1]");
    let total: f64 = eta_sq.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..eta_sq.len()).collect();
    order.sort_by(|&a, &b| eta_sq[b].partial_cmp(&eta_sq[a]).unwrap().then(a.cmp(&b)));
    let target = theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for idx in order {
        if acc >= target {
            break;
        }
        acc += eta_sq[idx];
        marked.push(idx);
    }
    marked.sort_unstable();
    marked
}

/// True for edges tagged as part of the interface.
pub fn is_interface_edge(mesh: &Mesh, key: EdgeKey) -> bool {
    mesh.tag_of(key) == Some(BoundaryTag::Interface)
}
