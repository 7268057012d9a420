//! Study drivers: discretize, assemble, solve, measure, refine.

use crate::assembly::{apply_dirichlet, assemble_load, assemble_stiffness, CoupledSystem};
use crate::coupling::{
    assemble_nitsche, assemble_penalty, nitsche_epsilon, penalty_epsilon, Method, MethodConfig,
    StabParam,
};
use crate::error::{Error, Result};
use crate::estimator::{
    dorfler_mark, estimate, EstimatorBreakdown, InterfaceEstimator, JumpScaling,
};
use crate::geom::Point;
use crate::interface::{build_mortar_segments, eval_trace, MortarSegment};
use crate::mesh::gen_lshape_meshes;
use crate::mesh::{gen_rect_mesh, refine, uniform_refine, Geometry, GeometryKind, Mesh};
use crate::par::map_indexed;
use crate::quadrature::{gauss_1d, triangle_rule};
use crate::solver::{condition_estimate, solve_spd};
use crate::space::{build_dofmap, eval_basis, eval_basis_grad, Degree, DofMap};

use super::problems::Problem;

/// How one study run couples the subdomains.
#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub method: MethodConfig,
    pub degree: Degree,
    /// Overrides the ε rule with a mesh-independent constant (spring
    /// problem, modelling-error sweep).
    pub fixed_epsilon: Option<f64>,
}

impl RunSettings {
    pub fn new(method: MethodConfig, degree: Degree) -> Self {
        RunSettings {
            method,
            degree,
            fixed_epsilon: None,
        }
    }
}

/// Meshes, spaces and mortar segments of one refinement level.
pub struct Discretization {
    pub mesh1: Mesh,
    pub mesh2: Mesh,
    pub dm1: DofMap,
    pub dm2: DofMap,
    pub segments: Vec<MortarSegment>,
}

impl Discretization {
    pub fn build(geometry: &Geometry, mesh1: Mesh, mesh2: Mesh, degree: Degree) -> Result<Self> {
        let dm1 = build_dofmap(&mesh1, degree);
        let dm2 = build_dofmap(&mesh2, degree);
        let segments = build_mortar_segments(&mesh1, &mesh2, &geometry.interface)?;
        Ok(Discretization {
            mesh1,
            mesh2,
            dm1,
            dm2,
            segments,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.dm1.n_dofs + self.dm2.n_dofs
    }

    pub fn h_max(&self) -> f64 {
        self.mesh1.h_max().max(self.mesh2.h_max())
    }
}

/// Initial meshes of a problem's geometry. The split rectangle starts
/// from deliberately non-matching 3×3 / 4×4 grids; the L-shape from the
/// pair built by [`gen_lshape_meshes`].
pub fn initial_meshes(geometry: &Geometry) -> Result<(Mesh, Mesh)> {
    match geometry.kind {
        GeometryKind::SplitRect => {
            let gamma = geometry.interface;
            let m1 = gen_rect_mesh(0.0, 1.0, 0.0, 1.0, 3, 3, 0, Some(&gamma))?;
            let m2 = gen_rect_mesh(1.0, 2.0, 0.0, 1.0, 4, 4, 0, Some(&gamma))?;
            Ok((m1, m2))
        }
        GeometryKind::LShape => gen_lshape_meshes(),
    }
}

/// Stabilization parameter for the run: the fixed override if present,
/// otherwise the method's own rule.
pub fn stabilization(disc: &Discretization, settings: &RunSettings) -> Result<StabParam> {
    if let Some(eps) = settings.fixed_epsilon {
        return StabParam::constant(&disc.segments, eps);
    }
    match settings.method.method {
        Method::Penalty => penalty_epsilon(&disc.segments, &settings.method),
        _ => nitsche_epsilon(
            &disc.segments,
            &disc.mesh1,
            settings.degree.value(),
            &settings.method,
        ),
    }
}

/// Uncoupled, unconstrained part of the system: subdomain stiffness
/// blocks and load vectors. Independent of the coupling method and ε.
pub fn assemble_base(problem: &Problem, disc: &Discretization) -> CoupledSystem {
    let n = disc.n_dofs();
    let offset = disc.dm1.n_dofs;
    let mut sys = CoupledSystem::new(n, offset);
    for &(i, j, v) in assemble_stiffness(&disc.mesh1, &disc.dm1).entries() {
        sys.matrix.add(i, j, v);
    }
    for &(i, j, v) in assemble_stiffness(&disc.mesh2, &disc.dm2).entries() {
        sys.matrix.add(offset + i, offset + j, v);
    }
    let f1 = problem.rhs[0].clone();
    let f2 = problem.rhs[1].clone();
    for (i, v) in assemble_load(&disc.mesh1, &disc.dm1, move |p| f1(p))
        .into_iter()
        .enumerate()
    {
        sys.rhs[i] += v;
    }
    for (i, v) in assemble_load(&disc.mesh2, &disc.dm2, move |p| f2(p))
        .into_iter()
        .enumerate()
    {
        sys.rhs[offset + i] += v;
    }
    sys
}

/// Adds the interface coupling and Dirichlet constraints to a base
/// system assembled by [`assemble_base`].
pub fn couple_and_constrain(
    problem: &Problem,
    disc: &Discretization,
    settings: &RunSettings,
    mut sys: CoupledSystem,
) -> Result<(CoupledSystem, StabParam)> {
    let n = disc.n_dofs();
    let offset = disc.dm1.n_dofs;
    let stab = stabilization(disc, settings)?;
    match settings.method.nitsche_variant() {
        None => assemble_penalty(&mut sys, &disc.segments, (&disc.dm1, &disc.dm2), &stab)?,
        Some(variant) => assemble_nitsche(
            &mut sys,
            &disc.segments,
            (&disc.mesh1, &disc.mesh2),
            (&disc.dm1, &disc.dm2),
            &stab,
            variant,
        )?,
    }

    let mut constrained = vec![false; n];
    let mut values = vec![0.0; n];
    for &d in &disc.dm1.dirichlet_dofs {
        constrained[d] = true;
        values[d] = problem.dirichlet[0](disc.dm1.dof_coords[d]);
    }
    for &d in &disc.dm2.dirichlet_dofs {
        constrained[offset + d] = true;
        values[offset + d] = problem.dirichlet[1](disc.dm2.dof_coords[d]);
    }
    let sys = apply_dirichlet(sys, &constrained, &values)?;
    Ok((sys, stab))
}

/// Assembles the constrained coupled system for the problem.
pub fn assemble_system(
    problem: &Problem,
    disc: &Discretization,
    settings: &RunSettings,
) -> Result<(CoupledSystem, StabParam)> {
    let base = assemble_base(problem, disc);
    couple_and_constrain(problem, disc, settings, base)
}

/// Discrete solution split by subdomain, with the stabilization used.
pub struct Solution {
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub stab: StabParam,
    pub system: CoupledSystem,
}

/// Assembles and solves one level of the problem.
pub fn solve_problem(
    problem: &Problem,
    disc: &Discretization,
    settings: &RunSettings,
) -> Result<Solution> {
    let (sys, stab) = assemble_system(problem, disc, settings)?;
    let x = solve_spd(&sys)?;
    let (u1, u2) = x.split_at(disc.dm1.n_dofs);
    Ok(Solution {
        u1: u1.to_vec(),
        u2: u2.to_vec(),
        stab,
        system: sys,
    })
}

/// Weight of the interface-jump part of the energy norm.
pub enum JumpWeight<'a> {
    /// 1/h_E per segment: the method-independent reporting norm.
    MeshH,
    /// 1/ε per segment: the penalized problem's own norm.
    Epsilon(&'a StabParam),
}

/// Energy norm of the error u_exact − u_h:
/// sqrt(Σ_i ‖∇e_i‖² + Σ_segments w·‖e1 − e2‖²).
pub fn energy_error(
    problem: &Problem,
    disc: &Discretization,
    u: (&[f64], &[f64]),
    weight: JumpWeight<'_>,
) -> f64 {
    energy_error_impl(problem, disc, u, weight, true)
}

/// Sequential reference path of [`energy_error`].
pub fn energy_error_seq(
    problem: &Problem,
    disc: &Discretization,
    u: (&[f64], &[f64]),
    weight: JumpWeight<'_>,
) -> f64 {
    energy_error_impl(problem, disc, u, weight, false)
}

fn energy_error_impl(
    problem: &Problem,
    disc: &Discretization,
    u: (&[f64], &[f64]),
    weight: JumpWeight<'_>,
    par: bool,
) -> f64 {
    let grad_part = |mesh: &Mesh, dm: &DofMap, coeffs: &[f64], side: usize| -> f64 {
        let rule = triangle_rule(2 * dm.degree.value() + 2).expect("supported degree");
        let exact_grad = &problem.exact_grad[side];
        let per_element = map_indexed(mesh.n_triangles(), par, |t| {
            let geo = mesh.element_geometry(t).expect("valid element");
            let v0 = mesh.vertex(mesh.triangle(t)[0]);
            let dofs = dm.cell_dofs(t);
            let mut acc = 0.0;
            for (&(xi, eta), &w) in rule.points.iter().zip(&rule.weights) {
                let grads = eval_basis_grad(dm.degree, xi, eta);
                let mut gh = Point::default();
                for (k, &dof) in dofs.iter().enumerate() {
                    gh = gh + geo.push_gradient(grads[k]) * coeffs[dof];
                }
                let x = geo.map_point(v0, xi, eta);
                let diff = exact_grad(x) - gh;
                acc += w * geo.det * diff.dot(diff);
            }
            acc
        });
        per_element.iter().sum()
    };

    let mut total =
        grad_part(&disc.mesh1, &disc.dm1, u.0, 0) + grad_part(&disc.mesh2, &disc.dm2, u.1, 1);

    let degree = disc.dm1.degree.value().max(disc.dm2.degree.value());
    let rule = gauss_1d(2 * degree + 2).expect("supported degree");
    let gamma = problem.geometry.interface;
    for (si, seg) in disc.segments.iter().enumerate() {
        let w_jump = match &weight {
            JumpWeight::MeshH => 1.0 / seg.h_e,
            JumpWeight::Epsilon(stab) => 1.0 / stab.value(si),
        };
        let len = seg.length();
        let mut jump_sq = 0.0;
        for (&(q, _), &w) in rule.points.iter().zip(&rule.weights) {
            let s = seg.s0 + q * len;
            let x = gamma.point_at(s);
            let e1 =
                problem.exact[0](x) - eval_trace(&disc.dm1, u.0, &seg.side1, s).expect("trace");
            let e2 =
                problem.exact[1](x) - eval_trace(&disc.dm2, u.1, &seg.side2, s).expect("trace");
            jump_sq += w * len * (e1 - e2) * (e1 - e2);
        }
        total += w_jump * jump_sq;
    }
    total.sqrt()
}

/// Jump seminorm of a discrete pair: sqrt(Σ_segments w·‖u1 − u2‖²).
pub fn discrete_jump_norm(
    disc: &Discretization,
    u: (&[f64], &[f64]),
    weight: JumpWeight<'_>,
) -> f64 {
    let degree = disc.dm1.degree.value().max(disc.dm2.degree.value());
    let rule = gauss_1d(2 * degree + 2).expect("supported degree");
    let mut total = 0.0;
    for (si, seg) in disc.segments.iter().enumerate() {
        let w_jump = match &weight {
            JumpWeight::MeshH => 1.0 / seg.h_e,
            JumpWeight::Epsilon(stab) => 1.0 / stab.value(si),
        };
        let len = seg.length();
        for (&(q, _), &w) in rule.points.iter().zip(&rule.weights) {
            let s = seg.s0 + q * len;
            let v1 = eval_trace(&disc.dm1, u.0, &seg.side1, s).expect("trace");
            let v2 = eval_trace(&disc.dm2, u.1, &seg.side2, s).expect("trace");
            total += w_jump * w * len * (v1 - v2) * (v1 - v2);
        }
    }
    total.sqrt()
}

/// Pointwise evaluation of the discrete solution at reference point
/// (ξ, η) of triangle `t` (test helper).
pub fn eval_solution(dm: &DofMap, coeffs: &[f64], t: usize, xi: f64, eta: f64) -> f64 {
    let basis = eval_basis(dm.degree, xi, eta);
    dm.cell_dofs(t)
        .iter()
        .zip(basis.iter())
        .map(|(&d, &phi)| coeffs[d] * phi)
        .sum()
}

/// Estimator breakdown matching the run's coupling method: the penalty
/// flux residual for penalty runs, flux-imbalance plus jump terms for
/// Nitsche runs.
pub fn estimate_for(
    problem: &Problem,
    disc: &Discretization,
    sol: &Solution,
    settings: &RunSettings,
) -> Result<EstimatorBreakdown> {
    let f1 = problem.rhs[0].clone();
    let f2 = problem.rhs[1].clone();
    let f1 = move |p: Point| f1(p);
    let f2 = move |p: Point| f2(p);
    let interface = match settings.method.method {
        Method::Penalty => InterfaceEstimator::Penalty(&sol.stab),
        _ => InterfaceEstimator::Nitsche(JumpScaling::HInv),
    };
    estimate(
        (&disc.mesh1, &disc.mesh2),
        (&disc.dm1, &disc.dm2),
        (&sol.u1, &sol.u2),
        (&f1, &f2),
        &disc.segments,
        interface,
    )
}

/// One refinement level's results.
#[derive(Debug, Clone)]
pub struct StudyRecord {
    pub level: usize,
    pub n_dofs: usize,
    pub h_max: f64,
    pub energy_error: f64,
    pub estimator_total: f64,
    pub interface_estimator: f64,
    pub condition: Option<f64>,
}

fn make_record(
    level: usize,
    problem: &Problem,
    disc: &Discretization,
    sol: &Solution,
    settings: &RunSettings,
    with_condition: bool,
) -> Result<StudyRecord> {
    // Fixed-ε runs (spring, modelling sweep) are measured in the
    // penalized problem's own norm; the convergence studies use the
    // method-independent 1/h_E norm.
    let weight = if settings.fixed_epsilon.is_some() {
        JumpWeight::Epsilon(&sol.stab)
    } else {
        JumpWeight::MeshH
    };
    let err = energy_error(problem, disc, (&sol.u1, &sol.u2), weight);
    let breakdown = estimate_for(problem, disc, sol, settings)?;
    let condition = if with_condition {
        Some(condition_estimate(&sol.system)?)
    } else {
        None
    };
    Ok(StudyRecord {
        level,
        n_dofs: disc.n_dofs(),
        h_max: disc.h_max(),
        energy_error: err,
        estimator_total: breakdown.total(),
        interface_estimator: breakdown.interface_part(),
        condition,
    })
}

/// Uniform refinement study: solve, record, refine both meshes, repeat.
pub fn run_uniform_study(
    problem: &Problem,
    settings: &RunSettings,
    levels: usize,
    with_condition: bool,
) -> Result<Vec<StudyRecord>> {
    if levels < 2 {
        return Err(Error::InvalidArgument(
            "uniform study needs at least 2 levels".into(),
        ));
    }
    let (mut m1, mut m2) = initial_meshes(&problem.geometry)?;
    let mut records = Vec::with_capacity(levels);
    for level in 0..levels {
        let disc =
            Discretization::build(&problem.geometry, m1.clone(), m2.clone(), settings.degree)?;
        let sol = solve_problem(problem, &disc, settings)?;
        records.push(make_record(
            level,
            problem,
            &disc,
            &sol,
            settings,
            with_condition,
        )?);
        if level + 1 < levels {
            m1 = uniform_refine(&m1);
            m2 = uniform_refine(&m2);
        }
    }
    Ok(records)
}

/// One adaptive iteration: the study record plus the centroids of the
/// elements marked for refinement (both meshes), for locality checks.
#[derive(Debug, Clone)]
pub struct AdaptiveIteration {
    pub record: StudyRecord,
    pub marked_centroids: Vec<Point>,
}

/// Adaptive loop: solve → estimate → Dörfler-mark the pooled indicators
/// of both meshes → refine each mesh's marked elements → rebuild the
/// mortar segments. Stops after the first record exceeding `max_dofs`.
pub fn run_adaptive_study(
    problem: &Problem,
    settings: &RunSettings,
    theta: f64,
    max_dofs: usize,
) -> Result<Vec<AdaptiveIteration>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidArgument("theta must be in (0, 1]".into()));
    }
    let (mut m1, mut m2) = initial_meshes(&problem.geometry)?;
    let mut out = Vec::new();
    for level in 0.. {
        let disc =
            Discretization::build(&problem.geometry, m1.clone(), m2.clone(), settings.degree)?;
        let sol = solve_problem(problem, &disc, settings)?;
        let record = make_record(level, problem, &disc, &sol, settings, false)?;
        let breakdown = estimate_for(problem, &disc, &sol, settings)?;

        let n1 = disc.mesh1.n_triangles();
        let mut pooled = breakdown.eta_sq_1.clone();
        pooled.extend_from_slice(&breakdown.eta_sq_2);
        let marked = dorfler_mark(&pooled, theta);
        let mut marked1 = Vec::new();
        let mut marked2 = Vec::new();
        let mut centroids = Vec::with_capacity(marked.len());
        for &idx in &marked {
            if idx < n1 {
                marked1.push(idx);
                centroids.push(disc.mesh1.centroid(idx));
            } else {
                marked2.push(idx - n1);
                centroids.push(disc.mesh2.centroid(idx - n1));
            }
        }
        let n_dofs = record.n_dofs;
        out.push(AdaptiveIteration {
            record,
            marked_centroids: centroids,
        });
        if n_dofs > max_dofs || marked.is_empty() {
            break;
        }
        m1 = refine(&m1, &marked1);
        m2 = refine(&m2, &marked2);
    }
    Ok(out)
}

/// Penalty modelling-error sweep on a fixed mesh: solves the penalty
/// problem for ε = factor·h0 (h0 = the largest interface facet of the
/// mesh) and measures the ε-weighted energy error against the exact
/// unpenalized solution. Returns (ε, error) pairs.
pub fn run_modelling_sweep(
    problem: &Problem,
    degree: Degree,
    refinements: usize,
    factors: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let (mut m1, mut m2) = initial_meshes(&problem.geometry)?;
    for _ in 0..refinements {
        m1 = uniform_refine(&m1);
        m2 = uniform_refine(&m2);
    }
    let disc = Discretization::build(&problem.geometry, m1, m2, degree)?;
    let h0 = disc.segments.iter().map(|s| s.h_e).fold(0.0f64, f64::max);
    let base = assemble_base(problem, &disc);
    let mut out = Vec::with_capacity(factors.len());
    for &factor in factors {
        let eps = factor * h0;
        let mut settings = RunSettings::new(MethodConfig::new(Method::Penalty), degree);
        settings.fixed_epsilon = Some(eps);
        let (sys, stab) = couple_and_constrain(problem, &disc, &settings, base.clone())?;
        let x = solve_spd(&sys)?;
        let (u1, u2) = x.split_at(disc.dm1.n_dofs);
        let err = energy_error(problem, &disc, (u1, u2), JumpWeight::Epsilon(&stab));
        out.push((eps, err));
    }
    Ok(out)
}

/// Per-step slopes Δlog(err)/Δlog(x) and the least-squares slope of
/// log(err) vs log(x) over the last `window` points.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub per_step: Vec<f64>,
    pub ls_slope: f64,
}

/// Convergence slopes of `errs` against `xs` (h or N). Positive ≈ p for
/// errors decaying like h^p; negative for errors decaying in N.
pub fn convergence_rate(xs: &[f64], errs: &[f64]) -> Result<RateReport> {
    convergence_rate_window(xs, errs, 3)
}

pub fn convergence_rate_window(xs: &[f64], errs: &[f64], window: usize) -> Result<RateReport> {
    if xs.len() != errs.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "rate extraction needs at least 2 records".into(),
        ));
    }
    let per_step: Vec<f64> = xs
        .windows(2)
        .zip(errs.windows(2))
        .map(|(x, e)| {
            let de = (e[1] / e[0]).ln();
            let dx = (x[1] / x[0]).ln();
            if de == 0.0 {
                0.0
            } else {
                de / dx
            }
        })
        .collect();
    let k = window.min(xs.len());
    let lx: Vec<f64> = xs[xs.len() - k..].iter().map(|v| v.ln()).collect();
    let le: Vec<f64> = errs[errs.len() - k..].iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k as f64;
    let me = le.iter().sum::<f64>() / k as f64;
    let num: f64 = lx.iter().zip(&le).map(|(x, e)| (x - mx) * (e - me)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(RateReport {
        per_step,
        ls_slope: num / den,
    })
}

/// Convenience accessors for rate extraction from study records.
pub fn errors_vs_h(records: &[StudyRecord]) -> (Vec<f64>, Vec<f64>) {
    (
        records.iter().map(|r| r.h_max).collect(),
        records.iter().map(|r| r.energy_error).collect(),
    )
}

pub fn errors_vs_n(records: &[StudyRecord]) -> (Vec<f64>, Vec<f64>) {
    (
        records.iter().map(|r| r.n_dofs as f64).collect(),
        records.iter().map(|r| r.energy_error).collect(),
    )
}
