use mortar_fem::coupling::{Method, MethodConfig};
use mortar_fem::estimator::dorfler_mark;
use mortar_fem::experiments::*;
use mortar_fem::space::Degree;
use std::time::Instant;

fn main() {
    let problem = problem_smooth();
    let settings = RunSettings::new(MethodConfig::new(Method::Penalty), Degree::P1);
    let (mut m1, mut m2) = initial_meshes(&problem.geometry).unwrap();
    for it in 0.. {
        let t0 = Instant::now();
        let disc = Discretization::build(&problem.geometry, m1.clone(), m2.clone(), Degree::P1).unwrap();
        let t_build = t0.elapsed();
        let t0 = Instant::now();
        let sol = solve_problem(&problem, &disc, &settings).unwrap();
        let t_solve = t0.elapsed();
        let t0 = Instant::now();
        let err = energy_error(&problem, &disc, (&sol.u1, &sol.u2), JumpWeight::MeshH);
        let t_err = t0.elapsed();
        let t0 = Instant::now();
        let b = estimate_for(&problem, &disc, &sol, &settings).unwrap();
        let t_est = t0.elapsed();
        let t0 = Instant::now();
        let n1 = disc.mesh1.n_triangles();
        let mut pooled = b.eta_sq_1.clone();
        pooled.extend_from_slice(&b.eta_sq_2);
        let marked = dorfler_mark(&pooled, 0.5);
        let (mut s1, mut s2) = (Vec::new(), Vec::new());
        for &i in &marked { if i < n1 { s1.push(i) } else { s2.push(i - n1) } }
        m1 = mortar_fem::mesh::refine(&m1, &s1);
        m2 = mortar_fem::mesh::refine(&m2, &s2);
        let t_mark = t0.elapsed();
        let n = disc.n_dofs();
        if it % 5 == 0 || n > 12000 {
            println!("it {it}: n {n} segs {} | build {:?} solve {:?} err {:?} est {:?} mark+refine {:?}",
                disc.segments.len(), t_build, t_solve, t_err, t_est, t_mark);
        }
        if n > 14000 { break; }
    }
}
