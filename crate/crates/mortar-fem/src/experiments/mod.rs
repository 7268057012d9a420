//! Manufactured solutions, energy-norm error measurement, and the
//! uniform/adaptive study loops with rate extraction.

mod problems;
mod study;

pub use problems::{
    problem_linear_patch, problem_lshape, problem_quadratic_patch, problem_smooth, problem_spring,
    spring_interface_jump, GradFn, Problem, ScalarFn,
};
pub use study::{
    assemble_base, assemble_system, convergence_rate, convergence_rate_window,
    couple_and_constrain, discrete_jump_norm, energy_error, energy_error_seq, errors_vs_h,
    errors_vs_n, estimate_for, eval_solution, initial_meshes, run_adaptive_study,
    run_modelling_sweep, run_uniform_study, solve_problem, stabilization, AdaptiveIteration,
    Discretization, JumpWeight, RateReport, RunSettings, Solution, StudyRecord,
};
