//! Manufactured problems: the smooth two-rectangle case, the singular
//! L-shape case, patch-test solutions, and the spring problem whose
//! exact solution satisfies the penalized interface condition.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::geom::Point;
use crate::mesh::{lshape_geometry, split_rect_geometry, Geometry};

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

/// A two-subdomain model problem: −Δu = f in each Ωi, u = g on the outer
/// boundary. Exact data is stored per subdomain so that discontinuous
/// reference solutions (the spring problem) are representable.
#[derive(Clone)]
pub struct Problem {
    pub name: &'static str,
    pub geometry: Geometry,
    pub exact: [ScalarFn; 2],
    pub exact_grad: [GradFn; 2],
    pub rhs: [ScalarFn; 2],
    pub dirichlet: [ScalarFn; 2],
}

fn shared(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> [ScalarFn; 2] {
    let f: ScalarFn = Arc::new(f);
    [f.clone(), f]
}

fn shared_grad(f: impl Fn(Point) -> Point + Send + Sync + 'static) -> [GradFn; 2] {
    let f: GradFn = Arc::new(f);
    [f.clone(), f]
}

/// Smooth test problem u = x·y·sin(πx/2)·sin(πy) on Ω1 = (0,1)² and
/// Ω2 = (1,2)×(0,1), zero on the outer boundary, interface at x = 1
/// with a nonzero normal flux there.
pub fn problem_smooth() -> Problem {
    let u = |p: Point| p.x * p.y * (PI * p.x / 2.0).sin() * (PI * p.y).sin();
    let grad = |p: Point| {
        let (sx, cx) = (PI * p.x / 2.0).sin_cos();
        let (sy, cy) = (PI * p.y).sin_cos();
        Point::new(
            p.y * sx * sy + p.x * p.y * (PI / 2.0) * cx * sy,
            p.x * sx * sy + p.x * p.y * PI * sx * cy,
        )
    };
    let f = |p: Point| {
        let (sx, cx) = (PI * p.x / 2.0).sin_cos();
        let (sy, cy) = (PI * p.y).sin_cos();
        1.25 * PI * PI * p.x * p.y * sx * sy - PI * p.y * cx * sy - 2.0 * PI * p.x * sx * cy
    };
    Problem {
        name: "smooth",
        geometry: split_rect_geometry(),
        exact: shared(u),
        exact_grad: shared_grad(grad),
        rhs: shared(f),
        dirichlet: shared(u),
    }
}

/// Corner angle of the L-shape measured counter-clockwise from the
/// positive x-axis, mapped into [0, 3π/2].
fn lshape_theta(p: Point) -> f64 {
    let a = p.y.atan2(p.x);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Singular L-shape problem: u = r^{2/3} sin(2θ/3) with the reentrant
/// corner at the origin. Harmonic, so f = 0; the outer boundary carries
/// the trace of u.
pub fn problem_lshape() -> Problem {
    let u = |p: Point| {
        let r = p.norm();
        if r < 1e-14 {
            return 0.0;
        }
        r.powf(2.0 / 3.0) * (2.0 * lshape_theta(p) / 3.0).sin()
    };
    let grad = |p: Point| {
        let r = p.norm();
        if r < 1e-14 {
            return Point::new(0.0, 0.0);
        }
        let theta = lshape_theta(p);
        let scale = (2.0 / 3.0) * r.powf(-1.0 / 3.0);
        Point::new(-scale * (theta / 3.0).sin(), scale * (theta / 3.0).cos())
    };
    Problem {
        name: "lshape",
        geometry: lshape_geometry(),
        exact: shared(u),
        exact_grad: shared_grad(grad),
        rhs: shared(|_| 0.0),
        dirichlet: shared(u),
    }
}

/// Spring problem: a one-dimensional-in-x pair on the split rectangle
/// whose exact solution satisfies the spring interface condition
/// ∂u_i/∂n_i + (1/ε0)(u_i − u_j) = 0 at x = 1 exactly.
///
/// Side 1 carries f = 2 (u1 = −x² + a·x), side 2 is harmonic
/// (u2 = (a−2)·x + 4 − 2a) with a = (2ε0 + 3)/(ε0 + 2); the jump at the
/// interface is ε0/(ε0 + 2), proportional to ε0.
pub fn problem_spring(epsilon0: f64) -> Problem {
    assert!(epsilon0 > 0.0, "epsilon0 must be positive");
    let a = (2.0 * epsilon0 + 3.0) / (epsilon0 + 2.0);
    let u1 = move |p: Point| -p.x * p.x + a * p.x;
    let u2 = move |p: Point| (a - 2.0) * p.x + 4.0 - 2.0 * a;
    let g1 = move |p: Point| Point::new(-2.0 * p.x + a, 0.0);
    let g2 = move |_: Point| Point::new(a - 2.0, 0.0);
    Problem {
        name: "spring",
        geometry: split_rect_geometry(),
        exact: [Arc::new(u1), Arc::new(u2)],
        exact_grad: [Arc::new(g1), Arc::new(g2)],
        rhs: [Arc::new(|_| 2.0), Arc::new(|_| 0.0)],
        dirichlet: [Arc::new(u1), Arc::new(u2)],
    }
}

/// Jump of the spring solution at the interface, ε0/(ε0 + 2).
pub fn spring_interface_jump(epsilon0: f64) -> f64 {
    epsilon0 / (epsilon0 + 2.0)
}

/// Global linear solution on the split rectangle; harmonic with a
/// nonzero interface flux (∂u/∂n1 = 2 on Γ). Exactly representable in
/// every space this crate builds, so it drives the patch tests.
pub fn problem_linear_patch() -> Problem {
    let u = |p: Point| 1.0 + 2.0 * p.x - 0.5 * p.y;
    Problem {
        name: "linear-patch",
        geometry: split_rect_geometry(),
        exact: shared(u),
        exact_grad: shared_grad(|_| Point::new(2.0, -0.5)),
        rhs: shared(|_| 0.0),
        dirichlet: shared(u),
    }
}

/// Global quadratic u = x² + y² with constant f = −4; exactly
/// representable for p = 2.
pub fn problem_quadratic_patch() -> Problem {
    let u = |p: Point| p.x * p.x + p.y * p.y;
    Problem {
        name: "quadratic-patch",
        geometry: split_rect_geometry(),
        exact: shared(u),
        exact_grad: shared_grad(|p| Point::new(2.0 * p.x, 2.0 * p.y)),
        rhs: shared(|_| -4.0),
        dirichlet: shared(u),
    }
}
