//! Quadrature on the reference triangle and the unit interval.
//!
//! Triangle rules are symmetric Gauss rules (Dunavant tables up to
//! degree 6); 1D rules are Gauss-Legendre mapped to [0, 1]. All weights
//! are positive and sum to the reference measure (1/2 for the triangle,
//! 1 for the interval).

use crate::error::{Error, Result};

/// Points and weights of one quadrature rule. Triangle points are
/// reference coordinates (ξ, η); 1D rules store the node in `x` with
/// `y = 0`.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Symmetric rule on the reference triangle {ξ, η ≥ 0, ξ + η ≤ 1},
/// exact for all monomials ξ^a η^b with a + b ≤ `degree`.
pub fn triangle_rule(degree: usize) -> Result<QuadRule> {
    // Weights below are for a unit-area triangle and get halved.
    let groups: &[(f64, &[[f64; 3]])] = match degree {
        0 | 1 => &[(1.0, &[[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]])],
        2 => &[(
            1.0 / 3.0,
            &[
                [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0],
                [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
                [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0],
            ],
        )],
        3 | 4 => {
            const A1: f64 = 0.445948490915965;
            const W1: f64 = 0.223381589678011;
            const A2: f64 = 0.091576213509771;
            const W2: f64 = 0.109951743655322;
            &[
                (
                    W1,
                    &[
                        [1.0 - 2.0 * A1, A1, A1],
                        [A1, 1.0 - 2.0 * A1, A1],
                        [A1, A1, 1.0 - 2.0 * A1],
                    ],
                ),
                (
                    W2,
                    &[
                        [1.0 - 2.0 * A2, A2, A2],
                        [A2, 1.0 - 2.0 * A2, A2],
                        [A2, A2, 1.0 - 2.0 * A2],
                    ],
                ),
            ]
        }
        5 => {
            // Closed forms: a = (6 ± √15)/21, w = (155 ± √15)/1200.
            let s = 15f64.sqrt();
            let a1 = (6.0 + s) / 21.0;
            let w1 = (155.0 + s) / 1200.0;
            let a2 = (6.0 - s) / 21.0;
            let w2 = (155.0 - s) / 1200.0;
            return Ok(build_rule(&[
                (9.0 / 40.0, vec![[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]]),
                (w1, perms3(a1)),
                (w2, perms3(a2)),
            ]));
        }
        6 => {
            const A1: f64 = 0.249286745170910;
            const W1: f64 = 0.116786275726379;
            const A2: f64 = 0.063089014491502;
            const W2: f64 = 0.050844906370207;
            const B1: f64 = 0.310352451033785;
            const B2: f64 = 0.053145049844816;
            const W3: f64 = 0.082851075618374;
            return Ok(build_rule(&[
                (W1, perms3(A1)),
                (W2, perms3(A2)),
                (W3, perms6(B1, B2)),
            ]));
        }
        d => {
            return Err(Error::InvalidArgument(format!(
                "triangle quadrature degree {d} not supported (max 6)"
            )))
        }
    };
    let groups: Vec<(f64, Vec<[f64; 3]>)> =
        groups.iter().map(|(w, pts)| (*w, pts.to_vec())).collect();
    Ok(build_rule(&groups))
}

fn perms3(a: f64) -> Vec<[f64; 3]> {
    let c = 1.0 - 2.0 * a;
    vec![[c, a, a], [a, c, a], [a, a, c]]
}

fn perms6(a: f64, b: f64) -> Vec<[f64; 3]> {
    let c = 1.0 - a - b;
    vec![
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ]
}

fn build_rule(groups: &[(f64, Vec<[f64; 3]>)]) -> QuadRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (w, pts) in groups {
        for bary in pts {
            // (ξ, η) = (λ1, λ2) of the barycentric triple.
            points.push((bary[1], bary[2]));
            weights.push(0.5 * w);
        }
    }
    QuadRule { points, weights }
}

/// Gauss-Legendre rule on [0, 1], exact for monomials t^k, k ≤ `degree`.
pub fn gauss_1d(degree: usize) -> Result<QuadRule> {
    if degree > 9 {
        return Err(Error::InvalidArgument(format!(
            "1D quadrature degree {degree} not supported (max 9)"
        )));
    }
    let n = degree / 2 + 1;
    // Nodes/weights on [-1, 1] in closed form.
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match n {
        1 => (vec![0.0], vec![2.0]),
        2 => {
            let x = 1.0 / 3f64.sqrt();
            (vec![-x, x], vec![1.0, 1.0])
        }
        3 => {
            let x = (3f64 / 5.0).sqrt();
            (vec![-x, 0.0, x], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
        }
        4 => {
            let t = (6f64 / 5.0).sqrt();
            let x1 = ((3.0 - 2.0 * t) / 7.0).sqrt();
            let x2 = ((3.0 + 2.0 * t) / 7.0).sqrt();
            let w1 = (18.0 + 30f64.sqrt()) / 36.0;
            let w2 = (18.0 - 30f64.sqrt()) / 36.0;
            (vec![-x2, -x1, x1, x2], vec![w2, w1, w1, w2])
        }
        5 => {
            let t = (10f64 / 7.0).sqrt();
            let x1 = (5.0 - 2.0 * t).sqrt() / 3.0;
            let x2 = (5.0 + 2.0 * t).sqrt() / 3.0;
            let w0 = 128.0 / 225.0;
            let w1 = (322.0 + 13.0 * 70f64.sqrt()) / 900.0;
            let w2 = (322.0 - 13.0 * 70f64.sqrt()) / 900.0;
            (vec![-x2, -x1, 0.0, x1, x2], vec![w2, w1, w0, w1, w2])
        }
        _ => unreachable!(),
    };
    Ok(QuadRule {
        points: nodes.iter().map(|x| (0.5 * (x + 1.0), 0.0)).collect(),
        weights: weights.iter().map(|w| 0.5 * w).collect(),
    })
}
