//! Property tests for the structural invariants: conformity and area
//! conservation under arbitrary marking sequences, the mortar partition
//! property, and Dörfler marking minimality.

use proptest::prelude::*;

use mortar_fem::estimator::dorfler_mark;
use mortar_fem::geom::{Point, Segment};
use mortar_fem::interface::build_mortar_segments;
use mortar_fem::mesh::{gen_rect_mesh, refine, Mesh};

fn gamma() -> Segment {
    Segment::new(Point::new(1.0, 0.0), Point::new(1.0, 1.0))
}

fn refine_by_seed(mesh: &Mesh, seed: u64, fraction: f64) -> Mesh {
    // Deterministic pseudo-random marking from the seed.
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
    let mut marked = Vec::new();
    for t in 0..mesh.n_triangles() {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        if (state % 1000) as f64 / 1000.0 < fraction {
            marked.push(t);
        }
    }
    refine(mesh, &marked)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Any marking sequence keeps the mesh conforming, preserves the
    /// total area, and never degrades the minimum angle below half of
    /// the initial one.
    #[test]
    fn refinement_keeps_conformity_and_area(
        seeds in prop::collection::vec(any::<u64>(), 1..5),
        fraction in 0.05f64..0.9,
        nx in 1usize..4,
        ny in 1usize..4,
        diag in 0usize..2,
    ) {
        let g = gamma();
        let mut mesh = gen_rect_mesh(0.0, 1.0, 0.0, 1.0, nx, ny, diag, Some(&g)).unwrap();
        let area = mesh.total_area();
        let min_angle = mesh.min_angle();
        for seed in seeds {
            mesh = refine_by_seed(&mesh, seed, fraction);
            mesh.check_conformity().unwrap();
            prop_assert!((mesh.total_area() - area).abs() < 1e-13 * area.max(1.0));
            prop_assert!(mesh.min_angle() >= 0.5 * min_angle - 1e-12);
        }
    }

    /// After independently refining both meshes, the mortar segments
    /// still partition Γ with consistent owning facets.
    #[test]
    fn mortar_partition_survives_independent_refinement(
        seed1 in any::<u64>(),
        seed2 in any::<u64>(),
        rounds in 1usize..4,
    ) {
        let g = gamma();
        let mut m1 = gen_rect_mesh(0.0, 1.0, 0.0, 1.0, 2, 2, 0, Some(&g)).unwrap();
        let mut m2 = gen_rect_mesh(1.0, 2.0, 0.0, 1.0, 3, 3, 0, Some(&g)).unwrap();
        for r in 0..rounds {
            m1 = refine_by_seed(&m1, seed1.wrapping_add(r as u64), 0.5);
            m2 = refine_by_seed(&m2, seed2.wrapping_add(r as u64), 0.4);
        }
        let segments = build_mortar_segments(&m1, &m2, &g).unwrap();
        let total: f64 = segments.iter().map(|s| s.length()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!((segments[0].s0).abs() < 1e-12);
        prop_assert!((segments.last().unwrap().s1 - 1.0).abs() < 1e-12);
        for pair in segments.windows(2) {
            prop_assert!((pair[0].s1 - pair[1].s0).abs() < 1e-12);
        }
        for seg in &segments {
            prop_assert!(seg.h_e > 0.0);
            prop_assert!(seg.side1.facet_s0 <= seg.s0 + 1e-12 && seg.side1.facet_s1 >= seg.s1 - 1e-12);
            prop_assert!(seg.side2.facet_s0 <= seg.s0 + 1e-12 && seg.side2.facet_s1 >= seg.s1 - 1e-12);
        }
    }

    /// Dörfler marking selects a set that reaches the θ-fraction, and no
    /// strictly smaller set can (greedy-on-sorted is cardinality-minimal).
    #[test]
    fn dorfler_is_minimal_and_sufficient(
        eta in prop::collection::vec(0.0f64..10.0, 1..40),
        theta in 0.05f64..1.0,
    ) {
        let total: f64 = eta.iter().sum();
        prop_assume!(total > 0.0);
        let marked = dorfler_mark(&eta, theta);
        let marked_sum: f64 = marked.iter().map(|&i| eta[i]).sum();
        prop_assert!(marked_sum >= theta * total - 1e-12 * total);

        // No set of size |marked| − 1 can reach the target, because the
        // greedy set holds the largest values.
        if marked.len() > 1 {
            let mut sorted = eta.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let best_smaller: f64 = sorted[..marked.len() - 1].iter().sum();
            prop_assert!(best_smaller < theta * total + 1e-12 * total);
        }
    }
}
