mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn boundary_points_have_functional_one((i, v) in body_and_vector()) {
        boundary_consistency(i, &v)?;
    }

    #[test]
    fn functional_is_homogeneous((i, v) in body_and_vector(), lambda in 0.01f64..100.0) {
        homogeneity(i, &v, lambda)?;
    }

    #[test]
    fn pair_exponent_is_scale_invariant(
        (i, x, y) in body_and_vector().prop_flat_map(|(i, x)| {
            let n = x.len();
            (Just(i), Just(x), vector(n))
        })
    ) {
        scale_invariance(i, &x, &y)?;
    }

    #[test]
    fn p_convexity_is_monotone_in_p(p in 0.05f64..0.75, seed in any::<u64>()) {
        p_monotonicity(p, seed)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn monte_carlo_depends_only_on_seed(seed in any::<u64>(), v in vector(3)) {
        seed_determinism(seed, &v)?;
    }
}

#[test]
fn monte_carlo_independent_of_thread_count() {
    use pconvex::sections::{section_volume, Engine};
    use pconvex::starbody::{make_cube, Direction};
    let body = make_cube(4).unwrap();
    let u = Direction::new(vec![0.3, -0.2, 0.5, 0.1]).unwrap();
    let engine = Engine::MonteCarlo { samples: 50_000, seed: 9 };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| section_volume(&body, &u, &engine).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
}
