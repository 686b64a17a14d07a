//! Property checks shared by the proptest suite and the acceptance run.
#![allow(dead_code)]

use pconvex::convexity::{pair_critical_exponent, verify_p_convexity};
use pconvex::sections::{section_volume, Engine};
use pconvex::starbody::{
    make_ball, make_body_k, make_cube, make_example2_body, make_lp_ball, BodyKSpec, Direction, PBallSpec,
    StarBody,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn bodies() -> Vec<StarBody> {
    vec![
        make_ball(3).unwrap(),
        make_ball(5).unwrap(),
        make_cube(3).unwrap(),
        make_lp_ball(&PBallSpec::new(0.5, 3).unwrap()).unwrap(),
        make_lp_ball(&PBallSpec::new(0.75, 4).unwrap()).unwrap(),
        make_body_k(&BodyKSpec::new(0.5, 3).unwrap()).unwrap(),
        make_body_k(&BodyKSpec::new(0.3, 5).unwrap()).unwrap(),
        make_example2_body(0.5, 3).unwrap(),
    ]
}

/// A non-degenerate vector with coordinates in [-1, 1].
pub fn vector(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n).prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-6)
}

pub fn body_and_vector() -> impl Strategy<Value = (usize, Vec<f64>)> {
    let dims: Vec<usize> = bodies().iter().map(StarBody::dim).collect();
    (0..dims.len()).prop_flat_map(move |i| (Just(i), vector(dims[i])))
}

pub fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// `‖ρ(u) u‖ = 1` wherever ρ(u) is positive and finite.
pub fn boundary_consistency(index: usize, v: &[f64]) -> Result<(), TestCaseError> {
    let body = &bodies()[index];
    let u = unit(v);
    let r = body.radial_unit(&u).map_err(|e| TestCaseError::fail(e.to_string()))?;
    if r == 0.0 || r.is_infinite() {
        return Ok(());
    }
    let x: Vec<f64> = u.iter().map(|c| r * c).collect();
    let f = body.functional(&x).unwrap();
    prop_assert!((f - 1.0).abs() < 1e-9, "{}: functional {} at boundary", body.label(), f);
    Ok(())
}

/// `‖λx‖ = λ‖x‖`.
pub fn homogeneity(index: usize, v: &[f64], lambda: f64) -> Result<(), TestCaseError> {
    let body = &bodies()[index];
    let f = body.functional(v).unwrap();
    let scaled: Vec<f64> = v.iter().map(|c| lambda * c).collect();
    let g = body.functional(&scaled).unwrap();
    if f.is_infinite() {
        prop_assert!(g.is_infinite());
    } else {
        prop_assert!((g - lambda * f).abs() <= 1e-10 * (lambda * f).max(1.0), "{g} vs {}", lambda * f);
    }
    Ok(())
}

/// The pair exponent of `(x, y)` is the same for `K` and `7K`.
pub fn scale_invariance(index: usize, x: &[f64], y: &[f64]) -> Result<(), TestCaseError> {
    let body = &bodies()[index];
    let big = body.dilate(7.0).unwrap();
    let (a, b) = match (pair_critical_exponent(body, x, y), pair_critical_exponent(&big, x, y)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(_), Err(_)) => return Ok(()),
        (a, b) => return Err(TestCaseError::fail(format!("{a:?} vs {b:?}"))),
    };
    prop_assert_eq!(a.violation, b.violation);
    if a.q.is_finite() {
        prop_assert!((a.q - b.q).abs() < 1e-8, "{} vs {}", a.q, b.q);
    } else {
        prop_assert!(b.q.is_infinite() || b.q > 60.0);
    }
    Ok(())
}

/// `B_{3/4}^3` passes the sampler at 3/4 and at every smaller p.
pub fn p_monotonicity(p_low: f64, seed: u64) -> Result<(), TestCaseError> {
    let body = make_lp_ball(&PBallSpec::new(0.75, 3).unwrap()).unwrap();
    prop_assert!(verify_p_convexity(&body, 0.75, 200, seed).unwrap().passed());
    prop_assert!(verify_p_convexity(&body, p_low, 200, seed).unwrap().passed());
    Ok(())
}

/// Monte Carlo sections are a function of the seed.
pub fn seed_determinism(seed: u64, v: &[f64]) -> Result<(), TestCaseError> {
    let body = make_lp_ball(&PBallSpec::new(0.5, 3).unwrap()).unwrap();
    let u = Direction::new(v.to_vec()).unwrap();
    let engine = Engine::MonteCarlo { samples: 20_000, seed };
    let a = section_volume(&body, &u, &engine).unwrap();
    let b = section_volume(&body, &u, &engine).unwrap();
    prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
    prop_assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    let other = Engine::MonteCarlo { samples: 20_000, seed: seed.wrapping_add(1) };
    let c = section_volume(&body, &u, &other).unwrap();
    prop_assert_ne!(a.value.to_bits(), c.value.to_bits());
    Ok(())
}
