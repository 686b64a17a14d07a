//! Structural facts about the operators, measures and certificates.

use std::f64::consts::PI;

use pconvex::convexity::{
    critical_exponent, pair_critical_exponent, pair_satisfies, verify_p_convexity,
};
use pconvex::measures::{
    check_concavity_class, check_evenness, check_ray_monotone, make_example1_density, make_example2_density,
    make_gaussian, Concavity, Density,
};
use pconvex::operators::{
    ball_body, ball_body_scaled, intersection_body, subspace_section_body, weighted_intersection_body,
};
use pconvex::repro::{sharp_exponent, thm22_floor, ReproReport, FLOOR_SLACK};
use pconvex::sections::{section_volume, sphere_sample, weighted_section_mass, Engine, Subspace};
use pconvex::starbody::{
    make_ball, make_cube, make_example2_body, make_lp_ball, Direction, PBallSpec, StarBody,
};

fn lp(p: f64, n: usize) -> StarBody {
    make_lp_ball(&PBallSpec::new(p, n).unwrap()).unwrap()
}

fn directions(n: usize, count: usize, seed: u64) -> Vec<Direction> {
    sphere_sample(n, count, seed).unwrap().into_iter().map(|u| Direction::new(u).unwrap()).collect()
}

#[test]
fn uniform_weight_gives_the_plain_intersection_body() {
    for k in [make_cube(3).unwrap(), lp(0.5, 3)] {
        let plain = intersection_body(&k, Engine::Quadrature).unwrap();
        let weighted = weighted_intersection_body(&k, &Density::uniform(3).unwrap(), Engine::Quadrature).unwrap();
        for u in directions(3, 20, 5) {
            let (a, b) = (plain.radial(&u).unwrap(), weighted.radial(&u).unwrap());
            assert!((a - b).abs() <= 1e-9 * a, "{}: {a} vs {b}", k.label());
        }
    }
}

#[test]
fn intersection_of_ball_body_is_the_weighted_intersection_body() {
    // ρ_L^{n-1} = (n-1)·mass, so (1/(n-1))∫ρ_L^{n-1} over a great circle
    // is the weighted section mass.
    let n = 3;
    let k = make_cube(n).unwrap();
    let g = make_gaussian(n).unwrap();
    let l = ball_body_scaled(&k, &g, n - 1, (n - 1) as f64).unwrap();
    let il = intersection_body(&l, Engine::Quadrature).unwrap();
    let iw = weighted_intersection_body(&k, &g, Engine::Quadrature).unwrap();
    for u in directions(n, 6, 9) {
        let (a, b) = (il.radial(&u).unwrap(), iw.radial(&u).unwrap());
        assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
    }
}

#[test]
fn section_body_through_a_line_is_a_rotated_intersection_body() {
    let k = make_cube(3).unwrap();
    let e = Subspace::orthonormalize(&[vec![0.3, -0.2, 1.0]]).unwrap();
    let s = subspace_section_body(&k, &e, Engine::Quadrature).unwrap();
    let perp = s.complement.basis().to_vec();
    for i in 0..12 {
        let t = 0.37 + i as f64 * PI / 12.0;
        let (c, d) = (t.cos(), t.sin());
        let v: Vec<f64> = perp[0].iter().zip(&perp[1]).map(|(a, b)| c * a + d * b).collect();
        let w: Vec<f64> = perp[0].iter().zip(&perp[1]).map(|(a, b)| -d * a + c * b).collect();
        let expected = section_volume(&k, &Direction::new(w).unwrap(), &Engine::Quadrature).unwrap().value;
        let got = 1.0 / s.ambient_functional(&v).unwrap();
        // Same plane, different in-plane bases: the cube's kinks put the
        // two quadratures about 1e-6 apart.
        assert!((got - expected).abs() <= 1e-4 * expected, "{got} vs {expected}");
    }
    assert!(s.ambient_functional(&[0.3, -0.2, 1.0]).is_err());
}

#[test]
fn example1_ball_body_vanishes_opposite_the_half_space() {
    let (p, n) = (0.5, 3);
    let l = ball_body(&lp(p, n), &make_example1_density(p, n).unwrap(), n - 1).unwrap();
    let back = Direction::new(vec![-1.0, -1.0, 0.0]).unwrap();
    assert_eq!(l.radial(&back).unwrap(), 0.0);
    assert_eq!(l.functional(&[-1.0, -1.0, 0.0]).unwrap(), f64::INFINITY);
    let e1 = l.functional(&[1.0, 0.0, 0.0]).unwrap();
    assert!(e1 > 0.0 && e1.is_finite());
}

#[test]
fn density_checks_separate_the_examples() {
    let g = make_gaussian(4).unwrap();
    assert!(check_evenness(&g, 2000, 1).passed());
    assert!(check_ray_monotone(&g, 2000, 1).passed());
    assert!(check_concavity_class(&g, 2000, 1).passed());

    let ex1 = make_example1_density(0.5, 3).unwrap();
    assert!(!check_evenness(&ex1, 2000, 1).passed());
    assert!(check_concavity_class(&ex1, 2000, 1).passed());

    let ex2 = make_example2_density(0.25, 3).unwrap();
    assert!(check_concavity_class(&ex2, 2000, 1).passed());

    // |x_1| is not 0.2-concave: its power is V-shaped across x_1 = 0.
    let fake = Density::new(3, Concavity::SConcave { s: 0.2 }, true, "abs", |x: &[f64]| x[0].abs()).unwrap();
    let report = check_concavity_class(&fake, 2000, 1);
    assert!(!report.passed());
    assert!(report.worst.unwrap().excess > 0.0);
}

#[test]
fn section_mass_is_linear_in_the_density() {
    let k = lp(0.5, 3);
    let g = make_gaussian(3).unwrap();
    for u in directions(3, 5, 2) {
        let a = weighted_section_mass(&k, &g, &u, &Engine::Quadrature).unwrap().value;
        let b = weighted_section_mass(&k, &g.scaled(3.5).unwrap(), &u, &Engine::Quadrature).unwrap().value;
        assert!((b - 3.5 * a).abs() <= 1e-12 * b);
    }
}

#[test]
fn engines_agree_within_three_standard_errors() {
    let mc = Engine::MonteCarlo { samples: 1_000_000, seed: 17 };
    for k in [make_ball(3).unwrap(), make_cube(3).unwrap(), lp(0.5, 3)] {
        for u in directions(3, 3, 4) {
            let q = section_volume(&k, &u, &Engine::Quadrature).unwrap().value;
            let m = section_volume(&k, &u, &mc).unwrap();
            assert!(
                (q - m.value).abs() <= 3.0 * m.std_error + 1e-12,
                "{}: quadrature {q}, monte carlo {} ± {}",
                k.label(),
                m.value,
                m.std_error
            );
        }
    }
}

#[test]
fn euclidean_ball_sections_do_not_depend_on_the_direction() {
    let b = make_ball(5).unwrap();
    let mc = Engine::MonteCarlo { samples: 100_000, seed: 3 };
    for u in directions(5, 4, 8) {
        let v = section_volume(&b, &u, &mc).unwrap();
        assert!((v.value - PI * PI / 2.0).abs() <= 1e-9, "{}", v.value);
    }
}

#[test]
fn sphere_samples_are_isotropic() {
    let pts = sphere_sample(3, 100_000, 7).unwrap();
    let mean = pts.iter().map(|u| u[0] * u[0]).sum::<f64>() / pts.len() as f64;
    assert!((mean - 1.0 / 3.0).abs() < 0.01, "{mean}");
    let lens: Vec<f64> = pts.iter().map(|u| u.iter().map(|x| x * x).sum::<f64>()).collect();
    assert!(lens.iter().all(|l| (l - 1.0).abs() < 1e-12));
}

#[test]
fn more_pairs_never_raise_the_estimate() {
    let k = lp(0.75, 3);
    let short = critical_exponent(&k, 200, 31, &[]).unwrap();
    let long = critical_exponent(&k, 400, 31, &[]).unwrap();
    assert!(long.q_hat <= short.q_hat);
    assert_eq!(long.pairs_tested, 400 + short.pairs_tested - 200);
}

#[test]
fn witness_pair_is_tight_at_the_estimate() {
    let k = lp(0.5, 4);
    let cert = critical_exponent(&k, 300, 12, &[]).unwrap();
    let (x, y) = cert.witness_pair.unwrap();
    assert!(pair_satisfies(&k, &x, &y, cert.q_hat - 1e-7).unwrap());
    assert!(!pair_satisfies(&k, &x, &y, cert.q_hat + 1e-7).unwrap());
    assert!((pair_critical_exponent(&k, &x, &y).unwrap().q - cert.q_hat).abs() < 1e-15);
}

#[test]
fn lp_balls_are_exactly_p_convex() {
    for (p, n) in [(0.5, 3), (0.75, 4)] {
        let k = lp(p, n);
        assert!(verify_p_convexity(&k, p, 10_000, 3).unwrap().passed());
        assert!(!verify_p_convexity(&k, p + 0.1, 10_000, 3).unwrap().passed());
    }
}

#[test]
fn repro_report_round_trips_through_json() {
    let r = ReproReport::bounded("q", &[("p", 0.5)], f64::INFINITY, Some(0.3), None).with_seed(9).with_note("x");
    let text = serde_json::to_string(&r).unwrap();
    assert!(text.contains("\"inf\""));
    let back: ReproReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
}

#[test]
fn intersection_body_of_lp_ball_clears_its_floor() {
    let (p, n) = (0.5, 3);
    let i = intersection_body(&lp(p, n), Engine::Quadrature).unwrap();
    let cert = critical_exponent(&i, 200, 42, &[]).unwrap();
    assert!(cert.q_hat >= thm22_floor(p, n) - FLOOR_SLACK, "{}", cert.q_hat);
}

#[test]
fn gaussian_intersection_body_of_a_cube_is_convex() {
    let i = weighted_intersection_body(&make_cube(3).unwrap(), &make_gaussian(3).unwrap(), Engine::Quadrature)
        .unwrap();
    let cert = critical_exponent(&i, 200, 42, &[]).unwrap();
    assert!(cert.q_hat >= 0.98, "{}", cert.q_hat);
}

#[test]
fn gaussian_ball_body_of_a_cube_is_convex() {
    let l = ball_body(&make_cube(3).unwrap(), &make_gaussian(3).unwrap(), 2).unwrap();
    let cert = critical_exponent(&l, 1000, 42, &[]).unwrap();
    assert!(cert.q_hat >= 0.98, "{}", cert.q_hat);
}

#[test]
fn example2_exponent_is_sharp_off_the_default_parameters() {
    let (p, s, n, k) = (0.7, 0.2, 3, 2);
    let l = ball_body(&make_example2_body(p, n).unwrap(), &make_example2_density(s, n).unwrap(), k).unwrap();
    let q = pair_critical_exponent(&l, &[1.0, 1.0, 0.0], &[1.0, -1.0, 0.0]).unwrap().q;
    assert!((q - sharp_exponent(p, s, n, k)).abs() < 1e-3, "{q} vs {}", sharp_exponent(p, s, n, k));
}
