//! Drivers that recompute the closed-form quantities, bounds and
//! counterexamples of the theory and report each as a [`ReproReport`].

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::convexity::{
    bm_separation_check, critical_exponent, designated_exponent, pair_critical_exponent, pair_excess,
    convex_hull_radial_2d, verify_p_convexity,
};
use crate::error::{invalid, Error, Result};
use crate::measures::{make_example1_density, make_example2_density, make_gaussian};
use crate::operators::{
    ball_body, intersection_body, subspace_section_body, weighted_intersection_body,
};
use crate::quadrature::integrate;
use crate::sections::{ray_mass, Engine, Subspace};
use crate::starbody::{
    make_ball, make_body_k, make_cube, make_example2_body, make_lp_ball, solve_f, BodyKSpec, BodySpec,
    Direction, PBallSpec,
};

/// Version of the pinned default parameter sets below.
pub const CONFIG_VERSION: u32 = 1;

pub mod defaults {
    pub const THM24_P: f64 = 0.5;
    pub const THM24_N: usize = 4;
    pub const THM25_P: f64 = 0.5;
    pub const THM25_C: f64 = 1.5;
    pub const EX1_P: f64 = 0.5;
    pub const EX1_N: usize = 3;
    pub const EX2_P: f64 = 0.5;
    pub const EX2_S: f64 = 0.25;
    pub const EX2_N: usize = 3;
    pub const EX2_K: usize = 2;
    pub const THM21_BODY: &str = "lp:p=0.5,n=3";
    pub const THM21_SPAN: [f64; 3] = [0.0, 0.0, 1.0];
    /// Largest n scanned for the Banach–Mazur chain.
    pub const THM25_MAX_N: usize = 64;
}

/// Relative tolerance for section values.
pub const SECTION_TOL: f64 = 1e-2;
/// Relative tolerance for pure quadrature values.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Absolute tolerance for exponent matches.
pub const EXPONENT_TOL: f64 = 1e-3;
/// Slack below the proven exponent floors.
pub const FLOOR_SLACK: f64 = 0.02;

/// Engine and sampling settings shared by all drivers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReproOptions {
    pub seed: u64,
    /// Monte Carlo samples per section.
    pub samples: usize,
    /// Sampled pairs per exponent certificate.
    pub pairs: usize,
    /// Trials per p-convexity sampler run.
    pub trials: usize,
    /// Use Monte Carlo even where quadrature is available.
    pub monte_carlo: bool,
    /// Record wall-clock runtimes (off gives byte-identical reports).
    pub timing: bool,
}

impl Default for ReproOptions {
    fn default() -> Self {
        Self { seed: 42, samples: 200_000, pairs: 2000, trials: 10_000, monte_carlo: false, timing: true }
    }
}

impl ReproOptions {
    /// Engine for sections of dimension `m`.
    pub fn engine(&self, m: usize) -> Engine {
        if self.monte_carlo {
            Engine::MonteCarlo { samples: self.samples, seed: self.seed }
        } else {
            Engine::auto(m, self.samples, self.seed)
        }
    }
}

/// One recomputed quantity.
///
/// With a closed form, `passed` means `|computed - closed_form| ≤
/// tolerance · max(1, |closed_form|)`; otherwise it is the driver's
/// predicate, usually `lower ≤ computed ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    #[serde(with = "crate::serde_ext::option")]
    pub closed_form: Option<f64>,
    #[serde(with = "crate::serde_ext")]
    pub computed: f64,
    pub tolerance: f64,
    #[serde(with = "crate::serde_ext::option")]
    pub lower: Option<f64>,
    #[serde(with = "crate::serde_ext::option")]
    pub upper: Option<f64>,
    pub passed: bool,
    pub runtime_ms: u64,
    pub seed: Option<u64>,
    pub note: String,
}

impl ReproReport {
    fn new(name: &str, params: &[(&str, f64)], computed: f64) -> Self {
        Self {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            closed_form: None,
            computed,
            tolerance: 0.0,
            lower: None,
            upper: None,
            passed: false,
            runtime_ms: 0,
            seed: None,
            note: String::new(),
        }
    }

    /// Compared against a closed form at relative tolerance `tol`.
    pub fn compare(name: &str, params: &[(&str, f64)], closed: f64, computed: f64, tol: f64) -> Self {
        let passed = (computed - closed).abs() <= tol * closed.abs().max(1.0);
        Self { closed_form: Some(closed), tolerance: tol, passed, ..Self::new(name, params, computed) }
    }

    /// Checked against `lower ≤ computed ≤ upper`.
    pub fn bounded(
        name: &str,
        params: &[(&str, f64)],
        computed: f64,
        lower: Option<f64>,
        upper: Option<f64>,
    ) -> Self {
        let passed = lower.is_none_or(|l| computed >= l) && upper.is_none_or(|u| computed <= u);
        Self { lower, upper, passed, ..Self::new(name, params, computed) }
    }

    /// Pass/fail decided by the caller.
    pub fn predicate(name: &str, params: &[(&str, f64)], computed: f64, passed: bool) -> Self {
        Self { passed, ..Self::new(name, params, computed) }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    fn with_passed(mut self, extra: bool) -> Self {
        self.passed &= extra;
        self
    }
}

struct Clock<'a> {
    start: Instant,
    opts: &'a ReproOptions,
}

impl<'a> Clock<'a> {
    fn start(opts: &'a ReproOptions) -> Self {
        Self { start: Instant::now(), opts }
    }

    /// Stamps the elapsed time since the last stamp and restarts.
    fn stamp(&mut self, mut r: ReproReport) -> ReproReport {
        if self.opts.timing {
            r.runtime_ms = self.start.elapsed().as_millis() as u64;
        }
        self.start = Instant::now();
        r
    }
}

fn axis(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn check_open_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("p must lie in (0, 1), got {p}"));
    }
    Ok(())
}

/// `∫_0^1 f(t)^power dt` for the width profile, adaptive to 1e-13.
pub fn profile_power_integral(p: f64, power: f64) -> Result<f64> {
    let mut failure: Option<Error> = None;
    let r = integrate(
        |t| match solve_f(p, t) {
            Ok(f) => f.powf(power),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0,
        1e-13,
        0.0,
        2000,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// `g_n(p) = log_2[((n-2)(2/2^{1/p})^{n-1} + 1)/(n-1)]`.
pub fn g_n(p: f64, n: usize) -> f64 {
    let r = (2.0 / 2f64.powf(1.0 / p)).powi(n as i32 - 1);
    (((n - 2) as f64 * r + 1.0) / (n - 1) as f64).log2()
}

/// `[(1/p - 1)(n-1) + 1]^{-1}`, the exponent guaranteed for `IK`.
pub fn thm22_floor(p: f64, n: usize) -> f64 {
    1.0 / ((1.0 / p - 1.0) * (n - 1) as f64 + 1.0)
}

/// `[(1/p - 1)(n-1) + 1 + g_n(p)]^{-1}`, the exponent ceiling for `IK` of the body K.
pub fn thm24_ceiling(p: f64, n: usize) -> f64 {
    1.0 / ((1.0 / p - 1.0) * (n - 1) as f64 + 1.0 + g_n(p, n))
}

/// `(2/2^{1/p})^{n-1} + (1 - (2/2^{1/p})^{n-1})/(n-1)`, the lower bound on
/// `∫_0^1 f^{n-2}`.
pub fn profile_integral_lower_bound(p: f64, n: usize) -> f64 {
    let r = (2.0 / 2f64.powf(1.0 / p)).powi(n as i32 - 1);
    r + (1.0 - r) / (n - 1) as f64
}

/// `[(1/p - 1)(1/s - n)/k + 1/p]^{-1}`.
pub fn sharp_exponent(p: f64, s: f64, n: usize, k: usize) -> f64 {
    1.0 / ((1.0 / p - 1.0) * (1.0 / s - n as f64) / k as f64 + 1.0 / p)
}

/// The body K and its intersection body: section values against the width
/// profile, the profile integral bound, the designated-pair exponent between
/// floor and ceiling, and the two properties of `g_n`.
pub fn repro_thm24(p: f64, n: usize, opts: &ReproOptions) -> Result<Vec<ReproReport>> {
    check_open_p(p)?;
    if !(3..=64).contains(&n) {
        return invalid(format!("n must lie in [3, 64], got {n}"));
    }
    let params = [("p", p), ("n", n as f64)];
    let nf = n as f64;
    let mut clock = Clock::start(opts);
    let mut out = Vec::new();

    if n <= 8 {
        let k = make_body_k(&BodyKSpec::new(p, n)?)?;
        let engine = opts.engine(n - 1);
        let ik = intersection_body(&k, engine)?;
        let seed = matches!(engine, Engine::MonteCarlo { .. }).then_some(opts.seed);
        let stamp_seed = |r: ReproReport| match seed {
            Some(s) => r.with_seed(s),
            None => r,
        };
        let e_n = axis(n, n - 1);
        let mut diag = axis(n, 0);
        diag[n - 1] = 1.0;
        let diag = Direction::new(diag)?;

        let closed = (4.0 / 2f64.powf(1.0 / p)).powf(nf - 1.0);
        let v = ik.radial_unit(&e_n)?;
        out.push(clock.stamp(stamp_seed(ReproReport::compare("rho_IK_e_n", &params, closed, v, SECTION_TOL))));

        let closed = 2.0 * 2f64.sqrt() * 2f64.powf(nf - 2.0) * profile_power_integral(p, nf - 2.0)?;
        let v = ik.radial(&diag)?;
        out.push(clock.stamp(
            stamp_seed(ReproReport::compare("rho_IK_diagonal", &params, closed, v, SECTION_TOL))
                .with_note("direction (e_1 + e_n)/sqrt(2); reference 2 sqrt(2) int_0^1 (2f)^(n-2)"),
        ));

        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut x1 = vec![0.0; n];
        let mut x2 = vec![0.0; n];
        x1[0] = s2;
        x1[n - 1] = s2;
        x2[0] = -s2;
        x2[n - 1] = s2;
        let q = pair_critical_exponent(&ik, &x1, &x2)?.q;
        let floor = thm22_floor(p, n) - FLOOR_SLACK;
        let ceiling = thm24_ceiling(p, n) + EXPONENT_TOL;
        out.push(clock.stamp(
            stamp_seed(ReproReport::bounded("pair_exponent", &params, q, Some(floor), Some(ceiling)))
                .with_note("pair ((e_n + e_1)/sqrt(2), (e_n - e_1)/sqrt(2)); floor and ceiling both reported"),
        ));

        let e1 = Direction::new(axis(n, 0))?;
        let en = Direction::new(e_n)?;
        let hull = convex_hull_radial_2d(&ik, &en, &e1, 64)?;
        let two_point = ik.radial(&diag)? / 2f64.sqrt();
        out.push(clock.stamp(
            stamp_seed(ReproReport::bounded("hull_radial_e_n", &params, hull, Some(two_point - 1e-9), None))
                .with_note("convex hull of the e_1-e_n section, 64 directions; lower = two-point bound"),
        ));
    }

    let integral = profile_power_integral(p, nf - 2.0)?;
    let bound = profile_integral_lower_bound(p, n);
    out.push(clock.stamp(
        ReproReport::bounded("profile_integral", &params, integral, Some(bound), None)
            .with_note("int_0^1 f^(n-2) against its lower bound"),
    ));

    out.push(clock.stamp(ReproReport::compare("g_n_at_1", &params, 0.0, g_n(1.0, n), 1e-15)));
    let lower = -((n - 1) as f64).log2();
    out.push(clock.stamp(ReproReport::bounded("g_n", &params, g_n(p, n), Some(lower), None)));
    Ok(out)
}

/// First n ≤ 64 at which the Banach–Mazur chain holds for `(p, c)`.
///
/// Passes when the chain is never reached, or holds at every n from the
/// first one up to 64.
pub fn repro_thm25(p: f64, c: f64, opts: &ReproOptions) -> Result<Vec<ReproReport>> {
    let params = [("p", p), ("c", c)];
    let mut clock = Clock::start(opts);
    let chain: Vec<bool> = (3..=defaults::THM25_MAX_N)
        .map(|n| bm_separation_check(p, c, n).map(|b| b.chain_holds))
        .collect::<Result<_>>()?;
    let report = match chain.iter().position(|&h| h) {
        Some(i) => {
            let first = i + 3;
            let stays = chain[i..].iter().all(|&h| h);
            ReproReport::predicate("first_n", &params, first as f64, stays)
                .with_note(format!("chain holds from n = {first}; holds for every larger n <= 64: {stays}"))
        }
        None => ReproReport::predicate("first_n", &params, f64::INFINITY, true).with_note("not reached <= 64"),
    };
    Ok(vec![clock.stamp(report)])
}

/// The Ball-type body of `B_p^n` for a half-space density: the ray along
/// `e_1 + e_2` carries no mass, so no exponent q > 0 survives.
pub fn repro_example1(p: f64, n: usize, opts: &ReproOptions) -> Result<Vec<ReproReport>> {
    check_open_p(p)?;
    if n < 3 {
        return invalid(format!("n must be >= 3, got {n}"));
    }
    let params = [("p", p), ("n", n as f64)];
    let mut clock = Clock::start(opts);
    let k = make_lp_ball(&PBallSpec::new(p, n)?)?;
    let f = make_example1_density(p, n)?;
    let l = ball_body(&k, &f, n - 1)?;
    let (e1, e2) = (axis(n, 0), axis(n, 1));
    let mut diag = e1.clone();
    diag[1] = 1.0;

    let mut out = Vec::new();
    let mass = ray_mass(&k, &f, &Direction::new(diag)?, n - 1)?;
    out.push(clock.stamp(ReproReport::compare("ray_mass_e1_plus_e2", &params, 0.0, mass, 0.0)));

    let m = (n - 1) as f64;
    let closed = ((1.0 - 2f64.powf((1.0 - 1.0 / p) * m)) / m).powf(-1.0 / m);
    let n1 = l.functional(&e1)?;
    let n2 = l.functional(&e2)?;
    out.push(clock.stamp(ReproReport::compare("norm_e1", &params, closed, n1, QUADRATURE_TOL)));
    out.push(clock.stamp(
        ReproReport::compare("norm_e2", &params, n1, n2, QUADRATURE_TOL)
            .with_passed(n2 > 0.0 && n2.is_finite())
            .with_note("compared with norm_e1"),
    ));

    let cert = designated_exponent(&l, &[(e1.clone(), e2.clone())])?;
    out.push(clock.stamp(
        ReproReport::predicate("designated_exponent", &params, cert.q_hat, cert.violation && cert.q_hat == 0.0)
            .with_note(format!(
                "violation flag {}; witness index {}",
                cert.violation,
                cert.witness_index.map_or("none".to_string(), |i| i.to_string())
            )),
    ));

    let excess = pair_excess(&l, &e1, &e2, 0.1)?;
    out.push(clock.stamp(
        ReproReport::bounded("pair_excess_q0.1", &params, excess, Some(f64::MIN_POSITIVE), None)
            .with_note("||e1+e2||^q - ||e1||^q - ||e2||^q at q = 0.1; positive means the pair fails"),
    ));
    Ok(out)
}

/// The Ball-type body of the half-space ℓ_p body for `|x_1|^{1/s - n}`:
/// norms against closed forms and sharpness of the exponent.
pub fn repro_example2(p: f64, s: f64, n: usize, k: usize, opts: &ReproOptions) -> Result<Vec<ReproReport>> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p must lie in (0, 1], got {p}"));
    }
    if k < 1 || k > n {
        return invalid(format!("k must lie in [1, n], got {k}"));
    }
    let params = [("p", p), ("s", s), ("n", n as f64), ("k", k as f64)];
    let mut clock = Clock::start(opts);
    let body = make_example2_body(p, n)?;
    let f = make_example2_density(s, n)?;
    let l = ball_body(&body, &f, k)?;
    let alpha = 1.0 / s - n as f64 + k as f64;
    let kf = k as f64;
    let e1 = axis(n, 0);
    let mut plus = e1.clone();
    plus[1] = 1.0;
    let mut minus = e1.clone();
    minus[1] = -1.0;

    let mut out = Vec::new();
    let closed = (2f64.powf((1.0 - 1.0 / p) * alpha) / alpha).powf(-1.0 / kf);
    out.push(clock.stamp(ReproReport::compare("norm_e1", &params, closed, l.functional(&e1)?, QUADRATURE_TOL)));
    let closed = alpha.powf(1.0 / kf);
    out.push(clock.stamp(ReproReport::compare(
        "norm_e1_plus_e2",
        &params,
        closed,
        l.functional(&plus)?,
        QUADRATURE_TOL,
    )));

    let q_sharp = sharp_exponent(p, s, n, k);
    let q = pair_critical_exponent(&l, &plus, &minus)?.q;
    out.push(clock.stamp(
        ReproReport::compare("pair_exponent", &params, q_sharp, q, EXPONENT_TOL).with_note("pair (e1+e2, e1-e2)"),
    ));

    let below = q_sharp - EXPONENT_TOL;
    let report = verify_p_convexity(&l, below, opts.trials, opts.seed)?;
    out.push(clock.stamp(
        ReproReport::compare("sampler_below_sharp", &params, 0.0, report.violations as f64, 0.0)
            .with_seed(opts.seed)
            .with_note(format!("violations of {below}-convexity in {} trials", report.trials)),
    ));

    let above = q_sharp + 10.0 * EXPONENT_TOL;
    let excess = pair_excess(&l, &plus, &minus, above)?;
    out.push(clock.stamp(
        ReproReport::bounded("pair_excess_above_sharp", &params, excess, Some(f64::MIN_POSITIVE), None)
            .with_note(format!("pair (e1+e2, e1-e2) at q = {above}; positive means the pair fails")),
    ));
    Ok(out)
}

/// The body on `E^⊥` from k-dimensional sections through E: its sampled
/// exponent against `[(1/p - 1)k + 1]^{-1} - 0.02`.
pub fn repro_thm21(body: &BodySpec, span: &[Vec<f64>], opts: &ReproOptions) -> Result<Vec<ReproReport>> {
    let e = Subspace::orthonormalize(span)?;
    let k = e.dim() + 1;
    let p = body.known_exponent();
    let params = [("p", p), ("n", body.dim() as f64), ("k", k as f64)];
    let mut clock = Clock::start(opts);
    let section = subspace_section_body(&body.build()?, &e, opts.engine(k))?;
    let cert = critical_exponent(&section.body, opts.pairs, opts.seed, &[])?;
    let floor = 1.0 / ((1.0 / p - 1.0) * k as f64 + 1.0) - FLOOR_SLACK;
    Ok(vec![clock.stamp(
        ReproReport::bounded("q_hat", &params, cert.q_hat, Some(floor), None)
            .with_seed(opts.seed)
            .with_note(format!("body {body}; {} pairs tested", cert.pairs_tested)),
    )])
}

/// Convexity of intersection bodies: the exponent floor for `I(B_p^n)`,
/// Busemann's theorem for convex bodies with Lebesgue and Gaussian measure,
/// and p-convexity of a Ball-type body.
pub fn repro_busemann(opts: &ReproOptions) -> Result<Vec<ReproReport>> {
    let mut clock = Clock::start(opts);
    let mut out = Vec::new();
    // 4-dimensional bodies have 3-dimensional sections, which cost ~64x more.
    let pairs_for = |n: usize| if n >= 4 { opts.pairs.min(400) } else { opts.pairs };

    for (p, n) in [(0.5, 3), (0.75, 3), (0.5, 4), (0.75, 4)] {
        let ik = intersection_body(&make_lp_ball(&PBallSpec::new(p, n)?)?, opts.engine(n - 1))?;
        let cert = critical_exponent(&ik, pairs_for(n), opts.seed, &[])?;
        let floor = thm22_floor(p, n) - FLOOR_SLACK;
        out.push(clock.stamp(
            ReproReport::bounded("exponent_floor_I_lp", &[("p", p), ("n", n as f64)], cert.q_hat, Some(floor), None)
                .with_seed(opts.seed)
                .with_note(format!("{} pairs tested", cert.pairs_tested)),
        ));
    }

    let convex = [
        ("busemann_I_cube", intersection_body(&make_cube(3)?, opts.engine(2))?, 3),
        ("busemann_I_ball", intersection_body(&make_ball(4)?, opts.engine(3))?, 4),
        (
            "busemann_I_gaussian_cube",
            weighted_intersection_body(&make_cube(3)?, &make_gaussian(3)?, opts.engine(2))?,
            3,
        ),
    ];
    for (name, body, n) in convex {
        let cert = critical_exponent(&body, pairs_for(n), opts.seed, &[])?;
        out.push(clock.stamp(
            ReproReport::bounded(name, &[("n", n as f64)], cert.q_hat, Some(1.0 - FLOOR_SLACK), None)
                .with_seed(opts.seed)
                .with_note(format!("{} pairs tested", cert.pairs_tested)),
        ));
    }

    let l = ball_body(&make_lp_ball(&PBallSpec::new(0.5, 3)?)?, &make_gaussian(3)?, 2)?;
    let report = verify_p_convexity(&l, 0.5, opts.trials, opts.seed)?;
    out.push(clock.stamp(
        ReproReport::compare("ball_body_p_convex", &[("p", 0.5), ("n", 3.0), ("k", 2.0)], 0.0, report.violations as f64, 0.0)
            .with_seed(opts.seed)
            .with_note(format!("Gaussian weight on B_p^3; {} trials", report.trials)),
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        assert!((g_n(0.5, 4) - (1.25f64 / 3.0).log2()).abs() < 1e-15);
        assert_eq!(g_n(1.0, 7), 0.0);
        assert!((thm22_floor(0.5, 4) - 0.25).abs() < 1e-15);
        assert!((thm24_ceiling(0.5, 4) - 0.365_4).abs() < 1e-4);
        assert!((profile_integral_lower_bound(0.5, 4) - 5.0 / 12.0).abs() < 1e-15);
        assert!((sharp_exponent(0.5, 0.25, 3, 2) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn profile_integral_closed_form() {
        // For p = 1/2 the profile is (1 + t^2)/2.
        let v = profile_power_integral(0.5, 2.0).unwrap();
        assert!((v - 7.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn report_predicates() {
        let r = ReproReport::compare("x", &[], 2.0, 2.0 + 1e-7, 1e-6);
        assert!(r.passed);
        let r = ReproReport::compare("x", &[], 0.0, 2e-6, 1e-6);
        assert!(!r.passed);
        let r = ReproReport::bounded("x", &[], 0.5, Some(0.4), Some(0.45));
        assert!(!r.passed);
    }

    #[test]
    fn thm25_scan() {
        let r = repro_thm25(0.5, 1.5, &ReproOptions::default()).unwrap();
        assert!(r[0].passed);
        assert_eq!(r[0].computed, 21.0);
        let r2 = repro_thm25(0.5, 1.99, &ReproOptions::default()).unwrap();
        assert!(r2[0].computed > r[0].computed);
    }
}
