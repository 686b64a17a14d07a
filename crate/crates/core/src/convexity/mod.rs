//! Convexity exponents of star bodies.
//!
//! A body is q-convex when `‖x+y‖^q ≤ ‖x‖^q + ‖y‖^q` for all x, y. For a
//! single pair the largest such q solves `(a/c)^q + (b/c)^q = 1`, with
//! `a = ‖x‖`, `b = ‖y‖`, `c = ‖x+y‖`. The certifier takes the minimum of that
//! pair exponent over designated and sampled pairs.

mod banach_mazur;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::rng::{mix, stream_rng, unit_vector};
use crate::root::bisect_increasing;
use crate::starbody::{p_convex_combination, StarBody};
use crate::violation::{Violation, ViolationReport};

pub use banach_mazur::{
    bm_lower_bound_ik, bm_separation_check, bm_upper_bound_k, convex_hull_radial_2d, BanachMazurBounds,
};

/// Bisection bracket for pair exponents.
pub const Q_MIN: f64 = 1e-6;
pub const Q_MAX: f64 = 64.0;
pub const Q_TOL: f64 = 1e-10;
/// Slack on `‖z‖ ≤ 1` in the p-convexity sampler.
pub const MEMBERSHIP_SLACK: f64 = 1e-9;
/// Direction redraws allowed per sampled point before the trial is skipped.
pub const MAX_REDRAWS: usize = 64;

const PAIR_TAG: u64 = 0x7061_6972;
const TRIAL_TAG: u64 = 0x7472_6961_6c;

/// The critical exponent of one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairExponent {
    #[serde(with = "crate::serde_ext")]
    pub q: f64,
    #[serde(with = "crate::serde_ext")]
    pub a: f64,
    #[serde(with = "crate::serde_ext")]
    pub b: f64,
    #[serde(with = "crate::serde_ext")]
    pub c: f64,
    /// No q > 0 works for this pair.
    pub violation: bool,
}

/// Solves `(a/c)^q + (b/c)^q = 1` for the functional values of a pair.
pub fn pair_exponent_from_norms(a: f64, b: f64, c: f64) -> Result<PairExponent> {
    if a.is_nan() || b.is_nan() || c.is_nan() || a < 0.0 || b < 0.0 || c < 0.0 {
        return invalid(format!("functional values must be non-negative, got ({a}, {b}, {c})"));
    }
    if !a.is_finite() || !b.is_finite() || a == 0.0 && b == 0.0 {
        return invalid("pair exponent needs summands with finite, not both zero, functionals");
    }
    let out = |q: f64, violation| Ok(PairExponent { q, a, b, c, violation });
    if c <= a.max(b) {
        return out(f64::INFINITY, false);
    }
    if c.is_infinite() || a == 0.0 || b == 0.0 {
        return out(0.0, true);
    }
    let (ra, rb) = (a / c, b / c);
    let g = |q: f64| 1.0 - ra.powf(q) - rb.powf(q);
    if g(Q_MAX) <= 0.0 {
        return out(f64::INFINITY, false);
    }
    if g(Q_MIN) >= 0.0 {
        return out(Q_MIN, false);
    }
    out(bisect_increasing(g, Q_MIN, Q_MAX, Q_TOL)?, false)
}

pub fn pair_critical_exponent(body: &StarBody, x1: &[f64], x2: &[f64]) -> Result<PairExponent> {
    check_dim(body.dim(), x1.len())?;
    check_dim(body.dim(), x2.len())?;
    let sum: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| a + b).collect();
    let a = body.functional(x1)?;
    let b = body.functional(x2)?;
    let c = body.functional(&sum)?;
    pair_exponent_from_norms(a, b, c)
}

/// Whether `‖x1+x2‖^q ≤ ‖x1‖^q + ‖x2‖^q` holds (relative slack 1e-12).
pub fn pair_satisfies(body: &StarBody, x1: &[f64], x2: &[f64], q: f64) -> Result<bool> {
    Ok(pair_excess(body, x1, x2, q)? <= 0.0)
}

/// `‖x1+x2‖^q − (‖x1‖^q + ‖x2‖^q)` minus a 1e-12 relative slack.
pub fn pair_excess(body: &StarBody, x1: &[f64], x2: &[f64], q: f64) -> Result<f64> {
    if !(q > 0.0) {
        return invalid(format!("exponent must be positive, got {q}"));
    }
    check_dim(body.dim(), x1.len())?;
    check_dim(body.dim(), x2.len())?;
    let sum: Vec<f64> = x1.iter().zip(x2).map(|(a, b)| a + b).collect();
    let rhs = body.functional(x1)?.powf(q) + body.functional(x2)?.powf(q);
    let lhs = body.functional(&sum)?.powf(q);
    if lhs.is_infinite() && rhs.is_infinite() {
        return Ok(0.0);
    }
    Ok(lhs - rhs * (1.0 + 1e-12))
}

/// The pairs every certificate includes: for i < j, `(e_i, e_j)`,
/// `(e_i, -e_j)`, `(e_i+e_j, e_i-e_j)` and `(e_i+e_j, e_j-e_i)`.
pub fn designated_pairs(n: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut out = Vec::new();
    let e = |i: usize, s: f64| {
        let mut v = vec![0.0; n];
        v[i] = s;
        v
    };
    let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<f64>>();
    for i in 0..n {
        for j in i + 1..n {
            out.push((e(i, 1.0), e(j, 1.0)));
            out.push((e(i, 1.0), e(j, -1.0)));
            out.push((add(&e(i, 1.0), &e(j, 1.0)), add(&e(i, 1.0), &e(j, -1.0))));
            out.push((add(&e(i, 1.0), &e(j, 1.0)), add(&e(j, 1.0), &e(i, -1.0))));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMode {
    Sampled,
    DesignatedPairs,
}

/// The minimum pair exponent found, with the pair attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentCertificate {
    #[serde(with = "crate::serde_ext")]
    pub q_hat: f64,
    pub witness_pair: Option<(Vec<f64>, Vec<f64>)>,
    /// Index of the witness in evaluation order: designated, extra, sampled.
    pub witness_index: Option<usize>,
    pub pairs_tested: usize,
    /// Pairs skipped because a summand had zero or infinite radial value.
    pub pairs_skipped: usize,
    pub mode: CertificateMode,
    pub seed: u64,
    /// Some tested pair admits no positive exponent.
    pub violation: bool,
}

/// Estimates the critical exponent from the designated pairs, `extra_pairs`
/// and `pairs` random boundary pairs.
///
/// Sampled pairs take two uniform directions (redrawn while degenerate); the
/// first point is on the boundary, the second on the boundary (even index) or
/// scaled by a uniform factor in (0, 1] (odd index).
pub fn critical_exponent(
    body: &StarBody,
    pairs: usize,
    seed: u64,
    extra_pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<ExponentCertificate> {
    if pairs < 1 {
        return invalid("critical exponent needs at least one sampled pair");
    }
    certify(body, pairs, seed, extra_pairs)
}

/// [`critical_exponent`] over the designated and extra pairs only.
pub fn designated_exponent(
    body: &StarBody,
    extra_pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<ExponentCertificate> {
    certify(body, 0, 0, extra_pairs)
}

enum Candidate {
    Fixed(Vec<f64>, Vec<f64>),
    Sampled(usize),
}

fn sampled_pair(body: &StarBody, seed: u64, i: usize) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let mut rng = stream_rng(seed, mix(PAIR_TAG, i as u64));
    let Some((x, y)) = boundary_pair(body, &mut rng)? else {
        return Ok(None);
    };
    let scale = if i % 2 == 0 { 1.0 } else { 1.0 - rng.random::<f64>() };
    Ok(Some((x, y.into_iter().map(|c| c * scale).collect())))
}

/// Two boundary points in uniform directions, redrawing directions with zero
/// or infinite radial value up to [`MAX_REDRAWS`] times.
fn boundary_pair<R: Rng>(body: &StarBody, rng: &mut R) -> Result<Option<(Vec<f64>, Vec<f64>)>> {
    let n = body.dim();
    let mut u = vec![0.0; n];
    let mut draw = |rng: &mut R| -> Result<Option<Vec<f64>>> {
        for _ in 0..MAX_REDRAWS {
            unit_vector(rng, &mut u);
            if let Some(x) = body.boundary_point(&u)? {
                return Ok(Some(x));
            }
        }
        Ok(None)
    };
    let Some(x) = draw(rng)? else { return Ok(None) };
    let Some(y) = draw(rng)? else { return Ok(None) };
    Ok(Some((x, y)))
}

fn degenerate(body: &StarBody, x: &[f64]) -> Result<bool> {
    let f = body.functional(x)?;
    Ok(f == 0.0 || f.is_infinite())
}

fn certify(
    body: &StarBody,
    pairs: usize,
    seed: u64,
    extra_pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<ExponentCertificate> {
    let n = body.dim();
    for (x, y) in extra_pairs {
        check_dim(n, x.len())?;
        check_dim(n, y.len())?;
    }
    let mut candidates: Vec<Candidate> = designated_pairs(n)
        .into_iter()
        .chain(extra_pairs.iter().cloned())
        .map(|(x, y)| Candidate::Fixed(x, y))
        .collect();
    candidates.extend((0..pairs).map(Candidate::Sampled));

    let results: Vec<Option<(PairExponent, Vec<f64>, Vec<f64>)>> = candidates
        .into_par_iter()
        .map(|cand| {
            let (x, y) = match cand {
                Candidate::Fixed(x, y) => (x, y),
                Candidate::Sampled(i) => match sampled_pair(body, seed, i)? {
                    Some(p) => p,
                    None => return Ok(None),
                },
            };
            if degenerate(body, &x)? || degenerate(body, &y)? {
                return Ok(None);
            }
            Ok(Some((pair_critical_exponent(body, &x, &y)?, x, y)))
        })
        .collect::<Result<_>>()?;

    let mut cert = ExponentCertificate {
        q_hat: f64::INFINITY,
        witness_pair: None,
        witness_index: None,
        pairs_tested: 0,
        pairs_skipped: 0,
        mode: if pairs > 0 { CertificateMode::Sampled } else { CertificateMode::DesignatedPairs },
        seed,
        violation: false,
    };
    for (i, r) in results.into_iter().enumerate() {
        let Some((pe, x, y)) = r else {
            cert.pairs_skipped += 1;
            continue;
        };
        cert.pairs_tested += 1;
        cert.violation |= pe.violation;
        if pe.q < cert.q_hat || cert.witness_pair.is_none() {
            cert.q_hat = pe.q;
            cert.witness_pair = Some((x, y));
            cert.witness_index = Some(i);
        }
    }
    Ok(cert)
}

/// Samples boundary pairs and weights `t`, and checks that the p-convex
/// combination `t^{1/p} x + (1-t)^{1/p} y` lies in the body.
///
/// The designated pairs, scaled to the boundary and combined at `t = 1/2`,
/// are checked first; then `trials` random boundary pairs with uniform `t`.
/// Directions with zero or infinite radial value are redrawn.
pub fn verify_p_convexity(body: &StarBody, p: f64, trials: usize, seed: u64) -> Result<ViolationReport> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p-convexity check needs 0 < p <= 1, got {p}"));
    }
    let n = body.dim();
    let to_boundary = |x: &[f64]| -> Result<Option<Vec<f64>>> {
        let f = body.functional(x)?;
        if f == 0.0 || f.is_infinite() {
            return Ok(None);
        }
        Ok(Some(x.iter().map(|c| c / f).collect()))
    };
    let check = |x: Vec<f64>, y: Vec<f64>, t: f64| -> Result<Option<Violation>> {
        let z = p_convex_combination(&x, &y, t, p)?;
        let lhs = body.functional(&z)?;
        let excess = lhs - 1.0 - MEMBERSHIP_SLACK;
        Ok((excess > 0.0).then(|| Violation { x, y, weight: t, lhs, rhs: 1.0, excess }))
    };

    let designated = designated_pairs(n);
    let fixed: Vec<Option<Option<Violation>>> = designated
        .par_iter()
        .map(|(x, y)| {
            let (Some(x), Some(y)) = (to_boundary(x)?, to_boundary(y)?) else {
                return Ok(None);
            };
            Ok(Some(check(x, y, 0.5)?))
        })
        .collect::<Result<_>>()?;
    let sampled: Vec<Option<Option<Violation>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, mix(TRIAL_TAG, i as u64));
            let Some((x, y)) = boundary_pair(body, &mut rng)? else {
                return Ok(None);
            };
            let t: f64 = rng.random();
            Ok(Some(check(x, y, t)?))
        })
        .collect::<Result<_>>()?;
    Ok(ViolationReport::collect(seed, fixed.into_iter().chain(sampled).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::starbody::{make_ball, make_lp_ball, PBallSpec};

    fn lp(p: f64, n: usize) -> StarBody {
        make_lp_ball(&PBallSpec::new(p, n).unwrap()).unwrap()
    }

    #[test]
    fn lp_coordinate_pair() {
        let b = lp(0.5, 3);
        let pe = pair_critical_exponent(&b, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap();
        assert!((pe.q - 0.5).abs() < 1e-9);
        assert!(pair_satisfies(&b, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], pe.q - 1e-9).unwrap());
        assert!(!pair_satisfies(&b, &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], pe.q + 1e-9).unwrap());
    }

    #[test]
    fn collinear_pair_has_exponent_one() {
        let b = make_ball(3).unwrap();
        let x = [0.3, 0.4, 0.1];
        let pe = pair_critical_exponent(&b, &x, &x).unwrap();
        assert!((pe.q - 1.0).abs() < 1e-9);
    }

    #[test]
    fn special_cases() {
        assert_eq!(pair_exponent_from_norms(1.0, 1.0, 1.0).unwrap().q, f64::INFINITY);
        let v = pair_exponent_from_norms(1.0, 1.0, f64::INFINITY).unwrap();
        assert!(v.violation && v.q == 0.0);
        assert!(pair_exponent_from_norms(f64::INFINITY, 1.0, 2.0).is_err());
        assert_eq!(pair_exponent_from_norms(1.0, 1.0, 1.0 + 1e-20).unwrap().q, f64::INFINITY);
    }

    #[test]
    fn designated_pair_list() {
        let d = designated_pairs(3);
        assert_eq!(d.len(), 12);
        assert_eq!(d[0], (vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]));
        assert_eq!(d[3], (vec![1.0, 1.0, 0.0], vec![-1.0, 1.0, 0.0]));
    }

    #[test]
    fn certificates() {
        let c = critical_exponent(&make_ball(3).unwrap(), 200, 1, &[]).unwrap();
        assert!(c.q_hat >= 1.0 - 1e-6);
        let c = critical_exponent(&lp(0.5, 3), 200, 1, &[]).unwrap();
        assert!((c.q_hat - 0.5).abs() < 1e-6);
        assert_eq!(c.witness_index, Some(0));
        assert_eq!(c.pairs_tested, 212);
        assert!(critical_exponent(&lp(0.5, 3), 0, 1, &[]).is_err());
        let d = designated_exponent(&lp(0.5, 3), &[]).unwrap();
        assert_eq!(d.mode, CertificateMode::DesignatedPairs);
    }

    #[test]
    fn sampler_on_lp_balls() {
        let b = lp(0.5, 4);
        assert!(verify_p_convexity(&b, 0.5, 2000, 3).unwrap().passed());
        let r = verify_p_convexity(&b, 0.6, 200, 3).unwrap();
        assert!(!r.passed());
        assert!(verify_p_convexity(&b, 1.5, 10, 3).is_err());
    }
}
