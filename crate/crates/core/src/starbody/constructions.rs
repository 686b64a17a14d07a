//! The two non-standard bodies: the p-convex body built from two opposite
//! cube faces, and the half-space-truncated rotated ℓ_p body used for the
//! s-concave sharpness example.

use serde::{Deserialize, Serialize};

use super::StarBody;
use crate::error::{invalid, Result};
use crate::root::bisect_increasing;

/// Parameters of the body
/// `K = {t^{1/p} x + (1-t)^{1/p} y : x ∈ C_1, y ∈ C_{-1}, 0 ≤ t ≤ 1}`,
/// where `C_{±1}` are the faces `x_n = ±1` of the cube `[-1, 1]^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyKSpec {
    pub p: f64,
    pub n: usize,
}

impl BodyKSpec {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return invalid(format!("bodyK needs 0 < p < 1, got p = {p}"));
        }
        if n < 3 {
            return invalid(format!("bodyK needs n >= 3, got n = {n}"));
        }
        Ok(Self { p, n })
    }
}

fn profile_residual(p: f64, t: f64, s: f64) -> f64 {
    ((s + t) / 2.0).powf(p) + ((s - t) / 2.0).max(0.0).powf(p) - 1.0
}

/// The width profile `f(t)`: the unique `s ≥ |t|` with
/// `((s+t)/2)^p + ((s-t)/2)^p = 1`.
///
/// Bisection on `[|t|, 2^{1/p}]` to 1e-12, then up to two Newton steps, each
/// kept only if it stays in the bracket and lowers the residual.
pub fn solve_f(p: f64, t: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("profile needs 0 < p <= 1, got p = {p}"));
    }
    if !(-1.0..=1.0).contains(&t) {
        return invalid(format!("profile needs t in [-1, 1], got t = {t}"));
    }
    let t = t.abs();
    let lo = t;
    let hi = 2f64.powf(1.0 / p);
    let mut s = bisect_increasing(|s| profile_residual(p, t, s), lo, hi, 1e-12)?;
    for _ in 0..2 {
        let res = profile_residual(p, t, s);
        if res == 0.0 || s <= t {
            break;
        }
        let d = 0.5 * p * (((s + t) / 2.0).powf(p - 1.0) + ((s - t) / 2.0).powf(p - 1.0));
        let next = s - res / d;
        if next.is_finite()
            && next >= lo
            && next <= hi
            && profile_residual(p, t, next).abs() < res.abs()
        {
            s = next;
        }
    }
    Ok(s)
}

/// The body `K = {f(t) z + t e_n : z ∈ [-1,1]^{n-1}, -1 ≤ t ≤ 1}`.
///
/// Along a unit `u = (u', u_n)` with `m = max|u'_i|` and `a = |u_n|`: if
/// `m ≤ a` the ray leaves through the face `|x_n| = 1`, so `ρ = 1/a`;
/// otherwise the boundary point `(rm, ra)` lies on the profile curve and
/// `ρ = [((m+a)/2)^p + ((m-a)/2)^p]^{-1/p}`.
pub fn make_body_k(spec: &BodyKSpec) -> Result<StarBody> {
    let BodyKSpec { p, n } = BodyKSpec::new(spec.p, spec.n)?;
    Ok(StarBody::new(n, true, format!("bodyK:p={p},n={n}"), move |u: &[f64]| {
        let (m, a) = split_cube_height(u);
        Ok(body_k_radial(p, m, a))
    }))
}

fn split_cube_height(u: &[f64]) -> (f64, f64) {
    let (head, last) = u.split_at(u.len() - 1);
    let m = head.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    (m, last[0].abs())
}

fn body_k_radial(p: f64, m: f64, a: f64) -> f64 {
    if m <= a {
        1.0 / a
    } else {
        let c = ((m + a) / 2.0).powf(p) + ((m - a) / 2.0).powf(p);
        c.powf(-1.0 / p)
    }
}

/// Radial function of the same body computed from the profile: the largest
/// `r ≤ 1/|u_n|` with `r·max|u'_i| ≤ f(r u_n)`, found by bisection.
///
/// Much slower than the closed form used by [`make_body_k`]; kept as an
/// independent route for cross-checks.
pub fn body_k_radial_by_profile(p: f64, u: &[f64]) -> Result<f64> {
    if u.len() < 3 {
        return invalid("bodyK needs n >= 3");
    }
    let (m, a) = split_cube_height(u);
    if m == 0.0 {
        return Ok(1.0 / a);
    }
    if a == 0.0 {
        return Ok(solve_f(p, 0.0)? / m);
    }
    let r_max = 1.0 / a;
    if r_max * m <= solve_f(p, 1.0)? {
        return Ok(r_max);
    }
    // The ray meets K in an interval [0, ρ], so the sign of the residual
    // changes exactly once on [0, r_max].
    let mut failure = None;
    let r = bisect_increasing(
        |r| match solve_f(p, (r * a).min(1.0)) {
            Ok(f) => r * m - f,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        r_max,
        1e-14,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r),
    }
}

/// `K = {x_1 ≥ 0, |(x_1+x_2)/2|^p + |(x_1-x_2)/2|^p ≤ 1, |x_i| ≤ 1 for i ≥ 3}`.
///
/// Not symmetric: every direction with `u_1 < 0` has radial value 0.
pub fn make_example2_body(p: f64, n: usize) -> Result<StarBody> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("ex2 body needs 0 < p <= 1, got p = {p}"));
    }
    if n < 2 {
        return invalid(format!("ex2 body needs n >= 2, got n = {n}"));
    }
    Ok(StarBody::new(n, false, format!("ex2:p={p},n={n}"), move |u: &[f64]| {
        if u[0] < 0.0 {
            return Ok(0.0);
        }
        let rotated = ((u[0] + u[1]).abs() / 2.0).powf(p) + ((u[0] - u[1]).abs() / 2.0).powf(p);
        let slab = u[2..].iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok(1.0 / rotated.powf(1.0 / p).max(slab))
    }))
}
