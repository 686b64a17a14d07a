use serde::{Deserialize, Serialize};

use super::StarBody;
use crate::error::{invalid, Result};

/// Parameters of the ℓ_p unit ball `B_p^n` for `0 < p ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PBallSpec {
    pub p: f64,
    pub n: usize,
}

impl PBallSpec {
    pub fn new(p: f64, n: usize) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return invalid(format!("lp ball needs 0 < p <= 1, got p = {p}"));
        }
        if n < 2 {
            return invalid(format!("lp ball needs n >= 2, got n = {n}"));
        }
        Ok(Self { p, n })
    }
}

/// The Euclidean unit ball `B_2^n`.
pub fn make_ball(n: usize) -> Result<StarBody> {
    if n < 1 {
        return invalid("ball needs n >= 1");
    }
    Ok(StarBody::new(n, true, format!("ball:n={n}"), |_u: &[f64]| Ok(1.0)))
}

/// `B_p^n = {x : Σ|x_i|^p ≤ 1}`, radial `(Σ|u_i|^p)^{-1/p}`.
pub fn make_lp_ball(spec: &PBallSpec) -> Result<StarBody> {
    let spec = PBallSpec::new(spec.p, spec.n)?;
    let p = spec.p;
    Ok(StarBody::new(
        spec.n,
        true,
        format!("lp:p={},n={}", p, spec.n),
        move |u: &[f64]| {
            let s: f64 = u.iter().map(|x| x.abs().powf(p)).sum();
            Ok(s.powf(-1.0 / p))
        },
    ))
}

/// The cube `[-1, 1]^n`, radial `1 / max|u_i|`.
pub fn make_cube(n: usize) -> Result<StarBody> {
    if n < 1 {
        return invalid("cube needs n >= 1");
    }
    Ok(StarBody::new(n, true, format!("cube:n={n}"), |u: &[f64]| {
        let m = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok(1.0 / m)
    }))
}
