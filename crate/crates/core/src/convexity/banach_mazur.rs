//! Banach–Mazur distance bounds for the body K and its intersection body.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::starbody::{Direction, StarBody};

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("p must lie in (0, 1], got {p}"));
    }
    Ok(())
}

/// `2^{(1-p)/p} √n`, an upper bound for `d_BM(K, B_2^n)`.
pub fn bm_upper_bound_k(p: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    if n < 1 {
        return invalid("n must be positive");
    }
    Ok(2f64.powf((1.0 - p) / p) * (n as f64).sqrt())
}

/// `(2^{1/p}/2)^{n-1} / (n-1)`, a lower bound for `d_BM(IK, B_2^n)`.
pub fn bm_lower_bound_ik(p: f64, n: usize) -> Result<f64> {
    check_p(p)?;
    if n < 3 {
        return invalid(format!("lower bound needs n >= 3, got {n}"));
    }
    Ok((2f64.powf(1.0 / p) / 2.0).powi(n as i32 - 1) / (n - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanachMazurBounds {
    pub lower_ik: f64,
    pub upper_k: f64,
    pub c: f64,
    pub n: usize,
    pub p: f64,
    /// `c^n · upper_k < lower_ik`.
    pub chain_holds: bool,
}

/// Checks `c^n · d_BM(K, B_2^n) < d_BM(IK, B_2^n)` through the two bounds.
/// Requires `1 < c < 2^{1/p - 1}`.
pub fn bm_separation_check(p: f64, c: f64, n: usize) -> Result<BanachMazurBounds> {
    check_p(p)?;
    let c_max = 2f64.powf(1.0 / p - 1.0);
    if !(c > 1.0 && c < c_max) {
        return invalid(format!("c must lie in (1, {c_max}), got {c}"));
    }
    let upper_k = bm_upper_bound_k(p, n)?;
    let lower_ik = bm_lower_bound_ik(p, n)?;
    // Compared in logs so large n cannot overflow.
    let lhs = n as f64 * c.ln() + upper_k.ln();
    Ok(BanachMazurBounds { lower_ik, upper_k, c, n, p, chain_holds: lhs < lower_ik.ln() })
}

/// Radial value in direction `u` of the convex hull of the planar section of
/// `body` by `span(u, v)`, from `grid` equally spaced boundary points.
///
/// Returns +∞ if any sampled direction is unbounded.
pub fn convex_hull_radial_2d(body: &StarBody, u: &Direction, v: &Direction, grid: usize) -> Result<f64> {
    check_dim(body.dim(), u.dim())?;
    check_dim(body.dim(), v.dim())?;
    let uv: f64 = u.as_slice().iter().zip(v.as_slice()).map(|(a, b)| a * b).sum();
    if uv.abs() > 1e-9 {
        return invalid(format!("directions must be orthogonal, got <u, v> = {uv}"));
    }
    if grid < 3 {
        return invalid("hull grid needs at least 3 points");
    }
    let mut points = vec![(0.0, 0.0)];
    let mut w = vec![0.0; body.dim()];
    let mut rho_u = 0.0;
    for j in 0..grid {
        let theta = 2.0 * PI * j as f64 / grid as f64;
        let (c, s) = if j == 0 { (1.0, 0.0) } else { (theta.cos(), theta.sin()) };
        w.iter_mut()
            .zip(u.as_slice().iter().zip(v.as_slice()))
            .for_each(|(wi, (a, b))| *wi = c * a + s * b);
        let r = body.radial_unit(&w)?;
        if r.is_infinite() {
            return Ok(f64::INFINITY);
        }
        if j == 0 {
            rho_u = r;
        }
        points.push((r * c, r * s));
    }
    let hull = convex_hull(points);
    let mut best = rho_u;
    for i in 0..hull.len() {
        let (p, q) = (hull[i], hull[(i + 1) % hull.len()]);
        if (p.1 <= 0.0 && q.1 >= 0.0) || (p.1 >= 0.0 && q.1 <= 0.0) {
            let t = if p.1 == q.1 {
                p.0.max(q.0)
            } else {
                let s = p.1 / (p.1 - q.1);
                p.0 + s * (q.0 - p.0)
            };
            best = best.max(t);
        }
    }
    Ok(best)
}

// Andrew's monotone chain; counter-clockwise, collinear points dropped.
fn convex_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in [&pts[..], &pts.iter().rev().copied().collect::<Vec<_>>()[..]] {
        let floor = hull.len();
        for &p in pass {
            while hull.len() >= floor + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}
