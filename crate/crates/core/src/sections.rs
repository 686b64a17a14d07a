//! Central sections of star bodies.
//!
//! Every section quantity is a polar integral over the unit sphere of the
//! section subspace. For an m-dimensional subspace `F`,
//!
//! ```text
//! |K ∩ F|_m         = (1/m) ∫_{S(F)} ρ_K(v)^m dv
//! μ_m(K ∩ F)        =       ∫_{S(F)} ∫_0^{ρ_K(v)} f(r v) r^{m-1} dr dv
//! ```
//!
//! so only the radial oracle of the body is ever consulted. The sphere
//! integral is done either by a fixed product rule (m ≤ 3) or by Monte Carlo
//! over uniformly distributed directions.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::measures::Density;
use crate::quadrature::{composite_nodes, integrate, sphere_area};
use crate::rng::{direction_stream, mix, stream_rng, unit_vector, CHUNK};
use crate::starbody::{Direction, StarBody};

/// Panels of the 16-point rule on the circle: 2048 nodes.
pub const CIRCLE_PANELS: usize = 128;
/// Panels of the 16-point rule in the polar coordinate on S^2: 256 nodes.
pub const SPHERE_POLAR_PANELS: usize = 16;
/// Trapezoid nodes in the azimuth on S^2.
pub const SPHERE_AZIMUTH_NODES: usize = 512;
/// Relative accuracy requested from ray integrals.
pub const RAY_REL_TOL: f64 = 1e-12;
/// Relative accuracy a ray integral must reach to be accepted.
pub const RAY_ACCEPT_TOL: f64 = 1e-9;

const SPHERE_SAMPLE_TAG: u64 = 0x5348_4552_4553;

/// How to integrate over the sphere of a section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "engine", rename_all = "snake_case")]
pub enum Engine {
    /// Deterministic product rule; available for section dimension ≤ 3.
    Quadrature,
    /// Uniform directions on the section sphere.
    MonteCarlo { samples: usize, seed: u64 },
}

impl Engine {
    /// Quadrature when the section sphere has dimension ≤ 2, Monte Carlo otherwise.
    pub fn auto(section_dim: usize, samples: usize, seed: u64) -> Engine {
        if section_dim <= 3 {
            Engine::Quadrature
        } else {
            Engine::MonteCarlo { samples, seed }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RadialQuadrature,
    MonteCarlo,
}

/// A section volume or mass with its error estimate and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionEstimate {
    #[serde(with = "crate::serde_ext")]
    pub value: f64,
    /// Zero for quadrature; the standard error of the mean for Monte Carlo.
    #[serde(with = "crate::serde_ext")]
    pub std_error: f64,
    pub method: Method,
    /// Quadrature nodes or Monte Carlo samples used.
    pub samples: usize,
    pub seed: Option<u64>,
    /// Set when some direction of the section had infinite radial value.
    pub unbounded: bool,
}

/// A linear subspace given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vec<f64>>,
}

impl Subspace {
    /// Accepts a basis whose Gram matrix is the identity within 1e-10.
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let ambient = match basis.first() {
            Some(b) => b.len(),
            None => return invalid("subspace needs at least one basis vector"),
        };
        for (i, a) in basis.iter().enumerate() {
            check_dim(ambient, a.len())?;
            for (j, b) in basis.iter().enumerate().skip(i) {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot(a, b) - expected).abs() > 1e-10 {
                    return invalid(format!("basis is not orthonormal at ({i}, {j})"));
                }
            }
        }
        Ok(Self { ambient, basis })
    }

    /// Gram–Schmidt (with one re-orthogonalization pass) of independent vectors.
    pub fn orthonormalize(vectors: &[Vec<f64>]) -> Result<Self> {
        let ambient = vectors.first().map(Vec::len).unwrap_or(0);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        for v in vectors {
            check_dim(ambient, v.len())?;
            let scale = norm(v);
            match residual(&basis, v) {
                Some(r) if scale > 0.0 && norm(&r) > 1e-10 * scale => {
                    let nr = norm(&r);
                    basis.push(r.into_iter().map(|x| x / nr).collect());
                }
                _ => return invalid("vectors are linearly dependent"),
            }
        }
        Self::new(basis)
    }

    /// Orthonormal basis of `u^⊥`: the columns of the Householder reflection
    /// sending `u` to `±e_k` (k = largest coordinate), skipping column k.
    pub fn complement_of(u: &[f64]) -> Result<Self> {
        let n = u.len();
        if n < 2 {
            return invalid("hyperplane complement needs dimension >= 2");
        }
        let len = norm(u);
        if len == 0.0 || !len.is_finite() {
            return invalid("normal vector must be non-zero and finite");
        }
        let u: Vec<f64> = u.iter().map(|x| x / len).collect();
        let k = (0..n)
            .max_by(|&a, &b| u[a].abs().total_cmp(&u[b].abs()).then(b.cmp(&a)))
            .expect("n >= 2");
        let s = if u[k] >= 0.0 { 1.0 } else { -1.0 };
        let mut w = u.clone();
        w[k] -= s;
        let w2 = dot(&w, &w);
        let basis = (0..n)
            .filter(|&j| j != k)
            .map(|j| {
                let mut col = vec![0.0; n];
                col[j] = 1.0;
                if w2 > 0.0 {
                    let c = 2.0 * w[j] / w2;
                    col.iter_mut().zip(&w).for_each(|(x, wi)| *x -= c * wi);
                }
                col
            })
            .collect();
        Self::new(basis)
    }

    /// Orthogonal complement, built by pivoted Gram–Schmidt over the
    /// coordinate vectors.
    pub fn orthogonal_complement(&self) -> Result<Self> {
        let n = self.ambient;
        let mut basis = self.basis.clone();
        let mut extra = Vec::new();
        for _ in self.dim()..n {
            let best = (0..n)
                .filter_map(|j| {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    residual(&basis, &e)
                })
                .max_by(|a, b| norm(a).total_cmp(&norm(b)))
                .ok_or_else(|| Error::Numerical("complement construction failed".into()))?;
            let nb = norm(&best);
            let v: Vec<f64> = best.into_iter().map(|x| x / nb).collect();
            basis.push(v.clone());
            extra.push(v);
        }
        if extra.is_empty() {
            return invalid("subspace is the whole space");
        }
        Self::new(extra)
    }

    /// `span(u, self)`; fails if `u` lies in the subspace.
    pub fn span_with(&self, u: &[f64]) -> Result<Self> {
        check_dim(self.ambient, u.len())?;
        // The existing basis is kept verbatim; u contributes the first vector.
        let r = residual(&self.basis, u).unwrap_or_default();
        let scale = norm(u);
        if scale == 0.0 || norm(&r) <= 1e-10 * scale {
            return invalid("vector lies in the subspace");
        }
        let nr = norm(&r);
        let mut basis = vec![r.into_iter().map(|x| x / nr).collect::<Vec<f64>>()];
        basis.extend(self.basis.iter().cloned());
        Self::new(basis)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// `Σ c_i b_i`.
    pub fn lift(&self, coords: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), coords.len())?;
        let mut out = vec![0.0; self.ambient];
        lift_into(&self.basis, coords, &mut out);
        Ok(out)
    }

    /// Coordinates of the orthogonal projection of `x` in this basis.
    pub fn coordinates(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.ambient, x.len())?;
        Ok(self.basis.iter().map(|b| dot(b, x)).collect())
    }
}

fn lift_into(basis: &[Vec<f64>], coords: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = 0.0);
    for (c, b) in coords.iter().zip(basis) {
        out.iter_mut().zip(b).for_each(|(x, bi)| *x += c * bi);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

// v minus its projection onto span(basis), re-orthogonalized once.
fn residual(basis: &[Vec<f64>], v: &[f64]) -> Option<Vec<f64>> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, &r);
            r.iter_mut().zip(b).for_each(|(x, bi)| *x -= c * bi);
        }
    }
    Some(r)
}

/// `∫_0^{ρ(u)} f(r u) r^{k-1} dr` along a unit direction.
///
/// For the uniform density this is `ρ(u)^k / k` exactly; otherwise adaptive
/// Gauss–Kronrod to 1e-12 relative, rejected if the error estimate exceeds
/// 1e-9 relative.
pub fn ray_mass(body: &StarBody, density: &Density, u: &Direction, k: usize) -> Result<f64> {
    check_dim(body.dim(), u.dim())?;
    check_dim(body.dim(), density.dim())?;
    ray_mass_unit(body, density, u.as_slice(), k)
}

pub(crate) fn ray_mass_unit(body: &StarBody, density: &Density, u: &[f64], k: usize) -> Result<f64> {
    if k < 1 {
        return invalid("ray mass needs k >= 1");
    }
    let rho = body.radial_unit(u)?;
    if rho == 0.0 {
        return Ok(0.0);
    }
    if density.is_uniform() {
        return Ok(rho.powi(k as i32) / k as f64);
    }
    if rho.is_infinite() {
        return Err(Error::Unsupported(format!(
            "ray mass of {} along an unbounded direction",
            density.label()
        )));
    }
    let mut point = vec![0.0; u.len()];
    let integrand = |r: f64| {
        point.iter_mut().zip(u).for_each(|(x, ui)| *x = r * ui);
        density.weight_unchecked(&point) * r.powi(k as i32 - 1)
    };
    let result = integrate(integrand, 0.0, rho, RAY_REL_TOL, 0.0, 4000).map_err(|e| match e {
        Error::NonFinite { value, location, .. } => Error::NonFinite {
            context: format!("density {} along ray", density.label()),
            value,
            location: location.iter().flat_map(|r| u.iter().map(move |ui| r * ui)).collect(),
        },
        other => other,
    })?;
    if result.error > RAY_ACCEPT_TOL * result.value.abs() {
        return Err(Error::Numerical(format!(
            "ray integral did not converge: value {}, error {}",
            result.value, result.error
        )));
    }
    Ok(result.value)
}

/// Integral of `g` over the unit sphere of `span(basis)`.
fn sphere_integral<G>(basis: &[Vec<f64>], engine: &Engine, stream: u64, g: G) -> Result<SectionEstimate>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    let m = basis.len();
    let n = basis[0].len();
    let estimate = match *engine {
        Engine::Quadrature => {
            let (value, nodes) = match m {
                1 => {
                    let minus: Vec<f64> = basis[0].iter().map(|x| -x).collect();
                    (g(&basis[0])? + g(&minus)?, 2)
                }
                2 => circle_rule(basis, n, &g)?,
                3 => sphere_rule(basis, n, &g)?,
                _ => {
                    return Err(Error::Unsupported(format!(
                        "quadrature on S^{} (use Monte Carlo)",
                        m - 1
                    )))
                }
            };
            SectionEstimate {
                value,
                std_error: 0.0,
                method: Method::RadialQuadrature,
                samples: nodes,
                seed: None,
                unbounded: false,
            }
        }
        Engine::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return invalid("Monte Carlo needs at least one sample");
            }
            let chunks = samples.div_ceil(CHUNK);
            let sums: Vec<(f64, f64)> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = stream_rng(seed, mix(stream, c as u64));
                    let count = CHUNK.min(samples - c * CHUNK);
                    let mut coords = vec![0.0; m];
                    let mut v = vec![0.0; n];
                    let (mut s, mut s2) = (0.0, 0.0);
                    for _ in 0..count {
                        unit_vector(&mut rng, &mut coords);
                        lift_into(basis, &coords, &mut v);
                        let y = g(&v)?;
                        s += y;
                        s2 += y * y;
                    }
                    Ok((s, s2))
                })
                .collect::<Result<_>>()?;
            let (s, s2) = sums.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
            let count = samples as f64;
            let area = sphere_area(m);
            let mean = s / count;
            let var = if samples > 1 {
                ((s2 - count * mean * mean) / (count - 1.0)).max(0.0)
            } else {
                0.0
            };
            SectionEstimate {
                value: area * mean,
                std_error: area * (var / count).sqrt(),
                method: Method::MonteCarlo,
                samples,
                seed: Some(seed),
                unbounded: false,
            }
        }
    };
    if estimate.value.is_infinite() || estimate.value.is_nan() {
        return Ok(SectionEstimate {
            value: f64::INFINITY,
            std_error: if estimate.method == Method::MonteCarlo { f64::INFINITY } else { 0.0 },
            unbounded: true,
            ..estimate
        });
    }
    Ok(estimate)
}

fn circle_rule<G>(basis: &[Vec<f64>], n: usize, g: &G) -> Result<(f64, usize)>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    let nodes = composite_nodes(0.0, 2.0 * PI, CIRCLE_PANELS);
    let per_panel = nodes.len() / CIRCLE_PANELS;
    let sums: Vec<f64> = nodes
        .par_chunks(per_panel)
        .map(|panel| {
            let mut v = vec![0.0; n];
            let mut s = 0.0;
            for &(theta, w) in panel {
                lift_into(basis, &[theta.cos(), theta.sin()], &mut v);
                s += w * g(&v)?;
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok((sums.iter().sum(), nodes.len()))
}

// S^2 parametrized by z ∈ [-1, 1] and azimuth φ: dv = dz dφ.
fn sphere_rule<G>(basis: &[Vec<f64>], n: usize, g: &G) -> Result<(f64, usize)>
where
    G: Fn(&[f64]) -> Result<f64> + Sync,
{
    let zs = composite_nodes(-1.0, 1.0, SPHERE_POLAR_PANELS);
    let dphi = 2.0 * PI / SPHERE_AZIMUTH_NODES as f64;
    let trig: Vec<(f64, f64)> = (0..SPHERE_AZIMUTH_NODES)
        .map(|j| {
            let phi = j as f64 * dphi;
            (phi.cos(), phi.sin())
        })
        .collect();
    let rows: Vec<f64> = zs
        .par_iter()
        .map(|&(z, wz)| {
            let rad = (1.0 - z * z).max(0.0).sqrt();
            let mut v = vec![0.0; n];
            let mut s = 0.0;
            for &(c, sn) in &trig {
                lift_into(basis, &[rad * c, rad * sn, z], &mut v);
                s += g(&v)?;
            }
            Ok(wz * dphi * s)
        })
        .collect::<Result<_>>()?;
    Ok((rows.iter().sum(), zs.len() * SPHERE_AZIMUTH_NODES))
}

fn volume_of(body: &StarBody, subspace: &Subspace, engine: &Engine, stream: u64) -> Result<SectionEstimate> {
    check_dim(body.dim(), subspace.ambient_dim())?;
    let m = subspace.dim();
    sphere_integral(subspace.basis(), engine, stream, |v| {
        Ok(body.radial_unit(v)?.powi(m as i32) / m as f64)
    })
}

/// `|K ∩ u^⊥|_{n-1}`.
pub fn section_volume(body: &StarBody, normal: &Direction, engine: &Engine) -> Result<SectionEstimate> {
    check_dim(body.dim(), normal.dim())?;
    let hyperplane = Subspace::complement_of(normal.as_slice())?;
    volume_of(body, &hyperplane, engine, direction_stream(normal.as_slice()))
}

/// `μ_{n-1}(K ∩ u^⊥)` for the measure with the given density.
pub fn weighted_section_mass(
    body: &StarBody,
    density: &Density,
    normal: &Direction,
    engine: &Engine,
) -> Result<SectionEstimate> {
    check_dim(body.dim(), normal.dim())?;
    check_dim(body.dim(), density.dim())?;
    let hyperplane = Subspace::complement_of(normal.as_slice())?;
    let m = hyperplane.dim();
    sphere_integral(hyperplane.basis(), engine, direction_stream(normal.as_slice()), |v| {
        ray_mass_unit(body, density, v, m)
    })
}

/// `|K ∩ F|_k` for a k-dimensional subspace F.
pub fn subspace_section_volume(
    body: &StarBody,
    subspace: &Subspace,
    engine: &Engine,
) -> Result<SectionEstimate> {
    let stream = subspace
        .basis()
        .iter()
        .fold(0x5eb5_u64, |acc, b| mix(acc, direction_stream(b)));
    volume_of(body, subspace, engine, stream)
}

/// `count` uniform points on S^{m-1}, deterministic in `seed`.
pub fn sphere_sample(m: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if m < 1 {
        return invalid("sphere sample needs m >= 1");
    }
    let chunks = count.div_ceil(CHUNK);
    let out: Vec<Vec<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, mix(SPHERE_SAMPLE_TAG, c as u64));
            let len = CHUNK.min(count - c * CHUNK);
            (0..len)
                .map(|_| {
                    let mut v = vec![0.0; m];
                    unit_vector(&mut rng, &mut v);
                    v
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::make_gaussian;
    use crate::starbody::{make_ball, make_cube};

    fn e(n: usize, i: usize) -> Direction {
        Direction::axis(n, i).unwrap()
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let u = [0.3, -0.5, 0.2, 0.7];
        let c = Subspace::complement_of(&u).unwrap();
        assert_eq!(c.dim(), 3);
        for b in c.basis() {
            assert!(dot(b, &u).abs() < 1e-14);
        }
    }

    #[test]
    fn complement_of_axis_is_coordinate_plane() {
        let c = Subspace::complement_of(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(c.basis(), &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
    }

    #[test]
    fn subspace_validation() {
        assert!(Subspace::new(vec![vec![1.0, 0.0], vec![1.0, 1.0]]).is_err());
        assert!(Subspace::orthonormalize(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]]).is_err());
        let s = Subspace::orthonormalize(&[vec![1.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]).unwrap();
        assert!((dot(&s.basis()[0], &s.basis()[1])).abs() < 1e-15);
        let perp = s.orthogonal_complement().unwrap();
        assert_eq!(perp.dim(), 1);
        assert!((perp.basis()[0][2].abs() - 1.0).abs() < 1e-12);
        assert!(s.span_with(&[1.0, 0.0, 0.0]).is_err());
        assert_eq!(s.span_with(&[0.0, 0.0, 2.0]).unwrap().dim(), 3);
    }

    #[test]
    fn ray_mass_values() {
        let ball = make_ball(3).unwrap();
        let u = e(3, 1);
        let uniform = Density::uniform(3).unwrap();
        assert!((ray_mass(&ball, &uniform, &u, 2).unwrap() - 0.5).abs() < 1e-15);
        let g = make_gaussian(3).unwrap();
        let m = ray_mass(&ball, &g, &u, 1).unwrap();
        assert!((m - 0.855_624_391_892_148_9).abs() < 1e-12);
        assert!(ray_mass(&ball, &g, &u, 0).is_err());
    }

    #[test]
    fn ray_mass_nonfinite_density() {
        let ball = make_ball(2).unwrap();
        let bad = Density::new(2, crate::measures::Concavity::LogConcave, true, "bad", |x: &[f64]| {
            if x[0] > 0.5 { f64::NAN } else { 1.0 }
        })
        .unwrap();
        let err = ray_mass(&ball, &bad, &e(2, 0), 1).unwrap_err();
        match err {
            Error::NonFinite { location, .. } => assert!(location[0] > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ball_and_cube_sections() {
        let ball = make_ball(3).unwrap();
        let v = section_volume(&ball, &e(3, 0), &Engine::Quadrature).unwrap();
        assert!((v.value - PI).abs() < 1e-12);
        assert_eq!(v.std_error, 0.0);
        assert_eq!(v.samples, 2048);

        let cube = make_cube(3).unwrap();
        let v = section_volume(&cube, &e(3, 2), &Engine::Quadrature).unwrap();
        assert!((v.value - 4.0).abs() < 1e-12, "{}", v.value);
    }

    #[test]
    fn sphere_rule_on_four_ball() {
        let ball = make_ball(4).unwrap();
        let v = section_volume(&ball, &e(4, 3), &Engine::Quadrature).unwrap();
        assert!((v.value - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn segment_section_in_plane() {
        let cube = make_cube(2).unwrap();
        let v = section_volume(&cube, &e(2, 0), &Engine::Quadrature).unwrap();
        assert!((v.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_unavailable_in_high_dimension() {
        let ball = make_ball(5).unwrap();
        assert!(matches!(
            section_volume(&ball, &e(5, 0), &Engine::Quadrature),
            Err(Error::Unsupported(_))
        ));
        let mc = section_volume(&ball, &e(5, 0), &Engine::MonteCarlo { samples: 1000, seed: 1 }).unwrap();
        assert!((mc.value - PI * PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn unbounded_section_is_flagged() {
        let spiky = StarBody::new(3, true, "spiky", |u: &[f64]| {
            Ok(if u[0].abs() > 0.99 { f64::INFINITY } else { 1.0 })
        });
        let v = section_volume(&spiky, &e(3, 2), &Engine::Quadrature).unwrap();
        assert!(v.unbounded && v.value.is_infinite());
    }

    #[test]
    fn sphere_samples() {
        let s = sphere_sample(1, 100, 3).unwrap();
        assert!(s.iter().all(|v| v[0] == 1.0 || v[0] == -1.0));
        assert_eq!(sphere_sample(3, 20_000, 5).unwrap(), sphere_sample(3, 20_000, 5).unwrap());
        assert_ne!(sphere_sample(3, 10, 5).unwrap(), sphere_sample(3, 10, 6).unwrap());
    }
}
