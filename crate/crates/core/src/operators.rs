//! Body-valued operators: intersection bodies, weighted intersection bodies,
//! Ball-type bodies and the subspace-section body.
//!
//! Each operator returns a [`StarBody`] whose radial oracle runs a section or
//! ray integral on demand. Results are cached per direction, keyed by the
//! direction rounded to 12 decimals.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{check_dim, invalid, Error, Result};
use crate::measures::Density;
use crate::rng::quantize;
use crate::sections::{
    ray_mass_unit, section_volume, subspace_section_volume, weighted_section_mass, Engine,
    SectionEstimate, Subspace,
};
use crate::starbody::{Direction, StarBody};

/// Concurrent direction cache. Races only ever insert identical values.
#[derive(Debug, Default)]
pub struct DirectionCache {
    map: RwLock<HashMap<Vec<i64>, f64>>,
}

impl DirectionCache {
    pub fn get_or_try_insert<F>(&self, u: &[f64], compute: F) -> Result<f64>
    where
        F: FnOnce() -> Result<f64>,
    {
        let key = quantize(u);
        if let Some(v) = self.map.read().expect("cache lock").get(&key) {
            return Ok(*v);
        }
        let v = compute()?;
        self.map.write().expect("cache lock").insert(key, v);
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn estimate_value(e: SectionEstimate) -> f64 {
    if e.unbounded {
        f64::INFINITY
    } else {
        e.value
    }
}

fn cached_body<F>(dim: usize, symmetric: bool, label: String, compute: F) -> StarBody
where
    F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
{
    let cache = Arc::new(DirectionCache::default());
    StarBody::new(dim, symmetric, label, move |u| cache.get_or_try_insert(u, || compute(u)))
}

/// `IK` with `ρ_{IK}(u) = |K ∩ u^⊥|`.
pub fn intersection_body(body: &StarBody, engine: Engine) -> Result<StarBody> {
    if body.dim() < 2 {
        return invalid("intersection body needs dimension >= 2");
    }
    let k = body.clone();
    Ok(cached_body(body.dim(), true, format!("I({})", body.label()), move |u| {
        let dir = Direction::new(u.to_vec())?;
        Ok(estimate_value(section_volume(&k, &dir, &engine)?))
    }))
}

/// `I_μ K` with `ρ(u) = μ_{n-1}(K ∩ u^⊥)`.
pub fn weighted_intersection_body(body: &StarBody, density: &Density, engine: Engine) -> Result<StarBody> {
    check_dim(body.dim(), density.dim())?;
    if body.dim() < 2 {
        return invalid("intersection body needs dimension >= 2");
    }
    let k = body.clone();
    let f = density.clone();
    let symmetric = body.is_symmetric() && density.is_symmetric();
    let label = format!("I[{}]({})", density.label(), body.label());
    Ok(cached_body(body.dim(), symmetric, label, move |u| {
        let dir = Direction::new(u.to_vec())?;
        Ok(estimate_value(weighted_section_mass(&k, &f, &dir, &engine)?))
    }))
}

/// The Ball-type body with `‖x‖_L = [∫_0^{‖x‖_K^{-1}} f(rx) r^{k-1} dr]^{-1/k}`.
///
/// Directions with zero ray mass have radial value 0.
pub fn ball_body(body: &StarBody, density: &Density, k: usize) -> Result<StarBody> {
    ball_body_scaled(body, density, k, 1.0)
}

/// [`ball_body`] with the ray integral multiplied by `scale` before the root.
///
/// `scale = k` with `k = n - 1` gives the normalization under which
/// `|L ∩ u^⊥| = μ_{n-1}(K ∩ u^⊥)`.
pub fn ball_body_scaled(body: &StarBody, density: &Density, k: usize, scale: f64) -> Result<StarBody> {
    check_dim(body.dim(), density.dim())?;
    if k < 1 {
        return invalid("ball body needs k >= 1");
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return invalid(format!("scale must be positive, got {scale}"));
    }
    let kb = body.clone();
    let f = density.clone();
    let symmetric = body.is_symmetric() && density.is_symmetric();
    let label = format!("L[{},k={}]({})", density.label(), k, body.label());
    Ok(cached_body(body.dim(), symmetric, label, move |u| {
        let mass = ray_mass_unit(&kb, &f, u, k)?;
        Ok((scale * mass).powf(1.0 / k as f64))
    }))
}

/// The body on `E^⊥` with `‖u‖ = |u| / |K ∩ span(u, E)|_k`, `k = dim E + 1`.
///
/// Its coordinates are those of the orthonormal basis in `complement`.
#[derive(Debug, Clone)]
pub struct SectionBody {
    pub body: StarBody,
    pub subspace: Subspace,
    pub complement: Subspace,
}

impl SectionBody {
    /// The functional evaluated at an ambient vector; only the component in
    /// `E^⊥` matters, and it must be non-zero.
    pub fn ambient_functional(&self, x: &[f64]) -> Result<f64> {
        let coords = self.complement.coordinates(x)?;
        let len = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
        let scale = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        if len <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidInput("vector lies in the subspace E".into()));
        }
        self.body.functional(&coords)
    }
}

pub fn subspace_section_body(body: &StarBody, subspace: &Subspace, engine: Engine) -> Result<SectionBody> {
    check_dim(body.dim(), subspace.ambient_dim())?;
    if subspace.dim() + 2 > body.dim() {
        return invalid(format!(
            "subspace of dimension {} leaves a complement of dimension < 2 in R^{}",
            subspace.dim(),
            body.dim()
        ));
    }
    let complement = subspace.orthogonal_complement()?;
    let k = body.clone();
    let e = subspace.clone();
    let perp = complement.clone();
    let label = format!("S[k={}]({})", subspace.dim() + 1, body.label());
    let section = cached_body(complement.dim(), body.is_symmetric(), label, move |c| {
        let w = perp.lift(c)?;
        let span = e.span_with(&w)?;
        Ok(estimate_value(subspace_section_volume(&k, &span, &engine)?))
    });
    Ok(SectionBody { body: section, subspace: subspace.clone(), complement })
}
