//! Star bodies described by their radial function.
//!
//! A [`StarBody`] is a radial oracle `u ↦ ρ(u)` on unit directions together
//! with dimension and symmetry metadata. The Minkowski functional is derived
//! from it: `‖x‖ = |x| / ρ(x/|x|)`.
//!
//! Radial values live in `[0, +∞]`. A zero radial value marks a direction in
//! which the body has no extent (functional `+∞`); an infinite radial value
//! marks an unbounded direction (functional `0`).

mod constructions;
pub(crate) mod spec;
mod standard;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};

pub use constructions::{
    body_k_radial_by_profile, make_body_k, make_example2_body, solve_f, BodyKSpec,
};
pub use spec::BodySpec;
pub use standard::{make_ball, make_cube, make_lp_ball, PBallSpec};

/// A unit vector in R^n, n ≥ 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `coords`; fails on zero, non-finite or one-dimensional input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return invalid(format!("direction needs dimension >= 2, got {}", coords.len()));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return invalid("direction has non-finite coordinates");
        }
        let norm = euclidean_norm(&coords);
        if norm == 0.0 {
            return invalid("zero vector has no direction");
        }
        Ok(Self(coords.into_iter().map(|x| x / norm).collect()))
    }

    /// The coordinate direction e_i (zero-based index).
    pub fn axis(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return invalid(format!("axis {i} out of range for dimension {n}"));
        }
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|x| -x).collect())
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

type RadialOracle = dyn Fn(&[f64]) -> Result<f64> + Send + Sync;

/// A star body given by its radial oracle.
///
/// The oracle receives unit vectors of length `dim` and returns a value in
/// `[0, +∞]`. Bodies are immutable and cheap to clone.
#[derive(Clone)]
pub struct StarBody {
    dim: usize,
    symmetric: bool,
    label: String,
    radial: Arc<RadialOracle>,
}

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarBody")
            .field("dim", &self.dim)
            .field("symmetric", &self.symmetric)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl StarBody {
    pub fn new<F>(dim: usize, symmetric: bool, label: impl Into<String>, radial: F) -> Self
    where
        F: Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            dim,
            symmetric,
            label: label.into(),
            radial: Arc::new(radial),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn radial(&self, u: &Direction) -> Result<f64> {
        self.radial_unit(u.as_slice())
    }

    /// Radial value at a vector the caller guarantees to be of unit length.
    pub fn radial_unit(&self, u: &[f64]) -> Result<f64> {
        check_dim(self.dim, u.len())?;
        let r = (self.radial)(u)?;
        if r.is_nan() || r < 0.0 {
            return Err(Error::NonFinite {
                context: format!("radial function of {}", self.label),
                value: r,
                location: u.to_vec(),
            });
        }
        Ok(r)
    }

    /// The Minkowski functional `‖x‖ = |x| / ρ(x/|x|)`, with `‖0‖ = 0`.
    pub fn functional(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return invalid("functional of a non-finite vector");
        }
        let norm = euclidean_norm(x);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let u: Vec<f64> = x.iter().map(|v| v / norm).collect();
        let r = self.radial_unit(&u)?;
        Ok(if r == 0.0 {
            f64::INFINITY
        } else if r.is_infinite() {
            0.0
        } else {
            norm / r
        })
    }

    /// `ρ(u)·u` for a unit vector `u`, or `None` when ρ(u) is 0 or +∞.
    pub fn boundary_point(&self, u: &[f64]) -> Result<Option<Vec<f64>>> {
        let r = self.radial_unit(u)?;
        if r == 0.0 || r.is_infinite() {
            return Ok(None);
        }
        Ok(Some(u.iter().map(|x| r * x).collect()))
    }

    /// The dilate `λK`.
    pub fn dilate(&self, lambda: f64) -> Result<StarBody> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return invalid(format!("dilation factor must be positive, got {lambda}"));
        }
        let inner = self.radial.clone();
        Ok(StarBody::new(
            self.dim,
            self.symmetric,
            format!("{}*{}", lambda, self.label),
            move |u| Ok(lambda * inner(u)?),
        ))
    }
}

/// `‖x‖_K = min{λ ≥ 0 : x ∈ λK}`.
pub fn minkowski_functional(body: &StarBody, x: &[f64]) -> Result<f64> {
    body.functional(x)
}

/// The p-convex combination `t^{1/p} x + (1-t)^{1/p} y`.
pub fn p_convex_combination(x: &[f64], y: &[f64], t: f64, p: f64) -> Result<Vec<f64>> {
    check_dim(x.len(), y.len())?;
    if !(0.0..=1.0).contains(&t) {
        return invalid(format!("combination weight {t} outside [0, 1]"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("exponent p = {p} outside (0, 1]"));
    }
    let a = t.powf(1.0 / p);
    let b = (1.0 - t).powf(1.0 / p);
    Ok(x.iter().zip(y).map(|(xi, yi)| a * xi + b * yi).collect())
}

pub(crate) fn euclidean_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
