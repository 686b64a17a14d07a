//! Densities of log-concave and s-concave measures, with sampled checks of
//! their declared concavity class.

mod spec;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::rng::stream_rng;
use crate::violation::{Violation, ViolationReport};

pub use spec::DensitySpec;

/// Declared concavity class of a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Concavity {
    LogConcave,
    /// s-concave measure with `0 < s < 1/n`; the density raised to
    /// `γ = s/(1 - ns)` is concave on its support.
    SConcave { s: f64 },
}

impl Concavity {
    /// The power `γ = s/(1 - ns)` for s-concave classes.
    pub fn gamma(&self, n: usize) -> Option<f64> {
        match *self {
            Concavity::LogConcave => None,
            Concavity::SConcave { s } => Some(s / (1.0 - n as f64 * s)),
        }
    }
}

type Weight = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A non-negative weight on R^n with its declared concavity class.
#[derive(Clone)]
pub struct Density {
    dim: usize,
    class: Concavity,
    symmetric: bool,
    uniform: bool,
    label: String,
    support_note: String,
    weight: Arc<Weight>,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Density")
            .field("dim", &self.dim)
            .field("class", &self.class)
            .field("symmetric", &self.symmetric)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl Density {
    pub fn new<F>(
        dim: usize,
        class: Concavity,
        symmetric: bool,
        label: impl Into<String>,
        weight: F,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if dim < 1 {
            return invalid("density needs dimension >= 1");
        }
        if let Concavity::SConcave { s } = class {
            if !(s > 0.0 && s < 1.0 / dim as f64) {
                return invalid(format!("s-concave class needs 0 < s < 1/{dim}, got s = {s}"));
            }
        }
        Ok(Self {
            dim,
            class,
            symmetric,
            uniform: false,
            label: label.into(),
            support_note: String::new(),
            weight: Arc::new(weight),
        })
    }

    /// Lebesgue measure: weight ≡ 1.
    pub fn uniform(n: usize) -> Result<Self> {
        let mut d = Self::new(n, Concavity::LogConcave, true, format!("uniform:n={n}"), |_: &[f64]| 1.0)?;
        d.uniform = true;
        d.support_note = "all of R^n".into();
        Ok(d)
    }

    pub fn with_support_note(mut self, note: impl Into<String>) -> Self {
        self.support_note = note.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn class(&self) -> Concavity {
        self.class
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support_note(&self) -> &str {
        &self.support_note
    }

    pub fn weight(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok((self.weight)(x))
    }

    pub(crate) fn weight_unchecked(&self, x: &[f64]) -> f64 {
        (self.weight)(x)
    }

    /// The density `c·f`. Same class and symmetry; no longer marked uniform.
    pub fn scaled(&self, c: f64) -> Result<Density> {
        if !(c > 0.0 && c.is_finite()) {
            return invalid(format!("density scale must be positive, got {c}"));
        }
        let inner = self.weight.clone();
        let mut d = Density::new(self.dim, self.class, self.symmetric, format!("{c}*{}", self.label), move |x| {
            c * inner(x)
        })?;
        d.support_note = self.support_note.clone();
        Ok(d)
    }
}

/// Standard Gaussian weight `exp(-|x|²/2)` (unnormalized).
pub fn make_gaussian(n: usize) -> Result<Density> {
    Ok(Density::new(n, Concavity::LogConcave, true, format!("gaussian:n={n}"), |x: &[f64]| {
        (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp()
    })?
    .with_support_note("all of R^n"))
}

/// Indicator of the half-space `x_1 + x_2 ≥ 2^{1-1/p}`: log-concave, not even.
pub fn make_example1_density(p: f64, n: usize) -> Result<Density> {
    if !(p > 0.0 && p < 1.0) {
        return invalid(format!("ex1 density needs 0 < p < 1, got p = {p}"));
    }
    if n < 2 {
        return invalid("ex1 density needs n >= 2");
    }
    let threshold = 2f64.powf(1.0 - 1.0 / p);
    Ok(Density::new(n, Concavity::LogConcave, false, format!("ex1:p={p},n={n}"), move |x: &[f64]| {
        if x[0] + x[1] >= threshold {
            1.0
        } else {
            0.0
        }
    })?
    .with_support_note(format!("half-space x1 + x2 >= {threshold}")))
}

/// `|x_1|^{1/s - n}` on `x_1 ≥ 0`, zero elsewhere; s-concave for `0 < s < 1/n`.
///
/// Grows without bound in `x_1`; only integrate it over bounded bodies.
pub fn make_example2_density(s: f64, n: usize) -> Result<Density> {
    if !(s > 0.0 && s < 1.0 / n as f64) {
        return invalid(format!("ex2 density needs 0 < s < 1/{n}, got s = {s}"));
    }
    let exponent = 1.0 / s - n as f64;
    Ok(Density::new(n, Concavity::SConcave { s }, false, format!("ex2:s={s},n={n}"), move |x: &[f64]| {
        if x[0] >= 0.0 {
            x[0].powf(exponent)
        } else {
            0.0
        }
    })?
    .with_support_note("half-space x1 >= 0"))
}

/// Default half-width of the sampling box for density checks.
pub const DEFAULT_BOX: f64 = 3.0;

/// Samples `(x, y, λ)` in `[-3, 3]^n` and tests the density's declared class:
/// `f(λx + (1-λ)y) ≥ f(x)^λ f(y)^{1-λ}` for log-concave,
/// `f^γ(λx + (1-λ)y) ≥ λ f^γ(x) + (1-λ) f^γ(y)` on the support for s-concave.
pub fn check_concavity_class(d: &Density, trials: usize, seed: u64) -> ViolationReport {
    check_concavity_class_in_box(d, DEFAULT_BOX, trials, seed)
}

pub fn check_concavity_class_in_box(
    d: &Density,
    half_width: f64,
    trials: usize,
    seed: u64,
) -> ViolationReport {
    let n = d.dim;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-half_width..=half_width)).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-half_width..=half_width)).collect();
            let lambda: f64 = rng.random_range(0.0..1.0);
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
            let (fx, fy, fz) = (d.weight_unchecked(&x), d.weight_unchecked(&y), d.weight_unchecked(&z));
            let (lhs, rhs) = match d.class.gamma(n) {
                None => (fz, fx.powf(lambda) * fy.powf(1.0 - lambda)),
                Some(gamma) => {
                    if fx <= 0.0 || fy <= 0.0 {
                        return None;
                    }
                    (fz.powf(gamma), lambda * fx.powf(gamma) + (1.0 - lambda) * fy.powf(gamma))
                }
            };
            Some(lower_violation(x, y, lambda, lhs, rhs))
        })
        .collect();
    ViolationReport::collect(seed, outcomes)
}

/// Samples `x` in `[-3, 3]^n` and tests `f(x) = f(-x)`.
pub fn check_evenness(d: &Density, trials: usize, seed: u64) -> ViolationReport {
    let n = d.dim;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-DEFAULT_BOX..=DEFAULT_BOX)).collect();
            let minus: Vec<f64> = x.iter().map(|v| -v).collect();
            let (a, b) = (d.weight_unchecked(&x), d.weight_unchecked(&minus));
            let gap = (a - b).abs() - 1e-12 * a.abs().max(b.abs()).max(1.0);
            Some((gap > 0.0).then(|| Violation { x, y: minus, weight: 1.0, lhs: a, rhs: b, excess: gap }))
        })
        .collect();
    ViolationReport::collect(seed, outcomes)
}

/// Samples `x` and `t ∈ [0, 1]` and tests `f(t x) ≥ f(x)`: an even
/// log-concave function cannot increase along rays from the origin.
pub fn check_ray_monotone(d: &Density, trials: usize, seed: u64) -> ViolationReport {
    let n = d.dim;
    let outcomes = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-DEFAULT_BOX..=DEFAULT_BOX)).collect();
            let t: f64 = rng.random_range(0.0..=1.0);
            let tx: Vec<f64> = x.iter().map(|v| t * v).collect();
            let (lhs, rhs) = (d.weight_unchecked(&tx), d.weight_unchecked(&x));
            Some(lower_violation(tx, x, t, lhs, rhs))
        })
        .collect();
    ViolationReport::collect(seed, outcomes)
}

// Flags `lhs < rhs` beyond a 1e-12 relative slack.
fn lower_violation(x: Vec<f64>, y: Vec<f64>, weight: f64, lhs: f64, rhs: f64) -> Option<Violation> {
    let excess = rhs - lhs - 1e-12 * rhs.abs().max(1.0);
    (excess > 0.0 || lhs.is_nan()).then(|| Violation { x, y, weight, lhs, rhs, excess })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_values() {
        let g = make_gaussian(3).unwrap();
        assert_eq!(g.weight(&[0.0, 0.0, 0.0]).unwrap(), 1.0);
        assert!((g.weight(&[0.0, 1.0, 0.0]).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!(g.weight(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn example1_values() {
        let d = make_example1_density(0.5, 3).unwrap();
        assert_eq!(d.weight(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(d.weight(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(d.weight(&[-1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(!d.is_symmetric());
        assert!(make_example1_density(1.0, 3).is_err());
    }

    #[test]
    fn example2_values() {
        let d = make_example2_density(0.25, 3).unwrap();
        assert_eq!(d.weight(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(d.weight(&[2.0, 0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(d.weight(&[-1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(d.class().gamma(3), Some(1.0));
        assert!(make_example2_density(0.4, 3).is_err());
        assert!(make_example2_density(0.0, 3).is_err());
    }

    #[test]
    fn gaussian_is_log_concave() {
        let r = check_concavity_class(&make_gaussian(3).unwrap(), 10_000, 1);
        assert_eq!(r.trials, 10_000);
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn example2_is_s_concave() {
        let r = check_concavity_class(&make_example2_density(0.25, 3).unwrap(), 10_000, 2);
        assert!(r.passed(), "{r:?}");
        assert!(r.trials > 1000);
    }

    #[test]
    fn mislabeled_density_is_caught() {
        let d = Density::new(3, Concavity::LogConcave, true, "abs-x1", |x: &[f64]| x[0].abs()).unwrap();
        let r = check_concavity_class(&d, 10_000, 3);
        assert!(r.violations >= 1);
        let w = r.worst.unwrap();
        assert!(w.lhs < w.rhs);
    }

    #[test]
    fn evenness() {
        assert!(check_evenness(&make_gaussian(3).unwrap(), 5000, 4).passed());
        assert!(check_evenness(&Density::uniform(3).unwrap(), 5000, 4).passed());
        assert!(!check_evenness(&make_example1_density(0.5, 3).unwrap(), 5000, 4).passed());
    }

    #[test]
    fn gaussian_decreases_along_rays() {
        assert!(check_ray_monotone(&make_gaussian(4).unwrap(), 5000, 5).passed());
    }

    #[test]
    fn deterministic_reports() {
        let d = make_example1_density(0.5, 3).unwrap();
        assert_eq!(check_evenness(&d, 1000, 9), check_evenness(&d, 1000, 9));
    }
}
