//! Intersection bodies of p-convex star bodies.
//!
//! Bodies are radial oracles ([`StarBody`]). Sections are integrals of the
//! radial function over great subspheres, evaluated by quadrature in low
//! dimension and by seeded Monte Carlo otherwise. The operators build new
//! bodies from old ones, and [`convexity`] estimates how convex they are.
//!
//! ```
//! use pconvex::{intersection_body, Direction, Engine, StarBody};
//!
//! let cube: StarBody = "cube:n=3".parse::<pconvex::BodySpec>().unwrap().build().unwrap();
//! let ic = intersection_body(&cube, Engine::Quadrature).unwrap();
//! assert!((ic.radial(&Direction::axis(3, 2).unwrap()).unwrap() - 4.0).abs() < 1e-9);
//! ```

pub mod cli;
pub mod convexity;
pub mod error;
pub mod measures;
pub mod operators;
pub mod quadrature;
pub mod repro;
pub mod rng;
pub mod root;
pub mod sections;
mod serde_ext;
pub mod starbody;
pub mod violation;

pub use convexity::{critical_exponent, verify_p_convexity, ExponentCertificate};
pub use error::{Error, Result};
pub use measures::{Density, DensitySpec};
pub use operators::{ball_body, intersection_body, weighted_intersection_body};
pub use sections::{Engine, SectionEstimate, Subspace};
pub use starbody::{BodySpec, Direction, StarBody};
pub use violation::ViolationReport;

// The guide's snippets run as doc-tests so the book cannot drift.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/star-bodies.md")]
    mod star_bodies {}
    #[doc = include_str!("../../../book/src/sections.md")]
    mod sections {}
    #[doc = include_str!("../../../book/src/intersection-bodies.md")]
    mod intersection_bodies {}
    #[doc = include_str!("../../../book/src/measures.md")]
    mod measures {}
    #[doc = include_str!("../../../book/src/convexity.md")]
    mod convexity {}
    #[doc = include_str!("../../../book/src/banach-mazur.md")]
    mod banach_mazur {}
    #[doc = include_str!("../../../book/src/repro.md")]
    mod repro {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
