//! Radon transforms between affine Grassmannians.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: Grassmannian points, affine planes, Haar sampling, the Kelvin map.
//! * [`fracint`]: Riemann–Liouville and Erdélyi–Kober integrals and derivatives on radial grids.
//! * [`radon_john`]: the classical d-plane transform on ℝᵐ and its inversion.
//! * [`funk`]: Funk-type transforms between Grassmannians and their inversion.
//! * [`affine_radon`]: the transform between affine Grassmannians, its dual, and inversion pipelines.
//!
//! Supporting modules provide quadrature rules ([`quadrature`]), deterministic random
//! streams ([`rng`]), analytic test fields ([`phantom`]) and frozen tolerances ([`tolerances`]).

pub mod affine_radon;
pub mod error;
pub mod fracint;
pub mod funk;
pub mod geometry;
pub mod harmonics;
pub mod phantom;
pub mod quadrature;
pub mod radon_john;
pub mod rng;
pub mod tolerances;

pub use error::{Error, Result};
pub use geometry::{AffinePlane, GrassmannPoint, Vector};
pub use rng::StreamHandle;
