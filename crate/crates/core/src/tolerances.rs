//! Frozen numerical tolerances.
//!
//! Every threshold used by validation code and by the acceptance experiments lives here so
//! that reports can quote them from a single place.

/// Orthonormality defect allowed in a subspace frame.
pub const FRAME: f64 = 1e-12;
/// Allowed component of an affine offset along its own subspace.
pub const OFFSET_ORTHOGONALITY: f64 = 1e-10;
/// Frobenius distance under which two projectors name the same subspace.
pub const PROJECTOR_EQUALITY: f64 = 1e-10;
/// Residual norm under which a Gram–Schmidt candidate is treated as dependent.
pub const RANK: f64 = 1e-10;
/// Offsets shorter than this are treated as passing through the origin.
pub const KELVIN_MIN_OFFSET: f64 = 1e-12;

/// Acceptance tolerances, one field per criterion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Absolute error of the dual-transform remark values.
    pub remark_values: f64,
    /// Sup error of the Erdélyi–Kober left-inverse identity.
    pub ek_identity: f64,
    /// Relative error of the radial reduction of the d-plane transform.
    pub radial_reduction: f64,
    /// Relative L² error of the band-limited Funk round trip.
    pub funk_round_trip: f64,
    /// Relative L² error of quasi-radial reconstruction.
    pub quasi_radial: f64,
    /// Relative pointwise error of the general inversion pipeline.
    pub general_inversion: f64,
    /// Relative error of the intermediate identity in the dual chain.
    pub dual_identity: f64,
    /// Relative error of the dual-chain reconstruction.
    pub dual_reconstruction: f64,
    /// Number of combined standard errors allowed in Monte Carlo duality checks.
    pub duality_sigmas: f64,
    /// Relative error bar above which a Richardson limit is reported unresolved.
    pub limit_resolution: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            remark_values: 1e-3,
            ek_identity: 1e-3,
            radial_reduction: 1e-3,
            funk_round_trip: 1e-2,
            quasi_radial: 5e-2,
            general_inversion: 1e-1,
            dual_identity: 1e-2,
            dual_reconstruction: 2e-2,
            duality_sigmas: 3.0,
            limit_resolution: 1e-1,
        }
    }
}
