//! Analytic test fields with closed-form transforms.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::affine_radon::AffineFieldFn;
use crate::geometry::{sub, AffinePlane, Vector};
use crate::radon_john::{distance_to_plane, PlaneFieldFn, PointFieldFn};

/// e^{−|x − c|²} on ℝᵐ.
pub fn gaussian(center: &[f64]) -> PointFieldFn {
    let c: Vector = center.iter().copied().collect();
    PointFieldFn::new(center.len(), f64::INFINITY, move |x| (-sub(x, &c).iter().map(|v| v * v).sum::<f64>()).exp())
}

/// (1 + |x|²)^{−q} on ℝᵐ, decaying like |x|^{−2q}.
pub fn rational(dim: usize, q: f64) -> PointFieldFn {
    PointFieldFn::new(dim, 2.0 * q, move |x| (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powf(-q))
}

/// Closed-form d-plane transform of [`gaussian`]: π^{d/2} e^{−dist(c,τ)²}.
pub fn gaussian_plane_transform(center: &[f64], tau: &AffinePlane) -> f64 {
    let d = tau.k() as f64;
    PI.powf(d / 2.0) * (-distance_to_plane(tau, center).powi(2)).exp()
}

/// Closed-form d-plane transform of [`rational`]: π^{d/2} Γ(q − d/2)/Γ(q) (1 + s²)^{d/2 − q}.
pub fn rational_plane_transform(q: f64, tau: &AffinePlane) -> f64 {
    let d = tau.k() as f64;
    let s2 = tau.distance().powi(2);
    PI.powf(d / 2.0) * gamma(q - d / 2.0) / gamma(q) * (1.0 + s2).powf(d / 2.0 - q)
}

/// [`gaussian_plane_transform`] as a plane field on AG(m, d).
pub fn gaussian_plane_field(center: &[f64], d: usize) -> PlaneFieldFn {
    let c: Vector = center.iter().copied().collect();
    PlaneFieldFn::new(center.len(), d, f64::INFINITY, move |tau| Ok(gaussian_plane_transform(&c, tau)))
}

/// [`rational_plane_transform`] as a plane field on AG(m, d).
pub fn rational_plane_field(dim: usize, q: f64, d: usize) -> PlaneFieldFn {
    PlaneFieldFn::new(dim, d, 2.0 * q - d as f64, move |tau| Ok(rational_plane_transform(q, tau)))
}

/// e^{−|u|²} on AG(n,k) (quasi-radial, Gaussian decay).
pub fn quasi_radial_gaussian(n: usize, k: usize) -> AffineFieldFn {
    AffineFieldFn::quasi_radial(n, k, f64::INFINITY, |_, r| (-r * r).exp())
}

/// e^{−|u − Pr_{ξ^⊥} a|²} on AG(n,k): a Gaussian of planes centred at the point a.
pub fn shifted_gaussian(k: usize, a: &[f64]) -> AffineFieldFn {
    let a: Vector = a.iter().copied().collect();
    AffineFieldFn::new(a.len(), k, f64::INFINITY, move |tau| {
        let p = tau.subspace().project_complement(&a);
        (-sub(tau.offset(), &p).iter().map(|v| v * v).sum::<f64>()).exp()
    })
}

/// Transform of [`shifted_gaussian`] (a = 0 gives [`quasi_radial_gaussian`]) on AG(n,k′):
/// π^{(k′−k)/2} e^{−|v − Pr_{η^⊥} a|²}.
pub fn shifted_gaussian_transform(k: usize, a: &[f64], zeta: &AffinePlane) -> f64 {
    let p = zeta.subspace().project_complement(a);
    let d2: f64 = sub(zeta.offset(), &p).iter().map(|v| v * v).sum();
    PI.powf((zeta.k() - k) as f64 / 2.0) * (-d2).exp()
}

/// (1 + |v|²)^{−1} on AG(n,k′).
pub fn rational_offset(n: usize, k_prime: usize) -> AffineFieldFn {
    AffineFieldFn::quasi_radial(n, k_prime, 2.0, |_, r| 1.0 / (1.0 + r * r))
}

/// Dual transform of [`rational_offset`] on AG(3,1) from AG(3,2): (1 + |u|²)^{−1/2}.
pub fn rational_offset_dual_3d(tau: &AffinePlane) -> f64 {
    1.0 / (1.0 + tau.distance().powi(2)).sqrt()
}

/// |v · e₂| on AG(n,k′) (not decaying; used for pointwise dual checks).
pub fn offset_coordinate_abs(n: usize, k_prime: usize) -> AffineFieldFn {
    AffineFieldFn::new(n, k_prime, 0.0, |zeta| zeta.offset()[1].abs())
}
