//! The d-plane transform on ℝᵐ and its inversion through Erdélyi–Kober derivatives.
//!
//! For a point x the shifted mean F_x(t) averages a plane function over all d-planes at
//! distance t from x; f(x) = π^{−d/2} lim_{t→0} (D^{d/2}_{−,2} F_x)(t). For even d the
//! derivative is the local operator (−D)^{d/2} and only a handful of small t are needed;
//! for odd d the whole profile together with a tail model enters.
//!
//! All operations can be restricted to a subspace V ⊂ ℝⁿ: planes then lie in V and the
//! rotation average runs over SO(V).

use std::sync::Arc;

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::fracint::{frac_derivative_with, minus_d_power_at, DerivativeForm, FracOrder, Interpolation, Options, RadialGridFn, TailModel};
use crate::geometry::{axpy, norm, sample_rotation, scale, AffinePlane, Cubature, GrassmannPoint, Vector};
use crate::quadrature::{gauss_legendre, line_rule, pairwise_sum, richardson, Limit};
use crate::rng::StreamHandle;
use crate::tolerances::Tolerances;

type PointEval = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type PlaneEval = Arc<dyn Fn(&AffinePlane) -> Result<f64> + Send + Sync>;

/// A function on ℝᵐ with a declared decay exponent μ (|f(x)| ≲ |x|^{−μ}; ∞ for Gaussian decay).
#[derive(Clone)]
pub struct PointFieldFn {
    pub dim: usize,
    pub decay: f64,
    eval: PointEval,
}

impl PointFieldFn {
    pub fn new(dim: usize, decay: f64, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        PointFieldFn { dim, decay, eval: Arc::new(f) }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }
}

/// A function on d-planes of ℝⁿ with a declared decay exponent in the distance |τ|.
#[derive(Clone)]
pub struct PlaneFieldFn {
    pub dim: usize,
    pub plane_dim: usize,
    pub decay: f64,
    eval: PlaneEval,
}

impl PlaneFieldFn {
    pub fn new(
        dim: usize,
        plane_dim: usize,
        decay: f64,
        f: impl Fn(&AffinePlane) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        PlaneFieldFn { dim, plane_dim, decay, eval: Arc::new(f) }
    }

    pub fn eval(&self, tau: &AffinePlane) -> Result<f64> {
        if tau.k() != self.plane_dim || tau.n() != self.dim {
            return Err(Error::Dimension(format!(
                "plane in AG({},{}) passed to a function on AG({},{})",
                tau.n(),
                tau.k(),
                self.dim,
                self.plane_dim
            )));
        }
        (self.eval)(tau)
    }
}

/// (R_d f)(τ) = ∫_τ f by a tensor rule with `nodes` points per plane axis.
pub fn dplane_transform(f: &PointFieldFn, tau: &AffinePlane, nodes: usize) -> Result<f64> {
    if tau.n() != f.dim {
        return Err(Error::Dimension(format!("plane in ℝ^{} for a function on ℝ^{}", tau.n(), f.dim)));
    }
    let d = tau.k();
    if d == 0 || d >= f.dim {
        return Err(invalid(format!("plane dimension must lie in 1..{}", f.dim)));
    }
    if f.decay <= d as f64 {
        return Err(Error::Decay(format!("decay exponent {} must exceed the plane dimension {d}", f.decay)));
    }
    let rule = line_rule(nodes, f.decay);
    let cols = tau.subspace().columns();
    let mut acc = Vec::with_capacity(nodes.pow(d as u32));
    let mut idx = vec![0usize; d];
    loop {
        let mut x: Vector = tau.offset().clone();
        let mut w = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            x = axpy(&x, rule.nodes[i], &cols[a]);
            w *= rule.weights[i];
        }
        acc.push(w * f.eval(&x));
        let mut a = 0;
        loop {
            if a == d {
                return Ok(pairwise_sum(&acc));
            }
            idx[a] += 1;
            if idx[a] < nodes {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// The d-plane transform of `f` as a lazily evaluated plane function.
pub fn transform_field(f: &PointFieldFn, d: usize, nodes: usize) -> PlaneFieldFn {
    let g = f.clone();
    let decay = f.decay - d as f64;
    PlaneFieldFn::new(f.dim, d, decay, move |tau| dplane_transform(&g, tau, nodes))
}

/// How the average over rotations of the ambient space is computed.
#[derive(Clone, Debug)]
pub enum RotationAverage {
    /// Haar Monte Carlo with antithetic pairs (t, −t); samples are drawn in fixed batches
    /// from child streams, so results do not depend on the thread count.
    MonteCarlo { samples: usize },
    /// Deterministic cubature; available for hyperplanes (d = m − 1) and lines in ℝ³.
    Cubature(Cubature),
    /// Cubature for lines in a 3-space with nodes clustered toward the lines that pass near
    /// `focus`; suited to fields concentrated around a point (other dimensions fall back to
    /// [`RotationAverage::Cubature`]).
    Focused { cubature: Cubature, focus: Vector },
}

const BATCH: usize = 256;

/// Shifted means F_x(t) at every t in `ts`, with common random numbers across t.
pub fn shifted_mean_profile_in(
    phi: &PlaneFieldFn,
    ambient: &GrassmannPoint,
    x: &[f64],
    ts: &[f64],
    average: &RotationAverage,
    seed: StreamHandle,
) -> Result<Vec<f64>> {
    let m = ambient.k();
    let d = phi.plane_dim;
    if d == 0 || d >= m {
        return Err(invalid(format!("plane dimension {d} must lie in 1..{m}")));
    }
    if !ambient.contains(x) {
        return Err(invalid("centre point lies outside the ambient subspace"));
    }
    let n = ambient.n();
    // Sum of φ over the antithetic pair of planes through x ± t·normal.
    let pair = |sub: &GrassmannPoint, normal: &[f64], t: f64| -> Result<f64> {
        let a = AffinePlane::through(sub.clone(), &axpy(x, t, normal));
        let b = AffinePlane::through(sub.clone(), &axpy(x, -t, normal));
        Ok(0.5 * (phi.eval(&a)? + phi.eval(&b)?))
    };
    match average {
        RotationAverage::MonteCarlo { samples } => {
            let batches = samples.div_ceil(BATCH);
            let partial: Vec<Result<Vec<f64>>> = (0..batches)
                .into_par_iter()
                .map(|b| {
                    let mut stream = seed.split(b as u64).rng();
                    let count = BATCH.min(samples - b * BATCH);
                    let mut sums = vec![Vec::with_capacity(count); ts.len()];
                    for _ in 0..count {
                        let g = sample_rotation(m, &mut stream)?;
                        let cols: Vec<Vector> = (0..m).map(|j| ambient.embed(&g.column(j))).collect();
                        let sub = GrassmannPoint::from_frame(n, &cols[..d])?;
                        for (s, &t) in sums.iter_mut().zip(ts) {
                            s.push(pair(&sub, &cols[m - 1], t)?);
                        }
                    }
                    Ok(sums.iter().map(|s| pairwise_sum(s)).collect())
                })
                .collect();
            let mut totals = vec![Vec::with_capacity(batches); ts.len()];
            for p in partial {
                for (tot, v) in totals.iter_mut().zip(p?) {
                    tot.push(v);
                }
            }
            Ok(totals.iter().map(|t| pairwise_sum(t) / *samples as f64).collect())
        }
        RotationAverage::Focused { cubature, focus } if m == 3 && d == 1 => {
            let rows: Vec<Result<f64>> = ts
                .par_iter()
                .map(|&t| focused_line_mean(phi, ambient, x, t, cubature.circle, focus))
                .collect();
            rows.into_iter().collect()
        }
        RotationAverage::Focused { cubature: cub, .. } | RotationAverage::Cubature(cub) => {
            let nodes: Vec<(GrassmannPoint, Vector, f64)> = if d + 1 == m {
                cub.sphere_nodes(ambient)?
                    .into_iter()
                    .map(|(nu, w)| {
                        let line = GrassmannPoint::from_frame(n, std::slice::from_ref(&nu))?;
                        Ok((line.complement_within(ambient)?, nu, w))
                    })
                    .collect::<Result<_>>()?
            } else if m == 3 && d == 1 {
                let mut out = Vec::new();
                for (a, wa) in cub.sphere_nodes(ambient)? {
                    let line = GrassmannPoint::from_frame(n, &[a])?;
                    let perp = line.complement_within(ambient)?;
                    for (b, wb) in cub.sphere_nodes(&perp)? {
                        out.push((line.clone(), b, wa * wb));
                    }
                }
                out
            } else {
                return Err(crate::error::unsupported(format!(
                    "cubature rotation average for {d}-planes in a {m}-dimensional space"
                )));
            };
            // Antipodally symmetric node sets already contain the reflected plane of each pair.
            let symmetric = cub.circle % 2 == 0;
            let rows: Vec<Result<Vec<f64>>> = nodes
                .par_iter()
                .map(|(sub, normal, w)| {
                    ts.iter()
                        .map(|&t| {
                            let v = if symmetric {
                                phi.eval(&AffinePlane::through(sub.clone(), &axpy(x, t, normal)))?
                            } else {
                                pair(sub, normal, t)?
                            };
                            Ok(w * v)
                        })
                        .collect()
                })
                .collect();
            let mut totals = vec![Vec::with_capacity(nodes.len()); ts.len()];
            for row in rows {
                for (tot, v) in totals.iter_mut().zip(row?) {
                    tot.push(v);
                }
            }
            Ok(totals.iter().map(|t| pairwise_sum(t)).collect())
        }
    }
}

/// Nodes and weights on [lo, hi] clustered around `center` on the scale `delta`: each side
/// of the centre uses Gauss–Legendre in s under the substitution x = center ± delta·sinh s.
fn clustered_interval(lo: f64, hi: f64, center: f64, delta: f64, n: usize) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(n);
    let mut out = Vec::with_capacity(2 * n);
    for (len, sign) in [(center - lo, -1.0), (hi - center, 1.0)] {
        if len <= 0.0 {
            continue;
        }
        let s_max = (len / delta).asinh();
        for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
            let s = 0.5 * s_max * (z + 1.0);
            out.push((center + sign * delta * s.sinh(), 0.5 * s_max * w * delta * s.cosh()));
        }
    }
    out
}

/// Mean of φ over lines of a 3-space V at distance t from x.
///
/// A line has direction a at polar angle θ from the axis x − focus and passes through
/// x + t·b with b ⊥ a. Lines passing near the focus have sin θ ≈ t/|x − focus| and b
/// pointing back at the focus; both angles are clustered around those values.
fn focused_line_mean(phi: &PlaneFieldFn, ambient: &GrassmannPoint, x: &[f64], t: f64, circle: usize, focus: &[f64]) -> Result<f64> {
    let n = ambient.n();
    let rel = ambient.project(&crate::geometry::sub(x, focus));
    let dist = norm(&rel);
    let e0 = if dist > 1e-12 { scale(&rel, 1.0 / dist) } else { ambient.columns()[0].clone() };
    let rest = GrassmannPoint::from_frame(n, std::slice::from_ref(&e0))?.complement_within(ambient)?;
    let (e1, e2) = (rest.columns()[0].clone(), rest.columns()[1].clone());
    let per_panel = circle.div_ceil(2).max(2);
    let n_az = circle.max(2);
    // Line directions fill the hemisphere θ ∈ [0, π/2].
    let th_star = if dist > 0.0 { (t / dist).min(1.0).asin() } else { 0.0 };
    let polar = clustered_interval(0.0, PI / 2.0, th_star, 1.0 / dist.max(1.0), per_panel);
    let mut terms = Vec::with_capacity(polar.len() * n_az * 2 * per_panel);
    for &(th, w_th) in &polar {
        let w_polar = th.sin() * w_th;
        for i in 0..n_az {
            let az = 2.0 * PI * (i as f64 + 0.5) / n_az as f64;
            let radial = axpy(&scale(&e1, az.cos()), az.sin(), &e2);
            let a = axpy(&scale(&e0, th.cos()), th.sin(), &radial);
            let u1 = axpy(&scale(&e0, -th.sin()), th.cos(), &radial);
            let u2 = axpy(&scale(&e1, -az.sin()), az.cos(), &e2);
            let line = GrassmannPoint::from_frame(n, std::slice::from_ref(&a))?;
            // Component of the focus offset across the line, in the (u1, u2) frame.
            let c = crate::geometry::sub(&rel, &scale(&a, dist * th.cos()));
            let (c1, c2) = (crate::geometry::dot(&c, &u1), crate::geometry::dot(&c, &u2));
            let c_norm = (c1 * c1 + c2 * c2).sqrt();
            let psi0 = (-c2).atan2(-c1);
            // Distance of the line from the focus ≈ √((|c| − t)² + |c| t ψ²) near ψ = 0.
            let width = ((1.0 + (c_norm - t).powi(2)) / (c_norm * t).max(1e-300)).sqrt().min(PI);
            for (psi, w_psi) in clustered_interval(-PI, PI, 0.0, width, per_panel) {
                let b = axpy(&scale(&u1, (psi0 + psi).cos()), (psi0 + psi).sin(), &u2);
                let tau = AffinePlane::through(line.clone(), &axpy(x, t, &b));
                terms.push(w_polar / n_az as f64 * w_psi / (2.0 * PI) * phi.eval(&tau)?);
            }
        }
    }
    Ok(pairwise_sum(&terms))
}

/// Shifted mean F_x(t) in ℝᵐ.
pub fn shifted_mean(phi: &PlaneFieldFn, x: &[f64], t: f64, average: &RotationAverage, seed: StreamHandle) -> Result<f64> {
    let v = GrassmannPoint::whole(phi.dim)?;
    Ok(shifted_mean_profile_in(phi, &v, x, &[t], average, seed)?[0])
}

/// Budgets and options of the inversion.
#[derive(Clone, Debug)]
pub struct RadonJohnConfig {
    /// Extent of the t-grid (used in full only for odd d).
    pub t_max: f64,
    /// Number of t-intervals on [0, t_max]; the step h = t_max / intervals sets the
    /// Richardson points h, 2h, 4h.
    pub intervals: usize,
    pub average: RotationAverage,
    pub seed: StreamHandle,
    pub form: DerivativeForm,
    pub interpolation: Interpolation,
    pub limit_tolerance: f64,
}

impl Default for RadonJohnConfig {
    fn default() -> Self {
        RadonJohnConfig {
            t_max: 12.0,
            intervals: 192,
            average: RotationAverage::MonteCarlo { samples: 20_000 },
            seed: StreamHandle::new(0),
            form: DerivativeForm::Default,
            interpolation: Interpolation::Cubic,
            limit_tolerance: Tolerances::default().limit_resolution,
        }
    }
}

/// Reconstructs f(x) ∈ ℝᵐ from its d-plane transform φ.
pub fn dplane_invert(phi: &PlaneFieldFn, x: &[f64], cfg: &RadonJohnConfig) -> Result<Limit> {
    dplane_invert_in(phi, &GrassmannPoint::whole(phi.dim)?, x, cfg)
}

/// Reconstruction inside a subspace V: φ is a function on d-planes of V.
pub fn dplane_invert_in(phi: &PlaneFieldFn, ambient: &GrassmannPoint, x: &[f64], cfg: &RadonJohnConfig) -> Result<Limit> {
    let d = phi.plane_dim;
    let h = cfg.t_max / cfg.intervals as f64;
    let alpha = d as f64 / 2.0;
    let (e, scale) = if d.is_multiple_of(2) {
        if cfg.form != DerivativeForm::Default && cfg.form != DerivativeForm::IntegerPower {
            return Err(invalid("even plane dimensions use the integer-power form"));
        }
        let m = d / 2;
        let last = 4 + (m + crate::fracint::STENCIL_EXTRA).div_ceil(2);
        let ts: Vec<f64> = (0..=last).map(|j| j as f64 * h).collect();
        let f = shifted_mean_profile_in(phi, ambient, x, &ts, &cfg.average, cfg.seed)?;
        let at = |t: f64| minus_d_power_at(&ts, &f, m, t);
        let e = [at(h), at(2.0 * h), at(4.0 * h)];
        let scale = f.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        (e, scale)
    } else {
        let ts = RadialGridFn::uniform_nodes(cfg.t_max, cfg.intervals);
        let f = shifted_mean_profile_in(phi, ambient, x, &ts, &cfg.average, cfg.seed)?;
        let tail = if phi.decay.is_infinite() {
            TailModel::GaussianFit
        } else {
            TailModel::PowerFit { exponent: phi.decay }
        };
        let scale = f.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let profile = RadialGridFn::unchecked(ts, f, tail)?;
        let dv = frac_derivative_with(
            &profile,
            FracOrder::ek_minus(alpha),
            cfg.form,
            Options { interpolation: cfg.interpolation },
        )?;
        let v = dv.values();
        ([v[1], v[2], v[4]], scale)
    };
    let lim = richardson(e[0], e[1], e[2], 2.0, 4.0);
    let c = PI.powf(-alpha);
    let (value, error_bar) = (c * lim.value, c * lim.error_bar);
    if !value.is_finite() || error_bar > cfg.limit_tolerance * (value.abs() + c * scale) {
        return Err(Error::LimitUnresolved { value, error_bar });
    }
    Ok(Limit { value, error_bar })
}

/// Distance from `x` to the plane τ (both in ℝⁿ).
pub fn distance_to_plane(tau: &AffinePlane, x: &[f64]) -> f64 {
    let p = tau.subspace().project_complement(x);
    norm(&crate::geometry::sub(&p, tau.offset()))
}

