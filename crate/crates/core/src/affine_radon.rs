//! The Radon transform between affine Grassmannians, its dual, and inversion pipelines.
//!
//! * [`radon_forward`]: (Rf)(η,v) = ∫_{ξ⊂η} dξ ∫_{ξ^⊥∩η} f(ξ, v + x) dx.
//! * [`radon_dual`]: (R*φ)(ξ,u) = ∫_{η⊃ξ} φ(η, Pr_{η^⊥} u) dη.
//! * [`invert_quasi_radial`], [`dual_quasi_radial_invert`]: Funk inversion in the
//!   subspace variable combined with an Erdélyi–Kober derivative in the radius.
//! * [`invert_general`]: a two-step pipeline — Funk inversion inside auxiliary subspaces
//!   h ([`step1_g`]) followed by a d-plane inversion in ξ^⊥ ([`step2_reconstruct`]).
//! * [`dual_general_invert`]: the dual transform reduced to a d-plane inversion through
//!   the Kelvin map.

use std::sync::Arc;

use arrayvec::ArrayVec;
use dashmap::DashMap;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{invalid, unsupported, Error, Result};
use crate::fracint::{frac_derivative_with, DerivativeForm, FracOrder, Interpolation, Options, RadialGridFn, TailModel};
use crate::funk::{funk_invert, funk_invert_in, FunkConfig, GrassFn};
use crate::geometry::{
    axpy, dot, norm, sample_grassmann_within, scale, surface_area, zeros, AffinePlane, Cubature, GrassmannPoint, Vector, MAX_DIM,
};
use crate::quadrature::{line_rule, pairwise_sum, Limit, Rule};
use crate::radon_john::{dplane_invert, dplane_invert_in, PlaneFieldFn, RadonJohnConfig, RotationAverage};
use crate::rng::StreamHandle;

type PlaneEval = Arc<dyn Fn(&AffinePlane) -> Result<f64> + Send + Sync>;
type Profile = Arc<dyn Fn(&GrassmannPoint, f64) -> f64 + Send + Sync>;

/// Declared structure of a field, used to pick specialised pipelines.
#[derive(Clone)]
pub enum Structure {
    Generic,
    /// f(ξ,u) = f₀(ξ, |u|).
    QuasiRadial(Profile),
}

/// A function on AG(n,k) with a declared decay exponent μ: |f(τ)| ≲ |τ|^{−μ}
/// (∞ for Gaussian decay).
#[derive(Clone)]
pub struct AffineFieldFn {
    pub n: usize,
    pub k: usize,
    pub decay: f64,
    pub structure: Structure,
    eval: PlaneEval,
}

impl std::fmt::Debug for AffineFieldFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "AffineFieldFn(AG({},{}), decay {})", self.n, self.k, self.decay)
    }
}

impl AffineFieldFn {
    pub fn new(n: usize, k: usize, decay: f64, f: impl Fn(&AffinePlane) -> f64 + Send + Sync + 'static) -> Self {
        AffineFieldFn { n, k, decay, structure: Structure::Generic, eval: Arc::new(move |t| Ok(f(t))) }
    }

    pub fn from_fallible(
        n: usize,
        k: usize,
        decay: f64,
        f: impl Fn(&AffinePlane) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        AffineFieldFn { n, k, decay, structure: Structure::Generic, eval: Arc::new(f) }
    }

    /// f(ξ,u) = f₀(ξ,|u|).
    pub fn quasi_radial(
        n: usize,
        k: usize,
        decay: f64,
        profile: impl Fn(&GrassmannPoint, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let profile: Profile = Arc::new(profile);
        let p = profile.clone();
        AffineFieldFn {
            n,
            k,
            decay,
            structure: Structure::QuasiRadial(profile),
            eval: Arc::new(move |t: &AffinePlane| Ok(p(t.subspace(), t.distance()))),
        }
    }

    pub fn eval(&self, tau: &AffinePlane) -> Result<f64> {
        if tau.n() != self.n || tau.k() != self.k {
            return Err(Error::Dimension(format!(
                "plane in AG({},{}) passed to a field on AG({},{})",
                tau.n(),
                tau.k(),
                self.n,
                self.k
            )));
        }
        (self.eval)(tau)
    }

    /// Profile value f₀(ξ, r) of a quasi-radial field (generic fields are sampled at the
    /// offset r·e for a fixed unit vector e ⊥ ξ).
    pub fn profile(&self, xi: &GrassmannPoint, r: f64) -> Result<f64> {
        match &self.structure {
            Structure::QuasiRadial(p) => Ok(p(xi, r)),
            Structure::Generic => {
                let e = xi.complement().columns()[0].clone();
                self.eval(&AffinePlane::new(xi.clone(), crate::geometry::scale(&e, r))?)
            }
        }
    }

    /// The same field with evaluations memoised on rounded plane coordinates.
    pub fn memoized(&self) -> AffineFieldFn {
        let cache: Arc<DashMap<PlaneKey, f64>> = Arc::new(DashMap::new());
        let inner = self.eval.clone();
        AffineFieldFn {
            eval: Arc::new(move |t: &AffinePlane| {
                let key = plane_key(t);
                if let Some(v) = cache.get(&key) {
                    return Ok(*v);
                }
                // Evaluating at the key's representative keeps the cached value independent
                // of which nearby plane (and which thread) reached the key first.
                let v = inner(&canonical_plane(&key, t.n(), t.k())?)?;
                cache.insert(key, v);
                Ok(v)
            }),
            ..self.clone()
        }
    }
}

type PlaneKey = ArrayVec<i64, { MAX_DIM * (MAX_DIM + 1) / 2 + MAX_DIM }>;

/// Projector upper triangle and offset rounded to 1e−8.
fn plane_key(t: &AffinePlane) -> PlaneKey {
    let q = |x: f64| (x * 1e8).round() as i64;
    let p = t.subspace().projector();
    let n = t.n();
    let mut key = PlaneKey::new();
    for i in 0..n {
        for j in i..n {
            key.push(q(p[i][j]));
        }
    }
    for &x in t.offset() {
        key.push(q(x));
    }
    key
}

/// Deterministic representative of a key: pivoted Gram–Schmidt on the columns of the
/// rounded projector, and the rounded offset projected off the resulting subspace.
fn canonical_plane(key: &PlaneKey, n: usize, k: usize) -> Result<AffinePlane> {
    let mut p = [[0.0; MAX_DIM]; MAX_DIM];
    let mut it = key.iter().map(|&q| q as f64 * 1e-8);
    for i in 0..n {
        for j in i..n {
            let v = it.next().expect("key holds the projector");
            p[i][j] = v;
            p[j][i] = v;
        }
    }
    let offset: Vector = it.collect();
    let mut residual: Vec<Vector> = (0..n).map(|j| (0..n).map(|i| p[i][j]).collect()).collect();
    let mut frame: Vec<Vector> = Vec::with_capacity(k);
    for _ in 0..k {
        let (best, len) = residual
            .iter()
            .map(|v| norm(v))
            .enumerate()
            .fold((0, -1.0), |acc, (j, l)| if l > acc.1 { (j, l) } else { acc });
        if len <= 0.0 {
            return Err(invalid("memo key does not describe a subspace of the expected dimension"));
        }
        let e = scale(&residual[best], 1.0 / len);
        for v in residual.iter_mut() {
            let c = dot(v, &e);
            *v = axpy(v, -c, &e);
        }
        frame.push(e);
    }
    Ok(AffinePlane::through(GrassmannPoint::from_frame(n, &frame)?, &offset))
}

/// Grid of the radial variable used by profile reconstructions.
#[derive(Clone, Debug)]
pub struct RadialConfig {
    pub r_max: f64,
    pub intervals: usize,
}

/// Parameters and budgets of the transform pipelines on AG(n,k) ↔ AG(n,k′).
#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub n: usize,
    pub k: usize,
    pub k_prime: usize,
    /// The auxiliary dimension ϰ.
    pub kappa: usize,
    /// Cubature for the outer averages over subspaces.
    pub outer: Cubature,
    /// Nodes per axis of the inner fibre integrals.
    pub line_nodes: usize,
    pub funk: FunkConfig,
    pub radial: RadialConfig,
    pub radon_john: RadonJohnConfig,
    pub memoize: bool,
    pub seed: StreamHandle,
}

impl PipelineConfig {
    pub fn new(n: usize, k: usize, k_prime: usize, kappa: usize) -> Result<Self> {
        if n > MAX_DIM || k >= k_prime || k_prime >= n {
            return Err(Error::Inequality(format!(
                "0 ≤ k < k' < n ≤ {MAX_DIM} (got n={n}, k={k}, k'={k_prime})"
            )));
        }
        Ok(PipelineConfig {
            n,
            k,
            k_prime,
            kappa,
            outer: Cubature::new(64, 8),
            line_nodes: 16,
            funk: FunkConfig::coarse(32, 8, 24),
            radial: RadialConfig { r_max: 6.0, intervals: 96 },
            radon_john: RadonJohnConfig {
                t_max: 12.0,
                intervals: 96,
                average: RotationAverage::Cubature(Cubature::new(24, 6)),
                ..Default::default()
            },
            memoize: false,
            seed: StreamHandle::new(0),
        })
    }

    /// Injectivity of R and the admissible range k ≤ ϰ < n − k′ of the forward pipeline.
    pub fn validate_forward_inversion(&self) -> Result<()> {
        let (n, k, kp, kappa) = (self.n, self.k, self.k_prime, self.kappa);
        if k + kp > n - 1 {
            return Err(Error::Inequality(format!("k + k' ≤ n − 1 required for injectivity of R ({k} + {kp} > {})", n - 1)));
        }
        if kappa < k || kappa + kp >= n {
            return Err(Error::Inequality(format!("k ≤ ϰ < n − k' (k={k}, ϰ={kappa}, n−k'={})", n - kp)));
        }
        Ok(())
    }

    /// Injectivity of R* and the admissible range n − k′ − 1 ≤ ϰ < k + 1 of the dual pipeline.
    pub fn validate_dual_inversion(&self) -> Result<()> {
        let (n, k, kp, kappa) = (self.n, self.k, self.k_prime, self.kappa);
        if k + kp < n - 1 {
            return Err(Error::Inequality(format!("k + k' ≥ n − 1 required for injectivity of R* ({k} + {kp} < {})", n - 1)));
        }
        if kappa + kp + 1 < n || kappa > k {
            return Err(Error::Inequality(format!("n − k' − 1 ≤ ϰ < k + 1 (ϰ={kappa}, n−k'−1={}, k+1={})", n - kp - 1, k + 1)));
        }
        Ok(())
    }

    /// Dimension k₁ = k′ + ϰ − k of the planes in the second step of the general pipeline.
    pub fn k1(&self) -> usize {
        self.k_prime + self.kappa - self.k
    }
}

fn fibre_rule(nodes: usize, decay: f64) -> Rule {
    line_rule(nodes, decay)
}

/// ∫ over `basis`-span of g(x) dx by a tensor rule (dimension up to 3).
fn fibre_integral(basis: &[Vector], rule: &Rule, n: usize, mut g: impl FnMut(&[f64]) -> Result<f64>) -> Result<f64> {
    let d = basis.len();
    if d == 0 {
        return g(&zeros(n));
    }
    let q = rule.nodes.len();
    let mut idx = vec![0usize; d];
    let mut acc = Vec::with_capacity(q.pow(d as u32));
    loop {
        let mut x = zeros(n);
        let mut w = 1.0;
        for (a, &i) in idx.iter().enumerate() {
            x = axpy(&x, rule.nodes[i], &basis[a]);
            w *= rule.weights[i];
        }
        acc.push(w * g(&x)?);
        let mut a = 0;
        loop {
            if a == d {
                return Ok(pairwise_sum(&acc));
            }
            idx[a] += 1;
            if idx[a] < q {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// (Rf)(ζ) for ζ = (η, v) ∈ AG(n,k′).
pub fn radon_forward(f: &AffineFieldFn, zeta: &AffinePlane, cfg: &PipelineConfig) -> Result<f64> {
    let kp = zeta.k();
    if zeta.n() != f.n || kp <= f.k {
        return Err(Error::Dimension(format!("forward transform from AG({},{}) to AG({},{kp})", f.n, f.k, zeta.n())));
    }
    let fibre = (kp - f.k) as f64;
    if f.decay <= fibre {
        return Err(Error::Decay(format!("decay exponent {} must exceed k' − k = {fibre}", f.decay)));
    }
    let rule = fibre_rule(cfg.line_nodes, f.decay);
    let eta = zeta.subspace();
    let v = zeta.offset();
    let mut s = 0.0;
    for (xi, w) in cfg.outer.grassmann_nodes(eta, f.k)? {
        let fibre_basis = xi.complement_within(eta)?;
        let inner = fibre_integral(fibre_basis.columns(), &rule, f.n, |x| {
            let off: Vector = v.iter().zip(x).map(|(a, b)| a + b).collect();
            f.eval(&AffinePlane::through(xi.clone(), &off))
        })?;
        s += w * inner;
    }
    Ok(s)
}

/// The forward transform as a lazily evaluated field on AG(n,k′).
pub fn forward_field(f: &AffineFieldFn, cfg: &PipelineConfig) -> AffineFieldFn {
    let (g, c) = (f.clone(), cfg.clone());
    AffineFieldFn::from_fallible(f.n, cfg.k_prime, f.decay - (cfg.k_prime - f.k) as f64, move |z| radon_forward(&g, z, &c))
}

/// (R*φ)(τ) for τ = (ξ, u) ∈ AG(n,k), by cubature over η ⊃ ξ.
pub fn radon_dual(phi: &AffineFieldFn, tau: &AffinePlane, cfg: &PipelineConfig) -> Result<f64> {
    let k = tau.k();
    if tau.n() != phi.n || k >= phi.k {
        return Err(Error::Dimension(format!("dual transform from AG({},{}) to AG({},{k})", phi.n, phi.k, tau.n())));
    }
    let xi = tau.subspace();
    let perp = xi.complement();
    let nodes = if perp.k() == 2 && phi.k - k == 1 {
        clustered_half_circle(&perp, tau.offset(), cfg.outer.circle)?
    } else {
        cfg.outer.grassmann_nodes(&perp, phi.k - k)?
    };
    let mut s = 0.0;
    for (e, w) in nodes {
        let eta = xi.direct_sum(&e)?;
        s += w * phi.eval(&AffinePlane::through(eta, tau.offset()))?;
    }
    Ok(s)
}

/// Lines of a plane V, weighted by the invariant measure, clustered around the direction of u.
///
/// For |u| = R the plane through u along the line at angle θ from u lies at distance R|sin θ|
/// from the origin, so integrands concentrate in a window of width ~1/R. The periodic map
/// θ = atan(tan v / R) with the midpoint rule in v resolves that window; it is the identity
/// for R ≤ 1.
fn clustered_half_circle(v: &GrassmannPoint, u: &[f64], circle: usize) -> Result<Vec<(GrassmannPoint, f64)>> {
    let r = norm(u).max(1.0);
    let cols = v.columns();
    let (e0, e1) = if norm(u) > 1e-12 {
        let e0 = scale(u, 1.0 / norm(u));
        let rest = GrassmannPoint::span(v.n(), std::slice::from_ref(&e0))?.complement_within(v)?;
        let e1 = rest.columns()[0].clone();
        (e0, e1)
    } else {
        (cols[0].clone(), cols[1].clone())
    };
    let m = circle.div_ceil(2).max(1);
    (0..m)
        .map(|i| {
            let vv = -PI / 2.0 + PI * (i as f64 + 0.5) / m as f64;
            let th = vv.sin().atan2(r * vv.cos());
            let jac = r / (r * r * vv.cos().powi(2) + vv.sin().powi(2));
            let dir = axpy(&scale(&e0, th.cos()), th.sin(), &e1);
            Ok((GrassmannPoint::from_frame(v.n(), &[dir])?, jac / m as f64))
        })
        .collect()
}

/// Monte Carlo estimate (mean, standard error) of (R*φ)(τ) with Haar-random η ⊃ ξ.
pub fn radon_dual_mc(phi: &AffineFieldFn, tau: &AffinePlane, samples: usize, seed: StreamHandle) -> Result<(f64, f64)> {
    let k = tau.k();
    if tau.n() != phi.n || k >= phi.k || samples < 2 {
        return Err(invalid("dual transform needs k < k' and at least two samples"));
    }
    let xi = tau.subspace();
    let perp = xi.complement();
    let mut stream = seed.rng();
    let mut vals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let e = sample_grassmann_within(&perp, phi.k - k, &mut stream)?;
        vals.push(phi.eval(&AffinePlane::through(xi.direct_sum(&e)?, tau.offset()))?);
    }
    Ok(mean_and_se(&vals))
}

/// Sample mean and its standard error.
pub fn mean_and_se(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = pairwise_sum(vals) / n;
    let sq: Vec<f64> = vals.iter().map(|v| (v - mean).powi(2)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// The dual transform as a lazily evaluated field on AG(n,k).
pub fn dual_field(phi: &AffineFieldFn, k: usize, cfg: &PipelineConfig) -> AffineFieldFn {
    let (g, c) = (phi.clone(), cfg.clone());
    AffineFieldFn::from_fallible(phi.n, k, f64::NAN, move |t| radon_dual(&g, t, &c))
}

/// Unit vector spanning the first direction of η^⊥.
fn normal_direction(eta: &GrassmannPoint) -> Vector {
    eta.complement().columns()[0].clone()
}

type ProfileCache = Arc<DashMap<PlaneKey, RadialGridFn>>;

fn tail_for(decay: f64) -> TailModel {
    if decay.is_infinite() {
        TailModel::GaussianFit
    } else {
        TailModel::PowerFit { exponent: decay }
    }
}

/// Reconstructs a quasi-radial f on AG(n,1) from φ = Rf on AG(n,k′). The result is evaluated
/// lazily; radial profiles are computed once per subspace ξ and cached.
pub fn invert_quasi_radial(phi: &AffineFieldFn, cfg: &PipelineConfig) -> Result<AffineFieldFn> {
    if cfg.k != 1 || phi.k != cfg.k_prime || phi.n != cfg.n {
        return Err(unsupported("quasi-radial inversion is implemented for k = 1"));
    }
    if cfg.k + cfg.k_prime > cfg.n {
        return Err(Error::Inequality("k + k' ≤ n required: Funk transform not injective".into()));
    }
    let cache: ProfileCache = Arc::new(DashMap::new());
    let (phi, cfg) = (phi.clone(), cfg.clone());
    let decay = phi.decay + (cfg.k_prime - cfg.k) as f64;
    Ok(AffineFieldFn::from_fallible(cfg.n, 1, decay, move |tau: &AffinePlane| {
        let key = plane_key(&AffinePlane::through(tau.subspace().clone(), &zeros(cfg.n)));
        if !cache.contains_key(&key) {
            let xi = canonical_plane(&key, cfg.n, 1)?.subspace().clone();
            let p = quasi_radial_profile(&phi, &xi, &cfg)?;
            cache.insert(key.clone(), p);
        }
        cache.get(&key).unwrap().eval(tau.distance())
    }))
}

/// Radial profile r ↦ f₀(ξ, r) of the quasi-radial inverse.
pub fn quasi_radial_profile(phi: &AffineFieldFn, xi: &GrassmannPoint, cfg: &PipelineConfig) -> Result<RadialGridFn> {
    let alpha = (cfg.k_prime - cfg.k) as f64 / 2.0;
    let nodes = RadialGridFn::uniform_nodes(cfg.radial.r_max, cfg.radial.intervals);
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&s| {
            let ph = phi.clone();
            let slice = GrassFn::from_fallible(cfg.n, cfg.k_prime, move |eta| {
                let e = normal_direction(eta);
                ph.eval(&AffinePlane::new(eta.clone(), crate::geometry::scale(&e, s))?)
            });
            Ok(funk_invert(&slice, xi, &cfg.funk)?.value)
        })
        .collect::<Result<_>>()?;
    let h = RadialGridFn::unchecked(nodes, values, tail_for(phi.decay))?;
    let d = frac_derivative_with(&h, FracOrder::ek_minus(alpha), DerivativeForm::Default, Options { interpolation: Interpolation::Cubic })?;
    let c = PI.powf(-alpha);
    RadialGridFn::unchecked(d.nodes().to_vec(), d.values().iter().map(|v| c * v).collect(), d.tail())
}

/// Constant c in the dual quasi-radial inversion: π^{(k′−k)/2} σ_{n−k′−1} / σ_{n−k−1}.
pub fn dual_quasi_radial_constant(n: usize, k: usize, k_prime: usize) -> Result<f64> {
    Ok(PI.powf((k_prime - k) as f64 / 2.0) * surface_area(n as i64 - k_prime as i64 - 1)?
        / surface_area(n as i64 - k as i64 - 1)?)
}

/// Spherical mean (M_ξ f)(r): average of f(ξ, rθ) over unit θ ∈ ξ^⊥.
fn spherical_mean(f: &AffineFieldFn, xi: &GrassmannPoint, r: f64, cub: &Cubature) -> Result<f64> {
    let perp = xi.complement();
    let mut s = 0.0;
    for (theta, w) in cub.sphere_nodes(&perp)? {
        s += w * f.eval(&AffinePlane::new(xi.clone(), crate::geometry::scale(&theta, r))?)?;
    }
    Ok(s)
}

/// Reconstructs a quasi-radial φ on AG(n, n−1) from f = R*φ on AG(n,1).
pub fn dual_quasi_radial_invert(f: &AffineFieldFn, cfg: &PipelineConfig) -> Result<AffineFieldFn> {
    if cfg.k != 1 || cfg.k_prime != cfg.n - 1 || f.k != 1 || f.n != cfg.n {
        return Err(unsupported("dual quasi-radial inversion is implemented for k = 1, k' = n − 1"));
    }
    let cache: ProfileCache = Arc::new(DashMap::new());
    let (f, cfg) = (f.clone(), cfg.clone());
    Ok(AffineFieldFn::from_fallible(cfg.n, cfg.k_prime, f64::NAN, move |zeta: &AffinePlane| {
        let key = plane_key(&AffinePlane::through(zeta.subspace().clone(), &zeros(cfg.n)));
        if !cache.contains_key(&key) {
            let eta = canonical_plane(&key, cfg.n, cfg.k_prime)?.subspace().clone();
            let p = dual_quasi_radial_profile(&f, &eta, &cfg)?;
            cache.insert(key.clone(), p);
        }
        cache.get(&key).unwrap().eval(zeta.distance())
    }))
}

/// Radial profile t ↦ φ₀(η, t) of the dual quasi-radial inverse.
pub fn dual_quasi_radial_profile(f: &AffineFieldFn, eta: &GrassmannPoint, cfg: &PipelineConfig) -> Result<RadialGridFn> {
    let (n, k, kp) = (cfg.n, cfg.k, cfg.k_prime);
    let alpha = (kp - k) as f64 / 2.0;
    let c = dual_quasi_radial_constant(n, k, kp)?;
    let nodes = RadialGridFn::uniform_nodes(cfg.radial.r_max, cfg.radial.intervals);
    let line = eta.complement();
    let psi: Vec<f64> = nodes
        .par_iter()
        .map(|&t| {
            // (F*)⁻¹ = T F̃⁻¹ T applied to ξ ↦ (M_ξ f)(t), evaluated at η.
            let (g, cub) = (f.clone(), cfg.outer.clone());
            let t_data = GrassFn::from_fallible(n, n - 1, move |p| spherical_mean(&g, &p.complement(), t, &cub));
            let v = funk_invert(&t_data, &line, &cfg.funk)?.value;
            Ok(t.powi(n as i32 - k as i32 - 2) * v)
        })
        .collect::<Result<_>>()?;
    let psi = RadialGridFn::unchecked(nodes, psi, TailModel::Zero)?;
    let d = frac_derivative_with(&psi, FracOrder::ek_plus(alpha), DerivativeForm::Default, Options { interpolation: Interpolation::Cubic })?;
    let power = kp as i32 + 2 - n as i32;
    let values: Vec<f64> = d.nodes().iter().zip(d.values()).map(|(t, v)| t.powi(power) * v / c).collect();
    let mut out = RadialGridFn::unchecked(d.nodes().to_vec(), values, TailModel::Zero)?;
    if power > 0 || !out.values()[0].is_finite() {
        // The value at t = 0 is a limit; extrapolate it from the neighbours.
        let nodes = out.nodes().to_vec();
        let mut vals = out.values().to_vec();
        vals[0] = f64::NAN;
        vals[0] = crate::fracint::interpolate(&nodes, &vals, 0.0);
        out = RadialGridFn::unchecked(nodes, vals, TailModel::Zero)?;
    }
    Ok(out)
}

/// A point (h, ξ, α) of the auxiliary manifold: ξ ⊂ h ∈ G(n,ℓ), α ∈ h^⊥.
#[derive(Clone, Debug)]
pub struct TripleSample {
    pub h: GrassmannPoint,
    pub xi: GrassmannPoint,
    pub a: Vector,
}

impl TripleSample {
    pub fn new(h: GrassmannPoint, xi: GrassmannPoint, a: Vector) -> Result<Self> {
        if !xi.is_subspace_of(&h) {
            return Err(invalid("ξ is not contained in h"));
        }
        if norm(&h.project(&a)) > 1e-9 * norm(&a).max(1.0) {
            return Err(invalid("α is not orthogonal to h"));
        }
        Ok(TripleSample { h, xi, a })
    }

    /// The triple attached to a plane ω = ω₀ + α of ξ^⊥: h = ω₀ ⊕ ξ.
    pub fn from_plane_in_complement(xi: &GrassmannPoint, omega: &AffinePlane) -> Result<Self> {
        let h = omega.subspace().direct_sum(xi)?;
        TripleSample::new(h, xi.clone(), omega.offset().clone())
    }
}

/// G_{h,α}(η) = ∫ over (η^⊥ ∩ h) + α of Rf, for η ∈ G_{k′}(h).
fn section_integral(rf: &AffineFieldFn, h: &GrassmannPoint, a: &[f64], eta: &GrassmannPoint, rule: &Rule) -> Result<f64> {
    let fibre = eta.complement_within(h)?;
    fibre_integral(fibre.columns(), rule, rf.n, |x| {
        let off: Vector = a.iter().zip(x).map(|(p, q)| p + q).collect();
        rf.eval(&AffinePlane::through(eta.clone(), &off))
    })
}

/// g(h, ξ, α): Funk inversion inside h of the sections G_{h,α}, evaluated at ξ.
pub fn step1_g(rf: &AffineFieldFn, triple: &TripleSample, cfg: &PipelineConfig) -> Result<Limit> {
    let rule = fibre_rule(cfg.line_nodes, rf.decay);
    let (h, a) = (triple.h.clone(), triple.a.clone());
    let r = rf.clone();
    let sections = GrassFn::from_fallible(cfg.n, cfg.k_prime, move |eta| section_integral(&r, &h, &a, eta, &rule));
    funk_invert_in(&sections, &triple.h, &triple.xi, &cfg.funk)
}

/// Sections G_{h,α}(η) as a function on G_{k′}(h) (for consistency checks).
pub fn sections(rf: &AffineFieldFn, h: &GrassmannPoint, a: &[f64], eta: &GrassmannPoint, cfg: &PipelineConfig) -> Result<f64> {
    section_integral(rf, h, a, eta, &fibre_rule(cfg.line_nodes, rf.decay))
}

/// f(ξ,u) from g via the d-plane inversion in ξ^⊥ applied to ω ↦ g(ω₀ ⊕ ξ, ξ, α_ω).
pub fn step2_reconstruct(
    g: impl Fn(&TripleSample) -> Result<f64> + Send + Sync + 'static,
    tau: &AffinePlane,
    cfg: &PipelineConfig,
) -> Result<Limit> {
    let xi = tau.subspace().clone();
    let perp = xi.complement();
    let k1 = cfg.k1();
    let xi2 = xi.clone();
    let field = PlaneFieldFn::new(cfg.n, k1, f64::INFINITY, move |omega| {
        g(&TripleSample::from_plane_in_complement(&xi2, omega)?)
    });
    dplane_invert_in(&field, &perp, tau.offset(), &cfg.radon_john)
}

/// Reconstructs f(τ) from Rf through the two-step pipeline.
pub fn invert_general(rf: &AffineFieldFn, tau: &AffinePlane, cfg: &PipelineConfig) -> Result<Limit> {
    cfg.validate_forward_inversion()?;
    if cfg.k != 1 {
        return Err(unsupported("the general pipeline is implemented for k = 1"));
    }
    if rf.k != cfg.k_prime || rf.n != cfg.n || tau.k() != cfg.k || tau.n() != cfg.n {
        return Err(Error::Dimension("field and target plane do not match the configuration".into()));
    }
    let rf = if cfg.memoize { rf.memoized() } else { rf.clone() };
    let c = cfg.clone();
    step2_reconstruct(move |triple| Ok(step1_g(&rf, triple, &c)?.value), tau, cfg)
}

/// Constant σ_{n−k′−1}/σ_{n−k−1} relating the dual transform to its Kelvin conjugate.
pub fn kelvin_constant(n: usize, k: usize, k_prime: usize) -> Result<f64> {
    Ok(surface_area(n as i64 - k_prime as i64 - 1)? / surface_area(n as i64 - k as i64 - 1)?)
}

/// (Aφ)(ζ̃) = |ζ̃|^{k−n} φ(ν(ζ̃)) for ζ̃ ∈ AG(n, n−k′−1).
pub fn kelvin_pullback(phi: &AffineFieldFn, k: usize) -> AffineFieldFn {
    let p = phi.clone();
    let (n, kp) = (phi.n, phi.k);
    let decay = f64::NAN;
    AffineFieldFn::from_fallible(n, n - kp - 1, decay, move |zt| {
        let d = zt.distance();
        Ok(d.powi(k as i32 - n as i32) * p.eval(&zt.kelvin()?)?)
    })
}

/// Reconstructs φ(ζ) from f = R*φ through the Kelvin map and a d-plane inversion.
pub fn dual_general_invert(f: &AffineFieldFn, zeta: &AffinePlane, cfg: &PipelineConfig) -> Result<Limit> {
    cfg.validate_dual_inversion()?;
    let (n, k, kp) = (cfg.n, cfg.k, cfg.k_prime);
    if kp != n - 1 {
        return Err(unsupported("the dual pipeline is implemented for k' = n − 1"));
    }
    if f.k != k || f.n != n || zeta.k() != kp || zeta.n() != n {
        return Err(Error::Dimension("field and target plane do not match the configuration".into()));
    }
    let c = kelvin_constant(n, k, kp)?;
    let x = zeta.kelvin()?;
    let d = n - k - 1;
    let g = f.clone();
    // f₁(τ̃) = c⁻¹ |τ̃|^{k′−n} f(ν(τ̃)) on AG(n, n−k−1), decaying like |τ̃|^{k′−n}.
    let f1 = PlaneFieldFn::new(n, d, (n - kp) as f64, move |tt| {
        let dist = tt.distance();
        Ok(dist.powi(kp as i32 - n as i32) * g.eval(&tt.kelvin()?)? / c)
    });
    // f₁ concentrates near the origin and is nearly homogeneous away from it, so shifted
    // means at a far point x vary on scales up to |x|; the t-grid is stretched by √|x|,
    // balancing the grid step against the reach of the tail fit.
    let mut rj = cfg.radon_john.clone();
    rj.t_max *= norm(x.offset()).max(1.0).sqrt();
    if let RotationAverage::Cubature(cubature) = &rj.average {
        rj.average = RotationAverage::Focused { cubature: cubature.clone(), focus: zeros(n) };
    }
    let lim = dplane_invert(&f1, x.offset(), &rj)?;
    let s = zeta.distance().powi(k as i32 - n as i32);
    Ok(Limit { value: s * lim.value, error_bar: s * lim.error_bar })
}
