//! Funk-type transforms between Grassmannians and their inversion.
//!
//! The forward transform averages a function on G(n,k) over the k-subspaces of an
//! k′-subspace η; the dual averages a function on G(n,k′) over the k′-subspaces containing
//! a k-subspace ξ. For k = 1 the forward transform is inverted through the mean-value
//! operator M*_r (the average over the level set {η : cos²∠(ξ,η) = r}) followed by a
//! Riemann–Liouville derivative of fractional order evaluated at r → 1.
//!
//! Every operation accepts an optional ambient subspace V ⊂ ℝⁿ in which the Grassmannians
//! live; by default V = ℝⁿ.

use std::sync::Arc;

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{invalid, unsupported, Error, Result};
use crate::fracint::{raw_integral, FracOrder, Interpolation, Options, TailModel, STENCIL_EXTRA};
use crate::geometry::{axpy, scale, Cubature, GrassmannPoint, Vector};
use crate::harmonics::EvenHarmonics;
use crate::quadrature::{derivative_at, richardson, Limit, SphereRule};
use crate::tolerances::Tolerances;

type Callable = Arc<dyn Fn(&GrassmannPoint) -> Result<f64> + Send + Sync>;

/// Samples of a function at quadrature points of a Grassmannian.
#[derive(Clone, Debug)]
pub struct SampleTable {
    pub points: Vec<GrassmannPoint>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampleTable {
    /// Lines (k = 1) or planes with the given normals (k = 2) of ℝ³ at the nodes of `rule`.
    pub fn on_sphere_rule(k: usize, rule: &SphereRule, f: impl Fn(&GrassmannPoint) -> f64) -> Result<Self> {
        let mut points = Vec::with_capacity(rule.len());
        for p in &rule.points {
            let line = GrassmannPoint::span(3, &[crate::geometry::vector(p)])?;
            points.push(match k {
                1 => line,
                2 => line.complement(),
                _ => return Err(invalid("sphere-rule tables hold lines or planes of ℝ³")),
            });
        }
        let values = points.iter().map(&f).collect();
        Ok(SampleTable { points, weights: rule.weights.clone(), values })
    }
}

#[derive(Clone)]
pub enum Repr {
    Table(SampleTable),
    /// Even harmonics on S²; lines are evaluated at their direction, planes at their normal.
    Harmonics(EvenHarmonics),
    Callable(Callable),
}

/// A function on the Grassmannian G(n,k).
#[derive(Clone)]
pub struct GrassFn {
    n: usize,
    k: usize,
    repr: Repr,
}

impl std::fmt::Debug for GrassFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.repr {
            Repr::Table(t) => format!("table[{}]", t.points.len()),
            Repr::Harmonics(h) => format!("harmonics[band {}]", h.band()),
            Repr::Callable(_) => "callable".to_string(),
        };
        write!(f, "GrassFn(G({},{}), {kind})", self.n, self.k)
    }
}

fn direction3(v: &Vector) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

impl GrassFn {
    pub fn from_fn(n: usize, k: usize, f: impl Fn(&GrassmannPoint) -> f64 + Send + Sync + 'static) -> Self {
        GrassFn { n, k, repr: Repr::Callable(Arc::new(move |p| Ok(f(p)))) }
    }

    pub fn from_fallible(n: usize, k: usize, f: impl Fn(&GrassmannPoint) -> Result<f64> + Send + Sync + 'static) -> Self {
        GrassFn { n, k, repr: Repr::Callable(Arc::new(f)) }
    }

    /// Harmonic representation on G(3,1) or G(3,2).
    pub fn harmonics(k: usize, h: EvenHarmonics) -> Result<Self> {
        if k != 1 && k != 2 {
            return Err(invalid("harmonic representation covers G(3,1) and G(3,2)"));
        }
        Ok(GrassFn { n: 3, k, repr: Repr::Harmonics(h) })
    }

    pub fn table(n: usize, k: usize, t: SampleTable) -> Result<Self> {
        if t.points.iter().any(|p| p.n() != n || p.k() != k) {
            return Err(Error::Dimension(format!("table points are not in G({n},{k})")));
        }
        Ok(GrassFn { n, k, repr: Repr::Table(t) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn eval(&self, p: &GrassmannPoint) -> Result<f64> {
        if p.n() != self.n || p.k() != self.k {
            return Err(Error::Dimension(format!(
                "point of G({},{}) passed to a function on G({},{})",
                p.n(),
                p.k(),
                self.n,
                self.k
            )));
        }
        match &self.repr {
            Repr::Callable(f) => f(p),
            Repr::Harmonics(h) => {
                let dir = if self.k == 1 { p.columns()[0].clone() } else { p.complement().columns()[0].clone() };
                Ok(h.eval(direction3(&dir)))
            }
            Repr::Table(t) => t
                .points
                .iter()
                .position(|q| q.approx_eq(p))
                .map(|i| t.values[i])
                .ok_or(Error::NotInTable),
        }
    }

    /// Harmonic projection of an n = 3 table built on a sphere rule.
    pub fn to_harmonics(&self, band: usize) -> Result<EvenHarmonics> {
        match &self.repr {
            Repr::Harmonics(h) => Ok(h.clone()),
            Repr::Table(t) if self.n == 3 => {
                let rule = SphereRule {
                    points: t
                        .points
                        .iter()
                        .map(|p| {
                            let dir = if self.k == 1 { p.columns()[0].clone() } else { p.complement().columns()[0].clone() };
                            direction3(&dir)
                        })
                        .collect(),
                    weights: t.weights.clone(),
                };
                EvenHarmonics::project(band, &rule, &t.values)
            }
            _ => Err(unsupported("harmonic projection needs a table on G(3,1) or G(3,2)")),
        }
    }
}

/// The map (Tψ)(h^⊥) = ψ(h), taking functions on G(n,k) to functions on G(n,n−k).
pub fn orthocomplement(f: &GrassFn) -> GrassFn {
    let (n, k) = (f.n, f.k);
    let repr = match &f.repr {
        Repr::Harmonics(h) => Repr::Harmonics(h.clone()),
        Repr::Table(t) => Repr::Table(SampleTable {
            points: t.points.iter().map(|p| p.complement()).collect(),
            weights: t.weights.clone(),
            values: t.values.clone(),
        }),
        Repr::Callable(_) => {
            let inner = f.clone();
            Repr::Callable(Arc::new(move |p: &GrassmannPoint| inner.eval(&p.complement())))
        }
    };
    GrassFn { n, k: n - k, repr }
}

/// Quadrature budgets for Funk-type transforms.
#[derive(Clone, Debug)]
pub struct FunkConfig {
    pub cubature: Cubature,
    /// Number of intervals of the r-grid on [0,1] used by the inversion.
    pub radial_intervals: usize,
    pub interpolation: Interpolation,
    /// Step δ of the evaluation points 1 − δ, 1 − 2δ, 1 − 4δ of the boundary limit.
    pub limit_step: f64,
    /// Relative error bar above which the boundary limit is reported unresolved.
    pub limit_tolerance: f64,
}

impl Default for FunkConfig {
    fn default() -> Self {
        FunkConfig {
            cubature: Cubature::new(256, 16),
            radial_intervals: 64,
            interpolation: Interpolation::Cubic,
            limit_step: 0.01,
            limit_tolerance: Tolerances::default().limit_resolution,
        }
    }
}

impl FunkConfig {
    /// Smaller budgets for use inside nested pipelines.
    pub fn coarse(circle: usize, sphere_order: usize, radial_intervals: usize) -> Self {
        FunkConfig { cubature: Cubature::new(circle, sphere_order), radial_intervals, ..Default::default() }
    }
}

fn whole_space(n: usize) -> GrassmannPoint {
    GrassmannPoint::whole(n).expect("ambient dimension validated by caller")
}

/// Forward transform (Fφ)(η): average of φ over the k-subspaces of η.
pub fn funk_forward(phi: &GrassFn, eta: &GrassmannPoint, cfg: &FunkConfig) -> Result<f64> {
    funk_forward_in(phi, &whole_space(phi.n), eta, cfg)
}

pub fn funk_forward_in(phi: &GrassFn, ambient: &GrassmannPoint, eta: &GrassmannPoint, cfg: &FunkConfig) -> Result<f64> {
    if eta.k() <= phi.k || !eta.is_subspace_of(ambient) {
        return Err(Error::Dimension(format!(
            "forward transform needs a subspace of V of dimension > {}, got {}",
            phi.k,
            eta.k()
        )));
    }
    let mut s = 0.0;
    for (xi, w) in cfg.cubature.grassmann_nodes(eta, phi.k)? {
        s += w * phi.eval(&xi)?;
    }
    Ok(s)
}

/// Dual transform (F*ψ)(ξ): average of ψ over the k′-subspaces of V containing ξ.
pub fn funk_dual(psi: &GrassFn, xi: &GrassmannPoint, cfg: &FunkConfig) -> Result<f64> {
    funk_dual_in(psi, &whole_space(psi.n), xi, cfg)
}

pub fn funk_dual_in(psi: &GrassFn, ambient: &GrassmannPoint, xi: &GrassmannPoint, cfg: &FunkConfig) -> Result<f64> {
    if xi.k() >= psi.k {
        return Err(Error::Dimension(format!(
            "dual transform needs a subspace of dimension < {}, got {}",
            psi.k,
            xi.k()
        )));
    }
    let perp = xi.complement_within(ambient)?;
    let mut s = 0.0;
    for (e, w) in cfg.cubature.grassmann_nodes(&perp, psi.k - xi.k())? {
        s += w * psi.eval(&xi.direct_sum(&e)?)?;
    }
    Ok(s)
}

/// Mean value (M*_r ψ)(ξ) over {η ∈ G_{k′}(V) : cos²∠(ξ,η) = r} for a line ξ.
pub fn mean_value_mstar(psi: &GrassFn, xi: &GrassmannPoint, r: f64, cfg: &FunkConfig) -> Result<f64> {
    mean_value_mstar_in(psi, &whole_space(psi.n), xi, r, cfg)
}

pub fn mean_value_mstar_in(
    psi: &GrassFn,
    ambient: &GrassmannPoint,
    xi: &GrassmannPoint,
    r: f64,
    cfg: &FunkConfig,
) -> Result<f64> {
    if xi.k() != 1 {
        return Err(unsupported("the mean-value operator is implemented for lines (k = 1)"));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid(format!("level r = {r} outside [0,1]")));
    }
    let kp = psi.k;
    if kp < 1 || kp >= ambient.k() {
        return Err(Error::Dimension(format!("k' = {kp} in a {}-dimensional space", ambient.k())));
    }
    let y = &xi.columns()[0];
    let perp = xi.complement_within(ambient)?;
    let (a, b) = (r.sqrt(), (1.0 - r).max(0.0).sqrt());
    let mut s = 0.0;
    for (w, weight) in cfg.cubature.sphere_nodes(&perp)? {
        let sigma = axpy(&scale(y, a), b, &w);
        let sigma_line = GrassmannPoint::span(ambient.n(), &[sigma])?;
        let yw = GrassmannPoint::span(ambient.n(), &[y.clone(), w.clone()])?;
        let rest = yw.complement_within(ambient)?;
        let mut inner = 0.0;
        for (e, we) in cfg.cubature.grassmann_nodes(&rest, kp - 1)? {
            inner += we * psi.eval(&sigma_line.direct_sum(&e)?)?;
        }
        s += weight * inner;
    }
    Ok(s)
}

/// Nodes of the r-grid on [0,1], clustered toward r = 1.
fn radial_nodes(intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|j| (0.5 * PI * j as f64 / intervals as f64).sin())
        .collect()
}

/// Inverse of the forward transform from G(n,1) to G(n,k′), evaluated at the line ξ.
///
/// Returns the boundary limit with its Richardson error bar.
pub fn funk_invert(psi: &GrassFn, xi: &GrassmannPoint, cfg: &FunkConfig) -> Result<Limit> {
    funk_invert_in(psi, &whole_space(psi.n), xi, cfg)
}

pub fn funk_invert_in(psi: &GrassFn, ambient: &GrassmannPoint, xi: &GrassmannPoint, cfg: &FunkConfig) -> Result<Limit> {
    let kp = psi.k;
    let l = ambient.k();
    if xi.k() != 1 {
        return Err(unsupported("inversion is implemented for functions on lines (k = 1)"));
    }
    if kp < 2 || kp >= l {
        return Err(Error::Inequality(format!("1 < k' < dim V (k' = {kp}, dim V = {l})")));
    }
    let alpha = (kp as f64 - 1.0) / 2.0;
    let m = alpha.floor() as usize + 1;
    let c = PI.sqrt() / gamma(kp as f64 / 2.0);

    let r = radial_nodes(cfg.radial_intervals);
    let mut tilde = Vec::with_capacity(r.len());
    for &ri in &r {
        let mv = mean_value_mstar_in(psi, ambient, xi, ri, cfg)?;
        let weight = if (alpha - 0.5).abs() < 1e-12 { 1.0 } else { ri.powf(alpha - 0.5) };
        tilde.push(weight * mv);
    }
    let integral = raw_integral(
        &r,
        &tilde,
        FracOrder::rl_plus(m as f64 - alpha),
        TailModel::Zero,
        Options { interpolation: cfg.interpolation },
    )?;
    let at = |x: f64| derivative_at(&r, &integral, x, m, m + STENCIL_EXTRA);
    // The limit r → 1 is read off a one-sided stencil at r = 1; a Richardson extrapolation
    // from 1 − δ, 1 − 2δ, 1 − 4δ provides the error bar.
    let d = cfg.limit_step;
    let lim = richardson(at(1.0 - d), at(1.0 - 2.0 * d), at(1.0 - 4.0 * d), 1.0, 2.0);
    let direct = at(1.0);
    let value = c * direct;
    let error_bar = c * (direct - lim.value).abs();
    let scale = tilde.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(value.abs());
    // Round-off floor: a profile that vanishes identically has no meaningful relative bar.
    if !value.is_finite() || error_bar > (cfg.limit_tolerance * scale).max(1e-12) {
        return Err(Error::LimitUnresolved { value, error_bar });
    }
    Ok(Limit { value, error_bar })
}

/// Inverse of the dual transform from G(n,n−1) to G(n,1): (F*)⁻¹ = T F̃⁻¹ T, returned as a
/// lazily evaluated function on G(n,n−1).
pub fn funk_dual_invert(f: &GrassFn, cfg: &FunkConfig) -> Result<GrassFn> {
    let n = f.n;
    if f.k != 1 {
        return Err(unsupported("dual inversion is implemented for data on lines (k = 1)"));
    }
    if n < 3 {
        return Err(Error::Inequality("k + k' ≥ n with 1 < k' < n needs n ≥ 3".into()));
    }
    let t_f = orthocomplement(f);
    let cfg = cfg.clone();
    Ok(GrassFn::from_fallible(n, n - 1, move |eta: &GrassmannPoint| {
        Ok(funk_invert(&t_f, &eta.complement(), &cfg)?.value)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::vector;

    #[test]
    fn constants_are_fixed_points() {
        let one = GrassFn::from_fn(3, 2, |_| 1.0);
        let xi = GrassmannPoint::span(3, &[vector(&[0.3, -0.2, 0.9])]).unwrap();
        let cfg = FunkConfig::coarse(64, 8, 32);
        let v = funk_invert(&one, &xi, &cfg).unwrap();
        assert!((v.value - 1.0).abs() < 1e-6 && v.error_bar < 1e-4, "{v:?}");
    }

    #[test]
    fn mean_value_level_set() {
        // cos² of the angle between ξ and each sampled plane equals r.
        let xi = GrassmannPoint::span(3, &[vector(&[1.0, 2.0, 2.0])]).unwrap();
        let probe = {
            let xi = xi.clone();
            GrassFn::from_fn(3, 2, move |eta| crate::geometry::cos2_angle(eta, &xi).unwrap())
        };
        let v = mean_value_mstar(&probe, &xi, 0.37, &FunkConfig::coarse(32, 4, 16)).unwrap();
        assert!((v - 0.37).abs() < 1e-12);
    }
}
