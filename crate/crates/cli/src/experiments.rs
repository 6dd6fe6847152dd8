//! Experiment runners: each turns a validated spec into report rows.

use std::f64::consts::PI;

use anyhow::{bail, Result};
use rayon::prelude::*;

use grassradon::affine_radon::{
    dual_field, dual_general_invert, dual_quasi_radial_profile, forward_field, invert_general, mean_and_se,
    quasi_radial_profile, radon_dual, radon_forward, AffineFieldFn, PipelineConfig,
};
use grassradon::fracint::{
    frac_derivative_with, frac_integral_with, DerivativeForm, FracOrder, Interpolation, Options, RadialGridFn, TailModel,
};
use grassradon::funk::{funk_dual, funk_forward, funk_invert, FunkConfig, GrassFn};
use grassradon::geometry::{sample_grassmann, vector, AffinePlane, Cubature, GrassmannPoint};
use grassradon::harmonics::{coefficient_count, funk_multiplier, EvenHarmonics};
use grassradon::phantom;
use grassradon::quadrature::{pairwise_sum, SphereRule};
use grassradon::radon_john::dplane_transform;
use grassradon::rng::Stream;
use grassradon::tolerances::Tolerances;
use grassradon::StreamHandle;

use crate::report::{format_list, Metric, ResultRow};
use crate::spec::{ExperimentSpec, Pipeline};

/// Monte Carlo samples per batch; batches use child streams so results are thread-count independent.
const BATCH: usize = 4096;

/// Runs an experiment. Validation happens before any computation.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let ctx = Ctx::new(spec);
    match spec.pipeline {
        Pipeline::Forward => forward(&ctx),
        Pipeline::Dual => dual(&ctx),
        Pipeline::InvertQr => invert_qr(&ctx),
        Pipeline::InvertGeneral => general(&ctx),
        Pipeline::InvertDualQr => invert_dual_qr(&ctx),
        Pipeline::InvertDualGeneral => dual_general(&ctx),
        Pipeline::Remark => remark(&ctx),
        Pipeline::EkIdentity => ek_identity(&ctx),
        Pipeline::Selftest => {
            let mut rows = remark(&ctx)?;
            rows.extend(ek_identity(&ctx)?);
            Ok(rows)
        }
        Pipeline::RadialReduction => radial_reduction(&ctx),
        Pipeline::Funk => funk(&ctx),
        Pipeline::Duality => duality(&ctx),
    }
}

struct Ctx<'a> {
    spec: &'a ExperimentSpec,
    tol: Tolerances,
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a ExperimentSpec) -> Self {
        Ctx { spec, tol: Tolerances::default() }
    }

    fn cfg(&self) -> Result<PipelineConfig> {
        self.spec.pipeline_config()
    }

    fn points(&self, default: usize) -> usize {
        self.spec.points.unwrap_or(default)
    }

    fn tolerance(&self, default: f64) -> f64 {
        self.spec.tolerance.unwrap_or(default)
    }

    /// Independent stream for a named purpose.
    fn stream(&self, purpose: u64) -> Stream {
        StreamHandle::new(self.spec.seed).split(purpose).rng()
    }

    fn is_zero(&self) -> bool {
        self.spec.phantom.name == "zero"
    }

    fn row(&self, check: &str, point: String, value: f64, reference: f64) -> ResultRow {
        ResultRow {
            experiment: self.spec.name.clone(),
            phantom: self.spec.phantom.name.clone(),
            seed: self.spec.seed,
            check: check.into(),
            point,
            value,
            reference,
            abs_err: (value - reference).abs(),
            error_bar: 0.0,
            metric: Metric::Info,
            tolerance: 0.0,
        }
    }

    /// Row with a verdict; zero references fall back to an absolute comparison.
    fn checked(&self, check: &str, point: String, value: f64, reference: f64, metric: Metric, tol: f64) -> ResultRow {
        let metric = if metric == Metric::Rel && reference == 0.0 { Metric::Abs } else { metric };
        let tolerance = if metric == Metric::Abs && reference == 0.0 && self.is_zero() { 1e-12 } else { tol };
        ResultRow { metric, tolerance, ..self.row(check, point, value, reference) }
    }

    /// Profile rows on [0, r_cut] plus an aggregate relative L² row.
    fn profile_rows(&self, label: &str, grid: &RadialGridFn, truth: impl Fn(f64) -> f64, r_cut: f64) -> Vec<ResultRow> {
        let mut rows = Vec::new();
        let (mut d2, mut g2, mut t2) = (Vec::new(), Vec::new(), Vec::new());
        for (&r, &v) in grid.nodes().iter().zip(grid.values()).filter(|(r, _)| **r <= r_cut + 1e-12) {
            let t = truth(r);
            rows.push(self.row("profile", format!("{label} r={r}"), v, t));
            d2.push((v - t).powi(2));
            g2.push(v * v);
            t2.push(t * t);
        }
        let (d, g, t) = (pairwise_sum(&d2).sqrt(), pairwise_sum(&g2).sqrt(), pairwise_sum(&t2).sqrt());
        let metric = if t > 0.0 { Metric::Rel } else { Metric::Abs };
        let tolerance = if t > 0.0 { self.tolerance(self.tol.quasi_radial) } else { 1e-12 };
        rows.push(ResultRow {
            abs_err: d,
            metric,
            tolerance,
            ..self.row("profile_rel_l2", format!("{label} r∈[0,{r_cut}]"), g, t)
        });
        rows
    }
}

fn describe(tau: &AffinePlane) -> String {
    let frame: Vec<f64> = tau.subspace().columns().iter().flat_map(|c| c.iter().copied()).collect();
    format!("frame={} offset={}", format_list(&frame), format_list(tau.offset()))
}

fn describe_subspace(p: &GrassmannPoint) -> String {
    let frame: Vec<f64> = p.columns().iter().flat_map(|c| c.iter().copied()).collect();
    format!("frame={}", format_list(&frame))
}

fn random_plane(n: usize, k: usize, spread: f64, s: &mut Stream) -> Result<AffinePlane> {
    let sub = sample_grassmann(n, k, s)?;
    let p: Vec<f64> = (0..n).map(|_| spread * s.gaussian()).collect();
    Ok(AffinePlane::through(sub, &p))
}

fn random_planes(n: usize, k: usize, spread: f64, count: usize, s: &mut Stream) -> Result<Vec<AffinePlane>> {
    (0..count).map(|_| random_plane(n, k, spread, s)).collect()
}

/// Centre of a shifted Gaussian (the last coordinate vector by default; 0 for plain Gaussians).
fn gaussian_center(ctx: &Ctx) -> Vec<f64> {
    let n = ctx.spec.config.n;
    match (ctx.spec.phantom.name.as_str(), &ctx.spec.phantom.center) {
        (_, Some(c)) => c.clone(),
        ("shifted_gaussian", None) => (0..n).map(|i| if i + 1 == n { 1.0 } else { 0.0 }).collect(),
        _ => vec![0.0; n],
    }
}

/// Phantom on AG(n,k) and its exact transform on AG(n,k′).
fn affine_gaussian(ctx: &Ctx) -> (AffineFieldFn, impl Fn(&AffinePlane) -> f64 + Send + Sync + Clone + 'static) {
    let (n, k) = (ctx.spec.config.n, ctx.spec.config.k);
    let a = gaussian_center(ctx);
    let zero = ctx.is_zero();
    let f = if zero {
        AffineFieldFn::new(n, k, f64::INFINITY, |_| 0.0)
    } else {
        phantom::shifted_gaussian(k, &a)
    };
    let rf = move |z: &AffinePlane| if zero { 0.0 } else { phantom::shifted_gaussian_transform(k, &a, z) };
    (f, rf)
}

fn forward(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = ctx.cfg()?;
    let (f, rf) = affine_gaussian(ctx);
    let planes = random_planes(cfg.n, cfg.k_prime, 1.0, ctx.points(10), &mut ctx.stream(2))?;
    let tol = ctx.tolerance(1e-6);
    planes
        .par_iter()
        .map(|z| {
            let v = radon_forward(&f, z, &cfg)?;
            Ok(ctx.checked("forward_closed_form", describe(z), v, rf(z), Metric::Abs, tol))
        })
        .collect()
}

fn remark(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let mut cfg = PipelineConfig::new(3, 1, 2, 0)?;
    // The integrand has a kink, so the circle rule converges only quadratically.
    cfg.outer = Cubature::new(4096, 2);
    let phi = phantom::offset_coordinate_abs(3, 2);
    let line = GrassmannPoint::coordinate(3, 1)?;
    let tol = ctx.tolerance(ctx.tol.remark_values);
    [([0.0, 1.0, 0.0], 0.5), ([0.0, 0.0, 1.0], 1.0 / PI)]
        .iter()
        .map(|(u, want)| {
            let tau = AffinePlane::new(line.clone(), vector(u))?;
            let v = radon_dual(&phi, &tau, &cfg)?;
            let mut row = ctx.checked("remark_value", describe(&tau), v, *want, Metric::Abs, tol);
            row.phantom = "offset_abs".into();
            Ok(row)
        })
        .collect()
}

fn dual(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    if ctx.spec.phantom.name == "offset_abs" {
        return remark(ctx);
    }
    let cfg = ctx.cfg()?;
    let zero = ctx.is_zero();
    let phi = if zero { AffineFieldFn::new(3, 2, f64::INFINITY, |_| 0.0) } else { phantom::rational_offset(3, 2) };
    let taus = random_planes(3, 1, 2.0, ctx.points(10), &mut ctx.stream(2))?;
    let tol = ctx.tolerance(ctx.tol.dual_identity);
    taus.par_iter()
        .map(|tau| {
            let v = radon_dual(&phi, tau, &cfg)?;
            let want = if zero { 0.0 } else { phantom::rational_offset_dual_3d(tau) };
            Ok(ctx.checked("dual_closed_form", describe(tau), v, want, Metric::Rel, tol))
        })
        .collect()
}

/// Sup error of D^α I^α f = f over the interior 80% of the grid.
fn ek_identity(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let intervals = ctx.spec.config.budget.grid_intervals.unwrap_or(512);
    let tol = ctx.tolerance(ctx.tol.ek_identity);
    let opts = Options { interpolation: Interpolation::Cubic };
    type Case = (&'static str, fn(f64) -> f64, TailModel);
    let cases: [Case; 3] = [
        ("gaussian", |r| (-r * r).exp(), TailModel::GaussianFit),
        ("rational", |r| (1.0 + r * r).powi(-2), TailModel::PowerFit { exponent: 4.0 }),
        ("r2_gaussian", |r| r * r * (-r * r).exp(), TailModel::GaussianFit),
    ];
    let mut rows = Vec::new();
    for (name, f, tail) in cases {
        let g = RadialGridFn::sample(RadialGridFn::uniform_nodes(8.0, intervals), f, tail)?;
        for alpha in [0.5, 1.0, 1.5] {
            for (side, order) in [("minus", FracOrder::ek_minus(alpha)), ("plus", FracOrder::ek_plus(alpha))] {
                let i = frac_integral_with(&g, order, opts)?;
                let d = frac_derivative_with(&i, order, DerivativeForm::Default, opts)?;
                let n = g.len();
                let err = (n / 10..n - n / 10)
                    .map(|j| (d.values()[j] - g.values()[j]).abs())
                    .fold(0.0, f64::max);
                let mut row = ctx.checked(
                    "ek_left_inverse_sup_error",
                    format!("f={name} alpha={alpha} side={side} N={intervals}"),
                    err,
                    0.0,
                    Metric::Abs,
                    tol,
                );
                row.phantom = name.into();
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

fn radial_reduction(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let (m, d) = (ctx.spec.config.n, ctx.spec.config.k);
    let c = gaussian_center(ctx);
    let zero = ctx.is_zero();
    let f = if zero {
        grassradon::radon_john::PointFieldFn::new(m, f64::INFINITY, |_| 0.0)
    } else {
        phantom::gaussian(&c)
    };
    let planes = random_planes(m, d, 1.0, ctx.points(10), &mut ctx.stream(2))?;
    let tol = ctx.tolerance(ctx.tol.radial_reduction);
    planes
        .par_iter()
        .map(|tau| {
            let v = dplane_transform(&f, tau, 48)?;
            let s = grassradon::radon_john::distance_to_plane(tau, &c);
            let want = if zero { 0.0 } else { PI.powf(d as f64 / 2.0) * (-s * s).exp() };
            Ok(ctx.checked("radial_closed_form", describe(tau), v, want, Metric::Rel, tol))
        })
        .collect()
}

fn random_harmonics(band: usize, s: &mut Stream) -> Result<EvenHarmonics> {
    Ok(EvenHarmonics::new(band, (0..coefficient_count(band)).map(|_| s.gaussian()).collect())?)
}

fn l2_row(ctx: &Ctx, check: &str, point: String, got: &[f64], want: &[f64], tol: f64) -> ResultRow {
    let norm = |xs: Vec<f64>| pairwise_sum(&xs).sqrt();
    let d = norm(got.iter().zip(want).map(|(a, b)| (a - b).powi(2)).collect());
    let g = norm(got.iter().map(|a| a * a).collect());
    let t = norm(want.iter().map(|b| b * b).collect());
    ResultRow { abs_err: d, metric: Metric::Rel, tolerance: tol, ..ctx.row(check, point, g, t) }
}

fn funk(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = ctx.cfg()?;
    let band = ctx.spec.phantom.band.unwrap_or(8);
    let h = random_harmonics(band, &mut ctx.stream(2))?;
    let phi = GrassFn::harmonics(1, h.clone())?;
    let rule = SphereRule::product(band + 2);
    let fwd = FunkConfig::default();
    let values: Vec<f64> = rule
        .points
        .par_iter()
        .map(|p| {
            let eta = GrassmannPoint::span(3, &[vector(p)])?.complement();
            Ok(funk_forward(&phi, &eta, &fwd)?)
        })
        .collect::<Result<_>>()?;
    let psi_h = EvenHarmonics::project(band, &rule, &values)?;
    let tol = ctx.tolerance(ctx.tol.funk_round_trip);
    let oracle = h.map_degrees(funk_multiplier);
    let mut rows = vec![l2_row(ctx, "funk_multiplier_law", format!("band={band}"), psi_h.coeffs(), oracle.coeffs(), tol)];
    let psi = GrassFn::harmonics(2, psi_h)?;
    let back: Vec<f64> = rule
        .points
        .par_iter()
        .map(|p| Ok(funk_invert(&psi, &GrassmannPoint::span(3, &[vector(p)])?, &cfg.funk)?.value))
        .collect::<Result<_>>()?;
    let back = EvenHarmonics::project(band, &rule, &back)?;
    rows.push(l2_row(ctx, "funk_round_trip", format!("band={band}"), back.coeffs(), h.coeffs(), tol));
    for r in &mut rows {
        r.phantom = format!("harmonic(band={band})");
    }
    Ok(rows)
}

/// Sample mean and standard error of `sample` over `count` draws, batched on child streams.
fn monte_carlo(
    count: usize,
    seed: StreamHandle,
    sample: impl Fn(&mut Stream) -> Result<f64> + Sync,
) -> Result<(f64, f64)> {
    let batches = count.div_ceil(BATCH);
    let parts: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut s = seed.split(b as u64).rng();
            (0..BATCH.min(count - b * BATCH)).map(|_| sample(&mut s)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(mean_and_se(&parts.concat()))
}

fn sigma_row(ctx: &Ctx, check: &str, point: String, lhs: (f64, f64), rhs: (f64, f64)) -> ResultRow {
    let se = (lhs.1 * lhs.1 + rhs.1 * rhs.1).sqrt();
    ResultRow {
        error_bar: se,
        metric: Metric::Sigma,
        tolerance: ctx.tolerance(ctx.tol.duality_sigmas),
        ..ctx.row(check, point, lhs.0, rhs.0)
    }
}

/// ⟨Rf, φ⟩ = ⟨f, R*φ⟩ on AG(3,1) × AG(3,2) and ⟨FΦ, Ψ⟩ = ⟨Φ, F*Ψ⟩ on G(3,1) × G(3,2).
fn duality(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = ctx.cfg()?;
    let samples = ctx.spec.config.budget.mc_samples.unwrap_or(1_000_000);
    let a = match &ctx.spec.phantom.center {
        Some(c) => c.clone(),
        None => vec![0.3, -0.2, 0.5],
    };
    let f = phantom::shifted_gaussian(1, &a);
    let phi = phantom::rational_offset(3, 2);
    let seed = StreamHandle::new(ctx.spec.seed);
    // Offsets are drawn from Gaussians matched to the phantom: v ~ N(ν·a, 1/2) on η^⊥,
    // u ~ N(Pr_{ξ⊥} a, I/2) on ξ^⊥.
    let gauss_pdf = |x: f64| (-x * x).exp() / PI.sqrt();
    let lhs = monte_carlo(samples, seed.split(10), |s| {
        let eta = sample_grassmann(3, 2, s)?;
        let nu = eta.complement().columns()[0].clone();
        let c: f64 = nu.iter().zip(&a).map(|(x, y)| x * y).sum();
        let z = s.gaussian() / 2f64.sqrt();
        let zeta = AffinePlane::new(eta, grassradon::geometry::scale(&nu, c + z))?;
        Ok(radon_forward(&f, &zeta, &cfg)? * phi.eval(&zeta)? / gauss_pdf(z))
    })?;
    let rhs = monte_carlo(samples, seed.split(11), |s| {
        let xi = sample_grassmann(3, 1, s)?;
        let perp = xi.complement();
        let centre = xi.project_complement(&a);
        let (z1, z2) = (s.gaussian() / 2f64.sqrt(), s.gaussian() / 2f64.sqrt());
        let u = grassradon::geometry::axpy(&grassradon::geometry::axpy(&centre, z1, &perp.columns()[0]), z2, &perp.columns()[1]);
        let tau = AffinePlane::new(xi, u)?;
        Ok(f.eval(&tau)? * radon_dual(&phi, &tau, &cfg)? / (gauss_pdf(z1) * gauss_pdf(z2)))
    })?;
    let mut rows = vec![sigma_row(ctx, "radon_duality", format!("samples={samples} a={}", format_list(&a)), lhs, rhs)];
    rows[0].phantom = "shifted_gaussian×rational_offset".into();

    let band = ctx.spec.phantom.band.unwrap_or(4);
    let mut hs = ctx.stream(12);
    let big_phi = GrassFn::harmonics(1, random_harmonics(band, &mut hs)?)?;
    let big_psi = GrassFn::harmonics(2, random_harmonics(band, &mut hs)?)?;
    let fcfg = &cfg.funk;
    let lhs = monte_carlo(samples, seed.split(13), |s| {
        let eta = sample_grassmann(3, 2, s)?;
        Ok(funk_forward(&big_phi, &eta, fcfg)? * big_psi.eval(&eta)?)
    })?;
    let rhs = monte_carlo(samples, seed.split(14), |s| {
        let xi = sample_grassmann(3, 1, s)?;
        Ok(big_phi.eval(&xi)? * funk_dual(&big_psi, &xi, fcfg)?)
    })?;
    let mut row = sigma_row(ctx, "funk_duality", format!("samples={samples} band={band}"), lhs, rhs);
    row.phantom = format!("harmonic(band={band})");
    rows.push(row);
    Ok(rows)
}

fn invert_qr(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = ctx.cfg()?;
    let n = cfg.n;
    let zero = ctx.is_zero();
    let f = if zero {
        AffineFieldFn::new(n, 1, f64::INFINITY, |_| 0.0)
    } else {
        phantom::quasi_radial_gaussian(n, 1)
    };
    let rf = forward_field(&f, &cfg);
    let rf = if cfg.memoize { rf.memoized() } else { rf };
    let mut s = ctx.stream(2);
    let mut rows = Vec::new();
    for _ in 0..ctx.points(2) {
        let xi = sample_grassmann(n, 1, &mut s)?;
        let p = quasi_radial_profile(&rf, &xi, &cfg)?;
        let truth = |r: f64| if zero { 0.0 } else { (-r * r).exp() };
        rows.extend(ctx.profile_rows(&describe_subspace(&xi), &p, truth, 3.0));
    }
    Ok(rows)
}

fn general(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = ctx.cfg()?;
    let (f, rf) = affine_gaussian(ctx);
    let rf = AffineFieldFn::new(cfg.n, cfg.k_prime, f64::INFINITY, rf);
    let taus = random_planes(cfg.n, cfg.k, 0.5, ctx.points(10), &mut ctx.stream(2))?;
    let tol = ctx.tolerance(ctx.tol.general_inversion);
    taus.iter()
        .map(|tau| {
            let lim = invert_general(&rf, tau, &cfg)?;
            let mut row = ctx.checked("general_inversion", describe(tau), lim.value, f.eval(tau)?, Metric::Rel, tol);
            row.error_bar = lim.error_bar;
            Ok(row)
        })
        .collect()
}

fn invert_dual_qr(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = ctx.cfg()?;
    let n = cfg.n;
    let zero = ctx.is_zero();
    let phi = if zero {
        AffineFieldFn::new(n, n - 1, f64::INFINITY, |_| 0.0)
    } else {
        phantom::quasi_radial_gaussian(n, n - 1)
    };
    let f = dual_field(&phi, 1, &cfg);
    let mut s = ctx.stream(2);
    let mut rows = Vec::new();
    for _ in 0..ctx.points(2) {
        let eta = sample_grassmann(n, n - 1, &mut s)?;
        let p = dual_quasi_radial_profile(&f, &eta, &cfg)?;
        let truth = |t: f64| if zero { 0.0 } else { (-t * t).exp() };
        rows.extend(ctx.profile_rows(&describe_subspace(&eta), &p, truth, 3.0));
    }
    Ok(rows)
}

fn dual_general(ctx: &Ctx) -> Result<Vec<ResultRow>> {
    let cfg = ctx.cfg()?;
    let zero = ctx.is_zero();
    let phi = if zero { AffineFieldFn::new(3, 2, f64::INFINITY, |_| 0.0) } else { phantom::rational_offset(3, 2) };
    let f = dual_field(&phi, 1, &cfg);
    let count = ctx.points(10);
    let mut s = ctx.stream(2);
    let zetas = random_planes(3, 2, 1.0, count, &mut s)?;
    let taus = random_planes(3, 1, 2.0, count, &mut s)?;
    let id_tol = ctx.tolerance(ctx.tol.dual_identity);
    let rec_tol = ctx.tolerance(ctx.tol.dual_reconstruction);
    let mut rows = Vec::new();
    for tau in &taus {
        let want = if zero { 0.0 } else { phantom::rational_offset_dual_3d(tau) };
        rows.push(ctx.checked("dual_identity", describe(tau), f.eval(tau)?, want, Metric::Rel, id_tol));
    }
    for zeta in &zetas {
        let lim = dual_general_invert(&f, zeta, &cfg)?;
        let mut row = ctx.checked("dual_reconstruction", describe(zeta), lim.value, phi.eval(zeta)?, Metric::Rel, rec_tol);
        row.error_bar = lim.error_bar;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("no sample points requested");
    }
    Ok(rows)
}
