//! Quadrature rules, finite-difference weights and extrapolation helpers.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of a one-dimensional rule.
#[derive(Clone, Debug)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss–Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            nodes[0] = 0.0;
            weights[0] = 2.0;
            break;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

/// Cached Gauss–Legendre rules of the orders used inside hot loops.
pub fn gauss_legendre_cached(n: usize) -> &'static Rule {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=32).map(|k| gauss_legendre(k.max(1))).collect());
    assert!(n <= 32, "cached Gauss–Legendre rules go up to 32 nodes");
    &rules[n]
}

/// Gauss–Hermite rule for ∫_ℝ g(x) dx, with the e^{-x²} weight folded into the weights.
///
/// Weights are computed from normalised Hermite functions, which keeps them finite up to
/// a few hundred nodes.
pub fn gauss_hermite_line(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut hn1 = 0.0;
        for _ in 0..200 {
            let (hn, prev) = hermite_functions(n, z);
            hn1 = prev;
            let dz = hn / ((2.0 * nf).sqrt() * hn1 - z * hn);
            z -= dz;
            if dz.abs() < 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        let w = 1.0 / (nf * hn1 * hn1);
        nodes[i] = z;
        weights[i] = w;
        nodes[n - 1 - i] = -z;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| nodes[a].total_cmp(&nodes[b]));
    Rule {
        nodes: idx.iter().map(|&i| nodes[i]).collect(),
        weights: idx.iter().map(|&i| weights[i]).collect(),
    }
}

/// Normalised Hermite functions (h_n(z), h_{n-1}(z)).
fn hermite_functions(n: usize, z: f64) -> (f64, f64) {
    let mut h0 = PI.powf(-0.25) * (-0.5 * z * z).exp();
    let mut h1 = 0.0;
    for j in 0..n {
        let jf = j as f64;
        let h2 = (2.0 / (jf + 1.0)).sqrt() * z * h0 - (jf / (jf + 1.0)).sqrt() * h1;
        h1 = h0;
        h0 = h2;
    }
    (h0, h1)
}

/// Gauss–Legendre mapped to ℝ through x = L·tan(πs/2); suited to algebraically decaying integrands.
pub fn mapped_legendre_line(n: usize, scale: f64) -> Rule {
    let gl = gauss_legendre(n);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (&s, &w) in gl.nodes.iter().zip(&gl.weights) {
        let a = 0.5 * PI * s;
        let c = a.cos();
        nodes.push(scale * a.tan());
        weights.push(w * scale * 0.5 * PI / (c * c));
    }
    Rule { nodes, weights }
}

/// Integration rule over ℝ chosen by the decay of the integrand: Gauss–Hermite for
/// Gaussian decay (`decay = ∞`), mapped Gauss–Legendre otherwise.
pub fn line_rule(n: usize, decay: f64) -> Rule {
    if decay.is_infinite() {
        gauss_hermite_line(n)
    } else {
        mapped_legendre_line(n, 1.0)
    }
}

/// Equally weighted equispaced angles on [0, 2π); weights sum to one.
pub fn circle_rule(m: usize) -> Rule {
    Rule {
        nodes: (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect(),
        weights: vec![1.0 / m as f64; m],
    }
}

/// Product Gauss rule on the unit sphere S²; weights sum to one.
///
/// Gauss–Legendre in cos θ with `order` nodes times the trapezoid rule in the azimuth with
/// `2·order` nodes; exact for polynomials of degree ≤ 2·order − 1. The node set is invariant
/// under the antipodal map.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    pub fn product(order: usize) -> Self {
        let gl = gauss_legendre(order);
        let naz = 2 * order;
        let mut points = Vec::with_capacity(order * naz);
        let mut weights = Vec::with_capacity(order * naz);
        for (&z, &w) in gl.nodes.iter().zip(&gl.weights) {
            let s = (1.0 - z * z).max(0.0).sqrt();
            for j in 0..naz {
                let phi = PI * (2 * j + 1) as f64 / naz as f64;
                points.push([s * phi.cos(), s * phi.sin(), z]);
                weights.push(0.5 * w / naz as f64);
            }
        }
        SphereRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Pairwise (cascade) summation with a fixed association order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Finite-difference weights for the `order`-th derivative at `x0` from arbitrary nodes.
pub fn fornberg_weights(x0: f64, x: &[f64], order: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > order, "stencil too small for derivative order");
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - x0;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Indices of the `size` valid nodes nearest to `x0`, in increasing order.
pub fn nearest_stencil(nodes: &[f64], valid: impl Fn(usize) -> bool, x0: f64, size: usize) -> Option<Vec<usize>> {
    let mut idx: Vec<usize> = (0..nodes.len()).filter(|&i| valid(i)).collect();
    if idx.len() < size {
        return None;
    }
    idx.sort_by(|&a, &b| (nodes[a] - x0).abs().total_cmp(&(nodes[b] - x0).abs()).then(a.cmp(&b)));
    idx.truncate(size);
    idx.sort_unstable();
    Some(idx)
}

/// `order`-th derivative of sampled data at `x0` from the nearest `size` finite samples.
pub fn derivative_at(nodes: &[f64], values: &[f64], x0: f64, order: usize, size: usize) -> f64 {
    match nearest_stencil(nodes, |i| values[i].is_finite(), x0, size) {
        None => f64::NAN,
        Some(idx) => {
            let xs: Vec<f64> = idx.iter().map(|&i| nodes[i]).collect();
            let w = fornberg_weights(x0, &xs, order);
            idx.iter().zip(&w).map(|(&i, &wi)| wi * values[i]).sum()
        }
    }
}

/// Result of a boundary-limit extrapolation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Limit {
    pub value: f64,
    pub error_bar: f64,
}

/// Two-level Richardson extrapolation of samples at steps h, 2h, 4h, assuming an error
/// expansion with leading powers `p1 < p2` of the step.
pub fn richardson(e_h: f64, e_2h: f64, e_4h: f64, p1: f64, p2: f64) -> Limit {
    let r1 = 2f64.powf(p1);
    let r2 = 2f64.powf(p2);
    let a = (r1 * e_h - e_2h) / (r1 - 1.0);
    let b = (r1 * e_2h - e_4h) / (r1 - 1.0);
    Limit {
        value: (r2 * a - b) / (r2 - 1.0),
        error_bar: (a - b).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(6);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_integrates_gaussians() {
        for n in [1usize, 2, 7, 20, 64, 128] {
            let r = gauss_hermite_line(n);
            let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (-x * x).exp()).sum();
            assert!((s - PI.sqrt()).abs() < 1e-12, "n={n} s={s}");
        }
        let r = gauss_hermite_line(24);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x * x * (-x * x).exp()).sum();
        assert!((s - PI.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mapped_rule_integrates_algebraic_decay() {
        let r = mapped_legendre_line(64, 1.0);
        let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w / (1.0 + x * x).powi(2)).sum();
        assert!((s - PI / 2.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_rule_moments() {
        let r = SphereRule::product(6);
        let m2: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[2] * p[2]).sum();
        let m4: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(4)).sum();
        assert!((m2 - 1.0 / 3.0).abs() < 1e-14);
        assert!((m4 - 0.2).abs() < 1e-14);
    }

    #[test]
    fn fornberg_matches_central_difference() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] + 2.0).abs() < 1e-14 && (w[2] - 1.0).abs() < 1e-14);
        let xs = [0.0, 0.3, 0.7, 1.2, 2.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| x.powi(3)).collect();
        let d = derivative_at(&xs, &ys, 0.5, 1, 5);
        assert!((d - 0.75).abs() < 1e-12);
    }

    #[test]
    fn richardson_removes_even_terms() {
        let e = |h: f64| 1.0 + 0.3 * h * h + 0.1 * h.powi(4);
        let l = richardson(e(0.1), e(0.2), e(0.4), 2.0, 4.0);
        assert!((l.value - 1.0).abs() < 1e-13);
    }
}
