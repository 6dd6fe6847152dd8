//! Real orthonormal spherical harmonics on S² restricted to even degrees.
//!
//! Even functions on S² are exactly functions on G(3,1) (a line is ±y) and, through the
//! normal vector, on G(3,2).

use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::quadrature::SphereRule;

/// Number of coefficients of an even expansion up to degree `band`.
pub fn coefficient_count(band: usize) -> usize {
    (0..=band).step_by(2).map(|l| 2 * l + 1).sum()
}

/// Values of all real harmonics Y_lm (l even, l ≤ band) at a unit vector, ordered by l then
/// m = −l..=l.
pub fn evaluate_basis(band: usize, v: [f64; 3]) -> Vec<f64> {
    let z = v[2].clamp(-1.0, 1.0);
    let s = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let phi = v[1].atan2(v[0]);
    let lmax = band;
    // Fully normalised associated Legendre functions p[l][m].
    let mut p = vec![vec![0.0; lmax + 1]; lmax + 1];
    p[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=lmax {
        p[m][m] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..lmax {
        p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * z * p[m][m];
    }
    for m in 0..=lmax {
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[l][m] = a * (z * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    let mut out = Vec::with_capacity(coefficient_count(band));
    for l in (0..=band).step_by(2) {
        for m in -(l as i64)..=(l as i64) {
            let am = m.unsigned_abs() as usize;
            let y = match m.cmp(&0) {
                std::cmp::Ordering::Equal => p[l][0],
                std::cmp::Ordering::Greater => std::f64::consts::SQRT_2 * p[l][am] * (am as f64 * phi).cos(),
                std::cmp::Ordering::Less => std::f64::consts::SQRT_2 * p[l][am] * (am as f64 * phi).sin(),
            };
            out.push(y);
        }
    }
    out
}

/// An even band-limited function on S², stored by its real harmonic coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct EvenHarmonics {
    band: usize,
    coeffs: Vec<f64>,
}

impl EvenHarmonics {
    pub fn new(band: usize, coeffs: Vec<f64>) -> Result<Self> {
        if !band.is_multiple_of(2) {
            return Err(invalid("even expansions need an even band limit"));
        }
        if coeffs.len() != coefficient_count(band) {
            return Err(invalid(format!(
                "band {band} needs {} coefficients, got {}",
                coefficient_count(band),
                coeffs.len()
            )));
        }
        Ok(EvenHarmonics { band, coeffs })
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Offset of the block of degree `l` in the coefficient vector.
    pub fn degree_offset(l: usize) -> usize {
        if l == 0 {
            0
        } else {
            coefficient_count(l - 2)
        }
    }

    pub fn eval(&self, v: [f64; 3]) -> f64 {
        evaluate_basis(self.band, v).iter().zip(&self.coeffs).map(|(y, c)| y * c).sum()
    }

    /// L²(S², dΩ) projection of sampled values onto the even harmonics up to `band`.
    pub fn project(band: usize, rule: &SphereRule, values: &[f64]) -> Result<Self> {
        if values.len() != rule.len() {
            return Err(invalid("sample count differs from the sphere rule"));
        }
        let mut coeffs = vec![0.0; coefficient_count(band)];
        for ((p, &w), &f) in rule.points.iter().zip(&rule.weights).zip(values) {
            for (c, y) in coeffs.iter_mut().zip(evaluate_basis(band, *p)) {
                *c += 4.0 * PI * w * f * y;
            }
        }
        EvenHarmonics::new(band, coeffs)
    }

    /// Coefficients scaled degree by degree: Y_lm ↦ m(l) Y_lm.
    pub fn map_degrees(&self, m: impl Fn(usize) -> f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        for l in (0..=self.band).step_by(2) {
            let (a, b) = (Self::degree_offset(l), Self::degree_offset(l) + 2 * l + 1);
            let s = m(l);
            coeffs[a..b].iter_mut().for_each(|c| *c *= s);
        }
        EvenHarmonics { band: self.band, coeffs }
    }
}

/// P_l(0): the eigenvalue of the great-circle Funk transform on degree-l harmonics.
pub fn funk_multiplier(l: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    // P_{2j}(0) = (−1)^j (2j−1)!!/(2j)!!
    (1..=l / 2).fold(1.0, |p, j| -p * (2 * j - 1) as f64 / (2 * j) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multipliers_match_legendre_values() {
        assert_eq!(funk_multiplier(0), 1.0);
        assert!((funk_multiplier(2) + 0.5).abs() < 1e-15);
        assert!((funk_multiplier(4) - 0.375).abs() < 1e-15);
        assert!((funk_multiplier(6) + 0.3125).abs() < 1e-15);
        assert_eq!(funk_multiplier(3), 0.0);
    }

    #[test]
    fn basis_is_orthonormal() {
        let band = 8;
        let rule = SphereRule::product(12);
        let count = coefficient_count(band);
        let mut gram = vec![vec![0.0; count]; count];
        for (p, &w) in rule.points.iter().zip(&rule.weights) {
            let y = evaluate_basis(band, *p);
            for i in 0..count {
                for j in 0..count {
                    gram[i][j] += 4.0 * PI * w * y[i] * y[j];
                }
            }
        }
        for i in 0..count {
            for j in 0..count {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - target).abs() < 1e-12, "({i},{j}) = {}", gram[i][j]);
            }
        }
    }
}
