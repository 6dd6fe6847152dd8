use grassradon::fracint::*;
use grassradon::Error;
use proptest::prelude::*;
use statrs::function::gamma::gamma;

struct Case {
    name: &'static str,
    f: fn(f64) -> f64,
    tail: TailModel,
}

fn test_set() -> [Case; 3] {
    [
        Case { name: "gaussian", f: |r| (-r * r).exp(), tail: TailModel::GaussianFit },
        Case { name: "rational", f: |r| (1.0 + r * r).powi(-2), tail: TailModel::PowerFit { exponent: 4.0 } },
        Case { name: "r2-gaussian", f: |r| r * r * (-r * r).exp(), tail: TailModel::GaussianFit },
    ]
}

fn sup_error(a: &RadialGridFn, b: &RadialGridFn) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sup error over the interior 80% of the grid.
fn interior_error(a: &RadialGridFn, b: &RadialGridFn) -> f64 {
    let n = a.len();
    (n / 10..n - n / 10).map(|j| (a.values()[j] - b.values()[j]).abs()).fold(0.0, f64::max)
}

fn left_inverse_error(f: fn(f64) -> f64, tail: TailModel, order: FracOrder, intervals: usize, opts: Options) -> f64 {
    let g = RadialGridFn::sample(RadialGridFn::uniform_nodes(8.0, intervals), f, tail).unwrap();
    let i = frac_integral_with(&g, order, opts).unwrap();
    let d = frac_derivative_with(&i, order, DerivativeForm::Default, opts).unwrap();
    interior_error(&d, &g)
}

#[test]
fn derivative_left_inverts_integral_on_test_set() {
    for interpolation in [Interpolation::Linear, Interpolation::Cubic] {
        let opts = Options { interpolation };
        for case in test_set() {
            for alpha in [0.5, 1.0, 1.5] {
                for side in [Side::Minus, Side::Plus] {
                    let order = FracOrder { alpha, side, kind: Kind::ErdelyiKober };
                    let err = left_inverse_error(case.f, case.tail, order, 512, opts);
                    assert!(err <= 1e-3, "{} {interpolation:?} α={alpha} {side:?}: {err:e}", case.name);
                }
            }
        }
    }
}

#[test]
fn halving_the_step_at_least_halves_the_error() {
    for case in test_set() {
        for order in [FracOrder::ek_minus(0.5), FracOrder::ek_plus(0.5), FracOrder::ek_minus(1.5)] {
            let coarse = left_inverse_error(case.f, case.tail, order, 128, Options::default());
            let fine = left_inverse_error(case.f, case.tail, order, 256, Options::default());
            assert!(fine <= coarse / 2.0, "{} {order:?}: {coarse:e} → {fine:e}", case.name);
        }
    }
}

#[test]
fn orders_add() {
    let g = RadialGridFn::sample(RadialGridFn::uniform_nodes(8.0, 512), |r| (-r * r).exp(), TailModel::GaussianFit).unwrap();
    for order in [FracOrder::ek_minus(0.5), FracOrder::ek_plus(0.5)] {
        let twice = frac_integral(&frac_integral(&g, order).unwrap(), order).unwrap();
        let once = frac_integral(&g, FracOrder { alpha: 1.0, ..order }).unwrap();
        assert!(sup_error(&twice, &once) < 1e-3, "{order:?}: {:e}", sup_error(&twice, &once));
    }
}

#[test]
fn gaussian_is_a_fixed_point_of_the_right_sided_integral() {
    let g = RadialGridFn::sample(RadialGridFn::uniform_nodes(6.0, 256), |r| (-r * r).exp(), TailModel::GaussianFit).unwrap();
    for alpha in [0.3, 0.5, 1.0, 1.5, 2.5] {
        let opts = Options { interpolation: Interpolation::Cubic };
        let i = frac_integral_with(&g, FracOrder::ek_minus(alpha), opts).unwrap();
        assert!(sup_error(&i, &g) < 1e-5, "α={alpha}: {:e}", sup_error(&i, &g));
    }
}

#[test]
fn left_sided_integrals_of_powers() {
    let nodes = RadialGridFn::uniform_nodes(3.0, 128);
    let one = RadialGridFn::sample(nodes.clone(), |_| 1.0, TailModel::Zero).unwrap();
    let sq = RadialGridFn::sample(nodes, |r| r * r, TailModel::Zero).unwrap();
    for alpha in [0.5, 1.0, 1.7] {
        // I^α_{+,2} 1 = t^{2α}/Γ(α+1)
        let i = frac_integral(&one, FracOrder::ek_plus(alpha)).unwrap();
        for (t, v) in i.nodes().iter().zip(i.values()) {
            let want = t.powf(2.0 * alpha) / gamma(alpha + 1.0);
            assert!((v - want).abs() < 1e-10 * (1.0 + want), "α={alpha} t={t}: {v} vs {want}");
        }
        // I^α_+ r² = Γ(3)/Γ(3+α) t^{2+α}
        let i = frac_integral_with(&sq, FracOrder::rl_plus(alpha), Options { interpolation: Interpolation::Cubic }).unwrap();
        for (t, v) in i.nodes().iter().zip(i.values()) {
            let want = 2.0 / gamma(3.0 + alpha) * t.powf(2.0 + alpha);
            assert!((v - want).abs() < 1e-8 * (1.0 + want), "α={alpha} t={t}: {v} vs {want}");
        }
    }
}

#[test]
fn derivative_forms_agree() {
    let g = RadialGridFn::sample(RadialGridFn::uniform_nodes(7.0, 512), |r| (1.0 + r * r).powi(-3), TailModel::PowerFit { exponent: 6.0 })
        .unwrap();
    let opts = Options { interpolation: Interpolation::Cubic };
    for alpha in [0.5, 0.7, 1.5] {
        let i = frac_integral_with(&g, FracOrder::ek_minus(alpha), opts).unwrap();
        let mut forms = vec![DerivativeForm::Weighted, DerivativeForm::Simplified];
        if alpha == 0.5 || alpha == 1.5 {
            forms.push(DerivativeForm::Alternative);
        }
        for form in forms {
            let d = frac_derivative_with(&i, FracOrder::ek_minus(alpha), form, opts).unwrap();
            let err = interior_error(&d, &g);
            assert!(err < 1e-4, "α={alpha} {form:?}: {err:e}");
        }
    }
}

#[test]
fn integer_power_of_the_radial_derivative() {
    let t: Vec<f64> = (0..=40).map(|j| 0.05 * j as f64).collect();
    let v: Vec<f64> = t.iter().map(|x| (-x * x).exp()).collect();
    let d = minus_d_power(&t, &v, 2);
    for (x, y) in t.iter().zip(&d) {
        assert!((y - (-x * x).exp()).abs() < 1e-6, "t={x}");
    }
    assert!((minus_d_power_at(&t, &v, 1, 0.5) - (-0.25f64).exp()).abs() < 1e-8);
}

#[test]
fn invalid_requests_are_rejected() {
    let nodes = RadialGridFn::uniform_nodes(8.0, 128);
    let slow = RadialGridFn::sample(nodes.clone(), |r| 1.0 / (1.0 + r), TailModel::PowerFit { exponent: 1.0 }).unwrap();
    assert!(matches!(frac_integral(&slow, FracOrder::ek_minus(1.0)), Err(Error::DivergentTail(_))));
    assert!(RadialGridFn::sample(RadialGridFn::uniform_nodes(1.0, 8), |r| r, TailModel::Zero).is_err());
    let g = RadialGridFn::sample(nodes, |r| (-r * r).exp(), TailModel::GaussianFit).unwrap();
    assert!(frac_integral(&g, FracOrder::ek_minus(0.0)).is_err());
    assert!(frac_derivative(&g, FracOrder::ek_minus(0.5), DerivativeForm::IntegerPower).is_err());
    assert!(frac_derivative(&g, FracOrder::ek_minus(2.0), DerivativeForm::Weighted).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integral_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, alpha in 0.2f64..2.0, plus in any::<bool>()) {
        let nodes = RadialGridFn::uniform_nodes(6.0, 64);
        let f = |r: f64| (-r * r).exp();
        let g = |r: f64| r * r * (-r * r).exp();
        let order = if plus { FracOrder::ek_plus(alpha) } else { FracOrder::ek_minus(alpha) };
        let fg = RadialGridFn::sample(nodes.clone(), |r| a * f(r) + b * g(r), TailModel::GaussianFit).unwrap();
        let ff = RadialGridFn::sample(nodes.clone(), f, TailModel::GaussianFit).unwrap();
        let gg = RadialGridFn::sample(nodes, g, TailModel::GaussianFit).unwrap();
        let (i, fi, gi) = (frac_integral(&fg, order).unwrap(), frac_integral(&ff, order).unwrap(), frac_integral(&gg, order).unwrap());
        for j in 0..i.len() {
            let lin = a * fi.values()[j] + b * gi.values()[j];
            // The tail fit is not linear in the samples; the comparison stays within its resolution.
            prop_assert!((i.values()[j] - lin).abs() < 1e-6 * (1.0 + lin.abs()));
        }
    }

    #[test]
    fn integral_preserves_positivity(alpha in 0.1f64..3.0, width in 0.3f64..2.0, plus in any::<bool>()) {
        let nodes = RadialGridFn::uniform_nodes(6.0 * width, 64);
        let f = RadialGridFn::sample(nodes, |r| (-(r / width).powi(2)).exp(), TailModel::GaussianFit).unwrap();
        let order = if plus { FracOrder::ek_plus(alpha) } else { FracOrder::ek_minus(alpha) };
        let i = frac_integral(&f, order).unwrap();
        prop_assert!(i.values().iter().all(|v| *v >= 0.0), "{:?}", i.values());
    }
}
