use grassradon::geometry::*;
use grassradon::phantom::*;
use grassradon::radon_john::*;
use grassradon::rng::StreamHandle;
use grassradon::Error;

fn random_plane(m: usize, d: usize, seed: u64, spread: f64) -> AffinePlane {
    let mut s = StreamHandle::new(seed).rng();
    let sub = sample_grassmann(m, d, &mut s).unwrap();
    let p: Vec<f64> = (0..m).map(|_| spread * s.gaussian()).collect();
    AffinePlane::through(sub, &p)
}

#[test]
fn forward_matches_closed_forms() {
    let centers: [&[f64]; 2] = [&[0.3, -0.2, 0.5], &[0.1, 0.4, -0.3, 0.2]];
    for c in centers {
        let m = c.len();
        let f = gaussian(c);
        let r = rational(m, 3.0);
        for d in 1..m {
            for seed in 0..5 {
                let tau = random_plane(m, d, 100 * m as u64 + 10 * d as u64 + seed, 0.8);
                let got = dplane_transform(&f, &tau, 48).unwrap();
                let want = gaussian_plane_transform(c, &tau);
                assert!((got - want).abs() < 1e-10, "gaussian ({m},{d}): {got} vs {want}");
                let got = dplane_transform(&r, &tau, 64).unwrap();
                let want = rational_plane_transform(3.0, &tau);
                assert!((got - want).abs() < 1e-6 * want.max(1e-3), "rational ({m},{d}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn slow_decay_is_rejected() {
    let f = rational(3, 0.75);
    let tau = random_plane(3, 2, 1, 1.0);
    assert!(matches!(dplane_transform(&f, &tau, 16), Err(Error::Decay(_))));
    let line = random_plane(3, 1, 2, 1.0);
    assert!(dplane_transform(&f, &line, 16).is_ok());
}

fn cubature_cfg(t_max: f64, intervals: usize) -> RadonJohnConfig {
    RadonJohnConfig {
        t_max,
        intervals,
        average: RotationAverage::Cubature(Cubature::new(64, 16)),
        ..RadonJohnConfig::default()
    }
}

#[test]
fn inversion_of_lines_in_three_space() {
    let c = [0.3, -0.2, 0.1];
    let phi = gaussian_plane_field(&c, 1);
    let cfg = cubature_cfg(6.0, 192);
    for x in [[0.0, 0.0, 0.0], [0.5, 0.1, -0.3], [0.9, -0.6, 0.4]] {
        let got = dplane_invert(&phi, &x, &cfg).unwrap();
        let want = (-x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).exp();
        assert!((got.value - want).abs() < 1e-3, "{x:?}: {got:?} vs {want}");
    }
}

#[test]
fn inversion_of_rational_lines_in_three_space() {
    let phi = rational_plane_field(3, 2.0, 1);
    let cfg = cubature_cfg(12.0, 192);
    for x in [[0.0, 0.0, 0.0], [0.4, 0.3, 0.0], [0.2, -0.5, 0.7]] {
        let got = dplane_invert(&phi, &x, &cfg).unwrap();
        let want = (1.0 + x.iter().map(|v| v * v).sum::<f64>()).powi(-2);
        assert!((got.value - want).abs() < 1e-3, "{x:?}: {got:?} vs {want}");
    }
}

#[test]
fn inversion_of_planes_in_three_space() {
    let c = [-0.2, 0.4, 0.3];
    let phi = gaussian_plane_field(&c, 2);
    let cfg = cubature_cfg(6.0, 192);
    for x in [[0.0, 0.0, 0.0], [0.5, 0.1, -0.3], [0.2, 0.8, 0.6]] {
        let got = dplane_invert(&phi, &x, &cfg).unwrap();
        let want = (-x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).exp();
        assert!((got.value - want).abs() < 1e-3, "{x:?}: {got:?} vs {want}");
    }
}

#[test]
fn inversion_of_planes_in_four_space_by_monte_carlo() {
    let c = [0.2, 0.0, -0.1, 0.3];
    let phi = gaussian_plane_field(&c, 2);
    let cfg = RadonJohnConfig {
        t_max: 6.0,
        intervals: 192,
        average: RotationAverage::MonteCarlo { samples: 20_000 },
        seed: StreamHandle::new(5),
        ..RadonJohnConfig::default()
    };
    let x = [0.1, 0.2, 0.0, 0.1];
    let got = dplane_invert(&phi, &x, &cfg).unwrap();
    let want = (-x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).exp();
    assert!((got.value - want).abs() < 2e-2, "{got:?} vs {want}");
}

#[test]
fn constant_fields_have_constant_shifted_means() {
    let phi = PlaneFieldFn::new(3, 1, f64::INFINITY, |_| Ok(2.5));
    for avg in [
        RotationAverage::Cubature(Cubature::new(16, 4)),
        RotationAverage::MonteCarlo { samples: 300 },
    ] {
        for t in [0.0, 0.7, 3.0] {
            let v = shifted_mean(&phi, &[0.1, 0.2, 0.3], t, &avg, StreamHandle::new(1)).unwrap();
            assert!((v - 2.5).abs() < 1e-13, "{v}");
        }
    }
}

#[test]
fn shifted_means_are_equivariant() {
    let c = [0.3, -0.2, 0.1];
    let x = [0.4, 0.1, -0.5];
    let mut s = StreamHandle::new(3).rng();
    let g = sample_rotation(3, &mut s).unwrap();
    let a = [0.7, -0.3, 0.2];
    let gc = g.apply(&c);
    let avg = RotationAverage::Cubature(Cubature::new(64, 16));
    let base = gaussian_plane_field(&c, 1);
    let moved = gaussian_plane_field(&add(&gc, &a), 1);
    for t in [0.0, 0.5, 1.5] {
        let v0 = shifted_mean(&base, &x, t, &avg, StreamHandle::new(0)).unwrap();
        let v1 = shifted_mean(&moved, &add(&g.apply(&x), &a), t, &avg, StreamHandle::new(0)).unwrap();
        assert!((v0 - v1).abs() < 1e-8, "t={t}: {v0} vs {v1}");
    }
}

#[test]
fn monte_carlo_is_independent_of_thread_count() {
    let phi = gaussian_plane_field(&[0.2, 0.1, -0.3, 0.0], 2);
    let v = GrassmannPoint::whole(4).unwrap();
    let ts = [0.0, 0.3, 1.0];
    let avg = RotationAverage::MonteCarlo { samples: 3000 };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| shifted_mean_profile_in(&phi, &v, &[0.1, 0.0, 0.2, 0.0], &ts, &avg, StreamHandle::new(9)).unwrap())
    };
    let one = run(1);
    for threads in [2, 4, 8] {
        let other = run(threads);
        assert!(one.iter().zip(&other).all(|(a, b)| a.to_bits() == b.to_bits()), "{one:?} vs {other:?}");
    }
}

#[test]
fn unsupported_requests_are_rejected() {
    let phi = gaussian_plane_field(&[0.0; 4], 2);
    let cfg = cubature_cfg(6.0, 64);
    assert!(matches!(dplane_invert(&phi, &[0.0; 4], &cfg), Err(Error::Unsupported(_))));
    let bad = PlaneFieldFn::new(3, 3, 1.0, |_| Ok(1.0));
    assert!(shifted_mean(&bad, &[0.0; 3], 0.0, &RotationAverage::MonteCarlo { samples: 10 }, StreamHandle::new(0)).is_err());
}

#[test]
fn focused_average_agrees_with_plain_cubature() {
    let phi = gaussian_plane_field(&[0.0; 3], 1);
    let v = GrassmannPoint::whole(3).unwrap();
    let x = [0.5, -1.0, 2.0];
    let ts = [0.0, 0.8, 2.3, 5.0];
    let plain = RotationAverage::Cubature(Cubature::new(128, 32));
    let focused = RotationAverage::Focused { cubature: Cubature::new(24, 6), focus: zeros(3) };
    let fine = RotationAverage::Focused { cubature: Cubature::new(64, 6), focus: zeros(3) };
    let a = shifted_mean_profile_in(&phi, &v, &x, &ts, &plain, StreamHandle::new(0)).unwrap();
    let b = shifted_mean_profile_in(&phi, &v, &x, &ts, &focused, StreamHandle::new(0)).unwrap();
    let c = shifted_mean_profile_in(&phi, &v, &x, &ts, &fine, StreamHandle::new(0)).unwrap();
    for ((p, q), r) in a.iter().zip(&b).zip(&c) {
        assert!((q - r).abs() < 1e-6 * r, "{b:?} vs {c:?}");
        assert!((p - r).abs() < 1e-9, "{a:?} vs {c:?}");
    }
}
