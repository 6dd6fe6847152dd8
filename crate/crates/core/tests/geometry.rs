use grassradon::geometry::*;
use grassradon::rng::StreamHandle;
use grassradon::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=4).prop_flat_map(|n| (Just(n), 1..n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projector_is_symmetric_and_idempotent((n, k) in dims(), seed in any::<u64>()) {
        let xi = sample_grassmann(n, k, &mut StreamHandle::new(seed).rng()).unwrap();
        let p = xi.projector();
        let mut trace = 0.0;
        for i in 0..n {
            trace += p[i][i];
            for j in 0..n {
                prop_assert!((p[i][j] - p[j][i]).abs() < 1e-12);
                let pp: f64 = (0..n).map(|l| p[i][l] * p[l][j]).sum();
                prop_assert!((pp - p[i][j]).abs() < 1e-12);
            }
        }
        prop_assert!((trace - k as f64).abs() < 1e-12);
    }

    #[test]
    fn complement_splits_space((n, k) in dims(), seed in any::<u64>(), x in prop::collection::vec(-3.0f64..3.0, 4)) {
        let xi = sample_grassmann(n, k, &mut StreamHandle::new(seed).rng()).unwrap();
        let perp = xi.complement();
        prop_assert_eq!(perp.k(), n - k);
        let x = &x[..n];
        let sum = add(&xi.project(x), &perp.project(x));
        prop_assert!(max_abs_diff(&sum, x) < 1e-12);
        prop_assert!(dot(&xi.project(x), &perp.project(x)).abs() < 1e-12);
        prop_assert!(xi.direct_sum(&perp).unwrap().approx_eq(&GrassmannPoint::whole(n).unwrap()));
    }

    #[test]
    fn rotations_are_special_orthogonal(n in 2usize..=4, seed in any::<u64>()) {
        let g = sample_rotation(n, &mut StreamHandle::new(seed).rng()).unwrap();
        prop_assert!((g.determinant() - 1.0).abs() < 1e-12);
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(&g.column(i), &g.column(j)) - target).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kelvin_map_is_an_involution_reciprocating_distance(
        (n, k) in dims(), seed in any::<u64>(), r in 0.05f64..20.0,
    ) {
        let mut s = StreamHandle::new(seed).rng();
        let xi = sample_grassmann(n, k, &mut s).unwrap();
        let dir = xi.complement().embed(&(0..n - k).map(|_| s.gaussian()).collect::<Vec<_>>());
        let tau = AffinePlane::new(xi, scale(&dir, r / norm(&dir))).unwrap();
        let nu = tau.kelvin().unwrap();
        prop_assert_eq!(nu.k(), n - k - 1);
        prop_assert!((nu.distance() * tau.distance() - 1.0).abs() < 1e-10);
        prop_assert!(nu.kelvin().unwrap().approx_eq(&tau, 1e-9 * r.max(1.0)));
    }

    #[test]
    fn distance_is_invariant_under_rotation((n, k) in dims(), seed in any::<u64>()) {
        let mut s = StreamHandle::new(seed).rng();
        let xi = sample_grassmann(n, k, &mut s).unwrap();
        let p: Vec<f64> = (0..n).map(|_| s.gaussian()).collect();
        let tau = AffinePlane::through(xi, &p);
        let g = sample_rotation(n, &mut s).unwrap();
        let rotated = tau.rotate(&g);
        prop_assert!((rotated.distance() - tau.distance()).abs() < 1e-12);
        prop_assert!(rotated.subspace().approx_eq(&tau.subspace().rotate(&g)));
    }

    #[test]
    fn translation_moves_offset_by_orthogonal_part((n, k) in dims(), seed in any::<u64>()) {
        let mut s = StreamHandle::new(seed).rng();
        let xi = sample_grassmann(n, k, &mut s).unwrap();
        let a: Vec<f64> = (0..n).map(|_| s.gaussian()).collect();
        let tau = AffinePlane::through(xi.clone(), &zeros(n));
        let moved = tau.translate(&a);
        prop_assert!(max_abs_diff(moved.offset(), &xi.project_complement(&a)) < 1e-12);
    }
}

/// Kolmogorov–Smirnov statistic of samples against the uniform law on [−1, 1].
fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = (x + 1.0) / 2.0;
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn haar_rotations_have_uniform_columns() {
    // On S², a uniform point has a uniformly distributed height.
    let mut s = StreamHandle::new(17).rng();
    let samples = 4000;
    let (mut col0, mut col2) = (Vec::new(), Vec::new());
    for _ in 0..samples {
        let g = sample_rotation(3, &mut s).unwrap();
        col0.push(g.column(0)[2]);
        col2.push(g.column(2)[0]);
    }
    let critical = 1.63 / (samples as f64).sqrt(); // 1% level
    assert!(ks_uniform(col0) < critical);
    assert!(ks_uniform(col2) < critical);
}

#[test]
fn haar_lines_have_uniform_height() {
    let mut s = StreamHandle::new(23).rng();
    let heights: Vec<f64> = (0..4000)
        .map(|_| {
            let line = sample_grassmann(3, 1, &mut s).unwrap();
            let d = &line.columns()[0];
            d[2] * d[0].signum()
        })
        .collect();
    assert!(ks_uniform(heights) < 1.63 / 4000f64.sqrt());
}

#[test]
fn sampling_is_reproducible() {
    let a = sample_rotation(4, &mut StreamHandle::new(5).rng()).unwrap();
    let b = sample_rotation(4, &mut StreamHandle::new(5).rng()).unwrap();
    for j in 0..4 {
        assert_eq!(a.column(j), b.column(j));
    }
}

#[test]
fn surface_areas() {
    assert_eq!(surface_area(0).unwrap(), 2.0);
    assert!((surface_area(1).unwrap() - 2.0 * PI).abs() < 1e-13);
    assert!((surface_area(2).unwrap() - 4.0 * PI).abs() < 1e-13);
    assert!((surface_area(3).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
    assert!(surface_area(-1).is_err());
}

#[test]
fn frames_are_validated() {
    let bad = [vector(&[1.0, 0.0, 0.0]), vector(&[0.5, 1.0, 0.0])];
    assert!(matches!(GrassmannPoint::from_frame(3, &bad), Err(Error::NotOrthonormal(_))));
    assert!(GrassmannPoint::coordinate(5, 1).is_err());
    let xi = GrassmannPoint::coordinate(3, 1).unwrap();
    assert!(AffinePlane::new(xi, vector(&[1.0, 0.0, 0.0])).is_err());
}

#[test]
fn span_matches_coordinate_plane() {
    let v = GrassmannPoint::span(3, &[vector(&[2.0, 0.0, 0.0]), vector(&[1.0, 3.0, 0.0])]).unwrap();
    assert!(v.approx_eq(&GrassmannPoint::coordinate(3, 2).unwrap()));
    assert!(v.contains(&[4.0, -1.0, 0.0]));
    assert!(!v.contains(&[0.0, 0.0, 1.0]));
}

#[test]
fn squared_cosines_of_lines_in_a_plane() {
    let eta = GrassmannPoint::coordinate(3, 2).unwrap();
    let xi = GrassmannPoint::span(3, &[vector(&[1.0, 0.0, 1.0])]).unwrap();
    assert!((cos2_angle(&eta, &xi).unwrap() - 0.5).abs() < 1e-14);
}

#[test]
fn cubature_weights_are_probabilities() {
    let cub = Cubature::new(16, 6);
    let v3 = GrassmannPoint::whole(3).unwrap();
    for j in 0..=3 {
        let nodes = cub.grassmann_nodes(&v3, j).unwrap();
        let total: f64 = nodes.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-13, "G_{j}: {total}");
        assert!(nodes.iter().all(|(p, _)| p.k() == j));
    }
    // E|Pξ e₁|² = k/n for the invariant measure on G(3,k).
    for j in 1..=2 {
        let m: f64 = cub
            .grassmann_nodes(&v3, j)
            .unwrap()
            .iter()
            .map(|(p, w)| w * norm(&p.project(&[1.0, 0.0, 0.0])).powi(2))
            .sum();
        assert!((m - j as f64 / 3.0).abs() < 1e-13);
    }
}
