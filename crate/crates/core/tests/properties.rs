use bdeconv::experiments::image::GrayImage;
use bdeconv::experiments::kernels::{make_kernel, KernelKind};
use bdeconv::experiments::pgm;
use bdeconv::haar;
use bdeconv::linops::{unitary_dft, Grid};
use bdeconv::manifold::{self, FactorPair, HorizontalVector, TangentPair};
use bdeconv::objective::{g0, g0_prime, Objective, PenaltyParams};
use bdeconv::{cvec, rng, MeasurementOperator, C64};
use proptest::prelude::*;

fn pair(k: usize, n: usize, seed: u64) -> FactorPair {
    let mut s = rng::stream(seed);
    FactorPair::new(rng::complex_normal_vec(&mut s, k), rng::complex_normal_vec(&mut s, n)).unwrap()
}

fn tangent(k: usize, n: usize, seed: u64) -> TangentPair {
    let mut s = rng::stream(seed);
    TangentPair::new(rng::complex_normal_vec(&mut s, k), rng::complex_normal_vec(&mut s, n))
}

fn nonzero_scalar() -> impl Strategy<Value = C64> {
    (0.2f64..4.0, -3.2f64..3.2).prop_map(|(r, th)| C64::from_polar(r, th))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_identity(l in 1usize..48, kf in 0.0f64..1.0, n in 1usize..24, seed in any::<u64>()) {
        let k = 1 + ((l - 1) as f64 * kf) as usize;
        let op = MeasurementOperator::gaussian(l, k, n, seed).unwrap();
        let x = pair(k, n, seed ^ 1);
        let z = rng::complex_normal_vec(&mut rng::stream(seed ^ 2), l);
        let lhs = cvec::dot(&op.apply(x.h(), x.m()).unwrap(), &z);
        let rhs = cvec::dot(x.h(), &op.adjoint_times_vec(&z, x.m()).unwrap());
        let scale = cvec::norm(&z) * x.h_norm() * x.m_norm() * (1.0 + n as f64).sqrt();
        prop_assert!((lhs - rhs).norm() <= 1e-10 * scale);
    }

    #[test]
    fn operator_is_bilinear(seed in any::<u64>(), a in nonzero_scalar()) {
        let op = MeasurementOperator::gaussian(24, 5, 4, seed).unwrap();
        let x = pair(5, 4, seed ^ 3);
        let y0 = op.apply(x.h(), x.m()).unwrap();
        let y1 = op.apply(&cvec::scale(x.h(), a), x.m()).unwrap();
        let y2 = op.apply(x.h(), &cvec::scale(x.m(), a.conj())).unwrap();
        let want = cvec::scale(&y0, a);
        prop_assert!(cvec::norm(&cvec::sub(&y1, &want)) <= 1e-12 * cvec::norm(&want));
        prop_assert!(cvec::norm(&cvec::sub(&y2, &want)) <= 1e-12 * cvec::norm(&want));
    }

    #[test]
    fn group_action_keeps_product(k in 1usize..10, n in 1usize..10, seed in any::<u64>(), p in nonzero_scalar()) {
        let x = pair(k, n, seed);
        let y = x.act(p);
        let e = y.product().sub(&x.product()).frobenius();
        prop_assert!(e <= 1e-12 * x.product().frobenius());
    }

    #[test]
    fn metric_is_invariant(k in 1usize..10, n in 1usize..10, seed in any::<u64>(), p in nonzero_scalar()) {
        let x = pair(k, n, seed);
        let (eta, xi) = (tangent(k, n, seed ^ 5), tangent(k, n, seed ^ 6));
        let a = manifold::metric(&x, &eta, &xi);
        let b = manifold::metric(&x.act(p), &eta.act(p), &xi.act(p));
        prop_assert!((a - b).abs() <= 1e-10 * manifold::metric(&x, &eta, &eta).max(manifold::metric(&x, &xi, &xi)));
    }

    #[test]
    fn projections_split_orthogonally(k in 1usize..12, n in 1usize..12, seed in any::<u64>()) {
        let x = pair(k, n, seed);
        let v = tangent(k, n, seed ^ 7);
        let h = manifold::horizontal_project(&x, &v).unwrap();
        let vert = manifold::vertical_project(&x, &v);
        let sum = h.dir().add(&vert);
        prop_assert!(sum.sub(&v).norm_sqr().sqrt() <= 1e-12 * v.norm_sqr().sqrt());
        prop_assert!(manifold::metric(&x, h.dir(), &vert).abs() <= 1e-10 * manifold::metric(&x, &v, &v));
        prop_assert!(HorizontalVector::new(x.clone(), h.dir().clone()).is_ok());
    }

    #[test]
    fn balance_is_idempotent(k in 1usize..12, n in 1usize..12, seed in any::<u64>(), s in 0.01f64..100.0) {
        let x = pair(k, n, seed);
        let skew = FactorPair::new(cvec::scale_real(x.h(), s), cvec::scale_real(x.m(), 1.0 / s)).unwrap();
        let b = manifold::balance(&skew);
        prop_assert!(b.is_balanced(1e-12));
        let bb = manifold::balance(&b);
        prop_assert!(cvec::norm(&cvec::sub(bb.h(), b.h())) <= 1e-12 * b.h_norm());
    }

    #[test]
    fn transport_keeps_inner_products(k in 2usize..8, n in 2usize..8, seed in any::<u64>()) {
        let x = manifold::balance(&pair(k, n, seed));
        let step = manifold::horizontal_project(&x, &tangent(k, n, seed ^ 8).scaled(0.2)).unwrap();
        let a = manifold::horizontal_project(&x, &tangent(k, n, seed ^ 9)).unwrap();
        let b = manifold::horizontal_project(&x, &tangent(k, n, seed ^ 10)).unwrap();
        let ta = manifold::transport(&step, &a).unwrap();
        let tb = manifold::transport(&step, &b).unwrap();
        let before = a.inner(&b).unwrap();
        let after = ta.inner(&tb).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * a.norm() * b.norm());
    }

    #[test]
    fn cost_is_constant_on_orbits(seed in any::<u64>(), p in nonzero_scalar()) {
        let op = MeasurementOperator::gaussian(40, 6, 5, seed).unwrap();
        let t = pair(6, 5, seed ^ 11);
        let y = op.apply(t.h(), t.m()).unwrap();
        let obj = Objective::new(&op, &y, PenaltyParams::new(0.3, 2.0, 0.8).unwrap()).unwrap();
        let x = pair(6, 5, seed ^ 12);
        let a = obj.cost(&x).unwrap();
        let b = obj.cost(&x.act(p)).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1.0));
    }

    #[test]
    fn penalty_shape(t in -5.0f64..5.0) {
        prop_assert!(g0(t) >= 0.0);
        if t <= 1.0 {
            prop_assert_eq!(g0(t), 0.0);
        }
        let h = 1e-6;
        let fd = (g0(t + h) - g0(t - h)) / (2.0 * h);
        prop_assert!((fd - g0_prime(t)).abs() <= 1e-5);
    }

    #[test]
    fn dft_round_trip(rows in 1usize..24, cols in 1usize..12, seed in any::<u64>()) {
        let grid = Grid::image(rows, cols);
        let x = rng::complex_normal_vec(&mut rng::stream(seed), grid.len());
        let mut f = x.clone();
        unitary_dft(&mut f, grid, false).unwrap();
        prop_assert!((cvec::norm(&f) - cvec::norm(&x)).abs() <= 1e-12 * cvec::norm(&x));
        unitary_dft(&mut f, grid, true).unwrap();
        prop_assert!(cvec::norm(&cvec::sub(&f, &x)) <= 1e-12 * cvec::norm(&x));
    }

    #[test]
    fn haar_is_orthonormal(re in 0u32..6, ce in 0u32..6, seed in any::<u64>()) {
        let (rows, cols) = (1usize << re, 1usize << ce);
        let mut s = rng::stream(seed);
        let img: Vec<f64> = (0..rows * cols).map(|_| rng::real_normal(&mut s)).collect();
        let c = haar::haar_analysis(&img, rows, cols).unwrap();
        let e0: f64 = img.iter().map(|v| v * v).sum();
        let e1: f64 = c.iter().map(|v| v * v).sum();
        prop_assert!((e0 - e1).abs() <= 1e-12 * e0);
        let back = haar::haar_synthesis(&c, rows, cols).unwrap();
        prop_assert!(img.iter().zip(&back).all(|(a, b)| (a - b).abs() <= 1e-12));
    }

    #[test]
    fn pgm_round_trip(rows in 1usize..20, cols in 1usize..20, seed in any::<u64>()) {
        let mut s = rng::stream(seed);
        let data: Vec<f64> = (0..rows * cols)
            .map(|_| (rng::real_normal(&mut s).abs() * 90.0).round().min(255.0) / 255.0)
            .collect();
        let img = GrayImage::new(rows, cols, data).unwrap();
        let back = pgm::decode(&pgm::encode(&img)).unwrap();
        prop_assert_eq!(back, img);
    }

    #[test]
    fn kernels_sum_to_one(len in 1.0f64..30.0, angle in -180.0f64..180.0, scale in 0.3f64..3.0, slen in 1usize..15) {
        for kind in [
            KernelKind::Motion { len, angle_deg: angle },
            KernelKind::gaussian(scale),
            KernelKind::Sin { len: slen },
        ] {
            let k = make_kernel(kind).unwrap();
            let sum: f64 = k.values.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(k.values.iter().all(|v| *v >= 0.0));
            prop_assert!(k.rows % 2 == 1 && k.cols % 2 == 1);
        }
    }
}
