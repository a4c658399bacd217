use gtfe::kernel::*;
use gtfe::Error;
use proptest::prelude::*;

const ALPHAS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 10.0];

fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn derivatives_match_finite_differences_away_from_origin() {
    for alpha in ALPHAS {
        let k = Kernel::new(alpha).unwrap();
        let h = 1e-5 * alpha;
        let ks = 1.0 / (4.0 * alpha);
        for u in [-7.0, -2.5, -0.3, 0.2, 1.0, 4.0] {
            let x = u * alpha;
            let pairs: [(&dyn Fn(f64) -> f64, f64, f64); 4] = [
                (&|y| k.k(y), k.d1(x), ks),
                (&|y| k.d1(y), k.d2(x), ks / alpha),
                (&|y| k.d2(y), k.d3(x), ks / (alpha * alpha)),
                (&|y| k.d3(y), k.d4(x), ks / alpha.powi(3)),
            ];
            for (f, exact, scale) in pairs {
                let fd = central(f, x, h);
                assert!((fd - exact).abs() <= 1e-7 * scale / alpha, "alpha {alpha} x {x}: {fd} vs {exact}");
            }
            let sq = |y: f64| k.d3(y) * k.d3(y);
            let fd = central(sq, x, h);
            assert!((fd - k.d3_squared_deriv(x)).abs() <= 1e-6 * alpha.powi(-9), "alpha {alpha} x {x}");
        }
    }
}

/// Adaptive Simpson, independent of the library quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, eps: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(c) + f(b));
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64, fc: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let (d, e) = (0.5 * (a + c), 0.5 * (c + b));
        let (fd, fe) = (f(d), f(e));
        let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
        let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, c, fa, fc, fd, left, eps / 2.0, depth - 1) + rec(f, c, b, fc, fb, fe, right, eps / 2.0, depth - 1)
    }
    rec(f, a, b, f(a), f(b), f(c), whole, eps, depth)
}

#[test]
fn kernel_has_unit_mass_and_is_even() {
    for alpha in ALPHAS {
        let k = Kernel::new(alpha).unwrap();
        let half = simpson(&|x| k.k(x), 0.0, 60.0 * alpha, 1e-14, 40);
        assert!((2.0 * half - 1.0).abs() < 1e-10, "alpha {alpha}: {}", 2.0 * half);
        for x in [0.01, 0.7, 3.0, 11.0] {
            let x = x * alpha;
            assert_eq!(k.k(x), k.k(-x));
            assert_eq!(k.d2(x), k.d2(-x));
            assert_eq!(k.d4(x), k.d4(-x));
            assert_eq!(k.d1(x), -k.d1(-x));
            assert_eq!(k.d3(x), -k.d3(-x));
        }
    }
}

#[test]
fn closed_form_constants() {
    for alpha in ALPHAS {
        let kc = constants(alpha).unwrap();
        let e = (-1.0f64).exp();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        assert!(rel(kc.k_inf, 1.0 / (4.0 * alpha)) < 1e-15);
        assert!(rel(kc.k3_inf, 1.0 / (2.0 * alpha.powi(4))) < 1e-15);
        assert!(rel(kc.lip_k, e / (4.0 * alpha * alpha)) < 1e-15);
        assert!(rel(kc.lip_k3, 3.0 / (4.0 * alpha.powi(5))) < 1e-15);
        let a = 2.0 * kc.k_inf * (2.0 * kc.lip_k * kc.k3_inf + kc.k_inf * kc.lip_k3);
        assert!(rel(kc.a_const, a) < 1e-15);
        assert!(rel(kc.speed_bound, 1.0 / (32.0 * alpha.powi(6))) < 1e-15);
        // the sups are attained at x = α (K') and approached at 0⁺ (K''', K'''')
        let k = kc.kernel();
        assert!(rel(k.d1(alpha).abs(), kc.lip_k) < 1e-15);
        assert!(rel(k.d3(1e-14 * alpha).abs(), kc.k3_inf) < 1e-12);
        assert!(rel(k.d4(1e-14 * alpha).abs(), kc.lip_k3) < 1e-12);
    }
}

#[test]
fn one_sided_third_derivative_at_origin() {
    let a = 2.0;
    let plus = eval_k3_signed(0.0, Side::Plus, a).unwrap();
    let minus = eval_k3_signed(0.0, Side::Minus, a).unwrap();
    assert_eq!(plus, 1.0 / (2.0 * a.powi(4)));
    assert_eq!(minus, -plus);
    assert!(matches!(eval_k_deriv(0.0, 3, a), Err(Error::Domain(_))));
    assert!(matches!(eval_k_deriv(0.0, 4, a), Err(Error::Domain(_))));
    assert_eq!(eval_k_deriv(0.0, 2, a).unwrap(), -1.0 / (4.0 * a.powi(3)));
    assert!(matches!(eval_k(1.0, 0.0), Err(Error::Parameter(_))));
    assert!(matches!(eval_k(1.0, f64::NAN), Err(Error::Parameter(_))));
    assert!(matches!(check_lemma_identity(0.0, 1.0), Err(Error::Domain(_))));
}

proptest! {
    #[test]
    fn identities_hold_at_random_points(x in -50.0f64..50.0, ai in 0usize..5) {
        let alpha = ALPHAS[ai];
        prop_assume!(x != 0.0);
        let x = x * alpha;
        prop_assert!(check_greens_identity(x, alpha).unwrap().abs() <= 1e-12 / (4.0 * alpha));
        prop_assert!(check_lemma_identity(x, alpha).unwrap().abs() <= 1e-12 * lemma_identity_scale(alpha));
    }

    #[test]
    fn kernel_bounded_by_its_sup(x in -100.0f64..100.0, ai in 0usize..5) {
        let kc = constants(ALPHAS[ai]).unwrap();
        let k = kc.kernel();
        prop_assert!(k.k(x) > 0.0 || x.abs() > 700.0 * kc.alpha);
        prop_assert!(k.k(x) <= kc.k_inf);
        prop_assert!(k.d1(x).abs() <= kc.lip_k * (1.0 + 1e-15));
        if x != 0.0 {
            prop_assert!(k.d3(x).abs() <= kc.k3_inf);
            prop_assert!(k.d4(x).abs() <= kc.lip_k3);
        }
    }
}
