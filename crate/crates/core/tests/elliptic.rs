use kbwave::elliptic::*;
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

/// Incomplete integral of the first kind by Simpson's rule in `θ`, refined until stable.
fn incomplete_f(phi: f64, k: f64) -> f64 {
    let integrand = |t: f64| 1.0 / (1.0 - k * k * t.sin().powi(2)).sqrt();
    let mut prev = f64::NAN;
    let mut n = 64;
    loop {
        let h = phi / n as f64;
        let mut s = integrand(0.0) + integrand(phi);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(i as f64 * h);
        }
        let val = s * h / 3.0;
        if (val - prev).abs() < 1e-14 * val.abs().max(1.0) || n > 1 << 20 {
            return val;
        }
        prev = val;
        n *= 2;
    }
}

fn m(k: f64) -> Modulus {
    Modulus::new(k).unwrap()
}

#[test]
fn complete_k_matches_quadrature() {
    for k in [0.0, 0.1, 0.5, 0.8, 0.99, 0.999999] {
        let q = incomplete_f(FRAC_PI_2, k);
        let a = complete_k(m(k)).unwrap();
        assert!((a - q).abs() < 1e-11 * q, "k={k}: {a} vs {q}");
    }
}

#[test]
fn complete_k_reference_values() {
    // K(1/√2) = Γ(1/4)²/(4√π)
    let gamma_quarter = 3.625_609_908_221_908_3;
    let expected = gamma_quarter * gamma_quarter / (4.0 * PI.sqrt());
    let k = m(std::f64::consts::FRAC_1_SQRT_2);
    assert!((complete_k(k).unwrap() - expected).abs() < 1e-13);
    assert_eq!(complete_k(Modulus::ONE), Err(EllipticError::InfinitePeriod));
}

#[test]
fn modulus_from_k2_clamps() {
    assert_eq!(Modulus::from_k2(1.0 + 1e-10, 1e-9).unwrap().value(), 1.0);
    assert_eq!(Modulus::from_k2(-1e-10, 1e-9).unwrap().value(), 0.0);
    assert!(Modulus::from_k2(1.1, 1e-9).is_err());
    assert!(Modulus::new(f64::NAN).is_err());
}

#[test]
fn sn_inverts_the_incomplete_integral() {
    for &k in &[0.2, 0.5, 0.9, 0.999] {
        for &phi in &[0.1, 0.7, 1.2, 1.5] {
            let u = incomplete_f(phi, k);
            let t = jacobi(u, m(k));
            assert!((t.sn - phi.sin()).abs() < 1e-12, "k={k} phi={phi}");
            assert!((t.cn - phi.cos()).abs() < 1e-12);
        }
    }
}

#[test]
fn half_quarter_period_values() {
    // sn(K/2) = 1/√(1+k′), cn(K/2) = √(k′/(1+k′)), dn(K/2) = √k′
    for &k in &[0.3, 0.5, 0.95] {
        let md = m(k);
        let kc = md.complementary();
        let t = jacobi(0.5 * complete_k(md).unwrap(), md);
        assert!((t.sn - 1.0 / (1.0 + kc).sqrt()).abs() < 1e-13);
        assert!((t.cn - (kc / (1.0 + kc)).sqrt()).abs() < 1e-13);
        assert!((t.dn - kc.sqrt()).abs() < 1e-13);
    }
}

#[test]
fn dn_at_quarter_period_is_complementary_modulus() {
    for &k in &[0.1, 0.5, 0.9, 0.99] {
        let md = m(k);
        let t = jacobi(complete_k(md).unwrap(), md);
        assert!((t.dn - md.complementary()).abs() < 1e-12, "k={k}");
    }
}

#[test]
fn degenerate_moduli_give_circular_and_hyperbolic_functions() {
    for i in 0..200 {
        let u = -10.0 + 0.1 * i as f64;
        let t0 = jacobi(u, Modulus::ZERO);
        assert!((t0.sn - u.sin()).abs() < 1e-12 && (t0.cn - u.cos()).abs() < 1e-12 && t0.dn == 1.0);
        let t1 = jacobi(u, Modulus::ONE);
        let sech = 1.0 / u.cosh();
        assert!((t1.sn - u.tanh()).abs() < 1e-12 && (t1.cn - sech).abs() < 1e-12 && (t1.dn - sech).abs() < 1e-12);
        // snapped moduli land on the same limits
        assert_eq!(jacobi(u, m(1.0 - 1e-13)), t1);
    }
}

#[test]
fn periodicity() {
    for &k in &[0.0, 0.4, 0.8, 0.98] {
        let md = m(k);
        let kk = complete_k(md).unwrap();
        for &u in &[0.13, 1.7, -2.2] {
            let a = jacobi(u, md);
            let b = jacobi(u + 4.0 * kk, md);
            let c = jacobi(u + 2.0 * kk, md);
            assert!((a.sn - b.sn).abs() < 1e-11 && (a.cn - b.cn).abs() < 1e-11 && (a.dn - b.dn).abs() < 1e-11);
            // half-period: sn, cn flip sign, dn has period 2K
            assert!((a.sn + c.sn).abs() < 1e-11 && (a.cn + c.cn).abs() < 1e-11 && (a.dn - c.dn).abs() < 1e-11);
        }
    }
}

#[test]
fn derived_functions_and_poles() {
    let md = m(0.6);
    let u = 0.8;
    let t = jacobi(u, md);
    assert_eq!(jacobi_derived(u, md, DerivedKind::Tn).unwrap(), t.sn / t.cn);
    assert_eq!(jacobi_derived(u, md, DerivedKind::InvSn).unwrap(), 1.0 / t.sn);
    assert_eq!(jacobi_derived(u, md, DerivedKind::InvCn).unwrap(), 1.0 / t.cn);
    assert_eq!(jacobi_derived(u, md, DerivedKind::DnTn).unwrap(), t.dn * t.sn / t.cn);
    assert!(matches!(jacobi_derived(0.0, md, DerivedKind::InvSn), Err(EllipticError::Pole(_))));
    let kk = complete_k(md).unwrap();
    // cn(K) is O(ε), below the pole tolerance
    assert!(matches!(jacobi_derived(kk, md, DerivedKind::Tn), Err(EllipticError::Pole(_))));
}

fn fd(fun: impl Fn(f64) -> f64, u: f64) -> f64 {
    let h = 1e-4;
    (fun(u - 2.0 * h) - 8.0 * fun(u - h) + 8.0 * fun(u + h) - fun(u + 2.0 * h)) / (12.0 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn pythagorean_identities(u in -50.0f64..50.0, k in 0.0f64..1.0) {
        let md = m(k);
        let t = jacobi(u, md);
        prop_assert!((t.sn * t.sn + t.cn * t.cn - 1.0).abs() < 1e-12);
        prop_assert!((t.dn * t.dn + md.k2() * t.sn * t.sn - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parity(u in -20.0f64..20.0, k in 0.0f64..1.0) {
        let md = m(k);
        let a = jacobi(u, md);
        let b = jacobi(-u, md);
        prop_assert!((a.sn + b.sn).abs() < 1e-13);
        prop_assert!((a.cn - b.cn).abs() < 1e-13);
        prop_assert!((a.dn - b.dn).abs() < 1e-13);
    }

    #[test]
    fn derivatives_match_finite_differences(u in -10.0f64..10.0, k in 0.0f64..0.999) {
        let md = m(k);
        let d = jacobi_derivatives(jacobi(u, md), md);
        prop_assert!((d.sn - fd(|x| jacobi(x, md).sn, u)).abs() < 1e-8);
        prop_assert!((d.cn - fd(|x| jacobi(x, md).cn, u)).abs() < 1e-8);
        prop_assert!((d.dn - fd(|x| jacobi(x, md).dn, u)).abs() < 1e-8);
    }

    #[test]
    fn first_order_odes(u in -10.0f64..10.0, k in 0.0f64..0.999) {
        let md = m(k);
        let k2 = md.k2();
        let t = jacobi(u, md);
        let s = fd(|x| jacobi(x, md).sn, u);
        let c = fd(|x| jacobi(x, md).cn, u);
        let d = fd(|x| jacobi(x, md).dn, u);
        prop_assert!((s * s - (1.0 - t.sn * t.sn) * (1.0 - k2 * t.sn * t.sn)).abs() < 1e-6);
        prop_assert!((c * c - (1.0 - t.cn * t.cn) * (1.0 - k2 + k2 * t.cn * t.cn)).abs() < 1e-6);
        prop_assert!((d * d - (1.0 - t.dn * t.dn) * (t.dn * t.dn - 1.0 + k2)).abs() < 1e-6);
    }

    #[test]
    fn addition_theorem(u in -5.0f64..5.0, v in -5.0f64..5.0, k in 0.0f64..1.0) {
        let md = m(k);
        let (a, b) = (jacobi(u, md), jacobi(v, md));
        let den = 1.0 - md.k2() * a.sn * a.sn * b.sn * b.sn;
        let sn_sum = (a.sn * b.cn * b.dn + b.sn * a.cn * a.dn) / den;
        prop_assert!((jacobi(u + v, md).sn - sn_sum).abs() < 1e-11);
    }
}
