use kbwave::higher_ell::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use std::time::Instant;

fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `Σ coeff·f^i·c^j` from a literal term list.
fn poly(terms: &[(i64, i64, u32, u32)]) -> FPoly {
    terms
        .iter()
        .fold(FPoly::zero(), |acc, &(n, d, i, j)| acc.add(&FPoly::monomial(r(n, d), i, j)))
}

#[test]
fn vanishing_polynomials_for_two_three_four() {
    let p2 = poly(&[(-1, 1, 4, 0), (-4, 1, 3, 1), (-4, 1, 2, 2)]);
    assert_eq!(reduce_vanishing(2).unwrap().p_final, p2);

    let p3 = poly(&[(1, 2, 5, 0), (3, 1, 4, 1), (6, 1, 3, 2), (4, 1, 2, 3)]);
    assert_eq!(reduce_vanishing(3).unwrap().p_final, p3);

    // −f²(f + 2c)⁴/4 expanded
    let p4 = poly(&[(-1, 4, 6, 0), (-2, 1, 5, 1), (-6, 1, 4, 2), (-8, 1, 3, 3), (-4, 1, 2, 4)]);
    assert_eq!(reduce_vanishing(4).unwrap().p_final, p4);

    assert_eq!(reduce_vanishing(1), Err(HigherEllError::EllTooSmall(1)));
}

#[test]
fn stack_structure_holds_up_to_ten() {
    let p2 = poly(&[(-1, 1, 1, 1), (-3, 4, 2, 0)]);
    for ell in 2..=10 {
        let st = reduce_vanishing(ell).unwrap();
        assert_eq!(st.fields.len(), ell as usize);
        assert_eq!(st.fields[0], FPoly::f());
        assert_eq!(st.fields[1], p2);
        for (j, p) in st.fields.iter().enumerate() {
            assert_eq!(p.degree_f(), Some(j as u32 + 1));
        }
        let p = &st.p_final;
        for j in 0..=ell + 2 {
            assert!(p.coeff(0, j).is_zero() && p.coeff(1, j).is_zero());
        }
        let lead = p.coeff(ell + 2, 0);
        let expected_sign = if ell % 2 == 1 { 1 } else { -1 };
        assert_eq!(lead > BigRational::zero(), expected_sign > 0, "ell = {ell}");
    }
}

#[test]
fn conjecture_report_flags_the_printed_denominator() {
    let t = Instant::now();
    let rep = conjecture_report(10).unwrap();
    assert!(t.elapsed().as_secs_f64() < 5.0);
    assert_eq!(rep.rows.len(), 9);
    let row = |ell: u32| rep.rows.iter().find(|r| r.ell == ell).unwrap();
    assert!(row(2).printed_match && row(2).pattern_match);
    assert!(!row(4).printed_match && row(4).pattern_match);
    assert_eq!(row(4).leading, "-1/4");
    assert_eq!(row(4).printed_candidate, "-1/16");
    for ell in 6..=10 {
        assert!(row(ell).factors_as_power);
        assert_eq!(row(ell).pattern_match, row(ell).factors_as_power);
    }
    let text = rep.to_text();
    assert_eq!(text.lines().count(), 10);
    assert!(text.contains("mismatch (-1/16)"));
    assert!(conjecture_report(1).is_err());
}

#[test]
fn kappa_candidates() {
    assert_eq!(printed_kappa(2), r(-1, 1));
    assert_eq!(printed_kappa(4), r(-1, 16));
    assert_eq!(pattern_kappa(3), r(1, 2));
    assert_eq!(pattern_kappa(4), r(-1, 4));
    assert_eq!(power_form(&r(1, 1), 0), FPoly::f().pow(2));
}

#[test]
fn even_ell_admit_only_constants() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(5);
    let p4 = reduce_vanishing(4).unwrap();
    let p2 = reduce_vanishing(2).unwrap();
    let p3 = reduce_vanishing(3).unwrap();
    for _ in 0..100 {
        let c: f64 = rng.gen_range(-5.0..5.0);
        for _ in 0..100 {
            let f: f64 = rng.gen_range(-20.0..20.0);
            // exact evaluation at the sampled binary fractions
            let (fr, cr) = (BigRational::from_float(f).unwrap(), BigRational::from_float(c).unwrap());
            assert!(p4.p_final.eval(&fr, &cr) <= BigRational::zero());
        }
        assert!(!admits_nonconstant(&p4, c));
        assert!(!admits_nonconstant(&p2, c));
        if c.abs() > 1e-3 {
            assert!(admits_nonconstant(&p3, c));
        }
    }
    assert_eq!(p4.p_final.eval_f64(0.0, 1.3), 0.0);
    assert!(p4.p_final.eval(&r(-13, 5), &r(13, 10)).is_zero());
}

#[test]
fn fpoly_arithmetic() {
    let f = FPoly::f();
    let c = FPoly::monomial(BigRational::one(), 0, 1);
    let sq = f.add(&c).pow(2);
    assert_eq!(sq, poly(&[(1, 1, 2, 0), (2, 1, 1, 1), (1, 1, 0, 2)]));
    assert_eq!(sq.deriv_f(), poly(&[(2, 1, 1, 0), (2, 1, 0, 1)]));
    assert_eq!(sq.deriv_f().integrate_f(), sq.sub(&c.pow(2)));
    assert_eq!(sq.eval(&r(1, 2), &r(1, 3)), r(25, 36));
    assert!(sq.sub(&sq).is_zero());
    assert_eq!(sq.to_string(), "f^2 + 2 c f + c^2");
}

#[test]
fn l3_identity_in_exact_arithmetic() {
    // −c·h_f = −P″/8 + h + ½ f·h_f, with h = p₃ and P = P₃
    let st = reduce_vanishing(3).unwrap();
    let h = &st.fields[2];
    let hf = h.deriv_f();
    let c = FPoly::monomial(BigRational::one(), 0, 1);
    let lhs = c.mul(&hf).scale(&r(-1, 1));
    let rhs = st
        .p_final
        .deriv_f()
        .deriv_f()
        .scale(&r(-1, 8))
        .add(h)
        .add(&FPoly::f().mul(&hf).scale(&r(1, 2)));
    assert_eq!(lhs, rhs);
}

#[test]
fn l3_full_quintic() {
    assert_eq!(reduce_l3_full(1.0, 0.0, 0.0, 0.0, 0.0), [0.5, 3.0, 6.0, 4.0, 0.0, 0.0]);
    assert_eq!(reduce_l3_full(0.0, 1.0, 0.0, 0.0, 0.0)[2], -2.0);
    let st = reduce_vanishing(3).unwrap();
    for &(f, c) in &[(0.3, 1.2), (-1.7, 0.4), (2.0, -0.9)] {
        let a = reduce_l3_full(c, 0.0, 0.0, 0.0, 0.0);
        let v = a.iter().fold(0.0, |acc, x| acc * f + x);
        assert!((v - st.p_final.eval_f64(f, c)).abs() < 1e-12);
    }
}

/// Ascending-coefficient polynomial helpers for the chain with integration constants.
fn integ(p: &[f64]) -> Vec<f64> {
    std::iter::once(0.0).chain(p.iter().enumerate().map(|(i, a)| a / (i + 1) as f64)).collect()
}

fn deriv(p: &[f64]) -> Vec<f64> {
    p.iter().enumerate().skip(1).map(|(i, a)| i as f64 * a).collect()
}

/// `(c + f/2)·p′ + p`.
fn chain_integrand(p: &[f64], c: f64) -> Vec<f64> {
    let d = deriv(p);
    let mut out = vec![0.0; p.len() + 1];
    for (i, a) in d.iter().enumerate() {
        out[i] += c * a;
        out[i + 1] += 0.5 * a;
    }
    for (i, a) in p.iter().enumerate() {
        out[i] += a;
    }
    out
}

proptest! {
    #[test]
    fn l3_full_quintic_from_the_chain_with_constants(
        c in -2.0f64..2.0, d1 in -2.0f64..2.0, d2 in -2.0f64..2.0, d3 in -2.0f64..2.0, d4 in -2.0f64..2.0
    ) {
        // p₂ = g, p₃ = h, p₄ closes with −d₃, P = −8∫p₄ + 8d₄
        let mut p = vec![0.0, 1.0];
        for k in [d1, d2, -d3] {
            let mut next: Vec<f64> = integ(&chain_integrand(&p, c)).iter().map(|x| -x).collect();
            next[0] += k;
            p = next;
        }
        let mut big: Vec<f64> = integ(&p).iter().map(|x| -8.0 * x).collect();
        big[0] += 8.0 * d4;
        let got = reduce_l3_full(c, d1, d2, d3, d4);
        for (i, a) in got.iter().enumerate() {
            prop_assert!((a - big[5 - i]).abs() < 1e-12 * (1.0 + a.abs()), "f^{} {} vs {}", 5 - i, a, big[5 - i]);
        }
    }

    #[test]
    fn l3_fields_match_the_exact_recurrence(n in -50i64..50, d in 1i64..20, cn in -20i64..20, cd in 1i64..10) {
        let st = reduce_vanishing(3).unwrap();
        let (f, c) = (r(n, d), r(cn, cd));
        let ff = n as f64 / d as f64;
        let cf = cn as f64 / cd as f64;
        let (g, h) = l3_fields(ff, cf, 0.0, 0.0);
        let to_f = |x: BigRational| num_traits::ToPrimitive::to_f64(&x).unwrap();
        let ge = to_f(st.fields[1].eval(&f, &c));
        let he = to_f(st.fields[2].eval(&f, &c));
        prop_assert!((g - ge).abs() <= 1e-12 * ge.abs().max(1.0));
        prop_assert!((h - he).abs() <= 1e-12 * he.abs().max(1.0));
    }
}

#[test]
fn l3_fields_fixtures() {
    assert_eq!(l3_fields(0.0, 1.7, 0.3, -0.4), (0.3, -0.4));
    let c = 1.5;
    let (g, h) = l3_fields(-2.0 * c, c, 0.0, 0.0);
    assert!((g + c * c).abs() < 1e-14 && h.abs() < 1e-14);
}

#[test]
fn l3_profile_satisfies_the_quintic() {
    let c = 1.0;
    let grid: Vec<f64> = (0..400).map(|i| -6.0 + 12.0 * i as f64 / 399.0).collect();
    for branch in [L3Branch::Rising, L3Branch::Falling] {
        let prof = l3_implicit_profile(c, &grid, branch).unwrap();
        let fp = prof.f_prime.as_ref().unwrap();
        let mut worst = 0.0f64;
        for (i, &xi) in grid.iter().enumerate() {
            let f = prof.f[i];
            assert!(-2.0 * c < f && f < 0.0);
            // central difference with a small step, independent of the analytic slope
            let dx = 1e-5;
            let a = l3_point(c, xi + dx, 0.0, branch).unwrap().0;
            let b = l3_point(c, xi - dx, 0.0, branch).unwrap().0;
            let cd = (a - b) / (2.0 * dx);
            let quintic = 0.5 * f * f * (f + 2.0 * c).powi(3);
            worst = worst.max((cd * cd - quintic).abs());
            assert!((fp[i] - cd).abs() < 1e-7);
        }
        assert!(worst < 1e-6, "{branch:?}: {worst}");
    }
}

#[test]
fn l3_profile_is_a_monotone_front() {
    let c = 0.7;
    let grid: Vec<f64> = (0..401).map(|i| -20.0 + 0.1 * i as f64).collect();
    let rising = l3_implicit_profile(c, &grid, L3Branch::Rising).unwrap();
    assert!(rising.f.windows(2).all(|w| w[1] > w[0]));
    let falling = l3_implicit_profile(c, &grid, L3Branch::Falling).unwrap();
    assert!(falling.f.windows(2).all(|w| w[1] < w[0]));

    let (lo, hi) = l3_asymptotes(c, L3Branch::Rising);
    assert_eq!((lo, hi), (-2.0 * c, 0.0));
    // f → 0 only as e^{−2c^{3/2}ξ}; past the underflow of that factor the point is out of range
    let far = l3_point(c, 500.0, 0.0, L3Branch::Rising).unwrap().0;
    assert!(far < 0.0 && far > -1e-200);
    assert!(matches!(l3_point(c, 1e6, 0.0, L3Branch::Rising), Err(HigherEllError::OutOfBranchRange(_))));
    // the triple zero −2c is reached algebraically: (f + 2c)·ξ² → 2/c²
    let xi = -1e4;
    let near_lo = l3_point(c, xi, 0.0, L3Branch::Rising).unwrap().0;
    assert!(((near_lo - lo) * xi * xi * c * c / 2.0 - 1.0).abs() < 1e-2);
}

#[test]
fn l3_errors() {
    assert_eq!(l3_point(0.0, 1.0, 0.0, L3Branch::Rising), Err(HigherEllError::NonPositiveSpeed(0.0)));
    assert!(matches!(l3_point(1.0, 1e300, 0.0, L3Branch::Rising), Err(HigherEllError::OutOfBranchRange(_))));
    assert!(l3_implicit_profile(1.0, &[0.0, 1.0, 1.5], L3Branch::Rising).is_err());
}
