//! Traveling reductions for ℓ ≥ 3 with vanishing boundary values.
//!
//! The recurrence `p₁ = f`, `p_{j+1} = −∫₀^f ((c + s/2) p_j′ + p_j) ds`,
//! `P_ℓ = −8∫₀^f p_{ℓ+1} ds` is evaluated in exact rationals and is the single source of
//! truth; `(f′)² = P_ℓ(f)`.

use crate::reduction::g_from_f;
use crate::verify::Profile;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

const SOLVER_MAX_ITER: usize = 200;
const SOLVER_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HigherEllError {
    #[error("ell must be at least 2, got {0}")]
    EllTooSmall(u32),
    #[error("wave speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("xi = {0} is out of branch range")]
    OutOfBranchRange(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Polynomial in `f` and `c` with exact rational coefficients, keyed by `(i, j)` for
/// `f^i c^j`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FPoly {
    terms: BTreeMap<(u32, u32), BigRational>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl FPoly {
    pub fn zero() -> Self {
        FPoly::default()
    }

    pub fn monomial(coeff: BigRational, i: u32, j: u32) -> Self {
        let mut p = FPoly::zero();
        p.add_term(i, j, coeff);
        p
    }

    /// `f`.
    pub fn f() -> Self {
        FPoly::monomial(BigRational::one(), 1, 0)
    }

    fn add_term(&mut self, i: u32, j: u32, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let e = self.terms.entry((i, j)).or_insert_with(BigRational::zero);
        *e += coeff;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> BigRational {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &BigRational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree_f(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.0).max()
    }

    pub fn add(&self, other: &FPoly) -> FPoly {
        let mut out = self.clone();
        for (&(i, j), a) in &other.terms {
            out.add_term(i, j, a.clone());
        }
        out
    }

    pub fn scale(&self, s: &BigRational) -> FPoly {
        let mut out = FPoly::zero();
        for (&(i, j), a) in &self.terms {
            out.add_term(i, j, a * s);
        }
        out
    }

    pub fn sub(&self, other: &FPoly) -> FPoly {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn mul(&self, other: &FPoly) -> FPoly {
        let mut out = FPoly::zero();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &other.terms {
                out.add_term(i + k, j + l, a * b);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> FPoly {
        (0..e).fold(FPoly::monomial(BigRational::one(), 0, 0), |acc, _| acc.mul(self))
    }

    /// `∂/∂f`.
    pub fn deriv_f(&self) -> FPoly {
        let mut out = FPoly::zero();
        for (&(i, j), a) in &self.terms {
            if i > 0 {
                out.add_term(i - 1, j, a * BigRational::from_integer(BigInt::from(i)));
            }
        }
        out
    }

    /// `∫₀^f · ds`.
    pub fn integrate_f(&self) -> FPoly {
        let mut out = FPoly::zero();
        for (&(i, j), a) in &self.terms {
            out.add_term(i + 1, j, a / BigRational::from_integer(BigInt::from(i + 1)));
        }
        out
    }

    pub fn eval(&self, f: &BigRational, c: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (&(i, j), a) in &self.terms {
            acc += a * num_traits::pow(f.clone(), i as usize) * num_traits::pow(c.clone(), j as usize);
        }
        acc
    }

    pub fn eval_f64(&self, f: f64, c: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(i, j), a)| a.to_f64().unwrap_or(f64::NAN) * f.powi(i as i32) * c.powi(j as i32))
            .sum()
    }
}

impl fmt::Display for FPoly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(out, "0");
        }
        let mut first = true;
        for (&(i, j), a) in self.terms.iter().rev() {
            let neg = a.is_negative();
            let mag = a.abs();
            if first {
                if neg {
                    write!(out, "-")?;
                }
            } else {
                write!(out, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let mut parts = Vec::new();
            if !mag.is_one() || (i == 0 && j == 0) {
                parts.push(mag.to_string());
            }
            match j {
                0 => {}
                1 => parts.push("c".into()),
                _ => parts.push(format!("c^{j}")),
            }
            match i {
                0 => {}
                1 => parts.push("f".into()),
                _ => parts.push(format!("f^{i}")),
            }
            write!(out, "{}", parts.join(" "))?;
        }
        Ok(())
    }
}

/// Fields of the reduction for one `ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStack {
    pub ell: u32,
    /// `p₁ = f`, `p₂`, …, `p_ℓ`.
    pub fields: Vec<FPoly>,
    /// `p_{ℓ+1}`, integrated once more to close the system.
    pub closing: FPoly,
    /// `P_ℓ` with `(f′)² = P_ℓ(f)`.
    pub p_final: FPoly,
}

fn step(p: &FPoly) -> FPoly {
    // −∫₀^f ((c + s/2) p′ + p) ds
    let c_plus_half_f = FPoly::monomial(BigRational::one(), 0, 1).add(&FPoly::monomial(rat(1, 2), 1, 0));
    c_plus_half_f
        .mul(&p.deriv_f())
        .add(p)
        .integrate_f()
        .scale(&-BigRational::one())
}

pub fn reduce_vanishing(ell: u32) -> Result<FieldStack, HigherEllError> {
    if ell < 2 {
        return Err(HigherEllError::EllTooSmall(ell));
    }
    let mut fields = vec![FPoly::f()];
    for _ in 1..ell {
        let next = step(fields.last().expect("non-empty"));
        fields.push(next);
    }
    let closing = step(fields.last().expect("non-empty"));
    let p_final = closing.integrate_f().scale(&rat(-8, 1));
    Ok(FieldStack { ell, fields, closing, p_final })
}

/// `κ·f²(f + 2c)^ℓ`.
pub fn power_form(kappa: &BigRational, ell: u32) -> FPoly {
    let f = FPoly::f();
    let shifted = f.add(&FPoly::monomial(rat(2, 1), 0, 1));
    f.pow(2).mul(&shifted.pow(ell)).scale(kappa)
}

/// `−1/2^{2ℓ−4}`, the even-ℓ closed form as printed.
pub fn printed_kappa(ell: u32) -> BigRational {
    let den = BigRational::from_integer(num_traits::pow(BigInt::from(2), (2 * ell - 4) as usize));
    -BigRational::one() / den
}

/// `(−1)^{ℓ−1}/2^{ℓ−2}`, the pattern of the ℓ = 2, 3, 4 results.
pub fn pattern_kappa(ell: u32) -> BigRational {
    let den = BigRational::from_integer(num_traits::pow(BigInt::from(2), (ell - 2) as usize));
    let sign = if ell % 2 == 1 { BigRational::one() } else { -BigRational::one() };
    sign / den
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureRow {
    pub ell: u32,
    pub p_ell: String,
    /// Leading coefficient, i.e. the `κ` of `κ·f²(f+2c)^ℓ` when that factorization holds.
    pub leading: String,
    pub factors_as_power: bool,
    pub printed_candidate: String,
    pub printed_match: bool,
    pub pattern_candidate: String,
    pub pattern_match: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub rows: Vec<ConjectureRow>,
}

impl ConjectureReport {
    pub fn to_text(&self) -> String {
        let mut s = String::from("ell  factored  kappa      printed(-1/2^(2l-4))  pattern((-1)^(l-1)/2^(l-2))\n");
        for r in &self.rows {
            let verdict = |m: bool| if m { "match" } else { "mismatch" };
            s.push_str(&format!(
                "{:<4} {:<9} {:<10} {:<21} {}\n",
                r.ell,
                if r.factors_as_power { "yes" } else { "no" },
                r.leading,
                format!("{} ({})", verdict(r.printed_match), r.printed_candidate),
                format!("{} ({})", verdict(r.pattern_match), r.pattern_candidate),
            ));
        }
        s
    }
}

/// Compares the exact `P_ℓ` against both closed-form candidates for `ℓ = 2..=ell_max`.
/// The printed candidate is stated for even `ℓ`; its verdict is reported for every `ℓ`.
pub fn conjecture_report(ell_max: u32) -> Result<ConjectureReport, HigherEllError> {
    if ell_max < 2 {
        return Err(HigherEllError::EllTooSmall(ell_max));
    }
    let mut rows = Vec::new();
    for ell in 2..=ell_max {
        let stack = reduce_vanishing(ell)?;
        let p = &stack.p_final;
        let lead = p.coeff(ell + 2, 0);
        let printed = printed_kappa(ell);
        let pattern = pattern_kappa(ell);
        rows.push(ConjectureRow {
            ell,
            p_ell: p.to_string(),
            leading: lead.to_string(),
            factors_as_power: *p == power_form(&lead, ell),
            printed_candidate: printed.to_string(),
            printed_match: *p == power_form(&printed, ell),
            pattern_candidate: pattern.to_string(),
            pattern_match: *p == power_form(&pattern, ell),
        });
    }
    Ok(ConjectureReport { rows })
}

/// True when `P_ℓ(·, c)` is positive somewhere, i.e. a non-constant real orbit can exist.
pub fn admits_nonconstant(stack: &FieldStack, c: f64) -> bool {
    let a = 0.0f64.min(-2.0 * c);
    let b = 0.0f64.max(-2.0 * c);
    let probes = [a - 1.0, 0.5 * (a + b), b + 1.0];
    probes.iter().any(|&f| stack.p_final.eval_f64(f, c) > 0.0)
}

/// Descending coefficients of the ℓ=3 quintic with integration constants:
/// `f⁵/2 + 3c f⁴ + (6c² − 2d₁) f³ + 4(c³ − c d₁ + d₂) f² + 8d₃ f + 8d₄`.
pub fn reduce_l3_full(c: f64, d1: f64, d2: f64, d3: f64, d4: f64) -> [f64; 6] {
    [
        0.5,
        3.0 * c,
        6.0 * c * c - 2.0 * d1,
        4.0 * (c * c * c - c * d1 + d2),
        8.0 * d3,
        8.0 * d4,
    ]
}

/// `(g, h)` at `f` for ℓ=3.
pub fn l3_fields(f: f64, c: f64, d1: f64, d2: f64) -> (f64, f64) {
    let h = 1.5 * c * f * f + 0.5 * f * f * f + (c * c - d1) * f + d2;
    (g_from_f(f, c, d1), h)
}

/// Sign branch of the ℓ=3 implicit relation. With `w = √(1 + f/(2c))` and
/// `G(w) = 1/w − artanh w`, `Rising` is `G = −c^{3/2}(ξ−ξ₀)` and `Falling` is
/// `G = +c^{3/2}(ξ−ξ₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum L3Branch {
    Rising,
    Falling,
}

/// Limits `(f(−∞), f(+∞))` on a branch: the profile is a monotone front between `−2c`
/// and `0`.
pub fn l3_asymptotes(c: f64, branch: L3Branch) -> (f64, f64) {
    match branch {
        L3Branch::Rising => (-2.0 * c, 0.0),
        L3Branch::Falling => (0.0, -2.0 * c),
    }
}

/// `(f, f′)` at `ξ`. Solves `G(w) = target` for `s = ln(1 − w)`, where `∂G/∂s = 1/(w²(1+w))`
/// is bounded below, by Newton steps kept inside a bisection bracket.
pub fn l3_point(c: f64, xi: f64, xi0: f64, branch: L3Branch) -> Result<(f64, f64), HigherEllError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(HigherEllError::NonPositiveSpeed(c));
    }
    let rate = c.powf(1.5);
    let dir = match branch {
        L3Branch::Rising => 1.0,
        L3Branch::Falling => -1.0,
    };
    let target = -dir * rate * (xi - xi0);
    // w = 1 − e^s, artanh w = (ln(1+w) − s)/2
    let h = |s: f64| {
        let w = -s.exp_m1();
        1.0 / w - 0.5 * (w.ln_1p() - s) - target
    };
    let (mut lo, mut hi) = (-700.0f64, -1e-300f64);
    if !(h(lo) <= 0.0 && h(hi) >= 0.0) {
        return Err(HigherEllError::OutOfBranchRange(xi));
    }
    let tol = SOLVER_TOL * target.abs().max(1.0);
    let mut s = 0.5 * (lo + hi).max(-40.0);
    for _ in 0..SOLVER_MAX_ITER {
        let val = h(s);
        if val.abs() <= tol {
            break;
        }
        if val > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let w = -s.exp_m1();
        let slope = 1.0 / (w * w * (1.0 + w));
        let next = s - val / slope;
        s = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    let q = s.exp();
    let w = -s.exp_m1();
    let f = -2.0 * c * q * (1.0 + w);
    if f == 0.0 || w <= 0.0 {
        return Err(HigherEllError::OutOfBranchRange(xi));
    }
    // f = 2c(w² − 1), w′ = ±c^{3/2}(1 − w²)w²
    let wp = dir * rate * q * (1.0 + w) * w * w;
    Ok((f, 4.0 * c * w * wp))
}

/// Samples of the ℓ=3 vanishing-boundary front on a uniform grid, with `ξ₀ = 0`.
pub fn l3_implicit_profile(c: f64, xi_grid: &[f64], branch: L3Branch) -> Result<Profile, HigherEllError> {
    let mut f = Vec::with_capacity(xi_grid.len());
    let mut fp = Vec::with_capacity(xi_grid.len());
    for &xi in xi_grid {
        let (a, b) = l3_point(c, xi, 0.0, branch)?;
        f.push(a);
        fp.push(b);
    }
    let g = f.iter().map(|&x| g_from_f(x, c, 0.0)).collect();
    Profile::new(xi_grid.to_vec(), f, Some(fp), Some(g)).map_err(|e| HigherEllError::InvalidGrid(e.to_string()))
}
