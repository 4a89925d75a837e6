//! The quartic first integral `F(f)`: evaluation, real roots with multiplicities,
//! the inverse map from roots to parameters, and the case taxonomy.

use num_complex::Complex64;
use num_traits::{FromPrimitive, Num};
use serde::Serialize;
use std::fmt;
use thiserror::Error;

/// Relative clustering tolerance for a double root.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuarticError {
    #[error("underdetermined: total multiplicity {0}, expected 4")]
    Underdetermined(usize),
    #[error("invalid root multiset: {0}")]
    InvalidMultiset(String),
}

/// Reduction constants of the first integral. Wave speed `c` follows `ξ = x − ct`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Params {
    pub c: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl Params {
    pub fn new(c: f64, d1: f64, d2: f64, d3: f64) -> Self {
        Params { c, d1, d2, d3 }
    }

    pub fn is_finite(&self) -> bool {
        self.c.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d3.is_finite()
    }

    /// Coefficients of `F`, constant term first.
    pub fn coeffs(&self) -> [f64; 5] {
        let c = self.c;
        [
            8.0 * self.d3,
            8.0 * self.d2,
            4.0 * (self.d1 - c * c),
            -4.0 * c,
            -1.0,
        ]
    }

    /// Largest absolute difference between parameter sets.
    pub fn max_abs_diff(&self, other: &Params) -> f64 {
        (self.c - other.c)
            .abs()
            .max((self.d1 - other.d1).abs())
            .max((self.d2 - other.d2).abs())
            .max((self.d3 - other.d3).abs())
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(c={}, d1={}, d2={}, d3={})", self.c, self.d1, self.d2, self.d3)
    }
}

/// `F(f) = −f⁴ − 4c f³ + 4(d₁ − c²) f² + 8 d₂ f + 8 d₃`.
pub fn eval_f(p: &Params, f: f64) -> f64 {
    let a = p.coeffs();
    (((a[4] * f + a[3]) * f + a[2]) * f + a[1]) * f + a[0]
}

/// `order`-th derivative of `F` at `f`.
pub fn eval_f_derivative(p: &Params, f: f64, order: usize) -> f64 {
    let mut a = p.coeffs().to_vec();
    for _ in 0..order {
        if a.len() <= 1 {
            return 0.0;
        }
        a = a.iter().enumerate().skip(1).map(|(i, x)| i as f64 * x).collect();
    }
    a.iter().rev().fold(0.0, |acc, x| acc * f + x)
}

/// Sorted distinct real zeros with multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootMultiset {
    entries: Vec<(f64, usize)>,
}

impl RootMultiset {
    pub fn new(entries: Vec<(f64, usize)>) -> Result<Self, QuarticError> {
        if entries.iter().any(|(v, m)| !v.is_finite() || *m == 0) {
            return Err(QuarticError::InvalidMultiset("non-finite value or zero multiplicity".into()));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(QuarticError::InvalidMultiset("values not strictly increasing".into()));
        }
        let total: usize = entries.iter().map(|e| e.1).sum();
        if !matches!(total, 0 | 2 | 4) {
            return Err(QuarticError::InvalidMultiset(format!("total multiplicity {total}")));
        }
        Ok(RootMultiset { entries })
    }

    /// Groups values closer than `tol·max(1, |v|)` into one entry.
    pub fn from_values(values: &[f64], tol: f64) -> Result<Self, QuarticError> {
        let mut v: Vec<f64> = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).expect("finite roots"));
        let mut groups: Vec<Vec<f64>> = Vec::new();
        for x in v {
            match groups.last_mut() {
                Some(g) if (x - g[0]).abs() <= tol * g[0].abs().max(1.0) => g.push(x),
                _ => groups.push(vec![x]),
            }
        }
        let entries = groups
            .into_iter()
            .map(|g| (g.iter().sum::<f64>() / g.len() as f64, g.len()))
            .collect();
        RootMultiset::new(entries)
    }

    pub fn empty() -> Self {
        RootMultiset { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[(f64, usize)] {
        &self.entries
    }

    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Values repeated by multiplicity, ascending.
    pub fn values(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|&(v, m)| std::iter::repeat(v).take(m))
            .collect()
    }

    pub fn signature(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.1).collect()
    }

    /// `max(1, max |root|)`.
    pub fn scale(&self) -> f64 {
        self.entries.iter().fold(1.0f64, |s, e| s.max(e.0.abs()))
    }
}

impl fmt::Display for RootMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|(v, m)| format!("({v}, {m})")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CaseTag {
    NoRealZeros,
    TwoSimpleOnly,
    OneDoubleOnly,
    TwoDoublesOnly,
    Quadruple,
    DoubleBelowSimples,
    DoubleAboveSimples,
    DoubleBetweenSimples,
    TripleWithSimpleAbove,
    TripleWithSimpleBelow,
    FourSimple,
}

/// What kind of bounded non-constant orbit a case admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Existence {
    NoNonConstant,
    Solitary,
    Periodic,
}

impl CaseTag {
    pub const ALL: [CaseTag; 11] = [
        CaseTag::NoRealZeros,
        CaseTag::TwoSimpleOnly,
        CaseTag::OneDoubleOnly,
        CaseTag::TwoDoublesOnly,
        CaseTag::Quadruple,
        CaseTag::DoubleBelowSimples,
        CaseTag::DoubleAboveSimples,
        CaseTag::DoubleBetweenSimples,
        CaseTag::TripleWithSimpleAbove,
        CaseTag::TripleWithSimpleBelow,
        CaseTag::FourSimple,
    ];

    pub fn existence(self) -> Existence {
        use CaseTag::*;
        match self {
            NoRealZeros | OneDoubleOnly | TwoDoublesOnly | Quadruple => Existence::NoNonConstant,
            DoubleBetweenSimples | TripleWithSimpleAbove | TripleWithSimpleBelow => Existence::Solitary,
            TwoSimpleOnly | DoubleBelowSimples | DoubleAboveSimples | FourSimple => Existence::Periodic,
        }
    }

    pub fn verdict(self) -> &'static str {
        use CaseTag::*;
        match self {
            NoRealZeros => "no real solution",
            // constants at the multiple zeros remain
            OneDoubleOnly | TwoDoublesOnly | Quadruple => "no non-constant real solution",
            DoubleBetweenSimples => "two solitary branches",
            TripleWithSimpleAbove | TripleWithSimpleBelow => "solitary (algebraic tail)",
            TwoSimpleOnly | DoubleBelowSimples | DoubleAboveSimples | FourSimple => "periodic",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub fn classify(r: &RootMultiset) -> CaseTag {
    let sig = r.signature();
    match sig.as_slice() {
        [] => CaseTag::NoRealZeros,
        [1, 1] => CaseTag::TwoSimpleOnly,
        [2] => CaseTag::OneDoubleOnly,
        [2, 2] => CaseTag::TwoDoublesOnly,
        [4] => CaseTag::Quadruple,
        [2, 1, 1] => CaseTag::DoubleBelowSimples,
        [1, 1, 2] => CaseTag::DoubleAboveSimples,
        [1, 2, 1] => CaseTag::DoubleBetweenSimples,
        [3, 1] => CaseTag::TripleWithSimpleAbove,
        [1, 3] => CaseTag::TripleWithSimpleBelow,
        [1, 1, 1, 1] => CaseTag::FourSimple,
        // RootMultiset::new admits only even totals, so every signature is listed above.
        other => unreachable!("multiplicity signature {other:?}"),
    }
}

/// `(c, d₁, d₂, d₃)` from the four zeros, in any field.
pub fn param_map<T>(roots: &[T; 4]) -> [T; 4]
where
    T: Clone + Num + FromPrimitive,
{
    // e[j] = j-th elementary symmetric polynomial
    let mut e: Vec<T> = vec![T::one(), T::zero(), T::zero(), T::zero(), T::zero()];
    for r in roots {
        for j in (1..=4).rev() {
            e[j] = e[j].clone() + e[j - 1].clone() * r.clone();
        }
    }
    let n = |x: i64| T::from_i64(x).expect("small integer");
    let c = T::zero() - e[1].clone() / n(4);
    let d1 = e[1].clone() * e[1].clone() / n(16) - e[2].clone() / n(4);
    let d2 = e[3].clone() / n(8);
    let d3 = T::zero() - e[4].clone() / n(8);
    [c, d1, d2, d3]
}

pub fn params_from_roots(r: &RootMultiset) -> Result<Params, QuarticError> {
    let v = r.values();
    if v.len() != 4 {
        return Err(QuarticError::Underdetermined(v.len()));
    }
    let [c, d1, d2, d3] = param_map(&[v[0], v[1], v[2], v[3]]);
    Ok(Params { c, d1, d2, d3 })
}

/// Same map on an unsorted list of four values.
pub fn params_from_values(v: &[f64; 4]) -> Params {
    let [c, d1, d2, d3] = param_map(v);
    Params { c, d1, d2, d3 }
}

fn horner_c(a: &[f64; 5], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(a[4], 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for i in (0..4).rev() {
        dp = dp * z + p;
        p = p * z + a[i];
    }
    (p, dp)
}

/// All four complex roots of `F` by Aberth–Ehrlich iteration.
pub fn complex_roots(p: &Params) -> [Complex64; 4] {
    let a = p.coeffs();
    // Fujiwara bound on the monic polynomial
    let monic: Vec<f64> = a.iter().map(|x| x / a[4]).collect();
    let mut radius = 0.0f64;
    for (i, m) in monic.iter().enumerate().take(4) {
        let deg = (4 - i) as f64;
        let term = if i == 0 { (m.abs() / 2.0).powf(1.0 / deg) } else { m.abs().powf(1.0 / deg) };
        radius = radius.max(2.0 * term);
    }
    let radius = radius.max(1.0);
    let mut z: [Complex64; 4] =
        std::array::from_fn(|i| Complex64::from_polar(radius, 0.4 + i as f64 * std::f64::consts::FRAC_PI_2));
    for _ in 0..500 {
        let mut max_step = 0.0f64;
        for i in 0..4 {
            let (pv, dpv) = horner_c(&a, z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dpv;
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                if j != i {
                    let d = z[i] - z[j];
                    if d.norm() > 0.0 {
                        sum += 1.0 / d;
                    }
                }
            }
            let step = ratio / (1.0 - ratio * sum);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
            }
        }
        if max_step < 1e-17 {
            break;
        }
    }
    z
}

fn polish(p: &Params, x: f64, order: usize) -> f64 {
    let mut x = x;
    for _ in 0..4 {
        let d = eval_f_derivative(p, x, order + 1);
        if d == 0.0 {
            break;
        }
        let step = eval_f_derivative(p, x, order) / d;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    x
}

/// True when `F` vanishes to rounding at the critical point of `F` nearest `x`. A double
/// zero next to another zero can split by more than the clustering radius.
fn double_at_rounding_level(p: &Params, x: f64) -> bool {
    let xc = polish(p, x, 1);
    let a = p.coeffs();
    let size: f64 = a.iter().enumerate().map(|(i, c)| c.abs() * xc.abs().powi(i as i32)).sum();
    (xc - x).abs() <= 1e-4 * x.abs().max(1.0) && eval_f(p, xc).abs() <= 64.0 * f64::EPSILON * size
}

/// Real zeros of `F` with multiplicities.
///
/// An `m`-fold root spreads over roughly `ε^{1/m}` in double precision, so a group of
/// `m` approximations is merged when its spread is below `tol^{2/m}·max(1, |center|)`
/// and the derivatives `F, …, F^{(m−1)}` are small at the center. A wider pair is still
/// merged when `F` is zero to rounding at its critical point.
pub fn roots_of_f(p: &Params, tol: f64) -> RootMultiset {
    let z = complex_roots(p);
    let scale = z.iter().fold(1.0f64, |s, r| s.max(r.norm()));
    let mut used = [false; 4];
    let mut out: Vec<(f64, usize)> = Vec::new();

    let subsets_of = |m: usize| -> Vec<Vec<usize>> {
        let mut res = Vec::new();
        for mask in 0u32..16 {
            if mask.count_ones() as usize == m {
                res.push((0..4).filter(|i| mask & (1 << i) != 0).collect());
            }
        }
        res
    };

    for m in [4usize, 3, 2] {
        let rho = tol.powf(2.0 / m as f64);
        for set in subsets_of(m) {
            if set.iter().any(|&i| used[i]) {
                continue;
            }
            let center: Complex64 = set.iter().map(|&i| z[i]).sum::<Complex64>() / m as f64;
            let bound = rho * center.norm().max(1.0);
            let spread = set
                .iter()
                .flat_map(|&i| set.iter().map(move |&j| (i, j)))
                .map(|(i, j)| (z[i] - z[j]).norm())
                .fold(0.0, f64::max);
            let x = center.re;
            let tight = spread <= bound && center.im.abs() <= bound;
            let small = tight
                && (0..m).all(|j| {
                    let allowed = 1e3 * (rho * scale).powi((m - j) as i32) * scale.powi(4 - m as i32);
                    eval_f_derivative(p, x, j).abs() <= allowed
                });
            if !small && !(m == 2 && spread <= 1e-4 * scale && double_at_rounding_level(p, x)) {
                continue;
            }
            let refined = polish(p, x, m - 1);
            // the cluster center can sit several spreads off; the critical point of the right order cannot
            let near = (refined - x).abs() <= 1e-4 * x.abs().max(1.0);
            let x = if near { refined } else { x };
            for &i in &set {
                used[i] = true;
            }
            out.push((x, m));
        }
    }
    for i in 0..4 {
        if used[i] {
            continue;
        }
        if z[i].im.abs() <= 1e-10 * z[i].norm().max(1.0) {
            out.push((polish(p, z[i].re, 0), 1));
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite roots"));
    // merge exact coincidences left by polishing
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for (v, m) in out {
        match merged.last_mut() {
            Some(last) if (v - last.0).abs() <= tol * v.abs().max(1.0) => last.1 += m,
            _ => merged.push((v, m)),
        }
    }
    RootMultiset::new(merged).unwrap_or_else(|_| RootMultiset::empty())
}

/// Monic quadratic `f² + p f + q` left after dividing `−F` by the real zeros, when
/// exactly two real zeros (counted with multiplicity) are present.
pub fn quadratic_cofactor(params: &Params, r: &RootMultiset) -> Option<(f64, f64)> {
    let v = r.values();
    if v.len() != 2 {
        return None;
    }
    // −F = f⁴ + 4c f³ − 4(d₁ − c²) f² − 8d₂ f − 8d₃
    let a3 = 4.0 * params.c;
    let s = v[0] + v[1];
    let pr = v[0] * v[1];
    // (f² − s f + pr)(f² + p f + q): f³ coefficient p − s, f⁰ coefficient pr·q
    let p = a3 + s;
    let a2 = -4.0 * (params.d1 - params.c * params.c);
    let q = a2 - pr + s * p;
    Some((p, q))
}
