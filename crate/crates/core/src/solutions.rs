//! Closed-form traveling waves of the ℓ=2 system.
//!
//! Every solution is stored as a fractional-linear map of a kernel,
//! `f(ξ) = (A + B·y)/(C + D·y)` with `y = kernel(β(ξ − ξ₀))`, which gives the value and
//! the analytic derivative through one code path.
//!
//! Elliptic constructors (`case1`, `case2`, `general_sn2`) are gated: a candidate is
//! returned only after its defining residual and, for bounded orbits, an RK4 oracle
//! run agree with it.

use crate::elliptic::{complete_k, jacobi, jacobi_derivatives, EllipticError, Modulus};
use crate::quartic::{classify, eval_f, params_from_values, CaseTag, Params, RootMultiset, DEFAULT_CLUSTER_TOL};
use crate::reduction::g_from_f;
use crate::verify;
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

/// Samples whose denominator is this close to zero (relative) are refused.
pub const POLE_REL_TOL: f64 = 1e-9;
/// `k²` values up to `1 + K2_CLAMP` are clamped to 1.
pub const K2_CLAMP: f64 = 1e-9;
const CONSTRAINT_TOL: f64 = 1e-10;
const GATE_RESIDUAL: f64 = 1e-8;
const GATE_ORACLE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolutionError {
    #[error("not the solitary configuration: need f_lo < f_dbl < f_hi")]
    NotSolitaryConfiguration,
    #[error("not the periodic configuration: the double zero must lie outside the simple-zero band")]
    NotPeriodicConfiguration,
    #[error("singular periodic branch: denominator vanishes on the orbit")]
    SingularPeriodicBranch,
    #[error("limiting constraint unmet: {0}")]
    LimitingConstraintUnmet(String),
    #[error("branch infeasible for these roots: {0}")]
    BranchInfeasible(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("unresolved branch; raw candidate: {0}")]
    UnresolvedBranch(String),
    #[error("singular sample at xi = {0}")]
    SingularSample(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("solution inconsistent with parameters: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Elliptic(#[from] EllipticError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SolutionKind {
    SolitaryDouble,
    PeriodicTrig,
    SolitaryTriple,
    Case1Cn,
    Case1Dn,
    Case2Sn,
    Case2Cn,
    Case2Dn,
    Case2InvSn,
    Case2InvCn,
    GeneralSn2,
    Constant,
}

/// Sign choice. For pulses `Upper` touches the larger simple zero at `ξ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Branch {
    #[default]
    Upper,
    Lower,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case1Kind {
    Cn,
    Dn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case2Kind {
    Sn,
    Cn,
    Dn,
    InvSn,
    InvCn,
    Tn,
    DnTn,
}

impl Case2Kind {
    pub const ALL: [Case2Kind; 7] = [
        Case2Kind::Sn,
        Case2Kind::Cn,
        Case2Kind::Dn,
        Case2Kind::InvSn,
        Case2Kind::InvCn,
        Case2Kind::Tn,
        Case2Kind::DnTn,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LimitCase {
    /// `f₁ + f₃ = 2f₂`
    A,
    /// `2f₁f₃ = f₂(f₁ + f₃)`
    B,
    /// `f₂ = 0`
    C,
    /// `f₂ → f₁` or `f₂ → f₃`
    D,
}

/// Coefficients attached to a solution; only those relevant to its kind are set.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DerivedCoefficients {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub a1: Option<f64>,
    pub a2: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub mu0: Option<f64>,
    pub mu2: Option<f64>,
    pub nu0: Option<f64>,
    pub nu2: Option<f64>,
    pub nu4: Option<f64>,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub omega3: Option<f64>,
    pub big_omega0: Option<f64>,
    pub big_omega1: Option<f64>,
    pub big_omega2: Option<f64>,
    pub big_omega3: Option<f64>,
    pub big_omega4: Option<f64>,
}

/// Function `y` composed with the fractional-linear map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Kernel {
    Const,
    /// `cosh z − 1`, kept in the form `2 sinh²(z/2)` to avoid cancellation.
    CoshM1,
    Sech,
    Sin,
    Cos,
    Sn(Modulus),
    Cn(Modulus),
    Dn(Modulus),
    Sn2(Modulus),
    Square,
}

impl Kernel {
    /// `(y(z), y′(z))`.
    pub fn eval(self, z: f64) -> (f64, f64) {
        match self {
            Kernel::Const => (0.0, 0.0),
            Kernel::CoshM1 => {
                let s = (0.5 * z).sinh();
                (2.0 * s * s, z.sinh())
            }
            Kernel::Sech => {
                let s = 1.0 / z.cosh();
                (s, -s * z.tanh())
            }
            Kernel::Sin => (z.sin(), z.cos()),
            Kernel::Cos => (z.cos(), -z.sin()),
            Kernel::Sn(k) => {
                let t = jacobi(z, k);
                (t.sn, jacobi_derivatives(t, k).sn)
            }
            Kernel::Cn(k) => {
                let t = jacobi(z, k);
                (t.cn, jacobi_derivatives(t, k).cn)
            }
            Kernel::Dn(k) => {
                let t = jacobi(z, k);
                (t.dn, jacobi_derivatives(t, k).dn)
            }
            Kernel::Sn2(k) => {
                let t = jacobi(z, k);
                (t.sn * t.sn, 2.0 * t.sn * t.cn * t.dn)
            }
            Kernel::Square => (z * z, 2.0 * z),
        }
    }

    /// Closed range of `y` over real `z`.
    fn range(self) -> (f64, f64) {
        match self {
            Kernel::Const => (0.0, 0.0),
            Kernel::CoshM1 | Kernel::Square => (0.0, f64::INFINITY),
            Kernel::Sech => (0.0, 1.0),
            Kernel::Sin | Kernel::Cos | Kernel::Sn(_) => (-1.0, 1.0),
            Kernel::Cn(k) => (if k.value() == 1.0 { 0.0 } else { -1.0 }, 1.0),
            Kernel::Dn(k) => (k.complementary(), 1.0),
            Kernel::Sn2(_) => (0.0, 1.0),
        }
    }

    /// Period in `z`, if periodic.
    fn period(self) -> Option<f64> {
        let quarter = |k: Modulus| complete_k(k).ok();
        match self {
            Kernel::Sin | Kernel::Cos => Some(2.0 * PI),
            Kernel::Sn(k) | Kernel::Cn(k) => quarter(k).map(|q| 4.0 * q),
            Kernel::Dn(k) | Kernel::Sn2(k) => quarter(k).map(|q| 2.0 * q),
            _ => None,
        }
    }
}

/// Evaluable descriptor of one closed-form traveling wave.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormSolution {
    pub kind: SolutionKind,
    pub roots: RootMultiset,
    pub params: Params,
    pub xi0: f64,
    pub branch: Branch,
    pub speed: f64,
    pub coeffs: DerivedCoefficients,
    pub modulus: Option<Modulus>,
    pub kernel: Kernel,
    /// `[A, B, C, D]` of `f = (A + B·y)/(C + D·y)`.
    pub form: [f64; 4],
    /// Multiplier of `ξ − ξ₀` inside the kernel.
    pub beta: f64,
    pub period: Option<f64>,
    pub decay_rate: Option<f64>,
    /// False when the denominator vanishes somewhere on the real line.
    pub global: bool,
    /// Corrections and normalizations applied during construction.
    pub notes: Vec<String>,
}

impl ClosedFormSolution {
    fn build(
        kind: SolutionKind,
        values: [f64; 4],
        kernel: Kernel,
        form: [f64; 4],
        beta: f64,
        branch: Branch,
        xi0: f64,
    ) -> Result<Self, SolutionError> {
        let params = params_from_values(&values);
        let roots = RootMultiset::from_values(&values, DEFAULT_CLUSTER_TOL)
            .map_err(|e| SolutionError::InvalidInput(e.to_string()))?;
        let period = kernel.period().map(|p| p / beta.abs()).filter(|p| p.is_finite());
        let modulus = match kernel {
            Kernel::Sn(k) | Kernel::Cn(k) | Kernel::Dn(k) | Kernel::Sn2(k) => Some(k),
            _ => None,
        };
        let mut s = ClosedFormSolution {
            kind,
            roots,
            params,
            xi0,
            branch,
            speed: params.c,
            coeffs: DerivedCoefficients::default(),
            modulus,
            kernel,
            form,
            beta,
            period,
            decay_rate: None,
            global: true,
            notes: Vec::new(),
        };
        s.global = s.denominator_definite();
        Ok(s)
    }

    fn denominator_definite(&self) -> bool {
        let [_, _, c, d] = self.form;
        let (lo, hi) = self.kernel.range();
        let at_lo = c + d * lo;
        let at_hi = if hi.is_infinite() {
            if d == 0.0 {
                c
            } else {
                d * f64::INFINITY
            }
        } else {
            c + d * hi
        };
        at_lo != 0.0 && at_hi != 0.0 && at_lo.signum() == at_hi.signum()
    }

    /// Constant solution at a zero of `F`.
    fn constant(kind: SolutionKind, values: [f64; 4], level: f64, xi0: f64) -> Result<Self, SolutionError> {
        let mut s = Self::build(kind, values, Kernel::Const, [level, 0.0, 1.0, 0.0], 0.0, Branch::Upper, xi0)?;
        s.notes.push(format!("degenerate: constant solution f = {level}"));
        Ok(s)
    }

    pub fn scale(&self) -> f64 {
        self.roots.scale()
    }
}

/// Constant orbit `f ≡ level` for the quartic with zeros `values`; `level` must be one of them.
pub fn constant_solution(values: [f64; 4], level: f64, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
    if !values.contains(&level) {
        return Err(SolutionError::InvalidInput(format!("{level} is not among the zeros")));
    }
    ClosedFormSolution::constant(SolutionKind::Constant, values, level, xi0)
}

/// `(f(ξ), f′(ξ))`.
pub fn evaluate(s: &ClosedFormSolution, xi: f64) -> Result<(f64, f64), SolutionError> {
    let [a, b, c, d] = s.form;
    let z = s.beta * (xi - s.xi0);
    let (y, yp) = s.kernel.eval(z);
    if !y.is_finite() {
        return Ok((b / d, 0.0));
    }
    let den = c + d * y;
    if den.abs() <= POLE_REL_TOL * c.abs().max((d * y).abs()) {
        return Err(SolutionError::SingularSample(xi));
    }
    let det = a * d - b * c;
    let f = if d != 0.0 { b / d + det / (d * den) } else { (a + b * y) / c };
    let fp = -det / (den * den) * s.beta * yp;
    Ok((f, if fp.is_finite() { fp } else { 0.0 }))
}

fn check_finite(vals: &[f64]) -> Result<(), SolutionError> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SolutionError::InvalidInput("non-finite root".into()))
    }
}

fn pulse_coefficients(f_lo: f64, f_dbl: f64, f_hi: f64) -> (f64, f64) {
    let p = 1.0 / (f_lo - f_dbl);
    let q = 1.0 / (f_hi - f_dbl);
    (p + q, p - q)
}

/// Pulse on a double zero between two simple zeros:
/// `f = f_dbl + 2/(c₁ ∓ c₂ cosh(λ(ξ−ξ₀)))`, `λ = √((f_dbl−f_lo)(f_hi−f_dbl))`.
pub fn solitary_double(f_lo: f64, f_dbl: f64, f_hi: f64, branch: Branch, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
    check_finite(&[f_lo, f_dbl, f_hi, xi0])?;
    if !(f_lo < f_dbl && f_dbl < f_hi) {
        return Err(SolutionError::NotSolitaryConfiguration);
    }
    let (c1, c2) = pulse_coefficients(f_lo, f_dbl, f_hi);
    let lambda = ((f_dbl - f_lo) * (f_hi - f_dbl)).sqrt();
    // c₁ ∓ c₂ cosh = (c₁ ∓ c₂) ∓ c₂ (cosh − 1); c₁ ∓ c₂ is formed directly since the
    // sum cancels badly when f_dbl nears a simple zero
    let sd = -branch.sign() * c2;
    let cc = match branch {
        Branch::Upper => 2.0 / (f_hi - f_dbl),
        Branch::Lower => 2.0 / (f_lo - f_dbl),
    };
    let form = [f_dbl * cc + 2.0, f_dbl * sd, cc, sd];
    let mut s = ClosedFormSolution::build(
        SolutionKind::SolitaryDouble,
        [f_lo, f_dbl, f_dbl, f_hi],
        Kernel::CoshM1,
        form,
        lambda,
        branch,
        xi0,
    )?;
    s.coeffs.c1 = Some(c1);
    s.coeffs.c2 = Some(c2);
    s.decay_rate = Some(lambda);
    Ok(s)
}

/// Periodic orbit between two simple zeros with the double zero outside the band:
/// `f = f_dbl + 2/(c₁ ± c₂ sin(ω(ξ−ξ₀)))`, `ω = √|(f_dbl−f_s1)(f_s2−f_dbl)|`.
pub fn periodic_trig(f_s1: f64, f_s2: f64, f_dbl: f64, branch: Branch, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
    check_finite(&[f_s1, f_s2, f_dbl, xi0])?;
    let (lo, hi) = (f_s1.min(f_s2), f_s1.max(f_s2));
    if lo == hi || (lo <= f_dbl && f_dbl <= hi) {
        return Err(SolutionError::NotPeriodicConfiguration);
    }
    let (c1, c2) = pulse_coefficients(f_s1, f_dbl, f_s2);
    if c2.abs() >= c1.abs() {
        return Err(SolutionError::SingularPeriodicBranch);
    }
    let product = (f_dbl - f_s1) * (f_s2 - f_dbl);
    let omega = product.abs().sqrt();
    let sd = branch.sign() * c2;
    let form = [f_dbl * c1 + 2.0, f_dbl * sd, c1, sd];
    let mut s = ClosedFormSolution::build(
        SolutionKind::PeriodicTrig,
        [f_s1, f_s2, f_dbl, f_dbl],
        Kernel::Sin,
        form,
        omega,
        branch,
        xi0,
    )?;
    s.coeffs.c1 = Some(c1);
    s.coeffs.c2 = Some(c2);
    if product < 0.0 {
        s.notes.push(format!(
            "frequency uses |(f_dbl-f_s1)(f_s2-f_dbl)|; the signed product {product} is negative"
        ));
    }
    Ok(s)
}

/// Pulse on a triple zero: `f = f_t + (f_s − f_t)/(1 + ¼(f_s − f_t)²(ξ−ξ₀)²)`.
pub fn solitary_triple(f_triple: f64, f_simple: f64, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
    check_finite(&[f_triple, f_simple, xi0])?;
    if f_triple == f_simple {
        return Err(SolutionError::InvalidInput("triple and simple zeros coincide".into()));
    }
    let a = 0.25 * (f_simple - f_triple).powi(2);
    let branch = if f_simple > f_triple { Branch::Upper } else { Branch::Lower };
    ClosedFormSolution::build(
        SolutionKind::SolitaryTriple,
        [f_triple, f_triple, f_triple, f_simple],
        Kernel::Square,
        [f_simple, f_triple * a, 1.0, a],
        1.0,
        branch,
        xi0,
    )
}

/// Simplified forms of the double-zero pulse under special root relations.
pub fn limiting_form(case: LimitCase, roots: [f64; 3], branch: Branch, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
    check_finite(&roots)?;
    let [f1, f2, f3] = roots;
    let scale = roots.iter().fold(1.0f64, |s, r| s.max(r.abs()));
    let unmet = |what: &str, residual: f64| {
        SolutionError::LimitingConstraintUnmet(format!("{what} violated by {residual:e}"))
    };
    let values = [f1, f2, f2, f3];
    let mut s = match case {
        LimitCase::A => {
            let r = f1 + f3 - 2.0 * f2;
            if r.abs() > CONSTRAINT_TOL * scale {
                return Err(unmet("f1 + f3 = 2 f2", r));
            }
            let amp = 2.0 * (f2 - f1) * (f3 - f2) / (f3 - f1);
            let lambda = ((f2 - f1) * (f3 - f2)).sqrt();
            ClosedFormSolution::build(
                SolutionKind::SolitaryDouble,
                values,
                Kernel::Sech,
                [f2, branch.sign() * amp, 1.0, 0.0],
                lambda,
                branch,
                xi0,
            )?
        }
        LimitCase::B => {
            let r = 2.0 * f1 * f3 - f2 * (f1 + f3);
            if r.abs() > CONSTRAINT_TOL * scale * scale {
                return Err(unmet("2 f1 f3 = f2 (f1 + f3)", r));
            }
            let (c1, c2) = pulse_coefficients(f1, f2, f3);
            let lambda = ((f2 - f1) * (f3 - f2)).sqrt();
            let mut s = ClosedFormSolution::build(
                SolutionKind::SolitaryDouble,
                values,
                Kernel::Sech,
                [f2 * c2, 0.0, c2, -branch.sign() * c1],
                lambda,
                branch,
                xi0,
            )?;
            s.coeffs.c1 = Some(c1);
            s.coeffs.c2 = Some(c2);
            s
        }
        LimitCase::C => {
            if f2.abs() > CONSTRAINT_TOL * scale {
                return Err(unmet("f2 = 0", f2));
            }
            if f1 * f3 >= 0.0 {
                return Err(unmet("f1 f3 < 0", f1 * f3));
            }
            let lambda = (-f1 * f3).sqrt();
            ClosedFormSolution::build(
                SolutionKind::SolitaryDouble,
                values,
                Kernel::Sech,
                [0.0, 2.0 * f1 * f3, -branch.sign() * (f3 - f1), f1 + f3],
                lambda,
                branch,
                xi0,
            )?
        }
        LimitCase::D => {
            if (f2 - f1).abs() <= CONSTRAINT_TOL * scale {
                ClosedFormSolution::constant(SolutionKind::Constant, [f1, f1, f1, f3], f1, xi0)?
            } else if (f3 - f2).abs() <= CONSTRAINT_TOL * scale {
                solitary_triple(f3, f1, xi0)?
            } else {
                return Err(unmet("f2 -> f1 or f2 -> f3", (f2 - f1).abs().min((f3 - f2).abs())));
            }
        }
    };
    if case != LimitCase::D {
        s.decay_rate = Some(s.beta);
    }
    s.notes.push(format!("limiting form {case:?}"));
    Ok(s)
}

fn sym(values: &[f64; 4]) -> [f64; 5] {
    let mut e = [1.0, 0.0, 0.0, 0.0, 0.0];
    for r in values {
        for j in (1..=4).rev() {
            e[j] += e[j - 1] * r;
        }
    }
    e
}

/// `u = γ + α·y(βξ)` with `y ∈ {cn, dn}` and implied fourth zero `f₄ = f₁ + f₃ − f₂`.
pub fn case1(kind: Case1Kind, f1: f64, f2: f64, f3: f64, branch: Branch, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
    check_finite(&[f1, f2, f3, xi0])?;
    if !(f1 <= f2 && f2 <= f3) {
        return Err(SolutionError::BranchInfeasible("requires f1 <= f2 <= f3".into()));
    }
    let f4 = f1 + f3 - f2;
    let values = [f1, f2, f3, f4];
    let sk = match kind {
        Case1Kind::Cn => SolutionKind::Case1Cn,
        Case1Kind::Dn => SolutionKind::Case1Dn,
    };
    if f1 == f3 {
        return ClosedFormSolution::constant(sk, values, f1, xi0);
    }
    let gamma = 0.5 * (f1 + f3);
    let alpha = branch.sign() * 0.5 * (f3 - f1);
    let (beta, kernel) = match kind {
        Case1Kind::Cn => {
            let den = 4.0 * (f1 - f2) * (f2 - f3);
            let k2 = (f1 - f3).powi(2) / den;
            if den == 0.0 || !(k2 <= 1.0 + K2_CLAMP) {
                return Err(SolutionError::BranchInfeasible(format!("cn modulus k^2 = {k2} outside [0, 1]")));
            }
            let k = Modulus::from_k2(k2, K2_CLAMP)?;
            (((f3 - f2) * (f2 - f1)).sqrt(), Kernel::Cn(k))
        }
        Case1Kind::Dn => {
            let k = 2.0 * ((f2 - f1) * (f3 - f2)).sqrt() / (f3 - f1);
            let k = Modulus::new(k).map_err(|_| SolutionError::BranchInfeasible(format!("dn modulus {k} outside [0, 1]")))?;
            (0.5 * (f3 - f1), Kernel::Dn(k))
        }
    };
    let mut s = ClosedFormSolution::build(sk, values, kernel, [gamma, alpha, 1.0, 0.0], beta, branch, xi0)?;
    let e = sym(&values);
    let sum = e[1];
    s.coeffs.alpha = Some(alpha);
    s.coeffs.beta = Some(beta);
    s.coeffs.gamma = Some(gamma);
    s.coeffs.mu2 = Some(0.375 * sum * sum - e[2]);
    s.coeffs.mu0 = Some(sum * sum * e[2] / 16.0 - 5.0 / 256.0 * sum.powi(4) - e[4]);
    if s.modulus == Some(Modulus::ONE) {
        s.decay_rate = Some(beta);
    }
    let p = s.params;
    let scale = s.scale();
    if (p.d2 - p.c * p.d1).abs() > CONSTRAINT_TOL * scale.powi(3) {
        return Err(SolutionError::Inconsistent(format!("d2 - c d1 = {:e}", p.d2 - p.c * p.d1)));
    }
    gate(s)
}

/// `u = 2f₁f₃/((f₁+f₃) + (f₁−f₃)·y(βξ))` and the reciprocal-numerator forms, with implied
/// fourth zero `f₄ = f₁f₂f₃/(f₂f₃ + f₁f₂ − f₁f₃)`.
pub fn case2(kind: Case2Kind, f1: f64, f2: f64, f3: f64, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
    match kind {
        Case2Kind::Tn => {
            return Err(SolutionError::Infeasible(
                "tn: b^2 = nu0/(nu2 - nu4) has no real root for any modulus".into(),
            ))
        }
        Case2Kind::DnTn => {
            return Err(SolutionError::Infeasible(
                "dn*tn: every real choice of b forces k^2 >= 1, and k in {0, 1} leaves two double zeros".into(),
            ))
        }
        _ => {}
    }
    check_finite(&[f1, f2, f3, xi0])?;
    if f1 == 0.0 || f3 == 0.0 {
        return Err(SolutionError::InvalidInput("b = (f1 - f3)/(2 f1 f3) needs f1, f3 != 0".into()));
    }
    let dd = f2 * f3 + f1 * f2 - f1 * f3;
    if dd == 0.0 {
        return Err(SolutionError::InvalidInput("f2 f3 + f1 f2 - f1 f3 = 0: implied fourth zero undefined".into()));
    }
    let f4 = f1 * f2 * f3 / dd;
    let values = [f1, f2, f3, f4];
    let sk = match kind {
        Case2Kind::Sn => SolutionKind::Case2Sn,
        Case2Kind::Cn => SolutionKind::Case2Cn,
        Case2Kind::Dn => SolutionKind::Case2Dn,
        Case2Kind::InvSn => SolutionKind::Case2InvSn,
        _ => SolutionKind::Case2InvCn,
    };
    if f1 == f3 {
        return ClosedFormSolution::constant(sk, values, f1, xi0);
    }
    let p13 = f1 * f3;
    let q = f2 * (f1 + f3) - 2.0 * p13;
    let (beta2, k2) = match kind {
        Case2Kind::Sn => {
            let den = f2 * f2 * (f1 + f3).powi(2) - 4.0 * p13 * dd;
            (-den / (4.0 * dd), f2 * f2 * (f1 - f3).powi(2) / den)
        }
        Case2Kind::Cn => (
            p13 * (f1 - f2) * (f2 - f3) / dd,
            f2 * f2 * (f1 - f3).powi(2) / (4.0 * p13 * (f1 - f2) * (f2 - f3)),
        ),
        Case2Kind::Dn => (
            f2 * f2 * (f1 - f3).powi(2) / (4.0 * dd),
            4.0 * p13 * (f1 - f2) * (f2 - f3) / (f2 * f2 * (f1 - f3).powi(2)),
        ),
        Case2Kind::InvSn => (
            -f2 * f2 * (f1 - f3).powi(2) / (4.0 * dd),
            (q / (f2 * (f1 - f3))).powi(2),
        ),
        _ => (
            -p13 * (f1 - f2) * (f2 - f3) / dd,
            -q * q / (4.0 * p13 * (f1 - f2) * (f2 - f3)),
        ),
    };
    if !beta2.is_finite() || beta2 < 0.0 {
        return Err(SolutionError::BranchInfeasible(format!("beta^2 = {beta2}")));
    }
    let k = if k2.is_finite() { Modulus::from_k2(k2, K2_CLAMP).ok() } else { None };
    let k = k.ok_or_else(|| SolutionError::BranchInfeasible(format!("k^2 = {k2} outside [0, 1]")))?;
    let beta = beta2.sqrt();
    let (kernel, form) = match kind {
        Case2Kind::Sn => (Kernel::Sn(k), [2.0 * p13, 0.0, f1 + f3, f1 - f3]),
        Case2Kind::Cn => (Kernel::Cn(k), [2.0 * p13, 0.0, f1 + f3, f1 - f3]),
        Case2Kind::Dn => (Kernel::Dn(k), [2.0 * p13, 0.0, f1 + f3, f1 - f3]),
        Case2Kind::InvSn => (Kernel::Sn(k), [0.0, 2.0 * p13, f1 - f3, f1 + f3]),
        _ => (Kernel::Cn(k), [0.0, 2.0 * p13, f1 - f3, f1 + f3]),
    };
    let mut s = ClosedFormSolution::build(sk, values, kernel, form, beta, Branch::Upper, xi0)?;
    let e = sym(&values);
    let b = (f1 - f3) / (2.0 * p13);
    s.coeffs.b = Some(b);
    s.coeffs.beta = Some(beta);
    if e[4] != 0.0 && e[3] != 0.0 {
        let (e3, e4, sum) = (e[3], e[4], e[1]);
        s.coeffs.a = Some(e3 / (4.0 * e4));
        s.coeffs.nu4 = Some(-b * b * e4);
        s.coeffs.nu2 = Some(e3 * e3 / (8.0 * e4) - 2.0 * e4 * sum / e3);
        s.coeffs.nu0 = Some(e3 * sum / (8.0 * e4) - e3.powi(4) / (256.0 * e4.powi(3)) - 1.0);
        let p = s.params;
        let a = e3 / (4.0 * e4);
        if (p.d2 + 4.0 * p.d3 * a).abs() > CONSTRAINT_TOL * s.scale().powi(3) {
            return Err(SolutionError::Inconsistent(format!("d2 + 4 d3 a = {:e}", p.d2 + 4.0 * p.d3 * a)));
        }
    }
    if k == Modulus::ONE && s.global {
        s.decay_rate = Some(beta);
    }
    gate(s)
}

fn omega_product(form: [f64; 4], values: &[f64; 4]) -> [f64; 5] {
    // Ω(y) = −Π((A − fᵢC) + (B − fᵢD) y), ascending powers
    let [a1, b1, a2, b2] = form;
    let mut poly = vec![-1.0];
    for &fi in values {
        let (c0, c1) = (a1 - fi * a2, b1 - fi * b2);
        let mut next = vec![0.0; poly.len() + 1];
        for (i, &p) in poly.iter().enumerate() {
            next[i] += p * c0;
            next[i + 1] += p * c1;
        }
        poly = next;
    }
    [poly[0], poly[1], poly[2], poly[3], poly[4]]
}

struct Sn2Candidate {
    form: [f64; 4],
    beta2: f64,
    k2: f64,
    labels: [f64; 4],
}

fn sn2_from_candidate(
    c: &Sn2Candidate,
    sorted: &[f64; 4],
    xi0: f64,
) -> Result<(ClosedFormSolution, Option<String>), String> {
    if !(c.beta2 > 0.0) || !c.beta2.is_finite() {
        return Err(format!("beta^2 = {} not positive", c.beta2));
    }
    if !(c.k2 >= 0.0) || !c.k2.is_finite() {
        return Err(format!("k^2 = {} negative", c.k2));
    }
    let mut form = c.form;
    let mut beta = c.beta2.sqrt();
    let mut k2 = c.k2;
    let mut note = None;
    if k2 > 1.0 + K2_CLAMP {
        // sn²(u, k) = sn²(k u, 1/k) / k²
        form[1] /= k2;
        form[3] /= k2;
        beta *= k2.sqrt();
        note = Some(format!("reciprocal-modulus identity applied (k^2 = {k2} > 1)"));
        k2 = 1.0 / k2;
    }
    let k = Modulus::from_k2(k2, K2_CLAMP).map_err(|e| e.to_string())?;
    let mut s = ClosedFormSolution::build(SolutionKind::GeneralSn2, *sorted, Kernel::Sn2(k), form, beta, Branch::Upper, xi0)
        .map_err(|e| e.to_string())?;
    let [a1, b1, a2, b2] = form;
    let (a, b, r3, r4) = (c.labels[0], c.labels[1], c.labels[2], c.labels[3]);
    s.coeffs.a1 = Some(a1);
    s.coeffs.b1 = Some(b1);
    s.coeffs.a2 = Some(a2);
    s.coeffs.b2 = Some(b2);
    s.coeffs.a = Some(a);
    s.coeffs.b = Some(b);
    s.coeffs.beta = Some(beta);
    let ab2 = (a - b).powi(2);
    s.coeffs.omega1 = Some(0.25 * ab2 * (a - r4) * (a - r3));
    s.coeffs.omega2 = Some(0.5 * ab2 * ((b - r3) * (a - r4) + (a - r3) * (b - r4)));
    s.coeffs.omega3 = Some(0.25 * ab2 * (b - r3) * (b - r4));
    let om = omega_product([a1, b1, a2, b2], sorted);
    s.coeffs.big_omega0 = Some(om[0]);
    s.coeffs.big_omega1 = Some(om[1]);
    s.coeffs.big_omega2 = Some(om[2]);
    s.coeffs.big_omega3 = Some(om[3]);
    s.coeffs.big_omega4 = Some(om[4]);
    Ok((s, note))
}

/// `f = (a₁ + b₁ sn²(βξ))/(a₂ + b₂ sn²(βξ))` starting at the zero selected by
/// `initial_index` (1-based, roots ascending).
pub fn general_sn2(roots: [f64; 4], initial_index: usize, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
    check_finite(&roots)?;
    check_finite(&[xi0])?;
    if !(1..=4).contains(&initial_index) {
        return Err(SolutionError::InvalidInput(format!("initial_index {initial_index} not in 1..=4")));
    }
    let mut r = roots;
    r.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    if r.windows(2).any(|w| w[0] == w[1]) {
        return Err(SolutionError::InvalidInput("roots must be distinct".into()));
    }
    let [f1, f2, f3, f4] = r;
    let beta2 = 0.25 * (f1 - f3) * (f2 - f4);
    let printed = match initial_index {
        1 => Sn2Candidate {
            form: [f1 * (f2 - f4), f2 * (f4 - f1), f2 - f4, f4 - f1],
            beta2,
            k2: (f2 - f3) * (f1 - f4) / ((f1 - f3) * (f2 - f4)),
            labels: [f1, f2, f3, f4],
        },
        2 => Sn2Candidate {
            form: [f2 * (f1 - f3), f1 * (f3 - f2), f1 - f3, f3 - f2],
            beta2,
            k2: (f2 - f4) * (f1 - f3) / ((f1 - f4) * (f2 - f3)),
            labels: [f2, f1, f3, f4],
        },
        3 => Sn2Candidate {
            form: [f3 * (f4 - f2), f4 * (f2 - f3), f4 - f2, f2 - f3],
            beta2,
            k2: (f4 - f1) * (f3 - f2) / ((f3 - f1) * (f4 - f2)),
            labels: [f3, f4, f1, f2],
        },
        _ => Sn2Candidate {
            form: [f4 * (f3 - f1), f3 * (f1 - f4), f3 - f1, f1 - f4],
            beta2,
            k2: (f3 - f2) * (f4 - f1) / ((f3 - f1) * (f4 - f2)),
            labels: [f4, f3, f1, f2],
        },
    };

    let printed_attempt = sn2_from_candidate(&printed, &r, xi0).and_then(|(s, note)| {
        let s = gate_sn2(s, r[initial_index - 1])?;
        Ok((s, note))
    });
    let printed_reason = match printed_attempt {
        Ok((mut s, note)) => {
            s.notes.extend(note);
            return Ok(s);
        }
        Err(reason) => reason,
    };

    let a = r[initial_index - 1];
    let others: Vec<f64> = r.iter().copied().filter(|&x| x != a).collect();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut rejected = Vec::new();
    for perm in perms {
        let (b, p, s_root) = (others[perm[0]], others[perm[1]], others[perm[2]]);
        // y = 0 → a, y = 1 → p, y = 1/k² → s, y = ∞ → b
        let t = (p - a) / (b - p);
        let cand = Sn2Candidate {
            form: [a, b * t, 1.0, t],
            beta2: 0.25 * (s_root - a) * (b - p),
            k2: (p - a) * (b - s_root) / ((b - p) * (s_root - a)),
            labels: [a, b, p, s_root],
        };
        let attempt = sn2_from_candidate(&cand, &r, xi0).and_then(|(s, note)| Ok((gate_sn2(s, a)?, note)));
        let (mut s, note) = match attempt {
            Ok(found) => found,
            Err(reason) => {
                rejected.push(format!("[inf -> {b}, 1 -> {p}, 1/k^2 -> {s_root}: {reason}]"));
                continue;
            }
        };
        s.notes.push(format!(
            "printed sub-case {initial_index} rejected ({printed_reason}); corrected assignment: \
             sn^2 = 0 -> {a}, sn^2 = 1 -> {p}, sn^2 = 1/k^2 -> {s_root}, sn^2 = inf -> {b}"
        ));
        s.notes.extend(note);
        return Ok(s);
    }
    Err(SolutionError::UnresolvedBranch(format!(
        "printed sub-case {initial_index} with k^2 = {}, beta^2 = {}: {printed_reason}; corrections: {}",
        printed.k2,
        printed.beta2,
        rejected.join(" ")
    )))
}

fn gate_sn2(s: ClosedFormSolution, start: f64) -> Result<ClosedFormSolution, String> {
    let (f0, _) = evaluate(&s, s.xi0).map_err(|e| e.to_string())?;
    if (f0 - start).abs() > 1e-12 * s.scale() {
        return Err(format!("f(xi0) = {f0} differs from the selected zero {start}"));
    }
    if !s.global {
        return Err("pole inside the period".into());
    }
    gate(s).map_err(|e| e.to_string())
}

/// Residual and oracle validation shared by the elliptic constructors.
fn gate(s: ClosedFormSolution) -> Result<ClosedFormSolution, SolutionError> {
    let scale = s.scale();
    let scale4 = scale.powi(4);
    if matches!(s.kernel, Kernel::Const) {
        let r = eval_f(&s.params, s.form[0]).abs();
        return if r <= GATE_RESIDUAL * scale4 {
            Ok(s)
        } else {
            Err(SolutionError::BranchInfeasible(format!("constant level is not a zero (F = {r:e})")))
        };
    }
    let window = s.period.unwrap_or(20.0);
    let (lo, hi) = if s.period.is_some() { (s.xi0, s.xi0 + window) } else { (s.xi0 - 10.0, s.xi0 + 10.0) };
    let n = 400;
    let mut worst = 0.0f64;
    let mut sampled = 0;
    for i in 0..n {
        let xi = lo + (hi - lo) * (i as f64 + 0.37) / n as f64;
        if let Ok((f, fp)) = evaluate(&s, xi) {
            let size = if s.global { scale4 } else { scale4.max(f.abs().powi(4)) };
            worst = worst.max((fp * fp - eval_f(&s.params, f)).abs() / size);
            sampled += 1;
        }
    }
    if sampled == 0 || !(worst <= GATE_RESIDUAL) {
        return Err(SolutionError::BranchInfeasible(format!("defining residual {worst:e} fails the gate")));
    }
    if s.global {
        let length = window.min(40.0);
        let h = (length / 4000.0).min(1e-4);
        let (f0, fp0) = evaluate(&s, s.xi0)?;
        let sign = if fp0 < 0.0 { -1.0 } else { 1.0 };
        let oracle = verify::oracle_integrate(&s.params, f0, sign, length, h)
            .map_err(|e| SolutionError::BranchInfeasible(format!("oracle: {e}")))?;
        let mut err = 0.0f64;
        for (xi, fo) in oracle.xi.iter().zip(&oracle.f) {
            let (f, _) = evaluate(&s, s.xi0 + xi)?;
            err = err.max((f - fo).abs());
        }
        if !(err <= GATE_ORACLE * scale) {
            return Err(SolutionError::BranchInfeasible(format!("oracle disagreement {err:e}")));
        }
    }
    Ok(s)
}

/// Traveling pair `u(x,t) = f(x − ct)`, `v(x,t) = g(f(x − ct))`.
#[derive(Debug, Clone)]
pub struct TravelingPair {
    pub solution: ClosedFormSolution,
    pub c: f64,
    pub d1: f64,
}

impl TravelingPair {
    pub fn u(&self, x: f64, t: f64) -> Result<f64, SolutionError> {
        Ok(evaluate(&self.solution, x - self.c * t)?.0)
    }

    pub fn v(&self, x: f64, t: f64) -> Result<f64, SolutionError> {
        Ok(g_from_f(self.u(x, t)?, self.c, self.d1))
    }
}

pub fn u_v_pair(s: &ClosedFormSolution, p: &Params) -> Result<TravelingPair, SolutionError> {
    let scale = s.scale();
    let diff = s.params.max_abs_diff(p);
    if diff > 1e-9 * scale.powi(4) {
        return Err(SolutionError::Inconsistent(format!(
            "solution implies {} but {} was given",
            s.params, p
        )));
    }
    Ok(TravelingPair {
        solution: s.clone(),
        c: p.c,
        d1: p.d1,
    })
}

/// Every construction note across `solutions`, prefixed by the solution kind.
pub fn discrepancy_report(solutions: &[ClosedFormSolution]) -> Vec<String> {
    solutions
        .iter()
        .flat_map(|s| s.notes.iter().map(move |n| format!("{:?}: {n}", s.kind)))
        .collect()
}

/// Closed-form families that realise the non-constant orbits of each case.
/// `TwoSimpleOnly` is periodic but has no closed form here; the oracle covers it.
pub fn dispatch(tag: CaseTag) -> &'static [SolutionKind] {
    use CaseTag::*;
    match tag {
        NoRealZeros | OneDoubleOnly | TwoDoublesOnly | Quadruple | TwoSimpleOnly => &[],
        DoubleBetweenSimples => &[SolutionKind::SolitaryDouble],
        TripleWithSimpleAbove | TripleWithSimpleBelow => &[SolutionKind::SolitaryTriple],
        DoubleBelowSimples | DoubleAboveSimples => &[SolutionKind::PeriodicTrig],
        FourSimple => &[SolutionKind::GeneralSn2],
    }
}

/// Builds the family chosen by `dispatch`. For four simple zeros `Upper` starts at the
/// largest zero and `Lower` at the smallest.
pub fn solve_auto(roots: &RootMultiset, branch: Branch, xi0: f64) -> Result<ClosedFormSolution, SolutionError> {
    let tag = classify(roots);
    let e = roots.entries();
    match tag {
        CaseTag::DoubleBetweenSimples => solitary_double(e[0].0, e[1].0, e[2].0, branch, xi0),
        CaseTag::DoubleBelowSimples => periodic_trig(e[1].0, e[2].0, e[0].0, branch, xi0),
        CaseTag::DoubleAboveSimples => periodic_trig(e[0].0, e[1].0, e[2].0, branch, xi0),
        CaseTag::TripleWithSimpleAbove => solitary_triple(e[0].0, e[1].0, xi0),
        CaseTag::TripleWithSimpleBelow => solitary_triple(e[1].0, e[0].0, xi0),
        CaseTag::FourSimple => {
            let v = roots.values();
            let index = if branch == Branch::Upper { 4 } else { 1 };
            general_sn2([v[0], v[1], v[2], v[3]], index, xi0)
        }
        _ => Err(SolutionError::Infeasible(format!("{tag}: {}", tag.verdict()))),
    }
}
