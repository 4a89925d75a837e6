//! Traveling-wave reduction of the ℓ=2 system: the second field, local behavior of
//! orbits at zeros of `F`, and the vanishing-boundary reduction.

use crate::quartic::{eval_f, eval_f_derivative, Params};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReductionError {
    #[error("{f1} is not a zero of F (F = {value:e})")]
    NotAZero { f1: f64, value: f64 },
    #[error("multiplicity {0} not in 1..=4")]
    BadMultiplicity(usize),
    #[error("no real orbit at this zero (F'' = {0:e} <= 0)")]
    NoRealOrbit(f64),
}

/// `g = −c f − ¾ f² + d₁`.
pub fn g_from_f(f: f64, c: f64, d1: f64) -> f64 {
    -c * f - 0.75 * f * f + d1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LocalKind {
    SimpleMin,
    SimpleMax,
    DoubleExponentialApproach,
    TripleAlgebraicApproach,
    QuadrupleConstantOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalForm {
    pub kind: LocalKind,
    /// Simple: `f″ = F′/2`. Double: exponential rate `√(F″/2)`. Triple: `√(|F‴|/6)`.
    pub rate: f64,
    /// Triple zeros only: the orbit lies above the zero iff `F‴ > 0`.
    pub approach_from_above: Option<bool>,
}

pub fn is_zero_of_f(p: &Params, f1: f64) -> bool {
    eval_f(p, f1).abs() <= 1e-8 * f1.abs().powi(4).max(1.0)
}

pub fn local_behavior(f1: f64, mult: usize, p: &Params) -> Result<LocalForm, ReductionError> {
    if !(1..=4).contains(&mult) {
        return Err(ReductionError::BadMultiplicity(mult));
    }
    if !is_zero_of_f(p, f1) {
        return Err(ReductionError::NotAZero { f1, value: eval_f(p, f1) });
    }
    let d = eval_f_derivative(p, f1, mult);
    Ok(match mult {
        1 => LocalForm {
            kind: if d > 0.0 { LocalKind::SimpleMin } else { LocalKind::SimpleMax },
            rate: 0.5 * d,
            approach_from_above: None,
        },
        2 => {
            if d <= 0.0 {
                return Err(ReductionError::NoRealOrbit(d));
            }
            LocalForm {
                kind: LocalKind::DoubleExponentialApproach,
                rate: (0.5 * d).sqrt(),
                approach_from_above: None,
            }
        }
        3 => LocalForm {
            kind: LocalKind::TripleAlgebraicApproach,
            rate: (d.abs() / 6.0).sqrt(),
            approach_from_above: Some(d > 0.0),
        },
        _ => LocalForm {
            kind: LocalKind::QuadrupleConstantOnly,
            rate: 0.0,
            approach_from_above: None,
        },
    })
}

/// `F = −f²(f + 2c)²` for vanishing boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VanishingL2 {
    pub params: Params,
    /// Double zeros `0` and `−2c` (coincide when `c = 0`).
    pub zeros: [f64; 2],
}

impl VanishingL2 {
    pub fn eval(&self, f: f64) -> f64 {
        let s = f * (f + 2.0 * self.params.c);
        -s * s
    }

    /// Only constant real solutions exist: `F = −(f(f+2c))² ≤ 0`.
    pub fn constant_solutions(&self) -> Vec<f64> {
        if self.zeros[0] == self.zeros[1] {
            vec![self.zeros[0]]
        } else {
            self.zeros.to_vec()
        }
    }
}

pub fn vanishing_reduction_l2(c: f64) -> VanishingL2 {
    VanishingL2 {
        params: Params::new(c, 0.0, 0.0, 0.0),
        zeros: [0.0, -2.0 * c],
    }
}
