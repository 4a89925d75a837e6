//! Jacobi elliptic functions and the complete elliptic integral of the first kind.
//!
//! Everything is computed from the arithmetic-geometric mean: `complete_k` directly,
//! `jacobi` through the descending Landen recursion.

use serde::Serialize;
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

/// Distance from 0 or 1 within which a modulus is snapped to the exact limit.
pub const SNAP_TOL: f64 = 1e-12;
/// Denominators smaller than this in absolute value count as poles.
pub const POLE_TOL: f64 = 1e-12;
const AGM_REL_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("modulus {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("infinite period: K(k) diverges at k = 1")]
    InfinitePeriod,
    #[error("pole: denominator {0:e} below tolerance")]
    Pole(f64),
}

/// Elliptic modulus, normalized into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Modulus(f64);

impl Modulus {
    pub fn new(k: f64) -> Result<Self, EllipticError> {
        if !k.is_finite() || k < -SNAP_TOL || k > 1.0 + SNAP_TOL {
            return Err(EllipticError::OutOfRange(k));
        }
        let k = if k < SNAP_TOL {
            0.0
        } else if k > 1.0 - SNAP_TOL {
            1.0
        } else {
            k
        };
        Ok(Modulus(k))
    }

    /// Builds the modulus from `k²`, clamping `k²` within `tol` of `[0, 1]`.
    pub fn from_k2(k2: f64, tol: f64) -> Result<Self, EllipticError> {
        if !k2.is_finite() || k2 < -tol || k2 > 1.0 + tol {
            return Err(EllipticError::OutOfRange(k2.abs().sqrt()));
        }
        Modulus::new(k2.clamp(0.0, 1.0).sqrt())
    }

    pub const ZERO: Modulus = Modulus(0.0);
    pub const ONE: Modulus = Modulus(1.0);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn k2(self) -> f64 {
        self.0 * self.0
    }

    /// Complementary modulus `√(1−k²)`.
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JacobiTriple {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DerivedKind {
    Tn,
    InvSn,
    InvCn,
    DnTn,
}

/// Arithmetic-geometric mean of two nonnegative numbers.
pub fn agm(a: f64, b: f64) -> f64 {
    let (mut a, mut b) = (a, b);
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_REL_TOL * a.abs() {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    0.5 * (a + b)
}

/// Quarter period `K(k)`.
pub fn complete_k(k: Modulus) -> Result<f64, EllipticError> {
    if k.value() == 1.0 {
        return Err(EllipticError::InfinitePeriod);
    }
    Ok(FRAC_PI_2 / agm(1.0, k.complementary()))
}

/// `(sn, cn, dn)(u | k)`.
pub fn jacobi(u: f64, k: Modulus) -> JacobiTriple {
    let k = k.value();
    if k == 0.0 {
        let (s, c) = u.sin_cos();
        return JacobiTriple { sn: s, cn: c, dn: 1.0 };
    }
    if k == 1.0 {
        let sech = 1.0 / u.cosh();
        return JacobiTriple {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
        };
    }

    let mut a = [0.0f64; AGM_MAX_ITER + 1];
    let mut c = [0.0f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = k;
    let mut b = ((1.0 - k) * (1.0 + k)).sqrt();
    let mut n = 0;
    while n < AGM_MAX_ITER {
        if (a[n] - b).abs() <= AGM_REL_TOL * a[n] {
            break;
        }
        let an = 0.5 * (a[n] + b);
        let cn = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
        a[n] = an;
        c[n] = cn;
    }

    // phi_{j-1} = (phi_j + asin(c_j/a_j sin phi_j)) / 2
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    // dn² = cn² + k′² sn² has no cancellation, unlike 1 − k² sn² or the Landen ratio at K
    let kc = ((1.0 - k) * (1.0 + k)).sqrt();
    let dn = (cn * cn + kc * kc * sn * sn).sqrt();
    JacobiTriple { sn, cn, dn }
}

/// `tn`, `1/sn`, `1/cn` or `dn·tn` at `u`.
pub fn jacobi_derived(u: f64, k: Modulus, kind: DerivedKind) -> Result<f64, EllipticError> {
    let t = jacobi(u, k);
    let guard = |den: f64| {
        if den.abs() < POLE_TOL {
            Err(EllipticError::Pole(den))
        } else {
            Ok(den)
        }
    };
    Ok(match kind {
        DerivedKind::Tn => t.sn / guard(t.cn)?,
        DerivedKind::InvSn => 1.0 / guard(t.sn)?,
        DerivedKind::InvCn => 1.0 / guard(t.cn)?,
        DerivedKind::DnTn => t.dn * t.sn / guard(t.cn)?,
    })
}

/// Derivatives `(sn′, cn′, dn′)` with respect to the argument.
pub fn jacobi_derivatives(t: JacobiTriple, k: Modulus) -> JacobiTriple {
    JacobiTriple {
        sn: t.cn * t.dn,
        cn: -t.sn * t.dn,
        dn: -k.k2() * t.sn * t.cn,
    }
}
