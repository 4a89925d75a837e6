//! Independent checks of constructed solutions: residuals of the first integral and of
//! the PDE, a brute-force RK4 integrator used as ground truth, and profile comparison.

use crate::quartic::{eval_f, eval_f_derivative, roots_of_f, Params, DEFAULT_CLUSTER_TOL};
use crate::reduction::g_from_f;
use crate::solutions::{evaluate, u_v_pair, ClosedFormSolution, SolutionError};
use serde::Serialize;
use thiserror::Error;

/// Approach distance below which the oracle clamps onto a multiple zero.
pub const CLAMP_TOL: f64 = 1e-10;
const BISECTION_STEPS: usize = 60;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("degenerate domain: every sample is singular")]
    DegenerateDomain,
    #[error("domain too small for the finite-difference stencils")]
    DomainTooSmall,
    #[error("start point infeasible: F(f0) = {0:e} < 0")]
    StartInfeasible(f64),
    #[error("invalid step or length")]
    InvalidStep,
    #[error("disjoint domains")]
    DisjointDomains,
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Solution(#[from] SolutionError),
}

/// Samples on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub xi: Vec<f64>,
    pub f: Vec<f64>,
    pub f_prime: Option<Vec<f64>>,
    pub g: Option<Vec<f64>>,
    /// Oracle runs only: locations where `f′` changed sign.
    pub turning_points: Vec<f64>,
}

impl Profile {
    pub fn new(xi: Vec<f64>, f: Vec<f64>, f_prime: Option<Vec<f64>>, g: Option<Vec<f64>>) -> Result<Self, VerifyError> {
        let n = xi.len();
        if f.len() != n || f_prime.as_ref().is_some_and(|v| v.len() != n) || g.as_ref().is_some_and(|v| v.len() != n) {
            return Err(VerifyError::InvalidProfile("array lengths differ".into()));
        }
        if n >= 2 {
            let h = (xi[n - 1] - xi[0]) / (n - 1) as f64;
            if !(h > 0.0) {
                return Err(VerifyError::InvalidProfile("grid not increasing".into()));
            }
            let span = xi[0].abs().max(xi[n - 1].abs()).max(h);
            for (i, x) in xi.iter().enumerate() {
                if (x - (xi[0] + i as f64 * h)).abs() > 1e-12 * span {
                    return Err(VerifyError::InvalidProfile(format!("grid not uniform at index {i}")));
                }
            }
        }
        Ok(Profile { xi, f, f_prime, g, turning_points: Vec::new() })
    }

    pub fn step(&self) -> f64 {
        let n = self.xi.len();
        if n < 2 {
            0.0
        } else {
            (self.xi[n - 1] - self.xi[0]) / (n - 1) as f64
        }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }
}

/// `n` equally spaced points covering `[a, b]` inclusive.
pub fn grid(domain: (f64, f64), n: usize) -> Vec<f64> {
    let (a, b) = domain;
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Samples the closed form on a grid; singular samples become NaN.
pub fn sample(s: &ClosedFormSolution, domain: (f64, f64), n: usize) -> Profile {
    let xi = grid(domain, n);
    let mut f = Vec::with_capacity(n);
    let mut fp = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for &x in &xi {
        let (a, b) = evaluate(s, x).unwrap_or((f64::NAN, f64::NAN));
        f.push(a);
        fp.push(b);
        g.push(g_from_f(a, s.params.c, s.params.d1));
    }
    Profile {
        xi,
        f,
        f_prime: Some(fp),
        g: Some(g),
        turning_points: Vec::new(),
    }
}

/// `max |f′² − F(f)|` over `n` grid points, skipping singular samples.
pub fn ode_residual(s: &ClosedFormSolution, p: &Params, domain: (f64, f64), n: usize) -> Result<f64, VerifyError> {
    let n = n.max(2);
    let mut worst: Option<f64> = None;
    for xi in grid(domain, n) {
        if let Ok((f, fp)) = evaluate(s, xi) {
            let r = (fp * fp - eval_f(p, f)).abs();
            worst = Some(worst.map_or(r, |w: f64| w.max(r)));
        }
    }
    worst.ok_or(VerifyError::DegenerateDomain)
}

/// Max residuals `(r_u, r_v)` of the PDE for the traveling pair built from `s`, with
/// `∂ₜ = −c ∂_ξ`.
///
/// First derivatives use the 5-point fourth-order stencil on `u` and `v`; `u_ξξξ` applies
/// the 5-point fourth-order second-derivative stencil to the analytic `f′`, which keeps
/// the rounding floor near `ε|f′|/h²` instead of `ε|f|/h³`.
pub fn pde_residual(s: &ClosedFormSolution, p: &Params, domain: (f64, f64), n: usize, h_fd: f64) -> Result<(f64, f64), VerifyError> {
    if !(h_fd > 0.0) {
        return Err(VerifyError::InvalidStep);
    }
    let (a, b) = domain;
    if b - a < 4.0 * h_fd {
        return Err(VerifyError::DomainTooSmall);
    }
    let pair = u_v_pair(s, p)?;
    let (c, d1) = (pair.c, pair.d1);
    let lo = a + 2.0 * h_fd;
    let hi = b - 2.0 * h_fd;
    let pts = if n <= 1 { vec![0.5 * (lo + hi)] } else { grid((lo, hi), n) };
    let mut ru = 0.0f64;
    let mut rv = 0.0f64;
    let mut any = false;
    'sample: for xi in pts {
        let mut f = [0.0; 5];
        let mut fp = [0.0; 5];
        for (j, off) in [-2.0, -1.0, 0.0, 1.0, 2.0].iter().enumerate() {
            match evaluate(s, xi + off * h_fd) {
                Ok((a, b)) => {
                    f[j] = a;
                    fp[j] = b;
                }
                Err(_) => continue 'sample,
            }
        }
        let g: Vec<f64> = f.iter().map(|&x| g_from_f(x, c, d1)).collect();
        let d1st = |y: &[f64]| (y[0] - 8.0 * y[1] + 8.0 * y[3] - y[4]) / (12.0 * h_fd);
        let u_x = d1st(&f);
        let v_x = d1st(&g);
        let u_xxx = (-fp[0] + 16.0 * fp[1] - 30.0 * fp[2] + 16.0 * fp[3] - fp[4]) / (12.0 * h_fd * h_fd);
        let (u, v) = (f[2], g[2]);
        ru = ru.max((-c * u_x - 1.5 * u * u_x - v_x).abs());
        rv = rv.max((-c * v_x + 0.25 * u_xxx - v * u_x - 0.5 * u * v_x).abs());
        any = true;
    }
    if any {
        Ok((ru, rv))
    } else {
        Err(VerifyError::DegenerateDomain)
    }
}

fn rk4_second(p: &Params, f: f64, q: f64, h: f64) -> (f64, f64) {
    let acc = |x: f64| 0.5 * eval_f_derivative(p, x, 1);
    let (k1f, k1q) = (q, acc(f));
    let (k2f, k2q) = (q + 0.5 * h * k1q, acc(f + 0.5 * h * k1f));
    let (k3f, k3q) = (q + 0.5 * h * k2q, acc(f + 0.5 * h * k2f));
    let (k4f, k4q) = (q + h * k3q, acc(f + h * k3f));
    (
        f + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f),
        q + h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q),
    )
}

/// `F = (f − z)^m·Q(f)` with `Q` from synthetic division. Horner on `F` itself loses all
/// relative accuracy within `√ε` of a double zero, which would stall the approach there.
struct Deflated {
    z: f64,
    m: i32,
    /// Ascending coefficients of `Q`.
    q: Vec<f64>,
}

impl Deflated {
    fn new(p: &Params, z: f64, m: usize) -> Self {
        let mut a = p.coeffs().to_vec();
        for _ in 0..m {
            let n = a.len() - 1;
            let mut b = vec![0.0; n];
            b[n - 1] = a[n];
            for i in (1..n).rev() {
                b[i - 1] = a[i] + z * b[i];
            }
            a = b;
        }
        Deflated { z, m: m as i32, q: a }
    }

    fn eval(&self, f: f64) -> f64 {
        let q = self.q.iter().rev().fold(0.0, |acc, c| acc * f + c);
        (f - self.z).powi(self.m) * q
    }
}

fn rk4_first(d: &Deflated, f: f64, dir: f64, h: f64) -> f64 {
    let vel = |x: f64| dir * d.eval(x).max(0.0).sqrt();
    let k1 = vel(f);
    let k2 = vel(f + 0.5 * h * k1);
    let k3 = vel(f + 0.5 * h * k2);
    let k4 = vel(f + h * k3);
    f + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Brute-force profile of `f′² = F(f)` from `f(0) = f0`, `f′(0) = sign·√F(f0)`.
///
/// Integrates the equivalent `f″ = F′(f)/2` with classic RK4, which passes simple turning
/// points smoothly; each sign change of `f′` is located by bisection and recorded. Once
/// the next zero ahead is a multiple one and `F` has started to fall, the separatrix is
/// unstable for the second-order form, so the orbit is advanced with `f′ = ±√F` instead
/// (stable along the decaying direction) and clamped within `CLAMP_TOL`.
pub fn oracle_integrate(p: &Params, f0: f64, sign: f64, length: f64, h: f64) -> Result<Profile, VerifyError> {
    if !(h > 0.0) || !(length >= 0.0) || !length.is_finite() || !f0.is_finite() {
        return Err(VerifyError::InvalidStep);
    }
    let start = eval_f(p, f0);
    if start < -1e-12 * f0.abs().powi(4).max(1.0) {
        return Err(VerifyError::StartInfeasible(start));
    }
    let zeros = roots_of_f(p, DEFAULT_CLUSTER_TOL);
    let multiple: Vec<f64> = zeros.entries().iter().filter(|e| e.1 >= 2).map(|e| e.0).collect();
    // the orbit approaches a multiple zero exactly when it is the next zero ahead
    let next_multiple = |f: f64, q: f64| -> Option<(f64, usize)> {
        if q == 0.0 {
            return None;
        }
        zeros
            .entries()
            .iter()
            .filter(|e| (e.0 - f) * q > 0.0)
            .min_by(|x, y| (x.0 - f).abs().partial_cmp(&(y.0 - f).abs()).expect("finite"))
            .filter(|e| e.1 >= 2)
            .copied()
    };
    let steps = if length == 0.0 { 0 } else { (length / h).ceil() as usize };
    let hh = if steps == 0 { h } else { length / steps as f64 };

    let sgn = if sign < 0.0 { -1.0 } else { 1.0 };
    let mut f = f0;
    let mut q = sgn * start.max(0.0).sqrt();
    let mut clamped: Option<f64> = multiple.iter().copied().find(|z| (f - z).abs() < CLAMP_TOL);
    let mut approach: Option<Deflated> = None;

    let mut xi = vec![0.0];
    let mut fs = vec![f];
    let mut qs = vec![q];
    let mut turning = Vec::new();
    if let Some(z) = clamped {
        fs[0] = z;
        qs[0] = 0.0;
    }

    for i in 0..steps {
        let x0 = i as f64 * hh;
        if let Some(z) = clamped {
            xi.push(x0 + hh);
            fs.push(z);
            qs.push(0.0);
            continue;
        }
        // switch only past the maximum of F, where √F is smooth up to the zero
        if approach.is_none() && eval_f_derivative(p, f, 1) * q < 0.0 {
            approach = next_multiple(f, q).map(|(z, m)| Deflated::new(p, z, m));
        }
        if let Some(d) = &approach {
            let z = d.z;
            let dir = (z - f).signum();
            f = rk4_first(d, f, dir, hh);
            if (z - f) * dir < 0.0 {
                f = z;
            }
            q = dir * d.eval(f).max(0.0).sqrt();
        } else {
            let (nf, nq) = rk4_second(p, f, q, hh);
            if q * nq < 0.0 {
                let (mut lo, mut hi) = (0.0, hh);
                for _ in 0..BISECTION_STEPS {
                    let mid = 0.5 * (lo + hi);
                    let (_, mq) = rk4_second(p, f, q, mid);
                    if mq * q > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                turning.push(x0 + 0.5 * (lo + hi));
            }
            f = nf;
            q = nq;
        }
        if let Some(z) = multiple.iter().copied().find(|z| (f - z).abs() < CLAMP_TOL) {
            clamped = Some(z);
            f = z;
            q = 0.0;
        }
        xi.push(x0 + hh);
        fs.push(f);
        qs.push(q);
    }
    let g = fs.iter().map(|&x| g_from_f(x, p.c, p.d1)).collect();
    Ok(Profile {
        xi,
        f: fs,
        f_prime: Some(qs),
        g: Some(g),
        turning_points: turning,
    })
}

/// Oracle profile over `[a, b]` through `f(xi0) = f0`; the part left of `xi0` is the
/// time-reversed run (`f′ → −f′`) mirrored onto the grid.
pub fn oracle_on_domain(p: &Params, f0: f64, sign: f64, domain: (f64, f64), xi0: f64, h: f64) -> Result<Profile, VerifyError> {
    let (a, b) = domain;
    if !(a <= xi0 && xi0 <= b) {
        return Err(VerifyError::InvalidStep);
    }
    let fwd = oracle_integrate(p, f0, sign, b - xi0, h)?;
    let back_len = xi0 - a;
    // one uniform grid: the backward run reuses the forward step
    let step = if fwd.len() > 1 { fwd.step() } else { h };
    let back_steps = if back_len == 0.0 { 0 } else { (back_len / step).round().max(1.0) as usize };
    let back = oracle_integrate(p, f0, -sign, back_steps as f64 * step, step)?;
    let mut xi = Vec::new();
    let mut f = Vec::new();
    let mut fp = Vec::new();
    let bq = back.f_prime.as_ref().expect("oracle stores f_prime");
    for i in (1..back.len()).rev() {
        xi.push(xi0 - back.xi[i]);
        f.push(back.f[i]);
        fp.push(-bq[i]);
    }
    let fq = fwd.f_prime.as_ref().expect("oracle stores f_prime");
    for i in 0..fwd.len() {
        xi.push(xi0 + fwd.xi[i]);
        f.push(fwd.f[i]);
        fp.push(fq[i]);
    }
    let g = f.iter().map(|&x| g_from_f(x, p.c, p.d1)).collect();
    let mut turning: Vec<f64> = back.turning_points.iter().map(|t| xi0 - t).collect();
    turning.extend(fwd.turning_points.iter().map(|t| xi0 + t));
    turning.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    Ok(Profile {
        xi,
        f,
        f_prime: Some(fp),
        g: Some(g),
        turning_points: turning,
    })
}

/// Four-point Lagrange interpolation of `b` at `x`, `None` outside its grid.
fn interpolate(b: &Profile, x: f64) -> Option<f64> {
    let n = b.len();
    if n == 0 {
        return None;
    }
    if n == 1 {
        return (x == b.xi[0]).then(|| b.f[0]);
    }
    let h = b.step();
    let t = (x - b.xi[0]) / h;
    let eps = 1e-9;
    if t < -eps || t > (n - 1) as f64 + eps {
        return None;
    }
    let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
    let i0 = i.saturating_sub(1).min(n.saturating_sub(4));
    let idx: Vec<usize> = (i0..(i0 + 4).min(n)).collect();
    let mut acc = 0.0;
    for &j in &idx {
        let mut w = 1.0;
        for &m in &idx {
            if m != j {
                w *= (x - b.xi[m]) / (b.xi[j] - b.xi[m]);
            }
        }
        acc += w * b.f[j];
    }
    Some(acc)
}

/// `(L∞, L²)` discrepancy of `b` against `a` on `a`'s grid; `b` is interpolated when the
/// grids differ. `L²` is the grid-weighted norm `√(h Σ d²)`.
pub fn compare_profiles(a: &Profile, b: &Profile) -> Result<(f64, f64), VerifyError> {
    let same = a.len() == b.len()
        && a.xi.iter().zip(&b.xi).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0));
    let h = if a.len() > 1 { a.step() } else { 1.0 };
    let mut linf = 0.0f64;
    let mut sq = 0.0;
    let mut count = 0;
    for (i, &x) in a.xi.iter().enumerate() {
        let other = if same { Some(b.f[i]) } else { interpolate(b, x) };
        if let Some(v) = other {
            let d = (a.f[i] - v).abs();
            linf = linf.max(d);
            sq += d * d;
            count += 1;
        }
    }
    if count == 0 {
        return Err(VerifyError::DisjointDomains);
    }
    Ok((linf, (h * sq).sqrt()))
}
