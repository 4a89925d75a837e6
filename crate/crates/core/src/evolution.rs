//! Pseudo-spectral time evolution of the ℓ=2 system on a periodic domain.

use crate::reduction::g_from_f;
use crate::solutions::{evaluate, ClosedFormSolution};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;
use thiserror::Error;

/// Safety factor in the default step bound `dt ≤ CFL_FACTOR·(L/n)³`.
pub const CFL_FACTOR: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvolutionError {
    #[error("grid size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid time step")]
    InvalidStep,
    #[error("blow-up detected at t = {0}")]
    BlowUp(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
    /// Domain length; the grid is `x_j = x₀ + jL/n`.
    pub length: f64,
}

impl EvolutionState {
    pub fn new(length: f64, x0: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self, EvolutionError> {
        let n = u.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(EvolutionError::NotPowerOfTwo(n));
        }
        if v.len() != n {
            return Err(EvolutionError::InvalidState("u and v lengths differ".into()));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(EvolutionError::InvalidState(format!("length {length}")));
        }
        if !u.iter().chain(&v).all(|x| x.is_finite()) {
            return Err(EvolutionError::InvalidState("non-finite values".into()));
        }
        let x = (0..n).map(|j| x0 + length * j as f64 / n as f64).collect();
        Ok(EvolutionState { x, u, v, t: 0.0, length })
    }

    /// Traveling pair of `s` at `t = 0` on `[−L/2, L/2)`; `ξ` is wrapped periodically.
    pub fn from_solution(s: &ClosedFormSolution, length: f64, n: usize) -> Result<Self, EvolutionError> {
        let (u, v) = sample_pair(s, length, n, 0.0)?;
        EvolutionState::new(length, -0.5 * length, u, v)
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn mean_u(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.n() as f64
    }
}

fn wrap(xi: f64, length: f64) -> f64 {
    (xi + 0.5 * length).rem_euclid(length) - 0.5 * length
}

/// `(u, v)` of the traveling pair on `[−L/2, L/2)` at time `t`.
pub fn sample_pair(s: &ClosedFormSolution, length: f64, n: usize, t: f64) -> Result<(Vec<f64>, Vec<f64>), EvolutionError> {
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for j in 0..n {
        let x = -0.5 * length + length * j as f64 / n as f64;
        let xi = s.xi0 + wrap(x - s.speed * t - s.xi0, length);
        let (f, _) = evaluate(s, xi).map_err(|e| EvolutionError::InvalidState(e.to_string()))?;
        u.push(f);
        v.push(g_from_f(f, s.params.c, s.params.d1));
    }
    Ok((u, v))
}

/// FFT plans and wavenumbers for one grid.
pub struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    k: Vec<f64>,
    keep: Vec<bool>,
}

impl Spectral {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let k = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * m / length
            })
            .collect();
        // 2/3 rule: retain |m| ≤ n/3
        let keep = (0..n).map(|j| j.min(n - j) <= n / 3).collect();
        Spectral {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            k,
            keep,
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, mut hat: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut hat);
        let s = 1.0 / self.n as f64;
        hat.iter().map(|z| z.re * s).collect()
    }

    /// `(ik)^order` applied to a spectrum; the Nyquist mode is dropped for odd orders.
    fn differentiate(&self, hat: &[Complex64], order: u32) -> Vec<Complex64> {
        hat.iter()
            .enumerate()
            .map(|(j, &z)| {
                if order % 2 == 1 && 2 * j == self.n {
                    Complex64::new(0.0, 0.0)
                } else {
                    z * Complex64::new(0.0, self.k[j]).powu(order)
                }
            })
            .collect()
    }

    fn dealias(&self, hat: &mut [Complex64]) {
        for (z, &keep) in hat.iter_mut().zip(&self.keep) {
            if !keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Spectral derivative of periodic samples.
    pub fn derivative(&self, x: &[f64], order: u32) -> Vec<f64> {
        let hat = self.forward(x);
        self.inverse(self.differentiate(&hat, order))
    }

    /// `(u_t, v_t)`. Inputs and both tendencies are 2/3-dealiased; `u_t` is formed as
    /// `∂ₓ(¾u² + v)`, so its mean vanishes exactly.
    pub fn rhs(&self, u: &[f64], v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut us = self.forward(u);
        let mut vs = self.forward(v);
        self.dealias(&mut us);
        self.dealias(&mut vs);
        let uf = self.inverse(us.clone());
        let vf = self.inverse(vs.clone());
        let ux = self.inverse(self.differentiate(&us, 1));
        let uxxx = self.inverse(self.differentiate(&us, 3));
        let vx = self.inverse(self.differentiate(&vs, 1));

        let flux: Vec<f64> = uf.iter().zip(&vf).map(|(a, b)| 0.75 * a * a + b).collect();
        let mut fs = self.forward(&flux);
        self.dealias(&mut fs);
        let du = self.inverse(self.differentiate(&fs, 1));

        let rv: Vec<f64> = (0..self.n)
            .map(|j| -0.25 * uxxx[j] + vf[j] * ux[j] + 0.5 * uf[j] * vx[j])
            .collect();
        let mut rs = self.forward(&rv);
        self.dealias(&mut rs);
        (du, self.inverse(rs))
    }
}

/// `(u_t, v_t)` for one state.
pub fn kb_rhs(state: &EvolutionState) -> (Vec<f64>, Vec<f64>) {
    Spectral::new(state.n(), state.length).rhs(&state.u, &state.v)
}

pub fn cfl_dt_max(length: f64, n: usize) -> f64 {
    CFL_FACTOR * (length / n as f64).powi(3)
}

/// Largest step not above `dt_max` that divides `t_end` evenly.
pub fn default_dt(length: f64, n: usize, t_end: f64) -> f64 {
    let steps = (t_end.abs() / cfl_dt_max(length, n)).ceil().max(1.0);
    t_end.abs() / steps
}

/// Classic RK4 over a duration `t_end ≥ 0`. The direction follows the sign of `dt`;
/// the step is shrunk so a whole number of steps covers `t_end`.
pub fn evolve(state0: &EvolutionState, dt: f64, t_end: f64) -> Result<EvolutionState, EvolutionError> {
    if dt == 0.0 || !dt.is_finite() || !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(EvolutionError::InvalidStep);
    }
    let steps = (t_end / dt.abs()).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { dt.signum() * t_end / steps as f64 };
    let sp = Spectral::new(state0.n(), state0.length);
    let mut st = state0.clone();
    let n = st.n();
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    for _ in 0..steps {
        let (k1u, k1v) = sp.rhs(&st.u, &st.v);
        let (k2u, k2v) = sp.rhs(&axpy(&st.u, 0.5 * h, &k1u), &axpy(&st.v, 0.5 * h, &k1v));
        let (k3u, k3v) = sp.rhs(&axpy(&st.u, 0.5 * h, &k2u), &axpy(&st.v, 0.5 * h, &k2v));
        let (k4u, k4v) = sp.rhs(&axpy(&st.u, h, &k3u), &axpy(&st.v, h, &k3v));
        for j in 0..n {
            st.u[j] += h / 6.0 * (k1u[j] + 2.0 * k2u[j] + 2.0 * k3u[j] + k4u[j]);
            st.v[j] += h / 6.0 * (k1v[j] + 2.0 * k2v[j] + 2.0 * k3v[j] + k4v[j]);
        }
        st.t += h;
        if !st.u.iter().chain(&st.v).all(|x| x.is_finite()) {
            return Err(EvolutionError::BlowUp(st.t));
        }
    }
    Ok(st)
}

/// `ω` of the two branches `e^{i(kx + ωt)}` of the system linearized at `(u₀, v₀)`:
/// `ω = k(u₀ ± √(u₀²/4 + k²/4 + v₀))`. Complex when the radicand is negative.
pub fn linear_frequencies(u0: f64, v0: f64, k: f64) -> [Complex64; 2] {
    let rad = Complex64::new(0.25 * u0 * u0 + 0.25 * k * k + v0, 0.0).sqrt();
    [k * (u0 + rad), k * (u0 - rad)]
}

/// Result of evolving a traveling wave and comparing with its exact translate.
#[derive(Debug, Clone, PartialEq)]
pub struct Permanence {
    pub final_state: EvolutionState,
    pub linf_u: f64,
    pub linf_v: f64,
    pub mean_drift: f64,
}

pub fn permanence(s: &ClosedFormSolution, length: f64, n: usize, dt: f64, t_end: f64) -> Result<Permanence, EvolutionError> {
    let st0 = EvolutionState::from_solution(s, length, n)?;
    let st = evolve(&st0, dt, t_end)?;
    let (ue, ve) = sample_pair(s, length, n, st.t)?;
    let linf = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(Permanence {
        linf_u: linf(&st.u, &ue),
        linf_v: linf(&st.v, &ve),
        mean_drift: (st.mean_u() - st0.mean_u()).abs(),
        final_state: st,
    })
}
