use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use super::analysis::CoefficientTable;
use super::rational::RationalRatio;
use crate::error::{check_range, Error, Result};
use crate::field::SpaceTimeField;
use crate::funcrep::{Func, RealFunction};

/// Coefficients of mode `k`: `a_k(t) = alpha cos(wt) + beta sin(wt)` multiplies
/// `cos(w theta)`, `b_k(t) = alpha_bar cos(wt) + beta_bar sin(wt)` multiplies
/// `sin(w theta)`, with `w = 2 k pi / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mode {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_bar: f64,
    pub beta_bar: f64,
    pub resonant: bool,
}

/// Truncated Fourier solution of the periodic problem.
#[derive(Debug, Clone, Serialize)]
pub struct FourierSolution {
    pub period: f64,
    pub t_final: f64,
    pub ratio: RationalRatio,
    #[serde(rename = "K")]
    pub cutoff: usize,
    pub alpha0: f64,
    pub beta0: f64,
    pub modes: Vec<Mode>,
    /// Majorant of the neglected modes (0 when not computed).
    pub tail: f64,
    /// `k^2`-weighted tail majorant, reported for information.
    pub tail_k2: f64,
    /// `sum |g_k - cos(w T) f_k|` over the resonant modes kept.
    pub resonant_mismatch: f64,
}

/// Mode synthesis from the data coefficients, keeping modes `1..=k_max`.
pub fn synth_coeffs(
    fc: &CoefficientTable,
    gc: &CoefficientTable,
    ratio: &RationalRatio,
    t_final: f64,
    period: f64,
    k_max: usize,
) -> Result<FourierSolution> {
    let available = fc.modes().min(gc.modes());
    if k_max > available {
        return Err(Error::InvalidInput(format!(
            "cutoff {k_max} exceeds the analyzed modes ({available})"
        )));
    }
    let mut modes = Vec::with_capacity(k_max);
    let mut mismatch = 0.0;
    for k in 1..=k_max {
        let phase = TAU * k as f64 * t_final / period;
        let (s, c) = phase.sin_cos();
        let resonant = ratio.is_resonant(k);
        let (beta, beta_bar) = if resonant {
            mismatch += (gc.cos[k] - c.round() * fc.cos[k]).abs() + (gc.sin[k] - c.round() * fc.sin[k]).abs();
            (0.0, 0.0)
        } else {
            ((gc.cos[k] - fc.cos[k] * c) / s, (gc.sin[k] - fc.sin[k] * c) / s)
        };
        modes.push(Mode {
            k,
            alpha: fc.cos[k],
            beta,
            alpha_bar: fc.sin[k],
            beta_bar,
            resonant,
        });
    }
    Ok(FourierSolution {
        period,
        t_final,
        ratio: *ratio,
        cutoff: k_max,
        alpha0: fc.cos[0],
        beta0: (gc.cos[0] - fc.cos[0]) / t_final,
        modes,
        tail: 0.0,
        tail_k2: 0.0,
        resonant_mismatch: mismatch,
    })
}

/// `d^n/ds^n [a cos(ws) + b sin(ws)]`.
fn harmonic(a: f64, b: f64, w: f64, s: f64, n: u8) -> f64 {
    let shift = FRAC_PI_2 * n as f64;
    let (sin, cos) = (w * s + shift).sin_cos();
    w.powi(n as i32) * (a * cos + b * sin)
}

impl FourierSolution {
    fn omega(&self, k: usize) -> f64 {
        TAU * k as f64 / self.period
    }

    fn series(&self, t: f64, theta: f64, dt: u8, dx: u8) -> f64 {
        let mean = match (dt, dx) {
            (0, 0) => 0.5 * (self.alpha0 + self.beta0 * t),
            (1, 0) => 0.5 * self.beta0,
            _ => 0.0,
        };
        self.modes.iter().fold(mean, |acc, m| {
            let w = self.omega(m.k);
            let a = harmonic(m.alpha, m.beta, w, t, dt);
            let b = harmonic(m.alpha_bar, m.beta_bar, w, t, dt);
            acc + harmonic(a, b, w, theta, dx)
        })
    }

    /// `v(theta) = y_t(0, theta)`.
    pub fn initial_velocity(&self) -> Func {
        let series = VelocitySeries {
            mean: 0.5 * self.beta0,
            terms: self
                .modes
                .iter()
                .map(|m| {
                    let w = self.omega(m.k);
                    (w, w * m.beta, w * m.beta_bar)
                })
                .collect(),
        };
        Func::new(series)
            .with_period(self.period)
            .expect("a trigonometric series is periodic")
    }

    /// Replace the (free) resonant pair of mode `k`.
    pub fn with_resonant_choice(&self, k: usize, beta: f64, beta_bar: f64) -> Result<FourierSolution> {
        let mut out = self.clone();
        let mode = out
            .modes
            .iter_mut()
            .find(|m| m.k == k)
            .ok_or_else(|| Error::InvalidInput(format!("mode {k} is beyond the cutoff")))?;
        if !mode.resonant {
            return Err(Error::InvalidInput(format!("mode {k} is not resonant")));
        }
        mode.beta = beta;
        mode.beta_bar = beta_bar;
        Ok(out)
    }

    pub fn terminal_error(&self, g: &Func, grid: &[f64]) -> Result<f64> {
        grid.iter().try_fold(0.0f64, |m, &x| Ok(m.max((self.series(self.t_final, x, 0, 0) - g.eval(x)?).abs())))
    }

    pub fn initial_error(&self, f: &Func, grid: &[f64]) -> Result<f64> {
        grid.iter().try_fold(0.0f64, |m, &x| Ok(m.max((self.series(0.0, x, 0, 0) - f.eval(x)?).abs())))
    }

    /// Smallest `|sin(2 k pi T / L)|` over the non-resonant modes kept.
    pub fn min_divisor(&self) -> f64 {
        self.modes
            .iter()
            .filter(|m| !m.resonant)
            .map(|m| (self.omega(m.k) * self.t_final).sin().abs())
            .fold(f64::INFINITY, f64::min)
    }
}

impl SpaceTimeField for FourierSolution {
    fn value(&self, t: f64, x: f64) -> Result<f64> {
        check_range("t", t, 0.0, self.t_final)?;
        Ok(self.series(t, x, 0, 0))
    }

    fn partial(&self, t: f64, x: f64, dt: u8, dx: u8) -> Result<f64> {
        check_range("t", t, 0.0, self.t_final)?;
        if dt + dx > 2 {
            return Err(Error::DerivativeOrder(dt + dx));
        }
        Ok(self.series(t, x, dt, dx))
    }

    fn horizon(&self) -> f64 {
        self.t_final
    }
}

#[derive(Debug, Clone)]
struct VelocitySeries {
    mean: f64,
    /// `(w, cos coefficient, sin coefficient)`
    terms: Vec<(f64, f64, f64)>,
}

impl RealFunction for VelocitySeries {
    fn eval(&self, x: f64) -> Result<f64> {
        self.deriv(x, 0)
    }

    fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        if order > 3 {
            return Err(Error::DerivativeOrder(order));
        }
        let base = if order == 0 { self.mean } else { 0.0 };
        Ok(self
            .terms
            .iter()
            .fold(base, |acc, &(w, a, b)| acc + harmonic(a, b, w, x, order)))
    }
}
