use serde::Serialize;

use crate::error::{Error, Result};

/// Largest denominator considered when recognizing `2T/L` as a fraction.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

/// Relative tolerance for accepting a convergent.
pub const RATIO_TOLERANCE: f64 = 1e-12;

/// `2T/L = p/q` in lowest terms together with the small-divisor bound
/// `Cs = sin(pi/q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RationalRatio {
    pub p: i64,
    pub q: i64,
    pub cs: f64,
}

impl RationalRatio {
    /// Mode `k` is resonant when `2kT/L` is an integer, i.e. `q | k`.
    pub fn is_resonant(&self, k: usize) -> bool {
        k as i64 % self.q == 0
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

/// Continued-fraction reconstruction of a positive `x` as `p/q` with
/// `q <= MAX_DENOMINATOR` and relative error `<= RATIO_TOLERANCE`.
pub fn recognize(x: f64) -> Result<(i64, i64)> {
    let irrational = Error::IrrationalRatio {
        value: x,
        max_denominator: MAX_DENOMINATOR,
    };
    if !(x > 0.0 && x.is_finite()) {
        return Err(irrational);
    }
    // convergents h/k via the standard recurrences
    let (mut h_prev, mut h) = (1i128, x.floor() as i128);
    let (mut k_prev, mut k) = (0i128, 1i128);
    let mut rest = x - x.floor();
    loop {
        if ((h as f64 / k as f64) - x).abs() <= RATIO_TOLERANCE * x {
            return Ok((h as i64, k as i64));
        }
        if rest.abs() < 1e-300 {
            return Err(irrational);
        }
        let inv = 1.0 / rest;
        let a = inv.floor();
        rest = inv - a;
        let a = a as i128;
        let (h_next, k_next) = (a * h + h_prev, a * k + k_prev);
        if k_next > MAX_DENOMINATOR as i128 {
            return Err(irrational);
        }
        (h_prev, h, k_prev, k) = (h, h_next, k, k_next);
    }
}

/// Recognize `2T/L` and require `q >= 2`.
pub fn rationality_check(t_final: f64, period: f64) -> Result<RationalRatio> {
    if !(t_final > 0.0 && period > 0.0) {
        return Err(Error::InvalidInput(format!(
            "T and L must be positive, got T = {t_final}, L = {period}"
        )));
    }
    let (p, q) = recognize(2.0 * t_final / period)?;
    if q == 1 {
        return Err(Error::ResonantRatio { ratio: p, residual: 0.0 });
    }
    Ok(RationalRatio {
        p,
        q,
        cs: (std::f64::consts::PI / q as f64).sin(),
    })
}
