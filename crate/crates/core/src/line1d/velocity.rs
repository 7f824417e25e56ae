//! Piecewise velocity synthesized from a seed and the reduced target.
//!
//! On the piece `n` (the interval `[(2n-1)T, (2n+1)T)` for `n >= 1`, its
//! mirror image for `n <= -1`, and `[-T, T)` for `n = 0`):
//!
//! ```text
//! n >= 0:  v(x) = u(x - 2nT) + 2 sum_{i=1}^{n} f~'(x - (2i-1)T)
//! n <  0:  v(x) = u(x + 2mT) - 2 sum_{i=1}^{m} f~'(x + (2i-1)T),   m = -n
//! ```

use serde::Serialize;

use super::seed::SeedFunction;
use super::ReducedTarget;
use crate::error::{Error, Result};
use crate::funcrep::RealFunction;

#[derive(Debug, Clone)]
pub struct Velocity {
    target: ReducedTarget,
    seed: SeedFunction,
    half_width: f64,
}

/// Largest jumps of `v` and `v'` across the seams `x = ±(2k-1)T`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeamReport {
    pub seams: usize,
    pub value_jump: f64,
    pub slope_jump: f64,
}

/// `v` for the given seed, normalized to unit speed.
pub fn synth_velocity(seed: &SeedFunction, rt: &ReducedTarget, t_final: f64) -> Velocity {
    Velocity {
        target: rt.clone(),
        seed: seed.clone(),
        half_width: t_final,
    }
}

impl Velocity {
    pub fn seed(&self) -> &SeedFunction {
        &self.seed
    }

    pub fn target(&self) -> &ReducedTarget {
        &self.target
    }

    /// Signed index of the piece containing `x`.
    pub fn piece_index(&self, x: f64) -> i64 {
        let t = self.half_width;
        let n = ((x.abs() + t) / (2.0 * t)).floor() as i64;
        if x >= 0.0 {
            n
        } else {
            -n
        }
    }

    /// Derivative of order `0..=2` of the formula of piece `n`, evaluated at
    /// `x` whether or not `x` lies in that piece (used for one-sided limits).
    pub fn piece_deriv(&self, x: f64, n: i64, order: u8) -> Result<f64> {
        let t = self.half_width;
        let ft = &self.target.ftilde;
        let m = n.unsigned_abs() as i64;
        let sign = if n >= 0 { 1.0 } else { -1.0 };
        let mut acc = self.seed.deriv(x - sign * 2.0 * m as f64 * t, order)?;
        for i in 1..=m {
            acc += sign * 2.0 * ft.deriv(x - sign * (2 * i - 1) as f64 * t, order + 1)?;
        }
        Ok(acc)
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.piece_deriv(x, self.piece_index(x), 0)
    }

    pub fn derivative(&self, x: f64, order: u8) -> Result<f64> {
        if order > 2 {
            return Err(Error::DerivativeOrder(order));
        }
        self.piece_deriv(x, self.piece_index(x), order)
    }

    /// `int_0^x v`, in closed form from the seed primitive and `f~`.
    pub fn primitive(&self, x: f64) -> Result<f64> {
        let t = self.half_width;
        let ft = &self.target.ftilde;
        let seed = &self.seed;
        let u0 = seed.primitive(0.0)?;
        let ut = seed.primitive(t)?;
        let n = self.piece_index(x);
        if n == 0 {
            return Ok(seed.primitive(x)? - u0);
        }
        let f0 = ft.eval(0.0)?;
        let m = n.unsigned_abs() as i64;
        if n > 0 {
            // s = int_0^{(2m-1)T} v
            let mut s = ut - u0;
            for k in 1..m {
                s += ut + 2.0 * (ft.eval(2.0 * k as f64 * t)? - f0);
            }
            let mut acc = s + seed.primitive(x - 2.0 * m as f64 * t)?;
            for i in 1..=m {
                acc += 2.0 * (ft.eval(x - (2 * i - 1) as f64 * t)? - ft.eval((2 * m - 2 * i) as f64 * t)?);
            }
            Ok(acc)
        } else {
            // r = -int_{-(2m-1)T}^0 v
            let mut r = -u0;
            for k in 1..m {
                r += -ut + 2.0 * (f0 - ft.eval(-2.0 * k as f64 * t)?);
            }
            let mut acc = r - ut + seed.primitive(x + 2.0 * m as f64 * t)?;
            for i in 1..=m {
                acc += 2.0 * (ft.eval((2 * i - 2 * m) as f64 * t)? - ft.eval(x + (2 * i - 1) as f64 * t)?);
            }
            Ok(acc)
        }
    }

    /// `int_a^b v`.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.primitive(b)? - self.primitive(a)?)
    }

    /// Jumps at the first `count` seams on each side of the origin.
    pub fn seam_report(&self, count: usize) -> Result<SeamReport> {
        let t = self.half_width;
        let mut value_jump: f64 = 0.0;
        let mut slope_jump: f64 = 0.0;
        for k in 1..=count as i64 {
            let x = (2 * k - 1) as f64 * t;
            for (x, inner, outer) in [(x, k - 1, k), (-x, -(k - 1), -k)] {
                value_jump = value_jump.max((self.piece_deriv(x, outer, 0)? - self.piece_deriv(x, inner, 0)?).abs());
                slope_jump = slope_jump.max((self.piece_deriv(x, outer, 1)? - self.piece_deriv(x, inner, 1)?).abs());
            }
        }
        Ok(SeamReport {
            seams: 2 * count,
            value_jump,
            slope_jump,
        })
    }
}

impl RealFunction for Velocity {
    fn eval(&self, x: f64) -> Result<f64> {
        self.value(x)
    }

    fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        self.derivative(x, order)
    }
}
