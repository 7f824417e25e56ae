//! Seed functions `u` on `[-T, T]` and their moment conditions.
//!
//! A seed anchors the velocity synthesis. It must satisfy
//!
//! ```text
//! int_{-T}^{T} u = 2 f~(0),   u(T) - u(-T) = 2 f~'(0),   u'(T-) - u'(-T+) = 2 f~''(0)
//! ```

use std::f64::consts::PI;

use serde::Serialize;

use super::ReducedTarget;
use crate::error::{Error, Result};
use crate::funcrep::{Func, PrimitiveTable, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedKind {
    Polynomial,
    Trigonometric,
    /// Polynomial seed plus `shift * cos(pi x / T)`; the added mode has zero
    /// mean, equal endpoint values and zero endpoint slopes, so the moments
    /// are unchanged.
    Compensated,
    /// A constant plus cubic bumps at both ends, nonnegative by construction.
    Clamped,
    User,
}

#[derive(Debug, Clone)]
enum Repr {
    /// `a x^2 + b x + c + shift * cos(pi x / T)`
    Quadratic { a: f64, b: f64, c: f64, shift: f64 },
    /// The two-branch trigonometric seed.
    Trig { h: f64, h_tilde: f64, c0: f64 },
    /// `m + rho (x - (T - delta))_+^3 + lambda ((delta - T) - x)_+^3`
    Clamped { m: f64, rho: f64, lambda: f64, delta: f64 },
    User(Func, PrimitiveTable),
}

/// A `C^1` seed on `[-T, T]`.
#[derive(Debug, Clone)]
pub struct SeedFunction {
    half_width: f64,
    kind: SeedKind,
    repr: Repr,
    quad: Quadrature,
}

/// Residuals of the three moment conditions.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SeedCheck {
    pub integral: f64,
    pub jump: f64,
    pub slope_jump: f64,
}

impl SeedCheck {
    pub fn max(&self) -> f64 {
        self.integral.abs().max(self.jump.abs()).max(self.slope_jump.abs())
    }
}

/// `u = f~''(0)/(2T) x^2 + f~'(0)/T x + f~(0)/T - f~''(0) T / 6`.
pub fn seed_polynomial(rt: &ReducedTarget, t_final: f64) -> SeedFunction {
    let t = t_final;
    SeedFunction {
        half_width: t,
        kind: SeedKind::Polynomial,
        repr: Repr::Quadratic {
            a: rt.c0 / (2.0 * t),
            b: rt.b0 / t,
            c: rt.a0 / t - rt.c0 * t / 6.0,
            shift: 0.0,
        },
        quad: Quadrature::default(),
    }
}

/// The piecewise trigonometric seed:
///
/// ```text
/// u(x) = h~ + h/2 + (h/2) sin(pi x / T + pi/2)   on [-T, 0)
/// u(x) = h~ + h + f~''(0) x^2 / T                on [0, T]
/// h  = 2 f~'(0) - T f~''(0)
/// h~ = f~(0)/T + 7/12 T f~''(0) - 3/2 f~'(0)
/// ```
pub fn seed_trig(rt: &ReducedTarget, t_final: f64) -> SeedFunction {
    let t = t_final;
    let h = 2.0 * rt.b0 - t * rt.c0;
    let h_tilde = rt.a0 / t + (7.0 / 12.0 * t * rt.c0 - 1.5 * rt.b0);
    SeedFunction {
        half_width: t,
        kind: SeedKind::Trigonometric,
        repr: Repr::Trig { h, h_tilde, c0: rt.c0 },
        quad: Quadrature::default(),
    }
}

impl SeedFunction {
    /// Wrap a user-supplied seed. It must satisfy the moment conditions for
    /// `rt` within `1e-8`; the slope condition uses one-sided 3-point
    /// differences.
    pub fn user(u: Func, rt: &ReducedTarget, t_final: f64) -> Result<Self> {
        let seed = SeedFunction {
            half_width: t_final,
            kind: SeedKind::User,
            repr: Repr::User(u.clone(), PrimitiveTable::new(u, -t_final, t_final, 1024)?),
            quad: Quadrature::default(),
        };
        let check = seed.check(rt, &Quadrature::default())?;
        if check.max() > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "user seed violates the moment conditions: {check:?}"
            )));
        }
        Ok(seed)
    }

    pub(crate) fn compensated(base: &SeedFunction, shift: f64) -> Option<SeedFunction> {
        match base.repr {
            Repr::Quadratic { a, b, c, .. } => Some(SeedFunction {
                half_width: base.half_width,
                kind: SeedKind::Compensated,
                repr: Repr::Quadratic { a, b, c, shift },
                quad: base.quad,
            }),
            _ => None,
        }
    }

    /// Admissible bump widths `[lo, hi]` of the clamped family for `rt`, or
    /// `None` when no member is nonnegative (this needs `f~''(0) > 0` and
    /// `f~(0) > 0`).
    pub fn clamped_range(rt: &ReducedTarget, t_final: f64) -> Option<(f64, f64)> {
        if !(rt.c0 > 0.0 && rt.a0 > 0.0) {
            return None;
        }
        let lo = 3.0 * rt.b0.abs() / rt.c0;
        let hi = (2.0 * t_final).min((12.0 * rt.a0 / rt.c0).sqrt());
        (lo <= hi && hi > 0.0).then_some((lo, hi))
    }

    /// Member of the clamped family with bump width `delta`. The moments of
    /// `rt` hold for every `delta`; nonnegativity needs `delta` in
    /// [`SeedFunction::clamped_range`].
    pub fn clamped(rt: &ReducedTarget, t_final: f64, delta: f64) -> Result<SeedFunction> {
        if !(delta > 0.0 && delta <= 2.0 * t_final) {
            return Err(Error::InvalidInput(format!("bump width {delta} outside (0, 2T]")));
        }
        let sum = 2.0 * rt.c0 / (3.0 * delta * delta);
        let diff = 2.0 * rt.b0 / (delta * delta * delta);
        Ok(SeedFunction {
            half_width: t_final,
            kind: SeedKind::Clamped,
            repr: Repr::Clamped {
                m: (2.0 * rt.a0 - rt.c0 * delta * delta / 6.0) / (2.0 * t_final),
                rho: 0.5 * (sum + diff),
                lambda: 0.5 * (sum - diff),
                delta,
            },
            quad: Quadrature::default(),
        })
    }

    pub fn kind(&self) -> SeedKind {
        self.kind
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Coefficients `(a, b, c, shift)` of a polynomial or compensated seed.
    pub fn quadratic_coefficients(&self) -> Option<(f64, f64, f64, f64)> {
        match self.repr {
            Repr::Quadratic { a, b, c, shift } => Some((a, b, c, shift)),
            _ => None,
        }
    }

    fn clamp(&self, x: f64) -> f64 {
        x.clamp(-self.half_width, self.half_width)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.deriv(x, 0)
    }

    /// Derivative of order `0..=2`. Arguments are clamped to `[-T, T]`.
    /// At the branch point of the trigonometric seed the right branch is used.
    pub fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        let t = self.half_width;
        let x = self.clamp(x);
        match &self.repr {
            Repr::Quadratic { a, b, c, shift } => {
                let w = PI / t;
                Ok(match order {
                    0 => a * x * x + b * x + c + shift * (w * x).cos(),
                    1 => 2.0 * a * x + b - shift * w * (w * x).sin(),
                    2 => 2.0 * a - shift * w * w * (w * x).cos(),
                    3 => shift * w * w * w * (w * x).sin(),
                    _ => return Err(Error::DerivativeOrder(order)),
                })
            }
            Repr::Trig { h, h_tilde, c0 } => {
                let w = PI / t;
                Ok(if x < 0.0 {
                    match order {
                        0 => h_tilde + h / 2.0 + h / 2.0 * (w * x).cos(),
                        1 => -h / 2.0 * w * (w * x).sin(),
                        2 => -h / 2.0 * w * w * (w * x).cos(),
                        3 => h / 2.0 * w * w * w * (w * x).sin(),
                        _ => return Err(Error::DerivativeOrder(order)),
                    }
                } else {
                    match order {
                        0 => h_tilde + h + c0 * x * x / t,
                        1 => 2.0 * c0 * x / t,
                        2 => 2.0 * c0 / t,
                        3 => 0.0,
                        _ => return Err(Error::DerivativeOrder(order)),
                    }
                })
            }
            Repr::Clamped { m, rho, lambda, delta } => {
                let r = (x - (t - delta)).max(0.0);
                let l = ((delta - t) - x).max(0.0);
                Ok(match order {
                    0 => m + rho * r * r * r + lambda * l * l * l,
                    1 => 3.0 * rho * r * r - 3.0 * lambda * l * l,
                    2 => 6.0 * rho * r + 6.0 * lambda * l,
                    3 => {
                        let right = if r > 0.0 { 6.0 * rho } else { 0.0 };
                        let left = if l > 0.0 { 6.0 * lambda } else { 0.0 };
                        right - left
                    }
                    _ => return Err(Error::DerivativeOrder(order)),
                })
            }
            Repr::User(u, _) => u.deriv(x, order),
        }
    }

    /// `int_{-T}^{x} u`.
    pub fn primitive(&self, x: f64) -> Result<f64> {
        let t = self.half_width;
        let x = self.clamp(x);
        match &self.repr {
            Repr::Quadratic { a, b, c, shift } => Ok(a * (x * x * x + t * t * t) / 3.0
                + b * (x * x - t * t) / 2.0
                + c * (x + t)
                + shift * t / PI * (PI * x / t).sin()),
            Repr::Trig { h, h_tilde, c0 } => {
                let left = |x: f64| (h_tilde + h / 2.0) * (x + t) + h / 2.0 * t / PI * (PI * x / t).sin();
                if x < 0.0 {
                    Ok(left(x))
                } else {
                    Ok(left(0.0) + (h_tilde + h) * x + c0 * x * x * x / (3.0 * t))
                }
            }
            Repr::Clamped { m, rho, lambda, delta } => {
                let r = (x - (t - delta)).max(0.0);
                let l = ((delta - t) - x).max(0.0);
                Ok(m * (x + t) + rho * r.powi(4) / 4.0 + lambda * (delta.powi(4) - l.powi(4)) / 4.0)
            }
            Repr::User(_, table) => table.eval(x),
        }
    }

    /// One-sided slopes `(u'(-T+), u'(T-))`.
    pub fn end_slopes(&self) -> Result<(f64, f64)> {
        let t = self.half_width;
        match &self.repr {
            Repr::User(u, _) => {
                // one-sided 3-point differences
                let h = 1e-5 * t;
                let left = (-3.0 * u.eval(-t)? + 4.0 * u.eval(-t + h)? - u.eval(-t + 2.0 * h)?) / (2.0 * h);
                let right = (3.0 * u.eval(t)? - 4.0 * u.eval(t - h)? + u.eval(t - 2.0 * h)?) / (2.0 * h);
                Ok((left, right))
            }
            _ => Ok((self.deriv(-t, 1)?, self.deriv(t, 1)?)),
        }
    }

    /// Residuals of the moment conditions, the integral evaluated by `q`.
    pub fn check(&self, rt: &ReducedTarget, q: &Quadrature) -> Result<SeedCheck> {
        let t = self.half_width;
        // split at 0 so the trig seed's branch point is a panel boundary
        let integral = q.integrate(|x| self.eval(x), -t, 0.0)? + q.integrate(|x| self.eval(x), 0.0, t)?;
        let (left, right) = self.end_slopes()?;
        Ok(SeedCheck {
            integral: integral - 2.0 * rt.a0,
            jump: self.eval(t)? - self.eval(-t)? - 2.0 * rt.b0,
            slope_jump: right - left - 2.0 * rt.c0,
        })
    }

    /// Minimum of `u` over `[-T, T]` (grid scan refined by golden section).
    pub fn minimum(&self) -> Result<f64> {
        let t = self.half_width;
        let n = 2000;
        let mut best = (f64::INFINITY, 0usize);
        for i in 0..=n {
            let x = -t + 2.0 * t * i as f64 / n as f64;
            let v = self.eval(x)?;
            if v < best.0 {
                best = (v, i);
            }
        }
        let step = 2.0 * t / n as f64;
        let centre = -t + step * best.1 as f64;
        let lo = (centre - step).max(-t);
        let hi = (centre + step).min(t);
        let refined = golden_min(|x| self.eval(x).unwrap_or(f64::INFINITY), lo, hi, 1e-12 * t.max(1.0));
        Ok(best.0.min(refined.1))
    }
}

/// Golden-section search for a minimum of a unimodal function on `[a, b]`.
/// Returns `(argmin, min)`.
pub(crate) fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(c, fc), (d, fd), (x, fx)]
        .into_iter()
        .fold((x, fx), |best, cand| if cand.1 < best.1 { cand } else { best })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(a0: f64, b0: f64, c0: f64) -> ReducedTarget {
        ReducedTarget::from_moments(a0, b0, c0)
    }

    #[test]
    fn polynomial_seed_examples() {
        let q = Quadrature::default();
        let u = seed_polynomial(&target(1.0, 0.0, 0.0), 1.0);
        assert_eq!(u.eval(0.3).unwrap(), 1.0);
        assert!(u.check(&target(1.0, 0.0, 0.0), &q).unwrap().max() < 1e-12);

        let rt = target(0.0, 1.0, 0.0);
        let u = seed_polynomial(&rt, 1.0);
        assert_eq!(u.eval(0.4).unwrap(), 0.4);
        assert_eq!(u.eval(1.0).unwrap() - u.eval(-1.0).unwrap(), 2.0);

        let rt = target(0.0, 0.0, 1.0);
        let u = seed_polynomial(&rt, 1.0);
        assert!((u.eval(0.5).unwrap() - (0.125 - 1.0 / 6.0)).abs() < 1e-15);
        let check = u.check(&rt, &q).unwrap();
        assert!(check.max() < 1e-12, "{check:?}");

        // (1,0,0) with general T gives the constant 1/T
        let u = seed_polynomial(&target(1.0, 0.0, 0.0), 2.5);
        assert!((u.eval(-1.0).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn trig_seed_examples() {
        let q = Quadrature::default();
        let u = seed_trig(&target(0.0, 0.0, 0.0), 1.0);
        for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            assert_eq!(u.eval(x).unwrap(), 0.0);
        }
        let rt = target(1.0, 0.0, 0.0);
        assert!(seed_trig(&rt, 1.0).check(&rt, &q).unwrap().max() < 1e-8);
        // C^1 across the branch point
        let rt = target(0.3, -0.7, 0.9);
        let u = seed_trig(&rt, 1.3);
        let eps = 1e-9;
        assert!((u.eval(-eps).unwrap() - u.eval(0.0).unwrap()).abs() < 1e-8);
        assert!((u.deriv(-eps, 1).unwrap() - u.deriv(0.0, 1).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn primitives_match_quadrature() {
        let q = Quadrature::default();
        let rt = target(0.4, -1.1, 2.3);
        let clamped = SeedFunction::clamped(&rt, 0.8, 0.5).unwrap();
        for seed in [seed_polynomial(&rt, 0.8), seed_trig(&rt, 0.8), clamped] {
            for x in [-0.8, -0.3, 0.0, 0.2, 0.8] {
                let num = q.integrate(|s| seed.eval(s), -0.8, x).unwrap();
                assert!((seed.primitive(x).unwrap() - num).abs() < 1e-10, "{:?} at {x}", seed.kind());
            }
        }
    }

    #[test]
    fn clamped_family() {
        let q = Quadrature::default();
        let rt = target(0.05, 0.02, 2.0);
        let (lo, hi) = SeedFunction::clamped_range(&rt, 1.2).unwrap();
        assert!((lo - 0.03).abs() < 1e-15 && (hi - 0.3f64.sqrt()).abs() < 1e-15);
        for delta in [lo, 0.5 * (lo + hi), hi, 2.0] {
            let u = SeedFunction::clamped(&rt, 1.2, delta).unwrap();
            assert!(u.check(&rt, &q).unwrap().max() < 1e-9, "delta = {delta}");
            if delta <= hi {
                assert!(u.minimum().unwrap() >= -1e-15);
            }
            // C^2 across both knots
            for knot in [1.2 - delta, delta - 1.2] {
                for order in 0..3 {
                    let jump = u.deriv(knot + 1e-12, order).unwrap() - u.deriv(knot - 1e-12, order).unwrap();
                    assert!(jump.abs() < 1e-8, "order {order} at {knot}: {jump}");
                }
            }
        }
        assert!(SeedFunction::clamped_range(&target(0.01, 5.0, 0.0), 1.0).is_none());
        assert!(SeedFunction::clamped_range(&target(0.01, 5.0, 1.0), 1.0).is_none());
        assert!(SeedFunction::clamped(&rt, 1.0, 2.5).is_err());
    }

    #[test]
    fn user_seed_validation() {
        let rt = target(0.0, 1.0, 0.0);
        let ok = SeedFunction::user(Func::parse("x").unwrap(), &rt, 1.0).unwrap();
        assert_eq!(ok.kind(), SeedKind::User);
        // x + sin(pi x) has the same moments (zero mean, sin(±pi)=0, equal end slopes)
        assert!(SeedFunction::user(Func::parse("x + sin(pi*x)").unwrap(), &rt, 1.0).is_ok());
        assert!(SeedFunction::user(Func::parse("2*x").unwrap(), &rt, 1.0).is_err());
    }
}
