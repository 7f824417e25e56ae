use std::fmt;
use std::sync::Arc;

use super::expr::{self, Expr};
use super::quadrature::Quadrature;
use crate::error::{Error, Result};

/// A real function of one real variable with derivatives up to order 3.
///
/// Implementors must be deterministic and free of interior mutability so
/// that a [`Func`] can be shared across threads.
pub trait RealFunction: Send + Sync + fmt::Debug {
    fn eval(&self, x: f64) -> Result<f64>;

    /// Derivative of order `0..=3`; order 0 is the value.
    fn deriv(&self, x: f64, order: u8) -> Result<f64>;

    /// Closed interval on which the function is defined.
    fn domain(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

/// Shared, immutable handle to a scalar data function.
#[derive(Clone)]
pub struct Func {
    inner: Arc<dyn RealFunction>,
    period: Option<f64>,
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Func")
            .field("inner", &self.inner)
            .field("period", &self.period)
            .finish()
    }
}

impl Func {
    pub fn new(inner: impl RealFunction + 'static) -> Self {
        Func {
            inner: Arc::new(inner),
            period: None,
        }
    }

    /// Parse an expression in one variable (`x`, `t`, `s` or `theta`).
    pub fn parse(src: &str) -> Result<Self> {
        Ok(Func::new(ExprFn::new(expr::parse_scalar(src)?)))
    }

    pub fn constant(c: f64) -> Self {
        Func::new(ExprFn::new(Expr::Const(c)))
    }

    pub fn from_expr(e: Expr) -> Self {
        Func::new(ExprFn::new(e))
    }

    pub fn zero() -> Self {
        Func::constant(0.0)
    }

    pub fn period(&self) -> Option<f64> {
        self.period
    }

    pub fn domain(&self) -> (f64, f64) {
        if self.period.is_some() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            self.inner.domain()
        }
    }

    /// Declare `period`, checking `|f(x) - f(x + period)|` at 100 points of
    /// one period against `1e-9 * (1 + max|f|)`.
    pub fn with_period(self, period: f64) -> Result<Self> {
        self.with_period_tol(period, 1e-9)
    }

    pub fn with_period_tol(self, period: f64, rel_tol: f64) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("period must be positive, got {period}")));
        }
        let (lo, hi) = self.inner.domain();
        let start = if lo.is_finite() { lo } else { 0.0 };
        if hi.is_finite() && start + period > hi + 1e-9 * period {
            return Err(Error::InvalidInput(format!(
                "sampled domain [{lo}, {hi}] is shorter than the period {period}"
            )));
        }
        let n = 100;
        let mut values = Vec::with_capacity(n + 1);
        let mut defects = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let x = start + period * j as f64 / n as f64;
            let fx = self.inner.eval(x)?;
            values.push(fx.abs());
            let shifted = x + period;
            if shifted <= hi + 1e-12 * period.max(1.0) {
                let fy = self.inner.eval(shifted.min(hi))?;
                defects.push((x, (fx - fy).abs()));
            }
        }
        if hi.is_finite() {
            // sampled: first and last sample of the period must agree
            let a = self.inner.eval(start)?;
            let b = self.inner.eval((start + period).min(hi))?;
            defects.push((start, (a - b).abs()));
        }
        let scale = 1.0 + values.iter().cloned().fold(0.0, f64::max);
        if let Some(&(x, defect)) = defects.iter().find(|(_, d)| *d > rel_tol * scale) {
            return Err(Error::NotPeriodic { period, x, defect });
        }
        Ok(Func {
            inner: self.inner,
            period: Some(period),
        })
    }

    fn wrap(&self, x: f64) -> f64 {
        match self.period {
            Some(p) => {
                let (lo, hi) = self.inner.domain();
                if lo.is_finite() && (x < lo || x > hi) {
                    lo + (x - lo).rem_euclid(p)
                } else {
                    x
                }
            }
            None => x,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.inner.eval(self.wrap(x))
    }

    /// Derivative of order 1, 2 or 3 (order 0 is accepted and means the value).
    pub fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        if order > 3 {
            return Err(Error::DerivativeOrder(order));
        }
        self.inner.deriv(self.wrap(x), order)
    }

    pub fn integrate(&self, a: f64, b: f64, q: &Quadrature) -> Result<f64> {
        q.integrate(|x| self.eval(x), a, b)
    }

    /// `x -> self(scale * x + shift)`.
    pub fn compose_affine(&self, scale: f64, shift: f64) -> Func {
        Func::new(Affine {
            inner: self.clone(),
            scale,
            shift,
        })
    }

    /// `sum_i coef_i * f_i`.
    pub fn linear_combination(terms: Vec<(f64, Func)>) -> Func {
        Func::new(LinearCombination { terms })
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &Func, b: f64) -> Func {
        Func::linear_combination(vec![(a, self.clone()), (b, other.clone())])
    }

    /// `x -> exp(-self(x))`, with derivatives by the chain rule.
    pub fn exp_neg(&self) -> Func {
        Func::new(ExpNeg { inner: self.clone() })
    }

    /// Sample values on a uniform grid (convenience for diagnostics).
    pub fn sample(&self, xs: &[f64]) -> Result<Vec<f64>> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Expression-backed function with its first three symbolic derivatives
/// precomputed.
#[derive(Debug)]
pub struct ExprFn {
    derivs: [Expr; 4],
}

impl ExprFn {
    pub fn new(e: Expr) -> Self {
        let d1 = e.derivative(0);
        let d2 = d1.derivative(0);
        let d3 = d2.derivative(0);
        ExprFn {
            derivs: [e, d1, d2, d3],
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.derivs[0]
    }
}

impl RealFunction for ExprFn {
    fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.derivs[0].eval(&[x]))
    }

    fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        self.derivs
            .get(order as usize)
            .map(|e| e.eval(&[x]))
            .ok_or(Error::DerivativeOrder(order))
    }
}

#[derive(Debug)]
struct Affine {
    inner: Func,
    scale: f64,
    shift: f64,
}

impl RealFunction for Affine {
    fn eval(&self, x: f64) -> Result<f64> {
        self.inner.eval(self.scale * x + self.shift)
    }

    fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        Ok(self.inner.deriv(self.scale * x + self.shift, order)? * self.scale.powi(order as i32))
    }

    fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.domain();
        if self.scale == 0.0 {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        let a = (lo - self.shift) / self.scale;
        let b = (hi - self.shift) / self.scale;
        (a.min(b), a.max(b))
    }
}

#[derive(Debug)]
struct LinearCombination {
    terms: Vec<(f64, Func)>,
}

impl RealFunction for LinearCombination {
    fn eval(&self, x: f64) -> Result<f64> {
        self.terms
            .iter()
            .try_fold(0.0, |acc, (c, f)| Ok(acc + c * f.eval(x)?))
    }

    fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        self.terms
            .iter()
            .try_fold(0.0, |acc, (c, f)| Ok(acc + c * f.deriv(x, order)?))
    }

    fn domain(&self) -> (f64, f64) {
        self.terms.iter().fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), (_, f)| {
            let (a, b) = f.domain();
            (lo.max(a), hi.min(b))
        })
    }
}

#[derive(Debug)]
struct ExpNeg {
    inner: Func,
}

impl RealFunction for ExpNeg {
    fn eval(&self, x: f64) -> Result<f64> {
        Ok((-self.inner.eval(x)?).exp())
    }

    fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        let z = self.eval(x)?;
        if order == 0 {
            return Ok(z);
        }
        let d1 = self.inner.deriv(x, 1)?;
        match order {
            1 => Ok(-d1 * z),
            2 => {
                let d2 = self.inner.deriv(x, 2)?;
                Ok((d1 * d1 - d2) * z)
            }
            3 => {
                let d2 = self.inner.deriv(x, 2)?;
                let d3 = self.inner.deriv(x, 3)?;
                Ok((-d1 * d1 * d1 + 3.0 * d1 * d2 - d3) * z)
            }
            _ => Err(Error::DerivativeOrder(order)),
        }
    }

    fn domain(&self) -> (f64, f64) {
        self.inner.domain()
    }
}

/// Wraps a plain closure; derivatives by central differences.
///
/// Used for functions that only exist numerically (e.g. a spherical mean)
/// when no closed-form derivative is available.
pub struct ClosureFn<F> {
    f: F,
    step: f64,
}

impl<F> ClosureFn<F> {
    pub fn new(f: F, step: f64) -> Self {
        ClosureFn { f, step }
    }
}

impl<F> fmt::Debug for ClosureFn<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosureFn").field("step", &self.step).finish()
    }
}

impl<F> RealFunction for ClosureFn<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn eval(&self, x: f64) -> Result<f64> {
        Ok((self.f)(x))
    }

    fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        let h = self.step;
        let f = &self.f;
        Ok(match order {
            0 => f(x),
            1 => (f(x + h) - f(x - h)) / (2.0 * h),
            2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
            3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
            _ => return Err(Error::DerivativeOrder(order)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn expression_examples() {
        let f = Func::parse("sin(2*pi*x)").unwrap();
        assert!((f.eval(0.25).unwrap() - 1.0).abs() < 1e-15);
        let f = Func::parse("x^2 - 1").unwrap();
        assert_eq!(f.eval(3.0).unwrap(), 8.0);
        let f = Func::parse("x^3").unwrap();
        assert_eq!(f.deriv(2.0, 2).unwrap(), 12.0);
        let f = Func::parse("sin(x)").unwrap();
        assert_eq!(f.deriv(0.0, 1).unwrap(), 1.0);
        assert!(matches!(f.deriv(0.0, 4), Err(Error::DerivativeOrder(4))));
    }

    #[test]
    fn exp_matches_series_oracle() {
        // e^{-2} from its Taylor series, summed to convergence
        let mut term = 1.0_f64;
        let mut sum = 1.0_f64;
        for n in 1..60 {
            term *= -2.0 / n as f64;
            sum += term;
        }
        let f = Func::parse("exp(-x)").unwrap();
        assert!((f.eval(2.0).unwrap() - sum).abs() < 1e-15);
        assert!((sum - 0.1353352832366127).abs() < 1e-15);
    }

    #[test]
    fn affine_and_combination() {
        let f = Func::parse("x^2").unwrap();
        let g = f.compose_affine(2.0, 1.0); // (2x + 1)^2
        assert_eq!(g.eval(1.0).unwrap(), 9.0);
        assert_eq!(g.deriv(1.0, 1).unwrap(), 12.0);
        assert_eq!(g.deriv(1.0, 2).unwrap(), 8.0);
        let h = f.combine(1.0, &Func::constant(3.0), -1.0);
        assert_eq!(h.eval(2.0).unwrap(), 1.0);
    }

    #[test]
    fn exp_neg_chain_rule() {
        let f = Func::parse("sin(x) + x^2").unwrap();
        let z = f.exp_neg();
        let direct = Func::parse("exp(-(sin(x) + x^2))").unwrap();
        for &x in &[-1.3, 0.0, 0.4, 2.2] {
            for order in 0..=3 {
                let a = z.deriv(x, order).unwrap();
                let b = direct.deriv(x, order).unwrap();
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "order {order} at {x}");
            }
        }
    }

    #[test]
    fn declared_period() {
        let f = Func::parse("sin(2*pi*x/3)").unwrap().with_period(3.0).unwrap();
        assert_eq!(f.period(), Some(3.0));
        let err = Func::parse("x").unwrap().with_period(1.0).unwrap_err();
        assert!(matches!(err, Error::NotPeriodic { .. }));
    }

    proptest! {
        #[test]
        fn first_derivative_matches_central_difference(
            a in -2.0f64..2.0, b in 0.2f64..3.0, c in -1.0f64..1.0, x in -3.0f64..3.0
        ) {
            let src = format!("{a}*sin({b}*x + {c}) + {c}*x^3 - exp({c}*x)");
            let f = Func::parse(&src).unwrap();
            let h = 1e-5;
            let fd = (f.eval(x + h).unwrap() - f.eval(x - h).unwrap()) / (2.0 * h);
            let exact = f.deriv(x, 1).unwrap();
            let scale = exact.abs().max(1.0);
            prop_assert!((fd - exact).abs() <= 1e-6 * scale, "fd {} exact {}", fd, exact);
        }

        #[test]
        fn declared_period_holds_at_random_points(k in 1u32..5, amp in 0.1f64..5.0, x in -50.0f64..50.0) {
            let l = 2.5;
            let src = format!("{amp}*cos(2*pi*{k}*x/{l}) + 1");
            let f = Func::parse(&src).unwrap().with_period(l).unwrap();
            let scale = 1.0 + amp + 1.0;
            prop_assert!((f.eval(x).unwrap() - f.eval(x + l).unwrap()).abs() <= 1e-9 * scale);
        }

        #[test]
        fn evaluation_is_bitwise_deterministic(x in -10.0f64..10.0) {
            let f = Func::parse("exp(sin(x)) / (1 + x^2)").unwrap();
            prop_assert_eq!(f.eval(x).unwrap().to_bits(), f.eval(x).unwrap().to_bits());
        }
    }
}
