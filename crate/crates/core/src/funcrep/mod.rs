//! Scalar data functions: parsing, evaluation, differentiation, integration.

pub mod expr;
mod func;
mod quadrature;
mod sampled;

pub use expr::{parse_scalar, parse_with_vars, Builtin, Expr, ParseError, ParseErrorKind};
pub use func::{ClosureFn, ExprFn, Func, RealFunction};
pub use quadrature::{simpson, PrimitiveTable, Quadrature};
pub use sampled::Sampled;

use crate::error::Result;

/// Parse an expression into a [`Func`].
pub fn parse_expr(src: &str) -> Result<Func> {
    Func::parse(src)
}

/// Derivative of order 1..=3 (0 gives the value).
pub fn deriv(f: &Func, x: f64, order: u8) -> Result<f64> {
    f.deriv(x, order)
}

pub fn integrate(f: &Func, a: f64, b: f64, q: &Quadrature) -> Result<f64> {
    f.integrate(a, b, q)
}

/// `n` uniformly spaced points covering `[a, b]` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
