use serde::{Deserialize, Serialize};

use super::Func;
use crate::error::Result;

/// Composite Simpson rule with a panel density per unit length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub panels_per_unit: f64,
    /// Lower bound on the panel count for short intervals (rounded up to even).
    pub min_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            panels_per_unit: 2048.0,
            min_panels: 16,
        }
    }
}

impl Quadrature {
    pub fn with_density(panels_per_unit: f64) -> Self {
        Quadrature {
            panels_per_unit,
            ..Quadrature::default()
        }
    }

    /// Even panel count used on `[a, b]`.
    pub fn panels(&self, a: f64, b: f64) -> usize {
        let wanted = (self.panels_per_unit * (b - a).abs()).ceil() as usize;
        let n = wanted.max(self.min_panels).max(2);
        n + n % 2
    }

    /// `int_a^b f`. Reversed limits give the negated integral.
    pub fn integrate<F>(&self, mut f: F, a: f64, b: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        if a == b {
            return Ok(0.0);
        }
        let n = self.panels(a, b);
        simpson(&mut f, a, b, n)
    }

    pub fn integrate_plain<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.integrate(|x| Ok(f(x)), a, b).expect("infallible integrand")
    }
}

/// Cumulative integral `int_a^s f` of a function over `[a, b]`, tabulated at
/// `cells + 1` nodes; lookups add a 4-panel Simpson segment from the nearest
/// node at or below `s`. Arguments outside `[a, b]` are clamped.
#[derive(Debug, Clone)]
pub struct PrimitiveTable {
    f: Func,
    a: f64,
    h: f64,
    cum: Vec<f64>,
}

impl PrimitiveTable {
    pub fn new(f: Func, a: f64, b: f64, cells: usize) -> Result<Self> {
        let cells = cells.max(1);
        let h = (b - a) / cells as f64;
        let mut cum = Vec::with_capacity(cells + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            let lo = a + h * i as f64;
            acc += simpson(&mut |x| f.eval(x), lo, lo + h, 8)?;
            cum.push(acc);
        }
        Ok(PrimitiveTable { f, a, h, cum })
    }

    pub fn total(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        let cells = self.cum.len() - 1;
        let b = self.a + self.h * cells as f64;
        let s = s.clamp(self.a, b);
        let i = (((s - self.a) / self.h).floor() as usize).min(cells - 1);
        let node = self.a + self.h * i as f64;
        if s == node {
            return Ok(self.cum[i]);
        }
        Ok(self.cum[i] + simpson(&mut |x| self.f.eval(x), node, s, 4)?)
    }
}

/// Composite Simpson with exactly `n` (even) panels.
pub fn simpson<F>(f: &mut F, a: f64, b: f64, n: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    debug_assert!(n >= 2 && n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let x = a + h * i as f64;
        if i % 2 == 1 {
            odd += f(x)?;
        } else {
            even += f(x)?;
        }
    }
    Ok(h / 3.0 * (f(a)? + 4.0 * odd + 2.0 * even + f(b)?))
}
