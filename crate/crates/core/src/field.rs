//! Common interface of the space-time solution evaluators.

use crate::error::Result;

/// A solution `y(t, x)` on a strip or rectangle, with derivative access up
/// to total order 2.
pub trait SpaceTimeField: Send + Sync {
    fn value(&self, t: f64, x: f64) -> Result<f64>;

    /// Mixed partial `d^{dt+dx} y / dt^dt dx^dx` with `dt + dx <= 2`.
    fn partial(&self, t: f64, x: f64, dt: u8, dx: u8) -> Result<f64>;

    /// Time horizon `T`; evaluators refuse `t` outside `[0, T]`.
    fn horizon(&self) -> f64;
}

impl<F: SpaceTimeField + ?Sized> SpaceTimeField for &F {
    fn value(&self, t: f64, x: f64) -> Result<f64> {
        (**self).value(t, x)
    }

    fn partial(&self, t: f64, x: f64, dt: u8, dx: u8) -> Result<f64> {
        (**self).partial(t, x, dt, dx)
    }

    fn horizon(&self) -> f64 {
        (**self).horizon()
    }
}

/// Evaluate `field` on a tensor grid, rows indexed by time.
pub fn sample_grid<F: SpaceTimeField + ?Sized>(field: &F, ts: &[f64], xs: &[f64]) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    ts.par_iter()
        .map(|&t| xs.iter().map(|&x| field.value(t, x)).collect())
        .collect()
}
