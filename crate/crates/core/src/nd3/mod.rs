//! Three space dimensions by spherical means.
//!
//! For a fixed point `x`, `w(t, r) = r A_r y(t, x)` solves the 1-D wave
//! equation in `r`, with data `F(r) = r A_r f(x)` and `G(r) = r A_r g(x)`,
//! both odd in `r`. The line solver gives `w`, and `y(t, x)` is the limit
//! of `w(t, r) / r` as `r -> 0`, taken by Richardson extrapolation.

mod sphere;

pub use sphere::{gauss_legendre, Field3, SphericalQuadrature, FIELD_VARIABLES};

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::funcrep::{Func, RealFunction};
use crate::line1d::{solve_line, ControlSolution, LineProblem};

/// Default probe radius for the `r -> 0` limit.
pub const DEFAULT_RPROBE: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Problem3D {
    pub f: Field3,
    pub g: Field3,
    pub t_final: f64,
    pub points: Vec<[f64; 3]>,
}

impl Problem3D {
    pub fn new(f: Field3, g: Field3, t_final: f64, points: Vec<[f64; 3]>) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon T must be positive, got {t_final}")));
        }
        Ok(Problem3D { f, g, t_final, points })
    }

    pub fn parse(f: &str, g: &str, t_final: f64, points: Vec<[f64; 3]>) -> Result<Self> {
        Problem3D::new(Field3::parse(f)?, Field3::parse(g)?, t_final, points)
    }
}

/// `(1 / 4 pi) int_{S^2} h(x + r y) dsigma(y)`.
pub fn spherical_mean(h: &Field3, x: [f64; 3], r: f64, q: &SphericalQuadrature) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!("radius must be nonnegative, got {r}")));
    }
    checked(q.mean(|y| h.eval(shifted(x, y, r))), h, x, r)
}

fn shifted(x: [f64; 3], y: [f64; 3], r: f64) -> [f64; 3] {
    [x[0] + r * y[0], x[1] + r * y[1], x[2] + r * y[2]]
}

fn checked(v: f64, h: &Field3, x: [f64; 3], r: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidInput(format!(
            "{} is not finite on the sphere of radius {r} around {x:?}",
            h.source()
        )))
    }
}

/// `F(r) = r A_r h(x)`, made odd by `F(-r) = -F(r)`.
#[derive(Debug, Clone)]
pub struct RadialData {
    field: Field3,
    center: [f64; 3],
    quadrature: Arc<SphericalQuadrature>,
}

impl RadialData {
    pub fn new(field: &Field3, center: [f64; 3], quadrature: Arc<SphericalQuadrature>) -> Self {
        RadialData {
            field: field.clone(),
            center,
            quadrature,
        }
    }

    /// `d^k/dr^k A_r h(x)` for `r >= 0`: the mean of `D^k h(x + r y)[y, ..]`.
    fn mean_deriv(&self, r: f64, k: u8) -> Result<f64> {
        let v = self
            .quadrature
            .mean(|y| self.field.directional(shifted(self.center, y, r), y, k));
        checked(v, &self.field, self.center, r)
    }
}

impl RealFunction for RadialData {
    fn eval(&self, r: f64) -> Result<f64> {
        self.deriv(r, 0)
    }

    fn deriv(&self, r: f64, order: u8) -> Result<f64> {
        if order > 3 {
            return Err(Error::DerivativeOrder(order));
        }
        let a = r.abs();
        // (r M)^(k) = k M^(k-1) + r M^(k)
        let mut v = a * self.mean_deriv(a, order)?;
        if order > 0 {
            v += order as f64 * self.mean_deriv(a, order - 1)?;
        }
        // odd function: F^(k)(-r) = (-1)^(k+1) F^(k)(r)
        let odd_sign = if order % 2 == 0 { -1.0 } else { 1.0 };
        Ok(if r < 0.0 { odd_sign * v } else { v })
    }
}

/// The 1-D problem for `w` at the point `x`.
pub fn reduce_to_radial(p: &Problem3D, x: [f64; 3], q: &Arc<SphericalQuadrature>) -> Result<LineProblem> {
    LineProblem::new(
        Func::new(RadialData::new(&p.f, x, q.clone())),
        Func::new(RadialData::new(&p.g, x, q.clone())),
        p.t_final,
    )
}

/// Radial solution at one point.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub center: [f64; 3],
    pub w: ControlSolution,
}

impl RadialSolution {
    /// `w(t, r) / r` extrapolated from `r` and `r / 2`.
    pub fn value(&self, t: f64, rprobe: f64) -> Result<f64> {
        if !(rprobe > 0.0) {
            return Err(Error::InvalidInput(format!("rprobe must be positive, got {rprobe}")));
        }
        let q = |r: f64| -> Result<f64> { Ok(self.w.value(t, r)? / r) };
        let (coarse, fine) = (q(rprobe)?, q(0.5 * rprobe)?);
        Ok((4.0 * fine - coarse) / 3.0)
    }
}

pub fn solve_point(p: &Problem3D, x: [f64; 3], q: &Arc<SphericalQuadrature>) -> Result<RadialSolution> {
    Ok(RadialSolution {
        center: x,
        w: solve_line(&reduce_to_radial(p, x, q)?)?,
    })
}

/// `y(t, x)` at a single point.
pub fn eval_3d(p: &Problem3D, t: f64, x: [f64; 3], rprobe: f64) -> Result<f64> {
    let q = Arc::new(SphericalQuadrature::default());
    solve_point(p, x, &q)?.value(t, rprobe)
}

/// `y(t, x)` for every query point of the problem and every time in `ts`;
/// rows are `(t, x1, x2, x3, y)`, grouped by point.
pub fn eval_points(p: &Problem3D, ts: &[f64], rprobe: f64) -> Result<Vec<(f64, [f64; 3], f64)>> {
    let q = Arc::new(SphericalQuadrature::default());
    let per_point = p
        .points
        .par_iter()
        .map(|&x| {
            let sol = solve_point(p, x, &q)?;
            ts.iter()
                .map(|&t| Ok((t, x, sol.value(t, rprobe)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_point.into_iter().flatten().collect())
}
