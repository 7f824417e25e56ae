//! Plane curves from curvature, and SVG output.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// Closed (or nearly closed) polyline with its closure defects.
#[derive(Debug, Clone, Serialize)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    /// Distance between the end of the curve and its start.
    pub gap: f64,
    /// `|int_0^L k ds - 2 pi|`.
    pub angle_defect: f64,
}

/// Integrate `phi' = k(s)`, `(x, y)' = (cos phi, sin phi)` from `phi = 0` at
/// the origin by classical RK4, returning `n + 1` points (the last one is
/// the end of the curve, equal to the first for a closed curve).
pub fn reconstruct_curve<K>(k: K, length: f64, n: usize) -> Result<Polyline>
where
    K: Fn(f64) -> Result<f64>,
{
    if n < 8 {
        return Err(Error::InvalidInput(format!("curve reconstruction needs n >= 8, got {n}")));
    }
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidInput(format!("curve length must be positive, got {length}")));
    }
    let sub = 16;
    let h = length / (n * sub) as f64;
    let mut state = [0.0f64; 3];
    let mut points = Vec::with_capacity(n + 1);
    points.push((0.0, 0.0));
    let rhs = |s: f64, phi: f64| -> Result<[f64; 3]> {
        let (sin, cos) = phi.sin_cos();
        Ok([k(s)?, cos, sin])
    };
    // the angle only depends on s, so each stage needs k at s, s + h/2, s + h
    for step in 0..n * sub {
        let s = h * step as f64;
        let k1 = rhs(s, state[0])?;
        let k2 = rhs(s + 0.5 * h, state[0] + 0.5 * h * k1[0])?;
        let k3 = rhs(s + 0.5 * h, state[0] + 0.5 * h * k2[0])?;
        let k4 = rhs(s + h, state[0] + h * k3[0])?;
        for i in 0..3 {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if (step + 1) % sub == 0 {
            points.push((state[1], state[2]));
        }
    }
    Ok(Polyline {
        gap: state[1].hypot(state[2]),
        angle_defect: (state[0] - std::f64::consts::TAU).abs(),
        points,
    })
}

/// SVG document with a unit-scaled viewBox (bounding box plus 5% margin).
pub fn polyline_svg(curve: &Polyline) -> String {
    let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &curve.points {
        lo_x = lo_x.min(x);
        lo_y = lo_y.min(y);
        hi_x = hi_x.max(x);
        hi_y = hi_y.max(y);
    }
    let extent = (hi_x - lo_x).max(hi_y - lo_y).max(1e-12);
    let margin = 0.05 * extent;
    let (x0, y0) = (lo_x - margin, lo_y - margin);
    let (w, h) = (hi_x - lo_x + 2.0 * margin, hi_y - lo_y + 2.0 * margin);
    let stroke = extent / 200.0;
    let mut pts = String::new();
    for (i, &(x, y)) in curve.points.iter().enumerate() {
        if i > 0 {
            pts.push(' ');
        }
        let _ = write!(pts, "{x:.9},{y:.9}");
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0:.9} {y0:.9} {w:.9} {h:.9}\">\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"{stroke:.9}\" points=\"{pts}\"/>\n\
         </svg>\n"
    )
}
