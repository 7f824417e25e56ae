//! Explicit leapfrog scheme for `y_tt = y_xx`, independent of the synthesis
//! code.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::funcrep::{simpson, Func};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FdBoundary {
    /// Nodes `x0 + i dx`, `i < nx`, wrapping around.
    Periodic,
    /// Dirichlet zero ends (odd ghost points).
    OddReflection,
    /// Neumann zero ends (even ghost points).
    EvenReflection,
    /// End values frozen; the domain must be wide enough that nothing
    /// reaches the region of interest.
    Absorbing,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FdGrid {
    pub x0: f64,
    pub x1: f64,
    pub nx: usize,
    pub nt: usize,
    pub dx: f64,
    pub dt: f64,
    pub lambda: f64,
    pub t_final: f64,
    pub boundary: FdBoundary,
}

impl FdGrid {
    /// `nx` cells on `[x0, x1]`; `nt` is the smallest step count with
    /// `dt / dx <= lambda`.
    pub fn new(x0: f64, x1: f64, nx: usize, t_final: f64, lambda: f64, boundary: FdBoundary) -> Result<Self> {
        if lambda > 1.0 + 1e-12 {
            return Err(Error::Cfl(lambda));
        }
        if !(lambda > 0.0 && x1 > x0 && t_final > 0.0) {
            return Err(Error::InvalidInput(format!(
                "bad grid: [{x0}, {x1}], T = {t_final}, lambda = {lambda}"
            )));
        }
        let dx = (x1 - x0) / nx as f64;
        // tiny slack so that lambda = 1 with T a multiple of dx stays at 1
        let nt = ((t_final / (lambda * dx)) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let dt = t_final / nt as f64;
        if nx < 16 || nt < 16 {
            return Err(Error::InvalidInput(format!("grid too coarse: nx = {nx}, nt = {nt} (need >= 16)")));
        }
        Ok(FdGrid {
            x0,
            x1,
            nx,
            nt,
            dx,
            dt,
            lambda: dt / dx,
            t_final,
            boundary,
        })
    }

    /// Grid for the window `[a, b]` of a line problem, enlarged by the
    /// domain of dependence `T` plus two cells on each side; `nx` cells
    /// span the window, the enlargement keeps the same spacing.
    pub fn line(a: f64, b: f64, t_final: f64, nx: usize, lambda: f64) -> Result<Self> {
        let dx = (b - a) / nx as f64;
        let pad = ((t_final / dx).ceil() as usize) + 2;
        FdGrid::new(
            a - pad as f64 * dx,
            b + pad as f64 * dx,
            nx + 2 * pad,
            t_final,
            lambda,
            FdBoundary::Absorbing,
        )
    }

    pub fn node_count(&self) -> usize {
        match self.boundary {
            FdBoundary::Periodic => self.nx,
            _ => self.nx + 1,
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.node_count()).map(|i| self.x0 + self.dx * i as f64).collect()
    }

    pub fn ts(&self) -> Vec<f64> {
        (0..=self.nt).map(|n| self.dt * n as f64).collect()
    }
}

/// All time levels of a leapfrog run.
#[derive(Debug, Clone)]
pub struct FdField {
    pub grid: FdGrid,
    pub levels: Vec<Vec<f64>>,
}

impl FdField {
    pub fn final_level(&self) -> &[f64] {
        &self.levels[self.levels.len() - 1]
    }
}

/// Neighbours `(left, right)` of node `i` under the boundary rule.
fn neighbours(y: &[f64], i: usize, boundary: FdBoundary) -> Option<(f64, f64)> {
    let n = y.len();
    match boundary {
        FdBoundary::Periodic => Some((y[(i + n - 1) % n], y[(i + 1) % n])),
        FdBoundary::Absorbing if i == 0 || i == n - 1 => None,
        FdBoundary::OddReflection if i == 0 => Some((2.0 * y[0] - y[1], y[1])),
        FdBoundary::OddReflection if i == n - 1 => Some((y[n - 2], 2.0 * y[n - 1] - y[n - 2])),
        FdBoundary::EvenReflection if i == 0 => Some((y[1], y[1])),
        FdBoundary::EvenReflection if i == n - 1 => Some((y[n - 2], y[n - 2])),
        _ => Some((y[i - 1], y[i + 1])),
    }
}

/// Leapfrog from `y(0) = f`, `y_t(0) = v`.
///
/// The first level is `f + (lambda^2 / 2) d^2 f + (1/2) int_{x-dt}^{x+dt} v`,
/// which makes the scheme exact at `lambda = 1`.
pub fn fd_forward(f: &Func, v: &Func, t_final: f64, grid: &FdGrid) -> Result<FdField> {
    if (grid.t_final - t_final).abs() > 1e-12 * t_final {
        return Err(Error::InvalidInput(format!(
            "grid horizon {} does not match T = {t_final}",
            grid.t_final
        )));
    }
    let xs = grid.xs();
    let l2 = grid.lambda * grid.lambda;
    let dt = grid.dt;
    let y0 = f.sample(&xs)?;
    let mut y1 = xs
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let mut g = |s: f64| v.eval(s);
            let impulse = 0.5 * simpson(&mut g, x - dt, x + dt, 8)?;
            Ok(match neighbours(&y0, i, grid.boundary) {
                Some((l, r)) => y0[i] + 0.5 * l2 * (l - 2.0 * y0[i] + r) + impulse,
                None => y0[i],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if grid.boundary == FdBoundary::OddReflection {
        let n = y1.len();
        y1[0] = 0.0;
        y1[n - 1] = 0.0;
    }
    let mut levels = Vec::with_capacity(grid.nt + 1);
    levels.push(y0);
    levels.push(y1);
    for _ in 1..grid.nt {
        let (prev, cur) = (&levels[levels.len() - 2], &levels[levels.len() - 1]);
        let next = (0..cur.len())
            .into_par_iter()
            .map(|i| match neighbours(cur, i, grid.boundary) {
                Some((l, r)) => 2.0 * cur[i] - prev[i] + l2 * (l - 2.0 * cur[i] + r),
                None => cur[i],
            })
            .collect();
        levels.push(next);
    }
    Ok(FdField { grid: *grid, levels })
}

/// Max and RMS deviation between an evaluator and the oracle.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Deviation {
    pub max: f64,
    pub rms: f64,
    pub points: usize,
}

/// Compare on every time level at the grid nodes inside `[a, b]`.
pub fn compare<F: SpaceTimeField + ?Sized>(eval: &F, field: &FdField, a: f64, b: f64) -> Result<Deviation> {
    let xs = field.grid.xs();
    let slack = 1e-9 * field.grid.dx;
    let idx: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] >= a - slack && xs[i] <= b + slack).collect();
    let ts = field.grid.ts();
    let (max, sq, count) = field
        .levels
        .par_iter()
        .enumerate()
        .map(|(n, level)| {
            let t = ts[n].min(eval.horizon());
            idx.iter().try_fold((0.0f64, 0.0f64, 0usize), |(m, s, c), &i| {
                let d = (eval.value(t, xs[i].clamp(a, b))? - level[i]).abs();
                Ok::<_, Error>((m.max(d), s + d * d, c + 1))
            })
        })
        .try_reduce(|| (0.0, 0.0, 0), |x, y| Ok((x.0.max(y.0), x.1 + y.1, x.2 + y.2)))?;
    Ok(Deviation {
        max,
        rms: if count > 0 { (sq / count as f64).sqrt() } else { 0.0 },
        points: count,
    })
}

/// Conserved leapfrog energy between levels `n` and `n + 1` on a periodic
/// grid:
/// `dx sum [ ((y^{n+1} - y^n)/dt)^2 + (d y^{n+1})(d y^n)/dx^2 ] / 2`.
pub fn discrete_energy(field: &FdField) -> Result<Vec<f64>> {
    if field.grid.boundary != FdBoundary::Periodic {
        return Err(Error::InvalidInput("discrete energy needs a periodic grid".into()));
    }
    let (dx, dt) = (field.grid.dx, field.grid.dt);
    Ok(field
        .levels
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let n = a.len();
            let mut e = 0.0;
            for i in 0..n {
                let j = (i + 1) % n;
                let vt = (b[i] - a[i]) / dt;
                e += vt * vt + (b[j] - b[i]) * (a[j] - a[i]) / (dx * dx);
            }
            0.5 * dx * e
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::ClosureFn;
    use std::f64::consts::TAU;

    #[test]
    fn constant_field() {
        let g = FdGrid::new(0.0, 1.0, 32, 0.5, 0.9, FdBoundary::Absorbing).unwrap();
        let out = fd_forward(&Func::constant(3.0), &Func::zero(), 0.5, &g).unwrap();
        assert!(out.levels.iter().flatten().all(|&y| (y - 3.0).abs() < 1e-14));
    }

    #[test]
    fn periodic_sine_returns() {
        let g = FdGrid::new(0.0, TAU, 512, TAU, 0.5, FdBoundary::Periodic).unwrap();
        let out = fd_forward(&Func::parse("sin(x)").unwrap(), &Func::zero(), TAU, &g).unwrap();
        let xs = g.xs();
        let err = xs.iter().zip(out.final_level()).map(|(x, y)| (y - x.sin()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn unit_courant_is_exact() {
        let bump = |x: f64| if x.abs() < 1.0 { (1.0 - x * x).powi(4) } else { 0.0 };
        let f = Func::new(ClosureFn::new(bump, 1e-4));
        let g = FdGrid::new(-4.0, 4.0, 400, 1.5, 1.0, FdBoundary::Absorbing).unwrap();
        assert_eq!(g.lambda, 1.0);
        let out = fd_forward(&f, &Func::zero(), 1.5, &g).unwrap();
        for (n, level) in out.levels.iter().enumerate() {
            let t = g.dt * n as f64;
            for (i, x) in g.xs().iter().enumerate().skip(2).take(396) {
                let exact = 0.5 * (bump(x - t) + bump(x + t));
                if (x.abs() + t) < 3.9 {
                    assert!((level[i] - exact).abs() < 1e-12, "n = {n}, x = {x}");
                }
            }
        }
    }

    #[test]
    fn cfl_and_size_checks() {
        assert!(matches!(FdGrid::new(0.0, 1.0, 32, 1.0, 1.5, FdBoundary::Periodic), Err(Error::Cfl(_))));
        assert!(FdGrid::new(0.0, 1.0, 8, 1.0, 0.5, FdBoundary::Periodic).is_err());
        let g = FdGrid::line(-1.0, 1.0, 0.5, 100, 1.0).unwrap();
        assert!(g.x0 <= -1.5 && g.x1 >= 1.5 && (g.dx - 0.02).abs() < 1e-15);
    }

    #[test]
    fn reflections_match_standing_waves() {
        // Dirichlet: sin(pi x) cos(pi t); Neumann: cos(pi x) cos(pi t)
        for (src, boundary, exact) in [
            ("sin(pi*x)", FdBoundary::OddReflection, (|t: f64, x: f64| (std::f64::consts::PI * x).sin() * (std::f64::consts::PI * t).cos()) as fn(f64, f64) -> f64),
            ("cos(pi*x)", FdBoundary::EvenReflection, |t, x| (std::f64::consts::PI * x).cos() * (std::f64::consts::PI * t).cos()),
        ] {
            let g = FdGrid::new(0.0, 1.0, 400, 0.8, 0.5, boundary).unwrap();
            let out = fd_forward(&Func::parse(src).unwrap(), &Func::zero(), 0.8, &g).unwrap();
            let err = g
                .xs()
                .iter()
                .zip(out.final_level())
                .map(|(&x, y)| (y - exact(0.8, x)).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-4, "{boundary:?}: {err}");
        }
    }

    #[test]
    fn energy_is_conserved() {
        let g = FdGrid::new(0.0, 1.0, 256, 2.0, 0.9, FdBoundary::Periodic).unwrap();
        let f = Func::parse("exp(sin(2*pi*x))").unwrap();
        let v = Func::parse("cos(4*pi*x)").unwrap();
        let out = fd_forward(&f, &v, 2.0, &g).unwrap();
        let e = discrete_energy(&out).unwrap();
        for w in e.windows(2) {
            assert!(((w[1] - w[0]) / w[0]).abs() <= 1e-10);
        }
    }
}
