use rayon::prelude::*;
use serde::Serialize;

use super::seed::{SeedCheck, SeedFunction};
use super::velocity::{synth_velocity, SeamReport, Velocity};
use super::{LineProblem, ReducedTarget};
use crate::error::{check_range, Error, Result};
use crate::field::SpaceTimeField;
use crate::funcrep::{linspace, Func, PrimitiveTable, Quadrature};

/// 2001 uniform points on `[-5(R+1), 5(R+1)]` with `R = c T`.
pub fn probe_grid(t_final: f64, speed: f64) -> Vec<f64> {
    let r = 5.0 * (speed * t_final + 1.0);
    linspace(-r, r, 2001)
}

/// A velocity perturbation that leaves both endpoint profiles unchanged:
/// periodic with period `2cT` and zero mean over one period.
#[derive(Debug, Clone)]
pub struct NullVelocity {
    v1: Func,
    period: f64,
}

impl NullVelocity {
    pub fn new(v1: Func, period: f64) -> Result<Self> {
        let v1 = v1.with_period(period)?;
        let mean = v1.integrate(-period / 2.0, period / 2.0, &Quadrature::default())?;
        if mean.abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "null velocity must integrate to zero over a period, got {mean:e}"
            )));
        }
        Ok(NullVelocity { v1, period })
    }

    pub fn func(&self) -> &Func {
        &self.v1
    }

    pub fn period(&self) -> f64 {
        self.period
    }
}

/// Null velocity in unit-speed coordinates with a tabulated primitive over
/// one period.
#[derive(Debug, Clone)]
struct NullPart {
    func: Func,
    table: PrimitiveTable,
    half_width: f64,
}

impl NullPart {
    fn primitive(&self, s: f64) -> Result<f64> {
        let t = self.half_width;
        self.table.eval(-t + (s + t).rem_euclid(2.0 * t))
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct LineDiagnostics {
    pub terminal_error: f64,
    pub initial_error: f64,
    pub volterra_residual: f64,
    pub seam: SeamReport,
    pub seed: SeedCheck,
}

/// Synthesized velocity together with the closed-form d'Alembert evaluator.
///
/// Internally everything is kept at unit speed; `scale` maps back through
/// `y(t, x) = Y(t, x / c)`.
#[derive(Debug, Clone)]
pub struct ControlSolution {
    problem: LineProblem,
    normalized: LineProblem,
    scale: f64,
    target: ReducedTarget,
    velocity: Velocity,
    null: Option<NullPart>,
}

impl ControlSolution {
    pub(crate) fn from_parts(
        problem: LineProblem,
        normalized: LineProblem,
        scale: f64,
        target: ReducedTarget,
        seed: SeedFunction,
    ) -> Self {
        let velocity = synth_velocity(&seed, &target, problem.t_final);
        ControlSolution {
            problem,
            normalized,
            scale,
            target,
            velocity,
            null: None,
        }
    }

    pub fn problem(&self) -> &LineProblem {
        &self.problem
    }

    /// Reduced target in unit-speed coordinates.
    pub fn target(&self) -> &ReducedTarget {
        &self.target
    }

    pub fn seed(&self) -> &SeedFunction {
        self.velocity.seed()
    }

    /// The synthesized piecewise velocity in unit-speed coordinates, without
    /// any added null velocity.
    pub fn base_velocity(&self) -> &Velocity {
        &self.velocity
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn has_null_velocity(&self) -> bool {
        self.null.is_some()
    }

    fn norm_velocity(&self, s: f64, order: u8) -> Result<f64> {
        let mut v = self.velocity.derivative(s, order)?;
        if let Some(null) = &self.null {
            v += null.func.deriv(s, order)?;
        }
        Ok(v)
    }

    fn norm_primitive(&self, s: f64) -> Result<f64> {
        let mut p = self.velocity.primitive(s)?;
        if let Some(null) = &self.null {
            p += null.primitive(s)?;
        }
        Ok(p)
    }

    /// Initial velocity `v(x)` in the original coordinates.
    pub fn velocity(&self, x: f64) -> Result<f64> {
        self.norm_velocity(x / self.scale, 0)
    }

    pub fn velocity_deriv(&self, x: f64, order: u8) -> Result<f64> {
        Ok(self.norm_velocity(x / self.scale, order)? / self.scale.powi(order as i32))
    }

    /// The velocity as a [`Func`] in the original coordinates.
    pub fn velocity_func(&self) -> Func {
        let base = Func::new(self.velocity.clone());
        let total = match &self.null {
            Some(null) => base.combine(1.0, &null.func, 1.0),
            None => base,
        };
        if self.scale == 1.0 {
            total
        } else {
            total.compose_affine(1.0 / self.scale, 0.0)
        }
    }

    /// Add a null velocity; its period must be `2cT`.
    pub fn add_null_velocity(&self, v1: &NullVelocity) -> Result<ControlSolution> {
        let expected = 2.0 * self.problem.speed * self.problem.t_final;
        if (v1.period - expected).abs() > 1e-12 * expected {
            return Err(Error::InvalidInput(format!(
                "null velocity period {} differs from 2cT = {expected}",
                v1.period
            )));
        }
        let t = self.problem.t_final;
        let scaled = if self.scale == 1.0 {
            v1.v1.clone()
        } else {
            v1.v1.compose_affine(self.scale, 0.0)
        };
        let func = match &self.null {
            Some(existing) => existing.func.combine(1.0, &scaled, 1.0),
            None => scaled,
        };
        let table = PrimitiveTable::new(func.clone(), -t, t, 2048)?;
        let mut out = self.clone();
        out.null = Some(NullPart {
            func,
            table,
            half_width: t,
        });
        Ok(out)
    }

    fn check_t(&self, t: f64) -> Result<()> {
        check_range("t", t, 0.0, self.problem.t_final)
    }

    /// Unit-speed partial derivative `d^{i+j} Y / dt^i dxi^j`, `i + j <= 2`.
    fn norm_partial(&self, t: f64, xi: f64, dt: u8, dx: u8) -> Result<f64> {
        let f = &self.normalized.f;
        let (l, r) = (xi - t, xi + t);
        match (dt, dx) {
            (0, 0) => {
                if t == 0.0 {
                    return f.eval(xi);
                }
                Ok(0.5 * (f.eval(l)? + f.eval(r)?) + 0.5 * (self.norm_primitive(r)? - self.norm_primitive(l)?))
            }
            (1, 0) => Ok(0.5 * (f.deriv(r, 1)? - f.deriv(l, 1)?)
                + 0.5 * (self.norm_velocity(r, 0)? + self.norm_velocity(l, 0)?)),
            (0, 1) => Ok(0.5 * (f.deriv(r, 1)? + f.deriv(l, 1)?)
                + 0.5 * (self.norm_velocity(r, 0)? - self.norm_velocity(l, 0)?)),
            (2, 0) | (0, 2) => Ok(0.5 * (f.deriv(r, 2)? + f.deriv(l, 2)?)
                + 0.5 * (self.norm_velocity(r, 1)? - self.norm_velocity(l, 1)?)),
            (1, 1) => Ok(0.5 * (f.deriv(r, 2)? - f.deriv(l, 2)?)
                + 0.5 * (self.norm_velocity(r, 1)? + self.norm_velocity(l, 1)?)),
            _ => Err(Error::DerivativeOrder(dt + dx)),
        }
    }

    /// `ỹ = y - (f(x - ct) + f(x + ct)) / 2`, the part carried by the velocity.
    pub fn reduced_value(&self, t: f64, x: f64) -> Result<f64> {
        self.check_t(t)?;
        let xi = x / self.scale;
        Ok(0.5 * (self.norm_primitive(xi + t)? - self.norm_primitive(xi - t)?))
    }

    pub fn terminal_error(&self, grid: &[f64]) -> Result<f64> {
        let t = self.problem.t_final;
        max_abs(grid, |x| Ok(self.value(t, x)? - self.problem.g.eval(x)?))
    }

    pub fn initial_error(&self, grid: &[f64]) -> Result<f64> {
        max_abs(grid, |x| Ok(self.value(0.0, x)? - self.problem.f.eval(x)?))
    }

    /// `max |½ int_{x-cT}^{x+cT} v - f~(x)|` over `grid`, the integral
    /// computed by Simpson's rule rather than through the closed-form
    /// primitive.
    pub fn volterra_residual(&self, grid: &[f64]) -> Result<f64> {
        let t = self.problem.t_final;
        let q = Quadrature::with_density(256.0);
        let seams = self.seam_points(grid);
        max_abs(grid, |x| {
            let xi = x / self.scale;
            let (a, b) = (xi - t, xi + t);
            let mut edges = vec![a];
            edges.extend(seams.iter().copied().filter(|&s| s > a && s < b));
            edges.push(b);
            let mut integral = 0.0;
            for w in edges.windows(2) {
                integral += q.integrate(|s| self.norm_velocity(s, 0), w[0], w[1])?;
            }
            Ok(0.5 * integral - self.target.ftilde.eval(xi)?)
        })
    }

    /// Seam and branch points in unit-speed coordinates covering `grid`.
    fn seam_points(&self, grid: &[f64]) -> Vec<f64> {
        let t = self.problem.t_final;
        let reach = grid.iter().fold(0.0f64, |m, &x| m.max((x / self.scale).abs())) + 2.0 * t;
        let count = (reach / t).ceil() as i64 + 1;
        (-count..=count).map(|k| k as f64 * t).collect()
    }

    /// `|ỹ(A) + ỹ(D) - ỹ(B) - ỹ(C)|` for the characteristic diamond with
    /// bottom vertex `A = (t1, x)` and top vertex `D = (t2, x)`.
    pub fn quadrilateral_check(&self, t1: f64, t2: f64, x: f64) -> Result<f64> {
        let half = 0.5 * (t2 - t1);
        self.quadrilateral(t1, x, half, half)
    }

    /// General characteristic parallelogram with vertices
    /// `A = (t, x)`, `B = (t + a, x - ca)`, `C = (t + b, x + cb)`,
    /// `D = (t + a + b, x - ca + cb)`.
    pub fn quadrilateral(&self, t: f64, x: f64, a: f64, b: f64) -> Result<f64> {
        let c = self.problem.speed;
        for time in [t, t + a, t + b, t + a + b] {
            self.check_t(time)?;
        }
        let ya = self.reduced_value(t, x)?;
        let yb = self.reduced_value(t + a, x - c * a)?;
        let yc = self.reduced_value(t + b, x + c * b)?;
        let yd = self.reduced_value(t + a + b, x - c * a + c * b)?;
        Ok((ya + yd - yb - yc).abs())
    }

    pub fn seam_report(&self, count: usize) -> Result<SeamReport> {
        self.velocity.seam_report(count)
    }

    pub fn diagnostics(&self, grid: &[f64]) -> Result<LineDiagnostics> {
        let t = self.problem.t_final;
        let seams = ((grid.iter().fold(0.0f64, |m, &x| m.max(x.abs())) / self.scale / (2.0 * t)).ceil() as usize).max(5);
        Ok(LineDiagnostics {
            terminal_error: self.terminal_error(grid)?,
            initial_error: self.initial_error(grid)?,
            volterra_residual: self.volterra_residual(grid)?,
            seam: self.seam_report(seams)?,
            seed: self.seed().check(&self.target, &Quadrature::default())?,
        })
    }
}

fn max_abs<F>(grid: &[f64], f: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    grid.par_iter()
        .map(|&x| f(x).map(f64::abs))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

impl SpaceTimeField for ControlSolution {
    fn value(&self, t: f64, x: f64) -> Result<f64> {
        self.check_t(t)?;
        self.norm_partial(t, x / self.scale, 0, 0)
    }

    fn partial(&self, t: f64, x: f64, dt: u8, dx: u8) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.norm_partial(t, x / self.scale, dt, dx)? / self.scale.powi(dx as i32))
    }

    fn horizon(&self) -> f64 {
        self.problem.t_final
    }
}
