//! The wave-map problem `y_tt - y_xx = y_t^2 - y_x^2` with two-time data.
//!
//! The substitution `z = e^(-y)` turns it into the linear problem for `z`
//! with data `e^(-f)`, `e^(-g)`. A positive `z` follows when the control
//! velocity is nonnegative, which needs a nonnegative seed and a sign
//! condition on the partial sums of the reduced target's slope.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::funcrep::{linspace, Func};
use crate::line1d::{
    golden_min, reduce_target, seed_polynomial, solve_line_with_seed, ControlSolution, LineProblem, ReducedTarget,
    SeedChoice, SeedFunction, SeedKind,
};

/// Partial sums below `-NONNEG_TOLERANCE` fail the sign condition.
pub const NONNEG_TOLERANCE: f64 = 1e-9;

/// 4001 uniform points on `[-5(T+1), 5(T+1)]`.
pub fn wavemap_grid(t_final: f64) -> Vec<f64> {
    let r = 5.0 * (t_final + 1.0);
    linspace(-r, r, 4001)
}

#[derive(Debug, Clone)]
pub struct WaveMapProblem {
    pub f: Func,
    pub g: Func,
    pub t_final: f64,
}

impl WaveMapProblem {
    pub fn new(f: Func, g: Func, t_final: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon T must be positive, got {t_final}")));
        }
        Ok(WaveMapProblem { f, g, t_final })
    }

    pub fn parse(f: &str, g: &str, t_final: f64) -> Result<Self> {
        WaveMapProblem::new(Func::parse(f)?, Func::parse(g)?, t_final)
    }
}

/// Grid infimum of `f` and supremum of `g`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrderingReport {
    pub inf_f: f64,
    pub inf_at: f64,
    pub sup_g: f64,
    pub sup_at: f64,
    pub margin: f64,
}

pub fn ordering_report(p: &WaveMapProblem) -> Result<OrderingReport> {
    let grid = wavemap_grid(p.t_final);
    let mut inf = (f64::INFINITY, 0.0);
    let mut sup = (f64::NEG_INFINITY, 0.0);
    for &x in &grid {
        let (fx, gx) = (p.f.eval(x)?, p.g.eval(x)?);
        if fx < inf.0 {
            inf = (fx, x);
        }
        if gx > sup.0 {
            sup = (gx, x);
        }
    }
    Ok(OrderingReport {
        inf_f: inf.0,
        inf_at: inf.1,
        sup_g: sup.0,
        sup_at: sup.1,
        margin: inf.0 - sup.0,
    })
}

/// Linear problem for `z = e^(-y)`, after checking `inf f > sup g`.
pub fn to_linear(p: &WaveMapProblem) -> Result<LineProblem> {
    let rep = ordering_report(p)?;
    if !(rep.margin > 0.0) {
        return Err(Error::OrderingViolated {
            x: rep.inf_at,
            f_value: rep.inf_f,
            g_value: rep.sup_g,
        });
    }
    LineProblem::new(p.f.exp_neg(), p.g.exp_neg(), p.t_final)
}

/// Sufficient sign patterns of `f~'` recognized by [`check_nonneg_condition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonnegPattern {
    /// `f~' >= 0` for `x > 0` and `f~' <= 0` for `x < 0`.
    Monotone,
    /// `f~' >= 0` on `[0, 2T]` and `f~'(x + 2T) = -f~'(x)`.
    Antiperiodic,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NonnegReport {
    pub passes: bool,
    /// Most negative signed partial sum found (sign-adjusted so that the
    /// condition reads `>= 0` on both sides), and where.
    pub worst_sum: f64,
    pub worst_x: f64,
    pub nmax: usize,
    pub points: usize,
    pub pattern: Option<NonnegPattern>,
}

/// Check on the wave-map grid that
/// `sum_{i=1}^{N} f~'(x - (2i-1)T) >= 0` for `x > T` and
/// `sum_{i=1}^{N} f~'(x + (2i-1)T) <= 0` for `x < -T`, with `N = N(x)` the
/// index of the velocity piece containing `x` (capped at `nmax`).
pub fn check_nonneg_condition(ftilde: &Func, t_final: f64, nmax: usize) -> Result<NonnegReport> {
    let grid = wavemap_grid(t_final);
    let t = t_final;
    let mut worst = (f64::INFINITY, 0.0);
    let mut points = 0;
    for &x in &grid {
        if x.abs() <= t {
            continue;
        }
        let n = (((x.abs() + t) / (2.0 * t)).floor() as usize).min(nmax);
        let sign = x.signum();
        let mut sum = 0.0;
        for i in 1..=n {
            sum += ftilde.deriv(x - sign * (2 * i - 1) as f64 * t, 1)?;
        }
        let signed = sign * sum;
        points += 1;
        if signed < worst.0 {
            worst = (signed, x);
        }
    }
    let worst_sum = if points == 0 { 0.0 } else { worst.0 };
    Ok(NonnegReport {
        passes: worst_sum >= -NONNEG_TOLERANCE,
        worst_sum,
        worst_x: worst.1,
        nmax,
        points,
        pattern: detect_pattern(ftilde, t_final, &grid)?,
    })
}

fn detect_pattern(ftilde: &Func, t_final: f64, grid: &[f64]) -> Result<Option<NonnegPattern>> {
    let slopes = grid.iter().map(|&x| ftilde.deriv(x, 1)).collect::<Result<Vec<_>>>()?;
    let scale = slopes.iter().fold(1.0f64, |m, s| m.max(s.abs()));
    let tol = NONNEG_TOLERANCE * scale;
    let monotone = grid
        .iter()
        .zip(&slopes)
        .all(|(&x, &s)| (x <= 0.0 || s >= -tol) && (x >= 0.0 || s <= tol));
    if monotone {
        return Ok(Some(NonnegPattern::Monotone));
    }
    let two_t = 2.0 * t_final;
    let hi = grid[grid.len() - 1];
    for (&x, &s) in grid.iter().zip(&slopes) {
        if (0.0..=two_t).contains(&x) && s < -tol {
            return Ok(None);
        }
        if x + two_t <= hi && (s + ftilde.deriv(x + two_t, 1)?).abs() > tol {
            return Ok(None);
        }
    }
    Ok(Some(NonnegPattern::Antiperiodic))
}

/// Nonnegative seed with the moments of `rt`: the polynomial seed when it
/// is already nonnegative, otherwise the best member of the family
/// `u + s cos(pi x / T)` (which keeps all three moments), with `s` chosen
/// to maximize the minimum of the seed. When that family has no
/// nonnegative member the clamped family is used, with the bump width in
/// the middle of its admissible range.
pub fn build_nonneg_seed(rt: &ReducedTarget, t_final: f64) -> Result<SeedFunction> {
    let base = seed_polynomial(rt, t_final);
    let base_min = base.minimum()?;
    if rt.a0 <= 0.0 {
        return Err(Error::NoNonnegativeSeed { best_min: base_min });
    }
    let floor = -1e-12 * rt.a0.abs().max(1.0);
    if base_min >= floor {
        return Ok(base);
    }
    let (a, b, c, _) = base.quadratic_coefficients().expect("polynomial seed is quadratic");
    let t = t_final;
    let reach = 4.0 * (a.abs() * t * t + b.abs() * t + c.abs()) + 1.0;
    // min_x u_s(x) is concave in s, so golden search on its negative
    let objective = |s: f64| -> f64 {
        SeedFunction::compensated(&base, s)
            .map(|u| -u.minimum().unwrap_or(f64::NEG_INFINITY))
            .unwrap_or(f64::INFINITY)
    };
    let (s_best, neg_min) = golden_min(objective, -reach, reach, 1e-12 * reach);
    let best_min = -neg_min;
    if best_min < floor {
        if let Some((lo, hi)) = SeedFunction::clamped_range(rt, t) {
            return SeedFunction::clamped(rt, t, 0.5 * (lo + hi));
        }
        return Err(Error::NoNonnegativeSeed {
            best_min: best_min.max(base_min),
        });
    }
    Ok(SeedFunction::compensated(&base, s_best).expect("polynomial seed is quadratic"))
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveMapReport {
    pub ordering: OrderingReport,
    pub nonneg: NonnegReport,
    pub seed_kind: SeedKind,
    pub seed_min: f64,
    pub z_min: f64,
}

/// `y = -ln z` with `z` the linear control solution.
#[derive(Debug, Clone)]
pub struct WaveMapSolution {
    linear: ControlSolution,
    report: WaveMapReport,
}

impl WaveMapSolution {
    pub fn linear(&self) -> &ControlSolution {
        &self.linear
    }

    pub fn report(&self) -> &WaveMapReport {
        &self.report
    }

    /// Velocity of the linear problem, `z_t(0, x) = v(x)`.
    pub fn z_velocity(&self, x: f64) -> Result<f64> {
        self.linear.velocity(x)
    }

    pub fn terminal_error(&self, g: &Func, grid: &[f64]) -> Result<f64> {
        let t = self.linear.horizon();
        grid.iter()
            .try_fold(0.0f64, |m, &x| Ok(m.max((self.value(t, x)? - g.eval(x)?).abs())))
    }

    pub fn initial_error(&self, f: &Func, grid: &[f64]) -> Result<f64> {
        grid.iter()
            .try_fold(0.0f64, |m, &x| Ok(m.max((self.value(0.0, x)? - f.eval(x)?).abs())))
    }
}

impl SpaceTimeField for WaveMapSolution {
    fn value(&self, t: f64, x: f64) -> Result<f64> {
        let z = self.linear.value(t, x)?;
        if !(z > 0.0) {
            return Err(Error::PositivityLost { t, x, z });
        }
        Ok(-z.ln())
    }

    fn partial(&self, t: f64, x: f64, dt: u8, dx: u8) -> Result<f64> {
        let z = self.linear.value(t, x)?;
        if !(z > 0.0) {
            return Err(Error::PositivityLost { t, x, z });
        }
        let zp = |a: u8, b: u8| self.linear.partial(t, x, a, b);
        Ok(match (dt, dx) {
            (0, 0) => -z.ln(),
            (1, 0) | (0, 1) => -zp(dt, dx)? / z,
            (2, 0) => {
                let zt = zp(1, 0)?;
                -zp(2, 0)? / z + zt * zt / (z * z)
            }
            (0, 2) => {
                let zx = zp(0, 1)?;
                -zp(0, 2)? / z + zx * zx / (z * z)
            }
            (1, 1) => -zp(1, 1)? / z + zp(1, 0)? * zp(0, 1)? / (z * z),
            _ => return Err(Error::DerivativeOrder(dt + dx)),
        })
    }

    fn horizon(&self) -> f64 {
        self.linear.horizon()
    }
}

/// The two admissibility checks without solving: the ordering report, then
/// the sign condition on the reduced target of the linear problem. Fails
/// with [`Error::OrderingViolated`] before the second check.
pub fn wavemap_admissibility(p: &WaveMapProblem) -> Result<(OrderingReport, NonnegReport)> {
    let ordering = ordering_report(p)?;
    let rt = reduce_target(&to_linear(p)?)?;
    let grid = wavemap_grid(p.t_final);
    let nmax = ((grid[grid.len() - 1] + p.t_final) / (2.0 * p.t_final)).floor() as usize;
    Ok((ordering, check_nonneg_condition(&rt.ftilde, p.t_final, nmax)?))
}

/// Ordering, sign condition, nonnegative seed, linear solve, positivity.
pub fn solve_wavemap(p: &WaveMapProblem) -> Result<WaveMapSolution> {
    let (ordering, nonneg) = wavemap_admissibility(p)?;
    let lp = to_linear(p)?;
    let rt = reduce_target(&lp)?;
    let grid = wavemap_grid(p.t_final);
    if !nonneg.passes {
        return Err(Error::NonnegConditionFailed {
            x: nonneg.worst_x,
            sum: nonneg.worst_sum,
        });
    }
    let seed = build_nonneg_seed(&rt, p.t_final)?;
    let seed_min = seed.minimum()?;
    let linear = solve_line_with_seed(&lp, &SeedChoice::Seed(seed.clone()))?;
    let z_min = positivity_scan(&linear, &grid)?;
    Ok(WaveMapSolution {
        linear,
        report: WaveMapReport {
            ordering,
            nonneg,
            seed_kind: seed.kind(),
            seed_min,
            z_min,
        },
    })
}

/// Minimum of `z` over 21 time levels of the grid; fails on `z <= 0`.
fn positivity_scan(z: &ControlSolution, grid: &[f64]) -> Result<f64> {
    let t_final = z.horizon();
    let levels = linspace(0.0, t_final, 21);
    let (z_min, t, x) = levels
        .par_iter()
        .map(|&t| {
            grid.iter().try_fold((f64::INFINITY, t, 0.0), |best, &x| {
                let v = z.value(t, x)?;
                Ok::<_, Error>(if v < best.0 { (v, t, x) } else { best })
            })
        })
        .try_reduce(|| (f64::INFINITY, 0.0, 0.0), |a, b| Ok(if b.0 < a.0 { b } else { a }))?;
    if !(z_min > 0.0) {
        return Err(Error::PositivityLost { t, x, z: z_min });
    }
    Ok(z_min)
}
