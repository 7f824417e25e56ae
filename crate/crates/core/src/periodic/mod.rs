//! Periodic and circle problems by truncated Fourier synthesis.
//!
//! Each mode evolves as `alpha cos(wt) + beta sin(wt)`; the free coefficient
//! `beta` is fixed by the terminal data, dividing by `sin(wT)`. When
//! `2T/L = p/q` in lowest terms with `q >= 2`, these divisors are bounded
//! below by `sin(pi/q)` except on the resonant modes `q | k`, where the
//! terminal coefficient is not reachable and must already agree with the
//! data.

mod analysis;
mod rational;
mod solution;

pub use analysis::{adaptive_cutoff, choose_cutoff, fourier_analyze, sample_count, CoefficientTable, CutoffReport, MAX_MODES};
pub use rational::{rationality_check, recognize, RationalRatio, MAX_DENOMINATOR, RATIO_TOLERANCE};
pub use solution::{synth_coeffs, FourierSolution, Mode};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcrep::{linspace, Func, Quadrature};

#[derive(Debug, Clone)]
pub struct PeriodicProblem {
    pub f: Func,
    pub g: Func,
    pub t_final: f64,
    pub period: f64,
}

impl PeriodicProblem {
    /// Declares (and checks) period `L` on both profiles.
    pub fn new(f: Func, g: Func, t_final: f64, period: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon T must be positive, got {t_final}")));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("period L must be positive, got {period}")));
        }
        Ok(PeriodicProblem {
            f: declare_period(f, period)?,
            g: declare_period(g, period)?,
            t_final,
            period,
        })
    }

    pub fn parse(f: &str, g: &str, t_final: f64, period: f64) -> Result<Self> {
        PeriodicProblem::new(Func::parse(f)?, Func::parse(g)?, t_final, period)
    }
}

fn declare_period(f: Func, period: f64) -> Result<Func> {
    match f.period() {
        Some(p) if (p - period).abs() <= 1e-12 * period => Ok(f),
        _ => f.with_period(period),
    }
}

/// 2001 uniform points on `[0, L]`.
pub fn theta_grid(period: f64) -> Vec<f64> {
    linspace(0.0, period, 2001)
}

/// Residual of the terminal constraint when `2T/L` is an integer.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Obstruction {
    pub applicable: bool,
    pub residual: f64,
}

/// When `2T/L = m` is an integer, every mode is resonant and a solution can
/// only exist if `g(theta) = mean(g) - mean(f) + f(theta + T)`. Returns the
/// max-norm defect of that identity over `n` grid points of one period.
pub fn resonance_obstruction(p: &PeriodicProblem, n: usize) -> Result<Obstruction> {
    match recognize(2.0 * p.t_final / p.period) {
        Ok((_, 1)) => {}
        _ => {
            return Ok(Obstruction {
                applicable: false,
                residual: 0.0,
            })
        }
    }
    let q = Quadrature::default();
    let l = p.period;
    let mean_f = p.f.integrate(0.0, l, &q)? / l;
    let mean_g = p.g.integrate(0.0, l, &q)? / l;
    let residual = linspace(0.0, l, n.max(2)).into_iter().try_fold(0.0f64, |m, x| {
        Ok::<_, Error>(m.max((p.g.eval(x)? - (mean_g - mean_f + p.f.eval(x + p.t_final)?)).abs()))
    })?;
    Ok(Obstruction {
        applicable: true,
        residual,
    })
}

/// Full pipeline: rationality gate, adaptive cutoff, synthesis, resonant-mode
/// check. Returns the solution and its initial velocity.
///
/// An integer `2T/L` is rejected with the obstruction residual attached,
/// unless the residual is within `max(tol, 1e-7)`: then the data satisfy the
/// constraint and every mode is synthesized with the zero choice.
pub fn solve_periodic(p: &PeriodicProblem, tol: f64) -> Result<(FourierSolution, Func)> {
    let limit = tol.max(1e-7);
    let ratio = match rationality_check(p.t_final, p.period) {
        Ok(r) => r,
        Err(Error::ResonantRatio { ratio, .. }) => {
            let obstruction = resonance_obstruction(p, 2001)?;
            if obstruction.residual > limit {
                return Err(Error::ResonantRatio {
                    ratio,
                    residual: obstruction.residual,
                });
            }
            RationalRatio {
                p: ratio,
                q: 1,
                cs: 0.0,
            }
        }
        Err(e) => return Err(e),
    };
    let (fc, gc, report) = adaptive_cutoff(&p.f, &p.g, p.period, &ratio, tol)?;
    let mut sol = synth_coeffs(&fc, &gc, &ratio, p.t_final, p.period, report.modes)?;
    sol.tail = report.tail;
    sol.tail_k2 = report.tail_k2;
    if sol.resonant_mismatch > limit {
        return Err(Error::ResonantModeMismatch {
            mismatch: sol.resonant_mismatch,
            tolerance: limit,
        });
    }
    let v = sol.initial_velocity();
    Ok((sol, v))
}

/// The circle problem: period `2 pi`.
pub fn solve_circle(f: Func, g: Func, t_final: f64, tol: f64) -> Result<(FourierSolution, Func)> {
    solve_periodic(&PeriodicProblem::new(f, g, t_final, std::f64::consts::TAU)?, tol)
}
