//! Whole-line two-point problem for `y_tt = c^2 y_xx`:
//! find an initial velocity `v` such that the solution starting from
//! `(y, y_t) = (f, v)` reaches `y(T, .) = g`.
//!
//! The construction reduces to `f~ = g - (f(. - T) + f(. + T)) / 2`, picks a
//! seed on `[-T, T]`, and extends it piecewise so that `½ int_{x-T}^{x+T} v = f~(x)`
//! for every `x`.

mod seed;
mod solution;
mod velocity;

pub use seed::{seed_polynomial, seed_trig, SeedCheck, SeedFunction, SeedKind};
pub use solution::{probe_grid, ControlSolution, LineDiagnostics, NullVelocity};
pub use velocity::{synth_velocity, SeamReport, Velocity};

pub(crate) use seed::golden_min;

use crate::error::{Error, Result};
use crate::funcrep::{linspace, parse_expr, Func};

#[derive(Debug, Clone)]
pub struct LineProblem {
    pub f: Func,
    pub g: Func,
    pub t_final: f64,
    pub speed: f64,
}

impl LineProblem {
    pub fn new(f: Func, g: Func, t_final: f64) -> Result<Self> {
        LineProblem::with_speed(f, g, t_final, 1.0)
    }

    pub fn with_speed(f: Func, g: Func, t_final: f64, speed: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon T must be positive, got {t_final}")));
        }
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::InvalidInput(format!("speed c must be positive, got {speed}")));
        }
        Ok(LineProblem { f, g, t_final, speed })
    }

    /// Convenience constructor from expression strings.
    pub fn parse(f: &str, g: &str, t_final: f64) -> Result<Self> {
        LineProblem::new(parse_expr(f)?, parse_expr(g)?, t_final)
    }
}

/// Rescale `x -> x / c` to unit speed. Returns the unit-speed problem and the
/// scale `c`: the original solution is `y(t, x) = Y(t, x / c)`.
pub fn normalize_speed(p: &LineProblem) -> (LineProblem, f64) {
    let c = p.speed;
    if c == 1.0 {
        return (p.clone(), 1.0);
    }
    let normalized = LineProblem {
        f: p.f.compose_affine(c, 0.0),
        g: p.g.compose_affine(c, 0.0),
        t_final: p.t_final,
        speed: 1.0,
    };
    (normalized, c)
}

/// `f~` and its 2-jet at the origin.
#[derive(Debug, Clone)]
pub struct ReducedTarget {
    pub ftilde: Func,
    pub a0: f64,
    pub b0: f64,
    pub c0: f64,
}

impl ReducedTarget {
    pub fn new(ftilde: Func) -> Result<Self> {
        Ok(ReducedTarget {
            a0: ftilde.eval(0.0)?,
            b0: ftilde.deriv(0.0, 1)?,
            c0: ftilde.deriv(0.0, 2)?,
            ftilde,
        })
    }

    /// The quadratic `a0 + b0 x + c0 x^2 / 2` with the given 2-jet.
    pub fn from_moments(a0: f64, b0: f64, c0: f64) -> Self {
        let ftilde = Func::parse(&format!("{a0:e} + {b0:e}*x + {c0:e}*x^2/2")).expect("well-formed polynomial");
        ReducedTarget { ftilde, a0, b0, c0 }
    }
}

/// `f~(x) = g(x) - (f(x - T) + f(x + T)) / 2` for a unit-speed problem.
pub fn reduce_target(p: &LineProblem) -> Result<ReducedTarget> {
    if p.speed != 1.0 {
        return Err(Error::InvalidInput("reduce_target expects a unit-speed problem".into()));
    }
    let t = p.t_final;
    let ftilde = Func::linear_combination(vec![
        (1.0, p.g.clone()),
        (-0.5, p.f.compose_affine(1.0, -t)),
        (-0.5, p.f.compose_affine(1.0, t)),
    ]);
    ReducedTarget::new(ftilde)
}

/// Which seed the solver anchors the velocity on.
#[derive(Debug, Clone, Default)]
pub enum SeedChoice {
    #[default]
    Polynomial,
    Trigonometric,
    /// A user seed on `[-T, T]` in unit-speed coordinates.
    User(Func),
    /// An already validated seed.
    Seed(SeedFunction),
}

/// Solve with the default polynomial seed.
pub fn solve_line(p: &LineProblem) -> Result<ControlSolution> {
    solve_line_with_seed(p, &SeedChoice::Polynomial)
}

pub fn solve_line_with_seed(p: &LineProblem, choice: &SeedChoice) -> Result<ControlSolution> {
    check_smooth(p)?;
    let (normalized, scale) = normalize_speed(p);
    let rt = reduce_target(&normalized)?;
    let t = p.t_final;
    let seed = match choice {
        SeedChoice::Polynomial => seed_polynomial(&rt, t),
        SeedChoice::Trigonometric => seed_trig(&rt, t),
        SeedChoice::User(u) => SeedFunction::user(u.clone(), &rt, t)?,
        SeedChoice::Seed(s) => {
            if (s.half_width() - t).abs() > 1e-12 * t {
                return Err(Error::InvalidInput(format!(
                    "seed half-width {} does not match T = {t}",
                    s.half_width()
                )));
            }
            s.clone()
        }
    };
    Ok(ControlSolution::from_parts(p.clone(), normalized, scale, rt, seed))
}

/// Solve each component independently; all components must share `T` and `c`.
pub fn solve_vector_line(components: &[LineProblem]) -> Result<Vec<ControlSolution>> {
    let Some(first) = components.first() else {
        return Err(Error::InvalidInput("vector problem has no components".into()));
    };
    for (i, p) in components.iter().enumerate() {
        if p.t_final != first.t_final || p.speed != first.speed {
            return Err(Error::InvalidInput(format!(
                "component {i} has (T, c) = ({}, {}), expected ({}, {})",
                p.t_final, p.speed, first.t_final, first.speed
            )));
        }
    }
    components.iter().map(solve_line).collect()
}

/// Derivatives up to order 2 of `f` and `g` must be finite at the probe
/// points inside their domains.
fn check_smooth(p: &LineProblem) -> Result<()> {
    let reach = p.speed * p.t_final;
    let xs = linspace(-5.0 * (reach + 1.0), 5.0 * (reach + 1.0), 401);
    for (name, func) in [("f", &p.f), ("g", &p.g)] {
        let (lo, hi) = func.domain();
        for &x in xs.iter().filter(|&&x| x >= lo && x <= hi) {
            for order in 0..=2 {
                let value = func.deriv(x, order)?;
                if !value.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "{name} is not twice differentiable near x = {x} (order {order} derivative is {value})"
                    )));
                }
            }
        }
    }
    Ok(())
}
