//! Independent checks of synthesized solutions: a leapfrog forward oracle,
//! finite-difference PDE residuals with observed convergence order, and a
//! pass/fail diagnostics record.

mod leapfrog;

pub use leapfrog::{compare, discrete_energy, fd_forward, Deviation, FdBoundary, FdField, FdGrid};

use serde::Serialize;

use crate::error::Result;
use crate::field::SpaceTimeField;
use crate::funcrep::linspace;

/// Which equation the residual is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pde {
    /// `y_tt - y_xx`
    Wave,
    /// `y_tt - y_xx - (y_t^2 - y_x^2)`
    WaveMap,
}

/// Rectangle `[t0, t1] x [x0, x1]` on which residuals are sampled.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Domain {
    pub t0: f64,
    pub t1: f64,
    pub x0: f64,
    pub x1: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport {
    pub hs: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Observed order from the two finest steps.
    pub order: f64,
    /// Least-squares slope of `log residual` against `log h` over all steps.
    pub fitted_order: f64,
    /// All residuals at round-off level: the field is an exact solution of
    /// the discrete stencil and the order is meaningless.
    pub exact: bool,
    pub pass: bool,
}

/// Required observed order.
pub const MIN_ORDER: f64 = 1.9;

/// Sample points per axis for the residual.
const RESIDUAL_SAMPLES: usize = 9;

/// Sample points of `domain`, shrunk by `margin`, at golden-ratio offsets
/// so that they avoid symmetric positions.
fn sample_points(domain: &Domain, margin: f64) -> Vec<(f64, f64)> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let axis = |a: f64, b: f64, shift: f64| -> Vec<f64> {
        let (a, b) = (a + margin, b - margin);
        (0..RESIDUAL_SAMPLES)
            .map(|i| {
                let u = (i as f64 + (shift + phi * (i as f64 + 1.0)).fract()) / RESIDUAL_SAMPLES as f64;
                a + (b - a) * u
            })
            .collect()
    };
    let ts = axis(domain.t0, domain.t1, 0.0);
    let xs = axis(domain.x0, domain.x1, 0.5);
    ts.iter().flat_map(|&t| xs.iter().map(move |&x| (t, x))).collect()
}

/// Max residual of `pde` at `points`, with spatial step `h` and time step
/// `h / 2`.
///
/// Unequal steps keep the leading truncation term `(ht^2 - hx^2) y_xxxx / 12`
/// alive for true wave solutions; with `ht = hx` it cancels and the residual
/// is pure round-off.
pub fn residual_at<F: SpaceTimeField + ?Sized>(y: &F, points: &[(f64, f64)], h: f64, pde: Pde) -> Result<f64> {
    let (hx, ht) = (h, 0.5 * h);
    let mut worst: f64 = 0.0;
    for &(t, x) in points {
        let c = y.value(t, x)?;
        let (tp, tm) = (y.value(t + ht, x)?, y.value(t - ht, x)?);
        let (xp, xm) = (y.value(t, x + hx)?, y.value(t, x - hx)?);
        let ytt = (tp - 2.0 * c + tm) / (ht * ht);
        let yxx = (xp - 2.0 * c + xm) / (hx * hx);
        let r = match pde {
            Pde::Wave => ytt - yxx,
            Pde::WaveMap => {
                let yt = (tp - tm) / (2.0 * ht);
                let yx = (xp - xm) / (2.0 * hx);
                ytt - yxx - (yt * yt - yx * yx)
            }
        };
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Residuals for a decreasing `h` sequence and their observed order, on a
/// fixed 9 x 9 sample of `domain` kept `2 max(h)` away from its edges.
pub fn residual_order<F: SpaceTimeField + ?Sized>(y: &F, domain: &Domain, hs: &[f64], pde: Pde) -> Result<OrderReport> {
    residual_order_where(y, domain, hs, pde, |_, _, _| true)
}

/// [`residual_order`] restricted to the sample points `(t, x)` for which
/// `keep(t, x, reach)` holds, where `reach = 1.5 max(h)` bounds how far the
/// coarsest stencil extends along either characteristic `x +- t`. Used to
/// stay clear of lines where the field is only `C^2`.
pub fn residual_order_where<F, K>(y: &F, domain: &Domain, hs: &[f64], pde: Pde, keep: K) -> Result<OrderReport>
where
    F: SpaceTimeField + ?Sized,
    K: Fn(f64, f64, f64) -> bool,
{
    if hs.len() < 3 {
        return Err(crate::error::Error::InvalidInput(format!(
            "residual order needs at least 3 step sizes, got {}",
            hs.len()
        )));
    }
    let hmax = hs.iter().fold(0.0f64, |m, &h| m.max(h));
    let points: Vec<(f64, f64)> = sample_points(domain, 2.0 * hmax)
        .into_iter()
        .filter(|&(t, x)| keep(t, x, 1.5 * hmax))
        .collect();
    if points.is_empty() {
        return Err(crate::error::Error::InvalidInput(
            "no residual sample point is left after exclusion".into(),
        ));
    }
    let residuals = hs
        .iter()
        .map(|&h| residual_at(y, &points, h, pde))
        .collect::<Result<Vec<_>>>()?;
    // round-off in a second difference is about eps |y| / ht^2
    let scale = domain_scale(y, domain)?;
    let exact = hs
        .iter()
        .zip(&residuals)
        .all(|(&h, &r)| r <= 1e-6 * scale.max(1.0) * (1.0 + 1e-10 / (h * h)));
    let n = hs.len();
    let order = ls_slope(&hs[n - 2..], &residuals[n - 2..]);
    let fitted_order = ls_slope(hs, &residuals);
    Ok(OrderReport {
        hs: hs.to_vec(),
        residuals,
        order,
        fitted_order,
        exact,
        pass: exact || order >= MIN_ORDER,
    })
}

fn domain_scale<F: SpaceTimeField + ?Sized>(y: &F, d: &Domain) -> Result<f64> {
    let mut m: f64 = 0.0;
    for t in linspace(d.t0, d.t1, 3) {
        for x in linspace(d.x0, d.x1, 3) {
            m = m.max(y.value(t, x)?.abs());
        }
    }
    Ok(m)
}

/// Slope of the least-squares line through `(log h, log r)`; residuals of
/// exactly zero are clamped to the smallest positive double.
fn ls_slope(hs: &[f64], rs: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = hs
        .iter()
        .zip(rs)
        .map(|(h, r)| (h.ln(), r.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// The default step sequence `0.04, 0.02, 0.01, 0.005` scaled by `scale`.
pub fn default_steps(scale: f64) -> Vec<f64> {
    [0.04, 0.02, 0.01, 0.005].iter().map(|h| h * scale).collect()
}

/// One named check with its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Everything measured about one solution.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<OrderReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Deviation>,
}

impl Diagnostics {
    /// Record `value <= tolerance`.
    pub fn at_most(&mut self, name: &str, value: f64, tolerance: f64) -> &mut Self {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tolerance,
            pass: value <= tolerance,
        });
        self
    }

    /// Record `value >= bound` (stored with `tolerance = bound`).
    pub fn at_least(&mut self, name: &str, value: f64, bound: f64) -> &mut Self {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            tolerance: bound,
            pass: value >= bound,
        });
        self
    }

    pub fn with_residual(&mut self, report: OrderReport) -> &mut Self {
        self.checks.push(Check {
            name: "residual_order".into(),
            value: if report.exact { f64::INFINITY } else { report.order },
            tolerance: MIN_ORDER,
            pass: report.pass,
        });
        self.residual = Some(report);
        self
    }

    pub fn with_oracle(&mut self, dev: Deviation, tolerance: f64) -> &mut Self {
        self.at_most("oracle_max_deviation", dev.max, tolerance);
        self.oracle = Some(dev);
        self
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    /// Closed-form field for tests.
    struct Closed<F: Fn(f64, f64) -> f64 + Send + Sync>(F, f64);

    impl<F: Fn(f64, f64) -> f64 + Send + Sync> SpaceTimeField for Closed<F> {
        fn value(&self, t: f64, x: f64) -> Result<f64> {
            Ok((self.0)(t, x))
        }
        fn partial(&self, _: f64, _: f64, dt: u8, dx: u8) -> Result<f64> {
            Err(Error::DerivativeOrder(dt + dx))
        }
        fn horizon(&self) -> f64 {
            self.1
        }
    }

    const DOMAIN: Domain = Domain {
        t0: 0.0,
        t1: 1.0,
        x0: -1.0,
        x1: 1.0,
    };

    #[test]
    fn order_examples() {
        let hs = default_steps(1.0);
        let exact = residual_order(&Closed(|t, x| x + t, 1.0), &DOMAIN, &hs, Pde::Wave).unwrap();
        assert!(exact.exact && exact.pass);
        let smooth = residual_order(&Closed(|t: f64, x: f64| t.cos() * x.sin(), 1.0), &DOMAIN, &hs, Pde::Wave).unwrap();
        assert!(!smooth.exact && smooth.order >= MIN_ORDER, "{smooth:?}");
        let wrong = residual_order(&Closed(|t, _| t * t, 1.0), &DOMAIN, &hs, Pde::Wave).unwrap();
        assert!(!wrong.pass && (wrong.residuals[3] - 2.0).abs() < 1e-6);
        assert!(residual_order(&Closed(|t, x| x + t, 1.0), &DOMAIN, &hs[..2], Pde::Wave).is_err());
    }

    #[test]
    fn kinks_are_excluded() {
        // C^2 across x - t = 0.1: third derivative jumps
        let kinked = Closed(|t: f64, x: f64| (x - t - 0.1).max(0.0).powi(3) + (x + t).sin(), 1.0);
        let keep = |t: f64, x: f64, reach: f64| (x - t - 0.1).abs() > reach;
        let rep = residual_order_where(&kinked, &DOMAIN, &default_steps(1.0), Pde::Wave, keep).unwrap();
        assert!(rep.pass, "{rep:?}");
        assert!(residual_order_where(&kinked, &DOMAIN, &default_steps(1.0), Pde::Wave, |_, _, _| false).is_err());
    }

    #[test]
    fn wave_map_residual() {
        // y = -ln(2 + sin(x) cos(t)) solves the wave-map equation
        let y = Closed(|t: f64, x: f64| -(2.0 + x.sin() * t.cos()).ln(), 1.0);
        let rep = residual_order(&y, &DOMAIN, &default_steps(1.0), Pde::WaveMap).unwrap();
        assert!(rep.pass && !rep.exact, "{rep:?}");
        let rep = residual_order(&y, &DOMAIN, &default_steps(1.0), Pde::Wave).unwrap();
        assert!(!rep.pass);
    }

    #[test]
    fn diagnostics_bookkeeping() {
        let mut d = Diagnostics::default();
        d.at_most("terminal", 1e-9, 1e-7).at_least("min", 0.4, 0.5);
        assert!(!d.all_pass());
        assert_eq!(d.failures().len(), 1);
        assert_eq!(d.failures()[0].name, "min");
    }
}
