use std::path::Path;

use super::func::RealFunction;
use crate::error::{Error, Result};

/// Uniform samples `values[i] = f(x0 + i * dx)` with Catmull-Rom cubic
/// interpolation in between.
///
/// Derivatives are central finite differences of the interpolant with step
/// `dx`, shifted to one-sided stencils near the ends of the grid.
#[derive(Debug, Clone)]
pub struct Sampled {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
}

impl Sampled {
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::InvalidInput(format!(
                "sampled function needs at least 4 points, got {}",
                values.len()
            )));
        }
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(Error::InvalidInput(format!("sample spacing must be positive, got {dx}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sampled values must be finite".into()));
        }
        Ok(Sampled { x0, dx, values })
    }

    /// Load a two-column `x,value` CSV (header optional) with strictly
    /// increasing, uniformly spaced `x`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let csv_err = |message: String| Error::Csv {
            path: path.to_path_buf(),
            message,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| match e.into_kind() {
                csv::ErrorKind::Io(source) => Error::Io {
                    path: path.to_path_buf(),
                    source,
                },
                other => csv_err(format!("{other:?}")),
            })?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_err(e.to_string()))?;
            if record.len() != 2 {
                return Err(csv_err(format!("line {}: expected 2 columns, got {}", line + 1, record.len())));
            }
            let parsed: Option<(f64, f64)> = record[0]
                .parse()
                .ok()
                .zip(record[1].parse().ok());
            match parsed {
                Some((x, y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                // a non-numeric first line is a header
                None if line == 0 => continue,
                None => return Err(csv_err(format!("line {}: non-numeric value", line + 1))),
            }
        }
        if xs.len() < 4 {
            return Err(csv_err(format!("need at least 4 samples, got {}", xs.len())));
        }
        let dx = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        if dx <= 0.0 {
            return Err(csv_err("x column must be strictly increasing".into()));
        }
        for (i, pair) in xs.windows(2).enumerate() {
            let step = pair[1] - pair[0];
            if step <= 0.0 {
                return Err(csv_err(format!("x not strictly increasing at row {}", i + 2)));
            }
            if (step - dx).abs() > 1e-6 * dx {
                return Err(csv_err(format!("x spacing not uniform at row {}", i + 2)));
            }
        }
        Sampled::new(xs[0], dx, ys)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn x_end(&self) -> f64 {
        self.x0 + self.dx * (self.values.len() - 1) as f64
    }

    fn check(&self, x: f64) -> Result<()> {
        let (lo, hi) = (self.x0, self.x_end());
        let slack = 1e-12 * self.dx;
        if x.is_nan() || x < lo - slack || x > hi + slack {
            Err(Error::OutOfDomain { x, lo, hi })
        } else {
            Ok(())
        }
    }

    fn tangent(&self, i: usize) -> f64 {
        let n = self.values.len();
        let v = &self.values;
        if i == 0 {
            (v[1] - v[0]) / self.dx
        } else if i == n - 1 {
            (v[n - 1] - v[n - 2]) / self.dx
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * self.dx)
        }
    }

    fn interpolate(&self, x: f64) -> f64 {
        let n = self.values.len();
        let s = ((x - self.x0) / self.dx).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let u = s - i as f64;
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.tangent(i) * self.dx, self.tangent(i + 1) * self.dx);
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * p0
            + (u3 - 2.0 * u2 + u) * m0
            + (-2.0 * u3 + 3.0 * u2) * p1
            + (u3 - u2) * m1
    }
}

impl RealFunction for Sampled {
    fn eval(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.interpolate(x))
    }

    fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        self.check(x)?;
        if order == 0 {
            return Ok(self.interpolate(x));
        }
        if order > 3 {
            return Err(Error::DerivativeOrder(order));
        }
        let h = self.dx;
        // stencil half-width in units of h
        let reach = if order == 3 { 2.0 } else { 1.0 };
        let (lo, hi) = (self.x0, self.x_end());
        // move the stencil centre inside so every point stays in the domain
        let c = x.clamp(lo + reach * h, hi - reach * h);
        let f = |k: f64| self.interpolate(c + k * h);
        Ok(match order {
            1 => (f(1.0) - f(-1.0)) / (2.0 * h),
            2 => (f(1.0) - 2.0 * f(0.0) + f(-1.0)) / (h * h),
            _ => (f(2.0) - 2.0 * f(1.0) + 2.0 * f(-1.0) - f(-2.0)) / (2.0 * h * h * h),
        })
    }

    fn domain(&self) -> (f64, f64) {
        (self.x0, self.x_end())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::Func;
    use std::io::Write;

    fn squares(n: usize, dx: f64) -> Sampled {
        let values = (0..n).map(|i| (i as f64 * dx).powi(2)).collect();
        Sampled::new(0.0, dx, values).unwrap()
    }

    #[test]
    fn reproduces_quadratic() {
        let s = squares(41, 0.05);
        assert!((s.eval(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((s.eval(0.737).unwrap() - 0.737f64.powi(2)).abs() < 1e-12);
        // second derivative of x^2 at 1: 2 + O(h^2)
        assert!((s.deriv(1.0, 2).unwrap() - 2.0).abs() < 1e-9);
        assert!((s.deriv(1.0, 1).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn second_derivative_converges() {
        let exact = |x: f64| -x.sin();
        let mut errors = Vec::new();
        for &n in &[51usize, 101, 201] {
            let dx = 2.0 / (n - 1) as f64;
            let s = Sampled::new(0.0, dx, (0..n).map(|i| (i as f64 * dx).sin()).collect()).unwrap();
            errors.push((s.deriv(1.0, 2).unwrap() - exact(1.0)).abs());
        }
        assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
        assert!(errors[2] < 1e-3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Sampled::new(0.0, 0.1, vec![1.0, 2.0, 3.0]).is_err());
        assert!(Sampled::new(0.0, 0.0, vec![1.0; 5]).is_err());
        let s = squares(10, 0.1);
        assert!(matches!(s.eval(2.0), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn csv_loading() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "x,value").unwrap();
        for i in 0..=20 {
            let x = i as f64 * 0.05;
            writeln!(file, "{x},{}", (std::f64::consts::TAU * x).sin()).unwrap();
        }
        let s = Sampled::from_csv(file.path()).unwrap();
        assert_eq!(s.len(), 21);
        let f = Func::new(s).with_period_tol(1.0, 1e-9).unwrap();
        // wraps outside the sampled period
        assert!((f.eval(1.25).unwrap() - f.eval(0.25).unwrap()).abs() < 1e-15);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "0,1\n0.1,2\n0.3,3\n0.4,4").unwrap();
        assert!(matches!(Sampled::from_csv(bad.path()), Err(Error::Csv { .. })));
    }
}
