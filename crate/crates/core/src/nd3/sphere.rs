//! Product quadrature on the unit sphere and expression-backed fields of
//! three variables.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::funcrep::{parse_with_vars, Expr};

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// `P_m`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(m, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `m` Gauss-Legendre nodes in `cos(theta)` times `2m` equispaced azimuths.
/// The node set is symmetric under `y -> -y`.
#[derive(Debug, Clone)]
pub struct SphericalQuadrature {
    pub order: usize,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphericalQuadrature {
    pub fn new(order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidInput(format!("sphere quadrature order must be >= 2, got {order}")));
        }
        let (zs, wz) = gauss_legendre(order);
        let azimuths = 2 * order;
        let dphi = 2.0 * PI / azimuths as f64;
        let mut nodes = Vec::with_capacity(order * azimuths);
        let mut weights = Vec::with_capacity(order * azimuths);
        for (z, w) in zs.iter().zip(&wz) {
            let rho = (1.0 - z * z).max(0.0).sqrt();
            for j in 0..azimuths {
                let (s, c) = (dphi * j as f64).sin_cos();
                nodes.push([rho * c, rho * s, *z]);
                weights.push(w * dphi);
            }
        }
        Ok(SphericalQuadrature { order, nodes, weights })
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `(1 / 4 pi) sum_i w_i h(y_i)`.
    pub fn mean<F: FnMut([f64; 3]) -> f64>(&self, mut h: F) -> f64 {
        let sum: f64 = self.nodes.iter().zip(&self.weights).map(|(y, w)| w * h(*y)).sum();
        sum / (4.0 * PI)
    }
}

impl Default for SphericalQuadrature {
    fn default() -> Self {
        SphericalQuadrature::new(16).expect("order 16 is valid")
    }
}

/// Variable names of a 3-D field: `x1, x2, x3` or `x, y, z`.
pub const FIELD_VARIABLES: [&str; 6] = ["x1", "x2", "x3", "x", "y", "z"];

/// Expression of three variables with symbolic derivatives up to order 3.
#[derive(Debug, Clone)]
pub struct Field3 {
    source: String,
    expr: Expr,
    grad: Vec<Expr>,
    hess: Vec<Expr>,
    third: Vec<Expr>,
}

impl Field3 {
    pub fn parse(src: &str) -> Result<Self> {
        let expr = parse_with_vars(src, &FIELD_VARIABLES)?.remap_vars(&[0, 1, 2, 0, 1, 2]);
        Ok(Field3::from_expr(src.to_string(), expr))
    }

    pub fn constant(c: f64) -> Self {
        Field3::from_expr(format!("{c:e}"), Expr::Const(c))
    }

    fn from_expr(source: String, expr: Expr) -> Self {
        let grad: Vec<Expr> = (0..3).map(|i| expr.derivative(i)).collect();
        let hess: Vec<Expr> = (0..9).map(|ij| grad[ij / 3].derivative(ij % 3)).collect();
        let third: Vec<Expr> = (0..27).map(|ijk| hess[ijk / 3].derivative(ijk % 3)).collect();
        Field3 {
            source,
            expr,
            grad,
            hess,
            third,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.expr.eval(&p)
    }

    /// `D^k h(p)[y, ..., y]` for `k <= 3`.
    pub fn directional(&self, p: [f64; 3], y: [f64; 3], k: u8) -> f64 {
        match k {
            0 => self.eval(p),
            1 => (0..3).map(|i| self.grad[i].eval(&p) * y[i]).sum(),
            2 => (0..9).map(|ij| self.hess[ij].eval(&p) * y[ij / 3] * y[ij % 3]).sum(),
            _ => (0..27)
                .map(|ijk| self.third[ijk].eval(&p) * y[ijk / 9] * y[(ijk / 3) % 3] * y[ijk % 3])
                .sum(),
        }
    }
}
