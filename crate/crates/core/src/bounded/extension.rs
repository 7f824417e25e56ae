//! Reflections of interval data and the boundary-data extensions that
//! satisfy `h(t + L) + h(t - L) = 2 l(t)` on `[0, T]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcrep::{Func, PrimitiveTable, RealFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parity {
    Odd,
    Even,
}

#[derive(Debug, Clone)]
struct Reflection {
    inner: Func,
    length: f64,
    parity: Parity,
}

impl RealFunction for Reflection {
    fn eval(&self, x: f64) -> Result<f64> {
        self.deriv(x, 0)
    }

    fn deriv(&self, x: f64, order: u8) -> Result<f64> {
        let l = self.length;
        let s = (x + l).rem_euclid(2.0 * l) - l;
        if s >= 0.0 {
            return self.inner.deriv(s.min(l), order);
        }
        // d^k/dx^k [±f(-x)] = ±(-1)^k f^(k)(-x)
        let sign = match self.parity {
            Parity::Odd => -1.0,
            Parity::Even => 1.0,
        } * if order % 2 == 0 { 1.0 } else { -1.0 };
        Ok(sign * self.inner.deriv((-s).min(l), order)?)
    }
}

/// Odd reflection onto `[-L, 0]` followed by `2L`-periodization. Requires
/// `f(0) = f(L) = 0` within `1e-6`.
pub fn extend_odd(f: &Func, length: f64) -> Result<Func> {
    for x in [0.0, length] {
        let v = f.eval(x)?;
        if v.abs() > 1e-6 {
            return Err(Error::Compatibility(format!(
                "odd extension needs vanishing endpoint values, f({x}) = {v:e}"
            )));
        }
    }
    reflect(f, length, Parity::Odd)
}

/// Even reflection onto `[-L, 0]` followed by `2L`-periodization.
pub fn extend_even(f: &Func, length: f64) -> Result<Func> {
    reflect(f, length, Parity::Even)
}

fn reflect(f: &Func, length: f64, parity: Parity) -> Result<Func> {
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidInput(format!("interval length must be positive, got {length}")));
    }
    // the periodicity check compares f(-L) with f(L); with a tiny endpoint
    // mismatch allowed by extend_odd the defect is 2|f(L)|
    Func::new(Reflection {
        inner: f.clone(),
        length,
        parity,
    })
    .with_period_tol(2.0 * length, 1e-5)
}

/// Polynomial on `[a, b]` in the local variable `u = (s - a) / (b - a)`.
#[derive(Debug, Clone)]
struct Hermite {
    a: f64,
    width: f64,
    coef: Vec<f64>,
}

impl Hermite {
    /// Degree `2m + 1` interpolant of the derivatives `0..=m` given at both
    /// ends.
    fn new(a: f64, b: f64, left: &[f64], right: &[f64]) -> Hermite {
        let m = left.len() - 1;
        let n = 2 * m + 2;
        let w = b - a;
        let mut coef = vec![0.0; n];
        let mut fact = 1.0;
        for j in 0..=m {
            if j > 0 {
                fact *= j as f64;
            }
            coef[j] = left[j] * w.powi(j as i32) / fact;
        }
        // conditions at u = 1 for the upper m+1 coefficients:
        // sum_i c_i i!/(i-j)! = w^j right[j]
        let size = m + 1;
        let mut mat = vec![vec![0.0; size + 1]; size];
        for (j, row) in mat.iter_mut().enumerate() {
            let mut rhs = right[j] * w.powi(j as i32);
            for (i, c) in coef.iter().enumerate().take(m + 1) {
                rhs -= c * falling(i, j);
            }
            for (col, cell) in row.iter_mut().take(size).enumerate() {
                *cell = falling(m + 1 + col, j);
            }
            row[size] = rhs;
        }
        let upper = solve_dense(mat);
        coef[m + 1..].copy_from_slice(&upper);
        Hermite { a, width: w, coef }
    }

    fn deriv(&self, s: f64, order: u8) -> f64 {
        let u = (s - self.a) / self.width;
        let k = order as usize;
        let mut acc = 0.0;
        for i in (k..self.coef.len()).rev() {
            acc = acc * u + self.coef[i] * falling(i, k);
        }
        acc / self.width.powi(order as i32)
    }
}

/// `i! / (i - j)!`, zero when `j > i`.
fn falling(i: usize, j: usize) -> f64 {
    if j > i {
        return 0.0;
    }
    ((i - j + 1)..=i).fold(1.0, |acc, v| acc * v as f64)
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve_dense(mut m: Vec<Vec<f64>>) -> Vec<f64> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        m.swap(col, pivot);
        for row in col + 1..n {
            let factor = m[row][col] / m[col][col];
            for k in col..=n {
                m[row][k] -= factor * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = m[row][n];
        for k in row + 1..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    x
}

/// Boundary data `h` (or `H`) extended past `[0, T]`.
///
/// Pieces, for `T < L`:
///
/// ```text
/// [lo, -L)     Taylor continuation from -L (Dirichlet only)
/// [-L, 0)      Hermite from the derivatives of l at 0 to those of h at 0
/// [0, T]       the data h
/// (T, L]       Hermite from the derivatives of h at T to those of l at 0
/// (L, T + L]   2 l(t - L) - h(t - 2L)
/// ```
///
/// At `±L` the free derivatives are `l^(j)(0)`, which makes the stitch at `L`
/// consistent with the functional equation at `t = 0`.
#[derive(Debug, Clone)]
pub struct ExtendedBoundaryFn {
    data: Func,
    other: Func,
    t_final: f64,
    length: f64,
    order: u8,
    left: Hermite,
    right: Hermite,
    taylor: Vec<f64>,
    lo: f64,
}

/// Largest one-sided derivative mismatch at each stitch point.
#[derive(Debug, Clone, Serialize)]
pub struct JunctionReport {
    pub points: Vec<(f64, f64)>,
    pub max_mismatch: f64,
    pub functional_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Piece {
    Taylor,
    Left,
    Data,
    Right,
    Reflected,
}

impl ExtendedBoundaryFn {
    fn build(data: &Func, other: &Func, t_final: f64, length: f64, order: u8, lo: f64) -> Result<Self> {
        if !(t_final > 0.0 && length > 0.0) {
            return Err(Error::InvalidInput("T and L must be positive".into()));
        }
        if t_final >= length {
            return Err(Error::OutOfRange {
                what: "T/L for the boundary extension",
                value: t_final / length,
                lo: 0.0,
                hi: 1.0,
            });
        }
        let jet = |f: &Func, x: f64| -> Result<Vec<f64>> { (0..=order).map(|j| f.deriv(x, j)).collect() };
        let l0 = jet(other, 0.0)?;
        let h0 = jet(data, 0.0)?;
        let ht = jet(data, t_final)?;
        let left = Hermite::new(-length, 0.0, &l0, &h0);
        let right = Hermite::new(t_final, length, &ht, &l0);
        Ok(ExtendedBoundaryFn {
            data: data.clone(),
            other: other.clone(),
            t_final,
            length,
            order,
            left,
            right,
            taylor: l0,
            lo,
        })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Smoothness order of the construction (3 Dirichlet, 2 Neumann).
    pub fn order(&self) -> u8 {
        self.order
    }

    fn piece(&self, s: f64) -> Piece {
        let (t, l) = (self.t_final, self.length);
        if s < -l {
            Piece::Taylor
        } else if s < 0.0 {
            Piece::Left
        } else if s <= t {
            Piece::Data
        } else if s <= l {
            Piece::Right
        } else {
            Piece::Reflected
        }
    }

    fn piece_deriv(&self, piece: Piece, s: f64, order: u8) -> Result<f64> {
        let l = self.length;
        match piece {
            Piece::Taylor => {
                let d = s + l;
                let k = order as usize;
                let mut acc = 0.0;
                let mut fact = 1.0;
                for (i, c) in self.taylor.iter().enumerate().skip(k) {
                    if i > k {
                        fact *= (i - k) as f64;
                    }
                    acc += c * d.powi((i - k) as i32) / fact;
                }
                Ok(acc)
            }
            Piece::Left => Ok(self.left.deriv(s, order)),
            Piece::Data => self.data.deriv(s.clamp(0.0, self.t_final), order),
            Piece::Right => Ok(self.right.deriv(s, order)),
            Piece::Reflected => {
                let t = s - l;
                let back = s - 2.0 * l;
                let inner = self.piece(back);
                Ok(2.0 * self.other.deriv(t.clamp(0.0, self.t_final), order)? - self.piece_deriv(inner, back, order)?)
            }
        }
    }

    /// Derivative jumps at the stitch points `-L, 0, T, L` (orders up to the
    /// construction's smoothness) and the functional-equation residual on
    /// `n` points of `[0, T]`.
    pub fn junction_report(&self, n: usize) -> Result<JunctionReport> {
        let (t, l) = (self.t_final, self.length);
        let mut stitches = vec![(0.0, Piece::Left, Piece::Data), (t, Piece::Data, Piece::Right), (l, Piece::Right, Piece::Reflected)];
        if self.lo < -l {
            stitches.insert(0, (-l, Piece::Taylor, Piece::Left));
        }
        let mut points = Vec::new();
        let mut max_mismatch: f64 = 0.0;
        for (s, a, b) in stitches {
            let mut worst: f64 = 0.0;
            for j in 0..=self.order {
                let diff = (self.piece_deriv(a, s, j)? - self.piece_deriv(b, s, j)?).abs();
                worst = worst.max(diff);
            }
            max_mismatch = max_mismatch.max(worst);
            points.push((s, worst));
        }
        let functional_residual = self.functional_residual(n)?;
        Ok(JunctionReport {
            points,
            max_mismatch,
            functional_residual,
        })
    }

    /// `max |h(t + L) + h(t - L) - 2 l(t)|` over `n` points of `[0, T]`.
    pub fn functional_residual(&self, n: usize) -> Result<f64> {
        let l = self.length;
        let n = n.max(2);
        (0..n).try_fold(0.0f64, |m, i| {
            let t = self.t_final * i as f64 / (n - 1) as f64;
            let r = self.eval(t + l)? + self.eval(t - l)? - 2.0 * self.other.eval(t)?;
            Ok(m.max(r.abs()))
        })
    }

    /// Breakpoints of the construction inside its domain, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = RealFunction::domain(self);
        let mut pts = vec![lo];
        for s in [-self.length, 0.0, self.t_final, self.length] {
            if s > lo && s < hi {
                pts.push(s);
            }
        }
        pts.push(hi);
        pts
    }
}

impl RealFunction for ExtendedBoundaryFn {
    fn eval(&self, s: f64) -> Result<f64> {
        self.deriv(s, 0)
    }

    fn deriv(&self, s: f64, order: u8) -> Result<f64> {
        let (lo, hi) = RealFunction::domain(self);
        let slack = 1e-12 * (1.0 + hi.abs());
        if s.is_nan() || s < lo - slack || s > hi + slack {
            return Err(Error::OutOfDomain { x: s, lo, hi });
        }
        if order > 3 {
            return Err(Error::DerivativeOrder(order));
        }
        self.piece_deriv(self.piece(s), s, order)
    }

    fn domain(&self) -> (f64, f64) {
        (self.lo, self.t_final + self.length)
    }
}

/// Extend Dirichlet data `h` to `[-T - L, T + L]` (C^3, degree-7 Hermite
/// blending). Requires `T < L`.
pub fn extend_boundary_dirichlet(h: &Func, l: &Func, t_final: f64, length: f64) -> Result<ExtendedBoundaryFn> {
    ExtendedBoundaryFn::build(h, l, t_final, length, 3, -t_final - length)
}

/// Extend Neumann data `H` to `[-L, T + L]` (C^2, degree-5 Hermite
/// blending). Requires `T < L`.
pub fn extend_boundary_neumann(h: &Func, k: &Func, t_final: f64, length: f64) -> Result<ExtendedBoundaryFn> {
    ExtendedBoundaryFn::build(h, k, t_final, length, 2, -length)
}

/// `P(s) = int_0^s H` for an extended Neumann datum, tabulated piece by
/// piece so that no quadrature cell straddles a junction.
#[derive(Debug, Clone)]
pub struct ExtendedPrimitive {
    ext: ExtendedBoundaryFn,
    pieces: Vec<(f64, f64, f64, PrimitiveTable)>,
}

impl ExtendedPrimitive {
    pub fn new(ext: &ExtendedBoundaryFn) -> Result<Self> {
        let func = Func::new(ext.clone());
        let pts = ext.breakpoints();
        let mut raw = Vec::new();
        for w in pts.windows(2) {
            let cells = ((w[1] - w[0]) * 1024.0).ceil().max(64.0) as usize;
            raw.push((w[0], w[1], PrimitiveTable::new(func.clone(), w[0], w[1], cells)?));
        }
        // offsets so that P(0) = 0
        let zero = raw.iter().position(|(a, _, _)| *a == 0.0).unwrap_or(0);
        let mut offsets = vec![0.0; raw.len()];
        for i in zero + 1..raw.len() {
            offsets[i] = offsets[i - 1] + raw[i - 1].2.total();
        }
        for i in (0..zero).rev() {
            offsets[i] = offsets[i + 1] - raw[i].2.total();
        }
        let pieces = raw
            .into_iter()
            .zip(offsets)
            .map(|((a, b, table), off)| (a, b, off, table))
            .collect();
        Ok(ExtendedPrimitive { ext: ext.clone(), pieces })
    }
}

impl RealFunction for ExtendedPrimitive {
    fn eval(&self, s: f64) -> Result<f64> {
        let (lo, hi) = self.ext.domain();
        let slack = 1e-12 * (1.0 + hi.abs());
        if s.is_nan() || s < lo - slack || s > hi + slack {
            return Err(Error::OutOfDomain { x: s, lo, hi });
        }
        let piece = self
            .pieces
            .iter()
            .find(|(_, b, _, _)| s <= *b)
            .unwrap_or_else(|| self.pieces.last().expect("at least one piece"));
        Ok(piece.2 + piece.3.eval(s)?)
    }

    fn deriv(&self, s: f64, order: u8) -> Result<f64> {
        match order {
            0 => self.eval(s),
            1..=3 => self.ext.deriv(s, order - 1),
            _ => Err(Error::DerivativeOrder(order)),
        }
    }

    fn domain(&self) -> (f64, f64) {
        self.ext.domain()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcrep::Quadrature;
    use proptest::prelude::*;

    #[test]
    fn odd_examples() {
        let l = 1.3;
        let s = Func::parse(&format!("sin(pi*x/{l})")).unwrap();
        let e = extend_odd(&s, l).unwrap();
        assert_eq!(e.period(), Some(2.0 * l));
        for x in [-5.0, -0.4, 0.7, 3.9] {
            assert!((e.eval(x).unwrap() - (std::f64::consts::PI * x / l).sin()).abs() < 1e-12);
            assert!((e.deriv(x, 1).unwrap() - std::f64::consts::PI / l * (std::f64::consts::PI * x / l).cos()).abs() < 1e-10);
        }
        let p = Func::parse(&format!("x*({l} - x)")).unwrap();
        let e = extend_odd(&p, l).unwrap();
        assert!((e.eval(-l / 2.0).unwrap() + l * l / 4.0).abs() < 1e-12);
        assert_eq!(extend_odd(&Func::zero(), l).unwrap().eval(0.3).unwrap(), 0.0);
        assert!(extend_odd(&Func::parse("cos(x)").unwrap(), l).is_err());
    }

    #[test]
    fn even_examples() {
        let c = Func::parse("cos(pi*x)").unwrap();
        let e = extend_even(&c, 1.0).unwrap();
        for x in [-2.3, -0.5, 0.25, 1.7] {
            assert!((e.eval(x).unwrap() - (std::f64::consts::PI * x).cos()).abs() < 1e-12);
        }
        assert_eq!(extend_even(&Func::constant(2.5), 1.0).unwrap().eval(-7.1).unwrap(), 2.5);
        assert_eq!(extend_even(&Func::parse("x^2").unwrap(), 1.0).unwrap().eval(-0.5).unwrap(), 0.25);
    }

    #[test]
    fn hermite_matches_endpoint_jets() {
        let left = [1.0, -2.0, 0.5, 3.0];
        let right = [0.2, 0.7, -1.0, 0.0];
        let h = Hermite::new(-0.3, 1.1, &left, &right);
        for j in 0..4u8 {
            assert!((h.deriv(-0.3, j) - left[j as usize]).abs() < 1e-10);
            assert!((h.deriv(1.1, j) - right[j as usize]).abs() < 1e-9);
        }
    }

    #[test]
    fn dirichlet_extension_examples() {
        let zero = extend_boundary_dirichlet(&Func::zero(), &Func::zero(), 0.25, 1.0).unwrap();
        for s in [-1.2, -0.5, 0.1, 0.6, 1.2] {
            assert_eq!(zero.eval(s).unwrap(), 0.0);
        }
        let ext = extend_boundary_dirichlet(&Func::zero(), &Func::constant(1.0), 0.25, 1.0).unwrap();
        assert!(ext.functional_residual(501).unwrap() <= 1e-8);
        let one = extend_boundary_dirichlet(&Func::constant(1.0), &Func::constant(1.0), 0.25, 1.0).unwrap();
        for s in [-1.2, -0.5, 0.1, 0.6, 1.2] {
            assert!((one.eval(s).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(extend_boundary_dirichlet(&Func::zero(), &Func::zero(), 1.0, 1.0).is_err());
        assert!(one.eval(1.3).is_err());
    }

    #[test]
    fn neumann_primitive() {
        let ext = extend_boundary_neumann(&Func::parse("cos(3*x)").unwrap(), &Func::parse("x^2 - 1").unwrap(), 0.4, 1.0).unwrap();
        let prim = ExtendedPrimitive::new(&ext).unwrap();
        let q = Quadrature::default();
        let pts = ext.breakpoints();
        for s in [-0.9, -0.2, 0.0, 0.3, 0.75, 1.3] {
            // Simpson piece by piece between 0 and s
            let (a, b) = if s >= 0.0 { (0.0, s) } else { (s, 0.0) };
            let mut edges = vec![a];
            edges.extend(pts.iter().copied().filter(|&p| p > a && p < b));
            edges.push(b);
            let mut num: f64 = edges.windows(2).map(|w| q.integrate(|x| ext.eval(x), w[0], w[1]).unwrap()).sum();
            if s < 0.0 {
                num = -num;
            }
            assert!((prim.eval(s).unwrap() - num).abs() < 1e-10, "s = {s}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn reflections_are_odd_even_periodic(x in -10.0f64..10.0, l in 0.3f64..3.0, a in -2.0f64..2.0) {
            let f = Func::parse(&format!("{a}*x*({l}-x) + sin(pi*x/{l})")).unwrap();
            let odd = extend_odd(&f, l).unwrap();
            prop_assert!((odd.eval(x).unwrap() + odd.eval(-x).unwrap()).abs() < 1e-10);
            prop_assert!((odd.eval(x).unwrap() - odd.eval(x + 2.0 * l).unwrap()).abs() < 1e-10);
            let g = Func::parse(&format!("{a}*x^3 + cos(x)")).unwrap();
            let even = extend_even(&g, l).unwrap();
            prop_assert!((even.eval(x).unwrap() - even.eval(-x).unwrap()).abs() < 1e-10);
            prop_assert!((even.eval(x).unwrap() - even.eval(x + 2.0 * l).unwrap()).abs() < 1e-9 * (1.0 + a.abs() * l * l * l));
        }

        #[test]
        fn extensions_are_smooth(a in -1.0f64..1.0, b in -1.0f64..1.0, k in 0.5f64..3.0, t in 0.1f64..0.9) {
            let h = Func::parse(&format!("{a}*sin({k}*x) + cos(x)")).unwrap();
            let l = Func::parse(&format!("{b}*exp(-x^2) + x/3")).unwrap();
            let d = extend_boundary_dirichlet(&h, &l, t, 1.0).unwrap();
            let rep = d.junction_report(201).unwrap();
            prop_assert!(rep.max_mismatch <= 1e-6, "{:?}", rep);
            prop_assert!(rep.functional_residual <= 1e-8);
            let n = extend_boundary_neumann(&h, &l, t, 1.0).unwrap();
            let rep = n.junction_report(201).unwrap();
            prop_assert!(rep.max_mismatch <= 1e-6, "{:?}", rep);
            prop_assert!(rep.functional_residual <= 1e-8);
        }
    }
}
