//! Problems on an interval `[0, L]` with Dirichlet or Neumann boundaries.
//!
//! Homogeneous boundaries are handled by odd (Dirichlet) or even (Neumann)
//! reflection to a `2L`-periodic problem. Inhomogeneous data is removed by a
//! lift built from an extension of the boundary data; for Dirichlet data
//! with `T > L` the roles of time and space are exchanged first.

mod extension;

pub use extension::{
    extend_boundary_dirichlet, extend_boundary_neumann, extend_even, extend_odd, ExtendedBoundaryFn, ExtendedPrimitive,
    JunctionReport,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::funcrep::{linspace, Func, RealFunction};
use crate::periodic::{recognize, solve_periodic, FourierSolution, PeriodicProblem};

/// Compatibility residuals above this are rejected.
pub const COMPAT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Boundary data: values `h, l` (Dirichlet) or outward-free slopes `H, K`
/// (Neumann) at `x = 0` and `x = L`, as functions of `t` on `[0, T]`.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub left: Func,
    pub right: Func,
}

#[derive(Debug, Clone)]
pub struct BoundedProblem {
    pub f: Func,
    pub g: Func,
    pub t_final: f64,
    pub length: f64,
    pub kind: BoundaryKind,
    /// `None` means homogeneous boundaries.
    pub boundary: Option<BoundaryData>,
}

impl BoundedProblem {
    pub fn new(f: Func, g: Func, t_final: f64, length: f64, kind: BoundaryKind) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidInput(format!("horizon T must be positive, got {t_final}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidInput(format!("interval length L must be positive, got {length}")));
        }
        Ok(BoundedProblem {
            f,
            g,
            t_final,
            length,
            kind,
            boundary: None,
        })
    }

    pub fn with_boundary(mut self, left: Func, right: Func) -> Self {
        self.boundary = Some(BoundaryData { left, right });
        self
    }

    pub fn is_homogeneous(&self) -> bool {
        self.boundary.is_none()
    }
}

/// Named corner residuals.
#[derive(Debug, Clone, Serialize)]
pub struct CompatReport {
    pub residuals: Vec<(String, f64)>,
    pub max: f64,
    pub pass: bool,
}

impl CompatReport {
    fn from_residuals(residuals: Vec<(String, f64)>) -> Self {
        let max = residuals.iter().fold(0.0f64, |m, (_, r)| m.max(r.abs()));
        CompatReport {
            pass: max <= COMPAT_TOLERANCE,
            residuals,
            max,
        }
    }

    fn worst(&self) -> String {
        self.residuals
            .iter()
            .filter(|(_, r)| r.abs() > COMPAT_TOLERANCE)
            .map(|(n, r)| format!("{n} = {r:e}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Corner conditions that the data must satisfy.
pub fn check_compat(p: &BoundedProblem) -> Result<CompatReport> {
    let (t, l) = (p.t_final, p.length);
    let (f, g) = (&p.f, &p.g);
    let mut out = Vec::new();
    let mut push = |name: &str, v: f64| out.push((name.to_string(), v));
    match (&p.boundary, p.kind) {
        (None, BoundaryKind::Dirichlet) => {
            for (name, func) in [("f", f), ("g", g)] {
                push(&format!("{name}(0)"), func.eval(0.0)?);
                push(&format!("{name}(L)"), func.eval(l)?);
                push(&format!("{name}''(0)"), func.deriv(0.0, 2)?);
                push(&format!("{name}''(L)"), func.deriv(l, 2)?);
            }
        }
        (None, BoundaryKind::Neumann) => {
            for (name, func) in [("f", f), ("g", g)] {
                push(&format!("{name}'(0)"), func.deriv(0.0, 1)?);
                push(&format!("{name}'(L)"), func.deriv(l, 1)?);
            }
        }
        (Some(b), BoundaryKind::Dirichlet) => {
            let (h, r) = (&b.left, &b.right);
            for (order, tick) in [(0u8, ""), (2, "''")] {
                push(&format!("f{tick}(0) - h{tick}(0)"), f.deriv(0.0, order)? - h.deriv(0.0, order)?);
                push(&format!("f{tick}(L) - l{tick}(0)"), f.deriv(l, order)? - r.deriv(0.0, order)?);
                push(&format!("g{tick}(0) - h{tick}(T)"), g.deriv(0.0, order)? - h.deriv(t, order)?);
                push(&format!("g{tick}(L) - l{tick}(T)"), g.deriv(l, order)? - r.deriv(t, order)?);
            }
        }
        (Some(b), BoundaryKind::Neumann) => {
            let (h, k) = (&b.left, &b.right);
            push("f'(0) - H(0)", f.deriv(0.0, 1)? - h.eval(0.0)?);
            push("f'(L) - K(0)", f.deriv(l, 1)? - k.eval(0.0)?);
            push("g'(0) - H(T)", g.deriv(0.0, 1)? - h.eval(t)?);
            push("g'(L) - K(T)", g.deriv(l, 1)? - k.eval(t)?);
        }
    }
    Ok(CompatReport::from_residuals(out))
}

/// How the boundary data was removed.
#[derive(Debug, Clone)]
pub enum Lift {
    None,
    /// `(h(t + x) + h(t - x)) / 2`
    Dirichlet(ExtendedBoundaryFn),
    /// `(P(t + x) - P(t - x)) / 2` with `P' = H`
    Neumann(ExtendedPrimitive),
}

impl Lift {
    /// `d^dt/dt d^dx/dx` of the lift at `(t, x)`.
    pub fn partial(&self, t: f64, x: f64, dt: u8, dx: u8) -> Result<f64> {
        let n = dt + dx;
        let sign = if dx % 2 == 0 { 1.0 } else { -1.0 };
        match self {
            Lift::None => Ok(0.0),
            Lift::Dirichlet(h) => Ok(0.5 * (h.deriv(t + x, n)? + sign * h.deriv(t - x, n)?)),
            Lift::Neumann(p) => Ok(0.5 * (p.deriv(t + x, n)? - sign * p.deriv(t - x, n)?)),
        }
    }
}

/// Dirichlet lift: `f~ = f - (h(x) + h(-x))/2`, `g~ = g - (h(T + x) + h(T - x))/2`,
/// homogeneous boundaries.
pub fn lift_dirichlet(p: &BoundedProblem, ext: &ExtendedBoundaryFn) -> BoundedProblem {
    let h = Func::new(ext.clone());
    let t = p.t_final;
    lifted(p, &h, [(1.0, 0.0), (-1.0, 0.0)], [(1.0, t), (-1.0, t)], [-0.5, -0.5])
}

/// Neumann lift: `f~ = f - (P(x) - P(-x))/2`, `g~ = g - (P(T + x) - P(T - x))/2`.
pub fn lift_neumann(p: &BoundedProblem, prim: &ExtendedPrimitive) -> BoundedProblem {
    let pf = Func::new(prim.clone());
    let t = p.t_final;
    lifted(p, &pf, [(1.0, 0.0), (-1.0, 0.0)], [(1.0, t), (-1.0, t)], [-0.5, 0.5])
}

fn lifted(p: &BoundedProblem, base: &Func, at0: [(f64, f64); 2], at_t: [(f64, f64); 2], w: [f64; 2]) -> BoundedProblem {
    let build = |data: &Func, args: [(f64, f64); 2]| {
        Func::linear_combination(vec![
            (1.0, data.clone()),
            (w[0], base.compose_affine(args[0].0, args[0].1)),
            (w[1], base.compose_affine(args[1].0, args[1].1)),
        ])
    };
    BoundedProblem {
        f: build(&p.f, at0),
        g: build(&p.g, at_t),
        t_final: p.t_final,
        length: p.length,
        kind: p.kind,
        boundary: None,
    }
}

#[derive(Debug, Clone)]
enum Inner {
    Direct { fourier: FourierSolution, lift: Lift },
    /// Solution of the problem with time and space exchanged.
    Transposed(Box<BoundedSolution>),
}

/// Solution on `[0, T] x [0, L]`.
#[derive(Debug, Clone)]
pub struct BoundedSolution {
    pub t_final: f64,
    pub length: f64,
    pub kind: BoundaryKind,
    inner: Inner,
}

impl BoundedSolution {
    /// The underlying `2L`-periodic series (of the transposed problem when
    /// the axes were exchanged).
    pub fn fourier(&self) -> &FourierSolution {
        match &self.inner {
            Inner::Direct { fourier, .. } => fourier,
            Inner::Transposed(inner) => inner.fourier(),
        }
    }

    pub fn is_transposed(&self) -> bool {
        matches!(self.inner, Inner::Transposed(_))
    }

    pub fn velocity(&self, x: f64) -> Result<f64> {
        self.partial(0.0, x, 1, 0)
    }

    /// Samples of `v = y_t(0, .)` on `n` points of `[0, L]`.
    pub fn velocity_samples(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        linspace(0.0, self.length, n)
            .into_iter()
            .map(|x| Ok((x, self.velocity(x)?)))
            .collect()
    }

    /// `max |y(0,.) - f|` and `max |y(T,.) - g|` on `n` points.
    pub fn profile_errors(&self, f: &Func, g: &Func, n: usize) -> Result<(f64, f64)> {
        let mut e0: f64 = 0.0;
        let mut e1: f64 = 0.0;
        for x in linspace(0.0, self.length, n) {
            e0 = e0.max((self.value(0.0, x)? - f.eval(x)?).abs());
            e1 = e1.max((self.value(self.t_final, x)? - g.eval(x)?).abs());
        }
        Ok((e0, e1))
    }

    /// Largest boundary-trace defect on `n` points of `[0, T]`: values for
    /// Dirichlet, `y_x` for Neumann, against `boundary` (zero when `None`).
    pub fn trace_error(&self, boundary: Option<&BoundaryData>, n: usize) -> Result<f64> {
        let dx = match self.kind {
            BoundaryKind::Dirichlet => 0,
            BoundaryKind::Neumann => 1,
        };
        let mut worst: f64 = 0.0;
        for t in linspace(0.0, self.t_final, n) {
            let (a, b) = match boundary {
                Some(d) => (d.left.eval(t)?, d.right.eval(t)?),
                None => (0.0, 0.0),
            };
            worst = worst
                .max((self.partial(t, 0.0, 0, dx)? - a).abs())
                .max((self.partial(t, self.length, 0, dx)? - b).abs());
        }
        Ok(worst)
    }
}

impl SpaceTimeField for BoundedSolution {
    fn value(&self, t: f64, x: f64) -> Result<f64> {
        self.partial(t, x, 0, 0)
    }

    fn partial(&self, t: f64, x: f64, dt: u8, dx: u8) -> Result<f64> {
        crate::error::check_range("x", x, 0.0, self.length)?;
        crate::error::check_range("t", t, 0.0, self.t_final)?;
        match &self.inner {
            Inner::Direct { fourier, lift } => Ok(fourier.partial(t, x, dt, dx)? + lift.partial(t, x, dt, dx)?),
            Inner::Transposed(inner) => inner.partial(x, t, dx, dt),
        }
    }

    fn horizon(&self) -> f64 {
        self.t_final
    }
}

/// Reflect to `2L`-periodic data and solve. Compatibility is checked first.
pub fn solve_homogeneous(p: &BoundedProblem, tol: f64) -> Result<BoundedSolution> {
    if !p.is_homogeneous() {
        return Err(Error::InvalidInput("problem has boundary data; use solve_inhomogeneous".into()));
    }
    let report = check_compat(p)?;
    if !report.pass {
        return Err(Error::Compatibility(report.worst()));
    }
    solve_reflected(p, tol, Lift::None)
}

fn solve_reflected(p: &BoundedProblem, tol: f64, lift: Lift) -> Result<BoundedSolution> {
    let (fe, ge) = match p.kind {
        BoundaryKind::Dirichlet => (extend_odd(&p.f, p.length)?, extend_odd(&p.g, p.length)?),
        BoundaryKind::Neumann => (extend_even(&p.f, p.length)?, extend_even(&p.g, p.length)?),
    };
    let periodic = PeriodicProblem::new(fe, ge, p.t_final, 2.0 * p.length)?;
    let (fourier, _) = solve_periodic(&periodic, tol)?;
    Ok(BoundedSolution {
        t_final: p.t_final,
        length: p.length,
        kind: p.kind,
        inner: Inner::Direct { fourier, lift },
    })
}

/// The problem with time and space exchanged: horizon `L`, interval `[0, T]`,
/// profiles `h, l`, boundary data `f, g`.
pub fn transpose(p: &BoundedProblem) -> Result<BoundedProblem> {
    let b = p
        .boundary
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("transposition needs boundary data".into()))?;
    if p.kind != BoundaryKind::Dirichlet {
        return Err(Error::InvalidInput("only Dirichlet problems can be transposed".into()));
    }
    Ok(BoundedProblem {
        f: b.left.clone(),
        g: b.right.clone(),
        t_final: p.length,
        length: p.t_final,
        kind: BoundaryKind::Dirichlet,
        boundary: Some(BoundaryData {
            left: p.f.clone(),
            right: p.g.clone(),
        }),
    })
}

/// Lift the boundary data, solve the homogeneous problem, add the lift back.
pub fn solve_inhomogeneous(p: &BoundedProblem, tol: f64) -> Result<BoundedSolution> {
    let b = p
        .boundary
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("problem has no boundary data".into()))?;
    let report = check_compat(p)?;
    if !report.pass {
        return Err(Error::Compatibility(report.worst()));
    }
    let ratio = p.t_final / p.length;
    if let Ok((m, 1)) = recognize(ratio) {
        return Err(Error::ResonantRatio { ratio: m, residual: f64::NAN });
    }
    match p.kind {
        BoundaryKind::Dirichlet if p.t_final > p.length => {
            let inner = solve_inhomogeneous(&transpose(p)?, tol)?;
            Ok(BoundedSolution {
                t_final: p.t_final,
                length: p.length,
                kind: p.kind,
                inner: Inner::Transposed(Box::new(inner)),
            })
        }
        BoundaryKind::Dirichlet => {
            let ext = extend_boundary_dirichlet(&b.left, &b.right, p.t_final, p.length)?;
            solve_reflected(&lift_dirichlet(p, &ext), tol, Lift::Dirichlet(ext))
        }
        BoundaryKind::Neumann => {
            if p.t_final >= p.length {
                return Err(Error::OutOfRange {
                    what: "T/L for inhomogeneous Neumann data",
                    value: ratio,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
            let ext = extend_boundary_neumann(&b.left, &b.right, p.t_final, p.length)?;
            let prim = ExtendedPrimitive::new(&ext)?;
            solve_reflected(&lift_neumann(p, &prim), tol, Lift::Neumann(prim))
        }
    }
}

/// Dispatch on whether boundary data is present.
pub fn solve_bounded(p: &BoundedProblem, tol: f64) -> Result<BoundedSolution> {
    if p.is_homogeneous() {
        solve_homogeneous(p, tol)
    } else {
        solve_inhomogeneous(p, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn parse(s: &str) -> Func {
        Func::parse(s).unwrap()
    }

    #[test]
    fn dirichlet_closed_form() {
        let p = BoundedProblem::new(parse("sin(pi*x)"), parse("-sin(pi*x)"), 0.25, 1.0, BoundaryKind::Dirichlet).unwrap();
        // g at T = 1/4 is (cos - sin)(pi/4) sin = 0; use the data that matches
        let p = BoundedProblem { g: Func::zero(), ..p };
        let sol = solve_bounded(&p, 1e-10).unwrap();
        for t in [0.0, 0.1, 0.25] {
            for x in [0.0, 0.3, 0.5, 0.9, 1.0] {
                let exact = ((PI * t).cos() - (PI * t).sin()) * (PI * x).sin();
                assert!((sol.value(t, x).unwrap() - exact).abs() < 1e-8);
            }
        }
        for x in [0.2, 0.6] {
            assert!((sol.velocity(x).unwrap() + PI * (PI * x).sin()).abs() < 1e-8);
        }
        assert!(sol.trace_error(None, 101).unwrap() <= 1e-7);
        assert!(sol.value(0.1, 1.5).is_err());
    }

    #[test]
    fn neumann_closed_form() {
        // y = cos(pi t) cos(pi x) with T = 1/3
        let t_final = 1.0 / 3.0;
        let p = BoundedProblem::new(parse("cos(pi*x)"), parse("0.5*cos(pi*x)"), t_final, 1.0, BoundaryKind::Neumann).unwrap();
        let sol = solve_bounded(&p, 1e-10).unwrap();
        for (t, x) in [(0.1, 0.2), (0.3, 0.7), (t_final, 1.0)] {
            assert!((sol.value(t, x).unwrap() - (PI * t).cos() * (PI * x).cos()).abs() < 1e-8);
        }
        assert!(sol.trace_error(None, 101).unwrap() <= 1e-6);
    }

    #[test]
    fn compatibility_is_enforced() {
        let p = BoundedProblem::new(parse("x*(1-x)"), Func::zero(), 0.25, 1.0, BoundaryKind::Dirichlet).unwrap();
        let rep = check_compat(&p).unwrap();
        assert!(!rep.pass);
        assert!(matches!(solve_bounded(&p, 1e-8), Err(Error::Compatibility(_))));
        let p = BoundedProblem::new(parse("x"), Func::zero(), 0.25, 1.0, BoundaryKind::Neumann).unwrap();
        assert!(matches!(solve_bounded(&p, 1e-8), Err(Error::Compatibility(_))));
    }

    #[test]
    fn constant_boundary_data() {
        let one = Func::constant(1.0);
        let p = BoundedProblem::new(one.clone(), one.clone(), 0.25, 1.0, BoundaryKind::Dirichlet)
            .unwrap()
            .with_boundary(one.clone(), one.clone());
        let sol = solve_bounded(&p, 1e-10).unwrap();
        for (t, x) in [(0.0, 0.0), (0.1, 0.4), (0.25, 1.0)] {
            assert!((sol.value(t, x).unwrap() - 1.0).abs() < 1e-9);
        }
        let ext = extend_boundary_dirichlet(&one, &one, 0.25, 1.0).unwrap();
        let lifted = lift_dirichlet(&p, &ext);
        for x in [0.0, 0.5, 1.0] {
            assert!(lifted.f.eval(x).unwrap().abs() < 1e-14);
            assert!(lifted.g.eval(x).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn dirichlet_moving_boundary() {
        // data of the wave solution y = sin(x) cos(t) + t x
        let (t_final, length) = (0.3, 1.0);
        let p = BoundedProblem::new(parse("sin(x)"), parse("sin(x)*cos(0.3) + 0.3*x"), t_final, length, BoundaryKind::Dirichlet)
            .unwrap()
            .with_boundary(Func::zero(), parse("sin(1)*cos(x) + x"));
        let sol = solve_bounded(&p, 1e-10).unwrap();
        let b = p.boundary.clone().unwrap();
        assert!(sol.trace_error(Some(&b), 101).unwrap() <= 1e-7);
        let (e0, e1) = sol.profile_errors(&p.f, &p.g, 201).unwrap();
        assert!(e0 <= 1e-6 && e1 <= 1e-6, "{e0} {e1}");
        for (t, x) in [(0.1, 0.3), (0.2, 0.8)] {
            let r = sol.partial(t, x, 2, 0).unwrap() - sol.partial(t, x, 0, 2).unwrap();
            assert!(r.abs() < 1e-5, "{r}");
        }
    }

    #[test]
    fn transposed_dirichlet() {
        // data of y = 1 + x + t with T > L
        let (t_final, length) = (1.5, 1.0);
        let p = BoundedProblem::new(parse("1 + x"), parse("1 + x + 1.5"), t_final, length, BoundaryKind::Dirichlet)
            .unwrap()
            .with_boundary(parse("1 + x"), parse("2 + x"));
        let sol = solve_bounded(&p, 1e-10).unwrap();
        assert!(sol.is_transposed());
        assert!(sol.trace_error(p.boundary.as_ref(), 101).unwrap() <= 1e-7);
        let (e0, e1) = sol.profile_errors(&p.f, &p.g, 201).unwrap();
        assert!(e0 <= 1e-7 && e1 <= 1e-7, "{e0} {e1}");
        for (t, x) in [(0.4, 0.3), (1.1, 0.8)] {
            let r = sol.partial(t, x, 2, 0).unwrap() - sol.partial(t, x, 0, 2).unwrap();
            assert!(r.abs() < 1e-5, "{r}");
        }
    }

    #[test]
    fn neumann_inhomogeneous() {
        // y = x^2 + t^2 solves the wave equation: H = 0, K = 2
        let p = BoundedProblem::new(parse("x^2"), parse("x^2 + 0.16"), 0.4, 1.0, BoundaryKind::Neumann)
            .unwrap()
            .with_boundary(Func::zero(), Func::constant(2.0));
        let sol = solve_bounded(&p, 1e-10).unwrap();
        assert!(sol.trace_error(p.boundary.as_ref(), 101).unwrap() <= 1e-5);
        let (e0, e1) = sol.profile_errors(&p.f, &p.g, 201).unwrap();
        assert!(e0 <= 1e-6 && e1 <= 1e-6, "{e0} {e1}");
        let long = BoundedProblem { t_final: 1.2, ..p };
        assert!(matches!(solve_bounded(&long, 1e-8), Err(Error::OutOfRange { .. } | Error::Compatibility(_))));
    }

    #[test]
    fn integer_ratio_is_resonant() {
        let one = Func::constant(1.0);
        let p = BoundedProblem::new(one.clone(), one.clone(), 2.0, 1.0, BoundaryKind::Dirichlet)
            .unwrap()
            .with_boundary(one.clone(), one);
        assert!(matches!(solve_bounded(&p, 1e-8), Err(Error::ResonantRatio { ratio: 2, .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]

        #[test]
        fn lift_round_trip(a in -1.0f64..1.0, b in -1.0f64..1.0) {
            // y = a sin(x + t) + b (x - t)^3 is an exact solution; boundary
            // data taken from it
            let (t_final, length) = (0.35, 1.0);
            let src = |t: &str, x: &str| format!("{a}*sin({x} + {t}) + {b}*({x} - ({t}))^3");
            let p = BoundedProblem::new(
                parse(&src("0", "x")),
                parse(&src(&t_final.to_string(), "x")),
                t_final,
                length,
                BoundaryKind::Dirichlet,
            )
            .unwrap()
            .with_boundary(parse(&src("x", "0")), parse(&src("x", "1")));
            let sol = solve_bounded(&p, 1e-10).unwrap();
            let (e0, e1) = sol.profile_errors(&p.f, &p.g, 101).unwrap();
            prop_assert!(e0 <= 1e-6 && e1 <= 1e-6);
            prop_assert!(sol.trace_error(p.boundary.as_ref(), 51).unwrap() <= 1e-7);
        }
    }
}
