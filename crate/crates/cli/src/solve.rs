//! Dispatch from a problem file to the solvers, their diagnostics and the
//! output tables.

use serde_json::{json, Value};

use tbvp_core::bounded::{check_compat, solve_bounded, BoundaryKind, BoundedSolution};
use tbvp_core::curvflow::{solve_flow_with_tol, FlowSolution};
use tbvp_core::funcrep::{linspace, ClosureFn};
use tbvp_core::line1d::{reduce_target, solve_line_with_seed, ControlSolution, LineProblem};
use tbvp_core::nd3::{eval_points, Problem3D, SphericalQuadrature};
use tbvp_core::nonlinear::{wavemap_admissibility, wavemap_grid, solve_wavemap, WaveMapSolution};
use tbvp_core::periodic::{rationality_check, resonance_obstruction, solve_periodic, theta_grid, FourierSolution};
use tbvp_core::verify::{
    compare, default_steps, fd_forward, residual_order_where, Deviation, Diagnostics, Domain, FdBoundary, FdGrid, Pde,
};
use tbvp_core::{Func, SpaceTimeField};

use crate::error::CliError;
use crate::output::Table;
use crate::problem::{Kind, LoadedProblem};

/// Lower bound on `kbar` accepted for the curvature flow.
pub const KBAR_FLOOR: f64 = -1e-9;

/// A solved problem.
#[derive(Debug, Clone)]
pub enum Solution {
    Line(ControlSolution),
    Periodic(FourierSolution, Func),
    Bounded(BoundedSolution),
    WaveMap(WaveMapSolution),
    String(Vec<ControlSolution>),
    Flow(FlowSolution),
    Wave3d(Problem3D, Vec<(f64, [f64; 3], f64)>),
}

fn json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

/// Admissibility checks that do not require a solve. Rejections are part of
/// the report (`admissible: false` plus `reason`), not errors.
pub fn admissibility(lp: &LoadedProblem) -> Result<Value, CliError> {
    let p = &lp.file;
    let rejected = |e: CliError| -> Result<Value, CliError> {
        if e.exit_code() == 2 {
            Ok(json!({
                "admissible": false,
                "reason": e.reason(),
                "residual": e.residual().filter(|r| r.is_finite()),
                "message": e.to_string(),
            }))
        } else {
            Err(e)
        }
    };
    let report = match p.kind {
        Kind::Line => {
            let line = lp.line()?;
            let (unit, _) = tbvp_core::line1d::normalize_speed(&line);
            let rt = reduce_target(&unit)?;
            json!({ "admissible": true, "moments": { "a0": rt.a0, "b0": rt.b0, "c0": rt.c0 } })
        }
        Kind::String => {
            let comps = lp.components()?;
            json!({ "admissible": true, "components": comps.len() })
        }
        Kind::Periodic | Kind::Circle => {
            let pp = lp.periodic()?;
            let obstruction = resonance_obstruction(&pp, 2001)?;
            match rationality_check(pp.t_final, pp.period) {
                Ok(r) => json!({ "admissible": true, "ratio": r, "obstruction": obstruction }),
                Err(tbvp_core::Error::ResonantRatio { ratio, .. }) => json!({
                    "admissible": obstruction.residual <= p.tolerances.solve.max(1e-7),
                    "reason": "resonance-obstruction",
                    "ratio": { "p": ratio, "q": 1 },
                    "obstruction": obstruction,
                }),
                Err(e) => return rejected(e.into()),
            }
        }
        Kind::Dirichlet | Kind::Neumann => {
            let bp = lp.bounded()?;
            let compat = check_compat(&bp)?;
            json!({
                "admissible": compat.pass,
                "reason": if compat.pass { None } else { Some("compatibility-failure") },
                "compatibility": compat,
                "ratio_T_over_L": bp.t_final / bp.length,
                "homogeneous": bp.is_homogeneous(),
            })
        }
        Kind::Wavemap => match wavemap_admissibility(&lp.wavemap()?) {
            Ok((ordering, nonneg)) => json!({
                "admissible": nonneg.passes,
                "reason": if nonneg.passes { None } else { Some("nonnegativity-condition") },
                "ordering": ordering,
                "nonnegativity": nonneg,
            }),
            Err(e) => return rejected(e.into()),
        },
        Kind::Curvflow => {
            let fp = lp.flow()?;
            match rationality_check(fp.t_final, fp.length) {
                Ok(r) => json!({ "admissible": true, "ratio": r, "kstar": fp.kstar }),
                Err(e) => return rejected(e.into()),
            }
        }
        Kind::Wave3d => {
            let p3 = lp.wave3d()?;
            json!({ "admissible": true, "points": p3.points.len() })
        }
    };
    Ok(report)
}

/// Run the solver for the problem kind; returns the solution and a JSON
/// summary of its construction.
pub fn solve(lp: &LoadedProblem) -> Result<(Solution, Value), CliError> {
    let p = &lp.file;
    let tol = p.tolerances.solve;
    Ok(match p.kind {
        Kind::Line => {
            let sol = solve_line_with_seed(&lp.line()?, &p.seed_choice())?;
            let summary = line_summary(&sol);
            (Solution::Line(sol), summary)
        }
        Kind::String => {
            let sols = lp
                .components()?
                .iter()
                .map(|c| solve_line_with_seed(c, &p.seed_choice()))
                .collect::<Result<Vec<_>, _>>()?;
            let summary = json!({ "components": sols.iter().map(line_summary).collect::<Vec<_>>() });
            (Solution::String(sols), summary)
        }
        Kind::Periodic | Kind::Circle => {
            let (sol, v) = solve_periodic(&lp.periodic()?, tol)?;
            let summary = json(&sol);
            (Solution::Periodic(sol, v), summary)
        }
        Kind::Dirichlet | Kind::Neumann => {
            let sol = solve_bounded(&lp.bounded()?, tol)?;
            let summary = json!({
                "kind": sol.kind,
                "transposed": sol.is_transposed(),
                "fourier": json(sol.fourier()),
            });
            (Solution::Bounded(sol), summary)
        }
        Kind::Wavemap => {
            let sol = solve_wavemap(&lp.wavemap()?)?;
            let summary = json!({ "report": json(sol.report()), "linear": line_summary(sol.linear()) });
            (Solution::WaveMap(sol), summary)
        }
        Kind::Curvflow => {
            let sol = solve_flow_with_tol(&lp.flow()?, tol.min(tbvp_core::curvflow::FLOW_TOLERANCE))?;
            let summary = json!({ "flow": json(&sol.summary()), "fourier": json(&sol.fourier) });
            (Solution::Flow(sol), summary)
        }
        Kind::Wave3d => {
            let p3 = lp.wave3d()?;
            let rows = eval_points(&p3, &wave3d_times(lp), p.output.rprobe)?;
            let summary = json!({
                "rprobe": p.output.rprobe,
                "quadrature_order": SphericalQuadrature::default().order,
                "points": p3.points.len(),
            });
            (Solution::Wave3d(p3, rows), summary)
        }
    })
}

fn line_summary(sol: &ControlSolution) -> Value {
    let rt = sol.target();
    json!({
        "seed": sol.seed().kind(),
        "moments": { "a0": rt.a0, "b0": rt.b0, "c0": rt.c0 },
        "speed_scale": sol.scale(),
    })
}

fn wave3d_times(lp: &LoadedProblem) -> Vec<f64> {
    let t = lp.file.t_final;
    lp.file.output.times.clone().unwrap_or_else(|| linspace(0.0, t, 5))
}

/// Half-width `cT + 1` of the window shown for whole-line problems.
fn line_window(p: &LineProblem) -> f64 {
    p.speed * p.t_final + 1.0
}

fn max_over<F: Fn(f64) -> tbvp_core::Result<f64>>(xs: &[f64], f: F) -> Result<f64, CliError> {
    xs.iter().try_fold(0.0f64, |m, &x| Ok(m.max(f(x)?.abs())))
}

fn residual_steps(t_final: f64, width: f64) -> Vec<f64> {
    default_steps(t_final.min(width).min(1.0))
}

fn line_checks(d: &mut Diagnostics, prefix: &str, sol: &ControlSolution, lp: &LoadedProblem) -> Result<(), CliError> {
    let tol = &lp.file.tolerances;
    let p = sol.problem();
    let grid = tbvp_core::line1d::probe_grid(p.t_final, p.speed);
    let diag = sol.diagnostics(&grid)?;
    d.at_most(&format!("{prefix}terminal_error"), diag.terminal_error, tol.terminal)
        .at_most(&format!("{prefix}initial_error"), diag.initial_error, tol.terminal)
        .at_most(&format!("{prefix}volterra_residual"), diag.volterra_residual, 1e-6)
        .at_most(&format!("{prefix}seam_value_jump"), diag.seam.value_jump, tol.terminal)
        .at_most(&format!("{prefix}seam_slope_jump"), diag.seam.slope_jump, tol.terminal)
        .at_most(&format!("{prefix}seed_moments"), diag.seed.max(), 1e-8);
    Ok(())
}

/// True when `(t, x)` is farther than `reach` (in `x` units) from every
/// characteristic `x / c +- t = (2N - 1) T` through a velocity seam; whole-line
/// solutions are only `C^2` across those lines.
fn off_seam_lines(t_final: f64, c: f64) -> impl Fn(f64, f64, f64) -> bool {
    move |t, x, reach| {
        let r = reach * (1.0 / c).max(1.0);
        let xi = x / c;
        [xi + t, xi - t].iter().all(|&s| {
            let u = s / t_final;
            let odd = 2.0 * ((u - 1.0) / 2.0).round() + 1.0;
            (u - odd).abs() * t_final > r
        })
    }
}

fn residual(
    d: &mut Diagnostics,
    y: &(impl SpaceTimeField + ?Sized),
    domain: Domain,
    pde: Pde,
    min_order: f64,
) -> Result<(), CliError> {
    residual_where(d, y, domain, pde, min_order, |_, _, _| true)
}

fn residual_where(
    d: &mut Diagnostics,
    y: &(impl SpaceTimeField + ?Sized),
    domain: Domain,
    pde: Pde,
    min_order: f64,
    keep: impl Fn(f64, f64, f64) -> bool,
) -> Result<(), CliError> {
    let steps = residual_steps(domain.t1 - domain.t0, domain.x1 - domain.x0);
    let mut report = residual_order_where(y, &domain, &steps, pde, keep)?;
    report.pass = report.exact || report.order >= min_order;
    d.with_residual(report);
    Ok(())
}

/// Cheap checks of a solution: endpoint errors, traces, seams and the PDE
/// residual order.
pub fn diagnose(lp: &LoadedProblem, sol: &Solution) -> Result<Diagnostics, CliError> {
    let p = &lp.file;
    let tol = &p.tolerances;
    let mut d = Diagnostics::default();
    match sol {
        Solution::Line(s) => {
            line_checks(&mut d, "", s, lp)?;
            let w = line_window(s.problem());
            let keep = off_seam_lines(p.t_final, s.scale());
            residual_where(&mut d, s, Domain { t0: 0.0, t1: p.t_final, x0: -w, x1: w }, Pde::Wave, tol.order, keep)?;
        }
        Solution::String(sols) => {
            for (i, s) in sols.iter().enumerate() {
                line_checks(&mut d, &format!("component{i}_"), s, lp)?;
            }
            if let Some(s) = sols.first() {
                let w = line_window(s.problem());
                let keep = off_seam_lines(p.t_final, s.scale());
                residual_where(&mut d, s, Domain { t0: 0.0, t1: p.t_final, x0: -w, x1: w }, Pde::Wave, tol.order, keep)?;
            }
        }
        Solution::Periodic(s, _) => {
            let pp = lp.periodic()?;
            let grid = theta_grid(pp.period);
            let limit = tol.terminal.max(tol.solve);
            d.at_most("terminal_error", max_over(&grid, |x| Ok(s.value(pp.t_final, x)? - pp.g.eval(x)?))?, limit)
                .at_most("initial_error", max_over(&grid, |x| Ok(s.value(0.0, x)? - pp.f.eval(x)?))?, limit)
                .at_most("resonant_mismatch", s.resonant_mismatch, tol.solve.max(1e-7));
            residual(&mut d, s, Domain { t0: 0.0, t1: pp.t_final, x0: 0.0, x1: pp.period }, Pde::Wave, tol.order)?;
        }
        Solution::Bounded(s) => {
            let bp = lp.bounded()?;
            let (e0, e1) = s.profile_errors(&bp.f, &bp.g, 2001)?;
            d.at_most("initial_error", e0, tol.terminal)
                .at_most("terminal_error", e1, tol.terminal)
                .at_most("trace_error", s.trace_error(bp.boundary.as_ref(), 2001)?, tol.trace);
            residual(&mut d, s, Domain { t0: 0.0, t1: bp.t_final, x0: 0.0, x1: bp.length }, Pde::Wave, tol.order)?;
        }
        Solution::WaveMap(s) => {
            let wp = lp.wavemap()?;
            let grid = wavemap_grid(wp.t_final);
            d.at_most("terminal_error", s.terminal_error(&wp.g, &grid)?, tol.terminal)
                .at_most("initial_error", s.initial_error(&wp.f, &grid)?, tol.terminal)
                .at_least("z_min", s.report().z_min, f64::MIN_POSITIVE);
            let w = wp.t_final + 1.0;
            let keep = off_seam_lines(wp.t_final, 1.0);
            residual_where(&mut d, s, Domain { t0: 0.0, t1: wp.t_final, x0: -w, x1: w }, Pde::WaveMap, tol.order, keep)?;
        }
        Solution::Flow(s) => {
            let fp = lp.flow()?;
            let grid = linspace(0.0, fp.length, 2001);
            d.at_most("initial_error", max_over(&grid, |x| Ok(s.value(0.0, x)? - fp.f.eval(x)?))?, tol.terminal)
                .at_most("terminal_defect", s.terminal_defect(2001)?, tol.terminal)
                .at_least("min_kbar", s.min_kbar(41, 1001)?, KBAR_FLOOR);
            residual(&mut d, s, Domain { t0: 0.0, t1: fp.t_final, x0: 0.0, x1: fp.length }, Pde::Wave, tol.order)?;
        }
        Solution::Wave3d(p3, rows) => {
            let t = p3.t_final;
            let (mut e0, mut e1) = (0.0f64, 0.0f64);
            for (ti, x, y) in rows {
                if *ti == 0.0 {
                    e0 = e0.max((y - p3.f.eval(*x)).abs());
                }
                if *ti == t {
                    e1 = e1.max((y - p3.g.eval(*x)).abs());
                }
            }
            d.at_most("initial_error", e0, tol.point3d)
                .at_most("terminal_error", e1, tol.point3d);
        }
    }
    Ok(d)
}

/// Whole-line solution seen in unit-speed coordinates `xi = x / c`.
struct UnitSpeed<'a>(&'a ControlSolution);

impl SpaceTimeField for UnitSpeed<'_> {
    fn value(&self, t: f64, xi: f64) -> tbvp_core::Result<f64> {
        self.0.value(t, self.0.scale() * xi)
    }

    fn partial(&self, t: f64, xi: f64, dt: u8, dx: u8) -> tbvp_core::Result<f64> {
        Ok(self.0.partial(t, self.0.scale() * xi, dt, dx)? * self.0.scale().powi(dx as i32))
    }

    fn horizon(&self) -> f64 {
        self.0.horizon()
    }
}

fn line_oracle(sol: &ControlSolution, nx: usize) -> Result<Deviation, CliError> {
    let p = sol.problem();
    let c = sol.scale();
    let w = p.t_final + 1.0;
    let grid = FdGrid::line(-w, w, p.t_final, nx, 1.0)?;
    let f = p.f.compose_affine(c, 0.0);
    let v = sol.velocity_func().compose_affine(c, 0.0);
    let field = fd_forward(&f, &v, p.t_final, &grid)?;
    Ok(compare(&UnitSpeed(sol), &field, -w, w)?)
}

/// Reflect `x` into `[0, L]`; `odd` flips the sign on every reflection.
fn reflect(x: f64, length: f64, odd: bool) -> (f64, f64) {
    let period = 2.0 * length;
    let r = x.rem_euclid(period);
    if r <= length {
        (r, 1.0)
    } else {
        (period - r, if odd { -1.0 } else { 1.0 })
    }
}

/// Leapfrog comparison; `None` when no oracle applies (inhomogeneous
/// boundary data, 3-D problems).
pub fn oracle(lp: &LoadedProblem, sol: &Solution) -> Result<Option<Deviation>, CliError> {
    let nx = lp.file.output.oracle_nx;
    let t = lp.file.t_final;
    Ok(match sol {
        Solution::Line(s) => Some(line_oracle(s, nx)?),
        Solution::String(sols) => {
            let mut worst: Option<Deviation> = None;
            for s in sols {
                let dev = line_oracle(s, nx)?;
                if worst.is_none_or(|w| dev.max > w.max) {
                    worst = Some(dev);
                }
            }
            worst
        }
        Solution::WaveMap(s) => Some(line_oracle(s.linear(), nx)?),
        Solution::Periodic(s, v) => {
            let pp = lp.periodic()?;
            let grid = FdGrid::new(0.0, pp.period, nx, t, 0.5, FdBoundary::Periodic)?;
            let field = fd_forward(&pp.f, v, t, &grid)?;
            Some(compare(s, &field, 0.0, pp.period)?)
        }
        Solution::Flow(s) => {
            let fp = lp.flow()?;
            let grid = FdGrid::new(0.0, fp.length, nx, t, 0.5, FdBoundary::Periodic)?;
            let v = s.velocity.combine(1.0, &Func::constant(s.shift), 1.0);
            let field = fd_forward(&fp.f, &v, t, &grid)?;
            Some(compare(s, &field, 0.0, fp.length)?)
        }
        Solution::Bounded(s) => {
            let bp = lp.bounded()?;
            if !bp.is_homogeneous() {
                return Ok(None);
            }
            let (odd, boundary) = match bp.kind {
                BoundaryKind::Dirichlet => (true, FdBoundary::OddReflection),
                BoundaryKind::Neumann => (false, FdBoundary::EvenReflection),
            };
            let l = bp.length;
            let grid = FdGrid::new(0.0, l, nx, t, 0.5, boundary)?;
            let vs = s.clone();
            let v = Func::new(ClosureFn::new(
                move |x: f64| {
                    let (r, sign) = reflect(x, l, odd);
                    sign * vs.velocity(r).unwrap_or(f64::NAN)
                },
                1e-5 * l,
            ));
            let field = fd_forward(&bp.f, &v, t, &grid)?;
            Some(compare(s, &field, 0.0, l)?)
        }
        Solution::Wave3d(..) => None,
    })
}

/// `v.csv` (when the kind has a velocity) and `y.csv`.
pub fn tables(lp: &LoadedProblem, sol: &Solution) -> Result<Vec<Table>, CliError> {
    let o = &lp.file.output;
    let t = lp.file.t_final;
    let ts = linspace(0.0, t, o.nt);
    let mut out = Vec::new();
    let field_table = |y: &dyn SpaceTimeField, a: f64, b: f64| -> Result<Table, CliError> {
        let xs = linspace(a, b, o.nx);
        let mut table = Table::new("y.csv", &["t", "x", "y"]);
        let values = tbvp_core::field::sample_grid(y, &ts, &xs)?;
        for (ti, row) in ts.iter().zip(values) {
            for (x, v) in xs.iter().zip(row) {
                table.rows.push(vec![*ti, *x, v]);
            }
        }
        Ok(table)
    };
    let velocity_table = |header: &[&str], a: f64, b: f64, f: &dyn Fn(f64) -> tbvp_core::Result<Vec<f64>>| {
        let mut table = Table::new("v.csv", header);
        for x in linspace(a, b, o.velocity_points) {
            let mut row = vec![x];
            row.extend(f(x)?);
            table.rows.push(row);
        }
        Ok::<_, CliError>(table)
    };
    match sol {
        Solution::Line(s) => {
            let r = 5.0 * line_window(s.problem());
            out.push(velocity_table(&["x", "v"], -r, r, &|x| Ok(vec![s.velocity(x)?]))?);
            let w = line_window(s.problem());
            out.push(field_table(s, -w, w)?);
        }
        Solution::String(sols) => {
            let r = 5.0 * line_window(sols[0].problem());
            let names: Vec<String> = (0..sols.len()).map(|i| format!("v{i}")).collect();
            let mut header = vec!["x"];
            header.extend(names.iter().map(String::as_str));
            out.push(velocity_table(&header, -r, r, &|x| sols.iter().map(|s| s.velocity(x)).collect())?);
            let w = line_window(sols[0].problem());
            let xs = linspace(-w, w, o.nx);
            let mut header = vec!["t", "x"];
            let ys: Vec<String> = (0..sols.len()).map(|i| format!("y{i}")).collect();
            header.extend(ys.iter().map(String::as_str));
            let mut table = Table::new("y.csv", &header);
            for &ti in &ts {
                for &x in &xs {
                    let mut row = vec![ti, x];
                    for s in sols {
                        row.push(s.value(ti, x)?);
                    }
                    table.rows.push(row);
                }
            }
            out.push(table);
        }
        Solution::Periodic(s, v) => {
            let l = s.period;
            out.push(velocity_table(&["x", "v"], 0.0, l, &|x| Ok(vec![v.eval(x)?]))?);
            out.push(field_table(s, 0.0, l)?);
        }
        Solution::Bounded(s) => {
            let l = s.length;
            out.push(velocity_table(&["x", "v"], 0.0, l, &|x| Ok(vec![s.velocity(x)?]))?);
            out.push(field_table(s, 0.0, l)?);
        }
        Solution::WaveMap(s) => {
            let r = 5.0 * (t + 1.0);
            out.push(velocity_table(&["x", "v", "z_v"], -r, r, &|x| {
                Ok(vec![s.partial(0.0, x, 1, 0)?, s.z_velocity(x)?])
            })?);
            out.push(field_table(s, -(t + 1.0), t + 1.0)?);
        }
        Solution::Flow(s) => {
            let l = s.length;
            out.push(velocity_table(&["x", "v", "vbar"], 0.0, l, &|x| {
                let v = s.velocity.eval(x)?;
                Ok(vec![v, v + s.shift])
            })?);
            out.push(field_table(s, 0.0, l)?);
        }
        Solution::Wave3d(_, rows) => {
            let mut table = Table::new("y.csv", &["t", "x1", "x2", "x3", "y"]);
            for (ti, x, y) in rows {
                table.rows.push(vec![*ti, x[0], x[1], x[2], *y]);
            }
            out.push(table);
        }
    }
    Ok(out)
}
