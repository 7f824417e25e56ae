//! Hyperbolic curvature flow `k_tt = k_ss` driven to a constant curvature.
//!
//! The periodic problem with terminal value `kstar` is solved first. If its
//! initial velocity `v` has a negative minimum `M`, the shifted curvature
//! `k + |M| t` is again a solution, now with nonnegative initial velocity
//! `v + |M|`, hence nonnegative, and reaches `k0 = kstar + |M| T`.

mod curve;

pub use curve::{polyline_svg, reconstruct_curve, Polyline};

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::funcrep::{linspace, Func};
use crate::line1d::golden_min;
use crate::periodic::{rationality_check, resonance_obstruction, solve_periodic, FourierSolution, PeriodicProblem};

/// Default Fourier tolerance of the flow solve.
pub const FLOW_TOLERANCE: f64 = 1e-11;

#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub f: Func,
    pub length: f64,
    pub t_final: f64,
    pub kstar: f64,
}

impl FlowProblem {
    /// Checks `f >= 0` on 4096 points of one period, periodicity, `kstar > 0`.
    pub fn new(f: Func, length: f64, t_final: f64, kstar: f64) -> Result<Self> {
        if !(kstar > 0.0 && kstar.is_finite()) {
            return Err(Error::InvalidInput(format!("kstar must be positive, got {kstar}")));
        }
        let p = PeriodicProblem::new(f, Func::constant(kstar), t_final, length)?;
        for s in linspace(0.0, length, 4096) {
            let v = p.f.eval(s)?;
            if v < 0.0 {
                return Err(Error::InvalidInput(format!("initial curvature is negative at s = {s}: {v}")));
            }
        }
        Ok(FlowProblem {
            f: p.f,
            length,
            t_final,
            kstar,
        })
    }
}

/// `kbar(t, s) = k(t, s) + shift * t` with `shift = max(0, -M)`.
#[derive(Debug, Clone)]
pub struct FlowSolution {
    pub fourier: FourierSolution,
    pub velocity: Func,
    /// `min v`.
    pub m: f64,
    pub shift: f64,
    pub kstar: f64,
    pub k0: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSummary {
    pub k0: f64,
    pub kstar: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub shift: f64,
    pub cutoff: usize,
    pub tail: f64,
}

impl FlowSolution {
    pub fn summary(&self) -> FlowSummary {
        FlowSummary {
            k0: self.k0,
            kstar: self.kstar,
            m: self.m,
            shift: self.shift,
            cutoff: self.fourier.cutoff,
            tail: self.fourier.tail,
        }
    }

    /// Unshifted periodic solution `k`.
    pub fn k(&self, t: f64, s: f64) -> Result<f64> {
        self.fourier.value(t, s)
    }

    /// Minimum of `kbar` over an `nt x ns` grid of `[0, T] x [0, L]`.
    pub fn min_kbar(&self, nt: usize, ns: usize) -> Result<f64> {
        let ss = linspace(0.0, self.length, ns);
        linspace(0.0, self.horizon(), nt)
            .par_iter()
            .map(|&t| ss.iter().try_fold(f64::INFINITY, |m, &s| Ok::<_, Error>(m.min(self.value(t, s)?))))
            .try_reduce(|| f64::INFINITY, |a, b| Ok(a.min(b)))
    }

    /// `max_s |kbar(T, s) - k0|` on `ns` points.
    pub fn terminal_defect(&self, ns: usize) -> Result<f64> {
        let t = self.horizon();
        linspace(0.0, self.length, ns)
            .iter()
            .try_fold(0.0f64, |m, &s| Ok(m.max((self.value(t, s)? - self.k0).abs())))
    }

    /// Curve of the slice `kbar(t, .)`.
    pub fn curve_at(&self, t: f64, n: usize) -> Result<Polyline> {
        reconstruct_curve(|s| self.value(t, s), self.length, n)
    }
}

impl SpaceTimeField for FlowSolution {
    fn value(&self, t: f64, s: f64) -> Result<f64> {
        Ok(self.fourier.value(t, s)? + self.shift * t)
    }

    fn partial(&self, t: f64, s: f64, dt: u8, ds: u8) -> Result<f64> {
        let base = self.fourier.partial(t, s, dt, ds)?;
        Ok(match (dt, ds) {
            (0, 0) => base + self.shift * t,
            (1, 0) => base + self.shift,
            _ => base,
        })
    }

    fn horizon(&self) -> f64 {
        self.fourier.t_final
    }
}

/// Minimum of a smooth `L`-periodic function: 8192 samples, then golden
/// section around the best sample.
pub fn periodic_minimum(v: &Func, length: f64) -> Result<f64> {
    let n = 8192;
    let h = length / n as f64;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..n {
        let s = h * i as f64;
        let val = v.eval(s)?;
        if val < best.0 {
            best = (val, s);
        }
    }
    let (_, refined) = golden_min(|s| v.eval(s).unwrap_or(f64::INFINITY), best.1 - h, best.1 + h, 1e-14 * length);
    Ok(best.0.min(refined))
}

pub fn solve_flow(p: &FlowProblem) -> Result<FlowSolution> {
    solve_flow_with_tol(p, FLOW_TOLERANCE)
}

/// Like [`solve_flow`] with an explicit solver tolerance. Integer `2T/L`
/// is rejected even when the periodic problem would be solvable.
pub fn solve_flow_with_tol(p: &FlowProblem, tol: f64) -> Result<FlowSolution> {
    let periodic = PeriodicProblem::new(p.f.clone(), Func::constant(p.kstar), p.t_final, p.length)?;
    if let Err(Error::ResonantRatio { ratio, .. }) = rationality_check(p.t_final, p.length) {
        let residual = resonance_obstruction(&periodic, 2001)?.residual;
        return Err(Error::ResonantRatio { ratio, residual });
    }
    let (fourier, velocity) = solve_periodic(&periodic, tol)?;
    let m = periodic_minimum(&velocity, p.length)?;
    let shift = (-m).max(0.0);
    Ok(FlowSolution {
        fourier,
        velocity,
        m,
        shift,
        kstar: p.kstar,
        k0: p.kstar + shift * p.t_final,
        length: p.length,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameRecord {
    pub index: usize,
    pub t: f64,
    pub file: String,
    pub gap: f64,
    pub angle_defect: f64,
    pub min_curvature: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FrameManifest {
    pub flow: FlowSummary,
    pub samples: usize,
    pub frames: Vec<FrameRecord>,
}

/// Points per reconstructed frame.
pub const FRAME_SAMPLES: usize = 512;

/// Write `frame_000.svg, ...` for `frames` uniformly spaced times and a
/// `frames.json` manifest into `dir` (created if missing).
pub fn emit_frames(sol: &FlowSolution, frames: usize, dir: &Path) -> Result<FrameManifest> {
    if frames < 2 {
        return Err(Error::InvalidInput(format!("at least 2 frames are needed, got {frames}")));
    }
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let times = linspace(0.0, sol.horizon(), frames);
    let records = times
        .par_iter()
        .enumerate()
        .map(|(index, &t)| {
            let curve = sol.curve_at(t, FRAME_SAMPLES)?;
            let min_curvature = linspace(0.0, sol.length, FRAME_SAMPLES + 1)
                .iter()
                .try_fold(f64::INFINITY, |m, &s| Ok::<_, Error>(m.min(sol.value(t, s)?)))?;
            let file = format!("frame_{index:03}.svg");
            let path: PathBuf = dir.join(&file);
            fs::write(&path, polyline_svg(&curve)).map_err(io(&path))?;
            Ok(FrameRecord {
                index,
                t,
                file,
                gap: curve.gap,
                angle_defect: curve.angle_defect,
                min_curvature,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = FrameManifest {
        flow: sol.summary(),
        samples: FRAME_SAMPLES,
        frames: records,
    };
    let path = dir.join("frames.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(io(&path))?;
    Ok(manifest)
}
