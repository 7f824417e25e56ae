use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use super::rational::RationalRatio;
use crate::error::{Error, Result};
use crate::funcrep::Func;

/// Largest admissible mode cutoff.
pub const MAX_MODES: usize = 4096;

/// Real Fourier coefficients `a_k = (2/L) int_0^L f cos(2 k pi x / L)`,
/// `b_k` likewise with `sin`, for `k = 0..=K` (`b_0 = 0`).
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientTable {
    pub period: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl CoefficientTable {
    pub fn modes(&self) -> usize {
        self.cos.len() - 1
    }

    /// Mean value `a_0 / 2`.
    pub fn mean(&self) -> f64 {
        0.5 * self.cos[0]
    }

    /// Truncated series at `x` using modes `1..=k_max`.
    pub fn synthesize(&self, x: f64, k_max: usize) -> f64 {
        let w = std::f64::consts::TAU / self.period;
        let mut acc = self.mean();
        for k in 1..=k_max.min(self.modes()) {
            let phase = w * k as f64 * x;
            acc += self.cos[k] * phase.cos() + self.sin[k] * phase.sin();
        }
        acc
    }
}

/// Number of samples used to analyze `k` modes: 16 per shortest wavelength,
/// at least 1024, rounded up to a power of two.
pub fn sample_count(k: usize) -> usize {
    (16 * k).max(1024).next_power_of_two()
}

/// Coefficients `0..=k` from uniform samples over one period; the uniform
/// sum is the trapezoid rule, which is spectrally accurate for periodic data.
pub fn fourier_analyze(f: &Func, period: f64, k: usize) -> Result<CoefficientTable> {
    if k == 0 {
        return Err(Error::InvalidInput("mode count must be at least 1".into()));
    }
    match f.period() {
        Some(p) if (p - period).abs() <= 1e-12 * period => {}
        _ => {
            f.clone().with_period(period)?;
        }
    }
    let n = sample_count(k);
    let h = period / n as f64;
    let mut buffer = (0..n)
        .map(|j| f.eval(h * j as f64).map(|v| Complex::new(v, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);
    let scale = 2.0 / n as f64;
    let cos = (0..=k).map(|i| scale * buffer[i].re).collect();
    let sin = (0..=k)
        .map(|i| if i == 0 { 0.0 } else { -scale * buffer[i].im })
        .collect();
    Ok(CoefficientTable { period, cos, sin })
}

/// Result of the cutoff search.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CutoffReport {
    pub modes: usize,
    /// Majorant of the neglected part of the solution series.
    pub tail: f64,
    /// `k^2`-weighted version of the same majorant (second derivatives).
    pub tail_k2: f64,
}

/// Coefficients below this fraction of the largest one are treated as zero.
const NOISE_FLOOR: f64 = 1e-14;

/// Per-mode majorant `(1 + 1/Cs)(|f_k| + |f̄_k|) + (1/Cs)(|g_k| + |ḡ_k|)`
/// with coefficients under the noise floor dropped.
fn majorants(fc: &CoefficientTable, gc: &CoefficientTable, ratio: &RationalRatio) -> Vec<f64> {
    let scale = fc
        .cos
        .iter()
        .chain(&fc.sin)
        .chain(&gc.cos)
        .chain(&gc.sin)
        .fold(0.0f64, |m, c| m.max(c.abs()));
    let floor = NOISE_FLOOR * scale.max(1.0);
    let clean = |c: f64| if c.abs() <= floor { 0.0 } else { c.abs() };
    // fully resonant ratios (q = 1) divide by nothing: every beta is zero
    let inv = if ratio.q == 1 { 1.0 } else { 1.0 / ratio.cs };
    (0..=fc.modes().min(gc.modes()))
        .map(|k| {
            if k == 0 {
                return 0.0;
            }
            (1.0 + inv) * (clean(fc.cos[k]) + clean(fc.sin[k])) + inv * (clean(gc.cos[k]) + clean(gc.sin[k]))
        })
        .collect()
}

/// Smallest `K` whose tail majorant is `<= tol`.
///
/// The tail beyond the analyzed modes is estimated by the sum over the upper
/// half of the table, so only `K <= modes/2` can be certified.
pub fn choose_cutoff(fc: &CoefficientTable, gc: &CoefficientTable, ratio: &RationalRatio, tol: f64) -> Result<CutoffReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let m = majorants(fc, gc, ratio);
    let probe = m.len() - 1;
    let half = probe / 2;
    let unseen: f64 = m[half + 1..].iter().sum();
    let unseen_k2: f64 = m[half + 1..]
        .iter()
        .enumerate()
        .map(|(i, v)| ((half + 1 + i) as f64).powi(2) * v)
        .sum();
    // suffix[k] = sum_{j > k} m_j
    let mut suffix = vec![0.0; probe + 1];
    let mut suffix_k2 = vec![0.0; probe + 1];
    for k in (0..probe).rev() {
        suffix[k] = suffix[k + 1] + m[k + 1];
        suffix_k2[k] = suffix_k2[k + 1] + ((k + 1) as f64).powi(2) * m[k + 1];
    }
    let cap = half.min(MAX_MODES);
    for k in 1..=cap {
        let tail = suffix[k] + unseen;
        if tail <= tol {
            return Ok(CutoffReport {
                modes: k,
                tail,
                tail_k2: suffix_k2[k] + unseen_k2,
            });
        }
    }
    Err(Error::TailNotConverged {
        tail: suffix[cap.max(1)] + unseen,
        tolerance: tol,
        cap: MAX_MODES,
    })
}

/// Analyze `f` and `g` with a growing number of probe modes until a cutoff
/// is certified or the cap is reached.
pub fn adaptive_cutoff(
    f: &Func,
    g: &Func,
    period: f64,
    ratio: &RationalRatio,
    tol: f64,
) -> Result<(CoefficientTable, CoefficientTable, CutoffReport)> {
    let mut probe = 64;
    loop {
        let fc = fourier_analyze(f, period, probe)?;
        let gc = fourier_analyze(g, period, probe)?;
        match choose_cutoff(&fc, &gc, ratio, tol) {
            Ok(report) => return Ok((fc, gc, report)),
            Err(err @ Error::TailNotConverged { .. }) => {
                if probe >= 2 * MAX_MODES {
                    return Err(err);
                }
                probe *= 2;
            }
            Err(other) => return Err(other),
        }
    }
}
