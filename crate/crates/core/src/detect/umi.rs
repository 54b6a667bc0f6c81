//! Unbalanced Michelson interferometer emulation and fringe visibility.
//!
//! The long arm delays the light by `delay` (one time bin in the experiments),
//! so neighbouring bins overlap at one output port:
//!
//!   I_out(t) = ¼·I(t) + ¼·I(t−delay) + ½·Re[e^{iφ}·G1(t−delay, delay)]
//!
//! The interferometer is modelled at the field-correlation level: trajectories
//! carry no optical phase, so the UMI output is deterministic given the
//! master-equation intensity and the regression G1.

use serde::Serialize;

use crate::detect::histogram::Histogram;
use crate::error::{QdError, Result};
use crate::linalg::C64;

/// Interferometer settings. The beam split ratio is fixed 50:50.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmiConfig {
    /// Long−short path delay, ns. Must be positive and on the sampling grid.
    pub delay: f64,
    /// Relative phase between the arms, rad.
    pub phase: f64,
}

/// G1(t, τ) sampled at fixed delay τ over a uniform time grid.
#[derive(Debug, Clone)]
pub struct G1Slice {
    /// Sample times, uniform spacing.
    pub times: Vec<f64>,
    /// G1(times[i], tau).
    pub values: Vec<C64>,
    /// The fixed delay the slice was evaluated at.
    pub tau: f64,
}

/// Interfered output intensity on the input time grid.
pub fn umi_intensity(g1: &G1Slice, intensity: &[f64], cfg: &UmiConfig) -> Result<Histogram> {
    if !(cfg.delay > 0.0) {
        return Err(QdError::InvalidInput(format!("delay must be > 0, got {}", cfg.delay)));
    }
    if g1.times.len() != g1.values.len() || g1.times.len() != intensity.len() {
        return Err(QdError::DimensionMismatch(format!(
            "G1 slice ({} times, {} values) and intensity ({})",
            g1.times.len(),
            g1.values.len(),
            intensity.len()
        )));
    }
    if g1.times.len() < 2 {
        return Err(QdError::InvalidInput("need at least two samples".into()));
    }
    let dt = g1.times[1] - g1.times[0];
    for w in g1.times.windows(2) {
        if ((w[1] - w[0]) - dt).abs() > 1e-9 {
            return Err(QdError::InvalidInput("time grid must be uniform".into()));
        }
    }
    if (g1.tau - cfg.delay).abs() > 1e-9 {
        return Err(QdError::InvalidInput(format!(
            "G1 slice evaluated at tau = {} but the interferometer delay is {}",
            g1.tau, cfg.delay
        )));
    }
    let shift = cfg.delay / dt;
    let k = shift.round();
    if (shift - k).abs() > 1e-6 || k < 1.0 {
        return Err(QdError::InvalidInput(format!(
            "delay {} ns is not a multiple of the grid step {} ns",
            cfg.delay, dt
        )));
    }
    let k = k as usize;

    let n = intensity.len();
    let phase = C64::from_polar(1.0, cfg.phase);
    let mut counts = Vec::with_capacity(n);
    for i in 0..n {
        let direct = 0.25 * intensity[i];
        let (delayed, interf) = if i >= k {
            (0.25 * intensity[i - k], 0.5 * (phase * g1.values[i - k]).re)
        } else {
            (0.0, 0.0)
        };
        counts.push((direct + delayed + interf).max(0.0));
    }
    let mut edges = g1.times.clone();
    edges.push(g1.times[n - 1] + dt);
    Ok(Histogram { edges, counts })
}

/// Sinusoidal fringe fit I(φ) = A + B·cos(φ + φ₀) and the visibility V = B/A.
#[derive(Debug, Clone, Serialize)]
pub struct VisibilityFit {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub phi0_rad: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "stderr_V")]
    pub stderr_v: f64,
}

/// Least-squares fringe fit over a phase scan of overlap-bin intensities.
///
/// The model is linear in (A, B·cosφ₀, −B·sinφ₀), so the fit is exact.
pub fn visibility(phase_scan: &[(f64, f64)]) -> Result<VisibilityFit> {
    let ([a0, a1, a2], cov, _ssr) = crate::fit::cosine_lsq(phase_scan)?;
    let b = a1.hypot(a2);
    let phi0 = (-a2).atan2(a1);
    if a0 <= 0.0 {
        return Err(QdError::DegenerateFit(format!("fringe offset A = {a0} must be positive")));
    }
    let v = b / a0;
    let stderr_v = if b > 0.0 {
        let g = [-b / (a0 * a0), a1 / (b * a0), a2 / (b * a0)];
        let mut var = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                var += g[i] * cov[(i, j)] * g[j];
            }
        }
        var.max(0.0).sqrt()
    } else {
        (cov[(1, 1)].max(cov[(2, 2)]) / (a0 * a0)).max(0.0).sqrt()
    };

    Ok(VisibilityFit { a: a0, b, phi0_rad: phi0, v, stderr_v })
}
