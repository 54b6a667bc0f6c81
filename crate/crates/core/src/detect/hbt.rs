//! Hanbury Brown–Twiss correlation and peak-area g²(0).
//!
//! Coincidences are pair time differences between clicks of the same
//! trajectory, both orderings, so the histogram is symmetric in τ by
//! construction. The beam splitter is emulated by a random 50:50 detector
//! assignment per click; same-detector pairs are excluded as in hardware.
//! Each pair is weighted by 1/(1 − |τ|/T), T the record duration, which
//! removes the triangular bias of finite records (a Poisson stream then gives
//! a flat histogram).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QdError, Result};
use crate::trajectory::ClickRecord;

/// Coincidence counts over a symmetric signed-τ range.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    /// Signed τ bin edges, symmetric about zero.
    pub edges: Vec<f64>,
    pub counts: Vec<f64>,
}

impl CorrelationHistogram {
    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    pub fn tau_max(&self) -> f64 {
        *self.edges.last().unwrap()
    }

    /// Sum of counts with bin centers inside (lo, hi].
    fn cluster_area(&self, lo: f64, hi: f64) -> f64 {
        (0..self.counts.len())
            .filter(|&i| {
                let c = self.bin_center(i);
                c > lo && c <= hi
            })
            .map(|i| self.counts[i])
            .sum()
    }
}

/// Histogram pairwise click time differences, |τ| ≤ max_tau.
///
/// `seed` drives the random detector assignment of the beam splitter.
pub fn hbt_correlate(
    records: &[ClickRecord],
    max_tau: f64,
    bin_width: f64,
    seed: u64,
) -> Result<CorrelationHistogram> {
    if !(max_tau > 0.0) || !(bin_width > 0.0) {
        return Err(QdError::InvalidInput(
            "max_tau and bin_width must be > 0".into(),
        ));
    }
    let half = (max_tau / bin_width).ceil() as usize;
    let n = 2 * half;
    let lo = -(half as f64) * bin_width;
    let edges: Vec<f64> = (0..=n).map(|i| lo + i as f64 * bin_width).collect();
    let mut counts = vec![0.0; n];

    for r in records {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r.traj + 1);
        let detectors: Vec<bool> = r.clicks.iter().map(|_| rng.gen::<f64>() < 0.5).collect();
        for i in 0..r.clicks.len() {
            for j in (i + 1)..r.clicks.len() {
                if detectors[i] == detectors[j] {
                    continue;
                }
                let tau = r.clicks[j].0 - r.clicks[i].0;
                if tau.abs() > max_tau || tau.abs() >= r.duration {
                    continue;
                }
                let w = 1.0 / (1.0 - tau.abs() / r.duration);
                for signed in [tau, -tau] {
                    let k = ((signed - lo) / bin_width).floor() as isize;
                    if k >= 0 && (k as usize) < n {
                        counts[k as usize] += w;
                    }
                }
            }
        }
    }
    Ok(CorrelationHistogram { edges, counts })
}

/// Default far-peak normaliser range, in repetition periods.
pub const DEFAULT_G2_FAR_RANGE: (usize, usize) = (5, 10);

/// Peak-area g²(0): the |τ| < rep/2 cluster area divided by the mean area of
/// the clusters at |τ − m·rep| < rep/2 for m in `far_range`. Far peaks are
/// used because the m = 1 peaks are physically suppressed by incomplete spin
/// reset.
pub fn g2_zero(
    corr: &CorrelationHistogram,
    rep_period: f64,
    far_range: (usize, usize),
) -> Result<f64> {
    let (m_lo, m_hi) = far_range;
    if m_lo < 1 || m_hi < m_lo {
        return Err(QdError::InvalidInput(format!(
            "far range [{m_lo}, {m_hi}] must satisfy 1 <= lo <= hi"
        )));
    }
    let span = corr.tau_max();
    let m_avail = ((span / rep_period) - 0.5).floor() as isize;
    if m_avail < m_lo as isize {
        return Err(QdError::InvalidInput(format!(
            "correlation spans only {span} ns; need at least {} repetitions each side",
            m_lo
        )));
    }
    let m_hi = m_hi.min(m_avail as usize);
    let central = corr.cluster_area(-rep_period / 2.0, rep_period / 2.0);
    let mut side = 0.0;
    let mut n_side = 0;
    for m in m_lo..=m_hi {
        for sgn in [-1.0, 1.0] {
            let c = sgn * m as f64 * rep_period;
            side += corr.cluster_area(c - rep_period / 2.0, c + rep_period / 2.0);
            n_side += 1;
        }
    }
    if side <= 0.0 {
        return Err(QdError::DegenerateFit(
            "no coincidences in the far side peaks; cannot normalise g2(0)".into(),
        ));
    }
    Ok(central / (side / n_side as f64))
}

/// Cluster areas of the side peaks m = 1..m_max (mean of the ±m clusters),
/// for comparison with the reset Markov-chain prediction.
pub fn side_peak_profile(
    corr: &CorrelationHistogram,
    rep_period: f64,
    m_max: usize,
) -> Result<Vec<f64>> {
    if m_max < 1 {
        return Err(QdError::InvalidInput("m_max must be >= 1".into()));
    }
    let span = corr.tau_max();
    if span < (m_max as f64 + 0.5) * rep_period {
        return Err(QdError::InvalidInput(format!(
            "correlation spans {span} ns, too short for m_max = {m_max}"
        )));
    }
    Ok((1..=m_max)
        .map(|m| {
            let mut area = 0.0;
            for sgn in [-1.0, 1.0] {
                let c = sgn * m as f64 * rep_period;
                area += corr.cluster_area(c - rep_period / 2.0, c + rep_period / 2.0);
            }
            area / 2.0
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::Channel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn record(traj: u64, duration: f64, times: &[f64]) -> ClickRecord {
        ClickRecord {
            traj,
            seed: 0,
            duration,
            clicks: times.iter().map(|&t| (t, Channel::Enhanced)).collect(),
        }
    }

    #[test]
    fn single_click_records_have_no_center_counts() {
        let recs: Vec<ClickRecord> =
            (0..200).map(|i| record(i, 125.0, &[2.0 + (i % 10) as f64 * 12.5])).collect();
        let corr = hbt_correlate(&recs, 60.0, 0.5, 9).unwrap();
        let central: f64 = (0..corr.counts.len())
            .filter(|&i| corr.bin_center(i).abs() < 6.25)
            .map(|i| corr.counts[i])
            .sum();
        assert_eq!(central, 0.0);
    }

    #[test]
    fn correlation_is_symmetric_exactly() {
        let recs: Vec<ClickRecord> = (0..50)
            .map(|i| {
                let base = (i % 7) as f64 * 1.7;
                record(i, 100.0, &[base + 1.0, base + 7.3, base + 20.1, base + 33.3])
            })
            .collect();
        let corr = hbt_correlate(&recs, 40.0, 0.5, 4).unwrap();
        let n = corr.counts.len();
        for i in 0..n {
            assert_eq!(corr.counts[i], corr.counts[n - 1 - i], "bin {i} asymmetric");
        }
    }

    #[test]
    fn poisson_stream_is_flat_with_unit_g2() {
        // independent Poisson clicks: g2 = 1, histogram flat after the
        // finite-record correction
        let rate = 0.8; // per ns
        let duration = 400.0;
        let mut recs = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for traj in 0..300 {
            let mut t = 0.0;
            let mut clicks = Vec::new();
            loop {
                let u: f64 = rng.gen();
                t += -(1.0 - u).ln() / rate;
                if t >= duration {
                    break;
                }
                clicks.push((t, Channel::Enhanced));
            }
            recs.push(ClickRecord { traj, seed: 0, duration, clicks });
        }
        let corr = hbt_correlate(&recs, 130.0, 2.0, 7).unwrap();
        let g2 = g2_zero(&corr, 12.5, (5, 10)).unwrap();
        // 3 sigma on the cluster ratio; clusters hold ~1e5 pairs each
        assert!((g2 - 1.0).abs() < 0.02, "Poisson g2(0) = {g2}");
        let mean = corr.counts.iter().sum::<f64>() / corr.counts.len() as f64;
        for (i, c) in corr.counts.iter().enumerate() {
            assert!(
                (c - mean).abs() < 6.0 * mean.sqrt(),
                "bin {i} deviates: {c} vs mean {mean}"
            );
        }
    }

    #[test]
    fn zero_central_cluster_gives_zero() {
        // exactly one click per repetition: all pairs land on side peaks
        let recs: Vec<ClickRecord> = (0..500)
            .map(|i| {
                let times: Vec<f64> = (0..12).map(|k| 2.0 + k as f64 * 12.5).collect();
                record(i, 156.0, &times)
            })
            .collect();
        let corr = hbt_correlate(&recs, 131.0, 0.5, 3).unwrap();
        let g2 = g2_zero(&corr, 12.5, (5, 10)).unwrap();
        assert_eq!(g2, 0.0);
    }

    #[test]
    fn too_short_span_rejected() {
        let recs = vec![record(0, 100.0, &[1.0, 2.0])];
        let corr = hbt_correlate(&recs, 20.0, 0.5, 1).unwrap();
        assert!(g2_zero(&corr, 12.5, (5, 10)).is_err());
        assert!(side_peak_profile(&corr, 12.5, 5).is_err());
    }
}
