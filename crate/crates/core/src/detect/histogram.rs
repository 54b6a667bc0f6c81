//! Time-resolved click histograms and temporal filtering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QdError, Result};
use crate::lindblad::Channel;
use crate::trajectory::ClickRecord;

/// Counts over contiguous time bins.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    /// Bin edges, strictly increasing, length = counts.len() + 1.
    pub edges: Vec<f64>,
    pub counts: Vec<f64>,
}

impl Histogram {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }
}

/// Fold clicks of one channel modulo `sync_period` and count them per bin of
/// width `bin_width`. An empty click set gives a zero histogram.
pub fn time_resolved_histogram(
    records: &[ClickRecord],
    channel: Channel,
    bin_width: f64,
    sync_period: f64,
) -> Result<Histogram> {
    if !(bin_width > 0.0) {
        return Err(QdError::InvalidInput(format!("bin_width must be > 0, got {bin_width}")));
    }
    if !(sync_period > 0.0) {
        return Err(QdError::InvalidInput(format!("sync_period must be > 0, got {sync_period}")));
    }
    let n = (sync_period / bin_width).ceil() as usize;
    let edges: Vec<f64> = (0..=n).map(|i| (i as f64 * bin_width).min(sync_period)).collect();
    let mut counts = vec![0.0; n];
    for r in records {
        for &(t, c) in &r.clicks {
            if c != channel {
                continue;
            }
            let folded = t.rem_euclid(sync_period);
            let i = ((folded / bin_width) as usize).min(n - 1);
            counts[i] += 1.0;
        }
    }
    Ok(Histogram { edges, counts })
}

/// Keep only clicks whose folded time lies inside one of the windows
/// (given modulo `sync_period`). Windows must be disjoint.
pub fn temporal_filter(
    records: &[ClickRecord],
    windows: &[(f64, f64)],
    sync_period: f64,
) -> Result<Vec<ClickRecord>> {
    if !(sync_period > 0.0) {
        return Err(QdError::InvalidInput(format!("sync_period must be > 0, got {sync_period}")));
    }
    let mut sorted: Vec<(f64, f64)> = windows.to_vec();
    for &(a, b) in &sorted {
        if !(b > a) {
            return Err(QdError::InvalidInput(format!("window ({a}, {b}) is empty")));
        }
    }
    sorted.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    for w in sorted.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(QdError::InvalidInput(format!(
                "windows ({}, {}) and ({}, {}) overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    Ok(records
        .iter()
        .map(|r| {
            let clicks = r
                .clicks
                .iter()
                .filter(|(t, _)| {
                    let folded = t.rem_euclid(sync_period);
                    sorted.iter().any(|&(a, b)| folded >= a && folded < b)
                })
                .cloned()
                .collect();
            ClickRecord { clicks, ..r.clone() }
        })
        .collect())
}

/// Keep only clicks of the given channel (spectral-filter emulation).
pub fn filter_channel(records: &[ClickRecord], channel: Channel) -> Vec<ClickRecord> {
    records
        .iter()
        .map(|r| ClickRecord {
            clicks: r.clicks.iter().filter(|(_, c)| *c == channel).cloned().collect(),
            ..r.clone()
        })
        .collect()
}

/// Add a uniform Poisson background (dark counts) at `rate` per ns to each
/// record, tagged with the given channel. Optional detector imperfection,
/// off unless explicitly applied.
pub fn add_dark_counts(
    records: &[ClickRecord],
    rate: f64,
    channel: Channel,
    seed: u64,
) -> Vec<ClickRecord> {
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r.traj + 1);
        let mut clicks = r.clicks.clone();
        let mut t = 0.0;
        loop {
            let u: f64 = rng.gen();
            t += -(1.0 - u).ln() / rate;
            if t >= r.duration {
                break;
            }
            clicks.push((t, channel));
        }
        clicks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out.push(ClickRecord { clicks, ..r.clone() });
    }
    out
}

/// Sum of counts inside each window, using bin centers for membership.
pub fn peak_areas(hist: &Histogram, windows: &[(f64, f64)]) -> Vec<f64> {
    windows
        .iter()
        .map(|&(a, b)| {
            (0..hist.counts.len())
                .filter(|&i| {
                    let c = hist.bin_center(i);
                    c >= a && c < b
                })
                .map(|i| hist.counts[i])
                .sum()
        })
        .collect()
}
