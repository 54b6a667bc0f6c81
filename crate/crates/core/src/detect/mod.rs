//! Emulation of the measurement chain: time-resolved histograms, temporal
//! filtering, HBT correlation with peak-area g²(0), and the unbalanced
//! Michelson interferometer.

pub mod hbt;
pub mod histogram;
pub mod umi;

pub use hbt::{g2_zero, hbt_correlate, side_peak_profile, CorrelationHistogram, DEFAULT_G2_FAR_RANGE};
pub use histogram::{
    add_dark_counts, filter_channel, peak_areas, temporal_filter, time_resolved_histogram,
    Histogram,
};
pub use umi::{umi_intensity, visibility, G1Slice, UmiConfig, VisibilityFit};
