//! Time-bin photonic qudit: one photon superposed across d time bins plus a
//! vacuum component.

use crate::error::{QdError, Result};
use crate::linalg::C64;

/// Tolerance on | |vac|² + Σ|c_k|² − 1 |.
pub const NORM_TOL: f64 = 1e-9;

/// Normalised single-photon state over `d` time bins with a vacuum amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeBinState {
    amps: Vec<C64>,
    vac: C64,
}

impl TimeBinState {
    /// Build a state, checking normalisation.
    pub fn new(amps: Vec<C64>, vac: C64) -> Result<Self> {
        if amps.is_empty() {
            return Err(QdError::InvalidInput("bin count must be >= 1".into()));
        }
        let n: f64 = vac.norm_sqr() + amps.iter().map(|c| c.norm_sqr()).sum::<f64>();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(QdError::InvalidInput(format!(
                "time-bin state not normalised: |vac|^2 + sum |c|^2 = {n}"
            )));
        }
        Ok(TimeBinState { amps, vac })
    }

    /// Equal-amplitude single-photon state over `d` bins: all c_k = 1/√d.
    pub fn wstate(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(QdError::InvalidInput("wstate requires d >= 1".into()));
        }
        let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        Ok(TimeBinState { amps: vec![amp; d], vac: C64::new(0.0, 0.0) })
    }

    /// Photon with certainty in bin `k` (0-based) of `d` bins.
    pub fn single(d: usize, k: usize) -> Result<Self> {
        if d == 0 || k >= d {
            return Err(QdError::InvalidInput(format!("bin {k} out of range for d = {d}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[k] = C64::new(1.0, 0.0);
        Ok(TimeBinState { amps, vac: C64::new(0.0, 0.0) })
    }

    /// No photon in any of the `d` bins.
    pub fn vacuum(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(QdError::InvalidInput("bin count must be >= 1".into()));
        }
        Ok(TimeBinState { amps: vec![C64::new(0.0, 0.0); d], vac: C64::new(1.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn vac(&self) -> C64 {
        self.vac
    }

    /// |⟨self|other⟩|², vacuum component included.
    pub fn fidelity(&self, other: &TimeBinState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(QdError::DimensionMismatch(format!(
                "fidelity of {}-bin and {}-bin states",
                self.dim(),
                other.dim()
            )));
        }
        let mut ov = self.vac.conj() * other.vac;
        for (a, b) in self.amps.iter().zip(other.amps.iter()) {
            ov += a.conj() * b;
        }
        Ok(ov.norm_sqr())
    }
}
