//! Physical rates and splittings of the dot-cavity system.

use serde::{Deserialize, Serialize};

use crate::error::{QdError, Result};

/// Ground-state decoherence model. Exactly one mode is active at a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum Dephasing {
    /// Markovian pure dephasing of the ground coherence at rate `gamma_deph`
    /// (1/ns), equal to 1/T₂*. Realised as a collapse operator
    /// √(γ/2)(|h⟩⟨h| − |h̄⟩⟨h̄|).
    Markovian { gamma_deph: f64 },
    /// Quasi-static ground-splitting noise: each trajectory draws a detuning
    /// δ ~ Normal(0, `sigma`) (rad/ns) added to the ground splitting as
    /// (δ/2)(|h̄⟩⟨h̄| − |h⟩⟨h|). The ensemble-averaged coherence decays as
    /// exp(−σ²t²/2), i.e. a Gaussian with T₂* = √2/σ.
    QuasiStatic { sigma: f64 },
}

impl Dephasing {
    /// Markovian dephasing rate, zero in quasi-static mode.
    pub fn markovian_rate(&self) -> f64 {
        match self {
            Dephasing::Markovian { gamma_deph } => *gamma_deph,
            Dephasing::QuasiStatic { .. } => 0.0,
        }
    }

    /// Quasi-static noise width, zero in Markovian mode.
    pub fn quasistatic_sigma(&self) -> f64 {
        match self {
            Dephasing::Markovian { .. } => 0.0,
            Dephasing::QuasiStatic { sigma } => *sigma,
        }
    }
}

/// Rates (1/ns unless noted) of the four-level dot-cavity system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Purcell-enhanced vertical decay rate |T̄⟩→|h⟩.
    pub gamma_enh: f64,
    /// Residual diagonal decay rate |T̄⟩→|h̄⟩.
    pub gamma_diag: f64,
    /// Ground spin-flip rate (each direction).
    pub gamma_sf: f64,
    /// Ground-state decoherence model.
    pub dephasing: Dephasing,
    /// Drive detuning from the |h̄⟩→|T̄⟩ resonance, rad/ns.
    pub delta_drive: f64,
    /// Hole Zeeman splitting, μeV. Bookkeeping only: the rotating frame
    /// co-rotates with both ground states, so the splitting itself does not
    /// enter the default Hamiltonian.
    pub delta_h_uev: f64,
}

impl SystemParams {
    /// Decoherence-free parameters with the given decay rates.
    pub fn ideal(gamma_enh: f64, gamma_diag: f64) -> Self {
        SystemParams {
            gamma_enh,
            gamma_diag,
            gamma_sf: 0.0,
            dephasing: Dephasing::Markovian { gamma_deph: 0.0 },
            delta_drive: 0.0,
            delta_h_uev: 0.0,
        }
    }

    /// Total trion decay rate Γ = Γ_enh + Γ_diag.
    pub fn gamma_total(&self) -> f64 {
        self.gamma_enh + self.gamma_diag
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [
            ("gamma_enh", self.gamma_enh),
            ("gamma_diag", self.gamma_diag),
            ("gamma_sf", self.gamma_sf),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                errs.push(format!("{name} must be >= 0 and finite, got {v}"));
            }
        }
        match self.dephasing {
            Dephasing::Markovian { gamma_deph } => {
                if !(gamma_deph >= 0.0) || !gamma_deph.is_finite() {
                    errs.push(format!("gamma_deph must be >= 0 and finite, got {gamma_deph}"));
                }
            }
            Dephasing::QuasiStatic { sigma } => {
                if !(sigma >= 0.0) || !sigma.is_finite() {
                    errs.push(format!("sigma must be >= 0 and finite, got {sigma}"));
                }
            }
        }
        if !(self.gamma_total() > 0.0) {
            errs.push("gamma_enh + gamma_diag must be > 0".to_string());
        }
        if !self.delta_drive.is_finite() {
            errs.push(format!("delta_drive must be finite, got {}", self.delta_drive));
        }
        if !self.delta_h_uev.is_finite() {
            errs.push(format!("delta_h_uev must be finite, got {}", self.delta_h_uev));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(QdError::InvalidInput(errs.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_params_pass() {
        let p = SystemParams::ideal(10.0, 0.4);
        assert!(p.validate().is_ok());
        assert_eq!(p.gamma_total(), 10.4);
    }

    #[test]
    fn negative_rate_rejected() {
        let mut p = SystemParams::ideal(10.0, 0.4);
        p.gamma_sf = -1.0;
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("gamma_sf"));
    }

    #[test]
    fn zero_total_decay_rejected() {
        let p = SystemParams::ideal(0.0, 0.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn dephasing_modes_are_exclusive() {
        let m = Dephasing::Markovian { gamma_deph: 0.3 };
        assert_eq!(m.markovian_rate(), 0.3);
        assert_eq!(m.quasistatic_sigma(), 0.0);
        let q = Dephasing::QuasiStatic { sigma: 0.5 };
        assert_eq!(q.markovian_rate(), 0.0);
        assert_eq!(q.quasistatic_sigma(), 0.5);
    }
}
