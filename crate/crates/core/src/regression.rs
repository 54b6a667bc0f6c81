//! Two-time correlation functions via the quantum regression theorem.
//!
//! With the source operator σ = |h⟩⟨T̄| of the enhanced transition and Φ_τ the
//! Lindblad propagator (including the time-dependent drive from t to t+τ):
//!
//!   G1(t, τ) = Γ_P · Tr[σ† Φ_τ(σ ρ(t))]
//!   G2(t, τ) = Γ_P² · Tr[σ†σ Φ_τ(σ ρ(t) σ†)]
//!
//! G1 feeds the interferometer prediction; G2 is the unnormalised pulsed
//! second-order correlation.

use crate::basis::Level;
use crate::density::DensityMatrix;
use crate::error::{QdError, Result};
use crate::linalg::{ketbra, Mat4, C64};
use crate::master::{Propagator, PulseMode, EPS_T};
use crate::params::SystemParams;
use crate::pulse::PulseSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrKind {
    G1,
    G2,
}

/// Evaluate G1 or G2 at fixed emission time `t` over the delays `taus`
/// (sorted, non-negative). `rho_t` is the state at time `t`, with any events
/// scheduled exactly at `t` already applied.
pub fn two_time_corr(
    rho_t: &DensityMatrix,
    params: &SystemParams,
    seq: &PulseSequence,
    mode: PulseMode,
    dt: f64,
    t: f64,
    taus: &[f64],
    kind: CorrKind,
) -> Result<Vec<C64>> {
    if taus.is_empty() {
        return Ok(Vec::new());
    }
    if taus[0] < 0.0 {
        return Err(QdError::InvalidInput("delays must be non-negative".into()));
    }
    for w in taus.windows(2) {
        if w[1] <= w[0] {
            return Err(QdError::InvalidInput("delays must be strictly increasing".into()));
        }
    }
    rho_t.validate()?;
    let prop = Propagator::new(params, seq, mode, dt, 0.0)?;
    let gamma_p = params.gamma_enh;
    let one = C64::new(1.0, 0.0);
    let sigma = ketbra(Level::H, Level::TBar, one);

    let mut m = match kind {
        CorrKind::G1 => sigma * rho_t.matrix(),
        CorrKind::G2 => sigma * rho_t.matrix() * sigma.adjoint(),
    };

    let mut out = Vec::with_capacity(taus.len());
    let mut cur = 0.0;
    for &tau in taus {
        if tau > cur + EPS_T {
            prop.advance(&mut m, t + cur, t + tau, |_, _| {});
            cur = tau;
        } else if tau > cur {
            cur = tau;
        }
        let val = match kind {
            // Tr[σ† M] = M_{h, Tbar}
            CorrKind::G1 => m[(Level::H.index(), Level::TBar.index())] * gamma_p,
            // Tr[σ†σ M] = M_{Tbar, Tbar}
            CorrKind::G2 => {
                m[(Level::TBar.index(), Level::TBar.index())] * gamma_p * gamma_p
            }
        };
        out.push(val);
    }
    Ok(out)
}
