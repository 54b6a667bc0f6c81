//! Compiler from target time-bin amplitudes to pulse areas and phases.
//!
//! For targets p_1..p_d with Σp ≤ 1, pulse k must excite the remaining ground
//! population with probability q_k = p_k / R_k, where R_k = 1 − Σ_{j<k} p_j is
//! the population still available. The required area is θ_k = 2·asin(√q_k).
//! Σp = 1 is the deterministic regime (the last pulse is always π); Σp < 1 is
//! the weak-pulse regime where every bin receives the same measured peak if
//! the targets are equal.
//!
//! For an equal split over d bins with Σ = 1 the areas are
//! θ_k = 2·asin(1/√(d−k+1)). The first W₃ pulse is therefore
//! 2·asin(1/√3) ≈ 0.392π (transferring amplitude 1/√3), not π/3.

use crate::error::{QdError, Result};
use crate::linalg::C64;
use crate::pulse::{
    Pulse, PulseSequence, PulseShape, DEFAULT_BIN_SPACING, DEFAULT_PULSE_DURATION,
    DEFAULT_REP_PERIOD,
};
use crate::timebin::TimeBinState;

const SUM_TOL: f64 = 1e-12;

/// Compile per-bin target probabilities and phases into a pulse sequence.
///
/// Pulse k starts at k·bin_spacing. The repetition period is the default
/// 12.5 ns, grown if the bins do not fit.
pub fn compile_sequence(
    target_probs: &[f64],
    phases: &[f64],
    bin_spacing: f64,
    pulse_duration: f64,
) -> Result<PulseSequence> {
    if target_probs.is_empty() {
        return Err(QdError::InvalidInput("need at least one target bin".into()));
    }
    if target_probs.len() != phases.len() {
        return Err(QdError::DimensionMismatch(format!(
            "{} target probabilities but {} phases",
            target_probs.len(),
            phases.len()
        )));
    }
    if !(bin_spacing > 0.0) {
        return Err(QdError::InvalidInput(format!("bin_spacing must be > 0, got {bin_spacing}")));
    }
    if !(pulse_duration > 0.0) || pulse_duration > bin_spacing {
        return Err(QdError::InvalidInput(format!(
            "pulse_duration must be in (0, bin_spacing], got {pulse_duration}"
        )));
    }
    for (k, &p) in target_probs.iter().enumerate() {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(QdError::InvalidInput(format!("target probability {k} is {p}")));
        }
    }
    let total: f64 = target_probs.iter().sum();
    if total > 1.0 + SUM_TOL {
        return Err(QdError::InfeasibleTarget(format!(
            "target probabilities sum to {total}, must be <= 1"
        )));
    }

    let areas = target_areas(target_probs)?;
    let pulses: Vec<Pulse> = areas
        .iter()
        .zip(phases.iter())
        .enumerate()
        .map(|(k, (&area, &phase))| Pulse {
            t0: k as f64 * bin_spacing,
            duration: pulse_duration,
            area,
            phase,
            shape: PulseShape::Square,
        })
        .collect();

    let span = (target_probs.len() - 1) as f64 * bin_spacing + pulse_duration;
    let rep_period = DEFAULT_REP_PERIOD.max(span);
    PulseSequence::new(pulses, Vec::new(), bin_spacing, rep_period)
}

/// Pulse areas θ_k = 2·asin(√(p_k / R_k)) for the depletion recursion.
pub fn target_areas(target_probs: &[f64]) -> Result<Vec<f64>> {
    let mut remaining = 1.0;
    let mut areas = Vec::with_capacity(target_probs.len());
    for (k, &p) in target_probs.iter().enumerate() {
        if p <= 0.0 {
            areas.push(0.0);
        } else {
            if remaining <= SUM_TOL {
                return Err(QdError::InfeasibleTarget(format!(
                    "bin {k} requests probability {p} but no ground population remains"
                )));
            }
            let q = (p / remaining).min(1.0);
            areas.push(2.0 * q.sqrt().asin());
        }
        remaining -= p;
    }
    Ok(areas)
}

/// Predicted photonic state of a sequence in the lossless delta-pulse limit:
/// c_k = e^{iφ_k}·sin(θ_k/2)·Π_{j<k} cos(θ_j/2), vac = Π_j cos(θ_j/2).
pub fn sequence_amplitudes(seq: &PulseSequence) -> TimeBinState {
    let mut amps = Vec::with_capacity(seq.pulses.len());
    let mut survive = 1.0; // product of cosines so far
    for p in &seq.pulses {
        let half = p.area / 2.0;
        amps.push(C64::from_polar(half.sin() * survive, p.phase));
        survive *= half.cos();
    }
    TimeBinState::new(amps, C64::new(survive, 0.0))
        .expect("product amplitudes are normalised by construction")
}

/// Invert `sequence_amplitudes`: compile the sequence realising the given
/// state with the default bin spacing and pulse duration.
pub fn round_trip(state: &TimeBinState) -> Result<PulseSequence> {
    let vac = state.vac();
    if vac.im.abs() > 1e-9 || vac.re < -1e-9 {
        return Err(QdError::InvalidInput(format!(
            "round trip requires a real non-negative vacuum amplitude, got {vac}"
        )));
    }
    let probs: Vec<f64> = state.amps().iter().map(|c| c.norm_sqr()).collect();
    let phases: Vec<f64> =
        state.amps().iter().map(|c| if c.norm() > 0.0 { c.arg() } else { 0.0 }).collect();
    compile_sequence(&probs, &phases, DEFAULT_BIN_SPACING, DEFAULT_PULSE_DURATION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn areas_of(seq: &PulseSequence) -> Vec<f64> {
        seq.pulses.iter().map(|p| p.area).collect()
    }

    #[test]
    fn equal_w3_areas() {
        let seq = compile_sequence(&[1.0 / 3.0; 3], &[0.0; 3], 2.0, 0.2).unwrap();
        let areas = areas_of(&seq);
        assert_relative_eq!(areas[0], 2.0 * (1.0 / 3.0_f64.sqrt()).asin(), epsilon = 1e-12);
        assert_relative_eq!(areas[1], PI / 2.0, epsilon = 1e-12);
        assert_relative_eq!(areas[2], PI, epsilon = 1e-12);
    }

    #[test]
    fn single_bin_full_transfer() {
        let seq = compile_sequence(&[1.0], &[0.0], 2.0, 0.2).unwrap();
        assert_relative_eq!(seq.pulses[0].area, PI, epsilon = 1e-12);
    }

    #[test]
    fn weak_equal_targets_deplete_correctly() {
        // equal 0.1 targets: per-pulse excitation probabilities 0.1/1, 0.1/0.9, 0.1/0.8
        let seq = compile_sequence(&[0.1; 3], &[0.0; 3], 2.0, 0.2).unwrap();
        let expect_q = [0.1, 0.1 / 0.9, 0.1 / 0.8];
        for (p, q) in seq.pulses.iter().zip(expect_q) {
            assert_relative_eq!((p.area / 2.0).sin().powi(2), q, epsilon = 1e-12);
        }
    }

    #[test]
    fn oversubscribed_target_rejected() {
        assert!(compile_sequence(&[0.5, 0.6], &[0.0; 2], 2.0, 0.2).is_err());
    }

    #[test]
    fn positive_prob_after_depletion_rejected() {
        assert!(compile_sequence(&[1.0, 0.1], &[0.0; 2], 2.0, 0.2).is_err());
        // a zero target after full depletion is fine
        assert!(compile_sequence(&[1.0, 0.0], &[0.0; 2], 2.0, 0.2).is_ok());
    }

    #[test]
    fn sequence_amplitudes_reproduces_wstate() {
        let seq = compile_sequence(&[1.0 / 3.0; 3], &[0.0; 3], 2.0, 0.2).unwrap();
        let state = sequence_amplitudes(&seq);
        let w3 = TimeBinState::wstate(3).unwrap();
        assert!(state.fidelity(&w3).unwrap() > 1.0 - 1e-12);
        assert_relative_eq!(state.vac().norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn sequence_amplitudes_phase_example() {
        // theta = [pi/2, pi], phi = [0, pi/2] -> (1/sqrt2, i/sqrt2)
        let pulses = vec![
            Pulse { t0: 0.0, duration: 0.2, area: PI / 2.0, phase: 0.0, shape: PulseShape::Square },
            Pulse { t0: 2.0, duration: 0.2, area: PI, phase: PI / 2.0, shape: PulseShape::Square },
        ];
        let seq = PulseSequence::new(pulses, vec![], 2.0, 12.5).unwrap();
        let s = sequence_amplitudes(&seq);
        let r = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(s.amps()[0].re, r, epsilon = 1e-12);
        assert_relative_eq!(s.amps()[0].im, 0.0, epsilon = 1e-12);
        assert_relative_eq!(s.amps()[1].re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(s.amps()[1].im, r, epsilon = 1e-12);
    }

    #[test]
    fn pi_pulse_gives_single_bin() {
        let seq = compile_sequence(&[1.0], &[0.0], 2.0, 0.2).unwrap();
        let s = sequence_amplitudes(&seq);
        assert_relative_eq!(s.amps()[0].norm(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(s.vac().norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn round_trip_on_wstate() {
        let w3 = TimeBinState::wstate(3).unwrap();
        let seq = round_trip(&w3).unwrap();
        let areas = areas_of(&seq);
        assert_relative_eq!(areas[0], 2.0 * (1.0 / 3.0_f64.sqrt()).asin(), epsilon = 1e-9);
        assert_relative_eq!(areas[1], PI / 2.0, epsilon = 1e-9);
        assert_relative_eq!(areas[2], PI, epsilon = 1e-9);
    }

    #[test]
    fn round_trip_single_bin_leading() {
        let s = TimeBinState::single(3, 0).unwrap();
        let seq = round_trip(&s).unwrap();
        let areas = areas_of(&seq);
        assert_relative_eq!(areas[0], PI, epsilon = 1e-12);
        assert_relative_eq!(areas[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(areas[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn equal_sum_one_closed_form() {
        for d in 1..=6usize {
            let seq = compile_sequence(&vec![1.0 / d as f64; d], &vec![0.0; d], 2.0, 0.2).unwrap();
            for (k, p) in seq.pulses.iter().enumerate() {
                let expect = 2.0 * (1.0 / ((d - k) as f64).sqrt()).asin();
                assert_relative_eq!(p.area, expect, epsilon = 1e-12);
            }
            assert_relative_eq!(seq.pulses[d - 1].area, PI, epsilon = 1e-12);
        }
    }
}
