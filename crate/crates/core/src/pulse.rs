//! Shaped drive pulses, stochastic reset events and the pulse sequence.
//!
//! A sequence describes one repetition period: a time-ordered list of
//! non-overlapping drive pulses on |h̄⟩→|T̄⟩ plus reset events that scramble
//! the ground spin with some probability. Experiments repeat the sequence
//! with period `rep_period`.

use serde::{Deserialize, Serialize};

use crate::error::{QdError, Result};
use crate::linalg::C64;

/// Default repetition period, ns.
pub const DEFAULT_REP_PERIOD: f64 = 12.5;
/// Default spacing between time bins, ns.
pub const DEFAULT_BIN_SPACING: f64 = 2.0;
/// Default pulse duration, ns.
pub const DEFAULT_PULSE_DURATION: f64 = 0.2;

/// erf(3/√2): fraction of a Gaussian inside the ±3σ truncation window.
const ERF_3_SIGMA: f64 = 0.997_300_203_936_739_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Square,
    Gaussian,
}

/// One shaped drive pulse. `area` is the time integral of the Rabi amplitude
/// |Ω(t)| in rad; `phase` is the optical phase of the drive field. A Gaussian
/// pulse is truncated at ±3σ, so `duration` = 6σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    pub t0: f64,
    #[serde(rename = "dur")]
    pub duration: f64,
    #[serde(rename = "area_rad")]
    pub area: f64,
    #[serde(rename = "phase_rad")]
    pub phase: f64,
    pub shape: PulseShape,
}

impl Pulse {
    pub fn end(&self) -> f64 {
        self.t0 + self.duration
    }

    /// Envelope magnitude |Ω(t)| in rad/ns; zero outside [t0, t0 + duration).
    pub fn amplitude(&self, t: f64) -> f64 {
        if t < self.t0 || t >= self.end() {
            return 0.0;
        }
        match self.shape {
            PulseShape::Square => self.area / self.duration,
            PulseShape::Gaussian => {
                let sigma = self.duration / 6.0;
                let tc = self.t0 + self.duration / 2.0;
                let norm = sigma * (2.0 * std::f64::consts::PI).sqrt() * ERF_3_SIGMA;
                (self.area / norm) * (-((t - tc) / sigma).powi(2) / 2.0).exp()
            }
        }
    }

    /// Peak envelope magnitude, used for step-size checks.
    pub fn peak_amplitude(&self) -> f64 {
        match self.shape {
            PulseShape::Square => self.area / self.duration,
            PulseShape::Gaussian => {
                let sigma = self.duration / 6.0;
                self.area / (sigma * (2.0 * std::f64::consts::PI).sqrt() * ERF_3_SIGMA)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(QdError::InvalidInput(format!(
                "pulse duration must be > 0, got {}",
                self.duration
            )));
        }
        if !(self.area >= 0.0) {
            return Err(QdError::InvalidInput(format!(
                "pulse area must be >= 0, got {}",
                self.area
            )));
        }
        if !self.t0.is_finite() || !self.phase.is_finite() {
            return Err(QdError::InvalidInput("pulse t0 and phase must be finite".into()));
        }
        Ok(())
    }
}

/// Instantaneous event that randomises the ground spin to the maximally mixed
/// ground state with probability `p_rand`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetPulse {
    pub t0: f64,
    pub p_rand: f64,
}

impl ResetPulse {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_rand) {
            return Err(QdError::InvalidInput(format!(
                "p_rand must be in [0, 1], got {}",
                self.p_rand
            )));
        }
        Ok(())
    }
}

/// One repetition period of drive pulses and reset events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSequence {
    #[serde(rename = "rep_period_ns")]
    pub rep_period: f64,
    #[serde(rename = "bin_spacing_ns")]
    pub bin_spacing: f64,
    pub pulses: Vec<Pulse>,
    pub resets: Vec<ResetPulse>,
}

impl PulseSequence {
    pub fn new(
        pulses: Vec<Pulse>,
        resets: Vec<ResetPulse>,
        bin_spacing: f64,
        rep_period: f64,
    ) -> Result<Self> {
        let seq = PulseSequence { rep_period, bin_spacing, pulses, resets };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rep_period > 0.0) {
            return Err(QdError::InvalidInput(format!(
                "rep_period must be > 0, got {}",
                self.rep_period
            )));
        }
        if !(self.bin_spacing > 0.0) {
            return Err(QdError::InvalidInput(format!(
                "bin_spacing must be > 0, got {}",
                self.bin_spacing
            )));
        }
        for p in &self.pulses {
            p.validate()?;
        }
        for r in &self.resets {
            r.validate()?;
        }
        for w in self.pulses.windows(2) {
            if w[1].t0 < w[0].end() {
                return Err(QdError::InvalidInput(format!(
                    "pulses overlap: one ends at {} ns, next starts at {} ns",
                    w[0].end(),
                    w[1].t0
                )));
            }
        }
        for w in self.resets.windows(2) {
            if w[1].t0 < w[0].t0 {
                return Err(QdError::InvalidInput("resets must be time-ordered".into()));
            }
        }
        for p in &self.pulses {
            if p.t0 < 0.0 || p.end() > self.rep_period {
                return Err(QdError::InvalidInput(format!(
                    "pulse [{}, {}] ns lies outside the repetition period of {} ns",
                    p.t0,
                    p.end(),
                    self.rep_period
                )));
            }
        }
        for r in &self.resets {
            if r.t0 < 0.0 || r.t0 >= self.rep_period {
                return Err(QdError::InvalidInput(format!(
                    "reset at {} ns lies outside the repetition period of {} ns",
                    r.t0, self.rep_period
                )));
            }
        }
        Ok(())
    }

    /// Complex drive amplitude Ω(t)·e^{iφ} at time `t` within the period.
    ///
    /// Times are taken literally (no periodic folding); the propagators fold
    /// multi-period times before calling this.
    pub fn omega_at(&self, t: f64) -> C64 {
        for p in &self.pulses {
            if t >= p.t0 && t < p.end() {
                return C64::from_polar(p.amplitude(t), p.phase);
            }
        }
        C64::new(0.0, 0.0)
    }

    /// Largest envelope amplitude over all pulses.
    pub fn peak_omega(&self) -> f64 {
        self.pulses.iter().map(|p| p.peak_amplitude()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serialisation is infallible")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let seq: PulseSequence = serde_json::from_str(s)
            .map_err(|e| QdError::InvalidInput(format!("bad sequence JSON: {e}")))?;
        seq.validate()?;
        Ok(seq)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn square(t0: f64, dur: f64, area: f64) -> Pulse {
        Pulse { t0, duration: dur, area, phase: 0.0, shape: PulseShape::Square }
    }

    #[test]
    fn omega_zero_between_pulses() {
        let seq =
            PulseSequence::new(vec![square(1.0, 0.1, PI)], vec![], 2.0, 12.5).unwrap();
        assert_eq!(seq.omega_at(0.5), C64::new(0.0, 0.0));
        assert_eq!(seq.omega_at(3.0), C64::new(0.0, 0.0));
    }

    #[test]
    fn square_pulse_amplitude_is_area_over_duration() {
        let seq =
            PulseSequence::new(vec![square(0.0, 0.1, PI)], vec![], 2.0, 12.5).unwrap();
        assert_relative_eq!(seq.omega_at(0.05).norm(), 10.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_pulse_area_integrates_to_area() {
        // Simpson quadrature over the truncation window as an independent check
        let p = Pulse { t0: 0.0, duration: 1.2, area: PI, phase: 0.3, shape: PulseShape::Gaussian };
        let n = 20_000;
        let h = p.duration / n as f64;
        let mut integral = p.amplitude(0.0) + p.amplitude(p.duration - 1e-15);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            integral += w * p.amplitude(k as f64 * h);
        }
        integral *= h / 3.0;
        assert!((integral - PI).abs() < 1e-6, "area integral {integral} vs {PI}");
    }

    #[test]
    fn pulse_phase_carried_by_omega() {
        let p = Pulse { t0: 0.0, duration: 0.2, area: 1.0, phase: PI / 2.0, shape: PulseShape::Square };
        let seq = PulseSequence::new(vec![p], vec![], 2.0, 12.5).unwrap();
        let w = seq.omega_at(0.1);
        assert_relative_eq!(w.re, 0.0, epsilon = 1e-12);
        assert_relative_eq!(w.im, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn overlapping_pulses_rejected() {
        let r = PulseSequence::new(
            vec![square(0.0, 1.0, 1.0), square(0.5, 1.0, 1.0)],
            vec![],
            2.0,
            12.5,
        );
        assert!(r.is_err());
    }

    #[test]
    fn pulse_beyond_period_rejected() {
        let r = PulseSequence::new(vec![square(12.4, 0.5, 1.0)], vec![], 2.0, 12.5);
        assert!(r.is_err());
    }

    #[test]
    fn bad_reset_probability_rejected() {
        let r = PulseSequence::new(
            vec![square(0.0, 0.1, 1.0)],
            vec![ResetPulse { t0: 0.0, p_rand: 1.5 }],
            2.0,
            12.5,
        );
        assert!(r.is_err());
    }

    #[test]
    fn json_round_trip_and_field_names() {
        let seq = PulseSequence::new(
            vec![Pulse { t0: 0.0, duration: 0.2, area: 1.25, phase: 0.5, shape: PulseShape::Gaussian }],
            vec![ResetPulse { t0: 11.0, p_rand: 0.8 }],
            2.0,
            12.5,
        )
        .unwrap();
        let json = seq.to_json();
        let back = PulseSequence::from_json(&json).unwrap();
        assert_eq!(seq, back);

        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v.get("rep_period_ns").is_some());
        assert!(v.get("bin_spacing_ns").is_some());
        let p = &v["pulses"][0];
        for key in ["t0", "dur", "area_rad", "phase_rad", "shape"] {
            assert!(p.get(key).is_some(), "missing pulse field {key}");
        }
        assert_eq!(p["shape"], "gaussian");
        let r = &v["resets"][0];
        assert!(r.get("t0").is_some() && r.get("p_rand").is_some());
    }
}
