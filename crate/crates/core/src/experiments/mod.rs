//! Orchestration of the four experiments: spin pumping, W-state generation,
//! HBT correlation and the interference phase scan, plus shared estimators.

pub mod interference;
pub mod spin_pumping;
pub mod wstate;

pub use interference::{run_interference, PairVisibility};
pub use spin_pumping::{run_spin_pumping, PumpFit, SpinPumpingResult};
pub use wstate::{run_wstate, Scheme, WStateResult};

use crate::basis::Level;
use crate::density::DensityMatrix;
use crate::error::{QdError, Result};
use crate::grid::TimeGrid;
use crate::linalg::{ketbra, Mat4, C64};
use crate::master::{PulseMode, Propagator};
use crate::params::SystemParams;
use crate::pulse::PulseSequence;

/// Initial dot state of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialStateSpec {
    Level(Level),
    MixedGround,
}

impl InitialStateSpec {
    pub fn density(&self) -> DensityMatrix {
        match self {
            InitialStateSpec::Level(l) => DensityMatrix::pure_level(*l),
            InitialStateSpec::MixedGround => DensityMatrix::mixed_ground(),
        }
    }
}

/// Analysis options shared by the experiment runners.
#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    /// Histogram bin width, ns.
    pub hist_bin_width: f64,
    /// HBT correlation window |τ| ≤ max_tau, ns.
    pub hbt_max_tau: f64,
    /// HBT histogram bin width, ns.
    pub hbt_bin_width: f64,
    /// Far-peak range (in repetition periods) normalising g²(0).
    pub g2_far_range: (usize, usize),
    /// Interferometer phase list, rad.
    pub phases: Vec<f64>,
    /// Fit window for the spin-pumping trace, ns.
    pub fit_window: Option<(f64, f64)>,
    /// Spin-pumping fit model.
    pub pump_fit: PumpFit,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            hist_bin_width: 0.1,
            hbt_max_tau: 131.25,
            hbt_bin_width: 0.5,
            g2_far_range: crate::detect::DEFAULT_G2_FAR_RANGE,
            phases: (0..8).map(|k| k as f64 * std::f64::consts::PI / 4.0).collect(),
            fit_window: None,
            pump_fit: PumpFit::Exponential,
        }
    }
}

/// Fully resolved description of one experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub params: SystemParams,
    pub seq: PulseSequence,
    pub rho0: InitialStateSpec,
    pub n_traj: usize,
    pub n_periods: usize,
    /// Integration step, ns.
    pub dt: f64,
    pub mode: PulseMode,
    pub seed: u64,
    pub analysis: AnalysisOptions,
}

impl ExperimentSpec {
    /// The full multi-period integration grid.
    pub fn grid(&self) -> Result<TimeGrid> {
        if self.n_periods == 0 {
            return Err(QdError::InvalidInput("n_periods must be >= 1".into()));
        }
        TimeGrid::new(0.0, self.n_periods as f64 * self.seq.rep_period, self.dt)
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.seq.validate()?;
        self.grid()?.validate()
    }
}

/// Dephasing lineshape assumed when inverting a visibility to T₂*.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DephasingModel {
    /// Exponential coherence decay: V = e^(−Δ/T₂*).
    Markov,
    /// Gaussian coherence decay: V = e^(−(Δ/T₂*)²).
    Gauss,
}

/// Invert a fringe visibility at interferometer delay `delay` to T₂*.
pub fn estimate_t2star(v: f64, delay: f64, model: DephasingModel) -> Result<f64> {
    if !(v > 0.0 && v < 1.0) {
        return Err(QdError::InvalidInput(format!(
            "visibility must lie strictly between 0 and 1, got {v}"
        )));
    }
    if !(delay > 0.0) {
        return Err(QdError::InvalidInput(format!("delay must be > 0, got {delay}")));
    }
    Ok(match model {
        DephasingModel::Markov => -delay / v.ln(),
        DephasingModel::Gauss => delay / (-v.ln()).sqrt(),
    })
}

/// G1(t, delay) for every grid time, given the stored forward states.
/// Entries with t + delay beyond the last stored time are zero.
pub(crate) fn g1_slice_from_states(
    times: &[f64],
    states: &[Mat4],
    params: &SystemParams,
    seq: &PulseSequence,
    mode: PulseMode,
    dt: f64,
    delay: f64,
    t_max: f64,
) -> Result<crate::detect::G1Slice> {
    let prop = Propagator::new(params, seq, mode, dt, 0.0)?;
    let sigma = ketbra(Level::H, Level::TBar, C64::new(1.0, 0.0));
    let gamma_p = params.gamma_enh;
    let mut values = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        if t > t_max {
            values.push(C64::new(0.0, 0.0));
            continue;
        }
        let mut m = sigma * states[i];
        prop.advance(&mut m, t, t + delay, |_, _| {});
        values.push(m[(Level::H.index(), Level::TBar.index())] * gamma_p);
    }
    Ok(crate::detect::G1Slice { times: times.to_vec(), values, tau: delay })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn t2star_markov_inversion() {
        // V = 0.696 at 1.34 ns delay maps back to ~3.70 ns
        let t2 = estimate_t2star(0.696, 1.34, DephasingModel::Markov).unwrap();
        assert!((t2 - 3.70).abs() < 0.01, "T2* = {t2}");
    }

    #[test]
    fn t2star_at_one_over_e() {
        let d = 2.7;
        assert_relative_eq!(
            estimate_t2star(1.0 / std::f64::consts::E, d, DephasingModel::Markov).unwrap(),
            d,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            estimate_t2star(1.0 / std::f64::consts::E, d, DephasingModel::Gauss).unwrap(),
            d,
            epsilon = 1e-12
        );
    }

    #[test]
    fn t2star_rejects_invalid_visibility() {
        assert!(estimate_t2star(1.0, 1.0, DephasingModel::Markov).is_err());
        assert!(estimate_t2star(0.0, 1.0, DephasingModel::Markov).is_err());
        assert!(estimate_t2star(-0.2, 1.0, DephasingModel::Gauss).is_err());
        assert!(estimate_t2star(1.3, 1.0, DephasingModel::Gauss).is_err());
    }

    #[test]
    fn t2star_round_trips_both_models() {
        for &t2 in &[1.0, 3.7, 10.0] {
            for &delay in &[0.7, 1.34, 2.0] {
                let v_markov = (-delay / t2_f(t2)).exp();
                let back = estimate_t2star(v_markov, delay, DephasingModel::Markov).unwrap();
                assert_relative_eq!(back, t2, epsilon = 1e-9);
                let v_gauss = (-(delay / t2).powi(2)).exp();
                let back = estimate_t2star(v_gauss, delay, DephasingModel::Gauss).unwrap();
                assert_relative_eq!(back, t2, epsilon = 1e-9);
            }
        }
    }

    fn t2_f(t2: f64) -> f64 {
        t2
    }
}
