//! Simulation and analysis engine for a four-level quantum dot driven as a
//! Raman single-photon source.
//!
//! The model is a double-Λ system: two hole-spin ground states |h⟩, |h̄⟩ and
//! two trion states |T⟩, |T̄⟩. A laser drives |h̄⟩→|T̄⟩; the dot decays either
//! through the cavity-enhanced vertical transition |T̄⟩→|h⟩ or the residual
//! diagonal transition |T̄⟩→|h̄⟩. Sequences of weak pulses scatter a single
//! photon into a superposition of time bins; the crate provides
//!
//! * the operator algebra and Lindblad generator for the four-level system,
//! * a compiler from target time-bin amplitudes to pulse areas and phases,
//! * a fixed-step master-equation integrator and a Monte Carlo wavefunction
//!   trajectory sampler producing time-tagged click records,
//! * two-time correlation functions via the quantum regression theorem,
//! * the detection chain: time-resolved histograms, HBT correlation with
//!   peak-area g²(0), temporal filtering and an unbalanced Michelson
//!   interferometer, and
//! * orchestration of the spin-pumping, W-state, HBT and interference
//!   experiments with the associated fitting utilities.
//!
//! Units: time in ns, angular rates in rad/ns, energies in μeV.

pub mod basis;
pub mod compiler;
pub mod density;
pub mod detect;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod grid;
pub mod io;
pub mod lindblad;
pub mod linalg;
pub mod master;
pub mod params;
pub mod pulse;
pub mod regression;
pub mod timebin;
pub mod trajectory;
pub mod units;

pub use basis::Level;
pub use density::DensityMatrix;
pub use error::{QdError, Result};
pub use grid::TimeGrid;
pub use lindblad::{build_collapse_ops, build_hamiltonian, lindblad_rhs, Channel, CollapseOp};
pub use linalg::{Mat4, Vec4, C64};
pub use master::{evolve_master, EvolutionResult, PulseMode};
pub use params::{Dephasing, SystemParams};
pub use pulse::{Pulse, PulseSequence, PulseShape, ResetPulse};
pub use timebin::TimeBinState;
pub use trajectory::{sample_trajectories, ClickRecord};
