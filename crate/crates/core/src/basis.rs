//! Fixed ordered basis of the four-level system.
//!
//! The basis is {|h⟩, |h̄⟩, |T⟩, |T̄⟩} with indices 0..3. |h⟩ and |h̄⟩ are the
//! hole-spin ground states, |T⟩ and |T̄⟩ the trion states. All operators in
//! this crate are expressed in this basis and this ordering.
//!
//! Conventions baked into the basis:
//! * the drive couples |h̄⟩ (index 1) to |T̄⟩ (index 3),
//! * the cavity-enhanced vertical decay is |T̄⟩→|h⟩ (3 → 0),
//! * the residual diagonal decay is |T̄⟩→|h̄⟩ (3 → 1),
//! * |T⟩ (index 2) is retained but uncoupled by default.
//!
//! Swapping which vertical transition is "enhanced" is a pure relabelling of
//! the ground states and changes no observable, so the assignment above is
//! fixed rather than configurable.

/// One level of the dot, carrying its basis index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    /// Ground hole spin |h⟩, the shelf state the Raman photon heralds.
    H = 0,
    /// Ground hole spin |h̄⟩, the driven ground state.
    HBar = 1,
    /// Trion |T⟩, uncoupled in the default model.
    T = 2,
    /// Trion |T̄⟩, the optically excited state of the driven transition.
    TBar = 3,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::H, Level::HBar, Level::T, Level::TBar];

    /// Basis index in the fixed ordering.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::H => "h",
            Level::HBar => "hbar",
            Level::T => "T",
            Level::TBar => "Tbar",
        }
    }
}

/// Number of levels in the basis.
pub const DIM: usize = 4;
