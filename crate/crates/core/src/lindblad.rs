//! Hamiltonian, collapse operators and the Lindblad generator of the driven
//! four-level system.
//!
//! The Hamiltonian is written in the frame rotating with the drive, with both
//! ground states co-rotating, so only the drive detuning appears on |T̄⟩:
//!
//!   H = Δ |T̄⟩⟨T̄| + (Ω/2) |T̄⟩⟨h̄| + (Ω*/2) |h̄⟩⟨T̄|
//!
//! The generator is the usual GKSL form
//!
//!   dρ/dt = −i[H, ρ] + Σ_k ( L_k ρ L_k† − ½{L_k†L_k, ρ} ).

use serde::{Deserialize, Serialize};

use crate::basis::Level;
use crate::error::Result;
use crate::linalg::{ketbra, Mat4, C64};
use crate::params::{Dephasing, SystemParams};

/// Which physical process a collapse operator represents. `Enhanced` and
/// `Diagonal` jumps emit a detectable photon; the others do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    /// Cavity-enhanced vertical emission |T̄⟩→|h⟩.
    Enhanced,
    /// Residual diagonal emission |T̄⟩→|h̄⟩.
    Diagonal,
    /// Ground-state pure dephasing (Markovian mode only).
    Dephase,
    /// Incoherent ground spin flip, either direction.
    SpinFlip,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Enhanced => "enhanced",
            Channel::Diagonal => "diagonal",
            Channel::Dephase => "dephase",
            Channel::SpinFlip => "spinflip",
        }
    }

    /// True if a jump through this channel produces a photon click.
    pub fn is_emissive(self) -> bool {
        matches!(self, Channel::Enhanced | Channel::Diagonal)
    }
}

/// A collapse operator with its channel tag.
#[derive(Debug, Clone)]
pub struct CollapseOp {
    pub op: Mat4,
    pub channel: Channel,
}

/// Rotating-frame Hamiltonian for drive amplitude `omega` (rad/ns).
pub fn build_hamiltonian(params: &SystemParams, omega: C64) -> Mat4 {
    let mut h = ketbra(Level::TBar, Level::TBar, C64::new(params.delta_drive, 0.0));
    h += ketbra(Level::TBar, Level::HBar, omega * 0.5);
    h += ketbra(Level::HBar, Level::TBar, omega.conj() * 0.5);
    h
}

/// Collapse operators for the active decay and decoherence channels.
///
/// Zero-rate channels are omitted. In quasi-static mode there is no dephasing
/// collapse operator; the noise enters as a per-trajectory Hamiltonian shift.
pub fn build_collapse_ops(params: &SystemParams) -> Vec<CollapseOp> {
    let mut ops = Vec::new();
    if params.gamma_enh > 0.0 {
        ops.push(CollapseOp {
            op: ketbra(Level::H, Level::TBar, C64::new(params.gamma_enh.sqrt(), 0.0)),
            channel: Channel::Enhanced,
        });
    }
    if params.gamma_diag > 0.0 {
        ops.push(CollapseOp {
            op: ketbra(Level::HBar, Level::TBar, C64::new(params.gamma_diag.sqrt(), 0.0)),
            channel: Channel::Diagonal,
        });
    }
    if let Dephasing::Markovian { gamma_deph } = params.dephasing {
        if gamma_deph > 0.0 {
            let a = C64::new((gamma_deph / 2.0).sqrt(), 0.0);
            let op = ketbra(Level::H, Level::H, a) - ketbra(Level::HBar, Level::HBar, a);
            ops.push(CollapseOp { op, channel: Channel::Dephase });
        }
    }
    if params.gamma_sf > 0.0 {
        let a = C64::new(params.gamma_sf.sqrt(), 0.0);
        ops.push(CollapseOp { op: ketbra(Level::HBar, Level::H, a), channel: Channel::SpinFlip });
        ops.push(CollapseOp { op: ketbra(Level::H, Level::HBar, a), channel: Channel::SpinFlip });
    }
    ops
}

/// Right-hand side of the master equation, dρ/dt.
///
/// Applies to any 4×4 matrix, Hermitian or not; the quantum regression step
/// propagates operator-dressed (non-Hermitian) matrices through the same
/// generator.
pub fn lindblad_rhs(rho: &Mat4, h: &Mat4, collapse: &[CollapseOp]) -> Mat4 {
    let i = C64::new(0.0, 1.0);
    let mut d = (h * rho - rho * h) * (-i);
    for c in collapse {
        let l = &c.op;
        let ldag = l.adjoint();
        let ldl = &ldag * l;
        d += l * rho * ldag - (&ldl * rho + rho * &ldl) * 0.5;
    }
    d
}

/// Energy offset of the Raman-scattered photon for a given drive offset.
///
/// The emission tracks the drive through the two-photon resonance, so the
/// mapping is the identity; a ±32.5 μeV drive scan spans a 65 μeV range.
pub fn raman_emission_offset(drive_offset_uev: f64) -> f64 {
    drive_offset_uev
}

/// Sum of L†L over a collapse set.
pub fn collapse_norm_operator(collapse: &[CollapseOp]) -> Mat4 {
    let mut s = Mat4::zeros();
    for c in collapse {
        s += c.op.adjoint() * c.op;
    }
    s
}

/// Instantaneous flux (1/ns) through one channel: Tr(L†L ρ).
pub fn channel_flux(op: &CollapseOp, rho: &Mat4) -> f64 {
    let ldl = op.op.adjoint() * op.op;
    let mut f = C64::new(0.0, 0.0);
    for i in 0..4 {
        for k in 0..4 {
            f += ldl[(i, k)] * rho[(k, i)];
        }
    }
    f.re
}

/// Check that `h` is Hermitian to the operator tolerance (1e-12).
pub fn assert_hamiltonian(h: &Mat4) -> Result<()> {
    let err = crate::linalg::hermiticity_error(h);
    if err > 1e-12 {
        return Err(crate::error::QdError::InvalidInput(format!(
            "Hamiltonian not Hermitian: error {err:.3e}"
        )));
    }
    Ok(())
}
