//! Density matrix of the four-level system with invariant monitoring.

use crate::basis::Level;
use crate::error::{QdError, Result};
use crate::linalg::{hermiticity_error, min_eigenvalue, norm_sq, outer, trace, Mat4, Vec4, C64};

/// Tolerance on ‖ρ − ρ†‖∞.
pub const HERMITICITY_TOL: f64 = 1e-9;
/// Tolerance on |Tr ρ − 1|.
pub const TRACE_TOL: f64 = 1e-9;
/// Eigenvalue floor: positivity is monitored, not enforced.
pub const EIGENVALUE_FLOOR: f64 = -1e-9;

/// 4×4 Hermitian, unit-trace, positive-semidefinite (to tolerance) state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Mat4);

impl DensityMatrix {
    /// Wrap a matrix, checking the state invariants.
    pub fn from_matrix(m: Mat4) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.validate()?;
        Ok(rho)
    }

    /// Pure basis state |l⟩⟨l|.
    pub fn pure_level(l: Level) -> Self {
        let mut psi = Vec4::zeros();
        psi[l.index()] = C64::new(1.0, 0.0);
        DensityMatrix(outer(&psi))
    }

    /// Pure state |ψ⟩⟨ψ| from a (renormalised) state vector.
    pub fn from_pure(psi: &Vec4) -> Result<Self> {
        let n = norm_sq(psi);
        if n <= 0.0 {
            return Err(QdError::InvalidInput("zero state vector".into()));
        }
        let scaled = psi / C64::new(n.sqrt(), 0.0);
        Ok(DensityMatrix(outer(&scaled)))
    }

    /// Maximally mixed ground state (|h⟩⟨h| + |h̄⟩⟨h̄|)/2.
    pub fn mixed_ground() -> Self {
        let mut m = Mat4::zeros();
        m[(Level::H.index(), Level::H.index())] = C64::new(0.5, 0.0);
        m[(Level::HBar.index(), Level::HBar.index())] = C64::new(0.5, 0.0);
        DensityMatrix(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn population(&self, l: Level) -> f64 {
        self.0[(l.index(), l.index())].re
    }

    /// All four level populations in basis order.
    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|i| self.0[(i, i)].re)
    }

    /// Ground coherence ⟨h|ρ|h̄⟩.
    pub fn ground_coherence(&self) -> C64 {
        self.0[(Level::H.index(), Level::HBar.index())]
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_error(&self.0);
        if herm > HERMITICITY_TOL {
            return Err(QdError::InvalidInput(format!(
                "density matrix not Hermitian: error {herm:.3e}"
            )));
        }
        let tr = trace(&self.0);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QdError::InvalidInput(format!(
                "density matrix trace {tr} differs from 1"
            )));
        }
        let lo = min_eigenvalue(&self.0);
        if lo < EIGENVALUE_FLOOR {
            return Err(QdError::InvalidInput(format!(
                "density matrix not positive: min eigenvalue {lo:.3e}"
            )));
        }
        Ok(())
    }

    /// True if ρ has no off-diagonal weight above `tol`.
    pub fn is_diagonal(&self, tol: f64) -> bool {
        let mut off: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    off = off.max(self.0[(i, j)].norm());
                }
            }
        }
        off <= tol
    }

    /// If ρ is pure to tolerance (‖ρ² − ρ‖∞ small), return the state vector.
    pub fn as_pure(&self, tol: f64) -> Option<Vec4> {
        let sq = self.0 * self.0;
        let mut dev: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                dev = dev.max((sq[(i, j)] - self.0[(i, j)]).norm());
            }
        }
        if dev > tol {
            return None;
        }
        let eig = self.0.symmetric_eigen();
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())?;
        Some(eig.eigenvectors.column(k).into_owned())
    }
}
