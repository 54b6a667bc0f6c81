//! Small fixed-size complex linear algebra on the four-level Hilbert space.

use nalgebra::{Matrix4, Vector4};
pub use num_complex::Complex64 as C64;

use crate::basis::Level;

/// 4×4 complex operator in the fixed level basis.
pub type Mat4 = Matrix4<C64>;
/// Pure state vector in the fixed level basis.
pub type Vec4 = Vector4<C64>;

/// |i⟩⟨j| scaled by `amp`.
pub fn ketbra(i: Level, j: Level, amp: C64) -> Mat4 {
    let mut m = Mat4::zeros();
    m[(i.index(), j.index())] = amp;
    m
}

/// Largest elementwise deviation from Hermiticity, max |m_ij − conj(m_ji)|.
pub fn hermiticity_error(m: &Mat4) -> f64 {
    let mut err: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

pub fn is_hermitian(m: &Mat4, tol: f64) -> bool {
    hermiticity_error(m) <= tol
}

pub fn trace(m: &Mat4) -> C64 {
    m[(0, 0)] + m[(1, 1)] + m[(2, 2)] + m[(3, 3)]
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &Mat4) -> f64 {
    m.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Squared norm of a state vector.
pub fn norm_sq(psi: &Vec4) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

/// Outer product |ψ⟩⟨ψ|.
pub fn outer(psi: &Vec4) -> Mat4 {
    let mut m = Mat4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = psi[i] * psi[j].conj();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ketbra_places_single_element() {
        let m = ketbra(Level::TBar, Level::HBar, C64::new(2.0, 1.0));
        assert_eq!(m[(3, 1)], C64::new(2.0, 1.0));
        assert_eq!(m.iter().filter(|c| c.norm() > 0.0).count(), 1);
    }

    #[test]
    fn min_eigenvalue_of_projector() {
        let p = ketbra(Level::H, Level::H, C64::new(1.0, 0.0));
        assert_relative_eq!(min_eigenvalue(&p), 0.0, epsilon = 1e-12);
        let m = p - Mat4::identity() * C64::new(0.25, 0.0);
        assert_relative_eq!(min_eigenvalue(&m), -0.25, epsilon = 1e-12);
    }

    #[test]
    fn hermiticity_error_detects_asymmetry() {
        let mut m = Mat4::zeros();
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert_relative_eq!(hermiticity_error(&m), 1.0, epsilon = 1e-15);
        m[(1, 0)] = C64::new(1.0, 0.0);
        assert_relative_eq!(hermiticity_error(&m), 0.0, epsilon = 1e-15);
    }
}
