//! Covariance-matrix conventions and symplectic helpers.
//!
//! A Gaussian state of n modes is a real symmetric 2n x 2n covariance matrix
//! of quadrature fluctuations with vacuum variance 1/2. Physicality is the
//! uncertainty bound: every symplectic eigenvalue (modulus of the eigenvalues
//! of i Omega V) is at least 1/2.

use nalgebra::{Matrix4, Matrix6};

/// 6x6 real symmetric covariance matrix ordered (dx, dy, dq, dp, dQ, dP).
pub type CovMatrix = Matrix6<f64>;

/// Tolerance on the physicality bound: min symplectic eigenvalue >= 1/2 - tol.
pub const PHYSICALITY_TOL: f64 = 1e-6;

/// Three-mode symplectic form, the direct sum of three (0, 1; -1, 0) blocks.
pub fn symplectic_form6() -> Matrix6<f64> {
    let mut o = Matrix6::zeros();
    for m in 0..3 {
        o[(2 * m, 2 * m + 1)] = 1.0;
        o[(2 * m + 1, 2 * m)] = -1.0;
    }
    o
}

/// Two-mode symplectic form.
pub fn symplectic_form4() -> Matrix4<f64> {
    let mut o = Matrix4::zeros();
    for m in 0..2 {
        o[(2 * m, 2 * m + 1)] = 1.0;
        o[(2 * m + 1, 2 * m)] = -1.0;
    }
    o
}

/// Replace M by its symmetric part (numerical hygiene after each RK4 step).
pub fn symmetrize(m: &mut CovMatrix) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Minimum symplectic eigenvalue of a 6x6 covariance matrix.
///
/// The eigenvalues of Omega V come in +/- i nu pairs; the moduli are the
/// symplectic eigenvalues, identical to |eig(i Omega V)|.
pub fn min_symplectic_eigenvalue(v: &CovMatrix) -> f64 {
    (symplectic_form6() * v)
        .complex_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |m, ev| m.min(ev.norm()))
}

/// Physicality check with the standard tolerance.
pub fn is_physical(v: &CovMatrix) -> bool {
    min_symplectic_eigenvalue(v) >= 0.5 - PHYSICALITY_TOL
}

/// Largest entrywise difference normalized by the largest entry of `b`
/// (the max-norm relative difference). Measuring every entry against the
/// matrix scale keeps structural zeros polluted by rounding from blowing
/// up a comparison that is physically tight.
pub fn max_relative_diff(a: &CovMatrix, b: &CovMatrix) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    (a - b).iter().fold(0.0f64, |m, v| m.max(v.abs())) / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symplectic_form_squares_to_minus_identity() {
        let o6 = symplectic_form6();
        assert_eq!(o6 * o6, -Matrix6::identity());
        let o4 = symplectic_form4();
        assert_eq!(o4 * o4, -Matrix4::identity());
    }

    #[test]
    fn vacuum_is_exactly_on_the_physicality_boundary() {
        let v = CovMatrix::identity() * 0.5;
        assert_relative_eq!(min_symplectic_eigenvalue(&v), 0.5, max_relative = 1e-12);
        assert!(is_physical(&v));
    }

    #[test]
    fn thermal_mixture_has_margin_and_scaled_vacuum_below_half_is_unphysical() {
        let mut v = CovMatrix::identity() * 0.5;
        v[(2, 2)] = 1.5;
        v[(3, 3)] = 1.5;
        assert_relative_eq!(min_symplectic_eigenvalue(&v), 0.5, max_relative = 1e-12);

        let below = CovMatrix::identity() * 0.4;
        assert!(!is_physical(&below));
    }

    #[test]
    fn symmetrize_removes_antisymmetric_part() {
        let mut m = CovMatrix::identity();
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 3.0;
        symmetrize(&mut m);
        assert_eq!(m[(0, 1)], 2.0);
        assert_eq!(m[(1, 0)], 2.0);
    }

    #[test]
    fn relative_diff_uses_matrix_scale_for_structural_zeros() {
        let a = CovMatrix::identity();
        let mut b = CovMatrix::identity();
        b[(0, 5)] = 1e-18; // structural zero polluted by rounding
        assert!(max_relative_diff(&a, &b) < 1e-15);
        let mut c = CovMatrix::identity();
        c[(0, 0)] = 1.0 + 1e-6;
        assert_relative_eq!(max_relative_diff(&c, &a), 1e-6, max_relative = 1e-6);
    }
}
