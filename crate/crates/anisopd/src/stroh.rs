//! Characteristic analysis of the in-plane anisotropic elasticity operator:
//! the quartic characteristic polynomial of the plane-stress stiffness, its
//! complex roots, the eigenvector pairs built from them, and the real
//! displacement-factor matrix H that links near-tip crack opening to the
//! stress intensity pair.

use nalgebra::{Matrix2, Matrix3, Vector2};
use num_complex::Complex64;

use crate::{Error, Result};

/// Roots closer than this are treated as repeated (degenerate material).
const ROOT_SEPARATION: f64 = 1e-8;
/// Relative stiffness nudge applied once when the characteristic roots
/// degenerate, splitting the repeated pair while leaving H essentially
/// unchanged.
const DEGENERACY_NUDGE: f64 = 1e-6;
/// Root-iteration convergence threshold, relative to the root magnitude.
/// Loose enough that a pair split to ~1e-3 by the degeneracy nudge still
/// converges at its round-off plateau; simple roots land at machine
/// precision long before the threshold matters.
const ROOT_TOLERANCE: f64 = 5e-13;
const ROOT_ITERATIONS: usize = 500;

/// Coefficients of the characteristic quartic det[Q + p(R+Rᵀ) + p²T] = 0 in
/// ascending order [p⁰, p¹, p², p³, p⁴], expanded analytically from the
/// plane-stress stiffness (Voigt order 11, 22, 12).
pub fn quartic_coefficients(c: &Matrix3<f64>) -> [f64; 5] {
    let (c11, c12, c13) = (c.m11, c.m12, c.m13);
    let (c22, c23, c33) = (c.m22, c.m23, c.m33);
    let s = c12 + c33;
    [
        c11 * c33 - c13 * c13,
        2.0 * (c11 * c23 + c13 * c33 - c13 * s),
        c11 * c22 + 2.0 * c13 * c23 + c33 * c33 - s * s,
        2.0 * (c13 * c22 + c23 * c33 - s * c23),
        c22 * c33 - c23 * c23,
    ]
}

/// All four roots of a real quartic (ascending coefficients) by the
/// Durand–Kerner simultaneous iteration from deterministic starting points.
/// Errors when the leading coefficient vanishes or the iteration fails to
/// converge (repeated roots converge only to ~√ε and are reported as
/// degenerate).
pub fn polynomial_roots(coeffs: &[f64; 5]) -> Result<[Complex64; 4]> {
    if coeffs[4] == 0.0 || !coeffs.iter().all(|c| c.is_finite()) {
        return Err(Error::Degenerate(
            "characteristic polynomial is not a proper quartic".to_string(),
        ));
    }
    let monic: [Complex64; 4] = [
        Complex64::new(coeffs[0] / coeffs[4], 0.0),
        Complex64::new(coeffs[1] / coeffs[4], 0.0),
        Complex64::new(coeffs[2] / coeffs[4], 0.0),
        Complex64::new(coeffs[3] / coeffs[4], 0.0),
    ];
    let eval = |z: Complex64| (((z + monic[3]) * z + monic[2]) * z + monic[1]) * z + monic[0];

    let seed = Complex64::new(0.4, 0.9);
    let mut z = [seed, seed * seed, seed * seed * seed, seed * seed * seed * seed];
    for _ in 0..ROOT_ITERATIONS {
        let mut worst = 0.0f64;
        for i in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            let delta = eval(z[i]) / denom;
            z[i] -= delta;
            worst = worst.max(delta.norm() / (1.0 + z[i].norm()));
        }
        if worst <= ROOT_TOLERANCE {
            return Ok(z);
        }
    }
    Err(Error::Degenerate(
        "characteristic roots did not converge (repeated roots)".to_string(),
    ))
}

/// Eigen-structure of the plane elasticity operator for one material:
/// the two upper-half-plane characteristic roots, the paired displacement
/// and traction eigenvector matrices (columns normalized to 2aᵀb = 1),
/// and the real displacement-factor matrix H = Re(i·A·B⁻¹).
#[derive(Clone, Debug)]
pub struct StrohData {
    pub p: [Complex64; 2],
    pub a: Matrix2<Complex64>,
    pub b: Matrix2<Complex64>,
    pub h: Matrix2<f64>,
}

impl StrohData {
    /// Closed-form inverse of H (symmetric positive definite for any stable
    /// stiffness).
    pub fn h_inverse(&self) -> Result<Matrix2<f64>> {
        let h = &self.h;
        let det = h.m11 * h.m22 - h.m12 * h.m21;
        if !(det > 0.0) {
            return Err(Error::Degenerate(format!(
                "displacement-factor matrix is not positive definite (det = {det:.3e})"
            )));
        }
        Ok(Matrix2::new(h.m22 / det, -h.m12 / det, -h.m21 / det, h.m11 / det))
    }
}

fn attempt(c: &Matrix3<f64>) -> Result<StrohData> {
    let roots = polynomial_roots(&quartic_coefficients(c))?;
    let mut upper: Vec<Complex64> = roots.iter().copied().filter(|r| r.im > 0.0).collect();
    if upper.len() != 2 {
        return Err(Error::Degenerate(format!(
            "expected two upper-half-plane characteristic roots, found {}",
            upper.len()
        )));
    }
    upper.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    if (upper[0] - upper[1]).norm() < ROOT_SEPARATION {
        return Err(Error::Degenerate(
            "repeated characteristic roots".to_string(),
        ));
    }

    let (c11, c12, c13) = (c.m11, c.m12, c.m13);
    let (c22, c23, c33) = (c.m22, c.m23, c.m33);
    let mut a_mat = Matrix2::<Complex64>::zeros();
    let mut b_mat = Matrix2::<Complex64>::zeros();
    for (k, &p) in upper.iter().enumerate() {
        // D(p) = Q + p(R + Rᵀ) + p²T, symmetric; its null direction is read
        // off the larger row.
        let d11 = c11 + p * (2.0 * c13) + p * p * c33;
        let d12 = c13 + p * (c12 + c33) + p * p * c23;
        let d22 = c33 + p * (2.0 * c23) + p * p * c22;
        let a: Vector2<Complex64> = if d11.norm() >= d22.norm() {
            Vector2::new(d12, -d11)
        } else {
            Vector2::new(d22, -d12)
        };
        // b = (Rᵀ + pT)·a with R = [[C13, C12], [C33, C23]], T = [[C33, C23], [C23, C22]].
        let b = Vector2::new(
            (c13 + p * c33) * a.x + (c33 + p * c23) * a.y,
            (c12 + p * c23) * a.x + (c23 + p * c22) * a.y,
        );
        let dot = 2.0 * (a.x * b.x + a.y * b.y);
        if dot.norm() == 0.0 {
            return Err(Error::Degenerate(
                "characteristic eigenvector pair is isotropic to its traction".to_string(),
            ));
        }
        let f = dot.sqrt().inv();
        a_mat.set_column(k, &(a * f));
        b_mat.set_column(k, &(b * f));
    }

    let det_b = b_mat.m11 * b_mat.m22 - b_mat.m12 * b_mat.m21;
    if det_b.norm() == 0.0 {
        return Err(Error::Degenerate("traction eigenvectors are parallel".to_string()));
    }
    let b_inv = Matrix2::new(
        b_mat.m22 / det_b,
        -b_mat.m12 / det_b,
        -b_mat.m21 / det_b,
        b_mat.m11 / det_b,
    );
    let y = a_mat * b_inv;
    let i = Complex64::new(0.0, 1.0);
    let h = Matrix2::new((i * y.m11).re, (i * y.m12).re, (i * y.m21).re, (i * y.m22).re);
    Ok(StrohData { p: [upper[0], upper[1]], a: a_mat, b: b_mat, h })
}

/// Builds the characteristic data for a global-frame plane-stress stiffness.
/// A degenerate (repeated-root) material is retried once with the 11 entry
/// nudged by a relative `1e-6`, which separates the roots without visibly
/// moving H; a material degenerate even then is reported as an error.
pub fn stroh_matrices(c: &Matrix3<f64>) -> Result<StrohData> {
    match attempt(c) {
        Ok(data) => Ok(data),
        Err(Error::Degenerate(_)) => {
            let mut nudged = *c;
            nudged.m11 *= 1.0 + DEGENERACY_NUDGE;
            attempt(&nudged)
        }
        Err(e) => Err(e),
    }
}
