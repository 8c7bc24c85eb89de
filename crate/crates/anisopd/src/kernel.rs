//! Correspondence kernel: per-particle shape tensor, non-local deformation
//! gradient, plane-stress constitutive update, and the pairwise internal
//! force density assembled from the particle stress states.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rayon::prelude::*;

use crate::grid::BondSet;
use crate::material::RegionTable;

/// Condition-number ceiling beyond which a shape tensor is treated as
/// singular and the particle is excluded from force transmission.
pub const SHAPE_CONDITION_LIMIT: f64 = 1e12;

/// Per-particle tensor state produced by [`update_tensors`].
#[derive(Clone, Debug)]
pub struct ParticleTensors {
    /// Inverse shape tensor (identity placeholder when singular).
    pub b: Matrix2<f64>,
    /// Non-local deformation gradient (identity when singular).
    pub f: Matrix2<f64>,
    /// Small strain in engineering Voigt form (εx, εy, γxy).
    pub strain: Vector3<f64>,
    /// Stress in Voigt form (σx, σy, τxy), Pa.
    pub stress: Vector3<f64>,
    /// Stress contracted with the inverse shape tensor, σ·B; the per-particle
    /// half of every bond force.
    pub w: Matrix2<f64>,
    /// Shape tensor unusable: the particle transmits no force.
    pub singular: bool,
    /// Bond set changed since B was computed.
    pub shape_dirty: bool,
}

impl ParticleTensors {
    fn fresh() -> Self {
        Self {
            b: Matrix2::identity(),
            f: Matrix2::identity(),
            strain: Vector3::zeros(),
            stress: Vector3::zeros(),
            w: Matrix2::zeros(),
            singular: false,
            shape_dirty: true,
        }
    }
}

/// Tensor state for the whole cloud.
#[derive(Clone, Debug)]
pub struct ParticleField(pub Vec<ParticleTensors>);

impl ParticleField {
    pub fn new(particle_count: usize) -> Self {
        Self(vec![ParticleTensors::fresh(); particle_count])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Extremal eigenvalues (min, max) of a symmetric 2×2 matrix.
pub fn symmetric_eigen_bounds(m: &Matrix2<f64>) -> (f64, f64) {
    let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let half_gap = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    let disc = (half_gap * half_gap + m[(0, 1)] * m[(1, 0)]).max(0.0).sqrt();
    (mean - disc, mean + disc)
}

/// Recomputes every particle's deformation state from the current
/// displacements: shape tensor (cached until the bond set changes),
/// deformation gradient, strain, stress, and the force kernel σ·B.
pub fn update_tensors(
    field: &mut ParticleField,
    bonds: &BondSet,
    u: &[Vector2<f64>],
    regions: &[u16],
    table: &RegionTable,
) {
    field.0.par_iter_mut().enumerate().for_each(|(j, t)| {
        if t.shape_dirty {
            let mut m = Matrix2::zeros();
            for s in bonds.row(j) {
                if !bonds.active[s] {
                    continue;
                }
                let xi = bonds.xi[s];
                let wv = bonds.omega[s] * bonds.volume[s];
                m.m11 += wv * xi.x * xi.x;
                m.m12 += wv * xi.x * xi.y;
                m.m22 += wv * xi.y * xi.y;
            }
            m.m21 = m.m12;
            let (lo, hi) = symmetric_eigen_bounds(&m);
            t.singular = !(lo > 0.0 && hi <= lo * SHAPE_CONDITION_LIMIT);
            t.b = if t.singular {
                Matrix2::identity()
            } else {
                let det = m.m11 * m.m22 - m.m12 * m.m21;
                Matrix2::new(m.m22 / det, -m.m12 / det, -m.m21 / det, m.m11 / det)
            };
            t.shape_dirty = false;
        }

        if t.singular {
            t.f = Matrix2::identity();
            t.strain = Vector3::zeros();
            t.stress = Vector3::zeros();
            t.w = Matrix2::zeros();
            return;
        }

        let uj = u[j];
        let mut n_mat: Matrix2<f64> = Matrix2::zeros();
        for s in bonds.row(j) {
            if !bonds.active[s] {
                continue;
            }
            let xi = bonds.xi[s];
            let y = xi + (u[bonds.neighbor[s] as usize] - uj);
            let wv = bonds.omega[s] * bonds.volume[s];
            n_mat.m11 += wv * y.x * xi.x;
            n_mat.m12 += wv * y.x * xi.y;
            n_mat.m21 += wv * y.y * xi.x;
            n_mat.m22 += wv * y.y * xi.y;
        }
        t.f = n_mat * t.b;
        t.strain = Vector3::new(t.f.m11 - 1.0, t.f.m22 - 1.0, t.f.m12 + t.f.m21);
        let c: &Matrix3<f64> = &table.stiffness_global[regions[j] as usize];
        t.stress = c * t.strain;
        let sigma = Matrix2::new(t.stress.x, t.stress.z, t.stress.z, t.stress.y);
        t.w = sigma * t.b;
    });
}

/// Assembles the internal force density L_j = Σ μ ω (W_j + W_n) ξ V_n over
/// each particle's active bonds. Contributions of a pair to its two
/// endpoints are exact negatives, and bonds touching a singular particle are
/// dropped on both ends, so the assembled field conserves linear momentum.
pub fn internal_forces(field: &ParticleField, bonds: &BondSet, out: &mut [Vector2<f64>]) {
    let tensors = &field.0;
    out.par_iter_mut().enumerate().for_each(|(j, l)| {
        let tj = &tensors[j];
        if tj.singular {
            *l = Vector2::zeros();
            return;
        }
        let mut acc = Vector2::zeros();
        for s in bonds.row(j) {
            if !bonds.active[s] {
                continue;
            }
            let tn = &tensors[bonds.neighbor[s] as usize];
            if tn.singular {
                continue;
            }
            let wk = tj.w + tn.w;
            let xi = bonds.xi[s];
            let scale = bonds.omega[s] * bonds.volume[s];
            acc.x += scale * (wk.m11 * xi.x + wk.m12 * xi.y);
            acc.y += scale * (wk.m21 * xi.x + wk.m22 * xi.y);
        }
        *l = acc;
    });
}
