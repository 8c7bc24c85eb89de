//! Plane-stress orthotropic/anisotropic material description: stiffness
//! assembly, in-plane rotation, frame changes for stress, and the
//! dilatational wave speed that sets the stable time step.

use nalgebra::{Matrix3, Vector3};

use crate::{Error, Result};

/// Tensile strength set entering the failure surface (Pa): longitudinal
/// (fibre), transverse (matrix), and in-plane shear.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Strengths {
    pub sigma_lu: f64,
    pub sigma_tu: f64,
    pub tau_ltu: f64,
}

/// One material region of the plate: the plane-stress stiffness in its own
/// fibre frame, the fibre angle against the global x axis, the mass density,
/// and (when failure is modelled) the strength set.
#[derive(Clone, Debug, PartialEq)]
pub struct MaterialRecord {
    /// Plane-stress stiffness in the fibre frame (Voigt, Pa).
    pub stiffness_local: Matrix3<f64>,
    /// Fibre angle, counterclockwise from global x (rad).
    pub theta: f64,
    /// Mass density (kg/m^3).
    pub rho: f64,
    /// Strengths, required only when bond failure is enabled.
    pub strengths: Option<Strengths>,
}

impl MaterialRecord {
    /// Builds the record from engineering constants.
    pub fn from_engineering(
        e1: f64,
        e2: f64,
        g12: f64,
        nu12: f64,
        theta: f64,
        rho: f64,
        strengths: Option<Strengths>,
    ) -> Result<Self> {
        let stiffness_local = plane_stress_stiffness(e1, e2, g12, nu12)?;
        Self::from_stiffness(stiffness_local, theta, rho, strengths)
    }

    /// Builds the record from a directly supplied fibre-frame stiffness.
    pub fn from_stiffness(
        stiffness_local: Matrix3<f64>,
        theta: f64,
        rho: f64,
        strengths: Option<Strengths>,
    ) -> Result<Self> {
        if rho <= 0.0 || !rho.is_finite() {
            return Err(Error::Material(format!("density must be positive, got {rho}")));
        }
        check_positive_definite(&stiffness_local)?;
        if let Some(s) = &strengths {
            if s.sigma_lu <= 0.0 || s.sigma_tu <= 0.0 || s.tau_ltu <= 0.0 {
                return Err(Error::Material(
                    "strengths must all be positive".to_string(),
                ));
            }
        }
        Ok(Self { stiffness_local, theta, rho, strengths })
    }

    /// Stiffness expressed in the global frame.
    pub fn stiffness_global(&self) -> Matrix3<f64> {
        rotate_stiffness(&self.stiffness_local, self.theta)
    }

    /// Dilatational wave speed sqrt(C22/rho) from the global-frame stiffness.
    pub fn sonic_speed(&self) -> f64 {
        (self.stiffness_global()[(1, 1)] / self.rho).sqrt()
    }
}

/// Plane-stress stiffness from engineering constants, in the fibre frame.
///
/// Uses the closed-form inverse of the compliance: with
/// d = 1 − ν12²·E2/E1, C11 = E1/d, C12 = ν12·E2/d, C22 = E2/d, C33 = G12.
pub fn plane_stress_stiffness(e1: f64, e2: f64, g12: f64, nu12: f64) -> Result<Matrix3<f64>> {
    for (name, v) in [("e1", e1), ("e2", e2), ("g12", g12)] {
        if v <= 0.0 || !v.is_finite() {
            return Err(Error::Material(format!("{name} must be positive, got {v}")));
        }
    }
    let d = 1.0 - nu12 * nu12 * (e2 / e1);
    if d <= 0.0 || !d.is_finite() {
        return Err(Error::Material(format!(
            "nu12 = {nu12} outside the physical range for e1/e2 = {}",
            e1 / e2
        )));
    }
    let c11 = e1 / d;
    let c12 = nu12 * e2 / d;
    let c22 = e2 / d;
    Ok(Matrix3::new(c11, c12, 0.0, c12, c22, 0.0, 0.0, 0.0, g12))
}

/// Voigt rotation matrix for stress, angle counterclockwise:
/// [[c², s², 2cs], [s², c², −2cs], [−cs, cs, c²−s²]].
pub fn stress_rotation_matrix(theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(
        c * c,
        s * s,
        2.0 * c * s,
        s * s,
        c * c,
        -2.0 * c * s,
        -c * s,
        c * s,
        c * c - s * s,
    )
}

/// Rotates a fibre-frame stiffness into the global frame for a fibre angle
/// `theta`. Since M(θ) maps global stress to the fibre frame (and the
/// engineering strain transforms by M(−θ)ᵀ), the stiffness pushes forward
/// as C_global = M(−θ)·C_local·M(−θ)ᵀ.
pub fn rotate_stiffness(c: &Matrix3<f64>, theta: f64) -> Matrix3<f64> {
    let m = stress_rotation_matrix(-theta);
    m * c * m.transpose()
}

/// Expresses a global-frame Voigt stress in the fibre frame of a material
/// whose fibres sit at `theta`: σ_local = M(θ)·σ_global, with row 1 the
/// quadratic form along the fibre axis (cos θ, sin θ).
pub fn to_material_frame(sigma_global: &Vector3<f64>, theta: f64) -> Vector3<f64> {
    stress_rotation_matrix(theta) * sigma_global
}

fn check_positive_definite(c: &Matrix3<f64>) -> Result<()> {
    let m11 = c[(0, 0)];
    let m2 = c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)];
    let m3 = c.determinant();
    if !(m11 > 0.0 && m2 > 0.0 && m3 > 0.0) || !m3.is_finite() {
        return Err(Error::Material(
            "stiffness matrix is not positive definite".to_string(),
        ));
    }
    Ok(())
}

/// Per-region data precomputed once per run and shared by the hot loops:
/// global-frame stiffness, fibre-frame projection of stress, strengths,
/// and density, indexed by region id.
#[derive(Clone, Debug)]
pub struct RegionTable {
    pub stiffness_global: Vec<Matrix3<f64>>,
    /// σ_local = to_local[r] · σ_global for region r.
    pub to_local: Vec<Matrix3<f64>>,
    pub strengths: Vec<Option<Strengths>>,
    pub rho: Vec<f64>,
    /// weaker[a·n + b] = the region whose strengths govern an interface bond
    /// between regions a and b.
    weaker: Vec<u16>,
    region_count: usize,
}

impl RegionTable {
    pub fn new(materials: &[MaterialRecord]) -> Self {
        let n = materials.len();
        let stiffness_global: Vec<_> = materials.iter().map(|m| m.stiffness_global()).collect();
        let to_local: Vec<_> = materials
            .iter()
            .map(|m| stress_rotation_matrix(m.theta))
            .collect();
        let strengths: Vec<_> = materials.iter().map(|m| m.strengths).collect();
        let rho: Vec<_> = materials.iter().map(|m| m.rho).collect();
        let mut weaker = vec![0u16; n * n];
        for a in 0..n {
            for b in 0..n {
                weaker[a * n + b] = weaker_region(a as u16, b as u16, materials);
            }
        }
        Self { stiffness_global, to_local, strengths, rho, weaker, region_count: n }
    }

    /// Region whose strengths (and fibre frame) govern a bond joining
    /// regions `a` and `b`.
    pub fn weaker(&self, a: u16, b: u16) -> u16 {
        self.weaker[a as usize * self.region_count + b as usize]
    }
}

/// The weaker of two regions for interface-bond failure: smaller longitudinal
/// strength; ties broken by transverse strength, then shear strength, then
/// the lower region id. Regions without strengths never govern unless both
/// lack them.
pub fn weaker_region(a: u16, b: u16, materials: &[MaterialRecord]) -> u16 {
    if a == b {
        return a;
    }
    let (sa, sb) = (&materials[a as usize].strengths, &materials[b as usize].strengths);
    match (sa, sb) {
        (None, None) => a.min(b),
        (Some(_), None) => a,
        (None, Some(_)) => b,
        (Some(x), Some(y)) => {
            let key = |s: &Strengths| (s.sigma_lu, s.sigma_tu, s.tau_ltu);
            let (ka, kb) = (key(x), key(y));
            if ka < kb || (ka == kb && a < b) {
                a
            } else {
                b
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn graphite_epoxy() -> Matrix3<f64> {
        plane_stress_stiffness(144.8e9, 11.7e9, 9.66e9, 0.21).unwrap()
    }

    fn hta_laminate() -> Matrix3<f64> {
        plane_stress_stiffness(136.0e9, 8.75e9, 5.5e9, 0.3).unwrap()
    }

    #[test]
    fn unit_moduli_give_diagonal_stiffness() {
        let c = plane_stress_stiffness(1.0, 1.0, 0.5, 0.0).unwrap();
        assert_eq!(c, Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.5));
    }

    #[test]
    fn graphite_epoxy_stiffness_matches_reference() {
        let c = graphite_epoxy();
        assert_eq!(c[(0, 0)], 1.45317815145584717e11);
        assert_eq!(c[(0, 1)], 2.46578640754628229e9);
        assert_eq!(c[(1, 1)], 1.17418400359346771e10);
        assert_eq!(c[(2, 2)], 9.66e9);
        assert_eq!(c[(0, 2)], 0.0);
        assert_eq!(c[(1, 0)], c[(0, 1)]);
    }

    #[test]
    fn hta_laminate_stiffness_matches_reference() {
        let c = hta_laminate();
        assert_eq!(c[(0, 0)], 1.36792086530461304e11);
        assert_eq!(c[(0, 1)], 2.64028843487103605e9);
        assert_eq!(c[(1, 1)], 8.80096144957011986e9);
        assert_eq!(c[(2, 2)], 5.5e9);
    }

    #[test]
    fn invalid_moduli_are_rejected() {
        assert!(plane_stress_stiffness(-1.0, 1.0, 1.0, 0.1).is_err());
        assert!(plane_stress_stiffness(1.0, 1.0, 0.0, 0.1).is_err());
        // nu12^2 * E2/E1 >= 1 is unphysical.
        assert!(plane_stress_stiffness(1.0, 4.0, 1.0, 0.8).is_err());
        assert!(plane_stress_stiffness(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn indefinite_direct_stiffness_is_rejected() {
        let c = Matrix3::new(1.0, 2.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(MaterialRecord::from_stiffness(c, 0.0, 1.0, None).is_err());
    }

    #[test]
    fn stress_rotation_matrix_at_quarter_pi() {
        let m = stress_rotation_matrix(std::f64::consts::FRAC_PI_4);
        let expected =
            Matrix3::new(0.5, 0.5, 1.0, 0.5, 0.5, -1.0, -0.5, 0.5, 0.0);
        assert_relative_eq!(m, expected, epsilon = 1e-15);
    }

    #[test]
    fn rotation_by_zero_is_identity() {
        let c = graphite_epoxy();
        assert_eq!(rotate_stiffness(&c, 0.0), c);
    }

    #[test]
    fn rotation_by_half_pi_swaps_axes() {
        let c = graphite_epoxy();
        let r = rotate_stiffness(&c, std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(r[(0, 0)], c[(1, 1)], max_relative = 1e-12);
        assert_relative_eq!(r[(1, 1)], c[(0, 0)], max_relative = 1e-12);
        assert_relative_eq!(r[(0, 1)], c[(0, 1)], max_relative = 1e-12);
        assert!(r[(0, 2)].abs() < 1e-4 * c[(0, 0)].abs().sqrt());
    }

    #[test]
    fn rotated_graphite_epoxy_matches_reference() {
        let r = rotate_stiffness(&graphite_epoxy(), std::f64::consts::FRAC_PI_6);
        let expected = Matrix3::new(
            9.06448059244671936e10,
            2.37448018512513084e10,
            4.12054922395720062e10,
            2.37448018512513084e10,
            2.38568183696421547e10,
            1.66346016505453892e10,
            4.12054922395720062e10,
            1.66346016505453892e10,
            3.09390154437050247e10,
        );
        assert_relative_eq!(r, expected, max_relative = 1e-13);
    }

    #[test]
    fn rotation_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let e1 = rng.gen_range(5.0e9..250.0e9);
            let e2 = rng.gen_range(2.0e9..e1);
            let g = rng.gen_range(1.0e9..20.0e9);
            let nu = rng.gen_range(0.05..0.35);
            let theta = rng.gen_range(-3.2..3.2);
            let c = plane_stress_stiffness(e1, e2, g, nu).unwrap();
            let back = rotate_stiffness(&rotate_stiffness(&c, theta), -theta);
            // The epsilon term covers the structurally zero shear-coupling
            // entries, where cancellation leaves ~1e-6 absolute residue
            // against ~1e11 diagonal entries.
            assert_relative_eq!(back, c, max_relative = 1e-12, epsilon = 1e-3);
        }
    }

    /// Rotation preserves the eigenvalues of the stiffness when both matrices
    /// are expressed in the orthonormal (Mandel) representation, where the
    /// rotation acts by orthogonal conjugation. The engineering-Voigt form
    /// does not have this property.
    #[test]
    fn rotation_preserves_mandel_eigenvalues() {
        fn mandel(c: &Matrix3<f64>) -> Matrix3<f64> {
            let r = std::f64::consts::SQRT_2;
            Matrix3::new(
                c[(0, 0)],
                c[(0, 1)],
                r * c[(0, 2)],
                c[(1, 0)],
                c[(1, 1)],
                r * c[(1, 2)],
                r * c[(2, 0)],
                r * c[(2, 1)],
                2.0 * c[(2, 2)],
            )
        }
        let c = graphite_epoxy();
        let mut before: Vec<f64> =
            mandel(&c).symmetric_eigen().eigenvalues.iter().copied().collect();
        let rotated = rotate_stiffness(&c, 0.7);
        let mut after: Vec<f64> = mandel(&rotated)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        for (b, a) in before.iter().zip(&after) {
            assert_relative_eq!(b, a, max_relative = 1e-12);
        }
    }

    #[test]
    fn fibre_aligned_tension_maps_to_longitudinal_stress() {
        // Global uniaxial stress along fibres at +theta must appear as a pure
        // longitudinal stress in the fibre frame.
        let theta = 0.6f64;
        let (s, c) = theta.sin_cos();
        // Tensor components of a uniaxial stress of magnitude 5e6 along
        // direction (c, s), in Voigt order (xx, yy, xy).
        let sigma_global = Vector3::new(5e6 * c * c, 5e6 * s * s, 5e6 * c * s);
        let local = to_material_frame(&sigma_global, theta);
        assert_relative_eq!(local[0], 5e6, max_relative = 1e-12);
        assert!(local[1].abs() < 1e-6);
        assert!(local[2].abs() < 1e-6);
    }

    #[test]
    fn frame_change_is_consistent_with_stiffness_rotation() {
        // sigma_global = C_global eps_global must map to the fibre frame as
        // C_local applied to the rotated strain; spot-check via round trip.
        let theta = -0.9;
        let c_local = hta_laminate();
        let c_global = rotate_stiffness(&c_local, theta);
        let eps = Vector3::new(1e-3, -4e-4, 2.5e-4);
        let sigma_global = c_global * eps;
        let sigma_local = to_material_frame(&sigma_global, theta);
        let back = stress_rotation_matrix(-theta) * sigma_local;
        assert_relative_eq!(back, sigma_global, max_relative = 1e-12);
    }

    #[test]
    fn rotated_stress_golden_value() {
        let c30 = rotate_stiffness(&graphite_epoxy(), std::f64::consts::FRAC_PI_6);
        let sigma = c30 * Vector3::new(1e-3, 0.0, 0.0);
        assert_relative_eq!(sigma[0], 9.06448059244671911e7, max_relative = 1e-13);
        assert_relative_eq!(sigma[1], 2.37448018512513079e7, max_relative = 1e-13);
        assert_relative_eq!(sigma[2], 4.12054922395720035e7, max_relative = 1e-13);
    }

    #[test]
    fn sonic_speed_goldens() {
        let edge = MaterialRecord::from_engineering(
            144.8e9, 11.7e9, 9.66e9, 0.21, 0.0, 2710.0, None,
        )
        .unwrap();
        assert_relative_eq!(edge.sonic_speed(), 2.08153364159287776e3, max_relative = 1e-13);
        let edge30 = MaterialRecord { theta: std::f64::consts::FRAC_PI_6, ..edge };
        assert_relative_eq!(edge30.sonic_speed(), 2.96702780757748633e3, max_relative = 1e-13);
        let centred = MaterialRecord::from_engineering(
            136.0e9,
            8.75e9,
            5.5e9,
            0.3,
            std::f64::consts::FRAC_PI_4,
            1586.0,
            None,
        )
        .unwrap();
        assert_relative_eq!(centred.sonic_speed(), 5.22014759037988370e3, max_relative = 1e-13);
    }

    #[test]
    fn weaker_region_prefers_smaller_longitudinal_strength() {
        let strong = Strengths { sigma_lu: 2100e6, sigma_tu: 120e6, tau_ltu: 135e6 };
        let weak = Strengths { sigma_lu: 1670e6, sigma_tu: 60e6, tau_ltu: 70e6 };
        let mk = |s: Strengths| {
            MaterialRecord::from_engineering(136e9, 8.75e9, 5.5e9, 0.3, 0.0, 1586.0, Some(s))
                .unwrap()
        };
        let mats = vec![mk(weak), mk(strong)];
        assert_eq!(weaker_region(0, 1, &mats), 0);
        assert_eq!(weaker_region(1, 0, &mats), 0);
        assert_eq!(weaker_region(1, 1, &mats), 1);
        let table = RegionTable::new(&mats);
        assert_eq!(table.weaker(0, 1), 0);
        assert_eq!(table.weaker(1, 0), 0);
        // Ties fall back to the lower region id.
        let mats_tie = vec![mk(weak), mk(weak)];
        assert_eq!(weaker_region(1, 0, &mats_tie), 0);
    }
}
