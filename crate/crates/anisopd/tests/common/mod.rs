//! Dense reference implementation used to cross-check the production kernel.
//!
//! Everything here is written from the mathematical definitions with the
//! most literal algorithms available — brute-force O(N²) neighbourhoods,
//! four-index tensor rotation loops, cofactor matrix inverses — sharing no
//! code with the optimized path beyond the nalgebra containers. The one
//! deliberate exception: each accumulated bond term uses the same scalar
//! expression shape as the optimized kernel, so the moment sums agree to the
//! last bit and the comparison stays meaningful even where the shape tensor
//! is allowed to be ill-conditioned (anything short of bitwise-equal moments
//! would be amplified by up to the 1e12 condition ceiling when inverted).

#![allow(dead_code)] // each integration-test binary uses a different subset

use anisopd::geometry::Rect;
use anisopd::grid::GridGeometry;
use anisopd::material::MaterialRecord;
use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashSet;

/// Relative slack on δ² used by the bond predicate, restated independently.
const RADIUS_SLACK: f64 = 1e-9;
/// Condition-number ceiling of the shape tensor, restated independently.
const CONDITION_LIMIT: f64 = 1e12;

/// Raw material description the reference path rotates on its own.
#[derive(Clone, Copy, Debug)]
pub enum DenseMaterial {
    Engineering { e1: f64, e2: f64, g12: f64, nu12: f64, theta: f64, rho: f64 },
    Direct { c: Matrix3<f64>, theta: f64, rho: f64 },
}

impl DenseMaterial {
    pub fn rho(&self) -> f64 {
        match self {
            DenseMaterial::Engineering { rho, .. } => *rho,
            DenseMaterial::Direct { rho, .. } => *rho,
        }
    }

    /// Global-frame stiffness built by compliance inversion (cofactors) and
    /// four-index tensor rotation.
    pub fn stiffness_global(&self) -> Matrix3<f64> {
        match self {
            DenseMaterial::Engineering { e1, e2, g12, nu12, theta, .. } => {
                let s = Matrix3::new(
                    1.0 / e1,
                    -nu12 / e1,
                    0.0,
                    -nu12 / e1,
                    1.0 / e2,
                    0.0,
                    0.0,
                    0.0,
                    1.0 / g12,
                );
                dense_rotate(&invert3(&s), *theta)
            }
            DenseMaterial::Direct { c, theta, .. } => dense_rotate(c, *theta),
        }
    }
}

/// 3×3 inverse by the adjugate/cofactor formula.
pub fn invert3(m: &Matrix3<f64>) -> Matrix3<f64> {
    let c = |r: usize, q: usize| -> f64 {
        let (r1, r2) = match r {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let (q1, q2) = match q {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let minor = m[(r1, q1)] * m[(r2, q2)] - m[(r1, q2)] * m[(r2, q1)];
        if (r + q) % 2 == 0 {
            minor
        } else {
            -minor
        }
    };
    let det = m[(0, 0)] * c(0, 0) + m[(0, 1)] * c(0, 1) + m[(0, 2)] * c(0, 2);
    let mut out = Matrix3::zeros();
    for r in 0..3 {
        for q in 0..3 {
            out[(r, q)] = c(q, r) / det; // adjugate transposes the cofactors
        }
    }
    out
}

/// Rotates a plane-stress stiffness by unpacking the engineering-Voigt
/// matrix to the full c_ijkl tensor, transforming it index by index with the
/// basis rotation R(θ) (fibre axis at +θ from global x), and repacking.
pub fn dense_rotate(c_voigt: &Matrix3<f64>, theta: f64) -> Matrix3<f64> {
    // Voigt pair ↔ tensor index pairs, engineering shear convention:
    // σ_I = C_IJ ε_J with ε_3 = γ_12 = 2ε_12 means C_IJ = c_(I)(J) directly.
    let pair = [(0usize, 0usize), (1, 1), (0, 1)];
    let mut c = [[[[0.0f64; 2]; 2]; 2]; 2];
    for (bi, &(i, j)) in pair.iter().enumerate() {
        for (bj, &(k, l)) in pair.iter().enumerate() {
            let v = c_voigt[(bi, bj)];
            // minor symmetries: ij↔ji and kl↔lk
            c[i][j][k][l] = v;
            c[j][i][k][l] = v;
            c[i][j][l][k] = v;
            c[j][i][l][k] = v;
        }
    }
    let (s, co) = theta.sin_cos();
    // Columns of r are the material axes expressed in global coordinates.
    let r = [[co, -s], [s, co]];
    let mut out = [[[[0.0f64; 2]; 2]; 2]; 2];
    for p in 0..2 {
        for q in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    let mut acc = 0.0;
                    for i in 0..2 {
                        for j in 0..2 {
                            for k in 0..2 {
                                for l in 0..2 {
                                    acc += r[p][i] * r[q][j] * r[m][k] * r[n][l] * c[i][j][k][l];
                                }
                            }
                        }
                    }
                    out[p][q][m][n] = acc;
                }
            }
        }
    }
    let mut v = Matrix3::zeros();
    for (bi, &(i, j)) in pair.iter().enumerate() {
        for (bj, &(k, l)) in pair.iter().enumerate() {
            v[(bi, bj)] = out[i][j][k][l];
        }
    }
    v
}

/// Reference per-particle results of one dense evaluation.
pub struct DenseState {
    pub shape: Vec<Matrix2<f64>>,
    pub b: Vec<Matrix2<f64>>,
    pub f: Vec<Matrix2<f64>>,
    pub strain: Vec<Vector3<f64>>,
    pub stress: Vec<Vector3<f64>>,
    pub w: Vec<Matrix2<f64>>,
    pub singular: Vec<bool>,
    pub force: Vec<Vector2<f64>>,
    pub accel: Vec<Vector2<f64>>,
    /// Σ |term| accumulated while assembling each force — the natural scale
    /// against which that force's rounding error is judged.
    pub force_scale: Vec<f64>,
}

/// Unordered pair key for the broken-bond set.
pub fn pair_key(a: usize, b: usize) -> (u32, u32) {
    ((a.min(b)) as u32, (a.max(b)) as u32)
}

/// Evaluates shape tensors, deformation gradients, constitutive states,
/// force densities, and accelerations with quadratic brute force.
pub fn dense_evaluate(
    positions: &[Vector2<f64>],
    volumes: &[f64],
    regions: &[u16],
    materials: &[DenseMaterial],
    delta: f64,
    broken: &HashSet<(u32, u32)>,
    u: &[Vector2<f64>],
    body_force: &[Vector2<f64>],
) -> DenseState {
    let n = positions.len();
    let stiffness: Vec<Matrix3<f64>> =
        materials.iter().map(|m| m.stiffness_global()).collect();
    let limit = delta * delta * (1.0 + RADIUS_SLACK);
    let bonded = |j: usize, k: usize| -> bool {
        if j == k || broken.contains(&pair_key(j, k)) {
            return false;
        }
        let d = positions[k] - positions[j];
        let d2 = d.x * d.x + d.y * d.y;
        d2 > 0.0 && d2 <= limit
    };
    let weight = |j: usize, k: usize| -> f64 {
        let d = positions[k] - positions[j];
        (1.0 - (d.x * d.x + d.y * d.y).sqrt() / delta).max(0.0)
    };

    let mut st = DenseState {
        shape: vec![Matrix2::zeros(); n],
        b: vec![Matrix2::identity(); n],
        f: vec![Matrix2::identity(); n],
        strain: vec![Vector3::zeros(); n],
        stress: vec![Vector3::zeros(); n],
        w: vec![Matrix2::zeros(); n],
        singular: vec![false; n],
        force: vec![Vector2::zeros(); n],
        accel: vec![Vector2::zeros(); n],
        force_scale: vec![0.0; n],
    };

    for j in 0..n {
        let (mut m11, mut m12, mut m22) = (0.0f64, 0.0f64, 0.0f64);
        let (mut n11, mut n12, mut n21, mut n22) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for k in 0..n {
            if !bonded(j, k) {
                continue;
            }
            let xi = positions[k] - positions[j];
            let y = xi + (u[k] - u[j]);
            let wv = weight(j, k) * volumes[k];
            m11 += wv * xi.x * xi.x;
            m12 += wv * xi.x * xi.y;
            m22 += wv * xi.y * xi.y;
            n11 += wv * y.x * xi.x;
            n12 += wv * y.x * xi.y;
            n21 += wv * y.y * xi.x;
            n22 += wv * y.y * xi.y;
        }
        let m = Matrix2::new(m11, m12, m12, m22);
        st.shape[j] = m;
        // Eigenvalues of the symmetric 2×2: mean ± sqrt(gap² + offdiag²).
        let mean = 0.5 * (m.m11 + m.m22);
        let half_gap = 0.5 * (m.m11 - m.m22);
        let disc = (half_gap * half_gap + m.m12 * m.m21).max(0.0).sqrt();
        let (lo, hi) = (mean - disc, mean + disc);
        if !(lo > 0.0 && hi <= lo * CONDITION_LIMIT) {
            st.singular[j] = true;
            continue; // b stays identity, states stay zero
        }
        let det = m.m11 * m.m22 - m.m12 * m.m21;
        let b = Matrix2::new(m.m22 / det, -m.m12 / det, -m.m21 / det, m.m11 / det);
        let f = Matrix2::new(n11, n12, n21, n22) * b;
        let strain = Vector3::new(f.m11 - 1.0, f.m22 - 1.0, f.m12 + f.m21);
        let stress = stiffness[regions[j] as usize] * strain;
        let sigma = Matrix2::new(stress.x, stress.z, stress.z, stress.y);
        st.b[j] = b;
        st.f[j] = f;
        st.strain[j] = strain;
        st.stress[j] = stress;
        st.w[j] = sigma * b;
    }

    for j in 0..n {
        if st.singular[j] {
            continue;
        }
        let mut l = Vector2::zeros();
        let mut scale = 0.0;
        for k in 0..n {
            if !bonded(j, k) || st.singular[k] {
                continue;
            }
            let xi = positions[k] - positions[j];
            let wv = weight(j, k) * volumes[k];
            let term = wv * ((st.w[j] + st.w[k]) * xi);
            l += term;
            scale += term.norm();
        }
        st.force[j] = l;
        st.force_scale[j] = scale;
    }

    for j in 0..n {
        let rho = materials[regions[j] as usize].rho();
        st.accel[j] = (st.force[j] + body_force[j]) / rho;
    }
    st
}

/// Global linear momentum Σ ρ·v·V of a particle state.
pub fn linear_momentum(
    velocities: &[Vector2<f64>],
    volumes: &[f64],
    regions: &[u16],
    rho: &[f64],
) -> Vector2<f64> {
    let mut p = Vector2::zeros();
    for j in 0..velocities.len() {
        p += velocities[j] * (rho[regions[j] as usize] * volumes[j]);
    }
    p
}

/// Momentum magnitude scale Σ ρ·|v|·V, the denominator for drift checks.
pub fn momentum_scale(
    velocities: &[Vector2<f64>],
    volumes: &[f64],
    regions: &[u16],
    rho: &[f64],
) -> f64 {
    let mut s = 0.0;
    for j in 0..velocities.len() {
        s += velocities[j].norm() * rho[regions[j] as usize] * volumes[j];
    }
    s
}

/// A randomly drawn small particle system: the production-side inputs plus
/// the independent material descriptions the dense reference rotates itself.
pub struct RandomSystem {
    pub grid: GridGeometry,
    pub records: Vec<MaterialRecord>,
    pub dense: Vec<DenseMaterial>,
    pub delta: f64,
    pub broken: HashSet<(u32, u32)>,
    pub u: Vec<Vector2<f64>>,
    pub body_force: Vec<Vector2<f64>>,
}

/// Draws a jittered lattice with random spacing, horizon, per-particle
/// volumes, two-material region map, displacements, body forces, and a
/// random set of pre-broken pairs. A quarter of the draws add a deliberate
/// pathology: either an isolated far-away particle (no bonds at all) or a
/// collinear triple (rank-deficient shape tensor), both of which must be
/// flagged singular and carried inertly.
pub fn random_system(rng: &mut ChaCha8Rng) -> RandomSystem {
    let nx = rng.gen_range(2..=7usize);
    let ny = rng.gen_range(2..=7usize);
    let dx = 10f64.powf(rng.gen_range(-4.0..=-2.0));
    let delta = rng.gen_range(1.2..=3.2) * dx;

    let mut positions = Vec::with_capacity(nx * ny + 3);
    for iy in 0..ny {
        for ix in 0..nx {
            positions.push(Vector2::new(
                ix as f64 * dx + rng.gen_range(-0.3..=0.3) * dx,
                iy as f64 * dx + rng.gen_range(-0.3..=0.3) * dx,
            ));
        }
    }
    match rng.gen_range(0..4u8) {
        0 => positions.push(Vector2::new(-20.0 * delta, -20.0 * delta)),
        1 => {
            let angle = rng.gen_range(0.0..std::f64::consts::PI);
            let e = Vector2::new(angle.cos(), angle.sin());
            let base = Vector2::new(-25.0 * delta, 12.0 * delta);
            for i in 0..3 {
                positions.push(base + 0.4 * delta * i as f64 * e);
            }
        }
        _ => {}
    }

    let n = positions.len();
    let volumes: Vec<f64> = (0..n).map(|_| dx * dx * rng.gen_range(0.5..=1.5)).collect();
    let regions: Vec<u16> = (0..n).map(|_| rng.gen_range(0..2u16)).collect();

    let e1 = rng.gen_range(50.0..=200.0) * 1e9;
    let e2 = rng.gen_range(5.0..=15.0) * 1e9;
    let g12 = rng.gen_range(3.0..=10.0) * 1e9;
    let nu12 = rng.gen_range(0.05..=0.3);
    let theta_a = rng.gen_range(-1.5..=1.5);
    let rho_a = rng.gen_range(1000.0..=3000.0);
    // A directly supplied fibre-frame stiffness with small nonzero normal /
    // shear couplings; the perturbations are far too small to threaten
    // positive definiteness of the base matrix.
    let c13 = rng.gen_range(-0.5..=0.5) * 1e9;
    let c23 = rng.gen_range(-0.5..=0.5) * 1e9;
    let c = Matrix3::new(155.43e9, 3.72e9, c13, 3.72e9, 16.34e9, c23, c13, c23, 7.48e9);
    let theta_b = rng.gen_range(-1.5..=1.5);
    let rho_b = rng.gen_range(1500.0..=6000.0);

    let records = vec![
        MaterialRecord::from_engineering(e1, e2, g12, nu12, theta_a, rho_a, None).unwrap(),
        MaterialRecord::from_stiffness(c, theta_b, rho_b, None).unwrap(),
    ];
    let dense = vec![
        DenseMaterial::Engineering { e1, e2, g12, nu12, theta: theta_a, rho: rho_a },
        DenseMaterial::Direct { c, theta: theta_b, rho: rho_b },
    ];

    // Pre-broken pairs, drawn over the geometrically bonded candidates.
    let limit = delta * delta * (1.0 + RADIUS_SLACK);
    let mut broken = HashSet::new();
    for j in 0..n {
        for k in (j + 1)..n {
            let d = positions[k] - positions[j];
            let d2 = d.x * d.x + d.y * d.y;
            if d2 > 0.0 && d2 <= limit && rng.gen_bool(0.12) {
                broken.insert(pair_key(j, k));
            }
        }
    }

    let u: Vec<Vector2<f64>> = (0..n)
        .map(|_| {
            Vector2::new(rng.gen_range(-0.05..=0.05) * dx, rng.gen_range(-0.05..=0.05) * dx)
        })
        .collect();
    let body_force: Vec<Vector2<f64>> = (0..n)
        .map(|_| Vector2::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)) * 1e6)
        .collect();

    // Bounding rectangle grown by one spacing so every particle, outliers
    // included, lies inside the binning domain.
    let mut lo = Vector2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vector2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &positions {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    let rect = Rect {
        x0: lo.x - dx,
        y0: lo.y - dx,
        width: hi.x - lo.x + 2.0 * dx,
        height: hi.y - lo.y + 2.0 * dx,
    };

    let grid = GridGeometry { positions, volumes, regions, rect, nx, ny, dx, dy: dx };
    RandomSystem { grid, records, dense, delta, broken, u, body_force }
}
