//! Bond failure: quadratic composite failure surface evaluated on the bond
//! stress (mean of the endpoint states, expressed in the governing region's
//! fibre frame), simultaneous deactivation of every over-threshold bond, and
//! the per-particle damage index.

use nalgebra::Vector3;
use rayon::prelude::*;

use crate::grid::BondSet;
use crate::kernel::ParticleField;
use crate::material::{RegionTable, Strengths};

/// Bonds break when the failure index reaches this value.
pub const FAILURE_THRESHOLD: f64 = 1.0;

/// Failure index for a fibre-frame stress (σ_L, σ_T, τ_LT):
/// (σ_L/σ_Lu)² + (σ_T/σ_Tu)² − σ_L·σ_T/σ_Lu² + (τ_LT/τ_LTu)².
pub fn tsai_hill_index(sigma_local: &Vector3<f64>, s: &Strengths) -> f64 {
    let l = sigma_local.x / s.sigma_lu;
    let t = sigma_local.y / s.sigma_tu;
    let sh = sigma_local.z / s.tau_ltu;
    l * l + t * t - sigma_local.x * sigma_local.y / (s.sigma_lu * s.sigma_lu) + sh * sh
}

/// One bond pair marked for deactivation, addressed by its canonical slot
/// (the record with the lower particle index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BondFailure {
    pub particle: u32,
    pub slot: u32,
}

/// Evaluates the failure surface on every active bond (canonical direction
/// only) and returns the over-threshold set, sorted by (particle, slot) so
/// application order is deterministic. Bonds touching a singular particle
/// carry no stress state and are skipped.
pub fn evaluate_failures(
    field: &ParticleField,
    bonds: &BondSet,
    regions: &[u16],
    table: &RegionTable,
) -> Vec<BondFailure> {
    let tensors = &field.0;
    let n = bonds.particle_count();
    let mut events: Vec<BondFailure> = (0..n)
        .into_par_iter()
        .fold(Vec::new, |mut acc, j| {
            let tj = &tensors[j];
            if tj.singular {
                return acc;
            }
            for s in bonds.row(j) {
                let k = bonds.neighbor[s] as usize;
                if k <= j || !bonds.active[s] {
                    continue;
                }
                let tk = &tensors[k];
                if tk.singular {
                    continue;
                }
                let governing = table.weaker(regions[j], regions[k]) as usize;
                let strengths = match &table.strengths[governing] {
                    Some(s) => s,
                    None => continue,
                };
                let mean = 0.5 * (tj.stress + tk.stress);
                let local = table.to_local[governing] * mean;
                if tsai_hill_index(&local, strengths) >= FAILURE_THRESHOLD {
                    acc.push(BondFailure { particle: j as u32, slot: s as u32 });
                }
            }
            acc
        })
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        });
    events.sort_unstable();
    events
}

/// Deactivates every listed bond pair (both directions) and marks the two
/// endpoints for shape-tensor recomputation. Returns the pair count.
pub fn apply_failures(
    bonds: &mut BondSet,
    field: &mut ParticleField,
    events: &[BondFailure],
) -> usize {
    for e in events {
        let s = e.slot as usize;
        bonds.active[s] = false;
        bonds.active[bonds.partner[s] as usize] = false;
        field.0[e.particle as usize].shape_dirty = true;
        field.0[bonds.neighbor[s] as usize].shape_dirty = true;
    }
    events.len()
}

/// Damage index per particle: φ = 1 − Σ μ·V / Σ V over its bond family.
/// A particle with no bonds at all counts as fully damaged.
pub fn damage_field(bonds: &BondSet) -> Vec<f64> {
    (0..bonds.particle_count())
        .map(|j| {
            let mut kept = 0.0;
            let mut total = 0.0;
            for s in bonds.row(j) {
                total += bonds.volume[s];
                if bonds.active[s] {
                    kept += bonds.volume[s];
                }
            }
            if total == 0.0 {
                1.0
            } else {
                1.0 - kept / total
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::grid::{build_bonds, generate_grid};
    use crate::kernel::update_tensors;
    use crate::material::MaterialRecord;
    use approx::assert_relative_eq;
    use nalgebra::Vector2;

    fn hta_strengths() -> Strengths {
        Strengths { sigma_lu: 1670e6, sigma_tu: 60e6, tau_ltu: 70e6 }
    }

    #[test]
    fn failure_surface_is_exact_on_its_axes() {
        let s = hta_strengths();
        let i1 = tsai_hill_index(&Vector3::new(s.sigma_lu, 0.0, 0.0), &s);
        let i2 = tsai_hill_index(&Vector3::new(0.0, s.sigma_tu, 0.0), &s);
        let i3 = tsai_hill_index(&Vector3::new(0.0, 0.0, s.tau_ltu), &s);
        assert!((i1 - 1.0).abs() <= 1e-12);
        assert!((i2 - 1.0).abs() <= 1e-12);
        assert!((i3 - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn combined_stress_matches_reference_value() {
        let s = hta_strengths();
        let idx = tsai_hill_index(&Vector3::new(s.sigma_lu, s.sigma_tu, 0.0), &s);
        assert_relative_eq!(idx, 1.9640718562874252, max_relative = 1e-15);
    }

    #[test]
    fn index_is_quadratic_under_scaling() {
        let s = hta_strengths();
        let sigma = Vector3::new(4e8, 2e7, -3e7);
        let base = tsai_hill_index(&sigma, &s);
        let doubled = tsai_hill_index(&(2.0 * sigma), &s);
        assert_relative_eq!(doubled, 4.0 * base, max_relative = 1e-13);
    }

    #[test]
    fn sub_threshold_stress_is_safe() {
        let s = hta_strengths();
        assert!(tsai_hill_index(&Vector3::new(1e8, 1e6, 1e6), &s) < FAILURE_THRESHOLD);
    }

    /// Stretches a small plate transversely until the matrix-direction term
    /// alone exceeds the surface; every interior bond must break in the same
    /// pass, and the damage index must rise accordingly.
    #[test]
    fn over_threshold_bonds_break_simultaneously_and_raise_damage() {
        let g = generate_grid(Rect::centred(0.01, 0.01), 10, 10, &[], &[]);
        let (mut bonds, _) = build_bonds(&g, 2.0 * g.dx, &[]);
        let mats = vec![MaterialRecord::from_engineering(
            136e9,
            8.75e9,
            5.5e9,
            0.3,
            0.0,
            1586.0,
            Some(hta_strengths()),
        )
        .unwrap()];
        let table = RegionTable::new(&mats);
        let mut field = ParticleField::new(g.len());

        // Pure transverse stretch: sigma_T = C22 * eps well beyond 60 MPa.
        let eps = 0.02;
        let u: Vec<Vector2<f64>> =
            g.positions.iter().map(|p| Vector2::new(0.0, eps * p.y)).collect();
        update_tensors(&mut field, &bonds, &u, &g.regions, &table);
        let events = evaluate_failures(&field, &bonds, &g.regions, &table);
        assert!(!events.is_empty());
        assert!(events.windows(2).all(|w| w[0] < w[1]), "sorted, unique");
        let before: f64 = damage_field(&bonds).iter().sum();
        let pairs = apply_failures(&mut bonds, &mut field, &events);
        assert_eq!(pairs, events.len());
        let after_field = damage_field(&bonds);
        let after: f64 = after_field.iter().sum();
        assert!(after > before);
        // Interior particles lost every bond: their index is exactly 1.
        let j = 5 * 10 + 5;
        assert_relative_eq!(after_field[j], 1.0, epsilon = 1e-12);
        // Re-evaluating on the broken set finds nothing new to break there.
        update_tensors(&mut field, &bonds, &u, &g.regions, &table);
        let again = evaluate_failures(&field, &bonds, &g.regions, &table);
        for e in &again {
            assert!(bonds.active[e.slot as usize]);
        }
    }

    #[test]
    fn pristine_and_precut_damage_indices() {
        let g = generate_grid(Rect::centred(0.02, 0.02), 16, 16, &[], &[]);
        let (bonds, _) = build_bonds(&g, 2.0 * g.dx, &[]);
        assert!(damage_field(&bonds).iter().all(|&phi| phi == 0.0));

        let crack = crate::geometry::Segment::new(
            Vector2::new(-0.01, 0.0),
            Vector2::new(0.0, 0.0),
        );
        let (cut, report) = build_bonds(&g, 2.0 * g.dx, &[crack]);
        assert!(report.precut_pairs > 0);
        let phi = damage_field(&cut);
        let max = phi.iter().cloned().fold(0.0, f64::max);
        assert!(max > 0.2, "crack faces show damage, got max {max}");
        // Particles far from the crack stay pristine.
        let far = g
            .positions
            .iter()
            .enumerate()
            .filter(|(_, p)| p.y > 0.005)
            .map(|(j, _)| phi[j])
            .fold(0.0, f64::max);
        assert_eq!(far, 0.0);
    }

    /// An interface bond under a stress that fails the weaker region's
    /// surface breaks even when the stronger region would tolerate it.
    #[test]
    fn interface_bonds_use_the_weaker_region() {
        let weak = hta_strengths();
        let strong = Strengths { sigma_lu: 2100e6, sigma_tu: 120e6, tau_ltu: 135e6 };
        let m_weak = MaterialRecord::from_engineering(
            136e9, 8.75e9, 5.5e9, 0.3, 0.0, 1586.0, Some(weak),
        )
        .unwrap();
        let m_strong =
            MaterialRecord::from_stiffness(m_weak.stiffness_local, 0.0, 5670.0, Some(strong))
                .unwrap();
        let mats = vec![m_weak, m_strong];
        let table = RegionTable::new(&mats);

        // Transverse stress between the two surfaces: 60 < sigma_T < 120 MPa.
        let sigma = Vector3::new(0.0, 80e6, 0.0);
        let governing = table.weaker(0, 1);
        assert_eq!(governing, 0);
        let idx = tsai_hill_index(&sigma, table.strengths[governing as usize].as_ref().unwrap());
        assert!(idx >= FAILURE_THRESHOLD);
        let idx_strong = tsai_hill_index(&sigma, &strong);
        assert!(idx_strong < FAILURE_THRESHOLD);
    }

    #[test]
    fn isolated_particle_counts_as_fully_damaged() {
        let g = generate_grid(Rect::centred(4.0, 1.0), 4, 1, &[], &[]);
        // Horizon smaller than the spacing: no bonds at all.
        let (bonds, _) = build_bonds(&g, 0.5, &[]);
        assert!(damage_field(&bonds).iter().all(|&phi| phi == 1.0));
    }
}
