//! Explicit time integration of the particle equations of motion, with the
//! per-step pipeline fixed as: state tensors → internal forces → velocity
//! and displacement update → bond failure sweep → clock advance.

use nalgebra::Vector2;
use rayon::prelude::*;

use crate::damage::{apply_failures, evaluate_failures};
use crate::grid::{BondSet, GridGeometry};
use crate::kernel::{internal_forces, update_tensors, ParticleField};
use crate::material::{MaterialRecord, RegionTable};
use crate::{Error, Result};

/// Stable-step safety factor applied to δ/c_p.
pub const TIME_STEP_FACTOR: f64 = 0.01;

/// How the displacement update uses the freshly integrated velocity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DisplacementUpdate {
    /// u += v_new·dt — velocity first, then displacement from the new
    /// velocity (the default; symplectic for this force ordering).
    SemiImplicit,
    /// u += v_old·dt — displacement from the pre-update velocity.
    ExplicitEuler,
}

/// Time-varying unknowns of the simulation.
#[derive(Clone, Debug)]
pub struct SimulationState {
    pub u: Vec<Vector2<f64>>,
    pub v: Vec<Vector2<f64>>,
    pub accel: Vec<Vector2<f64>>,
    /// Completed steps.
    pub step: u64,
    /// Always exactly `step as f64 * dt`.
    pub time: f64,
}

impl SimulationState {
    pub fn new(particle_count: usize) -> Self {
        Self {
            u: vec![Vector2::zeros(); particle_count],
            v: vec![Vector2::zeros(); particle_count],
            accel: vec![Vector2::zeros(); particle_count],
            step: 0,
            time: 0.0,
        }
    }
}

/// What one step changed beyond the state itself.
#[derive(Clone, Debug, Default)]
pub struct StepReport {
    /// Bond pairs broken this step, as (lower, higher) particle indices,
    /// in deterministic order.
    pub broken: Vec<(u32, u32)>,
}

/// A discretized plate plus everything `step` needs to advance it.
pub struct Model {
    pub grid: GridGeometry,
    pub bonds: BondSet,
    pub table: RegionTable,
    pub field: ParticleField,
    pub state: SimulationState,
    /// Prescribed body force density (N/m³) per particle; zero by default.
    pub body_force: Vec<Vector2<f64>>,
    pub dt: f64,
    pub damage_enabled: bool,
    pub update: DisplacementUpdate,
    force: Vec<Vector2<f64>>,
    inv_rho: Vec<f64>,
}

impl Model {
    pub fn new(
        grid: GridGeometry,
        bonds: BondSet,
        materials: &[MaterialRecord],
        dt: f64,
        damage_enabled: bool,
        update: DisplacementUpdate,
    ) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Config(format!("time step must be positive, got {dt}")));
        }
        let table = RegionTable::new(materials);
        let n = grid.len();
        let inv_rho: Vec<f64> =
            grid.regions.iter().map(|&r| 1.0 / table.rho[r as usize]).collect();
        Ok(Self {
            field: ParticleField::new(n),
            state: SimulationState::new(n),
            body_force: vec![Vector2::zeros(); n],
            force: vec![Vector2::zeros(); n],
            inv_rho,
            grid,
            bonds,
            table,
            dt,
            damage_enabled,
            update,
        })
    }

    /// Advances the state by one step. On success the report lists any bonds
    /// broken; a non-finite displacement or velocity aborts with the 1-based
    /// index of the failing step and the first affected particle.
    pub fn step(&mut self) -> Result<StepReport> {
        let dt = self.dt;
        update_tensors(
            &mut self.field,
            &self.bonds,
            &self.state.u,
            &self.grid.regions,
            &self.table,
        );
        internal_forces(&self.field, &self.bonds, &mut self.force);

        let explicit = self.update == DisplacementUpdate::ExplicitEuler;
        let force = &self.force;
        let body = &self.body_force;
        let inv_rho = &self.inv_rho;
        self.state
            .accel
            .par_iter_mut()
            .zip(self.state.v.par_iter_mut())
            .zip(self.state.u.par_iter_mut())
            .enumerate()
            .for_each(|(j, ((a, v), u))| {
                let v_old = *v;
                *a = (force[j] + body[j]) * inv_rho[j];
                *v += *a * dt;
                *u += if explicit { v_old * dt } else { *v * dt };
            });

        if let Some(particle) = first_non_finite(&self.state.u, &self.state.v) {
            return Err(Error::Numerical { step: self.state.step + 1, particle });
        }

        let mut report = StepReport::default();
        if self.damage_enabled {
            let events =
                evaluate_failures(&self.field, &self.bonds, &self.grid.regions, &self.table);
            if !events.is_empty() {
                report.broken = events
                    .iter()
                    .map(|e| {
                        let n = self.bonds.neighbor[e.slot as usize];
                        (e.particle.min(n), e.particle.max(n))
                    })
                    .collect();
                apply_failures(&mut self.bonds, &mut self.field, &events);
            }
        }

        self.state.step += 1;
        self.state.time = self.state.step as f64 * dt;
        Ok(report)
    }

    /// Sets the linear initial velocity profile v_y(y) = v0 · y / height,
    /// where `height` is the full plate height.
    pub fn apply_initial_velocity(&mut self, v0: f64, height: f64) {
        for (v, p) in self.state.v.iter_mut().zip(&self.grid.positions) {
            *v = Vector2::new(0.0, v0 * p.y / height);
        }
    }
}

fn first_non_finite(u: &[Vector2<f64>], v: &[Vector2<f64>]) -> Option<usize> {
    u.iter()
        .zip(v)
        .position(|(a, b)| !(a.x.is_finite() && a.y.is_finite() && b.x.is_finite() && b.y.is_finite()))
}

/// Stable explicit time step: `TIME_STEP_FACTOR · δ / c_p`, with the sonic
/// speed taken as the largest over all materials present.
pub fn critical_time_step(materials: &[MaterialRecord], delta: f64) -> f64 {
    let c_max = materials.iter().map(|m| m.sonic_speed()).fold(0.0, f64::max);
    TIME_STEP_FACTOR * delta / c_max
}
