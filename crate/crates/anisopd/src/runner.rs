//! Scenario assembly and run orchestration: builds a model from a validated
//! config, steps it to the requested time, samples crack-tip intensity
//! factors, and writes the run artifacts (effective config echo, snapshots,
//! intensity-factor series, failure log, summary).

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::Vector2;

use crate::config::{load_preset, ScenarioConfig};
use crate::damage::damage_field;
use crate::fracture::{crack_opening, dsif, l2_error, DsifSample};
use crate::grid::{build_bonds, BuildReport, generate_grid};
use crate::integrator::{critical_time_step, Model};
use crate::stroh::{stroh_matrices, StrohData};
use crate::{Error, Result};

/// Crack-tip sampling fixture, fixed at setup: probe geometry plus the
/// eigenstructure of the region containing the initial tip.
struct Probe {
    tip: Vector2<f64>,
    direction: Vector2<f64>,
    rbar: f64,
    crack_length: f64,
    stroh: StrohData,
}

/// A ready-to-step scenario.
pub struct Simulation {
    /// The normalized configuration the model was built from.
    pub config: ScenarioConfig,
    pub model: Model,
    pub build: BuildReport,
    /// Damage field right after setup (pre-cut cracks only); path extraction
    /// subtracts it to ignore the initial notch.
    pub baseline_phi: Vec<f64>,
    probe: Option<Probe>,
}

impl Simulation {
    /// Builds grid, bonds, model, initial velocity field, and the optional
    /// intensity-factor probe from a normalized config.
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        let records = config.material_records()?;
        let grid = generate_grid(
            config.rect(),
            config.grid.nx as usize,
            config.grid.ny as usize,
            &config.hole_circles(),
            &config.inclusion_circles(),
        );
        if grid.len() == 0 {
            return Err(Error::Config("the holes remove every particle".to_string()));
        }
        let cracks = config.crack_segments();
        let (bonds, build) = build_bonds(&grid, config.delta(), &cracks);
        let dt = critical_time_step(&records, config.delta());
        let mut model = Model::new(
            grid,
            bonds,
            &records,
            dt,
            config.damage_enabled,
            config.displacement_update.into(),
        )?;
        model.apply_initial_velocity(config.velocity_amplitude(), config.rect().height);

        let probe = match config.dsif_probe() {
            Some((tip, direction, rbar)) => {
                // The budget for sampling behind the tip is the length of
                // the crack whose endpoint lies nearest the tip.
                let crack_length = cracks
                    .iter()
                    .map(|s| {
                        let gap = (s.a - tip).norm().min((s.b - tip).norm());
                        (gap, (s.b - s.a).norm())
                    })
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .map(|(_, len)| len)
                    .expect("validated: dsif requires a crack");
                // The probe uses the stiffness (at global orientation) of
                // the region holding the initial tip.
                let nearest = model
                    .grid
                    .positions
                    .iter()
                    .enumerate()
                    .min_by(|(_, a), (_, b)| {
                        (*a - tip).norm_squared().total_cmp(&(*b - tip).norm_squared())
                    })
                    .map(|(j, _)| j)
                    .expect("grid is nonempty");
                let region = model.grid.regions[nearest] as usize;
                let stroh = stroh_matrices(&records[region].stiffness_global())?;
                Some(Probe { tip, direction, rbar, crack_length, stroh })
            }
            None => None,
        };
        let baseline_phi = damage_field(&model.bonds);
        Ok(Self { config: config.clone(), model, build, baseline_phi, probe })
    }

    /// Number of steps needed to cover `total_time` with the stable step.
    pub fn total_steps(&self) -> u64 {
        let total = self.config.total_time_si();
        if total <= 0.0 {
            0
        } else {
            (total / self.model.dt).ceil() as u64
        }
    }

    /// Current per-particle damage.
    pub fn phi(&self) -> Vec<f64> {
        damage_field(&self.model.bonds)
    }

    /// Samples the intensity factors at the current state.
    pub fn measure_dsif(&self) -> Result<DsifSample> {
        let p = self
            .probe
            .as_ref()
            .ok_or_else(|| Error::Measurement("no dsif probe configured".to_string()))?;
        let opening = crack_opening(
            &self.model.grid,
            &self.model.state.u,
            p.tip,
            p.direction,
            p.rbar,
            p.crack_length,
        )?;
        let (k1, k2) = dsif(&opening, &p.stroh, p.rbar)?;
        Ok(DsifSample { time: self.model.state.time, k1, k2 })
    }

    fn try_sample(&self, samples: &mut Vec<DsifSample>, skipped: &mut usize) {
        if self.probe.is_none() {
            return;
        }
        match self.measure_dsif() {
            Ok(s) => samples.push(s),
            Err(_) => *skipped += 1,
        }
    }

    /// Steps to the end, sampling the intensity factors every `every` steps
    /// (and at the first and last step), without touching the disk.
    pub fn run_dsif_series(&mut self, every: u64) -> Result<(Vec<DsifSample>, usize)> {
        let steps = self.total_steps();
        let mut samples = Vec::new();
        let mut skipped = 0;
        self.try_sample(&mut samples, &mut skipped);
        for s in 1..=steps {
            self.model.step()?;
            if (every > 0 && s % every == 0) || s == steps {
                self.try_sample(&mut samples, &mut skipped);
            }
        }
        Ok((samples, skipped))
    }

    /// Executes the full run protocol into `out_dir`: effective config echo,
    /// snapshot 0, cadenced and final snapshots, intensity-factor series,
    /// failure-event log, and a summary file. With `progress` set, a coarse
    /// status line goes to stderr roughly every 5% of the run.
    pub fn run_to_disk(&mut self, out_dir: &Path, progress: bool) -> Result<RunSummary> {
        fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let echo_path = out_dir.join("effective_config.toml");
        fs::write(&echo_path, self.config.echo()?).map_err(|e| Error::io(&echo_path, e))?;

        let wall = Instant::now();
        let steps = self.total_steps();
        let mut snapshots = 0usize;
        FieldSnapshot::capture(self).write(&snapshot_path(out_dir, 0))?;
        snapshots += 1;

        let mut samples = Vec::new();
        let mut skipped = 0usize;
        self.try_sample(&mut samples, &mut skipped);

        let mut failure_log = if self.config.damage_enabled {
            let path = out_dir.join("failures.csv");
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = BufWriter::new(file);
            writeln!(w, "step,time_s,j,n").map_err(|e| Error::io(&path, e))?;
            Some((w, path))
        } else {
            None
        };

        let report_every = (steps / 20).max(1);
        let mut broken_total = 0usize;
        for s in 1..=steps {
            let report = self.model.step()?;
            broken_total += report.broken.len();
            if progress && (s % report_every == 0 || s == steps) {
                eprintln!(
                    "step {s}/{steps}  t = {:.3e} s  broken bonds: {broken_total}",
                    self.model.state.time
                );
            }
            if let Some((w, path)) = failure_log.as_mut() {
                for (j, n) in &report.broken {
                    writeln!(w, "{},{:.9e},{},{}", s, self.model.state.time, j, n)
                        .map_err(|e| Error::io(&*path, e))?;
                }
            }
            let cadenced = self.config.snapshot_every > 0 && s % self.config.snapshot_every == 0;
            if cadenced || s == steps {
                FieldSnapshot::capture(self).write(&snapshot_path(out_dir, s))?;
                snapshots += 1;
                self.try_sample(&mut samples, &mut skipped);
            }
        }
        if let Some((mut w, path)) = failure_log {
            w.flush().map_err(|e| Error::io(path, e))?;
        }

        if self.probe.is_some() {
            write_dsif_series(&samples, &out_dir.join("dsif.csv"))?;
        }

        let phi = self.phi();
        let max_phi = phi.iter().cloned().fold(0.0f64, f64::max);
        let summary = RunSummary {
            steps,
            dt: self.model.dt,
            simulated_time: self.model.state.time,
            particles: self.model.grid.len(),
            broken_bonds: broken_total,
            max_phi,
            snapshots,
            dsif_rows: samples.len(),
            dsif_skipped: skipped,
            wall_seconds: wall.elapsed().as_secs_f64(),
        };
        let summary_path = out_dir.join("summary.txt");
        fs::write(&summary_path, summary.to_text()).map_err(|e| Error::io(&summary_path, e))?;
        Ok(summary)
    }
}

fn snapshot_path(dir: &Path, step: u64) -> PathBuf {
    dir.join(format!("snapshot_{step:06}.csv"))
}

/// Closing statistics of a finished run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub steps: u64,
    pub dt: f64,
    pub simulated_time: f64,
    pub particles: usize,
    pub broken_bonds: usize,
    pub max_phi: f64,
    pub snapshots: usize,
    pub dsif_rows: usize,
    pub dsif_skipped: usize,
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn to_text(&self) -> String {
        format!(
            "steps = {}\ndt_s = {:.9e}\nsimulated_time_s = {:.9e}\nparticles = {}\n\
             broken_bonds = {}\nmax_phi = {:.9e}\nsnapshots = {}\ndsif_rows = {}\n\
             dsif_skipped = {}\nwall_s = {:.3}\n",
            self.steps,
            self.dt,
            self.simulated_time,
            self.particles,
            self.broken_bonds,
            self.max_phi,
            self.snapshots,
            self.dsif_rows,
            self.dsif_skipped,
            self.wall_seconds,
        )
    }
}

/// Point-cloud state at one instant: reference positions, displacements,
/// damage, and region ids. The particle count is constant across the
/// snapshots of a run.
#[derive(Clone, Debug)]
pub struct FieldSnapshot {
    pub step: u64,
    pub time: f64,
    pub positions: Vec<Vector2<f64>>,
    pub displacements: Vec<Vector2<f64>>,
    pub phi: Vec<f64>,
    pub regions: Vec<u16>,
}

impl FieldSnapshot {
    pub fn capture(sim: &Simulation) -> Self {
        Self {
            step: sim.model.state.step,
            time: sim.model.state.time,
            positions: sim.model.grid.positions.clone(),
            displacements: sim.model.state.u.clone(),
            phi: sim.phi(),
            regions: sim.model.grid.regions.clone(),
        }
    }

    /// Writes the snapshot as delimited text with a fixed number of
    /// significant digits, so identical states produce byte-identical files.
    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(w, "x, y, ux, uy, phi, region").map_err(io)?;
        for j in 0..self.positions.len() {
            writeln!(
                w,
                "{:.9e}, {:.9e}, {:.9e}, {:.9e}, {:.9e}, {}",
                self.positions[j].x,
                self.positions[j].y,
                self.displacements[j].x,
                self.displacements[j].y,
                self.phi[j],
                self.regions[j],
            )
            .map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Reads a snapshot file back (step and time are not stored in the file
    /// and come back as zero).
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Measurement(format!("{}: empty snapshot", path.display())))?
            .map_err(|e| Error::io(path, e))?;
        if header.split(',').map(str::trim).collect::<Vec<_>>()
            != ["x", "y", "ux", "uy", "phi", "region"]
        {
            return Err(Error::Measurement(format!(
                "{}: unexpected snapshot header {header:?}",
                path.display()
            )));
        }
        let mut snap = FieldSnapshot {
            step: 0,
            time: 0.0,
            positions: Vec::new(),
            displacements: Vec::new(),
            phi: Vec::new(),
            regions: Vec::new(),
        };
        for (i, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = || {
                Error::Measurement(format!(
                    "{}: malformed snapshot row {}: {line:?}",
                    path.display(),
                    i + 2
                ))
            };
            if fields.len() != 6 {
                return Err(bad());
            }
            let f: Vec<f64> =
                fields[..5].iter().map(|s| s.parse().map_err(|_| bad())).collect::<Result<_>>()?;
            snap.positions.push(Vector2::new(f[0], f[1]));
            snap.displacements.push(Vector2::new(f[2], f[3]));
            snap.phi.push(f[4]);
            snap.regions.push(fields[5].parse().map_err(|_| bad())?);
        }
        Ok(snap)
    }
}

/// Writes an intensity-factor series with the declared header.
pub fn write_dsif_series(samples: &[DsifSample], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "time_s,KI_Pa_sqrt_m,KII_Pa_sqrt_m").map_err(io)?;
    for s in samples {
        writeln!(w, "{:.9e},{:.9e},{:.9e}", s.time, s.k1, s.k2).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads an intensity-factor series written by [`write_dsif_series`].
pub fn read_dsif_series(path: &Path) -> Result<Vec<DsifSample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if i == 0 {
            if line.trim() != "time_s,KI_Pa_sqrt_m,KII_Pa_sqrt_m" {
                return Err(Error::Measurement(format!(
                    "{}: unexpected series header {line:?}",
                    path.display()
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = || {
            Error::Measurement(format!("{}: malformed series row {}: {line:?}", path.display(), i + 1))
        };
        let f: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if f.len() != 3 {
            return Err(bad());
        }
        out.push(DsifSample { time: f[0], k1: f[1], k2: f[2] });
    }
    Ok(out)
}

/// One cell of the grid/horizon refinement table.
#[derive(Clone, Debug)]
pub struct ConvergenceCell {
    pub grid: u32,
    pub horizon: u32,
    pub samples: usize,
    /// Relative L2 error of the K_I series against the reference run.
    pub error_k1: f64,
}

/// Runs the edge-crack protocol over a matrix of grid sizes and horizon
/// factors and reports each run's K_I series error against the finest-grid
/// run (horizon 2 when present, the smallest listed otherwise). Cells run
/// sequentially in-process; `total_time` overrides the preset duration and
/// `every` sets the sampling cadence in steps. With `out_dir` given, each
/// series and the final table are also written to disk.
pub fn convergence_study(
    grids: &[u32],
    horizons: &[u32],
    total_time: Option<f64>,
    every: u64,
    out_dir: Option<&Path>,
) -> Result<Vec<ConvergenceCell>> {
    if grids.is_empty() || horizons.is_empty() {
        return Err(Error::Config("convergence study needs grids and horizons".to_string()));
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let ref_grid = *grids.iter().max().expect("nonempty");
    let ref_horizon =
        if horizons.contains(&2) { 2 } else { *horizons.iter().min().expect("nonempty") };

    // Pin the opening-displacement probe to one physical radius — 3Δx of the
    // coarsest grid — for every cell. Left at its per-run default the probe
    // would move with each grid's spacing and every row of the table would
    // measure a slightly different quantity, which breaks the comparison.
    let (base, _) = load_preset("edge_crack", &[])?;
    let coarsest = *grids.iter().min().expect("nonempty");
    let rbar = 3.0 * base.rect().width / coarsest as f64;

    let run_cell = |grid: u32, horizon: u32| -> Result<Vec<DsifSample>> {
        let mut overrides = vec![
            format!("grid.nx={grid}"),
            format!("grid.ny={grid}"),
            format!("horizon_factor={horizon}"),
            format!("dsif.rbar={rbar}"),
        ];
        if let Some(t) = total_time {
            overrides.push(format!("total_time={t}"));
        }
        let (config, _) = load_preset("edge_crack", &overrides)?;
        let mut sim = Simulation::new(&config)?;
        let (samples, _) = sim.run_dsif_series(every)?;
        if let Some(dir) = out_dir {
            write_dsif_series(&samples, &dir.join(format!("dsif_g{grid}_n{horizon}.csv")))?;
        }
        Ok(samples)
    };

    let reference = run_cell(ref_grid, ref_horizon)?;
    let ref_pairs: Vec<(f64, f64)> = reference.iter().map(|s| (s.time, s.k1)).collect();

    let mut cells = Vec::new();
    for &grid in grids {
        for &horizon in horizons {
            let samples = if (grid, horizon) == (ref_grid, ref_horizon) {
                reference.clone()
            } else {
                run_cell(grid, horizon)?
            };
            let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.time, s.k1)).collect();
            let error_k1 = l2_error(&pairs, &ref_pairs)?;
            cells.push(ConvergenceCell { grid, horizon, samples: samples.len(), error_k1 });
        }
    }

    if let Some(dir) = out_dir {
        let path = dir.join("convergence.csv");
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(&path, e);
        writeln!(w, "grid,horizon,samples,l2_error_KI").map_err(io)?;
        for c in &cells {
            writeln!(w, "{},{},{},{:.9e}", c.grid, c.horizon, c.samples, c.error_k1).map_err(io)?;
        }
        w.flush().map_err(io)?;
    }
    Ok(cells)
}
