//! Command-line entry point: run scenarios from config files or shipped
//! presets, compare intensity-factor series, extract damage paths from
//! snapshots, and drive the grid/horizon refinement matrix.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use anisopd::config::{load_preset, ScenarioConfig};
use anisopd::fracture::{crack_path, l2_error};
use anisopd::runner::{convergence_study, read_dsif_series, FieldSnapshot, Simulation};
use anisopd::{Error, Result};

#[derive(Parser)]
#[command(
    name = "anisopd",
    version,
    about = "Meshfree explicit dynamics for anisotropic plates: bond damage, \
             crack paths, and dynamic crack-tip intensity factors"
)]
struct Cli {
    /// Worker threads for the particle loops (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Reserved; the solver ships no stochastic elements.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario described by a TOML config file.
    Run {
        /// Path to the scenario config.
        config: PathBuf,
        /// Where to write run artifacts (overrides the config).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Snapshot/sampling cadence in steps (overrides the config).
        #[arg(long)]
        snapshot_every: Option<u64>,
    },
    /// Run a shipped preset scenario, optionally adjusted.
    Preset {
        /// One of: edge_crack, centred_crack, inclusion_hole,
        /// inclusion_hole_damage.
        name: String,
        /// key.path=value adjustment applied before validation; repeatable
        /// (integer segments index arrays, e.g. materials.0.rho=1600).
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Where to write run artifacts (overrides the preset).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Snapshot/sampling cadence in steps (overrides the preset).
        #[arg(long)]
        snapshot_every: Option<u64>,
        /// Print the effective config to stdout instead of running.
        #[arg(long)]
        print: bool,
    },
    /// Relative L2 distance between two intensity-factor series files.
    DsifCompare {
        /// Series under test.
        series_a: PathBuf,
        /// Reference series (sets the comparison instants and the norm).
        series_b: PathBuf,
    },
    /// Damage-path clusters (count, angle, extent) from a snapshot file.
    Paths {
        snapshot: PathBuf,
        /// Damage threshold selecting path particles.
        #[arg(long, default_value_t = 0.35)]
        threshold: f64,
        /// Snapshot whose damage field is subtracted first (typically the
        /// step-0 snapshot, to hide pre-cut cracks).
        #[arg(long)]
        baseline: Option<PathBuf>,
        /// Cluster linking radius in metres; default 2.05× the spacing.
        #[arg(long)]
        link_radius: Option<f64>,
    },
    /// Grid/horizon refinement matrix on the edge-crack protocol, reporting
    /// each run's K_I series error against the finest-grid run.
    Convergence {
        /// Comma-separated grid sizes (nx = ny).
        #[arg(long, value_delimiter = ',', default_value = "200,300,400")]
        grids: Vec<u32>,
        /// Comma-separated horizon factors.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        horizons: Vec<u32>,
        /// Duration override in seconds (default: the preset's duration).
        #[arg(long)]
        total_time: Option<f64>,
        /// Sampling cadence in steps.
        #[arg(long, default_value_t = 200)]
        every: u64,
        /// Directory for the per-run series and the error table.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("error: cannot configure {w} workers: {e}");
            std::process::exit(1);
        }
    }
    let _ = cli.seed; // reserved
    if let Err(e) = dispatch(cli.command) {
        eprintln!("error: {e}");
        std::process::exit(i32::from(e.exit_code()));
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { config, output_dir, snapshot_every } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Error::Io { path: config.clone(), source: e })?;
            let (effective, warnings) = ScenarioConfig::parse(&text)?.normalize()?;
            execute(effective, warnings, output_dir, snapshot_every)
        }
        Command::Preset { name, overrides, output_dir, snapshot_every, print } => {
            let (effective, warnings) = load_preset(&name, &overrides)?;
            if print {
                for w in &warnings {
                    eprintln!("warning: {w}");
                }
                print!("{}", effective.echo()?);
                return Ok(());
            }
            execute(effective, warnings, output_dir, snapshot_every)
        }
        Command::DsifCompare { series_a, series_b } => {
            let a = read_dsif_series(&series_a)?;
            let b = read_dsif_series(&series_b)?;
            let pairs = |s: &[anisopd::fracture::DsifSample], pick: fn(&anisopd::fracture::DsifSample) -> f64| {
                s.iter().map(|x| (x.time, pick(x))).collect::<Vec<_>>()
            };
            let e1 = l2_error(&pairs(&a, |s| s.k1), &pairs(&b, |s| s.k1));
            let e2 = l2_error(&pairs(&a, |s| s.k2), &pairs(&b, |s| s.k2));
            match e1 {
                Ok(e) => println!("l2_error_KI = {e:.9e}"),
                Err(err) => println!("l2_error_KI = undefined ({err})"),
            }
            match e2 {
                Ok(e) => println!("l2_error_KII = {e:.9e}"),
                Err(err) => println!("l2_error_KII = undefined ({err})"),
            }
            Ok(())
        }
        Command::Paths { snapshot, threshold, baseline, link_radius } => {
            if !(threshold > 0.0 && threshold < 1.0) {
                return Err(Error::Config(format!(
                    "threshold must lie in (0, 1), got {threshold}"
                )));
            }
            let snap = FieldSnapshot::read(&snapshot)?;
            if snap.positions.len() < 2 {
                return Err(Error::Measurement(
                    "snapshot holds fewer than two particles".to_string(),
                ));
            }
            let base = match baseline {
                Some(p) => {
                    let b = FieldSnapshot::read(&p)?;
                    if b.phi.len() != snap.phi.len() {
                        return Err(Error::Measurement(format!(
                            "baseline has {} particles but the snapshot has {}",
                            b.phi.len(),
                            snap.phi.len()
                        )));
                    }
                    b.phi
                }
                None => vec![0.0; snap.phi.len()],
            };
            let link = match link_radius {
                Some(r) if r > 0.0 => r,
                Some(r) => {
                    return Err(Error::Config(format!("link radius must be positive, got {r}")))
                }
                None => {
                    let p0 = snap.positions[0];
                    let spacing = snap.positions[1..]
                        .iter()
                        .map(|p| (p - p0).norm())
                        .fold(f64::INFINITY, f64::min);
                    2.05 * spacing
                }
            };
            let clusters = crack_path(&snap.positions, &snap.phi, &base, threshold, link);
            if clusters.is_empty() {
                println!("no particles above threshold {threshold}");
                return Ok(());
            }
            for (i, c) in clusters.iter().enumerate() {
                println!(
                    "cluster {}: {} particles, angle {:.2} deg, centroid ({:.4e}, {:.4e}), \
                     extent [{:.4e}, {:.4e}] x [{:.4e}, {:.4e}], polyline {} points",
                    i + 1,
                    c.count,
                    c.angle_deg,
                    c.centroid.x,
                    c.centroid.y,
                    c.min.x,
                    c.max.x,
                    c.min.y,
                    c.max.y,
                    c.polyline.len(),
                );
            }
            Ok(())
        }
        Command::Convergence { grids, horizons, total_time, every, output_dir } => {
            let cells =
                convergence_study(&grids, &horizons, total_time, every, output_dir.as_deref())?;
            println!("grid  horizon  samples  l2_error_KI");
            for c in &cells {
                println!("{:>4}  {:>7}  {:>7}  {:.9e}", c.grid, c.horizon, c.samples, c.error_k1);
            }
            Ok(())
        }
    }
}

/// Shared run path for `run` and `preset`: apply CLI-level output overrides,
/// build the model, report setup, and execute to disk.
fn execute(
    mut cfg: ScenarioConfig,
    warnings: Vec<String>,
    output_dir: Option<PathBuf>,
    snapshot_every: Option<u64>,
) -> Result<()> {
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if let Some(n) = snapshot_every {
        cfg.snapshot_every = n;
    }
    if let Some(dir) = output_dir {
        cfg.output_dir = Some(dir.to_string_lossy().into_owned());
    }
    let out = PathBuf::from(cfg.output_dir.clone().unwrap_or_else(|| "run_output".to_string()));
    let mut sim = Simulation::new(&cfg)?;
    for w in &sim.build.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!(
        "particles: {}  bonds: {}  pre-cut pairs: {}  dt: {:.6e} s  steps: {}",
        sim.build.particle_count,
        sim.build.bond_count,
        sim.build.precut_pairs,
        sim.model.dt,
        sim.total_steps(),
    );
    let summary = sim.run_to_disk(&out, true)?;
    print!("{}", summary.to_text());
    println!("output_dir = {}", out.display());
    Ok(())
}
