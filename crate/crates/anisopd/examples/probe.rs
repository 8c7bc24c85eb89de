//! Temporary calibration probe (not part of the shipped crate).

use anisopd::config::load_preset;
use anisopd::fracture::crack_path;
use anisopd::runner::Simulation;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    match args.get(1).map(String::as_str) {
        Some("c4") => c4(),
        Some("c7") => {
            let theta_deg: f64 = args[2].parse().unwrap();
            let nx: u32 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(100);
            let total: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(4.0e-5);
            c7(theta_deg, nx, total);
        }
        _ => eprintln!("usage: probe c4 | probe c7 <theta_deg> [nx] [total_time]"),
    }
}

fn c4() {
    let (config, _) = load_preset(
        "edge_crack",
        &[
            "theta=0.0".to_string(),
            "grid.nx=100".to_string(),
            "grid.ny=100".to_string(),
            "damage_enabled=false".to_string(),
        ],
    )
    .unwrap();
    let mut sim = Simulation::new(&config).unwrap();
    let records = config.material_records().unwrap();
    let c_p = records[0].sonic_speed();
    eprintln!(
        "dt = {:.6e}  steps = {}  c_p = {:.4}  h/c_p = {:.6e}",
        sim.model.dt,
        sim.total_steps(),
        c_p,
        0.05 / c_p
    );
    let t0 = std::time::Instant::now();
    let (samples, skipped) = sim.run_dsif_series(20).unwrap();
    eprintln!("run took {:.1} s, skipped {}", t0.elapsed().as_secs_f64(), skipped);
    println!("time,k1,k2");
    for s in &samples {
        println!("{:.9e},{:.6e},{:.6e}", s.time, s.k1, s.k2);
    }
    let max_k1 = samples.iter().map(|s| s.k1.abs()).fold(0.0f64, f64::max);
    let max_k2 = samples.iter().map(|s| s.k2.abs()).fold(0.0f64, f64::max);
    let t_arr = 0.05 / c_p;
    for frac in [0.02, 0.05, 0.10, 0.20] {
        let t_rise = samples
            .iter()
            .find(|s| s.k1.abs() > frac * max_k1)
            .map(|s| s.time)
            .unwrap_or(f64::NAN);
        eprintln!("frac {frac:.2}: t_rise = {:.4e}  ratio vs h/c_p = {:.3}", t_rise, t_rise / t_arr);
    }
    let t_peak = samples
        .iter()
        .max_by(|a, b| a.k1.abs().total_cmp(&b.k1.abs()))
        .map(|s| s.time)
        .unwrap();
    eprintln!(
        "max|K1| = {:.4e}  max|K2| = {:.4e}  ratio = {:.4}  t_peak = {:.4e} ({:.2}x t_arr)",
        max_k1,
        max_k2,
        max_k2 / max_k1,
        t_peak,
        t_peak / t_arr
    );
}

fn c7(theta_deg: f64, nx: u32, total: f64) {
    let theta = theta_deg.to_radians();
    let ny = nx * 2;
    let (config, _) = load_preset(
        "centred_crack",
        &[
            format!("theta={theta}"),
            format!("grid.nx={nx}"),
            format!("grid.ny={ny}"),
            format!("total_time={total}"),
        ],
    )
    .unwrap();
    let mut sim = Simulation::new(&config).unwrap();
    eprintln!(
        "theta = {theta_deg} deg  grid {nx}x{ny}  dt = {:.4e}  steps = {}",
        sim.model.dt,
        sim.total_steps()
    );
    let t0 = std::time::Instant::now();
    let steps = sim.total_steps();
    let mut broken = 0usize;
    for s in 1..=steps {
        broken += sim.model.step().unwrap().broken.len();
        if s % (steps / 10).max(1) == 0 {
            eprintln!(
                "  step {s}/{steps}  t = {:.3e}  broken = {broken}  [{:.0} s]",
                sim.model.state.time,
                t0.elapsed().as_secs_f64()
            );
        }
    }
    eprintln!("run took {:.1} s, broken = {broken}", t0.elapsed().as_secs_f64());
    let phi = sim.phi();
    let dx = sim.model.grid.dx;
    for threshold in [0.25, 0.35, 0.45] {
        let clusters = crack_path(
            &sim.model.grid.positions,
            &phi,
            &sim.baseline_phi,
            threshold,
            2.05 * dx,
        );
        eprintln!("threshold {threshold}: {} clusters", clusters.len());
        for (i, c) in clusters.iter().enumerate().take(6) {
            eprintln!(
                "  #{i}: count = {}  angle = {:.2} deg  bbox = ({:.4},{:.4})..({:.4},{:.4})",
                c.count, c.angle_deg, c.min.x, c.min.y, c.max.x, c.max.y
            );
        }
    }
}
