//! Average magnetization after five steps on every lattice size, and the
//! largest spread between sizes at each angle.

use gpeps::analysis::{run_sweep, theta_grid, EngineConfig, SweepPlan};
use gpeps::lattice::{Device, SystemSize};

fn main() -> gpeps::error::Result<()> {
    let sizes = [
        SystemSize::Device(Device::Eagle127),
        SystemSize::Device(Device::Osprey433),
        SystemSize::Device(Device::Condor1121),
        SystemSize::Infinite,
    ];
    let thetas = theta_grid(17);
    let mut table = Vec::new();
    for size in sizes {
        let plan = SweepPlan {
            size,
            steps: 5,
            thetas: thetas.clone(),
            chis: vec![32],
            observables: vec!["avg_z".parse()?],
            engine: EngineConfig::default(),
            threads: 1,
        };
        let values: Vec<f64> = run_sweep(&plan)?.iter().map(|r| r.value.unwrap_or(f64::NAN)).collect();
        table.push(values);
    }

    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}", "theta", "127", "433", "1121", "inf", "spread");
    let mut worst = 0.0f64;
    for (i, theta) in thetas.iter().enumerate() {
        let col: Vec<f64> = table.iter().map(|v| v[i]).collect();
        let spread = col.iter().cloned().fold(f64::MIN, f64::max) - col.iter().cloned().fold(f64::MAX, f64::min);
        worst = worst.max(spread);
        println!("{theta:>8.4} {:>10.6} {:>10.6} {:>10.6} {:>10.6} {spread:>10.2e}", col[0], col[1], col[2], col[3]);
    }
    println!("max spread across sizes: {worst:.3e}");
    Ok(())
}
