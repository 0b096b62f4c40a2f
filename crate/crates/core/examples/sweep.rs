//! A reduced sweep over block counts and seeds, writing the summary tables,
//! per-run histories and heatmap grids.
//!
//! ```bash
//! cargo run --release --example sweep -- [output-dir]
//! ```

use std::path::PathBuf;

use vspinn::experiment::{self, ExperimentConfig, SWEEP_FILE};

fn main() -> vspinn::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("vspinn-sweep-example"), PathBuf::from);
    std::fs::create_dir_all(&out)?;

    let mut cfg = ExperimentConfig::default();
    cfg.train.max_iters = 400;
    cfg.train.n_collocation = 1000;
    cfg.sweep = vec![0, 1, 3];
    cfg.seeds = vec![0, 1];

    let sim = experiment::simulate(&cfg, &out)?;
    println!("simulated {} x {} field, {} measurements", sim.nt + 1, sim.nx, sim.measurements);
    experiment::sweep(&cfg, &out, |row| {
        println!("  n = {} seed = {}: relative L2 {:.4e}", row.n, row.seed, row.relative_l2);
    })?;
    print!("{}", std::fs::read_to_string(out.join(SWEEP_FILE))?);
    println!("outputs in {}", out.display());
    Ok(())
}
