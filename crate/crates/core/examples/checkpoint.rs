//! Saves a trained stack, reloads it and checks that the evaluation is
//! reproduced exactly.
//!
//! ```bash
//! cargo run --release --example checkpoint
//! ```

use vspinn::experiment::{self, checkpoint_path, ExperimentConfig};
use vspinn::stacked::StackedPinn;

fn main() -> vspinn::Result<()> {
    let dir = std::env::temp_dir().join("vspinn-checkpoint-example");
    std::fs::create_dir_all(&dir)?;
    let mut cfg = ExperimentConfig::default();
    cfg.train.max_iters = 300;
    cfg.train.n_collocation = 1000;

    experiment::simulate(&cfg, &dir)?;
    let outcome = experiment::train_one(&cfg, &dir, 1, 0)?;
    let path = checkpoint_path(&dir, 1, 0);
    println!("trained n = 1, relative L2 {:.6e}, saved to {}", outcome.report.relative_l2, path.display());

    let reloaded = StackedPinn::load(&path)?;
    assert_eq!(reloaded, outcome.model);
    let report = experiment::evaluate(&dir, 1, 0)?;
    assert_eq!(report, outcome.report);
    println!("reloaded model reproduces the report:\n{}", report.to_text());
    Ok(())
}
