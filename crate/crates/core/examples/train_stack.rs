//! Trains a plain network and a stack with two residual blocks on the
//! default three-state road scenario, then compares their errors stage by
//! stage.
//!
//! ```bash
//! cargo run --release --example train_stack -- [iterations]
//! ```

use vspinn::experiment::Scenario;
use vspinn::godunov::{sample_measurements, simulate};
use vspinn::metrics::stage_error_table;
use vspinn::trainer::{sample_collocation, train, TrainConfig};

fn main() -> vspinn::Result<()> {
    let iters = std::env::args().nth(1).map_or(1500, |s| s.parse().expect("iteration count"));
    let scenario = Scenario::default();
    let flux = scenario.flux()?;
    let field = simulate(
        &scenario.initial.sample(&scenario.grid),
        &scenario.boundary_trace(),
        &scenario.grid,
        &flux,
        scenario.v_f,
    )?;
    let data = sample_measurements(&field, 0.0, 0)?;
    let colloc = sample_collocation(field.time, field.length, 2000, 1);
    println!("{} measurements, {} collocation points, {iters} iterations", data.len(), colloc.len());

    for n in [0, 2] {
        let cfg = TrainConfig {
            n_blocks: n,
            max_iters: iters,
            n_collocation: colloc.len(),
            ..TrainConfig::default()
        };
        let started = std::time::Instant::now();
        let (model, history) = train(&cfg, &flux, &data, &colloc)?;
        println!(
            "n = {n}: stopped at {} ({:?}) after {:.1?}, best loss {:.4e}, alphas {:?}",
            history.stop_iteration,
            history.stop_reason,
            started.elapsed(),
            history.best_total,
            model.alphas()
        );
        for (stage, err) in stage_error_table(&field, &model)? {
            let gamma = model.schedule().stage_viscosity(stage)?;
            println!("  stage {stage} (gamma {gamma:.4}): relative L2 {err:.4e}");
        }
    }
    Ok(())
}
