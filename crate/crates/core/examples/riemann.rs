//! Godunov solutions of Riemann problems for Greenshields traffic flow.
//!
//! ```bash
//! cargo run --release --example riemann -- [output-dir]
//! ```
//!
//! With an output directory, the shock field is written there as `field.txt`.

use std::path::PathBuf;

use vspinn::godunov::{simulate, BoundaryTrace, DensityField, GridSpec, InitialProfile};
use vspinn::pde::{Flux, GreenshieldsFlux};

fn solve(left: f64, right: f64, flux: &GreenshieldsFlux, grid: &GridSpec) -> vspinn::Result<DensityField> {
    let u0 = InitialProfile::Riemann {
        left,
        right,
        position: 0.25,
    };
    simulate(&u0.sample(grid), &BoundaryTrace::constant(left, right), grid, flux, 1.0)
}

fn sketch(row: &[f64]) -> String {
    const LEVELS: &[u8] = b" .:-=+*#%@";
    row.iter()
        .step_by(row.len() / 60)
        .map(|&v| LEVELS[((v * 9.0).round() as usize).min(9)] as char)
        .collect()
}

fn main() -> vspinn::Result<()> {
    let flux = GreenshieldsFlux::new(1.0)?;
    let grid = GridSpec {
        length: 1.0,
        time: 0.5,
        nx: 400,
        cfl: 0.9,
    };

    let shock = solve(0.1, 0.5, &flux, &grid)?;
    let speed = (flux.flux(0.5) - flux.flux(0.1)) / 0.4;
    let last = shock.row(shock.nt);
    let jump = (0..grid.nx - 1).find(|&j| last[j] < 0.3 && last[j + 1] >= 0.3).unwrap();
    println!("shock 0.1 | 0.5: {} steps of dt = {:.3e}", shock.nt, shock.dt());
    println!("  Rankine-Hugoniot position {:.4}, numerical {:.4}", 0.25 + speed * grid.time, shock.x_at(jump));
    println!("  t = 0    [{}]", sketch(shock.row(0)));
    println!("  t = 0.5  [{}]", sketch(last));

    let fan = solve(0.9, 0.1, &flux, &grid)?;
    println!("rarefaction 0.9 | 0.1:");
    println!("  t = 0    [{}]", sketch(fan.row(0)));
    println!("  t = 0.5  [{}]", sketch(fan.row(fan.nt)));

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        std::fs::create_dir_all(&dir)?;
        shock.save(&dir.join("field.txt"))?;
        println!("wrote {}", dir.join("field.txt").display());
    }
    Ok(())
}
