//! Independent reference solutions for the Godunov solver.

use vspinn::godunov::{simulate, BoundaryTrace, DensityField, GridSpec, InitialProfile};
use vspinn::pde::GreenshieldsFlux;

pub fn riemann_field(left: f64, right: f64, position: f64, nx: usize, time: f64) -> DensityField {
    let grid = GridSpec {
        length: 1.0,
        time,
        nx,
        cfl: 0.9,
    };
    let u0 = InitialProfile::Riemann { left, right, position };
    let flux = GreenshieldsFlux::new(1.0).unwrap();
    simulate(&u0.sample(&grid), &BoundaryTrace::constant(left, right), &grid, &flux, 1.0).unwrap()
}

/// Where the last row first crosses `level`, by linear interpolation
/// between cell centres.
pub fn crossing(field: &DensityField, level: f64) -> f64 {
    let row = field.row(field.nt);
    for j in 0..field.nx - 1 {
        let (a, b) = (row[j] - level, row[j + 1] - level);
        if a == 0.0 {
            return field.x_at(j);
        }
        if a * b < 0.0 {
            let w = a / (a - b);
            return field.x_at(j) + w * field.dx();
        }
    }
    panic!("row never crosses {level}");
}

/// Entropy solution of the Riemann problem for `f(u) = u(1 − u)` at `(t, x)`.
pub fn riemann_exact(left: f64, right: f64, position: f64, t: f64, x: f64) -> f64 {
    let speed = |u: f64| 1.0 - 2.0 * u;
    if left <= right {
        // Shock with Rankine–Hugoniot speed 1 − u_l − u_r.
        let s = 1.0 - left - right;
        if x - position < s * t {
            left
        } else {
            right
        }
    } else {
        let xi = (x - position) / t;
        if xi <= speed(left) {
            left
        } else if xi >= speed(right) {
            right
        } else {
            (1.0 - xi) / 2.0
        }
    }
}

/// `Σ_j |u_j − u(T, x_j)| Δx` on the last row.
pub fn l1_error_last_row(field: &DensityField, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let t = field.t_at(field.nt);
    (0..field.nx)
        .map(|j| (field.get(field.nt, j) - exact(t, field.x_at(j))).abs() * field.dx())
        .sum()
}
