//! First-order Godunov finite-volume solver for `∂t u + ∂x f(u) = 0` on
//! `[0, T] × [0, L]`, used to generate measurements and reference fields.
//!
//! Boundaries use one ghost cell per side holding the boundary trace at the
//! current time. The interface Riemann solver then decides whether that
//! value actually enters the domain.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::Flux;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub length: f64,
    pub time: f64,
    pub nx: usize,
    pub cfl: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            length: 1.0,
            time: 1.0,
            nx: 200,
            cfl: 0.9,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!("length must be positive, got {}", self.length)));
        }
        if !(self.time > 0.0 && self.time.is_finite()) {
            return Err(Error::Config(format!("time must be positive, got {}", self.time)));
        }
        if self.nx < 2 {
            return Err(Error::Config(format!("need at least 2 cells, got {}", self.nx)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    /// Number of time steps: the smallest count whose uniform step honours
    /// `Δt ≤ cfl · Δx / max_speed`.
    pub fn time_steps(&self, max_speed: f64) -> usize {
        let dt_max = self.cfl * self.dx() / max_speed;
        ((self.time / dt_max).ceil() as usize).max(1)
    }

    pub fn cell_centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.nx).map(|j| (j as f64 + 0.5) * dx).collect()
    }
}

/// Initial density, sampled at cell centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialProfile {
    Constant {
        value: f64,
    },
    /// `left` for `x < position`, `right` otherwise.
    Riemann {
        left: f64,
        right: f64,
        position: f64,
    },
    /// `values[k]` on the `k`-th interval cut by the increasing `breakpoints`.
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl InitialProfile {
    pub fn validate(&self) -> Result<()> {
        let values: &[f64] = match self {
            InitialProfile::Constant { value } => std::slice::from_ref(value),
            InitialProfile::Riemann { left, right, .. } => {
                return check_density(*left).and(check_density(*right))
            }
            InitialProfile::Piecewise {
                breakpoints,
                values,
            } => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::Config(
                        "piecewise profile needs one more value than breakpoints".into(),
                    ));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("breakpoints must increase".into()));
                }
                values
            }
        };
        values.iter().try_for_each(|&v| check_density(v))
    }

    pub fn at(&self, x: f64) -> f64 {
        match self {
            InitialProfile::Constant { value } => *value,
            InitialProfile::Riemann {
                left,
                right,
                position,
            } => {
                if x < *position {
                    *left
                } else {
                    *right
                }
            }
            InitialProfile::Piecewise {
                breakpoints,
                values,
            } => values[breakpoints.iter().filter(|&&b| b <= x).count()],
        }
    }

    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        grid.cell_centers().into_iter().map(|x| self.at(x)).collect()
    }

    /// Density adjacent to the left and right ends of `[0, length]`.
    pub fn end_values(&self, length: f64) -> (f64, f64) {
        match self {
            InitialProfile::Piecewise { values, .. } => (values[0], values[values.len() - 1]),
            _ => (self.at(0.0), self.at(length)),
        }
    }
}

/// A boundary density as a function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BoundarySignal {
    Constant(f64),
    /// Piecewise-linear through `(times[k], values[k])`, held constant outside.
    Series { times: Vec<f64>, values: Vec<f64> },
}

impl BoundarySignal {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            BoundarySignal::Constant(v) => *v,
            BoundarySignal::Series { times, values } => {
                let k = times.partition_point(|&s| s <= t);
                if k == 0 {
                    values[0]
                } else if k == times.len() {
                    values[k - 1]
                } else {
                    let w = (t - times[k - 1]) / (times[k] - times[k - 1]);
                    values[k - 1] + w * (values[k] - values[k - 1])
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BoundarySignal::Constant(v) => check_density(*v),
            BoundarySignal::Series { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::Config(
                        "boundary series needs matching, non-empty times and values".into(),
                    ));
                }
                if times.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Config("boundary times must increase".into()));
                }
                values.iter().try_for_each(|&v| check_density(v))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub left: BoundarySignal,
    pub right: BoundarySignal,
}

impl BoundaryTrace {
    pub fn constant(left: f64, right: f64) -> Self {
        Self {
            left: BoundarySignal::Constant(left),
            right: BoundarySignal::Constant(right),
        }
    }
}

fn check_density(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::DensityRange { value: u })
    }
}

/// Exact Riemann flux at an interface for a concave flux: the minimum of
/// `f` over `[u_l, u_r]` when `u_l ≤ u_r`, the maximum over `[u_r, u_l]`
/// otherwise.
pub fn godunov_flux<F: Flux>(u_l: f64, u_r: f64, flux: &F) -> Result<f64> {
    check_density(u_l)?;
    check_density(u_r)?;
    Ok(interface_flux(u_l, u_r, flux))
}

#[inline]
fn interface_flux<F: Flux>(u_l: f64, u_r: f64, flux: &F) -> f64 {
    let (fl, fr) = (flux.flux(u_l), flux.flux(u_r));
    if u_l <= u_r {
        fl.min(fr)
    } else {
        let uc = flux.critical_density();
        if u_r <= uc && uc <= u_l {
            flux.flux(uc)
        } else {
            fl.max(fr)
        }
    }
}

/// Interface fluxes `F_{1/2}, …, F_{nx+1/2}` for cell averages `u` with
/// ghost values on both sides.
pub fn interface_fluxes<F: Flux>(u: &[f64], left_ghost: f64, right_ghost: f64, flux: &F) -> Vec<f64> {
    let nx = u.len();
    let mut out = Vec::with_capacity(nx + 1);
    out.push(interface_flux(left_ghost, u[0], flux));
    for j in 1..nx {
        out.push(interface_flux(u[j - 1], u[j], flux));
    }
    out.push(interface_flux(u[nx - 1], right_ghost, flux));
    out
}

/// One conservative update `u_j − (Δt/Δx)(F_{j+1/2} − F_{j−1/2})`.
pub fn step<F: Flux>(u: &[f64], left_ghost: f64, right_ghost: f64, ratio: f64, flux: &F) -> Vec<f64> {
    let fluxes = interface_fluxes(u, left_ghost, right_ghost, flux);
    u.iter()
        .enumerate()
        .map(|(j, &v)| v - ratio * (fluxes[j + 1] - fluxes[j]))
        .collect()
}

/// Cell-average solution on a uniform space-time grid; row 0 is the
/// initial data.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    pub length: f64,
    pub time: f64,
    pub nx: usize,
    pub nt: usize,
    pub v_f: f64,
    values: Vec<f64>,
}

impl DensityField {
    pub fn from_rows(length: f64, time: f64, v_f: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        let nx = rows.first().map(Vec::len).unwrap_or(0);
        if rows.len() < 2 || nx < 1 || rows.iter().any(|r| r.len() != nx) {
            return Err(Error::parse("density field", "rows must be non-empty and equally long"));
        }
        Ok(Self {
            length,
            time,
            nx,
            nt: rows.len() - 1,
            v_f,
            values: rows.concat(),
        })
    }

    pub fn dx(&self) -> f64 {
        self.length / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        self.time / self.nt as f64
    }

    pub fn x_at(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx()
    }

    pub fn t_at(&self, k: usize) -> f64 {
        if k == self.nt {
            self.time
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.nx..(k + 1) * self.nx]
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.values[k * self.nx + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid nodes `(t_k, x_j)` in row-major order, matching [`values`](Self::values).
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.values.len());
        for k in 0..=self.nt {
            let t = self.t_at(k);
            for j in 0..self.nx {
                out.push((t, self.x_at(j)));
            }
        }
        out
    }

    /// Header `nx nt L T v_f`, then one line of `nx` values per stored time.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{} {} {:e} {:e} {:e}", self.nx, self.nt, self.length, self.time, self.v_f)
            .unwrap();
        for k in 0..=self.nt {
            let line: Vec<String> = self.row(k).iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::parse("density field", "missing header"))?
            .split_whitespace()
            .collect();
        if header.len() != 5 {
            return Err(Error::parse("density field", "header must be `nx nt L T v_f`"));
        }
        let bad = |e: &dyn std::fmt::Display| Error::parse("density field", e.to_string());
        let nx: usize = header[0].parse().map_err(|e| bad(&e))?;
        let nt: usize = header[1].parse().map_err(|e| bad(&e))?;
        let length: f64 = header[2].parse().map_err(|e| bad(&e))?;
        let time: f64 = header[3].parse().map_err(|e| bad(&e))?;
        let v_f: f64 = header[4].parse().map_err(|e| bad(&e))?;
        let rows = lines
            .map(|l| {
                l.split_whitespace()
                    .map(|v| v.parse::<f64>().map_err(|e| bad(&e)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != nt + 1 || rows.iter().any(|r| r.len() != nx) {
            return Err(Error::parse(
                "density field",
                format!("expected {} rows of {nx} values", nt + 1),
            ));
        }
        Self::from_rows(length, time, v_f, rows)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

/// Runs the Godunov scheme from `u0` (one value per cell) to `grid.time`.
pub fn simulate<F: Flux>(
    u0: &[f64],
    bc: &BoundaryTrace,
    grid: &GridSpec,
    flux: &F,
    v_f: f64,
) -> Result<DensityField> {
    grid.validate()?;
    bc.left.validate()?;
    bc.right.validate()?;
    if u0.len() != grid.nx {
        return Err(Error::WidthMismatch {
            expected: grid.nx,
            got: u0.len(),
        });
    }
    u0.iter().try_for_each(|&v| check_density(v))?;

    let dx = grid.dx();
    let nt = grid.time_steps(flux.max_speed());
    let dt = grid.time / nt as f64;
    let limit = grid.cfl * dx / flux.max_speed();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, limit });
    }
    let ratio = dt / dx;

    let mut rows = Vec::with_capacity(nt + 1);
    rows.push(u0.to_vec());
    for k in 0..nt {
        let t = k as f64 * dt;
        let next = step(&rows[k], bc.left.at(t), bc.right.at(t), ratio, flux);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("godunov state"));
        }
        rows.push(next);
    }
    DensityField::from_rows(grid.length, grid.time, v_f, rows)
}

/// One measurement `u(t, x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub t: f64,
    pub x: f64,
    pub u: f64,
}

/// Measurements on the initial line and the two boundary cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub points: Vec<Measurement>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One `t x u` line per measurement.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for m in &self.points {
            writeln!(s, "{:.16e} {:.16e} {:.16e}", m.t, m.x, m.u).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let points = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let v: Vec<f64> = l
                    .split_whitespace()
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::parse("dataset", e.to_string()))?;
                match v[..] {
                    [t, x, u] => Ok(Measurement { t, x, u }),
                    _ => Err(Error::parse("dataset", format!("expected `t x u`, got `{l}`"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { points })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

/// Initial row at every cell center, then the first and last cell columns
/// at every stored time, optionally perturbed by Gaussian noise.
pub fn sample_measurements(field: &DensityField, noise_std: f64, seed: u64) -> Result<Dataset> {
    let mut points = Vec::with_capacity(field.nx + 2 * (field.nt + 1));
    for j in 0..field.nx {
        points.push(Measurement {
            t: 0.0,
            x: field.x_at(j),
            u: field.get(0, j),
        });
    }
    for j in [0, field.nx - 1] {
        for k in 0..=field.nt {
            points.push(Measurement {
                t: field.t_at(k),
                x: field.x_at(j),
                u: field.get(k, j),
            });
        }
    }
    if noise_std > 0.0 {
        let normal = Normal::new(0.0, noise_std)
            .map_err(|e| Error::Config(format!("noise level: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in &mut points {
            m.u += normal.sample(&mut rng);
        }
    } else if noise_std < 0.0 || noise_std.is_nan() {
        return Err(Error::Config(format!("noise level must be >= 0, got {noise_std}")));
    }
    Ok(Dataset { points })
}
