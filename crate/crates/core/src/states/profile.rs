use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Values below this fraction of the peak are set to zero.
pub const SUPPORT_TRUNCATION: f64 = 1e-14;
/// Allowed relative mismatch between the trapezoid mass and `N`.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Uniform grid `x₀ + iΔx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, n_points: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite() && x0.is_finite()) || n_points < 2 {
            return Err(Error::invalid(format!("bad grid x0={x0} dx={dx} n={n_points}")));
        }
        Ok(Self { x0, dx, n_points })
    }

    /// `n_points` points from `lo` to `hi` inclusive.
    pub fn spanning(lo: f64, hi: f64, n_points: usize) -> Result<Self> {
        if !(hi > lo) || n_points < 2 {
            return Err(Error::invalid(format!("bad grid span [{lo}, {hi}] with {n_points} points")));
        }
        Self::new(lo, (hi - lo) / (n_points - 1) as f64, n_points)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn last(&self) -> f64 {
        self.point(self.n_points - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.point(i))
    }
}

/// One-body density sampled on a uniform grid, read as its piecewise-linear
/// interpolant (zero outside the grid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    grid: Grid,
    values: Vec<f64>,
    n_particles: f64,
}

impl DensityProfile {
    /// Builds a profile and checks its trapezoid mass against `n_particles`.
    pub fn new(grid: Grid, values: Vec<f64>, n_particles: f64) -> Result<Self> {
        let mut profile = Self::from_values(grid, values)?;
        let mass = profile.n_particles;
        let relative = (mass - n_particles).abs() / n_particles.max(f64::MIN_POSITIVE);
        if relative > MASS_TOLERANCE {
            return Err(Error::NormalizationDrift {
                mass,
                n_particles,
                relative,
            });
        }
        profile.n_particles = n_particles;
        Ok(profile)
    }

    /// Builds a profile whose particle number is its own trapezoid mass.
    pub fn from_values(grid: Grid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points {
            return Err(Error::invalid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.n_points
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid(format!("density values must be finite and nonnegative, found {bad}")));
        }
        let peak = values.iter().cloned().fold(0.0, f64::max);
        for v in values.iter_mut() {
            if *v < SUPPORT_TRUNCATION * peak {
                *v = 0.0;
            }
        }
        let mass = trapezoid(&values, grid.dx);
        Ok(Self {
            grid,
            values,
            n_particles: mass,
        })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_points],
            n_particles: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn n_particles(&self) -> f64 {
        self.n_particles
    }

    pub fn mass(&self) -> f64 {
        trapezoid(&self.values, self.grid.dx)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    /// `∫ρ^p` by the trapezoid rule, Richardson-corrected when the `h` and
    /// `2h` sums disagree beyond `1e-8` relative.
    pub fn power_integral(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::invalid(format!("power must be at least 1, got {p}")));
        }
        Ok(self.integral_of(|r| r.powf(p)))
    }

    /// `∫ g(ρ(x)) dx` with the same refinement rule as [`Self::power_integral`];
    /// `g(0)` must be `0`.
    pub fn integral_of(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mapped: Vec<f64> = self.values.iter().map(|&r| if r == 0.0 { 0.0 } else { g(r) }).collect();
        let fine = trapezoid(&mapped, self.grid.dx);
        if !(self.grid.n_points - 1).is_multiple_of(2) || self.grid.n_points < 5 {
            return fine;
        }
        let coarse_values: Vec<f64> = mapped.iter().step_by(2).cloned().collect();
        let coarse = trapezoid(&coarse_values, 2.0 * self.grid.dx);
        if (fine - coarse).abs() <= 1e-8 * fine.abs() {
            fine
        } else {
            (4.0 * fine - coarse) / 3.0
        }
    }

    /// Same density on a dilated axis, `λρ(λx)`.
    pub fn dilated(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("dilation must be positive, got {lambda}")));
        }
        let grid = Grid::new(self.grid.x0 / lambda, self.grid.dx / lambda, self.grid.n_points)?;
        Ok(Self {
            grid,
            values: self.values.iter().map(|v| v * lambda).collect(),
            n_particles: self.n_particles,
        })
    }

    /// Writes `x,rho` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,rho")?;
        for (x, r) in self.grid.points().zip(&self.values) {
            writeln!(out, "{x:.11e},{r:.11e}")?;
        }
        Ok(())
    }
}

pub(crate) fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values {
        [] => 0.0,
        [_] => 0.0,
        [first, .., last] => dx * (values.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}
