//! Uniform grids and parallel evaluation over them.

use anyhow::{ensure, Result};
use popcorn_core::chain::{ChainEnsemble, DensityKernel};
use rayon::prelude::*;

/// `points` values from `min` to `max` inclusive, each computed as
/// `(min (n - 1 - i) + max i) / (n - 1)` so a grid symmetric about 0 is
/// exactly mirror-symmetric and hits 0 exactly when it should.
pub fn uniform_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    ensure!(min.is_finite() && max.is_finite(), "grid bounds must be finite");
    ensure!(min < max, "grid-min {min} must be below grid-max {max}");
    ensure!(points >= 2, "grid needs at least 2 points, got {points}");
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let i = i as f64;
            (min * (last - i) + max * i) / last
        })
        .collect())
}

/// Densities sampled on an ascending grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralGrid {
    pub lambda: Vec<f64>,
    pub rho: Vec<f64>,
}

/// Regularised chain density on `lambda`; each point is summed in a fixed
/// order, so the output does not depend on the number of threads.
pub fn density_on_grid(ens: &ChainEnsemble, lambda: Vec<f64>) -> SpectralGrid {
    let kernel = DensityKernel::new(ens);
    let rho = lambda.par_iter().map(|&l| kernel.density(l)).collect();
    SpectralGrid { lambda, rho }
}

/// Applies a fallible map to every grid point in parallel, keeping order.
pub fn map_grid<T, F>(lambda: &[f64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync,
{
    lambda.par_iter().map(|&l| f(l)).collect()
}
