//! Monte-Carlo counterpart of the analytic chain density.
//!
//! Each of the `N - 1` bonds of an `N`-site path is present with probability
//! `f`. The adjacency matrix then splits into independent path blocks, and
//! each block is diagonalised densely, independently of the closed form.

use std::collections::BTreeMap;

use anyhow::{bail, ensure, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Recorded in output metadata so runs can be reproduced bit for bit.
pub const PRNG_ID: &str = "ChaCha8Rng (rand_chacha 0.9) seed_from_u64(seed), stream = sample index";

/// Largest block the dense oracle accepts.
pub const DENSE_MAX: usize = 2000;

#[derive(Clone, Debug, PartialEq)]
pub struct SampledEnsemble {
    pub size: usize,
    pub f: f64,
    pub seed: u64,
    pub stream: u64,
    /// Vertex counts of the connected blocks, left to right; they sum to `size`.
    pub blocks: Vec<usize>,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One sample on stream 0.
pub fn sample_blocks(size: usize, f: f64, seed: u64) -> Result<SampledEnsemble> {
    sample_blocks_stream(size, f, seed, 0)
}

/// One sample on an explicit ChaCha stream; samples of a pooled run use
/// their index as the stream, so the result does not depend on scheduling.
pub fn sample_blocks_stream(size: usize, f: f64, seed: u64, stream: u64) -> Result<SampledEnsemble> {
    ensure!(size >= 1, "size must be at least 1");
    ensure!((0.0..=1.0).contains(&f), "f = {f} is outside [0, 1]");
    let mut rng = rng_for(seed, stream);
    let mut blocks = Vec::new();
    let mut run = 1;
    for _ in 1..size {
        if rng.random_bool(f) {
            run += 1;
        } else {
            blocks.push(run);
            run = 1;
        }
    }
    blocks.push(run);
    Ok(SampledEnsemble {
        size,
        f,
        seed,
        stream,
        blocks,
    })
}

/// Eigenvalues of the `n x n` path adjacency matrix, ascending, from a dense
/// symmetric eigensolver.
pub fn dense_eigenvalues(n: usize) -> Result<Vec<f64>> {
    ensure!(n >= 1, "block length must be at least 1");
    ensure!(n <= DENSE_MAX, "block length {n} exceeds the dense limit {DENSE_MAX}");
    let m = DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Fixed-width histogram on `[min, max)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub min: f64,
    pub max: f64,
    pub counts: Vec<u64>,
    /// Values that fell outside the range.
    pub outside: u64,
}

impl Histogram {
    pub fn new(min: f64, max: f64, bins: usize) -> Result<Self> {
        ensure!(bins >= 1, "histogram needs at least one bin");
        ensure!(
            min.is_finite() && max.is_finite() && min < max,
            "histogram range [{min}, {max}) is empty"
        );
        Ok(Self {
            min,
            max,
            counts: vec![0; bins],
            outside: 0,
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.max - self.min) / self.bins() as f64
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        if !(x >= self.min && x < self.max) {
            return None;
        }
        let i = ((x - self.min) / self.width()) as usize;
        Some(i.min(self.bins() - 1))
    }

    pub fn center(&self, i: usize) -> f64 {
        self.min + (i as f64 + 0.5) * self.width()
    }

    pub fn add(&mut self, x: f64, count: u64) {
        match self.bin_of(x) {
            Some(i) => self.counts[i] += count,
            None => self.outside += count,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside
    }

    /// Fraction of all recorded values in bin `i`.
    pub fn mass(&self, i: usize) -> f64 {
        self.counts[i] as f64 / self.total() as f64
    }

    fn merge(mut self, other: &Histogram) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.outside += other.outside;
        self
    }
}

/// Dense spectra for every distinct block length, computed once.
fn spectra_for<'a, I: IntoIterator<Item = &'a usize>>(lengths: I) -> Result<BTreeMap<usize, Vec<f64>>> {
    let mut distinct: Vec<usize> = lengths.into_iter().copied().collect();
    distinct.sort_unstable();
    distinct.dedup();
    distinct
        .into_par_iter()
        .map(|n| dense_eigenvalues(n).map(|ev| (n, ev)))
        .collect()
}

fn histogram_from(blocks: &[usize], spectra: &BTreeMap<usize, Vec<f64>>, template: &Histogram) -> Histogram {
    let mut per_length: BTreeMap<usize, u64> = BTreeMap::new();
    for &n in blocks {
        *per_length.entry(n).or_default() += 1;
    }
    let mut h = template.clone();
    for (n, times) in per_length {
        for &ev in &spectra[&n] {
            h.add(ev, times);
        }
    }
    h
}

/// Pooled eigenvalue histogram of one sample, one count per eigenvalue.
pub fn empirical_density(ens: &SampledEnsemble, min: f64, max: f64, bins: usize) -> Result<Histogram> {
    if ens.blocks.is_empty() {
        bail!("ensemble has no blocks");
    }
    let template = Histogram::new(min, max, bins)?;
    let spectra = spectra_for(&ens.blocks)?;
    Ok(histogram_from(&ens.blocks, &spectra, &template))
}

/// Configuration of a pooled Monte-Carlo run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PooledRun {
    pub size: usize,
    pub f: f64,
    pub seed: u64,
    pub samples: usize,
    pub min: f64,
    pub max: f64,
    pub bins: usize,
}

/// Histogram pooled over `samples` independent matrices, sample `i` drawn on
/// stream `i` of the base seed. Parallel, but the result is exact integer
/// counts and independent of thread count.
pub fn pooled_density(run: &PooledRun) -> Result<Histogram> {
    ensure!(run.samples >= 1, "need at least one sample");
    let template = Histogram::new(run.min, run.max, run.bins)?;
    let ensembles: Vec<SampledEnsemble> = (0..run.samples as u64)
        .into_par_iter()
        .map(|i| sample_blocks_stream(run.size, run.f, run.seed, i))
        .collect::<Result<_>>()?;
    let spectra = spectra_for(ensembles.iter().flat_map(|e| e.blocks.iter()))?;
    let pooled = ensembles
        .par_iter()
        .map(|e| histogram_from(&e.blocks, &spectra, &template))
        .reduce(|| template.clone(), |a, b| a.merge(&b));
    Ok(pooled)
}

/// Expected fraction of eigenvalues in each bin for an infinite matrix.
///
/// Per site, blocks of `n` vertices occur with density `(1 - f)^2 f^{n-1}`
/// and carry the eigenvalues `2 cos(pi k / (n + 1))`. Blocks are summed
/// until their weight drops below `1e-16`.
pub fn analytic_bin_mass(f: f64, hist: &Histogram) -> Result<Vec<f64>> {
    ensure!((0.0..1.0).contains(&f), "analytic law needs f in [0, 1), got {f}");
    let mut mass = vec![0.0; hist.bins()];
    let mut weight = (1.0 - f) * (1.0 - f);
    let mut n = 1usize;
    while weight >= 1e-16 * (1.0 - f) * (1.0 - f) && n <= 100_000 {
        for k in 1..=n {
            let offset = (n + 1) as f64 - 2.0 * k as f64;
            let ev = 2.0 * (std::f64::consts::PI * offset / (2.0 * (n + 1) as f64)).sin();
            if let Some(i) = hist.bin_of(ev) {
                mass[i] += weight;
            }
        }
        weight *= f;
        n += 1;
    }
    Ok(mass)
}

/// Spectrum of the shifted operator: `lambda' = lambda + 1`.
pub fn laplacian_shift(spectrum: &[f64]) -> Vec<f64> {
    spectrum.iter().map(|l| l + 1.0).collect()
}

/// Inverse of [`laplacian_shift`].
pub fn inverse_laplacian_shift(spectrum: &[f64]) -> Vec<f64> {
    spectrum.iter().map(|l| l - 1.0).collect()
}

/// Squared grid frequency `w^2 = lambda - 2`.
pub fn frequency_squared(lambda: f64) -> f64 {
    lambda - 2.0
}
