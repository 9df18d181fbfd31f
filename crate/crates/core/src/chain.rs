//! Spectral density of the ensemble of path graphs with length law `f^n`.
//!
//! A chain of `n` sites has adjacency eigenvalues `2 cos(pi k / (n + 1))`,
//! `k = 1..n`. Weighting chain `n` by `f^n` and replacing each delta peak by
//! the unit-height Lorentzian `y^2 / (xi^2 + y^2)` gives
//!
//! ```text
//! rho(lambda) = sum_{n=1}^{n_max} f^n sum_{k=1}^{n} y^2 / ((lambda - lambda_{k,n})^2 + y^2)
//! ```
//!
//! At `lambda = 2 cos(pi p / (p + q))` every chain with `n + 1` divisible by
//! `p + q` contributes a full peak, so the height tends to
//! `f^{p+q-1} / (1 - f^{p+q})` as `y -> 0`. Heights, not integrated weights:
//! `rho` is not normalised.

use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};
use crate::math::{self, PI};
use crate::rational::{gcd, mediant, Rational};

/// Default certified truncation target `f^{n_max+1} / (1 - f)`.
pub const DEFAULT_TAIL_TARGET: f64 = 1e-12;

/// Parameters of the weighted linear-chain ensemble.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainEnsemble {
    f: f64,
    y: f64,
    n_max: usize,
}

impl ChainEnsemble {
    /// Ensemble with `n_max` picked so the weight tail stays below
    /// [`DEFAULT_TAIL_TARGET`].
    pub fn new(f: f64, y: f64) -> Result<Self> {
        Self::check(f, y)?;
        Ok(Self {
            f,
            y,
            n_max: n_max_for_tail(f, DEFAULT_TAIL_TARGET),
        })
    }

    pub fn with_n_max(f: f64, y: f64, n_max: usize) -> Result<Self> {
        Self::check(f, y)?;
        ensure(n_max >= 1, "n_max", n_max as f64, "[1, inf)")?;
        Ok(Self { f, y, n_max })
    }

    fn check(f: f64, y: f64) -> Result<()> {
        ensure(f > 0.0 && f < 1.0, "f", f, "(0, 1)")?;
        ensure(y > 0.0 && y.is_finite(), "y", y, "(0, inf)")
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Total weight dropped by truncating at `n_max`: `f^{n_max+1} / (1 - f)`.
    pub fn tail_bound(&self) -> f64 {
        math::powk(self.f, (self.n_max + 1) as f64) / (1.0 - self.f)
    }
}

fn n_max_for_tail(f: f64, target: f64) -> usize {
    // f^{n+1} / (1 - f) < target  <=>  n + 1 > ln(target (1 - f)) / ln f
    let guess = math::ceil(math::ln(target * (1.0 - f)) / math::ln(f)) as usize;
    let mut n = guess.saturating_sub(1).max(1);
    while math::powk(f, (n + 1) as f64) / (1.0 - f) >= target {
        n += 1;
    }
    n
}

/// `lambda_{k,n} = 2 cos(pi k / (n + 1))`, written as a sine so the middle
/// eigenvalue of an odd chain is exactly zero and `k <-> n + 1 - k` is an
/// exact sign flip.
#[inline]
pub(crate) fn path_eigenvalue(k: usize, n: usize) -> f64 {
    let m = (n + 1) as f64;
    let offset = (n + 1) as f64 - 2.0 * k as f64;
    2.0 * math::sin(PI * offset / (2.0 * m))
}

/// Adjacency spectrum of the `n`-site path, in descending order.
pub fn path_eigenvalues(n: usize) -> Result<Vec<f64>> {
    ensure(n >= 1, "n", n as f64, "[1, inf)")?;
    Ok((1..=n).map(|k| path_eigenvalue(k, n)).collect())
}

/// Regularised spectral density at `lambda`, summed directly.
///
/// Cost is `O(n_max^2)`; use [`DensityKernel`] for many abscissae.
pub fn spectral_density(lambda: f64, ens: &ChainEnsemble) -> f64 {
    let y2 = ens.y * ens.y;
    let mut total = 0.0;
    let mut weight = 1.0;
    for n in 1..=ens.n_max {
        weight *= ens.f;
        let mut inner = 0.0;
        for k in 1..=n {
            let d = lambda - path_eigenvalue(k, n);
            inner += y2 / (d * d + y2);
        }
        total += weight * inner;
    }
    total
}

/// Precomputed eigenvalue table for repeated density evaluation.
///
/// Summation order matches [`spectral_density`], so results are bitwise
/// identical to the direct routine and independent of how a grid is split.
#[derive(Clone, Debug)]
pub struct DensityKernel {
    y2: f64,
    weights: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl DensityKernel {
    pub fn new(ens: &ChainEnsemble) -> Self {
        let n_max = ens.n_max;
        let mut weights = Vec::with_capacity(n_max);
        let mut eigenvalues = Vec::with_capacity(n_max * (n_max + 1) / 2);
        let mut weight = 1.0;
        for n in 1..=n_max {
            weight *= ens.f;
            weights.push(weight);
            eigenvalues.extend((1..=n).map(|k| path_eigenvalue(k, n)));
        }
        Self {
            y2: ens.y * ens.y,
            weights,
            eigenvalues,
        }
    }

    pub fn density(&self, lambda: f64) -> f64 {
        let mut total = 0.0;
        let mut start = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            let block = &self.eigenvalues[start..start + i + 1];
            start += i + 1;
            let mut inner = 0.0;
            for &e in block {
                let d = lambda - e;
                inner += self.y2 / (d * d + self.y2);
            }
            total += w * inner;
        }
        total
    }
}

fn check_pair(p: u64, q: u64) -> Result<()> {
    ensure(p >= 1 && q >= 1, "p, q", p.min(q) as f64, "[1, inf)")?;
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    Ok(())
}

/// Height of the peak labelled `p/(p+q)` in the `y -> 0` limit:
/// `sum_{s>=1} f^{(p+q)s - 1} = f^{p+q-1} / (1 - f^{p+q})`.
pub fn peak_intensity(p: u64, q: u64, f: f64) -> Result<f64> {
    check_pair(p, q)?;
    ensure(f > 0.0 && f < 1.0, "f", f, "(0, 1)")?;
    let s = (p + q) as f64;
    let log_f = math::ln(f);
    Ok(math::exp((s - 1.0) * log_f) / -math::exp_m1(s * log_f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `sign * 2 cos(pi p / (p + q))`.
pub fn peak_position(p: u64, q: u64, sign: Sign) -> Result<f64> {
    check_pair(p, q)?;
    let s = (p + q) as f64;
    let offset = q as f64 - p as f64;
    Ok(sign.value() * 2.0 * math::sin(PI * offset / (2.0 * s)))
}

/// A labelled spectral peak. The label `a/b` stands for `p = a`, `q = b - a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub label: Rational,
    pub position: f64,
    pub intensity: f64,
}

impl Peak {
    pub fn p(&self) -> u64 {
        self.label.numer()
    }

    pub fn q(&self) -> u64 {
        self.label.denom() - self.label.numer()
    }
}

/// A monotone run of peaks generated by repeated mediants, in the mirrored
/// (`-lambda`) orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakSeries {
    peaks: Vec<Peak>,
}

impl PeakSeries {
    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }
}

/// Starting from `left`, replaces the current label by its mediant with
/// `right` `depth` times and records each label's peak.
///
/// `(0/1, 1/1)` yields the edge series `k/(k+1)`; `(1/1, 1/2)` yields the
/// interior series `k'/(2k'-1)`, `k' = 2, 3, ...` accumulating at `1/2`.
pub fn build_peak_series(left: Rational, right: Rational, depth: usize, f: f64) -> Result<PeakSeries> {
    ensure(depth >= 1, "depth", depth as f64, "[1, inf)")?;
    ensure(left != right, "left", left.to_f64(), "a label different from right")?;
    ensure(f > 0.0 && f < 1.0, "f", f, "(0, 1)")?;
    let mut peaks = Vec::with_capacity(depth);
    let mut current = left;
    for _ in 0..depth {
        current = mediant(current, right);
        let (a, b) = (current.numer(), current.denom());
        ensure(a >= 1 && a < b, "label", current.to_f64(), "(0, 1)")?;
        peaks.push(Peak {
            label: current,
            position: peak_position(a, b - a, Sign::Minus)?,
            intensity: peak_intensity(a, b - a, f)?,
        });
    }
    let increasing = peaks[0].label < right;
    let monotone = peaks.windows(2).all(|w| {
        if increasing {
            w[0].position < w[1].position
        } else {
            w[0].position > w[1].position
        }
    });
    debug_assert!(monotone, "mediant series must be monotone");
    Ok(PeakSeries { peaks })
}

/// Main series `k/(k+1)`, `k = 1..=depth`, approaching the edge `lambda = 2`.
pub fn edge_series(depth: usize, f: f64) -> Result<PeakSeries> {
    build_peak_series(Rational::ZERO, Rational::ONE, depth, f)
}

/// Interior series `k'/(2k'-1)`, `k' = 2..=depth+1`, approaching `lambda = 0`.
pub fn interior_series(depth: usize, f: f64) -> Result<PeakSeries> {
    build_peak_series(Rational::ONE, Rational::from_reduced(1, 2), depth, f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailRegime {
    /// Accumulation at the band edge: regressor `1 / sqrt|lambda_c - lambda|`.
    Edge,
    /// Accumulation inside the band: regressor `1 / |lambda - lambda_c|`.
    Interior,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LifshitzFit {
    pub regime: TailRegime,
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `ln(intensity)` about the fitted line.
    pub residual: f64,
    pub points: usize,
}

/// Slope the tail regression should approach: `pi ln f`.
pub fn lifshitz_target(f: f64) -> f64 {
    PI * math::ln(f)
}

/// Least-squares fit of `ln(intensity)` against the tail regressor of the
/// accumulation point. Edge accumulation (`|lambda_c| = 2`) uses
/// `1/sqrt|lambda_c - lambda|`, interior accumulation uses `1/|lambda - lambda_c|`;
/// in both cases the slope approaches `pi ln f`.
pub fn lifshitz_fit(peaks: &[Peak], accumulation_point: f64) -> Result<LifshitzFit> {
    let regime = if math::abs(accumulation_point) >= 2.0 - 1e-12 {
        TailRegime::Edge
    } else {
        TailRegime::Interior
    };
    let xs: Vec<f64> = peaks
        .iter()
        .map(|pk| {
            let gap = math::abs(accumulation_point - pk.position);
            match regime {
                TailRegime::Edge => 1.0 / math::sqrt(gap),
                TailRegime::Interior => 1.0 / gap,
            }
        })
        .collect();
    let ys: Vec<f64> = peaks.iter().map(|pk| math::ln(pk.intensity)).collect();

    let mut sorted: Vec<f64> = xs.iter().copied().filter(|x| x.is_finite()).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    if sorted.len() < 3 || sorted.len() != xs.len() {
        return Err(Error::DegenerateRegressor(sorted.len()));
    }

    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(LifshitzFit {
        regime,
        slope,
        intercept,
        residual: math::sqrt(sse / n),
        points: xs.len(),
    })
}
