//! Binary-mass harmonic chain with infinitely heavy impurities of
//! concentration `f`.
//!
//! Light segments decouple, so the integrated density of states is a sum
//! over segment lengths:
//!
//! ```text
//! N(lambda) = 1 - (1 - f) / f^2 * sum_{n>=1} f^{floor(n pi / theta)},   cos theta = sqrt(lambda + 1) / 2
//! ```
//!
//! The sum `G(z) = sum_{n>=1} z^{floor(n alpha)}` has a continued-fraction
//! form driven by the convergent numerators `p_n` of `alpha`:
//!
//! ```text
//! G(z) = z / (1 - z) / (A_0 + 1 / (A_1 + 1 / (A_2 + ...))),
//! A_n = (z^{-p_n} - z^{-p_{n-2}}) / (z^{-p_{n-1}} - 1)
//! ```

use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};
use crate::math::{self, EPS, PI};
use crate::rational::{continued_fraction_of, ContinuedFraction, CF_MAX_DEPTH, CF_TOL};

/// Series truncation target for the default `n_max`.
const SERIES_TARGET: f64 = 1e-17;
/// `ln A_n` beyond which deeper levels cannot change a double.
const LOG_A_CUTOFF: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DysonChain {
    f: f64,
    n_max: usize,
}

impl DysonChain {
    /// `n_max` chosen so the truncated tail stays below `1e-17` for every
    /// `lambda` (the worst case is `alpha -> 2`).
    pub fn new(f: f64) -> Result<Self> {
        ensure(f > 0.0 && f < 1.0, "f", f, "(0, 1)")?;
        let mut n = 1usize;
        while Self::tail(f, 2.0, n) >= SERIES_TARGET {
            n += 1;
        }
        Ok(Self { f, n_max: n })
    }

    pub fn with_n_max(f: f64, n_max: usize) -> Result<Self> {
        ensure(f > 0.0 && f < 1.0, "f", f, "(0, 1)")?;
        ensure(n_max >= 1, "n_max", n_max as f64, "[1, inf)")?;
        Ok(Self { f, n_max })
    }

    pub fn f(&self) -> f64 {
        self.f
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Bound on `(1 - f)/f^2 * sum_{n > n_max} f^{floor(n alpha)}`.
    fn tail(f: f64, alpha: f64, n_max: usize) -> f64 {
        (1.0 - f) / (f * f) * series_tail(f, alpha, n_max)
    }
}

/// `sum_{n>N} z^{floor(n alpha)} <= z^{(N+1) alpha - 1} / (1 - z^alpha)`.
fn series_tail(z: f64, alpha: f64, n: usize) -> f64 {
    math::powk(z, (n + 1) as f64 * alpha - 1.0) / (1.0 - math::powk(z, alpha))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    ensure(lambda > -1.0 && lambda < 3.0, "lambda", lambda, "(-1, 3)")
}

/// `theta = arccos(sqrt(lambda + 1) / 2)`, in `(0, pi/2)`.
pub fn theta_of_lambda(lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(math::acos(math::sqrt(lambda + 1.0) / 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DosValue {
    pub value: f64,
    pub tail_bound: f64,
}

/// Integrated density of states. `floor` snaps products within `1e-12` of an
/// integer, so rational `pi / theta` does not lose a unit to rounding.
pub fn integrated_dos(lambda: f64, chain: &DysonChain) -> Result<DosValue> {
    let theta = theta_of_lambda(lambda)?;
    let alpha = PI / theta;
    let f = chain.f;
    let log_f = math::ln(f);
    let mut sum = 0.0;
    let mut last = chain.n_max;
    for n in 1..=chain.n_max {
        let term = math::exp(math::floor_snapped(n as f64 * alpha) * log_f);
        if term == 0.0 {
            last = n;
            break;
        }
        sum += term;
    }
    let prefactor = (1.0 - f) / (f * f);
    let tail = if last < chain.n_max {
        0.0
    } else {
        prefactor * series_tail(f, alpha, last)
    };
    Ok(DosValue {
        value: 1.0 - prefactor * sum,
        tail_bound: tail + 4.0 * EPS * (1.0 + prefactor * sum),
    })
}

/// Unmodulated edge form `1 - (1 - f)/f^2 * exp(2 pi ln f / sqrt(3 - lambda))`.
pub fn dos_edge_asymptote(lambda: f64, f: f64) -> Result<f64> {
    check_lambda(lambda)?;
    ensure(lambda > 2.5, "lambda", lambda, "(2.5, 3)")?;
    ensure(f > 0.0 && f < 1.0, "f", f, "(0, 1)")?;
    let lead = math::exp(2.0 * PI * math::ln(f) / math::sqrt(3.0 - lambda));
    Ok(1.0 - (1.0 - f) / (f * f) * lead)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BorweinMethod {
    Series,
    ContinuedFraction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GValue {
    pub value: f64,
    /// Truncation bound plus a rounding allowance.
    pub bound: f64,
}

/// `G(z) = sum_{n>=1} z^{floor(n alpha)}`.
///
/// `depth` caps the number of series terms (series method) or the index of
/// the last continued-fraction level `A_depth` (continued-fraction method).
pub fn borwein_g(z: f64, alpha: f64, depth: usize, method: BorweinMethod) -> Result<GValue> {
    ensure(z > 0.0 && z < 1.0, "z", z, "(0, 1)")?;
    if !alpha.is_finite() {
        return Err(Error::NonFinite("alpha"));
    }
    ensure(alpha >= 1.0, "alpha", alpha, "[1, inf)")?;
    ensure(depth >= 1, "depth", depth as f64, "[1, inf)")?;
    match method {
        BorweinMethod::Series => Ok(g_series(z, alpha, depth)),
        BorweinMethod::ContinuedFraction => g_continued_fraction(z, alpha, depth),
    }
}

fn g_series(z: f64, alpha: f64, max_terms: usize) -> GValue {
    let log_z = math::ln(z);
    let mut sum = 0.0;
    let mut n = 0;
    while n < max_terms {
        n += 1;
        let term = math::exp(math::floor_snapped(n as f64 * alpha) * log_z);
        sum += term;
        if term == 0.0 || series_tail(z, alpha, n) < 0.25 * EPS * sum {
            break;
        }
    }
    GValue {
        value: sum,
        bound: series_tail(z, alpha, n) + 2.0 * EPS * sum,
    }
}

/// Regular expansion of `alpha`, rewritten for an exact rational to the
/// representation with an even last index, which is the one the `A_n`
/// recursion terminates on.
fn expansion(alpha: f64, depth: usize) -> Result<ContinuedFraction> {
    let cf = continued_fraction_of(alpha, (depth + 1).min(CF_MAX_DEPTH), CF_TOL)?;
    if !cf.terminated() {
        return Ok(cf);
    }
    let mut a: Vec<u64> = cf.coefficients().to_vec();
    if a.len() > 1 && *a.last().unwrap() == 1 {
        a.pop();
        *a.last_mut().unwrap() += 1;
    }
    if (a.len() - 1) % 2 == 1 {
        let last = a.pop().unwrap();
        a.push(last - 1);
        a.push(1);
    }
    ContinuedFraction::from_coefficients(&a)
}

fn g_continued_fraction(z: f64, alpha: f64, depth: usize) -> Result<GValue> {
    let cf = expansion(alpha, depth)?;
    let l = -math::ln(z);
    let mut log_a: Vec<f64> = Vec::new();
    let (mut p1, mut p2) = (1.0f64, 0.0f64);
    let mut cut = false;
    for &(p, _) in cf.convergents().iter().take(depth + 1) {
        let p = p as f64;
        let la = (p - p1) * l + math::ln(-math::exp_m1(-(p - p2) * l)) - math::ln(-math::exp_m1(-p1 * l));
        if !la.is_finite() {
            return Err(Error::NonFinite("continued-fraction level"));
        }
        if la > LOG_A_CUTOFF && !log_a.is_empty() {
            cut = true;
            break;
        }
        log_a.push(la);
        (p2, p1) = (p1, p);
    }
    let prefix = math::ln(z) - math::ln(-math::exp_m1(-l));
    if log_a.len() == 1 || log_a[0] > LOG_A_CUTOFF {
        let value = math::exp(prefix - log_a[0]);
        let exact = cut || cf.terminated();
        return Ok(GValue {
            value,
            bound: if exact { 0.0 } else { value } + 4.0 * EPS * value,
        });
    }
    let a: Vec<f64> = log_a.iter().map(|&v| math::exp(v)).collect();
    let evaluate = |levels: usize| {
        let mut v = a[levels - 1];
        for &x in a[..levels - 1].iter().rev() {
            v = x + 1.0 / v;
        }
        math::exp(prefix) / v
    };
    let value = evaluate(a.len());
    let complete = cut || (cf.terminated() && a.len() == cf.len());
    let truncation = if complete {
        0.0
    } else {
        math::abs(value - evaluate(a.len() - 1))
    };
    Ok(GValue {
        value,
        bound: truncation + 8.0 * EPS * value * a.len() as f64,
    })
}
