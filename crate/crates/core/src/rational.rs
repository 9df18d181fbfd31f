//! Reduced fractions, Farey sequences, regular continued fractions and the
//! popcorn function `g(p/q) = 1/q`.
//!
//! Fractions are stored as reduced `u64` pairs; every product that could
//! exceed 64 bits goes through `u128` or a checked operation.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{ensure, Error, Result};
use crate::math;

/// Stop a floating continued-fraction expansion once the remainder is this
/// close to an integer.
pub const CF_TOL: f64 = 1e-12;

/// Depth cap used when a caller has no opinion.
pub const CF_MAX_DEPTH: usize = 64;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Inverse of `m` modulo `k` via the extended Euclidean algorithm.
///
/// Returns `None` when `gcd(m, k) != 1`. Modulo 1 every residue is 0, so the
/// inverse is 0.
pub fn mod_inverse(m: u64, k: u64) -> Option<u64> {
    if k == 0 {
        return None;
    }
    let (mut old_r, mut r) = (i128::from(m % k), i128::from(k));
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(i128::from(k)) as u64)
}

/// A non-negative fraction `p/q` in lowest terms with `q >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    numer: u64,
    denom: u64,
}

impl Rational {
    pub const ZERO: Rational = Rational { numer: 0, denom: 1 };
    pub const ONE: Rational = Rational { numer: 1, denom: 1 };

    /// Builds `p/q`, reducing to lowest terms.
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::ZeroDenominator);
        }
        let g = gcd(numer, denom);
        Ok(Self {
            numer: numer / g,
            denom: denom / g,
        })
    }

    /// Builds `p/q`, rejecting pairs that are not already coprime.
    pub fn coprime(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::ZeroDenominator);
        }
        if gcd(numer, denom) != 1 {
            return Err(Error::NotCoprime { p: numer, q: denom });
        }
        Ok(Self { numer, denom })
    }

    pub(crate) const fn from_reduced(numer: u64, denom: u64) -> Self {
        Self { numer, denom }
    }

    pub fn numer(self) -> u64 {
        self.numer
    }

    pub fn denom(self) -> u64 {
        self.denom
    }

    pub fn to_f64(self) -> f64 {
        self.numer as f64 / self.denom as f64
    }

    /// Fractional part `{p/q}`; stays reduced.
    pub fn fract(self) -> Self {
        Self {
            numer: self.numer % self.denom,
            denom: self.denom,
        }
    }

    pub fn in_unit_interval(self) -> bool {
        self.numer <= self.denom
    }

    /// `q_self * p_other - p_self * q_other`. Equals 1 exactly when `self`
    /// and `other` are Farey neighbours with `self < other`.
    pub fn determinant(self, other: Rational) -> i128 {
        i128::from(self.denom) * i128::from(other.numer) - i128::from(self.numer) * i128::from(other.denom)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = u128::from(self.numer) * u128::from(other.denom);
        let rhs = u128::from(other.numer) * u128::from(self.denom);
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

/// Mediant `(p_a + p_b)/(q_a + q_b)`, reduced.
///
/// # Panics
///
/// If a numerator or denominator sum overflows `u64`.
pub fn mediant(a: Rational, b: Rational) -> Rational {
    let p = a.numer.checked_add(b.numer).expect("mediant numerator overflow");
    let q = a.denom.checked_add(b.denom).expect("mediant denominator overflow");
    let g = gcd(p, q);
    Rational::from_reduced(p / g, q / g)
}

/// All reduced fractions in `[0, 1]` with denominator at most `order`, in
/// ascending order.
pub fn farey_sequence(order: u64) -> Result<Vec<Rational>> {
    ensure(order >= 1, "order", order as f64, "[1, inf)")?;
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, order);
    let mut out = Vec::new();
    out.push(Rational::ZERO);
    while c <= order {
        let k = (order + b) / d;
        (a, b, c, d) = (c, d, k * c - a, k * d - b);
        out.push(Rational::from_reduced(a, b));
    }
    Ok(out)
}

/// Regular continued fraction `[a_0; a_1, ..., a_D]` with its convergents.
///
/// Convergents use the seeds `p_{-1} = 1, p_{-2} = 0, q_{-1} = 0, q_{-2} = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    coefficients: Vec<u64>,
    convergents: Vec<(u64, u64)>,
    terminated: bool,
}

impl ContinuedFraction {
    fn empty() -> Self {
        Self {
            coefficients: Vec::new(),
            convergents: Vec::new(),
            terminated: false,
        }
    }

    /// Appends a coefficient; returns `false` (leaving `self` untouched) if
    /// the next convergent would overflow.
    fn push(&mut self, a: u64) -> bool {
        let n = self.convergents.len();
        let (p1, q1) = if n >= 1 { self.convergents[n - 1] } else { (1, 0) };
        let (p2, q2) = if n >= 2 {
            self.convergents[n - 2]
        } else if n == 1 {
            (1, 0)
        } else {
            (0, 1)
        };
        let next = a
            .checked_mul(p1)
            .and_then(|v| v.checked_add(p2))
            .zip(a.checked_mul(q1).and_then(|v| v.checked_add(q2)));
        match next {
            Some(pq) => {
                self.coefficients.push(a);
                self.convergents.push(pq);
                true
            }
            None => false,
        }
    }

    pub fn from_coefficients(coefficients: &[u64]) -> Result<Self> {
        let mut cf = Self::empty();
        for (i, &a) in coefficients.iter().enumerate() {
            if i > 0 && a == 0 {
                return Err(Error::OutOfRange {
                    name: "partial quotient",
                    value: 0.0,
                    expected: "[1, inf) beyond a_0",
                });
            }
            if !cf.push(a) {
                return Err(Error::Overflow("continued-fraction convergent"));
            }
        }
        cf.terminated = true;
        Ok(cf)
    }

    /// Exact expansion of a rational by the Euclidean algorithm.
    pub fn of_rational(r: Rational) -> Self {
        let mut cf = Self::empty();
        let (mut num, mut den) = (r.numer, r.denom);
        while den != 0 {
            // Convergents of p/q never exceed (p, q).
            cf.push(num / den);
            (num, den) = (den, num % den);
        }
        cf.terminated = true;
        cf
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    /// `(p_n, q_n)` for `n = 0..=D`.
    pub fn convergents(&self) -> &[(u64, u64)] {
        &self.convergents
    }

    pub fn convergent(&self, n: usize) -> Option<Rational> {
        self.convergents.get(n).map(|&(p, q)| Rational::from_reduced(p, q))
    }

    pub fn last_convergent(&self) -> Rational {
        let (p, q) = *self.convergents.last().expect("at least one coefficient");
        Rational::from_reduced(p, q)
    }

    /// `true` when the expansion ended because the remainder hit an integer
    /// (the input is treated as exactly rational), `false` when it was cut
    /// by the depth limit or by convergent overflow.
    pub fn terminated(&self) -> bool {
        self.terminated
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Regular continued fraction of a non-negative real.
///
/// The expansion stops when the fractional remainder is within `tol` of an
/// integer, when the current convergent already reproduces `x` to floating
/// precision (further coefficients would be rounding noise), after
/// `max_depth` coefficients, or when the next convergent would overflow.
pub fn continued_fraction_of(x: f64, max_depth: usize, tol: f64) -> Result<ContinuedFraction> {
    if !x.is_finite() {
        return Err(Error::NonFinite("x"));
    }
    ensure(x >= 0.0, "x", x, "[0, inf)")?;
    ensure(max_depth >= 1, "max_depth", max_depth as f64, "[1, inf)")?;
    if x >= 1.8e19 {
        return Err(Error::Overflow("leading partial quotient"));
    }
    let mut cf = ContinuedFraction::empty();
    let mut rem = x;
    loop {
        let whole = math::floor(rem);
        let frac = rem - whole;
        let (a, done) = if frac < tol {
            (whole, true)
        } else if 1.0 - frac < tol {
            (whole + 1.0, true)
        } else {
            (whole, false)
        };
        if !cf.push(a as u64) {
            break;
        }
        if done {
            cf.terminated = true;
            break;
        }
        if cf.len() >= max_depth {
            break;
        }
        let (p, q) = *cf.convergents.last().unwrap();
        if math::abs(x - p as f64 / q as f64) <= 2.0 * math::EPS * x {
            break;
        }
        rem = 1.0 / frac;
    }
    Ok(cf)
}

/// Smallest-denominator convergent `p/q` of `x` with `q <= q_max` and
/// `|x - p/q| <= delta`.
///
/// Any fraction within `1/(2 q^2)` of `x` is a convergent, so for
/// `delta < 1/(2 q_max^2)` this is also the smallest-denominator fraction in
/// the window.
pub fn detect_rational(x: f64, q_max: u64, delta: f64) -> Option<Rational> {
    if !x.is_finite() || x < 0.0 || q_max == 0 {
        return None;
    }
    let cf = continued_fraction_of(x, CF_MAX_DEPTH, CF_TOL).ok()?;
    cf.convergents()
        .iter()
        .take_while(|&&(_, q)| q <= q_max)
        .find(|&&(p, q)| math::abs(x - p as f64 / q as f64) <= delta)
        .map(|&(p, q)| Rational::from_reduced(p, q))
}

/// How a floating-point abscissa is recognised as rational.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionPolicy {
    pub q_max: u64,
    pub delta: f64,
}

impl Default for DetectionPolicy {
    fn default() -> Self {
        Self {
            q_max: 10_000,
            delta: 1e-12,
        }
    }
}

/// Popcorn function at an exact fraction, as the exact value `1/q`.
pub fn popcorn_exact(x: Rational) -> Result<Rational> {
    ensure(x.in_unit_interval(), "x", x.to_f64(), "[0, 1]")?;
    Ok(Rational::from_reduced(1, x.denom))
}

/// Popcorn function at an exact fraction: `1/q`, correctly rounded.
pub fn popcorn(x: Rational) -> Result<f64> {
    popcorn_exact(x).map(Rational::to_f64)
}

/// Popcorn function at a float. Values that no convergent matches under
/// `policy` count as irrational and map to 0.
pub fn popcorn_real(x: f64, policy: DetectionPolicy) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("x"));
    }
    ensure((0.0..=1.0).contains(&x), "x", x, "[0, 1]")?;
    Ok(match detect_rational(x, policy.q_max, policy.delta) {
        Some(r) => 1.0 / r.denom as f64,
        None => 0.0,
    })
}

/// Where the first visible tree along the ray through `(p, q)` appears on the
/// viewing segment, and its apparent height: `(p/(p+q), 1/(p+q))`.
pub fn orchard_projection(p: u64, q: u64) -> Result<(f64, f64)> {
    ensure(p >= 1 && q >= 1, "p, q", p.min(q) as f64, "[1, inf)")?;
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    let s = (p + q) as f64;
    Ok((p as f64 / s, 1.0 / s))
}

/// Probability that two independent `f^n`-distributed integers have ratio
/// `p/(p+q)`: `sum_{n>=1} (1-eps)^{n(p+q)} = (1-eps)^{p+q} / (1 - (1-eps)^{p+q})`.
pub fn quotient_distribution(p: u64, q: u64, eps: f64) -> Result<f64> {
    ensure(eps > 0.0 && eps < 1.0, "eps", eps, "(0, 1)")?;
    if gcd(p, q) != 1 {
        return Err(Error::NotCoprime { p, q });
    }
    let s = (p + q) as f64;
    let log_f = math::ln_1p(-eps);
    Ok(math::exp(s * log_f) / -math::exp_m1(s * log_f))
}
