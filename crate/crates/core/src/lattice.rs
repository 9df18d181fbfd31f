//! Lattice sums over the unit-determinant form
//! `Q(m, n) = (x m - n)^2 / eps + eps m^2 = |m z - n|^2 / Im z`, `z = x + i eps`,
//! and the bridge from `ln|eta|` back to the popcorn function.
//!
//! The first Kronecker limit formula reads
//!
//! ```text
//! sum' Q(m, n)^{-s} = pi / (s - 1) + 2 pi (gamma + ln sqrt(1 / (4 eps)) - 2 ln|eta(z)|) + O(s - 1)
//! ```
//!
//! Near a rational `x = p/q` the dominant part of `-ln|eta(x + i eps)|` is
//! `pi / (12 eps q^2)`, so `sqrt(-(12 eps / pi) ln|eta|)` approximates `1/q`.

use crate::error::{ensure, Error, Result};
use crate::eta::{log_abs_eta, ModularPoint};
use crate::math::{self, PI};
use crate::rational::Rational;
use crate::EULER_GAMMA;

/// `Q(m, n) = (x m - n)^2 / eps + eps m^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticFormQ {
    x: f64,
    eps: f64,
}

impl QuadraticFormQ {
    /// `x` in `[0, 1)`; `x = 0` is the square-lattice limit.
    pub fn new(x: f64, eps: f64) -> Result<Self> {
        ensure((0.0..1.0).contains(&x), "x", x, "[0, 1)")?;
        ensure(eps > 0.0 && eps.is_finite(), "eps", eps, "(0, inf)")?;
        Ok(Self { x, eps })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    #[inline]
    pub fn eval(&self, m: f64, n: f64) -> f64 {
        let d = self.x * m - n;
        d * d / self.eps + self.eps * m * m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsteinSum {
    /// `lattice_sum + tail_correction`.
    pub value: f64,
    /// Sum over `0 < max(|m|, |n|) <= R`.
    pub lattice_sum: f64,
    pub tail_correction: f64,
}

/// Truncated Epstein zeta `sum' Q(m, n)^{-s}` over the square
/// `max(|m|, |n|) <= R`, plus the continuum integral of `Q^{-s}` outside the
/// square of half-side `R + 1/2`:
///
/// ```text
/// T = (R + 1/2)^{2 - 2s} / (2 (s - 1)) * int_0^{2 pi} Q(cos t, sin t)^{-s} max(|cos t|, |sin t|)^{2s - 2} dt
/// ```
pub fn epstein_zeta_truncated(s: f64, form: QuadraticFormQ, radius: u32) -> Result<EpsteinSum> {
    ensure(s > 1.0 && s.is_finite(), "s", s, "(1, inf)")?;
    ensure(radius >= 10, "R", radius as f64, "[10, inf)")?;
    let r = radius as i64;
    // Half lattice (m > 0, or m = 0 and n > 0); the other half is its mirror.
    let mut half = 0.0;
    for m in 0..=r {
        let lo = if m == 0 { 1 } else { -r };
        let mf = m as f64;
        let mut row = 0.0;
        for n in lo..=r {
            row += math::exp(-s * math::ln(form.eval(mf, n as f64)));
        }
        half += row;
    }
    let lattice_sum = 2.0 * half;
    let tail_correction = square_tail(s, form, radius);
    Ok(EpsteinSum {
        value: lattice_sum + tail_correction,
        lattice_sum,
        tail_correction,
    })
}

fn square_tail(s: f64, form: QuadraticFormQ, radius: u32) -> f64 {
    let integrand = |t: f64| {
        let (c, sn) = (math::cos(t), math::sin(t));
        let edge = math::abs(c).max(math::abs(sn));
        math::exp(-s * math::ln(form.eval(c, sn)) + (2.0 * s - 2.0) * math::ln(edge))
    };
    // The integrand has period pi and kinks at multiples of pi/4.
    let quarter = PI / 4.0;
    let mut angular = 0.0;
    for i in 0..4 {
        let a = i as f64 * quarter;
        angular += adaptive_simpson(&integrand, a, a + quarter, 1e-13, 40);
    }
    angular *= 2.0;
    let h = radius as f64 + 0.5;
    math::exp((2.0 - 2.0 * s) * math::ln(h)) / (2.0 * (s - 1.0)) * angular
}

fn adaptive_simpson<F: Fn(f64) -> f64>(g: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (g(a), g(m), g(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(g, a, b, fa, fm, fb, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    g: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (g(lm), g(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || math::abs(delta) <= 15.0 * tol * math::abs(left + right).max(1e-300) {
        return left + right + delta / 15.0;
    }
    simpson_step(g, a, m, fa, flm, fm, left, tol, depth - 1) + simpson_step(g, m, b, fm, frm, fb, right, tol, depth - 1)
}

/// Right side of the first Kronecker limit formula at `s = 1 + tau`.
pub fn kronecker_rhs(form: QuadraticFormQ, tau: f64) -> Result<f64> {
    ensure(tau > 0.0 && tau <= 0.2, "tau", tau, "(0, 0.2]")?;
    let eta = log_abs_eta(ModularPoint::new(form.x, form.eps)?)?;
    let constant = EULER_GAMMA + 0.5 * math::ln(1.0 / (4.0 * form.eps)) - 2.0 * eta.log_abs;
    Ok(PI / tau + 2.0 * PI * constant)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThetaMode {
    /// `pi^2 / (3 eps q^2)`.
    Closed,
    /// `(2 / eps) sum_{j=1}^{terms} (j q)^{-2}` plus an Euler-Maclaurin tail.
    Lattice { terms: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaPeak {
    pub value: f64,
    /// Bound on `|value - exact|`; 0 in closed mode up to rounding.
    pub tail_bound: f64,
}

/// Peak weight `theta(p/q)`; `None` stands for an irrational abscissa, where
/// the weight is 0. Two quadrants of the lattice contribute, hence the 2.
pub fn theta_peak(r: Option<Rational>, eps: f64, mode: ThetaMode) -> Result<ThetaPeak> {
    ensure(eps > 0.0 && eps.is_finite(), "eps", eps, "(0, inf)")?;
    let Some(r) = r else {
        return Ok(ThetaPeak {
            value: 0.0,
            tail_bound: 0.0,
        });
    };
    let q = r.denom() as f64;
    match mode {
        ThetaMode::Closed => Ok(ThetaPeak {
            value: PI * PI / (3.0 * eps * q * q),
            tail_bound: 0.0,
        }),
        ThetaMode::Lattice { terms } => {
            ensure(terms >= 1, "terms", terms as f64, "[1, inf)")?;
            // Sum smallest terms first.
            let mut partial = 0.0;
            for j in (1..=terms).rev() {
                let m = j as f64 * q;
                partial += 1.0 / (m * m);
            }
            let jt = terms as f64;
            // sum_{j>J} j^{-2} = 1/J - 1/(2J^2) + 1/(6J^3) - 1/(30J^5) + ...
            let tail = (1.0 / jt - 0.5 / (jt * jt) + 1.0 / (6.0 * jt * jt * jt)) / (q * q);
            let scale = 2.0 / eps;
            let value = scale * (partial + tail);
            let remainder = scale / (30.0 * jt * jt * jt * jt * jt * q * q);
            Ok(ThetaPeak {
                value,
                tail_bound: remainder + 8.0 * math::EPS * value * (1.0 + math::ln(jt)),
            })
        }
    }
}

/// `sqrt(3 eps theta / pi^2)`, which equals `1/q` at `p/q`.
pub fn popcorn_from_theta(theta: f64, eps: f64) -> f64 {
    math::sqrt(3.0 * eps * theta / (PI * PI))
}

/// Abscissa for the eta bridge: exact rationals take the cusp route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Abscissa {
    Exact(Rational),
    Float(f64),
}

impl From<Rational> for Abscissa {
    fn from(r: Rational) -> Self {
        Abscissa::Exact(r)
    }
}

impl From<f64> for Abscissa {
    fn from(x: f64) -> Self {
        Abscissa::Float(x)
    }
}

impl Abscissa {
    pub fn to_f64(self) -> f64 {
        match self {
            Abscissa::Exact(r) => r.to_f64(),
            Abscissa::Float(x) => x,
        }
    }

    fn point(self, y: f64) -> Result<ModularPoint> {
        match self {
            Abscissa::Exact(r) => ModularPoint::at_rational(r, y),
            Abscissa::Float(x) => ModularPoint::new(x, y),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopcornEstimate {
    /// `sqrt(max(0, radicand))`.
    pub value: f64,
    /// `-(12 eps / pi) ln|eta(x + i eps)|`.
    pub radicand: f64,
    /// Set when the radicand was negative and clamped.
    pub clamped: bool,
}

/// `sqrt(-(12 eps / pi) ln|eta(x + i eps)|)`. Tracks `1/q` at `x = p/q` for
/// `q << 1/sqrt(eps)` and is `O(sqrt(eps ln(1/eps)))` at badly approximable `x`.
pub fn popcorn_from_eta(x: impl Into<Abscissa>, eps: f64) -> Result<PopcornEstimate> {
    let x = x.into();
    let xf = x.to_f64();
    ensure(xf > 0.0 && xf < 1.0, "x", xf, "(0, 1)")?;
    ensure(eps > 0.0 && eps <= 1e-3, "eps", eps, "(0, 1e-3]")?;
    let eta = log_abs_eta(x.point(eps)?)?;
    let radicand = -(12.0 * eps / PI) * eta.log_abs;
    let clamped = radicand < 0.0;
    Ok(PopcornEstimate {
        value: if clamped { 0.0 } else { math::sqrt(radicand) },
        radicand,
        clamped,
    })
}

/// `-ln|eta(p/q + i eps)| - pi / (12 eps q^2)`, the part of `-ln|eta|` not
/// carried by the popcorn height. Grows like a logarithm of `1/eps`.
pub fn residual_check(x: Rational, eps: f64) -> Result<f64> {
    ensure((1e-10..=1e-3).contains(&eps), "eps", eps, "[1e-10, 1e-3]")?;
    let q = x.denom() as f64;
    let eta = log_abs_eta(ModularPoint::at_rational(x, eps)?)?;
    Ok(-eta.log_abs - PI / (12.0 * eps * q * q))
}

/// Popcorn-scale profile of the chain spectrum: [`popcorn_from_eta`] at
/// `x = arccos(lambda / 2) / pi`.
pub fn rho_from_eta(lambda: f64, eps: f64) -> Result<PopcornEstimate> {
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    ensure(math::abs(lambda) < 2.0, "lambda", lambda, "(-2, 2)")?;
    popcorn_from_eta(math::acos(lambda / 2.0) / PI, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eta::{log_abs_eta_cusp, CuspMode};
    use crate::rational::{farey_sequence, popcorn};
    use alloc::vec::Vec;

    #[test]
    fn form_is_unimodular() {
        // Q = a m^2 + b m n + c n^2 with a = x^2/eps + eps, b = -2x/eps, c = 1/eps.
        for &(x, eps) in &[(0.5, 0.8), (0.3, 0.01), (0.0, 1.0)] {
            let a = x * x / eps + eps;
            let b = -2.0 * x / eps;
            let c = 1.0 / eps;
            assert!((4.0f64 * a * c - b * b - 4.0).abs() < 1e-9);
            let f = QuadraticFormQ::new(x, eps).unwrap();
            assert!((f.eval(3.0, -2.0) - (a * 9.0 - b * 6.0 + c * 4.0)).abs() < 1e-9);
        }
        assert!(QuadraticFormQ::new(1.0, 0.5).is_err());
        assert!(QuadraticFormQ::new(0.5, 0.0).is_err());
    }

    #[test]
    fn square_lattice_sum() {
        // sum' (m^2 + n^2)^{-2} = 4 zeta(2) beta(2) = 6.026812...
        let catalan = 0.915_965_594_177_219;
        let exact = 4.0 * PI * PI / 6.0 * catalan;
        assert!((exact - 6.026_812).abs() < 1e-6);
        let form = QuadraticFormQ::new(0.0, 1.0).unwrap();
        let v = epstein_zeta_truncated(2.0, form, 200).unwrap();
        assert!((v.value - exact).abs() < 1e-6, "{}", v.value);
        assert!((v.lattice_sum - exact).abs() > 1e-5);
        // Continuum tail of the square cut is pi/(2 (R + 1/2)^2) times a shape factor.
        assert!(v.tail_correction > 0.0);
    }

    #[test]
    fn lattice_sum_is_centrally_symmetric() {
        let form = QuadraticFormQ::new(0.37, 0.6).unwrap();
        let r = 12i64;
        let mut full = 0.0;
        for m in -r..=r {
            for n in -r..=r {
                if m != 0 || n != 0 {
                    full += form.eval(m as f64, n as f64).powf(-1.5);
                }
            }
        }
        let v = epstein_zeta_truncated(1.5, form, 12).unwrap();
        assert!((v.lattice_sum - full).abs() < 1e-12 * full);
    }

    #[test]
    fn kronecker_structure() {
        let form = QuadraticFormQ::new(0.5, 0.8).unwrap();
        let a = kronecker_rhs(form, 0.1).unwrap();
        let b = kronecker_rhs(form, 0.05).unwrap();
        assert!(((b - PI / 0.05) - (a - PI / 0.1)).abs() < 1e-12);
        let unit = QuadraticFormQ::new(0.0, 1.0).unwrap();
        let expect = PI / 0.1 + 2.0 * PI * (EULER_GAMMA + 0.5 * (0.25f64).ln() + 2.0 * 0.263_672_070_248_918);
        assert!((kronecker_rhs(unit, 0.1).unwrap() - expect).abs() < 1e-12);
        assert!(kronecker_rhs(form, 0.0).is_err());
        assert!(kronecker_rhs(form, 0.3).is_err());
        assert!(epstein_zeta_truncated(1.0, form, 10).is_err());
        assert!(epstein_zeta_truncated(2.0, form, 9).is_err());
    }

    #[test]
    fn kronecker_limit_moderate_radius() {
        let form = QuadraticFormQ::new(0.5, 0.8).unwrap();
        let tau = 0.1;
        let lhs = epstein_zeta_truncated(1.0 + tau, form, 400).unwrap().value;
        let rhs = kronecker_rhs(form, tau).unwrap();
        assert!(((lhs - rhs) / rhs).abs() < 0.01, "{lhs} vs {rhs}");
    }

    #[test]
    fn theta_peak_examples() {
        let half = Rational::new(1, 2).unwrap();
        let closed = theta_peak(Some(half), 0.01, ThetaMode::Closed).unwrap();
        assert!((closed.value - 82.2467).abs() < 1e-4);
        let lattice = theta_peak(Some(half), 0.01, ThetaMode::Lattice { terms: 1000 }).unwrap();
        assert!((lattice.value - closed.value).abs() < 1e-6);
        assert!((lattice.value - closed.value).abs() <= lattice.tail_bound);
        assert_eq!(theta_peak(None, 0.01, ThetaMode::Closed).unwrap().value, 0.0);
    }

    #[test]
    fn theta_identity_recovers_popcorn() {
        for q in 1..=100u64 {
            let r = Rational::new(1, q).unwrap();
            for eps in [1e-6, 0.01, 0.37] {
                let t = theta_peak(Some(r), eps, ThetaMode::Closed).unwrap().value;
                let g = popcorn_from_theta(t, eps);
                assert!((g - popcorn(r).unwrap()).abs() <= 2.0 * f64::EPSILON * g, "{q} {eps}");
                let l = theta_peak(Some(r), eps, ThetaMode::Lattice { terms: 200 }).unwrap();
                assert!(
                    (l.value - t).abs() <= l.tail_bound,
                    "{q}: {} vs {t} (bound {})",
                    l.value,
                    l.tail_bound
                );
            }
        }
    }

    #[test]
    fn popcorn_from_eta_examples() {
        let half = popcorn_from_eta(Rational::new(1, 2).unwrap(), 1e-6).unwrap();
        assert!(((half.value - 0.5) / 0.5).abs() < 5e-3);
        // -ln|eta| = pi / (48 eps) + 1/2 ln(2 eps) up to exponentially small terms.
        let expect = 0.25 + 12e-6 / PI * 0.5 * (2e-6f64).ln();
        assert!((half.radicand - expect).abs() < 1e-9);
        let third = popcorn_from_eta(Rational::new(1, 3).unwrap(), 1e-6).unwrap();
        assert!((third.value - 1.0 / 3.0).abs() < 3e-3);
        let golden = popcorn_from_eta((5f64.sqrt() - 1.0) / 2.0, 1e-6).unwrap();
        assert!(golden.value <= 0.01, "{}", golden.value);
        assert!(popcorn_from_eta(0.5, 2e-3).is_err());
        assert!(popcorn_from_eta(Rational::ONE, 1e-6).is_err());
    }

    #[test]
    fn popcorn_from_eta_converges_to_inverse_denominator() {
        for r in farey_sequence(40)
            .unwrap()
            .into_iter()
            .filter(|r| r.numer() > 0 && r.numer() < r.denom())
        {
            let mut prev = f64::INFINITY;
            for eps in [1e-5, 1e-7, 1e-9] {
                let v = popcorn_from_eta(r, eps).unwrap().value;
                let gap = (v - 1.0 / r.denom() as f64).abs();
                assert!(gap < prev, "{r} at {eps}");
                prev = gap;
            }
        }
    }

    #[test]
    fn residual_is_logarithmic() {
        let half = Rational::new(1, 2).unwrap();
        // Derived directly from the cusp map: r = +1/2 ln(q eps).
        let r = residual_check(half, 1e-6).unwrap();
        assert!((r + 6.561).abs() < 1e-3, "{r}");
        for eps in [1e-4, 1e-6, 1e-8] {
            let r = residual_check(half, eps).unwrap();
            assert!((r - 0.5 * (2.0 * eps).ln()).abs() < 1e-3);
        }
        let xs: Vec<f64> = (4..=10).map(|e| (10f64.powi(e)).ln()).collect();
        let ys: Vec<f64> = (4..=10)
            .map(|e| residual_check(half, 10f64.powi(-e)).unwrap())
            .collect();
        let n = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
        assert!((slope.abs() - 0.5).abs() < 0.01, "{slope}");
        assert!(residual_check(half, 1e-2).is_err());
    }

    #[test]
    fn residual_matches_asymptotic_cusp_form() {
        for (p, q) in [(1u64, 2u64), (1, 3), (2, 5), (3, 7)] {
            let eps = 1e-7;
            let r = residual_check(Rational::new(p, q).unwrap(), eps).unwrap();
            let a = log_abs_eta_cusp(p, q, eps, CuspMode::Asymptotic).unwrap();
            let qf = q as f64;
            assert!((r - (-a.log_abs - PI / (12.0 * eps * qf * qf))).abs() < 1e-6);
        }
    }

    #[test]
    fn rho_from_eta_examples() {
        assert!((rho_from_eta(0.0, 1e-6).unwrap().value - 0.5).abs() < 3e-3);
        assert!((rho_from_eta(1.0, 1e-6).unwrap().value - 1.0 / 3.0).abs() < 3e-3);
        let lambda = 2.0 * (0.7 * PI).cos();
        let v = rho_from_eta(lambda, 1e-8).unwrap().value;
        assert!((v - 0.1).abs() < 1e-3, "{v}");
        assert!(rho_from_eta(2.0, 1e-6).is_err());
    }
}
