//! `ln|eta(z)|` for the Dedekind eta function on the upper half-plane.
//!
//! Only the modulus is tracked; the 24th-root-of-unity phase of the modular
//! law never enters. In the bulk the product
//! `eta(z) = e^{pi i z / 12} prod_{n>=1} (1 - e^{2 pi i n z})` is summed in
//! log form. Points close to the real axis are first mapped into the
//! fundamental domain with `|eta(z + 1)| = |eta(z)|` and
//! `|eta(-1/z)| = |z|^{1/2} |eta(z)|`. Points sitting exactly above a rational
//! `m/k` use integer Moebius data instead:
//!
//! ```text
//! ln|eta(m/k + i y)| = -1/2 ln(k y) + ln|eta(n/k + i / (k^2 y))|,   m n = 1 (mod k)
//! ```

use crate::error::{ensure, Error, Result};
use crate::math::{self, EPS, PI};
use crate::rational::{gcd, mod_inverse, Rational};

/// Smallest imaginary part accepted by [`log_abs_eta_qseries`].
pub const QSERIES_MIN_Y: f64 = 0.5;
/// Default truncation threshold on `|q|^n`.
pub const QSERIES_TOL: f64 = 1e-17;
/// Below this height a rational tag switches [`log_abs_eta`] to the cusp route.
pub const CUSP_SWITCH_Y: f64 = 1e-3;
/// Iteration cap for [`reduce_to_fundamental`].
pub const REDUCTION_CAP: usize = 10_000;
/// `ln h` below this is reported as an underflow.
pub const UNDERFLOW_LOG: f64 = -700.0;

/// A point `x + i y` with `y > 0`, optionally tagged with the exact rational
/// it sits above.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModularPoint {
    x: f64,
    y: f64,
    cusp: Option<Rational>,
}

impl ModularPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::NonFinite("x"));
        }
        ensure(y > 0.0 && y.is_finite(), "y", y, "(0, inf)")?;
        Ok(Self { x, y, cusp: None })
    }

    /// `r + i y` with `r` kept exactly for the cusp route.
    pub fn at_rational(r: Rational, y: f64) -> Result<Self> {
        let mut z = Self::new(r.to_f64(), y)?;
        z.cusp = Some(r);
        Ok(z)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn cusp(&self) -> Option<Rational> {
        self.cusp
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EtaMethod {
    QSeries,
    Reduced,
    CuspDuality,
    CuspAsymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogEtaValue {
    pub log_abs: f64,
    pub method: EtaMethod,
    /// Truncation bound plus a rounding allowance.
    pub certified_error: f64,
}

/// Sum of `ln|1 - q^n|` beyond `n = N`, with `|q| = r`:
/// `sum_{n>N} r^n / (1 - r^n) <= r^{N+1} / ((1 - r)(1 - r^{N+1}))`.
fn product_tail(r: f64, last: usize) -> f64 {
    let rn = math::powk(r, (last + 1) as f64);
    rn / ((1.0 - r) * (1.0 - rn))
}

/// Direct product expansion. Requires `y >= 0.5`.
pub fn log_abs_eta_qseries(z: ModularPoint, tol: f64) -> Result<LogEtaValue> {
    ensure(z.y >= QSERIES_MIN_Y, "y", z.y, "[0.5, inf) (reduce first)")?;
    ensure(tol > 0.0 && tol < 1.0, "tol", tol, "(0, 1)")?;
    let x = z.x - math::round(z.x);
    let r = math::exp(-2.0 * PI * z.y);
    let mut sum = -PI * z.y / 12.0;
    let mut rn = 1.0;
    let mut n = 0usize;
    while rn >= tol {
        n += 1;
        rn *= r;
        let c = math::cos(2.0 * PI * n as f64 * x);
        sum += 0.5 * math::ln_1p(rn * (rn - 2.0 * c));
    }
    let rounding = 4.0 * EPS * (math::abs(sum) + n as f64);
    Ok(LogEtaValue {
        log_abs: sum,
        method: EtaMethod::QSeries,
        certified_error: product_tail(r, n) + rounding,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reduction {
    pub point: ModularPoint,
    /// `ln|eta(z)| - ln|eta(point)|`.
    pub log_scale: f64,
    /// Number of inversions applied.
    pub steps: usize,
}

/// Maps `z` into `|x| <= 1/2, |z| >= 1` by unit shifts and inversions.
pub fn reduce_to_fundamental(z: ModularPoint) -> Result<Reduction> {
    let (mut x, mut y) = (z.x, z.y);
    let mut log_scale = 0.0;
    let mut steps = 0;
    loop {
        x -= math::round(x);
        let modulus = math::hypot(x, y);
        if modulus >= 1.0 {
            break;
        }
        if steps == REDUCTION_CAP {
            return Err(Error::ReductionCap(REDUCTION_CAP));
        }
        log_scale -= 0.5 * math::ln(modulus);
        x = -(x / modulus) / modulus;
        y = (y / modulus) / modulus;
        steps += 1;
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite("reduced point"));
        }
    }
    Ok(Reduction {
        point: ModularPoint { x, y, cusp: None },
        log_scale,
        steps,
    })
}

/// Dispatcher: cusp duality for tagged points below [`CUSP_SWITCH_Y`],
/// reduction plus product expansion otherwise.
pub fn log_abs_eta(z: ModularPoint) -> Result<LogEtaValue> {
    if let Some(r) = z.cusp {
        if z.y < CUSP_SWITCH_Y {
            let r = r.fract();
            return log_abs_eta_cusp(r.numer(), r.denom(), z.y, CuspMode::Exact);
        }
    }
    let red = reduce_to_fundamental(z)?;
    let base = log_abs_eta_qseries(red.point, QSERIES_TOL)?;
    let method = if red.steps == 0 && z.x == red.point.x {
        EtaMethod::QSeries
    } else {
        EtaMethod::Reduced
    };
    Ok(LogEtaValue {
        log_abs: base.log_abs + red.log_scale,
        method,
        certified_error: base.certified_error + 4.0 * EPS * (math::abs(red.log_scale) + red.steps as f64),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CuspMode {
    /// Integer Moebius map followed by the product expansion; valid for all `y`.
    Exact,
    /// Leading terms `-pi / (12 k^2 y) - 1/2 ln(k y)`; requires `y < 1/k^2`.
    Asymptotic,
}

/// `ln|eta(m/k + i y)|` through the modular map sending `m/k` to infinity.
pub fn log_abs_eta_cusp(m: u64, k: u64, y: f64, mode: CuspMode) -> Result<LogEtaValue> {
    ensure(k >= 1, "k", k as f64, "[1, inf)")?;
    if gcd(m, k) != 1 {
        return Err(Error::NotCoprime { p: m, q: k });
    }
    ensure(y > 0.0 && y.is_finite(), "y", y, "(0, inf)")?;
    let kf = k as f64;
    let dual_y = 1.0 / (kf * kf * y);
    let shift = -0.5 * math::ln(kf * y);
    match mode {
        CuspMode::Exact => {
            let n = mod_inverse(m % k, k).ok_or(Error::NotCoprime { p: m, q: k })?;
            let dual = ModularPoint::new(n as f64 / kf, dual_y)?;
            let inner = if dual_y >= QSERIES_MIN_Y {
                log_abs_eta_qseries(dual, QSERIES_TOL)?
            } else {
                log_abs_eta(dual)?
            };
            Ok(LogEtaValue {
                log_abs: inner.log_abs + shift,
                method: EtaMethod::CuspDuality,
                certified_error: inner.certified_error + 4.0 * EPS * math::abs(shift),
            })
        }
        CuspMode::Asymptotic => {
            ensure(kf * kf * y < 1.0, "y", y, "(0, 1/k^2)")?;
            let r = math::exp(-2.0 * PI * dual_y);
            let lead = -PI * dual_y / 12.0;
            Ok(LogEtaValue {
                log_abs: lead + shift,
                method: EtaMethod::CuspAsymptotic,
                certified_error: r / ((1.0 - r) * (1.0 - r)) + 4.0 * EPS * (math::abs(lead) + math::abs(shift)),
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedEta {
    /// `ln|eta(z)| + 1/4 ln y`.
    pub log_value: f64,
    /// `exp(log_value)`, or 0 when `underflow` is set.
    pub value: f64,
    pub underflow: bool,
}

/// `h(z) = |eta(z)| y^{1/4}`, invariant under the full modular group.
pub fn h(z: ModularPoint) -> Result<NormalizedEta> {
    let log_value = log_abs_eta(z)?.log_abs + 0.25 * math::ln(z.y);
    let underflow = log_value < UNDERFLOW_LOG;
    Ok(NormalizedEta {
        log_value,
        value: if underflow { 0.0 } else { math::exp(log_value) },
        underflow,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualityCheck {
    /// Inverse of `m` modulo `k`.
    pub n: u64,
    /// `h({m/k} + i y)`.
    pub lhs: NormalizedEta,
    /// `h({n/k} + i / (k^2 y))`.
    pub rhs: NormalizedEta,
}

/// Evaluates both sides of `h({m/k} + i y) = h({n/k} + i / (k^2 y))` with the
/// generic (untagged) evaluator, so the check exercises floating reduction.
pub fn duality_check(m: u64, k: u64, y: f64) -> Result<DualityCheck> {
    ensure(k >= 1, "k", k as f64, "[1, inf)")?;
    if gcd(m, k) != 1 {
        return Err(Error::NotCoprime { p: m, q: k });
    }
    ensure(y > 0.0 && y.is_finite(), "y", y, "(0, inf)")?;
    let n = mod_inverse(m % k, k).ok_or(Error::NotCoprime { p: m, q: k })?;
    let kf = k as f64;
    let lhs = h(ModularPoint::new((m % k) as f64 / kf, y)?)?;
    let rhs = h(ModularPoint::new(n as f64 / kf, 1.0 / (kf * kf * y))?)?;
    Ok(DualityCheck { n, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LN_ETA_I: f64 = -0.263_672_070_248_918;

    /// Independent oracle: Euler's pentagonal series
    /// `eta = q^{1/24} sum_k (-1)^k q^{k(3k-1)/2}`, in complex arithmetic.
    fn pentagonal_ln_abs_eta(x: f64, y: f64) -> f64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for k in -40i64..=40 {
            let e = (k * (3 * k - 1) / 2) as f64;
            let mag = (-2.0 * PI * e * y).exp();
            let ph = 2.0 * PI * e * x;
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            re += s * mag * ph.cos();
            im += s * mag * ph.sin();
        }
        -PI * y / 12.0 + (re * re + im * im).sqrt().ln()
    }

    fn at(x: f64, y: f64) -> ModularPoint {
        ModularPoint::new(x, y).unwrap()
    }

    #[test]
    fn eta_at_i_matches_gamma_closed_form() {
        let closed = libm::tgamma(0.25) / (2.0 * PI.powf(0.75));
        assert!((closed.ln() - LN_ETA_I).abs() < 1e-15);
        let v = log_abs_eta_qseries(at(0.0, 1.0), QSERIES_TOL).unwrap();
        assert!((v.log_abs - LN_ETA_I).abs() < 1e-15);
        assert!(v.certified_error < 1e-14);
        assert!((v.log_abs.exp() - 0.768_225).abs() < 1e-6);
        let shifted = log_abs_eta_qseries(at(1.0, 1.0), QSERIES_TOL).unwrap();
        assert_eq!(shifted.log_abs, v.log_abs);
    }

    #[test]
    fn large_y_is_leading_factor() {
        for x in [0.0, 0.17, 0.5, 0.93] {
            let v = log_abs_eta(at(x, 10.0)).unwrap();
            assert!((v.log_abs + 2.617_994).abs() < 1e-6);
            assert!((v.log_abs + PI * 10.0 / 12.0).abs() < 1e-11);
        }
    }

    #[test]
    fn qseries_floor_enforced() {
        assert!(log_abs_eta_qseries(at(0.0, 0.49), QSERIES_TOL).is_err());
        assert!(ModularPoint::new(0.0, 0.0).is_err());
        assert!(ModularPoint::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn qseries_matches_pentagonal_oracle() {
        for &(x, y) in &[(0.0, 0.5), (0.3, 0.6), (-0.45, 0.9), (0.25, 1.7), (0.5, 0.87)] {
            let v = log_abs_eta_qseries(at(x, y), QSERIES_TOL).unwrap();
            let o = pentagonal_ln_abs_eta(x, y);
            assert!((v.log_abs - o).abs() < 1e-13, "{x} {y}: {} vs {o}", v.log_abs);
        }
    }

    #[test]
    fn reduction_examples() {
        let red = reduce_to_fundamental(at(0.3, 2.0)).unwrap();
        assert_eq!((red.steps, red.log_scale), (0, 0.0));
        assert_eq!(red.point.y(), 2.0);

        let half = log_abs_eta(at(0.0, 0.5)).unwrap();
        let two = log_abs_eta(at(0.0, 2.0)).unwrap();
        assert!((half.log_abs - (0.5 * 2f64.ln() + two.log_abs)).abs() < 1e-14);
        let red = reduce_to_fundamental(at(0.0, 0.5)).unwrap();
        assert_eq!(red.steps, 1);

        let z = at(0.5, 1e-6);
        let red = reduce_to_fundamental(z).unwrap();
        assert!(red.point.y() >= 3f64.sqrt() / 2.0 - 1e-12);
        let generic = log_abs_eta(z).unwrap();
        assert_eq!(generic.method, EtaMethod::Reduced);
        let exact = log_abs_eta_cusp(1, 2, 1e-6, CuspMode::Exact).unwrap();
        assert!(((generic.log_abs - exact.log_abs) / exact.log_abs).abs() < 1e-9);
    }

    #[test]
    fn dispatcher_examples() {
        let v = log_abs_eta(at(0.0, 1.0)).unwrap();
        assert_eq!(v.method, EtaMethod::QSeries);
        assert!((v.log_abs + 0.263_672).abs() < 1e-6);

        let half = Rational::new(1, 2).unwrap();
        let v = log_abs_eta(ModularPoint::at_rational(half, 1e-8).unwrap()).unwrap();
        assert_eq!(v.method, EtaMethod::CuspDuality);
        let lead = -PI / (12.0 * 4.0 * 1e-8);
        assert!((lead + 6.544_985e6).abs() < 1.0);
        assert!((v.log_abs - (lead - 0.5 * (2e-8f64).ln())).abs() < 1e-8 * lead.abs());
        let asym = log_abs_eta_cusp(1, 2, 1e-8, CuspMode::Asymptotic).unwrap();
        assert!((v.log_abs - asym.log_abs).abs() <= asym.certified_error + v.certified_error);

        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let v = log_abs_eta(at(golden, 1e-6)).unwrap();
        assert!(v.log_abs.abs() <= 0.25 * (1e6f64).ln() + 3.0, "{}", v.log_abs);
    }

    #[test]
    fn tagged_point_above_switch_uses_reduction() {
        let third = Rational::new(4, 3).unwrap();
        let z = ModularPoint::at_rational(third, 0.01).unwrap();
        let v = log_abs_eta(z).unwrap();
        assert_eq!(v.method, EtaMethod::Reduced);
        let cusp = log_abs_eta_cusp(1, 3, 0.01, CuspMode::Exact).unwrap();
        assert!((v.log_abs - cusp.log_abs).abs() < 1e-12 * cusp.log_abs.abs().max(1.0));
    }

    #[test]
    fn h_examples() {
        let v = h(at(0.0, 1.0)).unwrap();
        assert!((v.value - 0.768_225).abs() < 1e-6 && !v.underflow);
        let a = h(at(0.2, 0.7)).unwrap();
        let b = h(at(1.2, 0.7)).unwrap();
        assert!((a.log_value - b.log_value).abs() < 1e-14);
        let (x, y) = (0.3, 0.4);
        let m2 = x * x + y * y;
        let c = h(at(x, y)).unwrap();
        let d = h(at(-x / m2, y / m2)).unwrap();
        assert!((c.value - d.value).abs() < 1e-12);
        let tiny = h(ModularPoint::at_rational(Rational::ZERO, 1e-4).unwrap()).unwrap();
        assert!(tiny.underflow && tiny.value == 0.0);
    }

    #[test]
    fn duality_examples() {
        let d = duality_check(1, 2, 0.01).unwrap();
        assert_eq!(d.n, 1);
        let direct = h(at(0.5, 25.0)).unwrap();
        assert!((d.rhs.value - direct.value).abs() < 1e-15);
        assert!((d.lhs.value - d.rhs.value).abs() < 1e-10);

        let d = duality_check(1, 1, 0.37).unwrap();
        assert!((d.lhs.value - d.rhs.value).abs() < 1e-12);
        let d = duality_check(2, 5, 1e-4).unwrap();
        assert_eq!(d.n, 3);
        assert!((d.lhs.value - d.rhs.value).abs() < 1e-10);
        assert!((d.lhs.log_value - d.rhs.log_value).abs() < 1e-10 * d.rhs.log_value.abs());
        assert!(duality_check(2, 4, 0.1).is_err());
    }

    #[test]
    fn cusp_examples() {
        let y = 1e-4;
        let v = log_abs_eta_cusp(0, 1, y, CuspMode::Exact).unwrap();
        let expect = -0.5 * y.ln() - PI / (12.0 * y);
        assert!((v.log_abs - expect).abs() < 1e-9);
        let a = log_abs_eta_cusp(1, 2, 1e-8, CuspMode::Asymptotic).unwrap();
        assert!((a.log_abs + 6.544_985e6).abs() < 10.0);
        assert!(log_abs_eta_cusp(1, 2, 0.3, CuspMode::Asymptotic).is_err());
        assert!(log_abs_eta_cusp(1, 2, 0.3, CuspMode::Exact).is_ok());
        for k in 1..=10u64 {
            for m in (0..k).filter(|&m| gcd(m, k) == 1) {
                let v = log_abs_eta_cusp(m, k, 1e-8, CuspMode::Exact).unwrap();
                let ratio = (-v.log_abs).sqrt() * k as f64 * (12.0 * 1e-8 / PI).sqrt();
                assert!((ratio - 1.0).abs() <= 1e-3, "{m}/{k}: {ratio}");
            }
        }
    }

    #[test]
    fn inversion_law_and_generator_words() {
        for &(x, y) in &[(0.1, 0.1), (0.37, 0.8), (-0.2, 1.5), (0.45, 0.25)] {
            let m2 = x * x + y * y;
            let a = log_abs_eta(at(x, y)).unwrap().log_abs;
            let b = log_abs_eta(at(-x / m2, y / m2)).unwrap().log_abs;
            assert!((b - a - 0.25 * m2.ln()).abs() < 1e-12);
        }
        let (mut x, mut y) = (0.21, 0.63);
        let start = h(at(x, y)).unwrap().log_value;
        for step in [1.0, -3.0, 2.0, 1.0] {
            x += step;
            let m2 = x * x + y * y;
            x = -x / m2;
            y /= m2;
            assert!((h(at(x, y)).unwrap().log_value - start).abs() < 1e-11);
        }
    }

    proptest! {
        #[test]
        fn unit_shift_invariance(x in -3.0f64..3.0, y in 0.05f64..5.0) {
            let a = log_abs_eta(at(x, y)).unwrap().log_abs;
            let b = log_abs_eta(at(x + 1.0, y)).unwrap().log_abs;
            prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn inversion_law(x in -2.0f64..2.0, y in 0.1f64..4.0) {
            let m2 = x * x + y * y;
            let a = log_abs_eta(at(x, y)).unwrap().log_abs;
            let b = log_abs_eta(at(-x / m2, y / m2)).unwrap().log_abs;
            prop_assert!((b - a - 0.25 * m2.ln()).abs() < 1e-12 * a.abs().max(1.0));
        }

        #[test]
        fn cusp_route_agrees_with_reduction(k in 1u64..30, m in 0u64..30, e in 3.0f64..6.0) {
            prop_assume!(m < k && gcd(m, k) == 1);
            let y = 10f64.powf(-e);
            let exact = log_abs_eta_cusp(m, k, y, CuspMode::Exact).unwrap();
            let generic = log_abs_eta(at(m as f64 / k as f64, y)).unwrap();
            prop_assert!((exact.log_abs - generic.log_abs).abs() < 1e-9 * exact.log_abs.abs().max(1.0));
        }
    }
}
