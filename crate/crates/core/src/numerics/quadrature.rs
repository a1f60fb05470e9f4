use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerances for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Error below this fraction of `∫|f|` is never refined further.
    pub truncation_threshold: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
            truncation_threshold: 1e-14,
        }
    }
}

impl QuadratureSpec {
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-11,
            max_subdivisions: 4000,
            truncation_threshold: 1e-14,
        }
    }

    pub fn with_tolerances(abs_tol: f64, rel_tol: f64) -> Self {
        Self {
            abs_tol,
            rel_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_subdivisions == 0 {
            return Err(Error::invalid(format!(
                "quadrature spec needs abs_tol > 0, rel_tol > 0, max_subdivisions >= 1 (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Integration domain. `hi` (and `lo`) may be infinite; semi-infinite
/// pieces are mapped onto `(0, 1)` with `r = t / (1 - t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::invalid(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn finite(lo: f64, hi: f64) -> Self {
        assert!(lo.is_finite() && hi.is_finite() && lo <= hi, "bad interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn semi_infinite(lo: f64) -> Self {
        assert!(lo.is_finite());
        Self { lo, hi: f64::INFINITY }
    }

    pub fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }
}

/// Integral value with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Self { value, error }
    }

    pub fn scale(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            error: self.error * factor.abs(),
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl std::iter::Sum for Estimate {
    fn sum<I: Iterator<Item = Estimate>>(iter: I) -> Estimate {
        iter.fold(Estimate::default(), |a, b| a + b)
    }
}

// 21-point Gauss–Kronrod rule; the embedded Gauss nodes are the odd entries.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Below this fraction of `∫|f|` the per-segment roundoff floors dominate
/// and further bisection cannot lower the error estimate.
const ROUNDOFF_FLOOR: f64 = 100.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = fc.abs() * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
    }
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    if a == b {
        return Ok(Estimate::default());
    }
    let first = kronrod21(f, a, b);
    if !first.value.is_finite() {
        return Err(Error::invalid(format!("integrand not finite on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    let (mut total, mut total_err, mut total_abs) = (first.value, first.error, first.abs_value);
    heap.push(first);
    let mut subdivisions = 1;
    loop {
        let tol = spec
            .abs_tol
            .max(spec.rel_tol * total.abs())
            .max(spec.truncation_threshold * total_abs)
            .max(ROUNDOFF_FLOOR * total_abs);
        if total_err <= tol {
            break;
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::NonConvergence {
                value: total,
                error: total_err,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("segment heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at machine resolution: accept it as is
            let mut frozen = worst;
            frozen.error = 0.0;
            total_err -= worst.error;
            heap.push(frozen);
            if heap.iter().all(|s| s.error == 0.0) {
                break;
            }
            continue;
        }
        let left = kronrod21(f, worst.a, mid);
        let right = kronrod21(f, mid, worst.b);
        if !left.value.is_finite() || !right.value.is_finite() {
            return Err(Error::invalid(format!(
                "integrand not finite on [{}, {}]",
                worst.a, worst.b
            )));
        }
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        total_abs += left.abs_value + right.abs_value - worst.abs_value;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
    // resum to shed drift from the running updates
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    Ok(Estimate::new(value, error))
}

/// Adaptive Gauss–Kronrod (10/21) integration of `f` over `domain`.
pub fn integrate_1d<F: Fn(f64) -> f64>(f: F, domain: Interval, spec: &QuadratureSpec) -> Result<Estimate> {
    integrate_dyn(&f, domain, spec)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, domain: Interval, spec: &QuadratureSpec) -> Result<Estimate> {
    let Interval { lo, hi } = domain;
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive(&f, lo, hi, spec),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(lo + t / s) / (s * s)
            };
            adaptive(&g, 0.0, 1.0, spec)
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                f(hi - t / s) / (s * s)
            };
            adaptive(&g, 0.0, 1.0, spec)
        }
        (false, false) => {
            let half = QuadratureSpec {
                abs_tol: 0.5 * spec.abs_tol,
                ..*spec
            };
            let left = integrate_dyn(f, Interval { lo, hi: 0.0 }, &half)?;
            let right = integrate_dyn(f, Interval { lo: 0.0, hi }, &half)?;
            Ok(left + right)
        }
    }
}

/// Nested adaptive integration over a product domain; `f(x, y)` with `x`
/// outer and `y` inner.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    x_domain: Interval,
    y_domain: Interval,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let inner_spec = QuadratureSpec {
        abs_tol: 0.1 * spec.abs_tol,
        rel_tol: 0.1 * spec.rel_tol,
        ..*spec
    };
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_err = RefCell::new(0.0_f64);
    let outer = integrate_1d(
        |x| {
            if failure.borrow().is_some() {
                return 0.0;
            }
            match integrate_1d(|y| f(x, y), y_domain, &inner_spec) {
                Ok(est) => {
                    let mut e = inner_err.borrow_mut();
                    *e = e.max(est.error);
                    est.value
                }
                Err(err) => {
                    *failure.borrow_mut() = Some(err);
                    0.0
                }
            }
        },
        x_domain,
        spec,
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let outer = outer?;
    let err = outer.error + inner_spec.rel_tol * outer.value.abs();
    Ok(Estimate::new(outer.value, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_half_line() {
        let est = integrate_1d(|r| (-r * r).exp(), Interval::semi_infinite(0.0), &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(est.value, PI.sqrt() / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn inverse_sqrt_endpoint_singularity() {
        let est = integrate_1d(|r| 0.75 / r.sqrt(), Interval::finite(0.0, 1.0), &QuadratureSpec::default()).unwrap();
        assert_relative_eq!(est.value, 1.5, max_relative = 1e-9);
    }

    #[test]
    fn zero_integrand() {
        for dom in [Interval::finite(-3.0, 2.0), Interval::semi_infinite(1.0), Interval::real_line()] {
            let est = integrate_1d(|_| 0.0, dom, &QuadratureSpec::default()).unwrap();
            assert_eq!(est.value, 0.0);
        }
    }

    #[test]
    fn negative_half_line_and_real_line() {
        let spec = QuadratureSpec::default();
        let left = integrate_1d(|x| (x).exp(), Interval::new(f64::NEG_INFINITY, 0.0).unwrap(), &spec).unwrap();
        assert_relative_eq!(left.value, 1.0, max_relative = 1e-10);
        let whole = integrate_1d(|x| 1.0 / (1.0 + x * x), Interval::real_line(), &spec).unwrap();
        assert_relative_eq!(whole.value, PI, max_relative = 1e-9);
    }

    #[test]
    fn unit_square_and_gaussian_plane() {
        let spec = QuadratureSpec::default();
        let sq = integrate_2d(|_, _| 1.0, Interval::finite(0.0, 1.0), Interval::finite(0.0, 1.0), &spec).unwrap();
        assert_relative_eq!(sq.value, 1.0, max_relative = 1e-12);
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        let plane = integrate_2d(|x, y| pdf(x) * pdf(y), Interval::real_line(), Interval::real_line(), &spec).unwrap();
        assert_relative_eq!(plane.value, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn exhausted_budget_is_reported() {
        let spec = QuadratureSpec {
            max_subdivisions: 3,
            ..QuadratureSpec::default()
        };
        let err = integrate_1d(|x| (50.0 * x).sin().abs(), Interval::finite(0.0, 10.0), &spec).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = QuadratureSpec {
            abs_tol: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(integrate_1d(|x| x, Interval::finite(0.0, 1.0), &spec).is_err());
        assert!(Interval::new(2.0, 1.0).is_err());
    }
}
