//! Shared numerical kernels: adaptive quadrature, the scaled complementary
//! error function, bracketing root finding and seeded random streams.

mod erfcx;
mod quadrature;
mod rng;
mod roots;

pub use erfcx::{erfcx, erfcx_deriv1, erfcx_deriv2, erfcx_lower_bound, erfcx_upper_bound};
pub use quadrature::{integrate_1d, integrate_2d, Estimate, Interval, QuadratureSpec};
pub use rng::{log_uniform, stream};
pub use roots::find_root;

/// `n` points spaced evenly in log between `lo` and `hi` (both included).
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo, "log_space needs 0 < lo <= hi");
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn lin_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
