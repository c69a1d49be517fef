//! Fixtures shared by the benchmarks.

use num_complex::Complex64;
use volterra_core::TaylorSeries;

/// A dense polynomial with slowly decaying, deterministic coefficients.
pub fn dense_series(degree: usize) -> TaylorSeries {
    let coeffs = (0..=degree)
        .map(|n| {
            let phase = 0.7 * n as f64;
            Complex64::from_polar(1.0 / (1.0 + n as f64), phase)
        })
        .collect();
    TaylorSeries::new(coeffs)
}
