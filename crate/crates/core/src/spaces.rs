//! Weighted sup-norms on `H∞_α`, Bloch norms and the polar grid used to
//! approximate suprema over the disk.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{FunctionHandle, Sample, SeriesError, OVERFLOW_CLAMP};
use crate::symbols::SymbolSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpacesError {
    #[error("weight exponents must be nonnegative (alpha = {alpha}, beta = {beta})")]
    NegativeExponent { alpha: f64, beta: f64 },
    #[error("g' vanishes near {z} (|g'| = {modulus:e}); the log-derivative surrogate is not defined")]
    SymbolZeroDerivative { z: Complex64, modulus: f64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Source and target exponents `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacePair {
    pub alpha: f64,
    pub beta: f64,
}

impl SpacePair {
    pub fn new(alpha: f64, beta: f64) -> Result<Self, SpacesError> {
        if !(alpha >= 0.0 && beta >= 0.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(SpacesError::NegativeExponent { alpha, beta });
        }
        Ok(SpacePair { alpha, beta })
    }
}

/// `(1 - |z|^2)^e` given `s = 1 - |z|`.
pub fn disk_weight(s: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else {
        (s * (2.0 - s)).powf(exponent)
    }
}

/// Polar grid graded toward the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskGrid {
    /// Radial rungs are `r_k = 1 - 2^{-k/4}` for `k = 0..=rungs`.
    pub rungs: usize,
    /// Uniform angular nodes per rung.
    pub angles: usize,
    /// Angular maxima refined per rung.
    pub refine_top: usize,
    /// Number of outermost rungs that are refined.
    pub refine_rungs: usize,
    /// Golden-section iterations per refinement.
    pub golden_iterations: usize,
}

impl Default for DiskGrid {
    fn default() -> Self {
        DiskGrid {
            rungs: 96,
            angles: 512,
            refine_top: 3,
            refine_rungs: 8,
            golden_iterations: 40,
        }
    }
}

impl DiskGrid {
    pub fn with_angles(mut self, angles: usize) -> Self {
        self.angles = angles;
        self
    }

    pub fn with_rungs(mut self, rungs: usize) -> Self {
        self.rungs = rungs;
        self
    }

    /// `1 - r_k`.
    pub fn gap(&self, k: usize) -> f64 {
        (-(k as f64) / 4.0).exp2()
    }

    pub fn radius(&self, k: usize) -> f64 {
        1.0 - self.gap(k)
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..=self.rungs).map(|k| self.radius(k)).collect()
    }

    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.angles as f64
    }

    /// Grid invariants: outermost radius at least `1 - 10^{-6}` and `M >= 64`.
    pub fn is_valid(&self) -> bool {
        self.angles >= 64 && self.radius(self.rungs) >= 1.0 - 1e-6
    }
}

/// Something whose modulus can be sampled on circles inside the disk.
pub trait DiskSampler: Sync {
    /// `|f(z)|`, or `f64::INFINITY` for a divergent sample.
    fn modulus(&self, z: Complex64) -> f64;

    /// Moduli at `r e^{2πij/m}`, `j = 0..m`.
    fn ring(&self, r: f64, m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| self.modulus(Complex64::from_polar(r, TAU * j as f64 / m as f64)))
            .collect()
    }

    fn domain_radius(&self) -> f64 {
        1.0
    }
}

fn clamp_modulus(v: Complex64) -> f64 {
    let m = v.norm();
    if m.is_finite() && m <= OVERFLOW_CLAMP {
        m
    } else {
        f64::INFINITY
    }
}

impl DiskSampler for FunctionHandle {
    fn modulus(&self, z: Complex64) -> f64 {
        match self.eval_unchecked(z) {
            Sample::Finite(v) => v.norm(),
            Sample::Divergent => f64::INFINITY,
        }
    }

    fn ring(&self, r: f64, m: usize) -> Vec<f64> {
        match self {
            FunctionHandle::Series { series, .. } => {
                // Fold coefficients modulo m, then one inverse DFT.
                let mut buf = vec![Complex64::new(0.0, 0.0); m];
                let mut rn = 1.0;
                for (n, c) in series.coeffs().iter().enumerate() {
                    buf[n % m] += c * rn;
                    rn *= r;
                }
                FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
                buf.into_iter().map(clamp_modulus).collect()
            }
            FunctionHandle::ClosedForm { .. } => (0..m)
                .map(|j| self.modulus(Complex64::from_polar(r, TAU * j as f64 / m as f64)))
                .collect(),
        }
    }

    fn domain_radius(&self) -> f64 {
        FunctionHandle::domain_radius(self)
    }
}

/// Wraps a closure returning a complex value.
pub struct ComplexSampler<F>(pub F);

impl<F: Fn(Complex64) -> Complex64 + Sync> DiskSampler for ComplexSampler<F> {
    fn modulus(&self, z: Complex64) -> f64 {
        clamp_modulus((self.0)(z))
    }
}

/// Wraps a closure returning a nonnegative real.
pub struct ModulusSampler<F>(pub F);

impl<F: Fn(Complex64) -> f64 + Sync> DiskSampler for ModulusSampler<F> {
    fn modulus(&self, z: Complex64) -> f64 {
        let v = (self.0)(z);
        if v.is_finite() && v <= OVERFLOW_CLAMP {
            v
        } else {
            f64::INFINITY
        }
    }
}

/// Grid estimate of `sup (1 - |z|^2)^e |f(z)|` with per-rung diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: Complex64,
    /// `1 - r_k` for the rungs that were sampled.
    pub gaps: Vec<f64>,
    /// Weighted maximum on each rung, after refinement.
    pub rung_maxima: Vec<f64>,
    pub rung_argmax: Vec<f64>,
    pub clamp_hits: usize,
    /// Clamped samples were hit and the weighted rung maxima still grow
    /// along the outermost rungs.
    pub divergent: bool,
}

impl SupEstimate {
    pub fn radii(&self) -> Vec<f64> {
        self.gaps.iter().map(|s| 1.0 - s).collect()
    }
}

/// Maximizes `h` on `[a, b]` by golden-section search, returning the best
/// point evaluated.
pub fn golden_max<H: Fn(f64) -> f64>(h: H, a: f64, b: f64, iterations: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = h(x1);
    let mut f2 = h(x2);
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..iterations {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = h(x1);
            if f1 > best.1 {
                best = (x1, f1);
            }
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = h(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

/// Indices of the `top` largest entries, ties broken by index.
pub fn top_indices(values: &[f64], top: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    idx.truncate(top);
    idx
}

struct Rung {
    gap: f64,
    max: f64,
    arg: f64,
    clamp_hits: usize,
}

/// `sup (1 - |z|^2)^exponent · |f(z)|` over the grid plus refinement.
/// `exponent` may be negative.
pub fn weighted_sup<S: DiskSampler + ?Sized>(f: &S, exponent: f64, grid: &DiskGrid) -> SupEstimate {
    let m = grid.angles;
    let radius = f.domain_radius();
    let ks: Vec<usize> = (0..=grid.rungs).filter(|&k| grid.radius(k) < radius).collect();
    let refine_from = ks.len().saturating_sub(grid.refine_rungs);
    let rungs: Vec<Rung> = ks
        .par_iter()
        .enumerate()
        .map(|(pos, &k)| {
            let gap = grid.gap(k);
            let r = 1.0 - gap;
            let w = disk_weight(gap, exponent);
            let ring = f.ring(r, m);
            let clamp_hits = ring.iter().filter(|v| !v.is_finite()).count();
            let weighted: Vec<f64> = ring.iter().map(|v| v * w).collect();
            let j = top_indices(&weighted, 1)[0];
            let (mut max, mut arg) = (weighted[j], grid.angle(j));
            if pos >= refine_from && r > 0.0 && clamp_hits == 0 {
                let step = TAU / m as f64;
                for j in top_indices(&weighted, grid.refine_top) {
                    let c = grid.angle(j);
                    let (theta, v) = golden_max(
                        |t| f.modulus(Complex64::from_polar(r, t)),
                        c - step,
                        c + step,
                        grid.golden_iterations,
                    );
                    let v = v * w;
                    if v > max {
                        max = v;
                        arg = theta.rem_euclid(TAU);
                    }
                }
            }
            Rung {
                gap,
                max,
                arg,
                clamp_hits,
            }
        })
        .collect();

    let mut best = 0;
    for (i, rung) in rungs.iter().enumerate() {
        if rung.max > rungs[best].max {
            best = i;
        }
    }
    let clamp_hits: usize = rungs.iter().map(|r| r.clamp_hits).sum();
    let rung_maxima: Vec<f64> = rungs.iter().map(|r| r.max).collect();
    let tail = &rung_maxima[rung_maxima.len().saturating_sub(8)..];
    let growing = tail.windows(2).all(|w| w[1] >= w[0]);
    let (value, argmax) = rungs
        .get(best)
        .map(|r| (r.max, Complex64::from_polar(1.0 - r.gap, r.arg)))
        .unwrap_or((0.0, Complex64::new(0.0, 0.0)));
    SupEstimate {
        value,
        argmax,
        gaps: rungs.iter().map(|r| r.gap).collect(),
        rung_maxima,
        rung_argmax: rungs.iter().map(|r| r.arg).collect(),
        clamp_hits,
        divergent: clamp_hits > 0 && growing,
    }
}

/// `‖f‖_{H∞_α}` estimated on `grid`.
pub fn weighted_sup_norm(f: &FunctionHandle, alpha: f64, grid: &DiskGrid) -> SupEstimate {
    weighted_sup(f, alpha, grid)
}

/// `|f(0)| + sup (1 - |z|^2) |f'(z)|`.
pub fn bloch_norm(f: &FunctionHandle, grid: &DiskGrid) -> Result<f64, SpacesError> {
    let df = f.derivative()?;
    let at_zero = f.eval(Complex64::new(0.0, 0.0))?.modulus();
    Ok(at_zero + weighted_sup(&df, 1.0, grid).value)
}

/// Grid surrogate for `log g' ∈ B`: `sup (1 - |z|^2) |g''(z) / g'(z)|`.
pub fn log_deriv_bloch_seminorm(g: &SymbolSpec, grid: &DiskGrid) -> Result<SupEstimate, SpacesError> {
    for k in 0..=grid.rungs {
        let r = grid.radius(k);
        let count = if r == 0.0 { 1 } else { grid.angles };
        for j in 0..count {
            let z = Complex64::from_polar(r, grid.angle(j));
            let modulus = g.derivative(z).norm();
            if modulus < 1e-12 {
                return Err(SpacesError::SymbolZeroDerivative { z, modulus });
            }
        }
    }
    let sampler = ComplexSampler(|z| g.second_derivative(z) / g.derivative(z));
    Ok(weighted_sup(&sampler, 1.0, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TaylorSeries;
    use crate::symbols::lookup;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn cayley() -> FunctionHandle {
        FunctionHandle::closed_form(|z| (Complex64::new(1.0, 0.0) - z).inv(), 1.0)
    }

    #[test]
    fn default_grid_is_valid() {
        let g = DiskGrid::default();
        assert!(g.is_valid());
        assert_eq!(g.radius(0), 0.0);
        assert_abs_diff_eq!(g.gap(96), 2f64.powi(-24), epsilon = 0.0);
    }

    #[test]
    fn constant_norms() {
        let one = FunctionHandle::series(TaylorSeries::constant(Complex64::new(1.0, 0.0)));
        let grid = DiskGrid::default();
        assert_abs_diff_eq!(weighted_sup_norm(&one, 0.0, &grid).value, 1.0, epsilon = 1e-15);
        let at_one = weighted_sup_norm(&one, 1.0, &grid);
        assert_abs_diff_eq!(at_one.value, 1.0, epsilon = 1e-15);
        assert_eq!(at_one.argmax, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn cayley_weighted_norm_is_two() {
        let est = weighted_sup_norm(&cayley(), 1.0, &DiskGrid::default());
        assert_abs_diff_eq!(est.value, 2.0, epsilon = 1e-3);
        assert!(est.argmax.re > 0.99 && est.argmax.im.abs() < 1e-6);
    }

    #[test]
    fn fft_rings_match_pointwise_evaluation() {
        let s = lookup("log").unwrap().taylor(300);
        let h = FunctionHandle::series(s.clone());
        let ring = h.ring(0.9, 64);
        for (j, v) in ring.iter().enumerate() {
            let z = Complex64::from_polar(0.9, TAU * j as f64 / 64.0);
            assert_abs_diff_eq!(*v, s.eval(z).norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn bloch_norm_examples() {
        let grid = DiskGrid::default();
        let c = FunctionHandle::series(TaylorSeries::constant(Complex64::new(-3.0, 4.0)));
        assert_abs_diff_eq!(bloch_norm(&c, &grid).unwrap(), 5.0, epsilon = 1e-14);
        let z = FunctionHandle::series(TaylorSeries::monomial(1));
        assert_abs_diff_eq!(bloch_norm(&z, &grid).unwrap(), 1.0, epsilon = 1e-14);
        let log = lookup("log").unwrap().handle();
        assert_abs_diff_eq!(bloch_norm(&log, &grid).unwrap(), 2.0, epsilon = 1e-3);
    }

    #[test]
    fn log_derivative_surrogate() {
        let grid = DiskGrid::default();
        let id = log_deriv_bloch_seminorm(&lookup("identity").unwrap(), &grid).unwrap();
        assert_eq!(id.value, 0.0);
        let log = log_deriv_bloch_seminorm(&lookup("log").unwrap(), &grid).unwrap();
        assert_abs_diff_eq!(log.value, 2.0, epsilon = 1e-3);
        let err = log_deriv_bloch_seminorm(&lookup("half_square").unwrap(), &grid).unwrap_err();
        assert!(matches!(err, SpacesError::SymbolZeroDerivative { .. }));
    }

    #[test]
    fn univalent_symbols_have_finite_surrogate() {
        let grid = DiskGrid::default();
        for g in crate::symbols::registry() {
            if g.metadata().is_univalent {
                let est = log_deriv_bloch_seminorm(&g, &grid).unwrap();
                assert!(est.value <= 6.0 + 1e-9, "{}: {}", g.name(), est.value);
            }
        }
    }

    #[test]
    fn refinement_never_lowers_the_supremum() {
        let f = FunctionHandle::closed_form(
            |z| (Complex64::new(1.0, 0.0) - z * Complex64::from_polar(1.0, -0.3)).inv(),
            1.0,
        );
        let plain = DiskGrid {
            refine_top: 0,
            ..DiskGrid::default()
        };
        let coarse = weighted_sup_norm(&f, 1.0, &plain);
        let fine = weighted_sup_norm(&f, 1.0, &DiskGrid::default());
        assert!(fine.value >= coarse.value);
        for (a, b) in fine.rung_maxima.iter().zip(&coarse.rung_maxima) {
            assert!(a >= b);
        }
    }

    #[test]
    fn pole_on_the_boundary_is_tagged_divergent() {
        let f = FunctionHandle::closed_form(|z| (Complex64::new(1.0, 0.0) - z).powi(-60), 1.0);
        let est = weighted_sup_norm(&f, 0.0, &DiskGrid::default());
        assert!(est.divergent);
        assert!(est.clamp_hits > 0);
    }

    #[test]
    fn space_pair_rejects_negative_exponents() {
        assert!(SpacePair::new(-0.1, 0.0).is_err());
        assert!(SpacePair::new(0.0, f64::NAN).is_err());
        assert!(SpacePair::new(0.5, 2.0).is_ok());
    }

    fn poly(max_degree: usize) -> impl Strategy<Value = TaylorSeries> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_degree + 1).prop_map(|v| {
            TaylorSeries::new(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
        })
    }

    fn small_grid() -> DiskGrid {
        DiskGrid::default().with_angles(128).with_rungs(40)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norm_is_monotone_in_alpha(f in poly(12), a1 in 0.0..2.0f64, da in 0.0..2.0f64) {
            let h = FunctionHandle::series(f);
            let grid = small_grid();
            let n1 = weighted_sup_norm(&h, a1, &grid).value;
            let n2 = weighted_sup_norm(&h, a1 + da, &grid).value;
            prop_assert!(n1 >= n2 * (1.0 - 1e-12));
        }

        #[test]
        fn norm_is_homogeneous(f in poly(12), alpha in 0.0..2.0f64, c in 0.01..10.0f64, phi in 0.0..TAU) {
            let grid = small_grid();
            let c = Complex64::from_polar(c, phi);
            let n = weighted_sup_norm(&FunctionHandle::series(f.clone()), alpha, &grid).value;
            let nc = weighted_sup_norm(&FunctionHandle::series(f.scale(c)), alpha, &grid).value;
            prop_assert!((nc - c.norm() * n).abs() <= 1e-12 * nc.max(1e-300));
        }

        #[test]
        fn triangle_inequality(f in poly(12), g in poly(12), alpha in 0.0..2.0f64) {
            let grid = small_grid();
            let nf = weighted_sup_norm(&FunctionHandle::series(f.clone()), alpha, &grid).value;
            let ng = weighted_sup_norm(&FunctionHandle::series(g.clone()), alpha, &grid).value;
            let nfg = weighted_sup_norm(&FunctionHandle::series(f.add(&g)), alpha, &grid).value;
            prop_assert!(nfg <= (nf + ng) * (1.0 + 1e-12));
        }
    }
}
