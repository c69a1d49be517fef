//! Truncated Taylor series on the unit disk and a dual series/closed-form
//! function handle.
//!
//! A [`TaylorSeries`] stores `coeffs[n]` as the coefficient of `z^n`. All
//! arithmetic is done on coefficients, so derivative and antiderivative are
//! exact up to floating-point rounding of the rational factors.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

/// Default truncation degree for series pipelines.
pub const DEFAULT_DEGREE: usize = 256;

/// Magnitudes above this are reported as divergent samples.
pub const OVERFLOW_CLAMP: f64 = 1e300;

/// Probe grid for derivative consistency checks: `|z| <= 0.5`.
const CONSISTENCY_RADII: [f64; 4] = [0.0, 0.2, 0.35, 0.5];
const CONSISTENCY_ANGLES: usize = 12;
const CONSISTENCY_STEP: f64 = 1e-5;
const CONSISTENCY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("point {z} lies outside the evaluation radius {radius}")]
    Domain { z: Complex64, radius: f64 },
    #[error("function handle has no derivative evaluator")]
    MissingDerivative,
    #[error("derivative evaluator disagrees with finite differences by {residual:e} at {z}")]
    DerivativeMismatch { z: Complex64, residual: f64 },
}

/// A point evaluation that either produced a usable number or hit the
/// overflow clamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    Finite(Complex64),
    Divergent,
}

impl Sample {
    pub fn from_value(v: Complex64) -> Self {
        if v.re.is_finite() && v.im.is_finite() && v.norm() <= OVERFLOW_CLAMP {
            Sample::Finite(v)
        } else {
            Sample::Divergent
        }
    }

    /// Modulus, with divergent samples mapped to the clamp value.
    pub fn modulus(&self) -> f64 {
        match self {
            Sample::Finite(v) => v.norm(),
            Sample::Divergent => OVERFLOW_CLAMP,
        }
    }

    pub fn value(&self) -> Option<Complex64> {
        match self {
            Sample::Finite(v) => Some(*v),
            Sample::Divergent => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self, Sample::Divergent)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaylorSeries {
    coeffs: Vec<Complex64>,
    truncated: bool,
}

impl TaylorSeries {
    /// Builds a series from its coefficients. An empty list is the zero series.
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self {
            coeffs,
            truncated: false,
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// `z^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex64::new(1.0, 0.0);
        Self::new(coeffs)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `z^n`, zero beyond the stored degree.
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs
            .get(n)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// True when some operation that produced this series dropped terms.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }

    /// Horner evaluation of the stored polynomial.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self {
                coeffs: vec![Complex64::new(0.0, 0.0)],
                truncated: self.truncated,
            };
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &c)| c * n as f64)
            .collect();
        Self {
            coeffs,
            truncated: self.truncated,
        }
    }

    /// Antiderivative vanishing at the origin.
    pub fn antiderivative(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(n, &c)| c / (n + 1) as f64),
        );
        Self {
            coeffs,
            truncated: self.truncated,
        }
    }

    /// Cauchy product truncated to `out_degree`.
    ///
    /// `out_degree` is capped at the full product degree. Dropping terms
    /// below the full degree marks the result as truncated.
    pub fn cauchy_product(&self, other: &Self, out_degree: usize) -> Self {
        let full = self.degree() + other.degree();
        let out = out_degree.min(full);
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..=out)
            .map(|n| {
                let lo = n.saturating_sub(b.len() - 1);
                let hi = n.min(a.len() - 1);
                (lo..=hi).fold(Complex64::new(0.0, 0.0), |acc, k| acc + a[k] * b[n - k])
            })
            .collect();
        Self {
            coeffs,
            truncated: self.truncated || other.truncated || out < full,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
            truncated: self.truncated,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self {
            coeffs: (0..n).map(|k| self.coeff(k) + other.coeff(k)).collect(),
            truncated: self.truncated || other.truncated,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Keeps coefficients up to `degree`.
    pub fn truncate(&self, degree: usize) -> Self {
        if degree >= self.degree() {
            return self.clone();
        }
        Self {
            coeffs: self.coeffs[..=degree].to_vec(),
            truncated: true,
        }
    }
}

impl fmt::Display for TaylorSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match n {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{n}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

pub type ComplexFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Either a truncated series or a closed-form evaluator with optional
/// derivative evaluators.
#[derive(Clone)]
pub enum FunctionHandle {
    Series {
        series: TaylorSeries,
        radius: f64,
    },
    ClosedForm {
        value: ComplexFn,
        first: Option<ComplexFn>,
        second: Option<ComplexFn>,
        radius: f64,
    },
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionHandle::Series { series, radius } => f
                .debug_struct("Series")
                .field("degree", &series.degree())
                .field("radius", radius)
                .finish(),
            FunctionHandle::ClosedForm {
                first,
                second,
                radius,
                ..
            } => f
                .debug_struct("ClosedForm")
                .field("first", &first.is_some())
                .field("second", &second.is_some())
                .field("radius", radius)
                .finish(),
        }
    }
}

impl From<TaylorSeries> for FunctionHandle {
    fn from(series: TaylorSeries) -> Self {
        FunctionHandle::series(series)
    }
}

impl FunctionHandle {
    pub fn series(series: TaylorSeries) -> Self {
        FunctionHandle::Series {
            series,
            radius: 1.0,
        }
    }

    pub fn closed_form<F>(value: F, radius: f64) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        FunctionHandle::ClosedForm {
            value: Arc::new(value),
            first: None,
            second: None,
            radius,
        }
    }

    /// Attaches a first-derivative evaluator. No effect on series handles.
    pub fn with_derivative<F>(mut self, df: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        if let FunctionHandle::ClosedForm { first, .. } = &mut self {
            *first = Some(Arc::new(df));
        }
        self
    }

    pub fn with_second_derivative<F>(mut self, d2f: F) -> Self
    where
        F: Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    {
        if let FunctionHandle::ClosedForm { second, .. } = &mut self {
            *second = Some(Arc::new(d2f));
        }
        self
    }

    pub fn domain_radius(&self) -> f64 {
        match self {
            FunctionHandle::Series { radius, .. } | FunctionHandle::ClosedForm { radius, .. } => {
                *radius
            }
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Sample, SeriesError> {
        let radius = self.domain_radius();
        if z.norm() >= radius {
            return Err(SeriesError::Domain { z, radius });
        }
        Ok(self.eval_unchecked(z))
    }

    /// Evaluation without the domain check; callers guarantee `|z| < radius`.
    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Sample {
        let v = match self {
            FunctionHandle::Series { series, .. } => series.eval(z),
            FunctionHandle::ClosedForm { value, .. } => value(z),
        };
        Sample::from_value(v)
    }

    pub fn has_derivative(&self) -> bool {
        match self {
            FunctionHandle::Series { .. } => true,
            FunctionHandle::ClosedForm { first, .. } => first.is_some(),
        }
    }

    /// Handle for `f'`.
    pub fn derivative(&self) -> Result<FunctionHandle, SeriesError> {
        match self {
            FunctionHandle::Series { series, radius } => Ok(FunctionHandle::Series {
                series: series.derivative(),
                radius: *radius,
            }),
            FunctionHandle::ClosedForm {
                first,
                second,
                radius,
                ..
            } => {
                let value = first.clone().ok_or(SeriesError::MissingDerivative)?;
                Ok(FunctionHandle::ClosedForm {
                    value,
                    first: second.clone(),
                    second: None,
                    radius: *radius,
                })
            }
        }
    }

    /// Central-difference check of the declared derivative on a fixed grid in
    /// `|z| <= 0.5`. Returns the largest residual seen.
    pub fn check_derivative(&self) -> Result<f64, SeriesError> {
        let df = self.derivative()?;
        let h = CONSISTENCY_STEP;
        let mut worst = 0.0_f64;
        for &r in &CONSISTENCY_RADII {
            for j in 0..CONSISTENCY_ANGLES {
                let theta = std::f64::consts::TAU * j as f64 / CONSISTENCY_ANGLES as f64;
                let z = Complex64::from_polar(r, theta);
                let fd = (self.eval(z + h)?.value().unwrap_or_default()
                    - self.eval(z - h)?.value().unwrap_or_default())
                    / (2.0 * h);
                let exact = df.eval(z)?.value().unwrap_or_default();
                let residual = (fd - exact).norm();
                if residual > CONSISTENCY_TOL {
                    return Err(SeriesError::DerivativeMismatch { z, residual });
                }
                worst = worst.max(residual);
            }
        }
        Ok(worst)
    }
}
