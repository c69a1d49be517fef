//! Empirical evidence around the criteria: lower bounds on operator norms
//! from test functions, the split upper bound for `T_g`, and decay of the
//! images of normalized monomials.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::criteria::ladder::{DerivativeIntegrand, RadialIntegrand};
use crate::criteria::rules::ols_slope;
use crate::criteria::{boundedness_tg_integral, LadderConfig, RadialLadder, VerdictTag};
use crate::operators::{apply, OperatorKind};
use crate::quadrature::{graded_boundary, RadialPoint, RadialQuadrature};
use crate::series::{FunctionHandle, TaylorSeries, DEFAULT_DEGREE};
use crate::spaces::{disk_weight, weighted_sup_norm, DiskGrid, SpacePair};
use crate::symbols::SymbolSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimationError {
    #[error("upper bound needs a bounded radial ladder, got {0}")]
    NotBounded(VerdictTag),
    #[error("split point {0} must lie in (0, 1)")]
    SplitPoint(f64),
    #[error("probe needs at least 16 monomials, got {0}")]
    ProbeLength(usize),
}

/// `‖z^n‖_{H∞_α}` in closed form: the maximum of `r^n (1 - r^2)^α` sits at
/// `r^2 = n/(n + 2α)`.
pub fn monomial_norm(n: usize, alpha: f64) -> f64 {
    if n == 0 || alpha == 0.0 {
        return 1.0;
    }
    let nf = n as f64;
    let d = nf + 2.0 * alpha;
    ((nf / 2.0) * (nf / d).ln() + alpha * (2.0 * alpha / d).ln()).exp()
}

/// `max_{|z| <= 1/2} |z^n| / ‖z^n‖_α`.
pub fn weak_null_ratio(n: usize, alpha: f64) -> f64 {
    0.5f64.powi(n as i32) / monomial_norm(n, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryEntry {
    pub label: String,
    #[serde(skip)]
    pub series: TaylorSeries,
    /// `‖f‖_{H∞_α}`.
    pub norm_alpha: f64,
    /// Peaking point for the peaking family.
    pub peak: Option<f64>,
}

/// Test functions with their source norms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestBattery {
    pub alpha: f64,
    pub degree: usize,
    pub entries: Vec<BatteryEntry>,
}

/// Peaking points `λ_j = 1 - 2^{-j}`.
pub const PEAK_LEVELS: usize = 6;

/// Angles of the `(1 - e^{-2iθ} z^2)^{-α}` family.
pub const FAMILY_ANGLES: usize = 8;

fn binomial_series(exponent: f64, ratio: Complex64, step: usize, degree: usize, scale: f64) -> TaylorSeries {
    // Coefficients of scale · (1 - ratio z^step)^{-exponent}.
    let mut coeffs = vec![Complex64::new(0.0, 0.0); degree + 1];
    let mut c = Complex64::new(scale, 0.0);
    let mut m = 0;
    while m * step <= degree {
        coeffs[m * step] = c;
        m += 1;
        c *= ratio * ((exponent + m as f64 - 1.0) / m as f64);
    }
    TaylorSeries::new(coeffs)
}

impl TestBattery {
    /// Monomials, the rotated `(1 - e^{-2iθ} z^2)^{-α}` family and the
    /// peaking family `(1 - λ^2)^α / (1 - λz)^{2α}`, truncated at `degree`.
    pub fn new(alpha: f64, degree: usize, grid: &DiskGrid) -> Self {
        let mut entries = Vec::new();
        let mut n = 0;
        while n <= degree.min(64) {
            entries.push(BatteryEntry {
                label: format!("z^{n}"),
                series: TaylorSeries::monomial(n),
                norm_alpha: monomial_norm(n, alpha),
                peak: None,
            });
            n = if n == 0 { 1 } else { 2 * n };
        }
        let mut computed: Vec<(String, TaylorSeries, Option<f64>)> = Vec::new();
        if alpha > 0.0 {
            for j in 0..FAMILY_ANGLES {
                let theta = PI * j as f64 / FAMILY_ANGLES as f64;
                let ratio = Complex64::from_polar(1.0, -2.0 * theta);
                computed.push((
                    format!("rotated θ={theta:.4}"),
                    binomial_series(alpha, ratio, 2, degree, 1.0),
                    None,
                ));
            }
            for j in 1..=PEAK_LEVELS {
                let lambda = 1.0 - graded_boundary(j);
                let scale = (alpha * (-lambda * lambda).ln_1p()).exp();
                computed.push((
                    format!("peak λ={lambda}"),
                    binomial_series(2.0 * alpha, Complex64::new(lambda, 0.0), 1, degree, scale),
                    Some(lambda),
                ));
            }
        }
        let norms: Vec<f64> = computed
            .par_iter()
            .map(|(_, s, _)| weighted_sup_norm(&FunctionHandle::series(s.clone()), alpha, grid).value)
            .collect();
        for ((label, series, peak), norm_alpha) in computed.into_iter().zip(norms) {
            if norm_alpha > 0.0 {
                entries.push(BatteryEntry {
                    label,
                    series,
                    norm_alpha,
                    peak,
                });
            }
        }
        TestBattery { alpha, degree, entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    /// Label of the entry attaining the value.
    pub best: Option<String>,
    pub ratios: Vec<f64>,
}

fn images(g: &SymbolSpec, op: OperatorKind, battery: &TestBattery) -> Vec<TaylorSeries> {
    let gs = g.taylor(battery.degree);
    battery
        .entries
        .par_iter()
        .map(|e| apply(op, &gs, &e.series))
        .collect()
}

/// `max_f ‖Op f‖_β / ‖f‖_α` over the battery.
pub fn empirical_lower_bound(
    g: &SymbolSpec,
    op: OperatorKind,
    pair: SpacePair,
    battery: &TestBattery,
    grid: &DiskGrid,
) -> LowerBound {
    let ratios: Vec<f64> = images(g, op, battery)
        .into_par_iter()
        .zip(battery.entries.par_iter())
        .map(|(img, e)| weighted_sup_norm(&FunctionHandle::series(img), pair.beta, grid).value / e.norm_alpha)
        .collect();
    let mut best = None;
    let mut value = 0.0;
    for (i, &r) in ratios.iter().enumerate() {
        if r > value {
            value = r;
            best = Some(battery.entries[i].label.clone());
        }
    }
    LowerBound { value, best, ratios }
}

/// Lower bounds restricted to `|z| <= ρ_j = 1 - 2^{-j}`, `j = 1..=PEAK_LEVELS`,
/// using the peaking entries with `λ <= ρ_j` and every other entry.
pub fn lower_bound_ladder(
    g: &SymbolSpec,
    op: OperatorKind,
    pair: SpacePair,
    battery: &TestBattery,
    grid: &DiskGrid,
) -> Vec<f64> {
    let imgs = images(g, op, battery);
    (1..=PEAK_LEVELS)
        .map(|j| {
            let rho = 1.0 - graded_boundary(j);
            imgs.par_iter()
                .zip(battery.entries.par_iter())
                .filter(|(_, e)| e.peak.is_none_or(|l| l <= rho))
                .map(|(img, e)| {
                    let h = FunctionHandle::Series {
                        series: img.clone(),
                        radius: rho + 1e-12,
                    };
                    weighted_sup_norm(&h, pair.beta, grid).value / e.norm_alpha
                })
                .reduce(|| 0.0, f64::max)
        })
        .collect()
}

/// Split upper bound for `‖T_g‖`: `m_t0` and `n_tail` bound the weighted
/// radial integral for `R <= t0` and `R >= t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBound {
    pub t0: f64,
    pub m_t0: f64,
    pub n_tail: f64,
    /// `m_t0 + n_tail`.
    pub sum: f64,
    /// `max(m_t0, n_tail)`, since every `z` falls on one side of `t0`.
    pub refined: f64,
}

/// Subpieces per graded cell.
const PIECES_PER_CELL: usize = 16;

/// Breakpoints in `s = 1 - R`, decreasing from 1 to `2^{-k_max}`, with `s0`
/// inserted.
fn breakpoints(k_max: usize, s0: f64) -> Vec<f64> {
    let mut s = vec![1.0];
    for j in 0..k_max {
        let (hi, lo) = (graded_boundary(j), graded_boundary(j + 1));
        for p in 1..=PIECES_PER_CELL {
            s.push(hi - (hi - lo) * p as f64 / PIECES_PER_CELL as f64);
        }
    }
    if !s.contains(&s0) {
        s.push(s0);
        s.sort_by(|a, b| b.total_cmp(a));
    }
    s
}

fn cumulative_on_ray<H: RadialIntegrand>(h: &H, q: &RadialQuadrature, theta: f64, s: &[f64]) -> Vec<f64> {
    let f = |p: RadialPoint| h.eval(theta, p);
    let mut acc = vec![0.0; s.len()];
    for i in 1..s.len() {
        acc[i] = acc[i - 1] + q.integrate_s(&f, s[i], s[i - 1]).value;
    }
    acc
}

/// Upper bound for `‖T_g: H∞_α → H∞_β‖` from the radial integrals, split at
/// `t0`. Each subpiece `[a, b]` contributes `(1 - a^2)^β sup_θ I(b, θ)`.
pub fn split_upper_bound(
    g: &SymbolSpec,
    pair: SpacePair,
    t0: f64,
    cfg: &LadderConfig,
) -> Result<UpperBound, EstimationError> {
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(EstimationError::SplitPoint(t0));
    }
    let (ladder, verdict) = boundedness_tg_integral(g, pair, cfg);
    if verdict.raw_tag != VerdictTag::Bounded {
        return Err(EstimationError::NotBounded(verdict.raw_tag));
    }
    Ok(split_upper_bound_on(g, pair, t0, cfg, &ladder))
}

/// [`split_upper_bound`] over the angles of an existing bounded ladder.
pub fn split_upper_bound_on(
    g: &SymbolSpec,
    pair: SpacePair,
    t0: f64,
    cfg: &LadderConfig,
    ladder: &RadialLadder,
) -> UpperBound {
    let s0 = 1.0 - t0;
    let s = breakpoints(cfg.k_max, s0);
    let h = DerivativeIntegrand { g, alpha: pair.alpha };
    let q = RadialQuadrature::new(cfg.quad, pair.alpha);
    let per_angle: Vec<Vec<f64>> = ladder
        .angles()
        .par_iter()
        .map(|&theta| cumulative_on_ray(&h, &q, theta, &s))
        .collect();
    let mut m_t0 = 0.0_f64;
    let mut n_tail = 0.0_f64;
    for i in 1..s.len() {
        let sup = per_angle.iter().map(|c| c[i]).fold(0.0, f64::max);
        let bound = disk_weight(s[i - 1], pair.beta) * sup;
        if s[i] >= s0 {
            m_t0 = m_t0.max(bound);
        } else {
            n_tail = n_tail.max(bound);
        }
    }
    UpperBound {
        t0,
        m_t0,
        n_tail,
        sum: m_t0 + n_tail,
        refined: m_t0.max(n_tail),
    }
}

/// `‖Op z^n‖_β / ‖z^n‖_α` for `n = 1..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeTrace {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Log-log slope over the second half; `None` when the trace has zeros.
    pub decay_exponent: Option<f64>,
}

impl ProbeTrace {
    pub fn last(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Decay evidence for compactness.
    pub fn decays(&self) -> bool {
        self.is_zero() || (self.decay_exponent.is_some_and(|e| e < 0.0) && self.last() < 1e-2)
    }

    /// The trace never drops below `fraction` of its first value.
    pub fn persists(&self, fraction: f64) -> bool {
        let first = self.values.first().copied().unwrap_or(0.0);
        first > 0.0 && self.values.iter().all(|&v| v >= fraction * first)
    }
}

/// Grid for probes: rungs out to `1 - 2^{-40}`.
pub fn probe_grid() -> DiskGrid {
    DiskGrid::default().with_rungs(160).with_angles(256)
}

pub const PROBE_LENGTH: usize = 128;

/// Images of the normalized monomials `z^n / ‖z^n‖_α`.
pub fn compactness_probe(
    g: &SymbolSpec,
    op: OperatorKind,
    pair: SpacePair,
    n_max: usize,
    grid: &DiskGrid,
) -> Result<ProbeTrace, EstimationError> {
    if n_max < 16 {
        return Err(EstimationError::ProbeLength(n_max));
    }
    let gs = g.taylor(DEFAULT_DEGREE);
    let indices: Vec<usize> = (1..=n_max).collect();
    let values: Vec<f64> = indices
        .par_iter()
        .map(|&n| {
            let img = apply(op, &gs, &TaylorSeries::monomial(n));
            weighted_sup_norm(&FunctionHandle::series(img), pair.beta, grid).value / monomial_norm(n, pair.alpha)
        })
        .collect();
    let half = &indices[n_max / 2..];
    let tail = &values[n_max / 2..];
    let decay_exponent = tail.iter().all(|&v| v > 0.0).then(|| {
        let xs: Vec<f64> = half.iter().map(|&n| (n as f64).ln()).collect();
        let ys: Vec<f64> = tail.iter().map(|v| v.ln()).collect();
        ols_slope(&xs, &ys)
    });
    Ok(ProbeTrace {
        indices,
        values,
        decay_exponent,
    })
}
