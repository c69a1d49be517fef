//! Canonical symbols `g` with closed-form evaluators, Taylor coefficients,
//! declared analytic metadata and closed-form oracles.
//!
//! Metadata flags are declared from known facts rather than computed:
//!
//! * `log g'` is Bloch whenever `g` is univalent (Pommerenke), and trivially
//!   when `g'` is a nonzero constant.
//! * `log(1 - z)` and `log(1/(1 - z))` are Bloch, since
//!   `(1 - |z|^2) / |1 - z| <= 2`; so are their constant multiples.
//! * `log g'` (resp. `log g`) is not analytic on the disk when `g'` (resp.
//!   `g`) vanishes somewhere, which rules the hypothesis out.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::operators::OperatorKind;
use crate::series::{ComplexFn, FunctionHandle, TaylorSeries};

/// Tri-state for an analytic hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    True,
    False,
    Unknown,
}

impl Hypothesis {
    pub fn holds(self) -> bool {
        self == Hypothesis::True
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::True => "true",
            Hypothesis::False => "false",
            Hypothesis::Unknown => "unknown",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SymbolMetadata {
    pub is_zero: bool,
    pub is_univalent: bool,
    /// `log(g') ∈ B`.
    pub log_deriv_bloch: Hypothesis,
    /// `log(g) ∈ B`.
    pub log_symbol_bloch: Hypothesis,
}

type CoeffFn = Arc<dyn Fn(usize) -> Complex64 + Send + Sync>;
type TailFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;
type RadialOracle = Arc<dyn Fn(f64, f64) -> Option<f64> + Send + Sync>;

/// A named analytic symbol on the disk.
#[derive(Clone)]
pub struct SymbolSpec {
    name: String,
    formula: String,
    value: ComplexFn,
    first: ComplexFn,
    second: ComplexFn,
    coeff: CoeffFn,
    tail: TailFn,
    metadata: SymbolMetadata,
    radial_oracle: Option<RadialOracle>,
}

impl fmt::Debug for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymbolSpec")
            .field("name", &self.name)
            .field("formula", &self.formula)
            .field("metadata", &self.metadata)
            .finish_non_exhaustive()
    }
}

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn zero_fn() -> ComplexFn {
    Arc::new(|_| cx(0.0))
}

impl SymbolSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn formula(&self) -> &str {
        &self.formula
    }

    pub fn metadata(&self) -> SymbolMetadata {
        self.metadata
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (self.value)(z)
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        (self.first)(z)
    }

    pub fn second_derivative(&self, z: Complex64) -> Complex64 {
        (self.second)(z)
    }

    pub fn coefficient(&self, n: usize) -> Complex64 {
        (self.coeff)(n)
    }

    /// Taylor polynomial of degree `degree`.
    pub fn taylor(&self, degree: usize) -> TaylorSeries {
        TaylorSeries::new((0..=degree).map(|n| self.coefficient(n)).collect())
    }

    /// Upper bound for `|g(z) - taylor(degree)(z)|` on `|z| <= radius < 1`.
    pub fn tail_bound(&self, degree: usize, radius: f64) -> f64 {
        (self.tail)(degree, radius)
    }

    /// Closed form for `∫_0^t |g'(r e^{iθ})| dr`, where one is known.
    pub fn radial_oracle(&self, theta: f64, t: f64) -> Option<f64> {
        self.radial_oracle.as_ref().and_then(|f| f(theta, t))
    }

    /// Closed-form handle for `g` carrying `g'` and `g''`.
    pub fn handle(&self) -> FunctionHandle {
        FunctionHandle::ClosedForm {
            value: self.value.clone(),
            first: Some(self.first.clone()),
            second: Some(self.second.clone()),
            radius: 1.0,
        }
    }

    /// Closed-form handle for `g'` carrying `g''`.
    pub fn derivative_handle(&self) -> FunctionHandle {
        FunctionHandle::ClosedForm {
            value: self.first.clone(),
            first: Some(self.second.clone()),
            second: None,
            radius: 1.0,
        }
    }

    /// `z ↦ g(e^{iφ} z)`.
    pub fn rotated(&self, phi: f64) -> SymbolSpec {
        let u = Complex64::from_polar(1.0, phi);
        let (value, first, second, coeff) = (
            self.value.clone(),
            self.first.clone(),
            self.second.clone(),
            self.coeff.clone(),
        );
        let oracle = self.radial_oracle.clone();
        SymbolSpec {
            name: format!("{}@{phi}", self.name),
            formula: format!("({})(e^(i{phi}) z)", self.formula),
            value: Arc::new(move |z| value(u * z)),
            first: Arc::new(move |z| u * first(u * z)),
            second: Arc::new(move |z| u * u * second(u * z)),
            coeff: Arc::new(move |n| coeff(n) * u.powu(n as u32)),
            tail: self.tail.clone(),
            metadata: self.metadata,
            radial_oracle: oracle
                .map(|f| Arc::new(move |theta: f64, t: f64| f(theta + phi, t)) as RadialOracle),
        }
    }

    /// `z ↦ c·g(z)`.
    pub fn scaled(&self, c: f64) -> SymbolSpec {
        let (value, first, second, coeff, tail) = (
            self.value.clone(),
            self.first.clone(),
            self.second.clone(),
            self.coeff.clone(),
            self.tail.clone(),
        );
        let oracle = self.radial_oracle.clone();
        let mut metadata = self.metadata;
        if c == 0.0 {
            metadata = zero().metadata;
        }
        SymbolSpec {
            name: format!("{c}*{}", self.name),
            formula: format!("{c}·({})", self.formula),
            value: Arc::new(move |z| value(z) * c),
            first: Arc::new(move |z| first(z) * c),
            second: Arc::new(move |z| second(z) * c),
            coeff: Arc::new(move |n| coeff(n) * c),
            tail: Arc::new(move |n, r| tail(n, r) * c.abs()),
            metadata,
            radial_oracle: oracle
                .map(|f| Arc::new(move |theta: f64, t: f64| f(theta, t).map(|v| v * c.abs())) as RadialOracle),
        }
    }
}

fn polynomial(name: &str, formula: &str, coeffs: Vec<f64>, metadata: SymbolMetadata) -> SymbolSpec {
    let series = TaylorSeries::from_real(&coeffs);
    let d1 = series.derivative();
    let d2 = d1.derivative();
    let (s0, s1, s2) = (series.clone(), d1, d2);
    let c = coeffs.clone();
    let tail_coeffs = coeffs;
    SymbolSpec {
        name: name.into(),
        formula: formula.into(),
        value: Arc::new(move |z| s0.eval(z)),
        first: Arc::new(move |z| s1.eval(z)),
        second: Arc::new(move |z| s2.eval(z)),
        coeff: Arc::new(move |n| cx(c.get(n).copied().unwrap_or(0.0))),
        tail: Arc::new(move |n, r| {
            tail_coeffs
                .iter()
                .enumerate()
                .skip(n + 1)
                .map(|(k, a)| a.abs() * r.powi(k as i32))
                .sum()
        }),
        metadata,
        radial_oracle: None,
    }
}

fn with_oracle<F>(mut spec: SymbolSpec, oracle: F) -> SymbolSpec
where
    F: Fn(f64, f64) -> Option<f64> + Send + Sync + 'static,
{
    spec.radial_oracle = Some(Arc::new(oracle));
    spec
}

/// `∫_0^t dr / |1 - r e^{iθ}|`.
pub fn log_radial_integral(theta: f64, t: f64) -> f64 {
    let c = theta.cos();
    if 1.0 - c < 1e-300 {
        return -(-t).ln_1p();
    }
    let at_t = t - c + (1.0 - 2.0 * t * c + t * t).sqrt();
    (at_t / (1.0 - c)).ln()
}

/// `∫_0^t dr / |1 - r e^{iθ}|^2`.
pub fn cayley_radial_integral(theta: f64, t: f64) -> f64 {
    let c = theta.cos();
    let s = theta.sin();
    if s.abs() < 1e-12 {
        return if c > 0.0 { t / (1.0 - t) } else { t / (1.0 + t) };
    }
    (((t - c) / s).atan() - (-c / s).atan()) / s
}

pub fn zero() -> SymbolSpec {
    SymbolSpec {
        name: "zero".into(),
        formula: "0".into(),
        value: zero_fn(),
        first: zero_fn(),
        second: zero_fn(),
        coeff: Arc::new(|_| cx(0.0)),
        tail: Arc::new(|_, _| 0.0),
        metadata: SymbolMetadata {
            is_zero: true,
            is_univalent: false,
            log_deriv_bloch: Hypothesis::False,
            log_symbol_bloch: Hypothesis::False,
        },
        radial_oracle: Some(Arc::new(|_, _| Some(0.0))),
    }
}

fn one() -> SymbolSpec {
    let spec = polynomial(
        "one",
        "1",
        vec![1.0],
        SymbolMetadata {
            is_zero: false,
            is_univalent: false,
            log_deriv_bloch: Hypothesis::False,
            log_symbol_bloch: Hypothesis::True,
        },
    );
    with_oracle(spec, |_, _| Some(0.0))
}

fn identity() -> SymbolSpec {
    let spec = polynomial(
        "identity",
        "z",
        vec![0.0, 1.0],
        SymbolMetadata {
            is_zero: false,
            is_univalent: true,
            log_deriv_bloch: Hypothesis::True,
            log_symbol_bloch: Hypothesis::False,
        },
    );
    with_oracle(spec, |_, t| Some(t))
}

fn half_square() -> SymbolSpec {
    let spec = polynomial(
        "half_square",
        "z^2/2",
        vec![0.0, 0.0, 0.5],
        SymbolMetadata {
            is_zero: false,
            is_univalent: false,
            log_deriv_bloch: Hypothesis::False,
            log_symbol_bloch: Hypothesis::False,
        },
    );
    with_oracle(spec, |_, t| Some(0.5 * t * t))
}

fn affine() -> SymbolSpec {
    let spec = polynomial(
        "affine",
        "1 - z",
        vec![1.0, -1.0],
        SymbolMetadata {
            is_zero: false,
            is_univalent: true,
            log_deriv_bloch: Hypothesis::True,
            log_symbol_bloch: Hypothesis::True,
        },
    );
    with_oracle(spec, |_, t| Some(t))
}

const LACUNARY_TERMS: u32 = 6;

fn lacunary() -> SymbolSpec {
    let degree = 1usize << LACUNARY_TERMS;
    let mut coeffs = vec![0.0; degree + 1];
    for k in 0..=LACUNARY_TERMS {
        coeffs[1 << k] = 1.0;
    }
    // g' vanishes on (-1/2, 0), so g is not univalent; log g' is left open.
    polynomial(
        "lacunary",
        "sum_{k<=6} z^(2^k)",
        coeffs,
        SymbolMetadata {
            is_zero: false,
            is_univalent: false,
            log_deriv_bloch: Hypothesis::Unknown,
            log_symbol_bloch: Hypothesis::False,
        },
    )
}

fn geometric_tail(n: usize, r: f64) -> f64 {
    r.powi(n as i32 + 1) / (1.0 - r)
}

/// `Σ_{m>n} (m+1) r^m`.
fn linear_weight_tail(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    r.powi(n as i32 + 1) * ((nf + 2.0) - (nf + 1.0) * r) / ((1.0 - r) * (1.0 - r))
}

fn logarithm(name: &str) -> SymbolSpec {
    SymbolSpec {
        name: name.into(),
        formula: "-log(1 - z)".into(),
        value: Arc::new(|z| -(cx(1.0) - z).ln()),
        first: Arc::new(|z| (cx(1.0) - z).inv()),
        second: Arc::new(|z| (cx(1.0) - z).powi(-2)),
        coeff: Arc::new(|n| if n == 0 { cx(0.0) } else { cx(1.0 / n as f64) }),
        tail: Arc::new(|n, r| r.powi(n as i32 + 1) / ((n as f64 + 1.0) * (1.0 - r))),
        metadata: SymbolMetadata {
            is_zero: false,
            is_univalent: true,
            log_deriv_bloch: Hypothesis::True,
            log_symbol_bloch: Hypothesis::False,
        },
        radial_oracle: Some(Arc::new(|theta, t| Some(log_radial_integral(theta, t)))),
    }
}

fn koebe2() -> SymbolSpec {
    SymbolSpec {
        name: "koebe2".into(),
        formula: "z/(1 - z)".into(),
        value: Arc::new(|z| z / (cx(1.0) - z)),
        first: Arc::new(|z| (cx(1.0) - z).powi(-2)),
        second: Arc::new(|z| 2.0 * (cx(1.0) - z).powi(-3)),
        coeff: Arc::new(|n| if n == 0 { cx(0.0) } else { cx(1.0) }),
        tail: Arc::new(geometric_tail),
        metadata: SymbolMetadata {
            is_zero: false,
            is_univalent: true,
            log_deriv_bloch: Hypothesis::True,
            log_symbol_bloch: Hypothesis::False,
        },
        radial_oracle: Some(Arc::new(|theta, t| Some(cayley_radial_integral(theta, t)))),
    }
}

fn koebe3() -> SymbolSpec {
    SymbolSpec {
        name: "koebe3".into(),
        formula: "((1 - z)^-2 - 1)/2".into(),
        value: Arc::new(|z| 0.5 * ((cx(1.0) - z).powi(-2) - 1.0)),
        first: Arc::new(|z| (cx(1.0) - z).powi(-3)),
        second: Arc::new(|z| 3.0 * (cx(1.0) - z).powi(-4)),
        coeff: Arc::new(|n| if n == 0 { cx(0.0) } else { cx(0.5 * (n as f64 + 1.0)) }),
        tail: Arc::new(|n, r| 0.5 * linear_weight_tail(n, r)),
        metadata: SymbolMetadata {
            is_zero: false,
            is_univalent: true,
            log_deriv_bloch: Hypothesis::True,
            log_symbol_bloch: Hypothesis::False,
        },
        radial_oracle: Some(Arc::new(|theta, t| {
            (theta.cos() >= 1.0 - 1e-300).then(|| 0.5 * ((1.0 - t).powi(-2) - 1.0))
        })),
    }
}

fn cayley() -> SymbolSpec {
    SymbolSpec {
        name: "cayley".into(),
        formula: "1/(1 - z)".into(),
        value: Arc::new(|z| (cx(1.0) - z).inv()),
        first: Arc::new(|z| (cx(1.0) - z).powi(-2)),
        second: Arc::new(|z| 2.0 * (cx(1.0) - z).powi(-3)),
        coeff: Arc::new(|_| cx(1.0)),
        tail: Arc::new(geometric_tail),
        metadata: SymbolMetadata {
            is_zero: false,
            is_univalent: true,
            log_deriv_bloch: Hypothesis::True,
            log_symbol_bloch: Hypothesis::True,
        },
        radial_oracle: Some(Arc::new(|theta, t| Some(cayley_radial_integral(theta, t)))),
    }
}

fn cayley_squared() -> SymbolSpec {
    SymbolSpec {
        name: "cayley2".into(),
        formula: "(1 - z)^-2".into(),
        value: Arc::new(|z| (cx(1.0) - z).powi(-2)),
        first: Arc::new(|z| 2.0 * (cx(1.0) - z).powi(-3)),
        second: Arc::new(|z| 6.0 * (cx(1.0) - z).powi(-4)),
        coeff: Arc::new(|n| cx(n as f64 + 1.0)),
        tail: Arc::new(linear_weight_tail),
        metadata: SymbolMetadata {
            is_zero: false,
            is_univalent: true,
            log_deriv_bloch: Hypothesis::True,
            log_symbol_bloch: Hypothesis::True,
        },
        radial_oracle: None,
    }
}

/// All library symbols, in a fixed order.
pub fn registry() -> Vec<SymbolSpec> {
    vec![
        zero(),
        one(),
        identity(),
        half_square(),
        logarithm("log"),
        logarithm("koebe1"),
        koebe2(),
        koebe3(),
        affine(),
        cayley(),
        cayley_squared(),
        lacunary(),
    ]
}

pub fn lookup(name: &str) -> Option<SymbolSpec> {
    registry().into_iter().find(|s| s.name == name)
}

/// Expected outcome of a ground-truth row. `None` fields are not asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expected {
    pub bounded: Option<bool>,
    pub compact: Option<bool>,
    pub value: Option<f64>,
    pub value_tol: Option<f64>,
    /// The S_g verdict is taken from the T_g criterion at `α = β = 0`.
    pub forwarded: bool,
    /// Only the sufficiency direction of the integral criterion applies.
    pub sufficiency_only: bool,
}

impl Expected {
    const fn new(bounded: Option<bool>, compact: Option<bool>) -> Self {
        Expected {
            bounded,
            compact,
            value: None,
            value_tol: None,
            forwarded: false,
            sufficiency_only: false,
        }
    }

    const fn valued(mut self, value: f64, tol: f64) -> Self {
        self.value = Some(value);
        self.value_tol = Some(tol);
        self
    }

    const fn forwarded(mut self) -> Self {
        self.forwarded = true;
        self
    }

    const fn sufficiency_only(mut self) -> Self {
        self.sufficiency_only = true;
        self
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        match self.bounded {
            Some(true) => parts.push("Bounded"),
            Some(false) => parts.push("Unbounded"),
            None => {}
        }
        match self.compact {
            Some(true) => parts.push("Compact"),
            Some(false) if self.bounded != Some(false) => parts.push("NotCompact"),
            _ => {}
        }
        parts.join("+")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundTruthRow {
    pub symbol: &'static str,
    pub operator: OperatorKind,
    pub alpha: f64,
    pub beta: f64,
    pub expected: Expected,
    pub justification: &'static str,
}

const T: Option<bool> = Some(true);
const F: Option<bool> = Some(false);

/// Rows with closed-form justifications that `classify` must reproduce.
pub fn ground_truth_table() -> Vec<GroundTruthRow> {
    use OperatorKind::{Sg, Tg};
    let row = |symbol, operator, alpha, beta, expected, justification| GroundTruthRow {
        symbol,
        operator,
        alpha,
        beta,
        expected,
        justification,
    };
    vec![
        row("identity", Tg, 0.0, 0.0, Expected::new(T, T).valued(1.0, 1e-4),
            "sup_θ ∫_0^1 dr = 1; tail ∫_t^1 dr = 1 - t → 0"),
        row("log", Tg, 0.0, 0.0, Expected::new(F, F),
            "∫_0^1 dr/(1 - r) diverges at θ = 0"),
        row("log", Tg, 0.0, 1.0, Expected::new(T, T),
            "(1 - t^2) log(1/(1 - t)) → 0; (1 - |z|^2)^2/|1 - z| → 0"),
        row("koebe3", Tg, 0.0, 1.0, Expected::new(F, F),
            "(1 - r^2)^2/(1 - r)^3 = (1 + r)^2/(1 - r) → ∞"),
        row("cayley", Sg, 0.0, 1.0, Expected::new(T, F).valued(2.0, 1e-3),
            "sup (1 - |z|^2)/|1 - z| = 2, attained only in the limit z → 1"),
        row("affine", Sg, 1.0, 0.0, Expected::new(F, F),
            "∫_0^1 dr/((1 - r)(1 + r)^2) diverges at θ = 0"),
        row("affine", Sg, 1.0, 1.0, Expected::new(T, None),
            "sup |1 - z| = 2 < ∞"),
        row("zero", Sg, 1.0, 0.0, Expected::new(T, T),
            "the zero operator; compact into H∞_0 iff g = 0"),
        row("identity", Sg, 0.0, 0.0, Expected::new(T, F).forwarded(),
            "bounded on H∞_0 iff T_g is; g ≠ 0 so not compact into H∞_0"),
        row("half_square", Tg, 0.0, 0.0, Expected::new(T, T).valued(0.5, 1e-4),
            "sup_θ ∫_0^1 r dr = 1/2"),
        row("cayley", Tg, 0.0, 1.0, Expected::new(T, F),
            "(1 - |z|^2)^2/|1 - z|^2 → 4 along z = r ≠ 0"),
        row("lacunary", Tg, 0.0, 0.0, Expected::new(T, None).sufficiency_only(),
            "polynomial symbol, finite radial integrals; log g' hypothesis unknown"),
        row("cayley2", Sg, 0.0, 1.0, Expected::new(F, F),
            "(1 - r^2)/(1 - r)^2 = (1 + r)/(1 - r) → ∞"),
        row("one", Sg, 0.0, 0.0, Expected::new(T, F).forwarded(),
            "T_1 = 0 is bounded; S_1 f = f - f(0) is not compact"),
        row("log", Tg, 0.5, 0.5, Expected::new(T, F),
            "(1 - |z|^2)/|1 - z| → 2 along z = r"),
    ]
}

/// Angle used by tests that need a symbol-independent generic direction.
pub const GENERIC_ANGLE: f64 = PI / 7.0;
