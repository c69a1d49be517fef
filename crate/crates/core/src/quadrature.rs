//! Composite Gauss–Legendre quadrature on `[0, t] ⊂ [0, 1)` over cells graded
//! geometrically toward `r = 1`.
//!
//! Cell `j` is `[1 - 2^{-j}, 1 - 2^{-j-1}]`. Integrands receive the distance
//! `s = 1 - r` computed directly, so weights such as `(1 - r^2)^{-α}` keep full
//! relative precision near the boundary.

use serde::{Deserialize, Serialize};

use crate::series::OVERFLOW_CLAMP;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel.
    pub nodes: usize,
    /// Relative error target per graded cell.
    pub rel_tol: f64,
    /// Absolute error floor per panel.
    pub abs_tol: f64,
    /// Integrand evaluation budget per integral.
    pub max_evals: usize,
    /// Use `u = -ln(1 - r)` when the weight exponent is at least this value.
    pub log_substitution_from: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes: 16,
            rel_tol: 1e-6,
            abs_tol: 1e-300,
            max_evals: 10_000,
            log_substitution_from: 0.5,
        }
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A radius together with its distance to the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub r: f64,
    pub s: f64,
}

impl RadialPoint {
    pub fn from_r(r: f64) -> Self {
        RadialPoint { r, s: 1.0 - r }
    }

    pub fn from_s(s: f64) -> Self {
        RadialPoint { r: 1.0 - s, s }
    }

    /// `1 - r^2`, accurate for `r` near 1.
    pub fn one_minus_r2(&self) -> f64 {
        self.s * (2.0 - self.s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub evals: usize,
    pub divergent: bool,
    pub converged: bool,
}

impl QuadResult {
    fn zero() -> Self {
        QuadResult {
            value: 0.0,
            evals: 0,
            divergent: false,
            converged: true,
        }
    }

    fn absorb(&mut self, other: QuadResult) {
        self.value = (self.value + other.value).min(OVERFLOW_CLAMP);
        self.evals += other.evals;
        self.divergent |= other.divergent;
        self.converged &= other.converged;
    }

    pub fn reliable(&self) -> bool {
        self.converged && !self.divergent
    }
}

/// `s`-coordinate of `t_k = 1 - 2^{-k}`.
pub fn graded_boundary(k: usize) -> f64 {
    (-(k as f64)).exp2()
}

/// Quadrature engine bound to a configuration.
#[derive(Debug, Clone)]
pub struct RadialQuadrature {
    cfg: QuadratureConfig,
    rule: GaussLegendre,
    log_substitution: bool,
}

impl RadialQuadrature {
    /// `weight_exponent` is the exponent of `(1 - r^2)^{-1}` in the integrand
    /// and selects the integration variable.
    pub fn new(cfg: QuadratureConfig, weight_exponent: f64) -> Self {
        RadialQuadrature {
            rule: GaussLegendre::new(cfg.nodes),
            log_substitution: weight_exponent >= cfg.log_substitution_from,
            cfg,
        }
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    pub fn uses_log_substitution(&self) -> bool {
        self.log_substitution
    }

    /// One Gauss–Legendre panel over `s ∈ [s_lo, s_hi]`.
    fn panel<F: Fn(RadialPoint) -> f64>(&self, f: &F, s_lo: f64, s_hi: f64) -> (f64, bool) {
        let mut acc = 0.0;
        let mut divergent = false;
        if self.log_substitution {
            let (u_a, u_b) = (-s_hi.ln(), -s_lo.ln());
            let (mid, half) = (0.5 * (u_a + u_b), 0.5 * (u_b - u_a));
            for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let u = mid + half * x;
                let s = (-u).exp();
                let v = f(RadialPoint::from_s(s)) * s;
                if !v.is_finite() || v > OVERFLOW_CLAMP {
                    divergent = true;
                    continue;
                }
                acc += w * v;
            }
            acc *= half;
        } else {
            let (mid, half) = (0.5 * (s_lo + s_hi), 0.5 * (s_hi - s_lo));
            for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                let s = mid + half * x;
                let v = f(RadialPoint::from_s(s));
                if !v.is_finite() || v > OVERFLOW_CLAMP {
                    divergent = true;
                    continue;
                }
                acc += w * v;
            }
            acc *= half;
        }
        if divergent {
            (OVERFLOW_CLAMP, true)
        } else {
            (acc.min(OVERFLOW_CLAMP), acc >= OVERFLOW_CLAMP)
        }
    }

    /// Adaptive integral over `s ∈ [s_lo, s_hi]`, bisecting panels whose
    /// halves disagree with the whole.
    pub fn integrate_s<F: Fn(RadialPoint) -> f64>(&self, f: &F, s_lo: f64, s_hi: f64) -> QuadResult {
        self.integrate_s_budget(f, s_lo, s_hi, self.cfg.max_evals)
    }

    fn integrate_s_budget<F: Fn(RadialPoint) -> f64>(
        &self,
        f: &F,
        s_lo: f64,
        s_hi: f64,
        budget: usize,
    ) -> QuadResult {
        if s_hi <= s_lo {
            return QuadResult::zero();
        }
        let n = self.rule.nodes.len();
        let (whole, div) = self.panel(f, s_lo, s_hi);
        let mut out = QuadResult {
            value: whole,
            evals: n,
            divergent: div,
            converged: true,
        };
        if div {
            return out;
        }
        // Stack of (lo, hi, estimate) panels awaiting a bisection test.
        let mut pending = vec![(s_lo, s_hi, whole)];
        let mut accepted = 0.0;
        while let Some((a, b, est)) = pending.pop() {
            if out.evals + 2 * n > budget {
                out.converged = false;
                accepted += est + pending.iter().map(|p| p.2).sum::<f64>();
                pending.clear();
                break;
            }
            let m = 0.5 * (a + b);
            let (left, dl) = self.panel(f, a, m);
            let (right, dr) = self.panel(f, m, b);
            out.evals += 2 * n;
            if dl || dr {
                out.divergent = true;
                out.value = OVERFLOW_CLAMP;
                return out;
            }
            let refined = left + right;
            let tol = self.cfg.rel_tol * refined.abs() + self.cfg.abs_tol;
            if (refined - est).abs() <= tol || m <= a || m >= b {
                accepted += refined;
            } else {
                pending.push((m, b, right));
                pending.push((a, m, left));
            }
        }
        out.value = accepted.min(OVERFLOW_CLAMP);
        out.divergent = accepted >= OVERFLOW_CLAMP;
        out
    }

    /// Integral over graded cell `j`.
    pub fn cell<F: Fn(RadialPoint) -> f64>(&self, f: &F, j: usize) -> QuadResult {
        self.integrate_s(f, graded_boundary(j + 1), graded_boundary(j))
    }

    /// Integrals over cells `0..k_max`, in order.
    pub fn cells<F: Fn(RadialPoint) -> f64>(&self, f: &F, k_max: usize) -> Vec<QuadResult> {
        (0..k_max).map(|j| self.cell(f, j)).collect()
    }

    /// `∫_0^t f(r) dr` with an evaluation budget shared by all cells.
    pub fn integrate<F: Fn(RadialPoint) -> f64>(&self, f: &F, t: f64) -> QuadResult {
        self.integrate_to_s(f, 1.0 - t)
    }

    /// `∫_0^{1-s_end} f(r) dr`, where `s_end` is given directly.
    pub fn integrate_to_s<F: Fn(RadialPoint) -> f64>(&self, f: &F, s_end: f64) -> QuadResult {
        let mut total = QuadResult::zero();
        if s_end >= 1.0 {
            return total;
        }
        let mut j = 0;
        loop {
            let hi = graded_boundary(j);
            let lo = graded_boundary(j + 1).max(s_end);
            let remaining = self.cfg.max_evals.saturating_sub(total.evals);
            let part = self.integrate_s_budget(f, lo, hi, remaining);
            total.absorb(part);
            if total.divergent || lo <= s_end {
                break;
            }
            j += 1;
        }
        total
    }
}
