//! Radial integral ladders `L(t_k) = (1 - t_k^2)^β sup_θ ∫_0^{t_k} h(re^{iθ}) dr`
//! on the schedule `t_k = 1 - 2^{-k}`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::quadrature::{graded_boundary, QuadResult, QuadratureConfig, RadialPoint, RadialQuadrature};
use crate::series::OVERFLOW_CLAMP;
use crate::spaces::{disk_weight, golden_max, top_indices};
use crate::symbols::SymbolSpec;

use super::rules::RuleConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderConfig {
    pub k_min: usize,
    pub k_max: usize,
    /// Uniform angles in the θ sweep.
    pub angles: usize,
    /// Grid maxima refined per rung.
    pub refine_top: usize,
    /// Minimum golden-section iterations per refinement.
    pub golden_iterations: usize,
    pub quad: QuadratureConfig,
    pub rules: RuleConfig,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            k_min: 3,
            k_max: 40,
            angles: 512,
            refine_top: 3,
            golden_iterations: 40,
            quad: QuadratureConfig::default(),
            rules: RuleConfig::default(),
        }
    }
}

impl LadderConfig {
    pub fn t(k: usize) -> f64 {
        1.0 - graded_boundary(k)
    }

    /// Golden-section iterations for rung `k`: enough to shrink the bracket
    /// well below the boundary distance `2^{-k}`.
    fn iterations_for(&self, k: usize) -> usize {
        let width = 2.0 * TAU / self.angles as f64;
        let target = 1e-3 * graded_boundary(k);
        let needed = ((target / width).ln() / 0.618_033_988_749_895_f64.ln()).ceil();
        self.golden_iterations.max(needed.max(0.0) as usize)
    }
}

/// Nonnegative radial integrand `h(θ, r)`.
pub trait RadialIntegrand: Sync {
    fn eval(&self, theta: f64, p: RadialPoint) -> f64;
}

impl<F: Fn(f64, RadialPoint) -> f64 + Sync> RadialIntegrand for F {
    fn eval(&self, theta: f64, p: RadialPoint) -> f64 {
        self(theta, p)
    }
}

/// `|g'(re^{iθ})| / (1 - r^2)^α`.
pub struct DerivativeIntegrand<'a> {
    pub g: &'a SymbolSpec,
    pub alpha: f64,
}

impl RadialIntegrand for DerivativeIntegrand<'_> {
    fn eval(&self, theta: f64, p: RadialPoint) -> f64 {
        self.g.derivative(Complex64::from_polar(p.r, theta)).norm() / disk_weight(p.s, self.alpha)
    }
}

/// `|g(re^{iθ})| / (1 - r^2)^{α+1}`.
pub struct SymbolIntegrand<'a> {
    pub g: &'a SymbolSpec,
    pub alpha: f64,
}

impl RadialIntegrand for SymbolIntegrand<'_> {
    fn eval(&self, theta: f64, p: RadialPoint) -> f64 {
        self.g.eval(Complex64::from_polar(p.r, theta)).norm() / disk_weight(p.s, self.alpha + 1.0)
    }
}

/// `∫_0^t |g'(re^{iθ})| / (1 - r^2)^α dr`.
pub fn radial_integral(g: &SymbolSpec, alpha: f64, theta: f64, t: f64, quad: &QuadratureConfig) -> QuadResult {
    let h = DerivativeIntegrand { g, alpha };
    RadialQuadrature::new(*quad, alpha).integrate(&|p| h.eval(theta, p), t)
}

/// `∫_0^t |g(re^{iθ})| / (1 - r^2)^{α+1} dr`.
pub fn sg_radial_integral(g: &SymbolSpec, alpha: f64, theta: f64, t: f64, quad: &QuadratureConfig) -> QuadResult {
    let h = SymbolIntegrand { g, alpha };
    RadialQuadrature::new(*quad, alpha + 1.0).integrate(&|p| h.eval(theta, p), t)
}

/// Graded-cell integrals along one ray.
#[derive(Debug, Clone)]
struct Ray {
    theta: f64,
    /// `prefix[k] = ∫_0^{t_k}`, with `prefix[0] = 0`.
    prefix: Vec<f64>,
    /// `clean[k]`: every cell below `t_k` converged.
    clean: Vec<bool>,
    /// `divergent[k]`: some cell below `t_k` hit the clamp.
    divergent: Vec<bool>,
    evals: usize,
}

fn ray<H: RadialIntegrand + ?Sized>(h: &H, q: &RadialQuadrature, theta: f64, k_max: usize) -> Ray {
    let mut prefix = Vec::with_capacity(k_max + 1);
    let mut clean = Vec::with_capacity(k_max + 1);
    let mut divergent = Vec::with_capacity(k_max + 1);
    prefix.push(0.0);
    clean.push(true);
    divergent.push(false);
    let mut evals = 0;
    let f = |p: RadialPoint| h.eval(theta, p);
    for j in 0..k_max {
        let c = q.cell(&f, j);
        evals += c.evals;
        prefix.push((prefix[j] + c.value).min(OVERFLOW_CLAMP));
        clean.push(clean[j] && c.converged);
        divergent.push(divergent[j] || c.divergent);
    }
    Ray {
        theta,
        prefix,
        clean,
        divergent,
        evals,
    }
}

fn integral_to_rung<H: RadialIntegrand + ?Sized>(h: &H, q: &RadialQuadrature, theta: f64, k: usize) -> f64 {
    let f = |p: RadialPoint| h.eval(theta, p);
    let mut acc = 0.0;
    for j in 0..k {
        acc += q.cell(&f, j).value;
    }
    acc.min(OVERFLOW_CLAMP)
}

/// A radial ladder with its per-rung diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialLadder {
    pub ks: Vec<usize>,
    pub t_values: Vec<f64>,
    pub values: Vec<f64>,
    pub argmax_angles: Vec<f64>,
    pub reliable: Vec<bool>,
    pub divergent: Vec<bool>,
    pub beta: f64,
    pub evals: usize,
    #[serde(skip)]
    angles: Vec<f64>,
    /// `prefix[a][k]` for every sampled angle.
    #[serde(skip)]
    prefix: Vec<Vec<f64>>,
}

impl RadialLadder {
    pub fn any_divergent(&self) -> bool {
        self.divergent.iter().any(|&d| d)
    }

    /// `(k, L(t_k), reliable)` triples for the decision rules.
    pub fn rungs(&self) -> Vec<(f64, f64, bool)> {
        self.ks
            .iter()
            .zip(&self.values)
            .zip(&self.reliable)
            .map(|((&k, &v), &ok)| (k as f64, v, ok))
            .collect()
    }

    /// Largest rung value.
    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `sup_θ ∫_0^{t_k} h` over the sampled angles, unweighted.
    pub fn sup_integral(&self, k: usize) -> f64 {
        self.prefix.iter().map(|p| p[k]).fold(0.0, f64::max)
    }

    /// Angles sampled by the sweep, grid first, then refinements.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Tail values `D(t_m, ·)`: for each `m` in `k_min..=k_max/2`, the
    /// largest of `(1 - t_k^2)^β sup_θ ∫_{t_m}^{t_k} h` over the last
    /// `window` rungs `k`.
    pub fn tail_outer(&self, window: usize) -> Vec<(usize, f64)> {
        let Some(&k_max) = self.ks.last() else {
            return Vec::new();
        };
        let k_min = self.ks[0];
        let inner: Vec<usize> = self.ks.iter().rev().take(window).copied().collect();
        (k_min..=k_max / 2)
            .map(|m| {
                let v = inner
                    .iter()
                    .map(|&k| {
                        let w = disk_weight(graded_boundary(k), self.beta);
                        let d = self
                            .prefix
                            .iter()
                            .map(|p| p[k] - p[m])
                            .fold(0.0, f64::max);
                        (w * d).min(OVERFLOW_CLAMP)
                    })
                    .fold(0.0, f64::max);
                (m, v)
            })
            .collect()
    }
}

/// Builds the ladder for `h` with target exponent `beta`. `weight_exponent`
/// selects the quadrature variable.
pub fn build_ladder<H: RadialIntegrand>(h: &H, weight_exponent: f64, beta: f64, cfg: &LadderConfig) -> RadialLadder {
    let q = RadialQuadrature::new(cfg.quad, weight_exponent);
    let k_max = cfg.k_max;
    let m = cfg.angles;
    let grid: Vec<Ray> = (0..m)
        .into_par_iter()
        .map(|j| ray(h, &q, TAU * j as f64 / m as f64, k_max))
        .collect();

    let ks: Vec<usize> = (cfg.k_min..=k_max).collect();
    let step = TAU / m as f64;
    let refined: Vec<f64> = ks
        .par_iter()
        .flat_map_iter(|&k| {
            let at_k: Vec<f64> = grid.iter().map(|r| r.prefix[k]).collect();
            let iterations = cfg.iterations_for(k);
            top_indices(&at_k, cfg.refine_top)
                .into_iter()
                .filter(|&j| at_k[j] > 0.0 && at_k[j] < OVERFLOW_CLAMP)
                .map(|j| {
                    let c = grid[j].theta;
                    golden_max(|t| integral_to_rung(h, &q, t, k), c - step, c + step, iterations)
                        .0
                        .rem_euclid(TAU)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut extra: Vec<f64> = Vec::with_capacity(refined.len());
    for theta in refined {
        if !extra.contains(&theta) && !grid.iter().any(|r| r.theta == theta) {
            extra.push(theta);
        }
    }
    let extra_rays: Vec<Ray> = extra.par_iter().map(|&t| ray(h, &q, t, k_max)).collect();
    let rays: Vec<Ray> = grid.into_iter().chain(extra_rays).collect();

    let mut values = Vec::with_capacity(ks.len());
    let mut argmax_angles = Vec::with_capacity(ks.len());
    let mut reliable = Vec::with_capacity(ks.len());
    let mut divergent = Vec::with_capacity(ks.len());
    for &k in &ks {
        let mut best = 0;
        for (a, r) in rays.iter().enumerate() {
            if r.prefix[k] > rays[best].prefix[k] {
                best = a;
            }
        }
        let w = disk_weight(graded_boundary(k), beta);
        let div = rays.iter().any(|r| r.divergent[k]);
        values.push(if div {
            OVERFLOW_CLAMP
        } else {
            (w * rays[best].prefix[k]).min(OVERFLOW_CLAMP)
        });
        argmax_angles.push(rays[best].theta);
        reliable.push(rays.iter().all(|r| r.clean[k]));
        divergent.push(div);
    }
    RadialLadder {
        t_values: ks.iter().map(|&k| LadderConfig::t(k)).collect(),
        ks,
        values,
        argmax_angles,
        reliable,
        divergent,
        beta,
        evals: rays.iter().map(|r| r.evals).sum(),
        angles: rays.iter().map(|r| r.theta).collect(),
        prefix: rays.into_iter().map(|r| r.prefix).collect(),
    }
}

/// The T_g ladder `(1 - t^2)^β sup_θ ∫_0^t |g'| / (1 - r^2)^α`.
pub fn tg_ladder(g: &SymbolSpec, alpha: f64, beta: f64, cfg: &LadderConfig) -> RadialLadder {
    build_ladder(&DerivativeIntegrand { g, alpha }, alpha, beta, cfg)
}

/// The S_g ladder `(1 - t^2)^β sup_θ ∫_0^t |g| / (1 - r^2)^{α+1}`.
pub fn sg_ladder(g: &SymbolSpec, alpha: f64, beta: f64, cfg: &LadderConfig) -> RadialLadder {
    build_ladder(&SymbolIntegrand { g, alpha }, alpha + 1.0, beta, cfg)
}

/// Estimate of `sup_θ ∫_0^1 |g'(re^{iθ})| dr`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullIntegral {
    pub value: f64,
    pub argmax_angle: f64,
    /// Contributions of the last graded cells decay geometrically.
    pub converged: bool,
    pub divergent: bool,
    /// Contraction ratio of the last cell contributions at the maximizing angle.
    pub tail_ratio: f64,
}

/// Full radial integral along one ray: graded cells up to `k_max` plus a
/// geometric extrapolation of the remaining cells.
fn full_ray(q: &RadialQuadrature, g: &SymbolSpec, theta: f64, k_max: usize, window: usize) -> (f64, bool, bool, f64) {
    let f = |p: RadialPoint| g.derivative(Complex64::from_polar(p.r, theta)).norm();
    let mut cells = Vec::with_capacity(k_max);
    let mut divergent = false;
    for j in 0..k_max {
        let c = q.cell(&f, j);
        divergent |= c.divergent;
        cells.push(c.value);
    }
    let total: f64 = cells.iter().sum();
    if divergent {
        return (OVERFLOW_CLAMP, false, true, f64::INFINITY);
    }
    let tail = &cells[cells.len().saturating_sub(window)..];
    let negligible = tail.iter().all(|&c| c <= 1e-15 * total.max(f64::MIN_POSITIVE));
    let ratio = tail
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max);
    let converged = negligible || ratio <= 0.75;
    let last = *cells.last().unwrap_or(&0.0);
    let extrapolated = if converged && ratio < 1.0 {
        last * ratio / (1.0 - ratio)
    } else {
        0.0
    };
    (total + extrapolated, converged, false, ratio)
}

pub fn full_radial_integral_sup(g: &SymbolSpec, cfg: &LadderConfig) -> FullIntegral {
    let q = RadialQuadrature::new(cfg.quad, 0.0);
    let m = cfg.angles;
    let window = cfg.rules.window;
    let grid: Vec<(f64, (f64, bool, bool, f64))> = (0..m)
        .into_par_iter()
        .map(|j| {
            let theta = TAU * j as f64 / m as f64;
            (theta, full_ray(&q, g, theta, cfg.k_max, window))
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|r| r.1 .0).collect();
    let step = TAU / m as f64;
    let refined: Vec<(f64, (f64, bool, bool, f64))> = top_indices(&values, cfg.refine_top)
        .into_par_iter()
        .map(|j| {
            let c = grid[j].0;
            let (theta, _) = golden_max(
                |t| full_ray(&q, g, t, cfg.k_max, window).0,
                c - step,
                c + step,
                cfg.golden_iterations,
            );
            (theta.rem_euclid(TAU), full_ray(&q, g, theta, cfg.k_max, window))
        })
        .collect();
    let mut best = &grid[0];
    for r in grid.iter().chain(refined.iter()) {
        if r.1 .0 > best.1 .0 {
            best = r;
        }
    }
    let all_converged = grid.iter().chain(refined.iter()).all(|r| r.1 .1);
    let any_divergent = grid.iter().chain(refined.iter()).any(|r| r.1 .2);
    FullIntegral {
        value: best.1 .0,
        argmax_angle: best.0,
        converged: all_converged && !any_divergent,
        divergent: any_divergent,
        tail_ratio: best.1 .3,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{log_radial_integral, lookup};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn quick() -> LadderConfig {
        LadderConfig {
            angles: 64,
            k_max: 24,
            ..LadderConfig::default()
        }
    }

    #[test]
    fn radial_integral_examples() {
        let q = QuadratureConfig::default();
        let id = lookup("identity").unwrap();
        assert_abs_diff_eq!(radial_integral(&id, 0.0, 1.3, 0.9, &q).value, 0.9, epsilon = 1e-12);
        let log = lookup("log").unwrap();
        let r = radial_integral(&log, 0.0, 0.0, 0.99, &q);
        assert_abs_diff_eq!(r.value, 100f64.ln(), epsilon = 1e-5);
        assert!(r.evals <= 10_000);
        let r = radial_integral(&log, 0.0, PI, 1.0 - 1e-12, &q);
        assert_abs_diff_eq!(r.value, 2f64.ln(), epsilon = 1e-5);
        assert!(r.evals <= 10_000);
    }

    #[test]
    fn radial_integral_matches_oracle_at_generic_angles() {
        let q = QuadratureConfig::default();
        let log = lookup("log").unwrap();
        for theta in [0.01, 0.3, 1.0, 2.5] {
            for t in [0.5, 0.9, 0.999] {
                let exact = log_radial_integral(theta, t);
                let got = radial_integral(&log, 0.0, theta, t, &q).value;
                assert!((got - exact).abs() <= 1e-6 * exact, "θ={theta} t={t}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn sg_radial_integral_examples() {
        let q = QuadratureConfig::default();
        let one = lookup("one").unwrap();
        let exact = 1.0 / 3.0 + 0.25 * 3f64.ln();
        assert_abs_diff_eq!(sg_radial_integral(&one, 1.0, 0.7, 0.5, &q).value, exact, epsilon = 1e-10);
        let affine = lookup("affine").unwrap();
        let v = sg_radial_integral(&affine, 1.0, 0.0, 1.0 - 1e-4, &q).value;
        assert!(v > 2.0);
        let closer = sg_radial_integral(&affine, 1.0, 0.0, 1.0 - 1e-8, &q).value;
        assert!(closer - v > 2.0, "growth {}", closer - v);
        let zero = lookup("zero").unwrap();
        assert_eq!(sg_radial_integral(&zero, 1.0, 0.0, 0.999, &q).value, 0.0);
    }

    #[test]
    fn beta_zero_ladders_are_nondecreasing() {
        for name in ["identity", "log", "cayley", "lacunary"] {
            let g = lookup(name).unwrap();
            let l = tg_ladder(&g, 0.0, 0.0, &quick());
            for w in l.values.windows(2) {
                assert!(w[1] >= w[0], "{name}: {w:?}");
            }
        }
    }

    #[test]
    fn tail_values_shrink_with_the_inner_endpoint() {
        let g = lookup("identity").unwrap();
        let l = tg_ladder(&g, 0.0, 0.0, &quick());
        let tail = l.tail_outer(8);
        for w in tail.windows(2) {
            assert!(w[1].1 <= w[0].1);
        }
        let (m, v) = *tail.last().unwrap();
        assert_abs_diff_eq!(v, graded_boundary(m) - graded_boundary(24), epsilon = 1e-12);
    }

    #[test]
    fn identity_ladder_tracks_t() {
        let g = lookup("identity").unwrap();
        let l = tg_ladder(&g, 0.0, 0.0, &quick());
        for (t, v) in l.t_values.iter().zip(&l.values) {
            assert_abs_diff_eq!(t, v, epsilon = 1e-12);
        }
    }

    #[test]
    fn refinement_finds_rotated_peaks() {
        let g = lookup("cayley").unwrap().rotated(0.123);
        let l = tg_ladder(&g, 0.0, 1.0, &quick());
        let plain = tg_ladder(&lookup("cayley").unwrap(), 0.0, 1.0, &quick());
        for (a, b) in l.values.iter().zip(&plain.values) {
            assert!((a - b).abs() <= 1e-6 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn full_integral_examples() {
        let cfg = quick();
        let id = full_radial_integral_sup(&lookup("identity").unwrap(), &cfg);
        assert!(id.converged);
        assert_abs_diff_eq!(id.value, 1.0, epsilon = 1e-12);
        let half = full_radial_integral_sup(&lookup("half_square").unwrap(), &cfg);
        assert_abs_diff_eq!(half.value, 0.5, epsilon = 1e-12);
        let log = full_radial_integral_sup(&lookup("log").unwrap(), &cfg);
        assert!(!log.converged);
    }
}
