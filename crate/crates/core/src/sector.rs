//! Conformal map `ψ_{η,θ}` of the sector
//! `Ω_{η,θ} = {z : 0 < |z| < 1, |arg(e^{-iθ} z)| < η/2}` onto the disk, normalized
//! so that `ψ(½e^{iθ}) = 0` and `ψ(z) → e^{iθ}` at the vertex.
//!
//! The chain is: rotate the bisector to the positive axis, open the sector to
//! the right half-disk with `s ↦ s^{π/η}`, turn it into the upper half-disk,
//! apply `w ↦ -(w + 1/w)/2` onto the upper half-plane and the Cayley map onto
//! the disk, then a real Möbius automorphism sending the image of `½` to 0.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::series::FunctionHandle;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SectorError {
    #[error("invalid sector parameters: {0}")]
    InvalidParams(String),
    #[error("normalization residual {residual:e} exceeds 1e-10")]
    Construction { residual: f64 },
    #[error("{z} lies outside the sector")]
    Domain { z: Complex64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorParams {
    /// Aperture `η ∈ (0, π)`.
    pub eta: f64,
    /// Bisector angle `θ ∈ [0, 2π)`.
    pub theta: f64,
    /// Outer radius in `(0, 1]`.
    pub radius: f64,
}

impl SectorParams {
    pub fn new(eta: f64, theta: f64, radius: f64) -> Result<Self, SectorError> {
        if !(eta > 0.0 && eta < PI) {
            return Err(SectorError::InvalidParams(format!("aperture {eta} not in (0, π)")));
        }
        if !(0.0..TAU).contains(&theta) {
            return Err(SectorError::InvalidParams(format!("bisector {theta} not in [0, 2π)")));
        }
        if !(radius > 0.0 && radius <= 1.0) {
            return Err(SectorError::InvalidParams(format!("radius {radius} not in (0, 1]")));
        }
        Ok(SectorParams { eta, theta, radius })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let s = z * Complex64::from_polar(1.0, -self.theta);
        let r = s.norm();
        r > 0.0 && r < self.radius && s.arg().abs() < self.eta / 2.0
    }
}

/// Intermediate quantities of the chain at one point.
struct Chain {
    /// `e^{-iθ} z`.
    s: Complex64,
    /// `s^{π/η}`.
    w: Complex64,
    /// Upper half-plane image.
    h: Complex64,
    /// Disk image before the automorphism.
    zeta: Complex64,
    /// `1 - |ζ|^2`.
    zeta_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorMap {
    pub params: SectorParams,
    /// Exponent `π/η`.
    pub power: f64,
    /// Real Möbius parameter: the chain image of `½`.
    pub q0: f64,
    /// `|ψ(½e^{iθ})|`.
    pub center_residual: f64,
    /// `|ψ(εe^{iθ}) - e^{iθ}|` at `ε = 1e-12`.
    pub vertex_residual: f64,
}

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

impl SectorMap {
    pub fn new(params: SectorParams) -> Result<Self, SectorError> {
        let power = PI / params.eta;
        let mut map = SectorMap {
            params,
            power,
            q0: 0.0,
            center_residual: 0.0,
            vertex_residual: 0.0,
        };
        map.q0 = map.chain_rotated(Complex64::new(0.5, 0.0)).zeta.re;
        let rot = Complex64::from_polar(1.0, params.theta);
        map.center_residual = map.psi(rot * 0.5).norm();
        map.vertex_residual = (map.psi(rot * 1e-12) - rot).norm();
        let residual = map.center_residual.max(map.vertex_residual);
        if residual.is_nan() || residual > 1e-10 {
            return Err(SectorError::Construction { residual });
        }
        Ok(map)
    }

    fn chain_rotated(&self, s: Complex64) -> Chain {
        let w = s.powf(self.power);
        let wn2 = w.norm_sqr();
        let h = I * (w.inv() - w) * 0.5;
        // Im H = Re w (1 - |w|^2) / (2|w|^2), with 1 - |w|^2 kept accurate.
        let one_minus_w2 = -(self.power * s.norm_sqr().ln()).exp_m1();
        let im_h = w.re * one_minus_w2 / (2.0 * wn2);
        let hi = h + I;
        let zeta = (h - I) / hi;
        let zeta_gap = 4.0 * im_h / hi.norm_sqr();
        Chain {
            s,
            w,
            h,
            zeta,
            zeta_gap,
        }
    }

    fn chain(&self, z: Complex64) -> Chain {
        self.chain_rotated(z * Complex64::from_polar(1.0, -self.params.theta))
    }

    /// `ψ(z)`.
    pub fn psi(&self, z: Complex64) -> Complex64 {
        let c = self.chain(z);
        let q = self.q0;
        let phi = (c.zeta - q) / (ONE - c.zeta * q);
        Complex64::from_polar(1.0, self.params.theta) * phi
    }

    /// `ψ'(z)` by the chain rule.
    pub fn psi_prime(&self, z: Complex64) -> Complex64 {
        self.psi_prime_of(&self.chain(z))
    }

    fn psi_prime_of(&self, c: &Chain) -> Complex64 {
        let q = self.q0;
        let dphi = (1.0 - q * q) / (ONE - c.zeta * q).powi(2);
        let dzeta = 2.0 * I / (c.h + I).powi(2);
        // H = i(1/w - w)/2, so dH/dw = -i(1/w^2 + 1)/2.
        let dh = -I * (c.w.powi(-2) + 1.0) * 0.5;
        let dw = self.power * c.w / c.s;
        // The rotations e^{iθ} and e^{-iθ} cancel.
        dphi * dzeta * dh * dw
    }

    /// `1 - |ψ(z)|^2`, accurate near the boundary.
    pub fn one_minus_psi2(&self, z: Complex64) -> f64 {
        self.gap_of(&self.chain(z))
    }

    fn gap_of(&self, c: &Chain) -> f64 {
        let q = self.q0;
        (1.0 - q * q) * c.zeta_gap / (ONE - c.zeta * q).norm_sqr()
    }

    /// `|z| |ψ'(z)| / (1 - |ψ(z)|^2)`.
    pub fn density_ratio(&self, z: Complex64) -> Result<f64, SectorError> {
        if !self.params.contains(z) {
            return Err(SectorError::Domain { z });
        }
        let c = self.chain(z);
        Ok(z.norm() * self.psi_prime_of(&c).norm() / self.gap_of(&c))
    }

    /// `ψ` and `ψ'` as a closed-form handle.
    pub fn handle(&self) -> FunctionHandle {
        let (a, b) = (*self, *self);
        FunctionHandle::closed_form(move |z| a.psi(z), self.params.radius)
            .with_derivative(move |z| b.psi_prime(z))
    }

    /// `|ψ(εe^{iθ}) - e^{iθ}|` along the given sequence of `ε`.
    pub fn vertex_approach(&self, eps: &[f64]) -> Vec<f64> {
        let rot = Complex64::from_polar(1.0, self.params.theta);
        eps.iter().map(|&e| (self.psi(rot * e) - rot).norm()).collect()
    }
}

/// Radical inverse of `i` in base `b`.
pub fn radical_inverse(mut i: u64, b: u64) -> f64 {
    let inv = 1.0 / b as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    x
}

/// The `n`-th Halton point of `Ω^{1/2}_{γ,θ}` (bases 2 and 3, `n >= 1`).
pub fn halton_sector_point(n: u64, gamma: f64, theta: f64) -> Complex64 {
    let u = radical_inverse(n, 2);
    let v = radical_inverse(n, 3);
    Complex64::from_polar(0.5 * u, theta + gamma * (v - 0.5))
}

fn check_apertures(gamma: f64, eta: f64) -> Result<(), SectorError> {
    if !(gamma > 0.0 && gamma < eta && eta < PI) {
        return Err(SectorError::InvalidParams(format!(
            "need 0 < γ < η < π, got γ = {gamma}, η = {eta}"
        )));
    }
    Ok(())
}

/// Largest density ratio over the first `samples` Halton points of
/// `Ω^{1/2}_{γ,θ}` under `ψ_{η,θ}`.
pub fn estimate_density_constant_at(gamma: f64, eta: f64, theta: f64, samples: usize) -> Result<f64, SectorError> {
    check_apertures(gamma, eta)?;
    let map = SectorMap::new(SectorParams::new(eta, theta, 1.0)?)?;
    let ratios: Vec<f64> = (1..=samples as u64)
        .into_par_iter()
        .map(|n| {
            let z = halton_sector_point(n, gamma, theta);
            map.density_ratio(z).unwrap_or(0.0)
        })
        .collect();
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// [`estimate_density_constant_at`] on the sector with bisector 0.
pub fn estimate_density_constant(gamma: f64, eta: f64, samples: usize) -> Result<f64, SectorError> {
    estimate_density_constant_at(gamma, eta, 0.0, samples)
}

/// Largest density ratio over the Halton sample with every point also
/// shrunk toward the vertex by `2^{-j}`, `j = 1..=levels`.
pub fn density_constant_near_vertex(gamma: f64, eta: f64, samples: usize, levels: u32) -> Result<f64, SectorError> {
    check_apertures(gamma, eta)?;
    let map = SectorMap::new(SectorParams::new(eta, 0.0, 1.0)?)?;
    let ratios: Vec<f64> = (1..=samples as u64)
        .into_par_iter()
        .map(|n| {
            let z = halton_sector_point(n, gamma, 0.0);
            (0..=levels)
                .map(|j| map.density_ratio(z * (-(j as f64)).exp2()).unwrap_or(0.0))
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Largest `|ψ_{η,θ}(e^{iθ}z) - e^{iθ}ψ_{η,0}(z)|` over `angles` bisectors and
/// the first `samples` Halton points of `Ω^{1/2}_{γ,0}`.
pub fn rotation_deviation(gamma: f64, eta: f64, angles: usize, samples: usize) -> Result<f64, SectorError> {
    check_apertures(gamma, eta)?;
    let base = SectorMap::new(SectorParams::new(eta, 0.0, 1.0)?)?;
    let mut worst = 0.0_f64;
    for j in 0..angles {
        let theta = TAU * j as f64 / angles as f64;
        let map = SectorMap::new(SectorParams::new(eta, theta, 1.0)?)?;
        let rot = Complex64::from_polar(1.0, theta);
        for n in 1..=samples as u64 {
            let z = halton_sector_point(n, gamma, 0.0);
            worst = worst.max((map.psi(rot * z) - rot * base.psi(z)).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn map(eta: f64, theta: f64) -> SectorMap {
        SectorMap::new(SectorParams::new(eta, theta, 1.0).unwrap()).unwrap()
    }

    fn interior_sample(eta: f64, theta: f64) -> Vec<Complex64> {
        (1..=100)
            .map(|n| {
                let u = radical_inverse(n, 2);
                let v = radical_inverse(n, 3);
                Complex64::from_polar(0.05 + 0.9 * u, theta + 0.9 * eta * (v - 0.5))
            })
            .collect()
    }

    #[test]
    fn parameter_validation() {
        assert!(SectorParams::new(0.0, 0.0, 1.0).is_err());
        assert!(SectorParams::new(PI, 0.0, 1.0).is_err());
        assert!(SectorParams::new(1.0, TAU, 1.0).is_err());
        assert!(SectorParams::new(1.0, 0.0, 1.5).is_err());
        assert!(estimate_density_constant(PI / 2.0, PI / 4.0, 10).is_err());
    }

    #[test]
    fn normalization() {
        for (eta, theta) in [(PI / 2.0, 0.0), (2.0 * PI / 3.0, 1.0), (0.3, 4.0)] {
            let m = map(eta, theta);
            assert!(m.center_residual <= 1e-10);
            assert!(m.vertex_residual <= 1e-10);
            let approach = m.vertex_approach(&[1e-2, 1e-3, 1e-4, 1e-5, 1e-6]);
            for w in approach.windows(2) {
                assert!(w[1] <= w[0]);
            }
            assert!(approach[4] < 1e-3);
        }
    }

    #[test]
    fn image_lies_in_the_disk() {
        let m = map(PI / 2.0, 0.7);
        for z in interior_sample(PI / 2.0, 0.7) {
            assert!(m.psi(z).norm() < 1.0);
            assert!(m.one_minus_psi2(z) > 0.0);
            assert_abs_diff_eq!(m.one_minus_psi2(z), 1.0 - m.psi(z).norm_sqr(), epsilon = 1e-12);
        }
        for j in 0..50 {
            let arg = 0.7 + 0.9 * (PI / 2.0) * (j as f64 / 49.0 - 0.5);
            let z = Complex64::from_polar(1.0 - 5e-5, arg);
            assert!(m.psi(z).norm() > 0.999, "{z}");
        }
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        for (eta, theta) in [(PI / 2.0, 0.0), (2.0 * PI / 3.0, 2.0)] {
            let m = map(eta, theta);
            for z in interior_sample(eta, theta) {
                let h = 1e-5;
                let fd = (m.psi(z + h) - m.psi(z - h)) / (2.0 * h);
                assert!((fd - m.psi_prime(z)).norm() <= 1e-6 * m.psi_prime(z).norm().max(1.0), "{z} {fd} {}", m.psi_prime(z));
            }
        }
        let handle = map(PI / 2.0, 0.0).handle();
        assert!(handle.has_derivative());
    }

    #[test]
    fn rotation_equivariance() {
        let base = map(PI / 2.0, 0.0);
        for theta in [0.5, 2.0, 5.5] {
            let m = map(PI / 2.0, theta);
            let rot = Complex64::from_polar(1.0, theta);
            for z in interior_sample(PI / 2.0, 0.0) {
                let lhs = m.psi(rot * z);
                let rhs = rot * base.psi(z);
                assert!((lhs - rhs).norm() < 1e-10);
                let r1 = m.density_ratio(rot * z).unwrap();
                let r0 = base.density_ratio(z).unwrap();
                assert!((r1 - r0).abs() < 1e-10 * r0.max(1.0));
            }
        }
    }

    #[test]
    fn rotation_deviation_is_rounding_level() {
        assert!(rotation_deviation(PI / 4.0, PI / 2.0, 8, 200).unwrap() < 1e-12);
        assert!(rotation_deviation(PI / 2.0, PI / 4.0, 8, 10).is_err());
    }

    #[test]
    fn density_ratio_at_the_center() {
        let m = map(PI / 2.0, 0.0);
        let z = Complex64::new(0.5, 0.0);
        assert_abs_diff_eq!(m.density_ratio(z).unwrap(), 0.5 * m.psi_prime(z).norm(), epsilon = 1e-14);
        assert!(m.density_ratio(Complex64::new(-0.5, 0.0)).is_err());
    }

    #[test]
    fn estimates_are_nested() {
        let a = estimate_density_constant(PI / 4.0, PI / 2.0, 1000).unwrap();
        let b = estimate_density_constant(PI / 4.0, PI / 2.0, 10_000).unwrap();
        assert!(a <= b);
        let near = density_constant_near_vertex(PI / 4.0, PI / 2.0, 1000, 20).unwrap();
        assert!(near <= b + 1e-2);
    }
}
