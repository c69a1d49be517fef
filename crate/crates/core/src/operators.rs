//! The Volterra-type operator `T_g f = ∫_0^z f g'` and its companion
//! `S_g f = ∫_0^z f' g`, applied on Taylor coefficients.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::series::TaylorSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    Tg,
    Sg,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Tg => "Tg",
            OperatorKind::Sg => "Sg",
        })
    }
}

impl FromStr for OperatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "tg" | "t" => Ok(OperatorKind::Tg),
            "sg" | "s" => Ok(OperatorKind::Sg),
            _ => Err(format!("unknown operator `{s}` (expected Tg or Sg)")),
        }
    }
}

fn integrate_product(a: &TaylorSeries, b: &TaylorSeries) -> TaylorSeries {
    let full = a.degree() + b.degree();
    a.cauchy_product(b, full).antiderivative()
}

/// `T_g f`.
pub fn apply_tg(g: &TaylorSeries, f: &TaylorSeries) -> TaylorSeries {
    integrate_product(f, &g.derivative())
}

/// `S_g f`.
pub fn apply_sg(g: &TaylorSeries, f: &TaylorSeries) -> TaylorSeries {
    integrate_product(&f.derivative(), g)
}

pub fn apply(op: OperatorKind, g: &TaylorSeries, f: &TaylorSeries) -> TaylorSeries {
    match op {
        OperatorKind::Tg => apply_tg(g, f),
        OperatorKind::Sg => apply_sg(g, f),
    }
}

/// `|T_g f(z) + S_g f(z) - (f(z) g(z) - f(0) g(0))|`.
pub fn product_rule_residual(g: &TaylorSeries, f: &TaylorSeries, z: Complex64) -> f64 {
    let lhs = apply_tg(g, f).eval(z) + apply_sg(g, f).eval(z);
    let rhs = f.eval(z) * g.eval(z) - f.coeff(0) * g.coeff(0);
    (lhs - rhs).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(c: &[f64]) -> TaylorSeries {
        TaylorSeries::from_real(c)
    }

    fn assert_coeffs(s: &TaylorSeries, expected: &[f64]) {
        for (n, &e) in expected.iter().enumerate() {
            assert!((s.coeff(n) - Complex64::new(e, 0.0)).norm() < 1e-15, "coeff {n} of {s}");
        }
        for n in expected.len()..=s.degree() {
            assert_eq!(s.coeff(n), Complex64::new(0.0, 0.0), "coeff {n} of {s}");
        }
    }

    #[test]
    fn tg_examples() {
        assert_coeffs(&apply_tg(&real(&[0.0, 1.0]), &real(&[1.0])), &[0.0, 1.0]);
        assert_coeffs(&apply_tg(&real(&[0.0, 0.0, 1.0]), &real(&[1.0])), &[0.0, 0.0, 1.0]);
        assert_coeffs(
            &apply_tg(&real(&[0.0, 0.0, 1.0]), &real(&[0.0, 1.0])),
            &[0.0, 0.0, 0.0, 2.0 / 3.0],
        );
    }

    #[test]
    fn sg_examples() {
        assert_coeffs(&apply_sg(&real(&[0.3, 2.0, 1.0]), &real(&[5.0])), &[]);
        assert_coeffs(&apply_sg(&real(&[0.0, 1.0]), &real(&[0.0, 1.0])), &[0.0, 0.0, 0.5]);
        let f = real(&[4.0, -1.0, 0.5, 2.0]);
        assert_coeffs(&apply_sg(&real(&[1.0]), &f), &[0.0, -1.0, 0.5, 2.0]);
    }

    #[test]
    fn product_rule_examples() {
        let z = Complex64::new(0.5, 0.0);
        assert_eq!(product_rule_residual(&TaylorSeries::zero(), &real(&[1.0, 2.0, 3.0]), z), 0.0);
        assert!(product_rule_residual(&real(&[0.0, 1.0]), &real(&[1.0, 1.0]), z) < 1e-14);
    }

    fn series_strategy(max_degree: usize) -> impl Strategy<Value = TaylorSeries> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_degree + 1).prop_map(|v| {
            TaylorSeries::new(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
        })
    }

    /// `(1/n) Σ_{k<n} f_k (n-k) g_{n-k}` with the matching sum of term moduli.
    fn direct_tg_coeff(g: &TaylorSeries, f: &TaylorSeries, n: usize) -> (Complex64, f64) {
        let mut s = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        for k in 0..n {
            let term = f.coeff(k) * g.coeff(n - k) * (n - k) as f64;
            s += term;
            mag += term.norm();
        }
        (s / n as f64, mag / n as f64)
    }

    proptest! {
        #[test]
        fn operators_vanish_at_origin(g in series_strategy(30), f in series_strategy(30)) {
            prop_assert_eq!(apply_tg(&g, &f).coeff(0), Complex64::new(0.0, 0.0));
            prop_assert_eq!(apply_sg(&g, &f).coeff(0), Complex64::new(0.0, 0.0));
        }

        #[test]
        fn product_rule_holds(
            g in series_strategy(50),
            f in series_strategy(50),
            r in 0.0..0.9f64,
            phi in 0.0..std::f64::consts::TAU,
        ) {
            let z = Complex64::from_polar(r, phi);
            prop_assert!(product_rule_residual(&g, &f, z) < 1e-10);
        }

        #[test]
        fn tg_matches_direct_summation(g in series_strategy(40), f in series_strategy(40)) {
            let t = apply_tg(&g, &f);
            for n in 1..=t.degree() {
                let (direct, mag) = direct_tg_coeff(&g, &f, n);
                prop_assert!((t.coeff(n) - direct).norm() <= 1e-13 * mag.max(f64::MIN_POSITIVE));
            }
        }

        #[test]
        fn operators_are_linear_in_f(
            g in series_strategy(20),
            f1 in series_strategy(20),
            f2 in series_strategy(20),
            a in -2.0..2.0f64,
            b in -2.0..2.0f64,
        ) {
            let (a, b) = (Complex64::new(a, 0.0), Complex64::new(b, 0.0));
            let combo = f1.scale(a).add(&f2.scale(b));
            for op in [OperatorKind::Tg, OperatorKind::Sg] {
                let lhs = apply(op, &g, &combo);
                let rhs = apply(op, &g, &f1).scale(a).add(&apply(op, &g, &f2).scale(b));
                let scale = rhs.coeffs().iter().map(|c| c.norm()).fold(1.0, f64::max);
                for n in 0..=lhs.degree().max(rhs.degree()) {
                    prop_assert!((lhs.coeff(n) - rhs.coeff(n)).norm() <= 1e-12 * scale);
                }
            }
        }
    }
}
