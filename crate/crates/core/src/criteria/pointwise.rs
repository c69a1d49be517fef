//! Pointwise criteria: weighted suprema of `|g'|` or `|g|` and their
//! boundary limits.

use num_complex::Complex64;

use crate::operators::OperatorKind;
use crate::spaces::{weighted_sup, ComplexSampler, DiskGrid, SpacePair, SupEstimate};
use crate::symbols::SymbolSpec;

use super::rules::{finiteness, vanishing, RuleConfig};
use super::{CriteriaError, CriterionKind, CriterionVerdict, Direction, Question, VerdictTag};

/// Weighted modulus profile `(1 - |z|^2)^e |g'|` (T_g) or `(1 - |z|^2)^e |g|`
/// (S_g) with the matching exponent.
pub fn pointwise_profile(g: &SymbolSpec, op: OperatorKind, pair: SpacePair, grid: &DiskGrid) -> SupEstimate {
    match op {
        OperatorKind::Tg => weighted_sup(
            &ComplexSampler(|z: Complex64| g.derivative(z)),
            pair.beta + 1.0 - pair.alpha,
            grid,
        ),
        OperatorKind::Sg => weighted_sup(&ComplexSampler(|z: Complex64| g.eval(z)), pair.beta - pair.alpha, grid),
    }
}

fn require_positive_beta(kind: CriterionKind, pair: SpacePair) -> Result<(), CriteriaError> {
    if pair.beta > 0.0 {
        Ok(())
    } else {
        Err(CriteriaError::Hypothesis {
            criterion: kind,
            reason: "requires a positive target exponent".into(),
        })
    }
}

fn boundedness_from_profile(kind: CriterionKind, profile: &SupEstimate, rules: &RuleConfig) -> CriterionVerdict {
    let mut running = 0.0_f64;
    let rungs: Vec<(f64, f64, bool)> = profile
        .rung_maxima
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            running = running.max(v);
            (k as f64, running, v.is_finite())
        })
        .collect();
    let outcome = finiteness(&rungs, profile.divergent, rules);
    let mut v = CriterionVerdict::new(kind, Question::Boundedness, Direction::Iff, outcome.tag);
    v.value = outcome.value.map(|_| profile.value);
    v.slope = outcome.slope;
    v.reason = outcome.reason;
    v.rung_values = profile.rung_maxima.clone();
    v
}

/// `sup (1 - |z|^2)^{β+1-α} |g'(z)| < ∞`, valid for `β > 0`.
pub fn pointwise_tg(
    g: &SymbolSpec,
    pair: SpacePair,
    grid: &DiskGrid,
    rules: &RuleConfig,
) -> Result<CriterionVerdict, CriteriaError> {
    require_positive_beta(CriterionKind::PointwiseDerivative, pair)?;
    let profile = pointwise_profile(g, OperatorKind::Tg, pair, grid);
    Ok(boundedness_from_profile(CriterionKind::PointwiseDerivative, &profile, rules))
}

/// `sup (1 - |z|^2)^{β-α} |g(z)| < ∞`, valid for `β > 0`.
pub fn pointwise_sg(
    g: &SymbolSpec,
    pair: SpacePair,
    grid: &DiskGrid,
    rules: &RuleConfig,
) -> Result<CriterionVerdict, CriteriaError> {
    require_positive_beta(CriterionKind::PointwiseSymbol, pair)?;
    let profile = pointwise_profile(g, OperatorKind::Sg, pair, grid);
    Ok(boundedness_from_profile(CriterionKind::PointwiseSymbol, &profile, rules))
}

/// The weighted modulus tends to zero at the boundary (`β > 0`).
pub fn compactness_pointwise(
    g: &SymbolSpec,
    pair: SpacePair,
    op: OperatorKind,
    grid: &DiskGrid,
    rules: &RuleConfig,
) -> Result<CriterionVerdict, CriteriaError> {
    let kind = match op {
        OperatorKind::Tg => CriterionKind::VanishingDerivative,
        OperatorKind::Sg => CriterionKind::VanishingSymbol,
    };
    require_positive_beta(kind, pair)?;
    let profile = pointwise_profile(g, op, pair, grid);
    let outcome = if profile.divergent {
        super::rules::RuleOutcome {
            tag: VerdictTag::NotCompact,
            value: None,
            slope: None,
            reason: Some("weighted modulus diverges".into()),
        }
    } else {
        vanishing(&profile.rung_maxima, rules)
    };
    let mut v = CriterionVerdict::new(kind, Question::Compactness, Direction::Iff, outcome.tag);
    v.value = outcome.value;
    v.reason = outcome.reason;
    v.rung_values = profile.rung_maxima;
    Ok(v)
}

/// Threshold below which sampled symbol values count as zero.
pub const ZERO_SYMBOL_TOL: f64 = 1e-14;

/// `S_g: H∞_α → H∞_0` is compact exactly when `g = 0`.
pub fn sg_compact_to_h0(g: &SymbolSpec, grid: &DiskGrid) -> CriterionVerdict {
    let (zero, value) = if g.metadata().is_zero {
        (true, 0.0)
    } else {
        let sup = weighted_sup(&ComplexSampler(|z: Complex64| g.eval(z)), 0.0, grid).value;
        (sup < ZERO_SYMBOL_TOL, sup)
    };
    let tag = if zero {
        VerdictTag::Compact
    } else {
        VerdictTag::NotCompact
    };
    let mut v = CriterionVerdict::new(CriterionKind::ZeroSymbol, Question::Compactness, Direction::Iff, tag);
    v.value = Some(value);
    if !zero {
        v.reason = Some(format!("sup |g| ≈ {value:.6e} on the grid, so g is not zero"));
    }
    v
}
