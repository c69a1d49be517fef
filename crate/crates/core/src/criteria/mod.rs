//! Boundedness and compactness criteria for `T_g` and `S_g` between weighted
//! spaces, and the classifier that runs and reconciles them.

pub mod ladder;
pub mod pointwise;
pub mod rules;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::operators::OperatorKind;
use crate::spaces::{DiskGrid, SpacePair};
use crate::symbols::{SymbolMetadata, SymbolSpec};

pub use ladder::{
    full_radial_integral_sup, radial_integral, sg_ladder, sg_radial_integral, tg_ladder, FullIntegral,
    LadderConfig, RadialLadder,
};
pub use pointwise::{compactness_pointwise, pointwise_sg, pointwise_tg, sg_compact_to_h0};
pub use rules::RuleConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictTag {
    Bounded,
    Unbounded,
    Compact,
    NotCompact,
    Inconclusive,
}

impl VerdictTag {
    pub fn is_decided(self) -> bool {
        self != VerdictTag::Inconclusive
    }
}

impl fmt::Display for VerdictTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The individual criteria the classifier can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CriterionKind {
    /// `(1 - t^2)^β sup_θ ∫_0^t |g'| / (1 - r^2)^α` stays finite.
    RadialIntegral,
    /// `sup_θ ∫_0^1 |g'|` is finite (`α = β = 0`).
    FullRadialIntegral,
    /// `(1 - t^2)^β sup_θ ∫_0^t |g| / (1 - r^2)^{α+1}` stays finite (`α > 0`).
    SymbolRadialIntegral,
    /// `sup (1 - |z|^2)^{β+1-α} |g'|` is finite (`β > 0`).
    PointwiseDerivative,
    /// `sup (1 - |z|^2)^{β-α} |g|` is finite (`β > 0`).
    PointwiseSymbol,
    /// The tail of the radial integral ladder tends to zero.
    TailIntegral,
    /// `(1 - |z|^2)^{β+1-α} |g'| → 0` at the boundary (`β > 0`).
    VanishingDerivative,
    /// `(1 - |z|^2)^{β-α} |g| → 0` at the boundary (`β > 0`).
    VanishingSymbol,
    /// `S_g` into `H∞_0` is compact exactly when `g = 0`.
    ZeroSymbol,
    /// `S_g` on `H∞_0` is bounded exactly when `T_g` is.
    ForwardedFromTg,
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Question {
    Boundedness,
    Compactness,
}

/// Whether a criterion characterizes the property or only implies it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Iff,
    SufficiencyOnly,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CriteriaError {
    #[error("{criterion} is not applicable: {reason}")]
    Hypothesis { criterion: CriterionKind, reason: String },
}

/// Outcome of a single criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub criterion: CriterionKind,
    pub question: Question,
    pub direction: Direction,
    /// Tag after accounting for the direction of the criterion.
    pub tag: VerdictTag,
    /// Tag produced by the numerical rule alone.
    pub raw_tag: VerdictTag,
    pub value: Option<f64>,
    pub slope: Option<f64>,
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rung_values: Vec<f64>,
}

impl CriterionVerdict {
    pub fn new(criterion: CriterionKind, question: Question, direction: Direction, tag: VerdictTag) -> Self {
        CriterionVerdict {
            criterion,
            question,
            direction,
            tag,
            raw_tag: tag,
            value: None,
            slope: None,
            reason: None,
            rung_values: Vec::new(),
        }
    }

    /// Drops negative conclusions that only the necessity direction supports.
    fn with_direction(mut self, direction: Direction, hypothesis: &str) -> Self {
        self.direction = direction;
        if direction == Direction::SufficiencyOnly
            && matches!(self.raw_tag, VerdictTag::Unbounded | VerdictTag::NotCompact)
        {
            self.tag = VerdictTag::Inconclusive;
            self.reason = Some(format!(
                "criterion fails, but the converse needs {hypothesis}, which is not established"
            ));
        }
        self
    }
}

/// Merged verdict for one `(symbol, operator, α, β)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub tag: VerdictTag,
    pub boundedness: VerdictTag,
    pub compactness: VerdictTag,
    pub value: Option<f64>,
    pub evidence: Vec<CriterionKind>,
    pub sufficiency_only: bool,
    pub forwarded: bool,
    pub reason: Option<String>,
}

impl Verdict {
    /// Short label such as `Bounded+Compact`.
    pub fn label(&self) -> String {
        match (self.boundedness, self.compactness) {
            (VerdictTag::Unbounded, _) => "Unbounded".into(),
            (VerdictTag::Bounded, VerdictTag::Compact) => "Bounded+Compact".into(),
            (VerdictTag::Bounded, VerdictTag::NotCompact) => "Bounded+NotCompact".into(),
            (VerdictTag::Bounded, _) => "Bounded".into(),
            _ => "Inconclusive".into(),
        }
    }

    pub fn is_bounded(&self) -> Option<bool> {
        match self.boundedness {
            VerdictTag::Bounded => Some(true),
            VerdictTag::Unbounded => Some(false),
            _ => None,
        }
    }

    pub fn is_compact(&self) -> Option<bool> {
        match self.compactness {
            VerdictTag::Compact => Some(true),
            VerdictTag::NotCompact => Some(false),
            _ if self.boundedness == VerdictTag::Unbounded => Some(false),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedLadder {
    pub criterion: CriterionKind,
    pub ladder: RadialLadder,
}

/// Everything `classify` computed for one case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub symbol: String,
    pub operator: OperatorKind,
    pub alpha: f64,
    pub beta: f64,
    pub metadata: SymbolMetadata,
    pub criteria: Vec<CriterionVerdict>,
    pub ladders: Vec<NamedLadder>,
    pub verdict: Verdict,
    pub cross_check_agreement: bool,
    pub diagnostics: Vec<String>,
}

impl CriterionReport {
    pub fn criterion(&self, kind: CriterionKind) -> Option<&CriterionVerdict> {
        self.criteria.iter().find(|c| c.criterion == kind)
    }

    pub fn ladder(&self, kind: CriterionKind) -> Option<&RadialLadder> {
        self.ladders.iter().find(|l| l.criterion == kind).map(|l| &l.ladder)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassifyConfig {
    pub ladder: LadderConfig,
    pub grid: DiskGrid,
}

const LOG_DERIV_HYPOTHESIS: &str = "log g' in the Bloch space";
const LOG_SYMBOL_HYPOTHESIS: &str = "log g in the Bloch space";

fn direction_for(holds: bool) -> Direction {
    if holds {
        Direction::Iff
    } else {
        Direction::SufficiencyOnly
    }
}

fn ladder_verdict(kind: CriterionKind, ladder: &RadialLadder, rules: &RuleConfig) -> CriterionVerdict {
    let outcome = rules::finiteness(&ladder.rungs(), ladder.any_divergent(), rules);
    let mut v = CriterionVerdict::new(kind, Question::Boundedness, Direction::Iff, outcome.tag);
    v.value = outcome.value;
    v.slope = outcome.slope;
    v.reason = outcome.reason;
    v.rung_values = ladder.values.clone();
    v
}

/// Radial integral criterion for `T_g`.
pub fn boundedness_tg_integral(g: &SymbolSpec, pair: SpacePair, cfg: &LadderConfig) -> (RadialLadder, CriterionVerdict) {
    let ladder = tg_ladder(g, pair.alpha, pair.beta, cfg);
    let v = ladder_verdict(CriterionKind::RadialIntegral, &ladder, &cfg.rules).with_direction(
        direction_for(g.metadata().log_deriv_bloch.holds()),
        LOG_DERIV_HYPOTHESIS,
    );
    (ladder, v)
}

/// Radial integral criterion for `S_g`, valid for `α > 0`.
pub fn boundedness_sg_integral(
    g: &SymbolSpec,
    pair: SpacePair,
    cfg: &LadderConfig,
) -> Result<(RadialLadder, CriterionVerdict), CriteriaError> {
    if pair.alpha <= 0.0 {
        return Err(CriteriaError::Hypothesis {
            criterion: CriterionKind::SymbolRadialIntegral,
            reason: "requires a positive source exponent".into(),
        });
    }
    let ladder = sg_ladder(g, pair.alpha, pair.beta, cfg);
    let v = ladder_verdict(CriterionKind::SymbolRadialIntegral, &ladder, &cfg.rules).with_direction(
        direction_for(g.metadata().log_symbol_bloch.holds()),
        LOG_SYMBOL_HYPOTHESIS,
    );
    Ok((ladder, v))
}

/// Tail criterion for compactness of `T_g`, read off an existing ladder.
pub fn compactness_tg_tail(g: &SymbolSpec, ladder: &RadialLadder, cfg: &LadderConfig) -> CriterionVerdict {
    let tail = ladder.tail_outer(cfg.rules.window);
    let values: Vec<f64> = tail.iter().map(|t| t.1).collect();
    let outcome = if ladder.any_divergent() {
        rules::RuleOutcome {
            tag: VerdictTag::NotCompact,
            value: None,
            slope: None,
            reason: Some("the radial integrals diverge".into()),
        }
    } else {
        rules::vanishing(&values, &cfg.rules)
    };
    let mut v = CriterionVerdict::new(CriterionKind::TailIntegral, Question::Compactness, Direction::Iff, outcome.tag);
    v.value = outcome.value;
    v.reason = outcome.reason;
    v.rung_values = values;
    v.with_direction(direction_for(g.metadata().log_deriv_bloch.holds()), LOG_DERIV_HYPOTHESIS)
}

/// `sup_θ ∫_0^1 |g'|` criterion at `α = β = 0`.
pub fn full_integral_verdict(g: &SymbolSpec, cfg: &LadderConfig) -> (FullIntegral, CriterionVerdict) {
    let full = full_radial_integral_sup(g, cfg);
    let (tag, reason) = if full.divergent || full.value > cfg.rules.divergence {
        (VerdictTag::Unbounded, Some("full radial integral diverges".to_string()))
    } else if full.converged {
        (VerdictTag::Bounded, None)
    } else if full.tail_ratio >= 1.0 - 1e-6 {
        (
            VerdictTag::Unbounded,
            Some(format!("graded cell contributions do not decay (ratio {:.4})", full.tail_ratio)),
        )
    } else {
        (
            VerdictTag::Inconclusive,
            Some(format!("graded cell contributions decay slowly (ratio {:.4})", full.tail_ratio)),
        )
    };
    let mut v = CriterionVerdict::new(CriterionKind::FullRadialIntegral, Question::Boundedness, Direction::Iff, tag);
    v.value = (tag == VerdictTag::Bounded).then_some(full.value);
    v.reason = reason;
    let v = v.with_direction(direction_for(g.metadata().log_deriv_bloch.holds()), LOG_DERIV_HYPOTHESIS);
    (full, v)
}

struct Merged {
    tag: VerdictTag,
    agree: bool,
    evidence: Vec<CriterionKind>,
    reason: Option<String>,
}

fn merge(verdicts: &[&CriterionVerdict]) -> Merged {
    let decided: Vec<&&CriterionVerdict> = verdicts.iter().filter(|v| v.tag.is_decided()).collect();
    let evidence: Vec<CriterionKind> = decided.iter().map(|v| v.criterion).collect();
    let Some(first) = decided.first() else {
        let reasons: Vec<String> = verdicts
            .iter()
            .filter_map(|v| v.reason.as_ref().map(|r| format!("{}: {r}", v.criterion)))
            .collect();
        return Merged {
            tag: VerdictTag::Inconclusive,
            agree: true,
            evidence,
            reason: (!reasons.is_empty()).then(|| reasons.join("; ")),
        };
    };
    if decided.iter().all(|v| v.tag == first.tag) {
        Merged {
            tag: first.tag,
            agree: true,
            evidence,
            reason: None,
        }
    } else {
        let parts: Vec<String> = decided.iter().map(|v| format!("{} says {}", v.criterion, v.tag)).collect();
        Merged {
            tag: VerdictTag::Inconclusive,
            agree: false,
            evidence,
            reason: Some(format!("criteria disagree: {}", parts.join(", "))),
        }
    }
}

/// Runs every criterion whose hypotheses hold and reconciles the results.
pub fn classify(g: &SymbolSpec, op: OperatorKind, pair: SpacePair, cfg: &ClassifyConfig) -> CriterionReport {
    let lc = &cfg.ladder;
    let mut criteria: Vec<CriterionVerdict> = Vec::new();
    let mut ladders: Vec<NamedLadder> = Vec::new();
    let mut diagnostics: Vec<String> = Vec::new();
    let mut forwarded = false;
    let origin = pair.alpha == 0.0 && pair.beta == 0.0;

    match op {
        OperatorKind::Tg => {
            let (ladder, v) = boundedness_tg_integral(g, pair, lc);
            criteria.push(v);
            criteria.push(compactness_tg_tail(g, &ladder, lc));
            ladders.push(NamedLadder {
                criterion: CriterionKind::RadialIntegral,
                ladder,
            });
            if origin {
                criteria.push(full_integral_verdict(g, lc).1);
            }
            if pair.beta > 0.0 {
                criteria.extend(pointwise_tg(g, pair, &cfg.grid, &lc.rules).ok());
                criteria.extend(compactness_pointwise(g, pair, op, &cfg.grid, &lc.rules).ok());
            }
        }
        OperatorKind::Sg => {
            if origin {
                forwarded = true;
                let tg = classify(g, OperatorKind::Tg, pair, cfg);
                let boundedness: Vec<&CriterionVerdict> = tg
                    .criteria
                    .iter()
                    .filter(|c| c.question == Question::Boundedness)
                    .collect();
                let merged = merge(&boundedness);
                let direction = if boundedness.iter().any(|c| c.direction == Direction::Iff) {
                    Direction::Iff
                } else {
                    Direction::SufficiencyOnly
                };
                let mut v = CriterionVerdict::new(
                    CriterionKind::ForwardedFromTg,
                    Question::Boundedness,
                    direction,
                    merged.tag,
                );
                v.reason = merged.reason;
                criteria.push(v);
                diagnostics.extend(tg.diagnostics.iter().map(|d| format!("T_g: {d}")));
                ladders.extend(tg.ladders);
            } else if pair.alpha > 0.0 {
                if let Ok((ladder, v)) = boundedness_sg_integral(g, pair, lc) {
                    criteria.push(v);
                    ladders.push(NamedLadder {
                        criterion: CriterionKind::SymbolRadialIntegral,
                        ladder,
                    });
                }
            }
            if pair.beta > 0.0 {
                criteria.extend(pointwise_sg(g, pair, &cfg.grid, &lc.rules).ok());
                criteria.extend(compactness_pointwise(g, pair, op, &cfg.grid, &lc.rules).ok());
            } else {
                criteria.push(sg_compact_to_h0(g, &cfg.grid));
            }
        }
    }

    let bounded_refs: Vec<&CriterionVerdict> =
        criteria.iter().filter(|c| c.question == Question::Boundedness).collect();
    let compact_refs: Vec<&CriterionVerdict> =
        criteria.iter().filter(|c| c.question == Question::Compactness).collect();
    let b = merge(&bounded_refs);
    let c = merge(&compact_refs);
    let mut agree = b.agree && c.agree;
    let mut reason = b.reason.clone().or(c.reason.clone());
    let (mut boundedness, mut compactness) = (b.tag, c.tag);
    if boundedness == VerdictTag::Unbounded && compactness == VerdictTag::Compact {
        agree = false;
        diagnostics.push("compactness and unboundedness were both reported".into());
        reason = Some("criteria report Compact together with Unbounded".into());
        boundedness = VerdictTag::Inconclusive;
        compactness = VerdictTag::Inconclusive;
    }
    if compactness == VerdictTag::Compact && boundedness == VerdictTag::Inconclusive {
        diagnostics.push("boundedness inferred from compactness".into());
        boundedness = VerdictTag::Bounded;
    }
    if !b.agree {
        diagnostics.push(b.reason.clone().unwrap_or_default());
    }
    if !c.agree {
        diagnostics.push(c.reason.clone().unwrap_or_default());
    }

    let tag = match (boundedness, compactness) {
        (VerdictTag::Unbounded, _) => VerdictTag::Unbounded,
        (VerdictTag::Bounded, VerdictTag::Compact) => VerdictTag::Compact,
        (VerdictTag::Bounded, VerdictTag::NotCompact) => VerdictTag::NotCompact,
        (VerdictTag::Bounded, _) => VerdictTag::Bounded,
        _ => VerdictTag::Inconclusive,
    };
    let priority: &[CriterionKind] = match op {
        OperatorKind::Tg => &[
            CriterionKind::RadialIntegral,
            CriterionKind::PointwiseDerivative,
            CriterionKind::FullRadialIntegral,
        ],
        OperatorKind::Sg => &[CriterionKind::PointwiseSymbol, CriterionKind::SymbolRadialIntegral],
    };
    let value = if boundedness == VerdictTag::Bounded {
        priority.iter().find_map(|k| {
            criteria
                .iter()
                .find(|c| c.criterion == *k && c.tag == VerdictTag::Bounded)
                .and_then(|c| c.value)
        })
    } else {
        None
    };
    let bounded_decided: Vec<&CriterionVerdict> = criteria
        .iter()
        .filter(|c| c.question == Question::Boundedness && c.tag.is_decided())
        .collect();
    let sufficiency_only =
        !bounded_decided.is_empty() && bounded_decided.iter().all(|c| c.direction == Direction::SufficiencyOnly);
    let mut evidence = b.evidence;
    evidence.extend(c.evidence);
    if tag != VerdictTag::Inconclusive {
        reason = None;
    }

    CriterionReport {
        symbol: g.name().to_string(),
        operator: op,
        alpha: pair.alpha,
        beta: pair.beta,
        metadata: g.metadata(),
        criteria,
        ladders,
        verdict: Verdict {
            tag,
            boundedness,
            compactness,
            value,
            evidence,
            sufficiency_only,
            forwarded,
            reason,
        },
        cross_check_agreement: agree,
        diagnostics,
    }
}
