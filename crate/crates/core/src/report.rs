//! Classification plus empirical evidence for every ground-truth row.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{classify, ClassifyConfig, CriterionKind, CriterionReport, Verdict, VerdictTag};
use crate::estimation::{
    compactness_probe, empirical_lower_bound, probe_grid, split_upper_bound_on, ProbeTrace, TestBattery,
    UpperBound, PROBE_LENGTH,
};
use crate::operators::OperatorKind;
use crate::series::DEFAULT_DEGREE;
use crate::spaces::SpacePair;
use crate::symbols::{ground_truth_table, lookup, Expected, GroundTruthRow, SymbolSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub classify: ClassifyConfig,
    /// Split point of the upper bound.
    pub t0: f64,
    pub probe_length: usize,
    /// Truncation degree of symbols and test functions.
    pub degree: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            classify: ClassifyConfig::default(),
            t0: 0.5,
            probe_length: PROBE_LENGTH,
            degree: DEFAULT_DEGREE,
        }
    }
}

/// Empirical numbers attached to a classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub lower: f64,
    pub lower_witness: Option<String>,
    pub upper: Option<UpperBound>,
    pub probe: ProbeTrace,
    pub diagnostics: Vec<String>,
}

/// Computes lower and upper bounds and the monomial probe for a classified
/// case, flagging contradictions with the verdict.
pub fn gather_evidence(g: &SymbolSpec, report: &CriterionReport, cfg: &ReportConfig) -> Evidence {
    let op = report.operator;
    let pair = SpacePair {
        alpha: report.alpha,
        beta: report.beta,
    };
    let grid = &cfg.classify.grid;
    let battery = TestBattery::new(pair.alpha, cfg.degree, grid);
    let lower = empirical_lower_bound(g, op, pair, &battery, grid);
    let upper = match (op, report.ladder(CriterionKind::RadialIntegral)) {
        (OperatorKind::Tg, Some(ladder)) => {
            let bounded = report
                .criterion(CriterionKind::RadialIntegral)
                .is_some_and(|c| c.raw_tag == VerdictTag::Bounded);
            bounded.then(|| split_upper_bound_on(g, pair, cfg.t0, &cfg.classify.ladder, ladder))
        }
        _ => None,
    };
    let probe = compactness_probe(g, op, pair, cfg.probe_length.max(16), &probe_grid())
        .expect("probe length is at least 16");

    let mut diagnostics = Vec::new();
    if let Some(u) = &upper {
        if lower.value > u.refined + 1e-6 {
            diagnostics.push(format!(
                "lower bound {:.6e} exceeds the upper bound {:.6e}",
                lower.value, u.refined
            ));
        }
    }
    match report.verdict.compactness {
        VerdictTag::Compact if !probe.decays() => {
            diagnostics.push("verdict is Compact but the monomial probe does not decay".into());
        }
        VerdictTag::NotCompact if probe.decays() => {
            diagnostics.push("verdict is NotCompact but the monomial probe decays".into());
        }
        _ => {}
    }
    Evidence {
        lower: lower.value,
        lower_witness: lower.best,
        upper,
        probe,
        diagnostics,
    }
}

/// Whether a verdict reproduces the expected outcome.
pub fn agrees(expected: &Expected, verdict: &Verdict) -> bool {
    let bounded = expected.bounded.is_none_or(|b| verdict.is_bounded() == Some(b));
    let compact = expected.compact.is_none_or(|c| verdict.is_compact() == Some(c));
    let value = match (expected.value, expected.value_tol) {
        (Some(v), Some(tol)) => verdict.value.is_some_and(|x| (x - v).abs() <= tol),
        _ => true,
    };
    let forwarded = !expected.forwarded || verdict.forwarded;
    let sufficiency = !expected.sufficiency_only || verdict.sufficiency_only;
    bounded && compact && value && forwarded && sufficiency
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub symbol: String,
    pub operator: OperatorKind,
    pub alpha: f64,
    pub beta: f64,
    pub expected: String,
    pub verdict: String,
    pub tag: VerdictTag,
    pub value: Option<f64>,
    pub lower: f64,
    pub upper: Option<f64>,
    pub upper_sum: Option<f64>,
    pub probe_exp: Option<f64>,
    pub probe_last: f64,
    pub agree: bool,
    pub cross_check_agreement: bool,
    pub forwarded: bool,
    pub sufficiency_only: bool,
    pub evidence: Vec<CriterionKind>,
    pub diagnostics: Vec<String>,
}

/// Classifies one ground-truth row and attaches the evidence.
pub fn report_row(row: &GroundTruthRow, cfg: &ReportConfig) -> ReportRow {
    let g = lookup(row.symbol).expect("ground-truth symbols are registered");
    let pair = SpacePair {
        alpha: row.alpha,
        beta: row.beta,
    };
    let report = classify(&g, row.operator, pair, &cfg.classify);
    let ev = gather_evidence(&g, &report, cfg);
    let mut diagnostics = report.diagnostics.clone();
    diagnostics.extend(ev.diagnostics);
    if let Some(reason) = &report.verdict.reason {
        diagnostics.push(reason.clone());
    }
    ReportRow {
        symbol: row.symbol.to_string(),
        operator: row.operator,
        alpha: row.alpha,
        beta: row.beta,
        expected: row.expected.label(),
        verdict: report.verdict.label(),
        tag: report.verdict.tag,
        value: report.verdict.value,
        lower: ev.lower,
        upper: ev.upper.map(|u| u.refined),
        upper_sum: ev.upper.map(|u| u.sum),
        probe_exp: ev.probe.decay_exponent,
        probe_last: ev.probe.last(),
        agree: agrees(&row.expected, &report.verdict),
        cross_check_agreement: report.cross_check_agreement,
        forwarded: report.verdict.forwarded,
        sufficiency_only: report.verdict.sufficiency_only,
        evidence: report.verdict.evidence.clone(),
        diagnostics,
    }
}

/// Every ground-truth row, in table order.
pub fn run_report(cfg: &ReportConfig) -> Vec<ReportRow> {
    ground_truth_table().par_iter().map(|row| report_row(row, cfg)).collect()
}
