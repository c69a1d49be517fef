//! Decision rules that turn a finite ladder of values into a verdict.

use serde::{Deserialize, Serialize};

use super::VerdictTag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RuleConfig {
    /// Number of trailing rungs inspected.
    pub window: usize,
    /// Slope of `ln L` per rung above which the ladder diverges.
    pub slope_threshold: f64,
    /// Largest signed relative change per rung accepted as stable.
    pub rel_change: f64,
    /// Any rung value above this is divergent.
    pub divergence: f64,
    /// A vanishing sequence must end below this value.
    pub vanish_tol: f64,
    /// A persistent sequence must stay above this value.
    pub persist_tol: f64,
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            window: 8,
            slope_threshold: 0.02,
            rel_change: 1e-3,
            divergence: 1e8,
            vanish_tol: 1e-3,
            persist_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleOutcome {
    pub tag: VerdictTag,
    pub value: Option<f64>,
    pub slope: Option<f64>,
    pub reason: Option<String>,
}

impl RuleOutcome {
    fn new(tag: VerdictTag, value: Option<f64>, slope: Option<f64>, reason: Option<String>) -> Self {
        RuleOutcome {
            tag,
            value,
            slope,
            reason,
        }
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Finite or divergent limit of a ladder `(index, value, reliable)`.
///
/// Values above the divergence threshold decide Unbounded at once. Otherwise
/// the last `window` reliable rungs are Bounded when every signed relative
/// change stays below `rel_change` (a decaying ladder is bounded too), and
/// Unbounded when the regression slope of `ln L` exceeds `slope_threshold`.
pub fn finiteness(rungs: &[(f64, f64, bool)], divergent: bool, cfg: &RuleConfig) -> RuleOutcome {
    if divergent || rungs.iter().any(|r| r.1 > cfg.divergence || r.1.is_nan()) {
        return RuleOutcome::new(
            VerdictTag::Unbounded,
            None,
            None,
            Some(format!("ladder exceeds the divergence threshold {:e}", cfg.divergence)),
        );
    }
    let reliable: Vec<(f64, f64)> = rungs.iter().filter(|r| r.2).map(|r| (r.0, r.1)).collect();
    if reliable.len() < cfg.window {
        return RuleOutcome::new(
            VerdictTag::Inconclusive,
            None,
            None,
            Some(format!(
                "only {} reliable rungs, {} required",
                reliable.len(),
                cfg.window
            )),
        );
    }
    let max = reliable.iter().map(|r| r.1).fold(0.0, f64::max);
    let tail = &reliable[reliable.len() - cfg.window..];
    if tail.iter().all(|r| r.1 == 0.0) {
        return RuleOutcome::new(VerdictTag::Bounded, Some(max), Some(0.0), None);
    }
    if tail.iter().any(|r| r.1 <= 0.0) {
        return RuleOutcome::new(
            VerdictTag::Inconclusive,
            None,
            None,
            Some("ladder tail mixes zero and positive values".into()),
        );
    }
    let xs: Vec<f64> = tail.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = tail.iter().map(|r| r.1.ln()).collect();
    let slope = ols_slope(&xs, &ys);
    let stable = tail
        .windows(2)
        .all(|w| (w[1].1 - w[0].1) / w[0].1 < cfg.rel_change);
    if stable {
        RuleOutcome::new(VerdictTag::Bounded, Some(max), Some(slope), None)
    } else if slope > cfg.slope_threshold {
        RuleOutcome::new(
            VerdictTag::Unbounded,
            None,
            Some(slope),
            Some(format!("log-slope {slope:.4} per rung")),
        )
    } else {
        RuleOutcome::new(
            VerdictTag::Inconclusive,
            None,
            Some(slope),
            Some(format!(
                "log-slope {slope:.4} per rung is between the stability and divergence thresholds"
            )),
        )
    }
}

/// Whether a sequence that should tend to zero does so.
///
/// Compact when the last value is below `vanish_tol` and the window is
/// nonincreasing; NotCompact when every window value is at least
/// `persist_tol` and the last keeps at least half of the first.
pub fn vanishing(values: &[f64], cfg: &RuleConfig) -> RuleOutcome {
    if values.len() < cfg.window {
        return RuleOutcome::new(
            VerdictTag::Inconclusive,
            None,
            None,
            Some(format!("only {} values, {} required", values.len(), cfg.window)),
        );
    }
    let tail = &values[values.len() - cfg.window..];
    let last = tail[tail.len() - 1];
    if last.is_nan() {
        return RuleOutcome::new(VerdictTag::Inconclusive, None, None, Some("NaN in sequence".into()));
    }
    let nonincreasing = tail
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-300);
    if last < cfg.vanish_tol && nonincreasing {
        return RuleOutcome::new(VerdictTag::Compact, Some(last), None, None);
    }
    if tail.iter().all(|&v| v >= cfg.persist_tol) && last >= 0.5 * tail[0] {
        return RuleOutcome::new(
            VerdictTag::NotCompact,
            Some(last),
            None,
            Some(format!("sequence persists at {last:.6e}")),
        );
    }
    RuleOutcome::new(
        VerdictTag::Inconclusive,
        Some(last),
        None,
        Some(format!("sequence ends at {last:.3e} without a clear trend")),
    )
}
