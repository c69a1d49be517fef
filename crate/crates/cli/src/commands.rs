use std::f64::consts::TAU;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use volterra_core::estimation::{
    compactness_probe, empirical_lower_bound, probe_grid, split_upper_bound, EstimationError, PROBE_LENGTH,
};
use volterra_core::report::{run_report, ReportConfig, ReportRow};
use volterra_core::sector::{
    density_constant_near_vertex, estimate_density_constant_at, rotation_deviation, SectorMap, SectorParams,
};
use volterra_core::series::DEFAULT_DEGREE;
use volterra_core::spaces::{bloch_norm, log_deriv_bloch_seminorm, weighted_sup_norm};
use volterra_core::symbols::{ground_truth_table, lookup, registry, GroundTruthRow};
use volterra_core::{
    classify, CriterionReport, OperatorKind, ProbeTrace, SymbolMetadata, SymbolSpec, TestBattery,
    UpperBound,
};

use crate::config::{CaseArgs, Command, NormArgs, OpnormArgs, ProbeArgs, SectorArgs, Settings};
use crate::render::{cell, num, Output};

pub const EXIT_DECIDED: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;

/// Runs one command and returns its exit code.
pub fn run(command: &Command, settings: &Settings) -> Result<u8, String> {
    let (output, code) = match command {
        Command::Classify(args) => cmd_classify(args, settings)?,
        Command::Report => cmd_report(settings)?,
        Command::Norm(args) => cmd_norm(args, settings)?,
        Command::Opnorm(args) => cmd_opnorm(args, settings)?,
        Command::Probe(args) => cmd_probe(args, settings)?,
        Command::Lemma2(args) => cmd_sector(args, settings)?,
        Command::List => cmd_list()?,
    };
    output.emit(settings)?;
    Ok(code)
}

fn symbol(name: &str) -> Result<SymbolSpec, String> {
    lookup(name).ok_or_else(|| {
        let known: Vec<String> = registry().iter().map(|s| s.name().to_string()).collect();
        format!("unknown symbol {name:?}; known symbols: {}", known.join(", "))
    })
}

fn cmd_classify(args: &CaseArgs, settings: &Settings) -> Result<(Output, u8), String> {
    let (name, op, pair) = settings.case(args)?;
    let g = symbol(&name)?;
    let report = classify(&g, op, pair, &settings.classify);
    let decided = report.verdict.tag.is_decided();

    let header = vec!["criterion", "question", "direction", "tag", "raw_tag", "value", "slope"];
    let rows = report
        .criteria
        .iter()
        .map(|c| {
            vec![
                c.criterion.to_string(),
                format!("{:?}", c.question),
                format!("{:?}", c.direction),
                c.tag.to_string(),
                c.raw_tag.to_string(),
                cell(c.value),
                cell(c.slope),
            ]
        })
        .collect();
    let text = classify_text(&report);
    let output = Output::new("classify", &report)?.table(header, rows).text(text);
    Ok((output, if decided { EXIT_DECIDED } else { EXIT_INCONCLUSIVE }))
}

fn classify_text(r: &CriterionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {} alpha={} beta={}", r.symbol, r.operator, r.alpha, r.beta);
    let _ = writeln!(s, "verdict: {}", r.verdict.label());
    let _ = writeln!(s, "value: {}", num(r.verdict.value));
    if r.verdict.forwarded {
        let _ = writeln!(s, "forwarded from the T_g criterion");
    }
    if r.verdict.sufficiency_only {
        let _ = writeln!(s, "sufficiency direction only");
    }
    for c in &r.criteria {
        let _ = writeln!(
            s,
            "  {:<22} {:<12} {:<16} {:<12} value={}",
            c.criterion.to_string(),
            format!("{:?}", c.question),
            format!("{:?}", c.direction),
            c.tag.to_string(),
            num(c.value)
        );
    }
    for d in r.diagnostics.iter().chain(r.verdict.reason.iter()) {
        let _ = writeln!(s, "note: {d}");
    }
    s
}

fn has(label: &str, part: &str) -> bool {
    label.split('+').any(|p| p == part)
}

/// A disagreement where the verdict asserts the opposite of the expected
/// outcome, as opposed to leaving it undecided.
fn contradicts(row: &ReportRow) -> bool {
    let (e, v) = (row.expected.as_str(), row.verdict.as_str());
    let bounded_clash = (has(e, "Bounded") && has(v, "Unbounded")) || (has(e, "Unbounded") && has(v, "Bounded"));
    let v_not_compact = has(v, "NotCompact") || has(v, "Unbounded");
    let compact_clash = (has(e, "Compact") && v_not_compact) || (has(e, "NotCompact") && has(v, "Compact"));
    let decided_everything = ["Bounded", "Unbounded", "Compact", "NotCompact"]
        .iter()
        .filter(|p| has(e, p))
        .all(|p| match *p {
            "Bounded" | "Unbounded" => has(v, "Bounded") || has(v, "Unbounded"),
            _ => has(v, "Compact") || v_not_compact,
        });
    bounded_clash || compact_clash || decided_everything
}

pub const REPORT_HEADER: [&str; 10] = [
    "symbol", "op", "alpha", "beta", "verdict", "value", "lower", "upper", "probe_exp", "agree",
];

fn cmd_report(settings: &Settings) -> Result<(Output, u8), String> {
    let cfg = ReportConfig {
        classify: settings.classify.clone(),
        ..ReportConfig::default()
    };
    let rows = run_report(&cfg);
    let disagreements: Vec<&ReportRow> = rows.iter().filter(|r| !r.agree).collect();
    let code = if disagreements.is_empty() {
        EXIT_DECIDED
    } else if disagreements.iter().any(|r| contradicts(r)) {
        EXIT_ERROR
    } else {
        EXIT_INCONCLUSIVE
    };
    for r in &disagreements {
        eprintln!(
            "disagreement: {} {} alpha={} beta={}: expected {}, got {}",
            r.symbol, r.operator, r.alpha, r.beta, r.expected, r.verdict
        );
        for d in &r.diagnostics {
            eprintln!("  {d}");
        }
    }

    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.symbol.clone(),
                r.operator.to_string(),
                r.alpha.to_string(),
                r.beta.to_string(),
                r.verdict.clone(),
                cell(r.value),
                r.lower.to_string(),
                cell(r.upper),
                cell(r.probe_exp),
                r.agree.to_string(),
            ]
        })
        .collect();
    let mut text = format!(
        "{:<12} {:<3} {:>5} {:>5} {:<19} {:>14} {:>14} {:>14} {:>10} agree\n",
        "symbol", "op", "alpha", "beta", "verdict", "value", "lower", "upper", "probe_exp"
    );
    for r in &rows {
        let _ = writeln!(
            text,
            "{:<12} {:<3} {:>5} {:>5} {:<19} {:>14} {:>14.8} {:>14} {:>10} {}",
            r.symbol,
            r.operator.to_string(),
            r.alpha,
            r.beta,
            r.verdict,
            r.value.map(|v| format!("{v:.8}")).unwrap_or_else(|| "-".into()),
            r.lower,
            r.upper.map(|v| format!("{v:.8}")).unwrap_or_else(|| "-".into()),
            r.probe_exp.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into()),
            r.agree
        );
    }
    let _ = writeln!(text, "{} rows, {} disagreements", rows.len(), disagreements.len());
    let output = Output::new("report", &rows)?.table(REPORT_HEADER.to_vec(), table).text(text);
    Ok((output, code))
}

#[derive(Serialize)]
struct NormResult {
    symbol: String,
    alpha: f64,
    norm: f64,
    argmax: Complex64,
    divergent: bool,
    bloch_norm: Option<f64>,
    log_deriv_bloch_seminorm: Option<f64>,
    notes: Vec<String>,
}

fn cmd_norm(args: &NormArgs, settings: &Settings) -> Result<(Output, u8), String> {
    let name = settings.symbol(&args.symbol)?;
    let alpha = settings.alpha(args.alpha)?;
    let g = symbol(&name)?;
    let grid = &settings.classify.grid;
    let est = weighted_sup_norm(&g.handle(), alpha, grid);
    let mut notes = Vec::new();
    let (mut bloch, mut log_deriv) = (None, None);
    if args.bloch || settings.file.bloch.unwrap_or(false) {
        match bloch_norm(&g.handle(), grid) {
            Ok(v) => bloch = Some(v),
            Err(e) => notes.push(e.to_string()),
        }
        match log_deriv_bloch_seminorm(&g, grid) {
            Ok(v) => log_deriv = Some(v.value),
            Err(e) => notes.push(e.to_string()),
        }
    }
    let res = NormResult {
        symbol: name,
        alpha,
        norm: est.value,
        argmax: est.argmax,
        divergent: est.divergent,
        bloch_norm: bloch,
        log_deriv_bloch_seminorm: log_deriv,
        notes,
    };
    let header = vec!["symbol", "alpha", "norm", "divergent", "bloch_norm", "log_deriv_bloch_seminorm"];
    let rows = vec![vec![
        res.symbol.clone(),
        res.alpha.to_string(),
        res.norm.to_string(),
        res.divergent.to_string(),
        cell(res.bloch_norm),
        cell(res.log_deriv_bloch_seminorm),
    ]];
    let mut text = format!(
        "{} alpha={}\nnorm: {:.10}{}\n",
        res.symbol,
        res.alpha,
        res.norm,
        if res.divergent { " (divergent)" } else { "" }
    );
    if res.bloch_norm.is_some() || res.log_deriv_bloch_seminorm.is_some() || !res.notes.is_empty() {
        let _ = writeln!(text, "bloch norm: {}", num(res.bloch_norm));
        let _ = writeln!(text, "log-derivative seminorm: {}", num(res.log_deriv_bloch_seminorm));
    }
    for n in &res.notes {
        let _ = writeln!(text, "note: {n}");
    }
    Ok((Output::new("norm", &res)?.table(header, rows).text(text), EXIT_DECIDED))
}

#[derive(Serialize)]
struct OpnormResult {
    symbol: String,
    operator: OperatorKind,
    alpha: f64,
    beta: f64,
    lower: f64,
    lower_witness: Option<String>,
    upper: Option<UpperBound>,
    notes: Vec<String>,
}

fn cmd_opnorm(args: &OpnormArgs, settings: &Settings) -> Result<(Output, u8), String> {
    let (name, op, pair) = settings.case(&args.case)?;
    let t0 = args.t0.or(settings.file.t0).unwrap_or(0.5);
    let g = symbol(&name)?;
    let grid = &settings.classify.grid;
    let battery = TestBattery::new(pair.alpha, DEFAULT_DEGREE, grid);
    let lower = empirical_lower_bound(&g, op, pair, &battery, grid);
    let mut notes = Vec::new();
    let upper = match op {
        OperatorKind::Tg => match split_upper_bound(&g, pair, t0, &settings.classify.ladder) {
            Ok(u) => Some(u),
            Err(e @ EstimationError::SplitPoint(_)) => return Err(e.to_string()),
            Err(e) => {
                notes.push(e.to_string());
                None
            }
        },
        OperatorKind::Sg => {
            notes.push("the split upper bound applies to T_g only".into());
            None
        }
    };
    let res = OpnormResult {
        symbol: name,
        operator: op,
        alpha: pair.alpha,
        beta: pair.beta,
        lower: lower.value,
        lower_witness: lower.best,
        upper,
        notes,
    };
    let header = vec!["symbol", "op", "alpha", "beta", "lower", "upper", "upper_sum", "t0"];
    let rows = vec![vec![
        res.symbol.clone(),
        op.to_string(),
        res.alpha.to_string(),
        res.beta.to_string(),
        res.lower.to_string(),
        cell(res.upper.map(|u| u.refined)),
        cell(res.upper.map(|u| u.sum)),
        t0.to_string(),
    ]];
    let mut text = format!(
        "{} {} alpha={} beta={}\nlower: {:.10} ({})\nupper: {}\n",
        res.symbol,
        op,
        res.alpha,
        res.beta,
        res.lower,
        res.lower_witness.as_deref().unwrap_or("-"),
        num(res.upper.map(|u| u.refined))
    );
    if let Some(u) = &res.upper {
        let _ = writeln!(text, "split at t0={}: M={:.10} N={:.10} sum={:.10}", u.t0, u.m_t0, u.n_tail, u.sum);
    }
    for n in &res.notes {
        let _ = writeln!(text, "note: {n}");
    }
    Ok((Output::new("opnorm", &res)?.table(header, rows).text(text), EXIT_DECIDED))
}

#[derive(Serialize)]
struct ProbeResult {
    symbol: String,
    operator: OperatorKind,
    alpha: f64,
    beta: f64,
    decays: bool,
    #[serde(flatten)]
    trace: ProbeTrace,
}

fn cmd_probe(args: &ProbeArgs, settings: &Settings) -> Result<(Output, u8), String> {
    let (name, op, pair) = settings.case(&args.case)?;
    let n_max = args.n_max.or(settings.file.n_max).unwrap_or(PROBE_LENGTH);
    let g = symbol(&name)?;
    let trace = compactness_probe(&g, op, pair, n_max, &probe_grid()).map_err(|e| e.to_string())?;
    let res = ProbeResult {
        symbol: name,
        operator: op,
        alpha: pair.alpha,
        beta: pair.beta,
        decays: trace.decays(),
        trace,
    };
    let rows = res
        .trace
        .indices
        .iter()
        .zip(&res.trace.values)
        .map(|(n, v)| vec![n.to_string(), v.to_string()])
        .collect();
    let mut text = format!(
        "{} {} alpha={} beta={}\ndecay exponent: {}\ndecays: {}\n",
        res.symbol,
        op,
        res.alpha,
        res.beta,
        num(res.trace.decay_exponent),
        res.decays
    );
    for (n, v) in res.trace.indices.iter().zip(&res.trace.values) {
        let _ = writeln!(text, "{n:>5} {v:.10e}");
    }
    Ok((Output::new("probe", &res)?.table(vec!["n", "value"], rows).text(text), EXIT_DECIDED))
}

pub const SECTOR_SAMPLES: [usize; 3] = [1_000, 10_000, 100_000];
const SWEEP_ANGLES: usize = 8;
const SWEEP_SAMPLES: usize = 10_000;
const ROTATION_SAMPLES: usize = 1_000;

#[derive(Serialize)]
struct SectorResult {
    gamma: f64,
    eta: f64,
    theta: f64,
    samples: Vec<usize>,
    estimates: Vec<f64>,
    corner: f64,
    near_vertex: f64,
    center_residual: f64,
    vertex_residual: f64,
    rotation_deviation: f64,
    sweep_spread: f64,
    monotone: bool,
    bounded: bool,
    ok: bool,
}

fn cmd_sector(args: &SectorArgs, settings: &Settings) -> Result<(Output, u8), String> {
    let f = &settings.file;
    let gamma = args.gamma.or(f.gamma).ok_or("missing --gamma")?;
    let eta = args.eta.or(f.eta).ok_or("missing --eta")?;
    let theta = args.theta.or(f.theta).unwrap_or(0.0);
    let err = |e: volterra_core::sector::SectorError| e.to_string();

    let estimates = SECTOR_SAMPLES
        .iter()
        .map(|&n| estimate_density_constant_at(gamma, eta, theta, n))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(err)?;
    let map = SectorMap::new(SectorParams::new(eta, theta, 1.0).map_err(err)?).map_err(err)?;
    let corner = map
        .density_ratio(Complex64::from_polar(0.5, theta + gamma / 2.0))
        .map_err(err)?;
    let near_vertex = density_constant_near_vertex(gamma, eta, ROTATION_SAMPLES, 20).map_err(err)?;
    let rotation = rotation_deviation(gamma, eta, SWEEP_ANGLES, ROTATION_SAMPLES).map_err(err)?;
    let sweep = (0..SWEEP_ANGLES)
        .map(|j| estimate_density_constant_at(gamma, eta, TAU * j as f64 / SWEEP_ANGLES as f64, SWEEP_SAMPLES))
        .collect::<Result<Vec<f64>, _>>()
        .map_err(err)?;
    let sweep_spread = sweep.iter().cloned().fold(f64::MIN, f64::max) - sweep.iter().cloned().fold(f64::MAX, f64::min);

    let monotone = estimates.windows(2).all(|w| w[0] <= w[1]);
    let bounded = estimates.iter().all(|e| e.is_finite() && *e <= corner * (1.0 + 1e-12));
    let ok = map.center_residual < 1e-10
        && map.vertex_residual < 1e-10
        && rotation < 1e-10
        && sweep_spread <= 1e-8
        && monotone
        && bounded;
    let res = SectorResult {
        gamma,
        eta,
        theta,
        samples: SECTOR_SAMPLES.to_vec(),
        estimates,
        corner,
        near_vertex,
        center_residual: map.center_residual,
        vertex_residual: map.vertex_residual,
        rotation_deviation: rotation,
        sweep_spread,
        monotone,
        bounded,
        ok,
    };
    let header = vec!["samples", "estimate"];
    let rows = res
        .samples
        .iter()
        .zip(&res.estimates)
        .map(|(n, e)| vec![n.to_string(), e.to_string()])
        .collect();
    let mut text = format!("gamma={} eta={} theta={}\n", gamma, eta, theta);
    for (n, e) in res.samples.iter().zip(&res.estimates) {
        let _ = writeln!(text, "  C1 estimate ({n:>6} samples): {e:.12}");
    }
    let _ = writeln!(text, "corner ratio: {:.12}", res.corner);
    let _ = writeln!(text, "near-vertex estimate: {:.12}", res.near_vertex);
    let _ = writeln!(text, "center residual: {:.3e}", res.center_residual);
    let _ = writeln!(text, "vertex residual: {:.3e}", res.vertex_residual);
    let _ = writeln!(text, "rotation deviation: {:.3e}", res.rotation_deviation);
    let _ = writeln!(text, "bisector sweep spread: {:.3e}", res.sweep_spread);
    let _ = writeln!(text, "monotone: {} bounded: {} ok: {}", res.monotone, res.bounded, res.ok);
    let code = if ok { EXIT_DECIDED } else { EXIT_INCONCLUSIVE };
    Ok((Output::new("lemma2", &res)?.table(header, rows).text(text), code))
}

#[derive(Serialize)]
struct ListedSymbol {
    name: String,
    formula: String,
    metadata: SymbolMetadata,
}

#[derive(Serialize)]
struct Registry {
    symbols: Vec<ListedSymbol>,
    ground_truth: Vec<GroundTruthRow>,
}

fn cmd_list() -> Result<(Output, u8), String> {
    let symbols: Vec<ListedSymbol> = registry()
        .iter()
        .map(|s| ListedSymbol {
            name: s.name().to_string(),
            formula: s.formula().to_string(),
            metadata: s.metadata(),
        })
        .collect();
    let doc = Registry {
        symbols,
        ground_truth: ground_truth_table(),
    };
    let header = vec!["name", "formula", "is_zero", "is_univalent", "log_deriv_bloch", "log_symbol_bloch"];
    let rows = doc
        .symbols
        .iter()
        .map(|s| {
            vec![
                s.name.clone(),
                s.formula.clone(),
                s.metadata.is_zero.to_string(),
                s.metadata.is_univalent.to_string(),
                s.metadata.log_deriv_bloch.to_string(),
                s.metadata.log_symbol_bloch.to_string(),
            ]
        })
        .collect();
    let mut text = String::new();
    for s in &doc.symbols {
        let m = s.metadata;
        let _ = writeln!(
            text,
            "{:<12} {:<28} univalent={} log g' Bloch={} log g Bloch={}",
            s.name, s.formula, m.is_univalent, m.log_deriv_bloch, m.log_symbol_bloch
        );
    }
    let _ = writeln!(text, "{} ground-truth rows", doc.ground_truth.len());
    Ok((Output::new("list", &doc)?.table(header, rows).text(text), EXIT_DECIDED))
}

#[cfg(test)]
mod tests {
    use super::*;
    use volterra_core::VerdictTag;

    fn row(expected: &str, verdict: &str) -> ReportRow {
        ReportRow {
            symbol: "s".into(),
            operator: OperatorKind::Tg,
            alpha: 0.0,
            beta: 0.0,
            expected: expected.into(),
            verdict: verdict.into(),
            tag: VerdictTag::Inconclusive,
            value: None,
            lower: 0.0,
            upper: None,
            upper_sum: None,
            probe_exp: None,
            probe_last: 0.0,
            agree: false,
            cross_check_agreement: true,
            forwarded: false,
            sufficiency_only: false,
            evidence: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    #[test]
    fn undecided_rows_are_not_contradictions() {
        assert!(!contradicts(&row("Bounded+Compact", "Inconclusive")));
        assert!(!contradicts(&row("Bounded+Compact", "Bounded")));
        assert!(contradicts(&row("Bounded+Compact", "Unbounded")));
        assert!(contradicts(&row("Bounded+NotCompact", "Bounded+Compact")));
        assert!(contradicts(&row("Unbounded", "Bounded")));
        // Fully decided but still disagreeing, e.g. a wrong value.
        assert!(contradicts(&row("Bounded", "Bounded")));
    }

    #[test]
    fn report_header_is_frozen() {
        assert_eq!(REPORT_HEADER.join(","), "symbol,op,alpha,beta,verdict,value,lower,upper,probe_exp,agree");
    }
}
