use volterra_core::estimation::{
    compactness_probe, empirical_lower_bound, lower_bound_ladder, probe_grid, TestBattery, PROBE_LENGTH,
};
use volterra_core::report::{run_report, ReportConfig, ReportRow};
use volterra_core::series::DEFAULT_DEGREE;
use volterra_core::symbols::{ground_truth_table, lookup};
use volterra_core::{DiskGrid, OperatorKind, SpacePair, VerdictTag};

fn rows() -> Vec<ReportRow> {
    run_report(&ReportConfig::default())
}

#[test]
fn report_reproduces_every_row() {
    let rows = rows();
    assert_eq!(rows.len(), ground_truth_table().len());
    for r in &rows {
        assert!(r.agree, "{} {} ({}, {}): expected {}, got {} {:?}", r.symbol, r.operator, r.alpha, r.beta, r.expected, r.verdict, r.diagnostics);
        assert!(r.cross_check_agreement, "{} {}", r.symbol, r.operator);
    }

    // Norm sandwich on every row with an upper bound.
    for r in rows.iter().filter(|r| r.tag != VerdictTag::Unbounded) {
        if let Some(upper) = r.upper {
            assert!(r.lower <= upper + 1e-6, "{} {}: {} > {}", r.symbol, r.operator, r.lower, upper);
        }
    }
    let id = &rows[0];
    assert!((id.lower - 1.0).abs() <= 1e-3);
    assert!((id.upper.unwrap() - 1.0).abs() <= 1e-3);

    // Probe decay and persistence.
    for r in &rows {
        match r.tag {
            VerdictTag::Compact => assert!(r.probe_exp.is_none_or(|e| e < 0.0), "{}", r.symbol),
            VerdictTag::NotCompact => assert!(r.probe_last > 0.0, "{}", r.symbol),
            _ => {}
        }
    }
}

#[test]
fn compact_rows_have_decaying_probes() {
    for row in ground_truth_table() {
        if row.expected.compact != Some(true) || row.symbol == "lacunary" {
            continue;
        }
        let g = lookup(row.symbol).unwrap();
        let pair = SpacePair::new(row.alpha, row.beta).unwrap();
        let p = compactness_probe(&g, row.operator, pair, PROBE_LENGTH, &probe_grid()).unwrap();
        assert!(p.decays(), "{} {}: last {}", row.symbol, row.operator, p.last());
    }
}

#[test]
fn lacunary_probe_follows_its_closed_form() {
    // ‖T_g z^n‖_∞ = Σ_k 2^k / (n + 2^k): decay sets in only for n well past deg g.
    let g = lookup("lacunary").unwrap();
    let p = compactness_probe(&g, OperatorKind::Tg, SpacePair::new(0.0, 0.0).unwrap(), 64, &probe_grid()).unwrap();
    let coeffs = g.taylor(DEFAULT_DEGREE);
    let powers: Vec<usize> = (1..=coeffs.degree()).filter(|&k| coeffs.coeff(k).norm() > 0.0).collect();
    assert!(powers.iter().all(|k| k.is_power_of_two()));
    for (&n, &v) in p.indices.iter().zip(&p.values) {
        let exact: f64 = powers.iter().map(|&k| k as f64 / (n + k) as f64).sum();
        assert!((v - exact).abs() < 1e-6, "n = {n}: {v} vs {exact}");
    }
    assert!(p.decay_exponent.unwrap() < 0.0);
}

#[test]
fn not_compact_rows_have_persistent_probes() {
    for row in ground_truth_table() {
        if row.expected.compact != Some(false) || row.expected.bounded != Some(true) {
            continue;
        }
        let g = lookup(row.symbol).unwrap();
        let pair = SpacePair::new(row.alpha, row.beta).unwrap();
        let p = compactness_probe(&g, row.operator, pair, PROBE_LENGTH, &probe_grid()).unwrap();
        assert!(p.persists(0.1), "{} {}", row.symbol, row.operator);
    }
}

#[test]
fn unbounded_rows_have_growing_lower_bounds() {
    let grid = DiskGrid::default();
    for row in ground_truth_table() {
        if row.expected.bounded != Some(false) || row.beta != 0.0 {
            continue;
        }
        let g = lookup(row.symbol).unwrap();
        let pair = SpacePair::new(row.alpha, row.beta).unwrap();
        let battery = TestBattery::new(row.alpha, DEFAULT_DEGREE, &grid);
        let ladder = lower_bound_ladder(&g, row.operator, pair, &battery, &grid);
        let n = ladder.len();
        for w in ladder[n - 3..].windows(2) {
            assert!(w[1] >= 1.1 * w[0], "{} {}: {:?}", row.symbol, row.operator, ladder);
        }
        let full = empirical_lower_bound(&g, row.operator, pair, &battery, &grid);
        assert!(full.value >= ladder[n - 1]);
    }
}
