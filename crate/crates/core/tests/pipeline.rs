use renewcast_core::diffusion::{PolicyIntensity, ScenarioBounds};
use renewcast_core::ingest::SplitPlan;
use renewcast_core::ingest::{
    assemble_panel, project_determinants, DeterminantSpec, Overrides, PanelSchema, ProjectionRule, RawTable,
};
use renewcast_core::scenario::{
    analyze_gap, compose_scenarios, fit_forecast, required_intensity, run_baseline, AnnualSeries, FitPlan,
    ScenarioSpec, TrainSettings,
};
use renewcast_core::{TargetKind, YearMonth};

fn table() -> RawTable {
    let header = ["month", "GDP", "PRICE", "RNWXYEAR"];
    let mut rows = Vec::new();
    for k in 0..96u32 {
        let month = YearMonth::new(2012 + (k / 12) as i32, (k % 12 + 1) as u8).unwrap();
        let gdp = 50.0 * 1.004f64.powi(k as i32);
        let price = 90.0 - 0.3 * f64::from(k) + (f64::from(k) * 0.7).sin();
        let label = if k % 12 == 11 {
            format!("{:.3}", 200.0 + 30.0 * f64::from(k / 12))
        } else {
            String::new()
        };
        rows.push(vec![
            month.to_string(),
            format!("{gdp:.4}"),
            format!("{price:.4}"),
            label,
        ]);
    }
    RawTable::from_cells(&header.map(String::from), &rows)
}

#[test]
fn ingest_to_gap() {
    let schema = PanelSchema::new(vec![
        DeterminantSpec::numeric("GDP", ProjectionRule::HistoricalGrowth),
        DeterminantSpec::numeric("PRICE", ProjectionRule::HoldConstant),
    ])
    .unwrap();
    let panel = assemble_panel("Sample", &table(), &schema).unwrap();
    let plan = FitPlan {
        targets: vec![TargetKind::Production],
        split: SplitPlan::LastYears { years: 1 },
        screen_threshold: Some(0.1),
        settings: TrainSettings {
            epochs: 400,
            seed: 9,
            ..TrainSettings::default()
        },
    };
    let fit = fit_forecast(&panel, &schema, &plan).unwrap();
    assert_eq!(fit.model.feature_ids, ["GDP", "PRICE"]);
    assert!(fit.trace.holdout_mape.unwrap().is_finite());

    let future = project_determinants(&panel, &schema, YearMonth::new(2026, 12).unwrap(), &Overrides::new()).unwrap();
    let baseline = run_baseline(&fit.model, &future, TargetKind::Production).unwrap();
    let years: Vec<i32> = baseline.points().iter().map(|p| p.year).collect();
    assert_eq!(years, (2020..=2026).collect::<Vec<_>>());

    let totals: Vec<(i32, f64)> = years
        .iter()
        .map(|&y| (y, 5000.0 + 50.0 * f64::from(y - 2020)))
        .collect();
    let mut spec = ScenarioSpec {
        region: "Sample".into(),
        target: TargetKind::Production,
        policy_start: 2020,
        horizon: 2026,
        intensity: PolicyIntensity::new(0.5, 0.5).unwrap(),
        totals: AnnualSeries::from_pairs(&totals).unwrap(),
        bounds: ScenarioBounds::for_target(TargetKind::Production),
    };
    let anchor = baseline.get(2020).unwrap() / 5000.0;
    if anchor >= spec.bounds.c_base {
        spec.bounds.c_base = anchor * 1.5;
    }
    let report = compose_scenarios(&spec, &baseline).unwrap();
    let target = report.policy.values.last().unwrap() * 1.2;
    let gap = analyze_gap(&report, target).unwrap();
    assert!(gap.shortfall > 0.0);
    let intensity = required_intensity(&report, &gap).expect("20% above the policy curve is reachable");
    spec.intensity = intensity;
    let again = compose_scenarios(&spec, &baseline).unwrap();
    let got = *again.policy.values.last().unwrap();
    assert!((got - target).abs() / target < 1e-3);
}
