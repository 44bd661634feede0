use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use proptest::prelude::*;

use super::*;
use crate::ann::{Layer, NetworkConfig, NetworkModel};
use crate::diffusion::{s_curve, PolicyIntensity, ScenarioBounds};
use crate::ingest::{
    project_determinants, Column, DeterminantPanel, DeterminantSpec, Overrides, PanelSchema, ProjectionRule, SplitPlan,
};
use crate::scoring::{builtin_scorecard, FactorKind, Region};
use crate::{Matrix, YearMonth};

fn ym(y: i32, m: u8) -> YearMonth {
    YearMonth::new(y, m).unwrap()
}

fn flat_totals(from: i32, to: i32, value: f64) -> AnnualSeries {
    AnnualSeries::new((from..=to).map(|year| AnnualValue { year, value }).collect()).unwrap()
}

fn spec(target: TargetKind, f_c: f64, f_p: f64) -> ScenarioSpec {
    ScenarioSpec {
        region: "Testland".into(),
        target,
        policy_start: 2020,
        horizon: 2025,
        intensity: PolicyIntensity::new(f_c, f_p).unwrap(),
        totals: AnnualSeries::from_pairs(&[
            (2020, 1000.0),
            (2021, 1010.0),
            (2022, 1020.0),
            (2023, 1030.0),
            (2024, 1040.0),
            (2025, 1050.0),
        ])
        .unwrap(),
        bounds: ScenarioBounds::for_target(target),
    }
}

fn ann_baseline() -> AnnualSeries {
    AnnualSeries::from_pairs(&[(2020, 30.0), (2021, 33.0), (2022, 35.5)]).unwrap()
}

#[test]
fn annual_series_checks_order() {
    assert!(AnnualSeries::from_pairs(&[(2020, 1.0), (2020, 2.0)]).is_err());
    assert!(AnnualSeries::from_pairs(&[(2021, 1.0), (2020, 2.0)]).is_err());
    assert!(AnnualSeries::from_pairs(&[(2020, f64::NAN)]).is_err());
    let s = AnnualSeries::from_pairs(&[(2019, 1.0), (2021, 3.0)]).unwrap();
    assert_eq!((s.get(2019), s.get(2020), s.get(2021)), (Some(1.0), None, Some(3.0)));
}

#[test]
fn aggregation_rules() {
    let monthly: Vec<(YearMonth, f64)> = ym(2020, 1).range_inclusive(ym(2021, 12)).map(|m| (m, 2.5)).collect();
    let prod = aggregate_annual(&monthly, TargetKind::Production).unwrap();
    assert_eq!(
        prod.points(),
        &[
            AnnualValue {
                year: 2020,
                value: 30.0
            },
            AnnualValue {
                year: 2021,
                value: 30.0
            }
        ]
    );

    let ramp: Vec<(YearMonth, f64)> = ym(2020, 6)
        .range_inclusive(ym(2022, 3))
        .enumerate()
        .map(|(i, m)| (m, i as f64))
        .collect();
    let cap = aggregate_annual(&ramp, TargetKind::Capacity).unwrap();
    // 2020-12 is the 7th month of the ramp, 2021-12 the 19th.
    assert_eq!(
        cap.points(),
        &[
            AnnualValue { year: 2020, value: 6.0 },
            AnnualValue {
                year: 2021,
                value: 18.0
            }
        ]
    );
    let prod = aggregate_annual(&ramp, TargetKind::Production).unwrap();
    assert_eq!(
        prod.points(),
        &[AnnualValue {
            year: 2021,
            value: (7..19).sum::<i32>() as f64
        }]
    );

    assert!(matches!(
        aggregate_annual(&ramp[..3], TargetKind::Capacity),
        Err(ScenarioError::NoCompleteYear { .. })
    ));
}

fn constant_model(value: f64, feature_ids: &[&str]) -> ForecastModel {
    let n = feature_ids.len();
    let mut config = NetworkConfig::new(n);
    config.hidden_sizes = vec![];
    let network = NetworkModel::from_layers(
        config,
        vec![Layer {
            weights: Matrix::zeros(1, n),
            bias: vec![value],
        }],
    )
    .unwrap();
    ForecastModel {
        region: "Testland".into(),
        schema: PanelSchema::new(
            feature_ids
                .iter()
                .map(|id| DeterminantSpec::numeric(id, ProjectionRule::HoldConstant))
                .collect(),
        )
        .unwrap(),
        feature_ids: feature_ids.iter().map(|s| (*s).into()).collect(),
        standardization: crate::ingest::Standardization {
            convention: Default::default(),
            columns: feature_ids
                .iter()
                .map(|id| crate::ingest::ColumnStats {
                    id: (*id).into(),
                    mean: 0.0,
                    std: 1.0,
                })
                .collect(),
        },
        targets: vec![TargetKind::Capacity, TargetKind::Production],
        last_observed: ym(2019, 12),
        network: NetworkModel {
            config: {
                let mut c = NetworkConfig::new(n);
                c.hidden_sizes = vec![];
                c.output_size = 2;
                c
            },
            layers: vec![Layer {
                weights: Matrix::zeros(2, n),
                bias: vec![value, value / 10.0],
            }],
            state: network
                .state
                .iter()
                .map(|_| crate::ann::LayerState {
                    weights_sq: Matrix::zeros(2, n),
                    bias_sq: vec![0.0; 2],
                })
                .collect(),
            label_scale: None,
            fingerprint: 0,
        },
    }
}

fn future_panel(ids: &[&str], first: YearMonth, last: YearMonth) -> DeterminantPanel {
    let months: Vec<YearMonth> = first.range_inclusive(last).collect();
    let columns = ids
        .iter()
        .enumerate()
        .map(|(k, id)| Column {
            id: (*id).into(),
            source: (*id).into(),
            category: None,
            values: (0..months.len()).map(|i| (i * (k + 1)) as f64).collect(),
        })
        .collect();
    DeterminantPanel::new("Testland", months, columns, BTreeMap::new()).unwrap()
}

#[test]
fn stub_model_gives_flat_baseline() {
    let model = constant_model(7.0, &["A", "B"]);
    let panel = future_panel(&["A", "B"], ym(2020, 1), ym(2022, 12));
    let cap = run_baseline(&model, &panel, TargetKind::Capacity).unwrap();
    assert_eq!(
        cap.points().iter().map(|p| p.value).collect::<Vec<_>>(),
        [7.0, 7.0, 7.0]
    );
    let prod = run_baseline(&model, &panel, TargetKind::Production).unwrap();
    for p in prod.points() {
        assert!((p.value - 8.4).abs() < 1e-12);
    }

    let missing = future_panel(&["A"], ym(2020, 1), ym(2020, 12));
    assert!(matches!(
        run_baseline(&model, &missing, TargetKind::Capacity),
        Err(ScenarioError::Ingest(_))
    ));
    let mut single = model.clone();
    single.targets = vec![TargetKind::Capacity];
    single.network.config.output_size = 1;
    single.network.layers[0] = Layer {
        weights: Matrix::zeros(1, 2),
        bias: vec![1.0],
    };
    assert_eq!(
        run_baseline(&single, &panel, TargetKind::Production),
        Err(ScenarioError::TargetNotModelled {
            target: TargetKind::Production
        })
    );
}

#[test]
fn endpoint_collapse() {
    for target in TargetKind::ALL {
        let low = compose_scenarios(&spec(target, 0.0, 0.0), &ann_baseline()).unwrap();
        let high = compose_scenarios(&spec(target, 1.0, 1.0), &ann_baseline()).unwrap();
        for i in 0..low.years.len() {
            assert!((low.policy.values[i] - low.baseline.values[i]).abs() <= 1e-12 * low.baseline.values[i].max(1.0));
            assert!((low.policy.shares[i] - low.baseline.shares[i]).abs() <= 1e-12);
            assert!((high.policy.values[i] - high.optimal.values[i]).abs() <= 1e-12 * high.optimal.values[i].max(1.0));
            assert!((high.policy.shares[i] - high.optimal.shares[i]).abs() <= 1e-12);
        }
    }
}

#[test]
fn report_shape_and_anchor() {
    let r = compose_scenarios(&spec(TargetKind::Production, 0.504, 0.527), &ann_baseline()).unwrap();
    assert_eq!(r.years, (2020..=2025).collect::<Vec<_>>());
    assert_eq!(r.ann, vec![Some(30.0), Some(33.0), Some(35.5), None, None, None]);
    assert!((r.anchor_share - 0.03).abs() < 1e-15);
    for kind in ScenarioKind::ALL {
        let c = r.curve(kind);
        assert!((c.shares[0] - 0.03).abs() < 1e-12);
        assert!((c.values[0] - 30.0).abs() < 1e-9);
        assert!(c.values.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(c.shares[0], r.anchor_share);
        for (i, &year) in r.years.iter().enumerate() {
            let exact = s_curve(&c.params, f64::from(year - 2020));
            if i == 0 {
                assert!((c.shares[0] - exact).abs() < 1e-12);
            } else {
                assert_eq!(c.shares[i], exact);
            }
            assert_eq!(c.values[i], c.shares[i] * r.totals[i]);
        }
    }
    assert!((r.policy.params.c - 0.478).abs() < 0.003);
    assert!((r.policy.params.p - 0.111).abs() < 0.003);
    assert_eq!((r.baseline.params.c, r.optimal.params.c), (0.15, 0.80));
    let dense = r.dense_shares(ScenarioKind::Policy, 1.0 / 12.0).unwrap();
    assert_eq!(dense.len(), 61);
    assert_eq!(dense[60].0, 2025.0);
    assert!((dense[60].1 - r.policy.shares[5]).abs() < 1e-15);
}

#[test]
fn ordering_on_grid() {
    let r = compose_scenarios(&spec(TargetKind::Capacity, 0.504, 0.457), &ann_baseline()).unwrap();
    for i in 0..r.years.len() {
        let (b, p, o) = (r.baseline.shares[i], r.policy.shares[i], r.optimal.shares[i]);
        assert!(b <= p && p <= o);
        if i > 0 {
            assert!(b < p && p < o);
        }
    }
}

#[test]
fn compose_errors() {
    let high = AnnualSeries::from_pairs(&[(2020, 200.0)]).unwrap();
    assert!(matches!(
        compose_scenarios(&spec(TargetKind::Production, 0.5, 0.5), &high),
        Err(ScenarioError::InfeasibleAnchor { c_base, .. }) if c_base == 0.15
    ));
    let late = AnnualSeries::from_pairs(&[(2021, 20.0)]).unwrap();
    assert_eq!(
        compose_scenarios(&spec(TargetKind::Production, 0.5, 0.5), &late),
        Err(ScenarioError::MissingYear {
            series: "baseline",
            year: 2020
        })
    );
    let mut s = spec(TargetKind::Production, 0.5, 0.5);
    s.totals = flat_totals(2020, 2024, 1000.0);
    assert_eq!(
        compose_scenarios(&s, &ann_baseline()),
        Err(ScenarioError::MissingYear {
            series: "totals",
            year: 2025
        })
    );
    let mut s = spec(TargetKind::Production, 0.5, 0.5);
    s.horizon = 2020;
    assert!(matches!(
        compose_scenarios(&s, &ann_baseline()),
        Err(ScenarioError::HorizonNotAfterStart { .. })
    ));
    let mut s = spec(TargetKind::Production, 0.5, 0.5);
    s.bounds = ScenarioBounds::for_target(TargetKind::Capacity);
    assert!(matches!(
        compose_scenarios(&s, &ann_baseline()),
        Err(ScenarioError::BoundsTargetMismatch { .. })
    ));
    let mut s = spec(TargetKind::Production, 0.5, 0.5);
    s.intensity.f_p = 1.5;
    assert!(matches!(
        compose_scenarios(&s, &ann_baseline()),
        Err(ScenarioError::Diffusion(_))
    ));
    let zero = AnnualSeries::from_pairs(&[(2020, 0.0)]).unwrap();
    assert!(matches!(
        compose_scenarios(&spec(TargetKind::Production, 0.5, 0.5), &zero),
        Err(ScenarioError::NonPositiveAnchor(_))
    ));
}

#[test]
fn scorecard_intensity() {
    let i = intensity_from_scorecards(
        &builtin_scorecard(Region::Singapore, FactorKind::Ceiling),
        &builtin_scorecard(Region::Singapore, FactorKind::Speed),
    )
    .unwrap();
    assert!((i.f_c - 0.504).abs() < 1e-12 && (i.f_p - 0.45716).abs() < 1e-12);
    assert!(i.source.unwrap().starts_with("scorecards ceiling:"));
    assert!(matches!(
        intensity_from_scorecards(
            &builtin_scorecard(Region::Singapore, FactorKind::Speed),
            &builtin_scorecard(Region::Singapore, FactorKind::Speed)
        ),
        Err(ScenarioError::WrongFactorKind { card: "ceiling", .. })
    ));
}

fn horizon_value(report: &ScenarioReport) -> f64 {
    *report.policy.values.last().unwrap()
}

fn rerun(s: &ScenarioSpec, report: &ScenarioReport, gap: &TargetGap) -> ScenarioReport {
    let mut s = s.clone();
    s.intensity = required_intensity(report, gap).expect("in envelope");
    compose_scenarios(&s, &ann_baseline()).unwrap()
}

#[test]
fn gap_on_predicted_value_is_zero() {
    let s = spec(TargetKind::Capacity, 0.504, 0.457);
    let r = compose_scenarios(&s, &ann_baseline()).unwrap();
    let gap = analyze_gap(&r, horizon_value(&r)).unwrap();
    assert_eq!(gap.shortfall, 0.0);
    assert!((gap.required_f_p.value - 0.457).abs() < 1e-9);
    assert!(gap.required_f_c.is_none() && gap.reachable());
}

/// Totals sized so that the policy scenario lands on exactly 405 at the horizon.
fn capacity_case() -> (ScenarioSpec, ScenarioReport) {
    let mut s = spec(TargetKind::Capacity, 0.504, 0.45716);
    let probe = compose_scenarios(&s, &ann_baseline()).unwrap();
    let share = *probe.policy.shares.last().unwrap();
    let total = 405.0 / share;
    s.totals = flat_totals(2020, 2025, total);
    let baseline = AnnualSeries::from_pairs(&[(2020, 0.03 * total)]).unwrap();
    let r = compose_scenarios(&s, &baseline).unwrap();
    (s, r)
}

#[test]
fn capacity_target_gap() {
    let (s, r) = capacity_case();
    assert!((horizon_value(&r) - 405.0).abs() < 1e-9);
    let gap = analyze_gap(&r, 450.0).unwrap();
    assert!((gap.shortfall - 45.0).abs() < 1e-9);
    assert!(gap.required_f_p.value > s.intensity.f_p);
    assert!(gap.required_f_c.is_none());

    let mut s2 = s.clone();
    s2.intensity = required_intensity(&r, &gap).unwrap();
    let baseline = AnnualSeries::from_pairs(&[(2020, r.ann[0].unwrap())]).unwrap();
    let again = compose_scenarios(&s2, &baseline).unwrap();
    assert!((horizon_value(&again) - 450.0).abs() / 450.0 < 1e-3);
}

#[test]
fn ceiling_limited_target_raises_f_c() {
    let s = spec(TargetKind::Production, 0.2, 0.5);
    let r = compose_scenarios(&s, &ann_baseline()).unwrap();
    let c = r.policy.params.c;
    let target = (c + 0.05) * 1050.0;
    let gap = analyze_gap(&r, target).unwrap();
    let f_c = gap.required_f_c.unwrap();
    assert!((gap.ceiling - 1.05 * (c + 0.05)).abs() < 1e-12);
    assert!(f_c.in_envelope() && f_c.value > 0.2);
    if gap.reachable() {
        let again = rerun(&s, &r, &gap);
        assert!((horizon_value(&again) - target).abs() / target < 1e-3);
    }
}

#[test]
fn target_above_optimal_is_flagged() {
    let s = spec(TargetKind::Production, 0.5, 0.5);
    let r = compose_scenarios(&s, &ann_baseline()).unwrap();
    let gap = analyze_gap(&r, 0.85 * 1050.0).unwrap();
    assert_eq!(gap.required_f_c.unwrap().envelope, Envelope::AboveOptimal);
    assert_eq!(gap.required_f_p.envelope, Envelope::Unreachable);
    assert!(!gap.reachable());
    assert!(required_intensity(&r, &gap).is_none());
    assert!(matches!(
        analyze_gap(&r, 0.99 * 1050.0),
        Err(ScenarioError::TargetExceedsTotal { .. })
    ));
    assert_eq!(analyze_gap(&r, 0.0), Err(ScenarioError::NonPositiveTarget(0.0)));
    assert!(analyze_gap(&r, -5.0).is_err());
}

#[test]
fn low_target_needs_less_than_baseline() {
    let s = spec(TargetKind::Production, 0.5, 0.5);
    let r = compose_scenarios(&s, &ann_baseline()).unwrap();
    let gap = analyze_gap(&r, 20.0).unwrap();
    assert_eq!(gap.required_p, 0.0);
    assert_eq!(gap.required_f_p.envelope, Envelope::BelowBaseline);
    assert!(gap.shortfall < 0.0);
}

fn training_panel() -> (DeterminantPanel, PanelSchema) {
    let months: Vec<YearMonth> = ym(2014, 1).range_inclusive(ym(2019, 12)).collect();
    let n = months.len();
    let x1: Vec<f64> = (0..n).map(|i| 100.0 + i as f64).collect();
    let x2: Vec<f64> = (0..n)
        .map(|i| 5.0 - 0.02 * i as f64 + ((i * 7) % 13) as f64 * 0.1)
        .collect();
    let flat: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let mut targets = BTreeMap::new();
    targets.insert(
        TargetKind::Capacity,
        (2014..=2019)
            .map(|y| AnnualValue {
                year: y,
                value: 50.0 + 12.0 * f64::from(y - 2014),
            })
            .collect(),
    );
    let col = |id: &str, values: Vec<f64>| Column {
        id: id.into(),
        source: id.into(),
        category: None,
        values,
    };
    let panel = DeterminantPanel::new(
        "Testland",
        months,
        vec![col("GDP", x1), col("LCOE", x2), col("WIND", flat)],
        targets,
    )
    .unwrap();
    let schema = PanelSchema::new(vec![
        DeterminantSpec::numeric("GDP", ProjectionRule::HistoricalGrowth),
        DeterminantSpec::numeric("LCOE", ProjectionRule::HoldConstant),
        DeterminantSpec::numeric("WIND", ProjectionRule::HoldConstant),
    ])
    .unwrap();
    (panel, schema)
}

fn plan() -> FitPlan {
    FitPlan {
        targets: vec![TargetKind::Capacity],
        split: SplitPlan::LastYears { years: 1 },
        screen_threshold: Some(0.1),
        settings: TrainSettings {
            epochs: 40,
            seed: 9,
            ..TrainSettings::default()
        },
    }
}

#[test]
fn fit_pipeline() {
    let (panel, schema) = training_panel();
    let a = fit_forecast(&panel, &schema, &plan()).unwrap();
    let b = fit_forecast(&panel, &schema, &plan()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.model.feature_ids, ["GDP", "LCOE"]);
    assert_eq!(a.screens.len(), 1);
    assert_eq!(a.screens[0].1.dropped()[0].determinant, "WIND");
    assert_eq!(a.trace.epoch_losses.len(), 40);
    assert_eq!(a.holdout_months.len(), 12);
    // Labels exist from the first December on.
    assert_eq!(a.train_months.first(), Some(&ym(2014, 12)));
    assert_eq!(a.model.network.config.hidden_sizes, [2, 1]);
    assert_eq!(a.model.last_observed, ym(2019, 12));

    let future = project_determinants(&panel, &schema, ym(2022, 12), &Overrides::new()).unwrap();
    let base = run_baseline(&a.model, &future, TargetKind::Capacity).unwrap();
    assert_eq!(
        base.points().iter().map(|p| p.year).collect::<Vec<_>>(),
        [2020, 2021, 2022]
    );

    // The screened model ignores the extra WIND column of a raw panel, and
    // rejects a panel standardized with other statistics.
    let mut stats = a.model.standardization.clone();
    stats.columns[0].mean += 1.0;
    let keep = ["GDP".into(), "LCOE".into()].into_iter().collect();
    let other = future.retain_determinants(&keep).apply_standardization(&stats).unwrap();
    assert!(matches!(
        a.model.design_matrix(&other),
        Err(ScenarioError::ScalingMismatch { .. })
    ));
    let same = future
        .retain_determinants(&keep)
        .apply_standardization(&a.model.standardization)
        .unwrap();
    assert_eq!(
        a.model.design_matrix(&same).unwrap(),
        a.model.design_matrix(&future).unwrap()
    );

    let mut p = plan();
    p.targets.clear();
    assert_eq!(fit_forecast(&panel, &schema, &p).unwrap_err(), ScenarioError::NoTargets);
    let mut p = plan();
    p.screen_threshold = Some(1.1);
    assert!(matches!(
        fit_forecast(&panel, &schema, &p),
        Err(ScenarioError::NothingRetained { .. })
    ));
    let mut p = plan();
    p.targets = vec![TargetKind::Production];
    assert!(matches!(
        fit_forecast(&panel, &schema, &p),
        Err(ScenarioError::Ingest(_))
    ));
}

proptest! {
    #[test]
    fn scenarios_are_ordered(f_c in 0.0f64..=1.0, f_p in 0.0f64..=1.0, anchor in 1.0f64..140.0, cap in proptest::bool::ANY) {
        let target = if cap { TargetKind::Capacity } else { TargetKind::Production };
        let r = compose_scenarios(&spec(target, f_c, f_p), &AnnualSeries::from_pairs(&[(2020, anchor)]).unwrap()).unwrap();
        for i in 0..r.years.len() {
            prop_assert!(r.baseline.shares[i] <= r.policy.shares[i]);
            prop_assert!(r.policy.shares[i] <= r.optimal.shares[i]);
            prop_assert!(r.baseline.values[i] >= 0.0);
        }
        prop_assert!(r.policy.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn gap_round_trip(f_c in 0.0f64..=1.0, f_p in 0.0f64..=1.0, lift in 0.0f64..0.4) {
        let s = spec(TargetKind::Production, f_c, f_p);
        let r = compose_scenarios(&s, &ann_baseline()).unwrap();
        let target = horizon_value(&r) * (1.0 + lift);
        let gap = analyze_gap(&r, target).unwrap();
        if let Some(intensity) = required_intensity(&r, &gap) {
            let mut s2 = s.clone();
            s2.intensity = intensity;
            let again = compose_scenarios(&s2, &ann_baseline()).unwrap();
            prop_assert!((horizon_value(&again) - target).abs() / target < 1e-3);
        } else {
            prop_assert!(!gap.reachable());
        }
    }
}
