use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{AnnualSeries, ScenarioError};
use crate::ann::{
    build_network, train, NetworkConfig, NetworkModel, OutputActivation, Regressor, TrainingBatch, TrainingTrace,
    DEFAULT_BATCH_SIZE, DEFAULT_EPOCHS, DEFAULT_EPSILON, DEFAULT_LEARNING_RATE, DEFAULT_RMS_DECAY,
};
use crate::ingest::{
    build_dataset, interpolate_targets, screen_correlation, split, standardize, AnnualValue, CorrelationScreen,
    DeterminantPanel, IngestError, MonthlyLabels, PanelSchema, SplitPlan, Standardization, ANCHOR_MONTH,
};
use crate::{Matrix, TargetKind, YearMonth};

/// A trained baseline regressor together with everything needed to feed it:
/// the determinant schema, the feature column order and the input scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastModel {
    pub region: String,
    pub schema: PanelSchema,
    pub feature_ids: Vec<String>,
    pub standardization: Standardization,
    /// Output order of the network.
    pub targets: Vec<TargetKind>,
    pub last_observed: YearMonth,
    pub network: NetworkModel,
}

/// Hyperparameters for [`fit_forecast`]. Sizes are derived from the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSettings {
    /// Hidden widths; `None` applies the halving rule to the input size.
    pub hidden_sizes: Option<Vec<usize>>,
    pub learning_rate: f64,
    pub rms_decay: f64,
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub output_activation: OutputActivation,
    pub standardize_labels: bool,
    pub early_stopping_patience: Option<usize>,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            hidden_sizes: None,
            learning_rate: DEFAULT_LEARNING_RATE,
            rms_decay: DEFAULT_RMS_DECAY,
            epsilon: DEFAULT_EPSILON,
            epochs: DEFAULT_EPOCHS,
            batch_size: DEFAULT_BATCH_SIZE,
            seed: 0,
            output_activation: OutputActivation::Identity,
            standardize_labels: false,
            early_stopping_patience: None,
        }
    }
}

impl TrainSettings {
    pub fn network_config(&self, input_size: usize, output_size: usize) -> NetworkConfig {
        let mut config = NetworkConfig::new(input_size);
        if let Some(hidden) = &self.hidden_sizes {
            config.hidden_sizes = hidden.clone();
        }
        config.output_size = output_size;
        config.learning_rate = self.learning_rate;
        config.rms_decay = self.rms_decay;
        config.epsilon = self.epsilon;
        config.epochs = self.epochs;
        config.batch_size = self.batch_size;
        config.seed = self.seed;
        config.output_activation = self.output_activation;
        config.standardize_labels = self.standardize_labels;
        config.early_stopping_patience = self.early_stopping_patience;
        config
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitPlan {
    pub targets: Vec<TargetKind>,
    pub split: SplitPlan,
    /// Drop weakly correlated determinants before training.
    pub screen_threshold: Option<f64>,
    pub settings: TrainSettings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub model: ForecastModel,
    pub trace: TrainingTrace,
    /// One screen per target when screening ran.
    pub screens: Vec<(TargetKind, CorrelationScreen)>,
    pub train_months: Vec<YearMonth>,
    pub holdout_months: Vec<YearMonth>,
}

/// Standardize, interpolate labels, optionally screen, split and train.
pub fn fit_forecast(raw: &DeterminantPanel, schema: &PanelSchema, plan: &FitPlan) -> Result<FitOutcome, ScenarioError> {
    if plan.targets.is_empty() {
        return Err(ScenarioError::NoTargets);
    }
    let unique: BTreeSet<_> = plan.targets.iter().collect();
    if unique.len() != plan.targets.len() {
        return Err(ScenarioError::DuplicateTarget);
    }
    let mut panel = standardize(raw)?;
    let labels: Vec<MonthlyLabels> = plan
        .targets
        .iter()
        .map(|&t| interpolate_targets(&panel, t))
        .collect::<Result<_, _>>()?;

    let mut screens = Vec::new();
    if let Some(threshold) = plan.screen_threshold {
        let mut keep = BTreeSet::new();
        for (target, l) in plan.targets.iter().zip(&labels) {
            let screen = screen_correlation(&panel, l, threshold);
            keep.extend(screen.retained());
            screens.push((*target, screen));
        }
        if keep.is_empty() {
            return Err(ScenarioError::NothingRetained { threshold });
        }
        panel = panel.retain_determinants(&keep);
    }

    let label_refs: Vec<&MonthlyLabels> = labels.iter().collect();
    let data = build_dataset(&panel, &label_refs)?;
    let (train_set, holdout_set) = split(&data, plan.split)?;

    let config = plan.settings.network_config(data.feature_ids.len(), plan.targets.len());
    config.validate()?;
    let network = build_network(&config)?;
    let train_batch = TrainingBatch::new(train_set.inputs, train_set.labels)?;
    let holdout_batch = TrainingBatch::new(holdout_set.inputs, holdout_set.labels)?;
    let (network, trace) = train(network, &train_batch, Some(&holdout_batch), &config)?;

    let standardization = panel.standardization().cloned().expect("panel was standardized above");
    let model = ForecastModel {
        region: raw.region().into(),
        schema: schema.clone(),
        feature_ids: data.feature_ids,
        standardization,
        targets: plan.targets.clone(),
        last_observed: *raw.months().last().expect("non-empty panel"),
        network,
    };
    Ok(FitOutcome {
        model,
        trace,
        screens,
        train_months: train_set.months,
        holdout_months: holdout_set.months,
    })
}

impl ForecastModel {
    pub fn output_index(&self, target: TargetKind) -> Option<usize> {
        self.targets.iter().position(|&t| t == target)
    }

    /// Input matrix in model feature order and scaling. A raw panel is scaled with
    /// the model's statistics; a standardized panel must carry those same statistics.
    pub fn design_matrix(&self, panel: &DeterminantPanel) -> Result<Matrix, ScenarioError> {
        let scaled;
        let panel = match panel.standardization() {
            None => {
                let keep: BTreeSet<String> = self.feature_ids.iter().map(|id| source_of(panel, id)).collect();
                scaled = panel
                    .retain_determinants(&keep)
                    .apply_standardization(&self.standardization)?;
                &scaled
            }
            Some(stats) => {
                for id in &self.feature_ids {
                    if stats.get(id) != self.standardization.get(id) {
                        return Err(ScenarioError::ScalingMismatch { column: id.clone() });
                    }
                }
                panel
            }
        };
        let mut m = Matrix::zeros(panel.len(), self.feature_ids.len());
        for (j, id) in self.feature_ids.iter().enumerate() {
            let col = panel
                .column(id)
                .ok_or_else(|| IngestError::MissingColumn { column: id.clone() })?;
            for (i, v) in col.values.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    /// One prediction row per panel month, in label units.
    pub fn predict_monthly(&self, panel: &DeterminantPanel) -> Result<Matrix, ScenarioError> {
        let inputs = self.design_matrix(panel)?;
        Ok(self.network.predict(&inputs)?)
    }
}

fn source_of(panel: &DeterminantPanel, feature: &str) -> String {
    panel
        .column(feature)
        .map(|c| c.source.clone())
        .unwrap_or_else(|| feature.split('=').next().unwrap_or(feature).into())
}

/// Annual baseline for one target: production sums the twelve months of each
/// complete calendar year, capacity takes the December value.
pub fn run_baseline(
    model: &ForecastModel,
    panel: &DeterminantPanel,
    target: TargetKind,
) -> Result<AnnualSeries, ScenarioError> {
    let out = model
        .output_index(target)
        .ok_or(ScenarioError::TargetNotModelled { target })?;
    let predictions = model.predict_monthly(panel)?;
    let monthly: Vec<(YearMonth, f64)> = panel
        .months()
        .iter()
        .enumerate()
        .map(|(i, m)| (*m, predictions[(i, out)]))
        .collect();
    aggregate_annual(&monthly, target)
}

pub fn aggregate_annual(monthly: &[(YearMonth, f64)], target: TargetKind) -> Result<AnnualSeries, ScenarioError> {
    let mut points = Vec::new();
    match target {
        TargetKind::Capacity => {
            points.extend(
                monthly
                    .iter()
                    .filter(|(m, _)| m.month() == ANCHOR_MONTH)
                    .map(|(m, v)| AnnualValue {
                        year: m.year(),
                        value: *v,
                    }),
            );
        }
        TargetKind::Production => {
            let mut i = 0;
            while i < monthly.len() {
                let year = monthly[i].0.year();
                let mut j = i;
                while j < monthly.len() && monthly[j].0.year() == year {
                    j += 1;
                }
                let months: Vec<u8> = monthly[i..j].iter().map(|(m, _)| m.month()).collect();
                if months == (1..=12).collect::<Vec<u8>>() {
                    points.push(AnnualValue {
                        year,
                        value: monthly[i..j].iter().map(|(_, v)| v).sum(),
                    });
                }
                i = j;
            }
        }
    }
    if points.is_empty() {
        return Err(ScenarioError::NoCompleteYear {
            target,
            detail: format!("{} months supplied", monthly.len()),
        });
    }
    AnnualSeries::new(points)
}
