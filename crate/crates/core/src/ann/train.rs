use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    loss_and_gradients, mape, rmsprop_step, smooth_loss, AnnError, LabelScale, NetworkConfig, NetworkModel, Regressor,
};
use crate::Matrix;

/// Shuffle streams are derived from the config seed with this salt so they never
/// coincide with the initialization stream.
const SHUFFLE_SALT: u64 = 0x5348_5546_464c_4521;

/// Inputs and labels with equal row counts and finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingBatch {
    pub inputs: Matrix,
    pub labels: Matrix,
}

impl TrainingBatch {
    pub fn new(inputs: Matrix, labels: Matrix) -> Result<Self, AnnError> {
        if inputs.rows() != labels.rows() {
            return Err(AnnError::ShapeMismatch(alloc::format!(
                "{} input rows vs {} label rows",
                inputs.rows(),
                labels.rows()
            )));
        }
        if !inputs.is_finite() || !labels.is_finite() {
            return Err(AnnError::NonFinite);
        }
        Ok(TrainingBatch { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.rows() == 0
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainingTrace {
    /// Row-weighted mean mini-batch loss of each epoch that ran.
    pub epoch_losses: Vec<f64>,
    /// `None` when MAPE is undefined (a zero label).
    pub train_mape: Option<f64>,
    pub holdout_mape: Option<f64>,
    pub stopped_early: bool,
}

/// Trains `model` with shuffled mini-batches and RMSprop.
///
/// Hyperparameters come from `config`, whose architecture must match the model's.
/// Every epoch reshuffles with a stream indexed by the epoch number, so identical
/// inputs give identical traces. With early stopping enabled the parameters from
/// the best holdout epoch are kept.
pub fn train(
    mut model: NetworkModel,
    train_rows: &TrainingBatch,
    holdout: Option<&TrainingBatch>,
    config: &NetworkConfig,
) -> Result<(NetworkModel, TrainingTrace), AnnError> {
    config.validate()?;
    if !config.same_architecture(&model.config) {
        return Err(AnnError::ArchitectureMismatch);
    }
    if train_rows.is_empty() {
        return Err(AnnError::EmptyTrainingSet);
    }
    for rows in core::iter::once(train_rows).chain(holdout) {
        if rows.inputs.cols() != config.input_size {
            return Err(AnnError::WidthMismatch {
                expected: config.input_size,
                found: rows.inputs.cols(),
            });
        }
        if rows.labels.cols() != config.output_size {
            return Err(AnnError::ShapeMismatch("label width differs from output size".into()));
        }
    }
    model.config = config.clone();
    model.fingerprint = config.fingerprint();
    model.label_scale = config.standardize_labels.then(|| label_scales(&train_rows.labels));

    let labels = model.scale_labels(&train_rows.labels);
    let holdout_labels = holdout.map(|h| model.scale_labels(&h.labels));
    let n = train_rows.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut losses = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, NetworkModel)> = None;
    let mut since_best = 0usize;
    let mut stopped_early = false;

    for epoch in 0..config.epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ SHUFFLE_SALT);
        rng.set_stream(epoch as u64);
        order.sort_unstable();
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let x = train_rows.inputs.select_rows(chunk);
            let y = labels.select_rows(chunk);
            let (loss, grads) = loss_and_gradients(&model, &x, &y)?;
            rmsprop_step(&mut model, &grads)?;
            total += loss * chunk.len() as f64;
        }
        losses.push(total / n as f64);

        if let (Some(patience), Some(h), Some(hl)) = (config.early_stopping_patience, holdout, holdout_labels.as_ref())
        {
            let hloss = smooth_loss(&model.forward(&h.inputs)?, hl)?;
            match &best {
                Some((b, _)) if hloss >= *b => since_best += 1,
                _ => {
                    best = Some((hloss, model.clone()));
                    since_best = 0;
                }
            }
            if since_best >= patience {
                stopped_early = true;
                break;
            }
        }
    }
    if stopped_early {
        if let Some((_, m)) = best {
            model = m;
        }
    }

    let train_mape = split_mape(&model, train_rows)?;
    let holdout_mape = match holdout {
        Some(h) if !h.is_empty() => split_mape(&model, h)?,
        _ => None,
    };
    Ok((
        model,
        TrainingTrace {
            epoch_losses: losses,
            train_mape,
            holdout_mape,
            stopped_early,
        },
    ))
}

fn split_mape(model: &NetworkModel, rows: &TrainingBatch) -> Result<Option<f64>, AnnError> {
    let pred = model.predict(&rows.inputs)?;
    match mape(rows.labels.as_slice(), pred.as_slice()) {
        Ok(v) => Ok(Some(v)),
        Err(AnnError::ZeroActual { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn label_scales(labels: &Matrix) -> Vec<LabelScale> {
    (0..labels.cols())
        .map(|c| {
            let col = labels.col(c);
            let (mean, std) = crate::ingest::moments(&col, crate::ingest::StdConvention::Population);
            LabelScale {
                mean,
                std: if std > 0.0 { std } else { 1.0 },
            }
        })
        .collect()
}
