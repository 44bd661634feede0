//! Feed-forward regressor: ReLU hidden layers, smooth-L1 loss, RMSprop updates.

mod backprop;
mod loss;
mod metrics;
mod optim;
mod train;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fingerprint::Fnv;
use crate::Matrix;

pub use backprop::{backward, loss_and_gradients, Gradients, LayerGradient};
pub use loss::{smooth_loss, smooth_loss_grad};
pub use metrics::mape;
pub use optim::rmsprop_step;
pub use train::{train, TrainingBatch, TrainingTrace};

pub const DEFAULT_LEARNING_RATE: f64 = 0.001;
pub const DEFAULT_RMS_DECAY: f64 = 0.9;
pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_EPOCHS: usize = 5000;
pub const DEFAULT_BATCH_SIZE: usize = 32;
/// Holdout-loss patience used when early stopping is switched on without a value.
pub const DEFAULT_PATIENCE: usize = 200;

/// Name of the weight initialization scheme, folded into the fingerprint.
pub const INIT_SCHEME: &str = "xavier-uniform";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    #[default]
    Identity,
    Relu,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub input_size: usize,
    pub hidden_sizes: Vec<usize>,
    pub output_size: usize,
    pub learning_rate: f64,
    pub rms_decay: f64,
    /// Added to the squared-gradient average under the square root.
    pub epsilon: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    #[serde(default)]
    pub output_activation: OutputActivation,
    /// Train on standardized labels and undo the scaling on prediction.
    #[serde(default)]
    pub standardize_labels: bool,
    /// Stop when the holdout loss has not improved for this many epochs.
    #[serde(default)]
    pub early_stopping_patience: Option<usize>,
}

/// Hidden layer sizes: the first equals the input width, the second half of it.
/// Layers that would round down to zero are dropped.
pub fn halving_rule(input_size: usize) -> Vec<usize> {
    [input_size, input_size / 2].into_iter().filter(|&n| n > 0).collect()
}

impl NetworkConfig {
    /// Default configuration for `input_size` determinants and a single output.
    pub fn new(input_size: usize) -> Self {
        NetworkConfig {
            input_size,
            hidden_sizes: halving_rule(input_size),
            output_size: 1,
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

    pub fn validate(&self) -> Result<(), AnnError> {
        if self.input_size == 0 || self.output_size == 0 || self.hidden_sizes.contains(&0) {
            return Err(AnnError::ZeroSize);
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(AnnError::InvalidConfig("learning_rate must be positive"));
        }
        if !(self.rms_decay > 0.0 && self.rms_decay < 1.0) {
            return Err(AnnError::InvalidConfig("rms_decay must lie in (0, 1)"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(AnnError::InvalidConfig("epsilon must be non-negative"));
        }
        if self.batch_size == 0 {
            return Err(AnnError::InvalidConfig("batch_size must be positive"));
        }
        if self.early_stopping_patience == Some(0) {
            return Err(AnnError::InvalidConfig("early stopping patience must be positive"));
        }
        Ok(())
    }

    /// Layer widths from input to output.
    pub fn widths(&self) -> Vec<usize> {
        let mut w = Vec::with_capacity(self.hidden_sizes.len() + 2);
        w.push(self.input_size);
        w.extend_from_slice(&self.hidden_sizes);
        w.push(self.output_size);
        w
    }

    fn same_architecture(&self, other: &NetworkConfig) -> bool {
        self.input_size == other.input_size
            && self.hidden_sizes == other.hidden_sizes
            && self.output_size == other.output_size
            && self.output_activation == other.output_activation
    }

    fn fingerprint(&self) -> u64 {
        let mut h = Fnv::new()
            .str(INIT_SCHEME)
            .u64(self.input_size as u64)
            .u64(self.output_size as u64)
            .u64(self.hidden_sizes.len() as u64);
        for &n in &self.hidden_sizes {
            h = h.u64(n as u64);
        }
        h.f64(self.learning_rate)
            .f64(self.rms_decay)
            .f64(self.epsilon)
            .u64(self.epochs as u64)
            .u64(self.batch_size as u64)
            .u64(self.seed)
            .u64(self.output_activation as u64)
            .u64(u64::from(self.standardize_labels))
            .u64(self.early_stopping_patience.map_or(0, |p| p as u64 + 1))
            .finish()
    }
}

/// One affine map `a' = W a + b`; `weights` is `outputs x inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }
}

/// RMSprop moving averages of squared gradients, shaped like [`Layer`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerState {
    pub weights_sq: Matrix,
    pub bias_sq: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelScale {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub config: NetworkConfig,
    pub layers: Vec<Layer>,
    pub state: Vec<LayerState>,
    /// Present when the model was trained on standardized labels.
    #[serde(default)]
    pub label_scale: Option<Vec<LabelScale>>,
    pub fingerprint: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnnError {
    #[error("layer sizes must be positive")]
    ZeroSize,
    #[error("invalid network config: {0}")]
    InvalidConfig(&'static str),
    #[error("input width {found} does not match the network's {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("batch contains non-finite values")]
    NonFinite,
    #[error("training config describes a different architecture than the model")]
    ArchitectureMismatch,
    #[error("series lengths differ: {actual} actual vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("MAPE needs at least one point")]
    EmptySeries,
    #[error("actual value at index {index} is zero, MAPE undefined")]
    ZeroActual { index: usize },
}

/// Builds a network with Xavier-uniform weights drawn from `config.seed`, zero
/// biases, and zero optimizer state.
pub fn build_network(config: &NetworkConfig) -> Result<NetworkModel, AnnError> {
    config.validate()?;
    let widths = config.widths();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut layers = Vec::with_capacity(widths.len() - 1);
    let mut state = Vec::with_capacity(widths.len() - 1);
    for w in widths.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
        let mut weights = Matrix::zeros(fan_out, fan_in);
        for v in weights.as_mut_slice() {
            *v = rng.random_range(-limit..limit);
        }
        layers.push(Layer {
            weights,
            bias: vec![0.0; fan_out],
        });
        state.push(LayerState {
            weights_sq: Matrix::zeros(fan_out, fan_in),
            bias_sq: vec![0.0; fan_out],
        });
    }
    Ok(NetworkModel {
        fingerprint: config.fingerprint(),
        config: config.clone(),
        layers,
        state,
        label_scale: None,
    })
}

/// Something that maps standardized determinant rows to target predictions.
pub trait Regressor {
    fn input_size(&self) -> usize;
    fn output_size(&self) -> usize;
    /// Predictions in label units, one row per input row.
    fn predict(&self, inputs: &Matrix) -> Result<Matrix, AnnError>;
}

impl NetworkModel {
    /// Network from explicit layers, mainly for hand-built examples.
    pub fn from_layers(config: NetworkConfig, layers: Vec<Layer>) -> Result<Self, AnnError> {
        config.validate()?;
        let widths = config.widths();
        if layers.len() + 1 != widths.len() {
            return Err(AnnError::ShapeMismatch(alloc::format!(
                "{} layers for {} widths",
                layers.len(),
                widths.len()
            )));
        }
        for (l, w) in layers.iter().zip(widths.windows(2)) {
            if l.weights.shape() != (w[1], w[0]) || l.bias.len() != w[1] {
                return Err(AnnError::ShapeMismatch(alloc::format!(
                    "layer {}x{} does not match widths {} -> {}",
                    l.weights.rows(),
                    l.weights.cols(),
                    w[0],
                    w[1]
                )));
            }
        }
        let state = layers
            .iter()
            .map(|l| LayerState {
                weights_sq: Matrix::zeros(l.outputs(), l.inputs()),
                bias_sq: vec![0.0; l.outputs()],
            })
            .collect();
        Ok(NetworkModel {
            fingerprint: config.fingerprint(),
            config,
            layers,
            state,
            label_scale: None,
        })
    }

    /// Raw network output `W_L(...ReLU(W_1 x + b_1)...) + b_L`, in the space the
    /// network was trained in.
    pub fn forward(&self, inputs: &Matrix) -> Result<Matrix, AnnError> {
        let mut acts = self.forward_all(inputs)?;
        Ok(acts.pop().expect("at least one layer"))
    }

    /// Activations of every layer including the input, each with ReLU applied
    /// where the layer is hidden.
    pub(crate) fn forward_all(&self, inputs: &Matrix) -> Result<Vec<Matrix>, AnnError> {
        if inputs.cols() != self.config.input_size {
            return Err(AnnError::WidthMismatch {
                expected: self.config.input_size,
                found: inputs.cols(),
            });
        }
        let last = self.layers.len() - 1;
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(inputs.clone());
        for (k, layer) in self.layers.iter().enumerate() {
            let a = acts.last().expect("non-empty");
            let mut z = affine(layer, a);
            let relu = k < last || self.config.output_activation == OutputActivation::Relu;
            if relu {
                z.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
            }
            acts.push(z);
        }
        Ok(acts)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    pub(crate) fn scale_labels(&self, labels: &Matrix) -> Matrix {
        match &self.label_scale {
            None => labels.clone(),
            Some(scales) => {
                let mut out = labels.clone();
                for r in 0..out.rows() {
                    for (c, s) in scales.iter().enumerate() {
                        out[(r, c)] = (out[(r, c)] - s.mean) / s.std;
                    }
                }
                out
            }
        }
    }
}

impl Regressor for NetworkModel {
    fn input_size(&self) -> usize {
        self.config.input_size
    }

    fn output_size(&self) -> usize {
        self.config.output_size
    }

    fn predict(&self, inputs: &Matrix) -> Result<Matrix, AnnError> {
        let mut out = self.forward(inputs)?;
        if let Some(scales) = &self.label_scale {
            for r in 0..out.rows() {
                for (c, s) in scales.iter().enumerate() {
                    out[(r, c)] = s.mean + s.std * out[(r, c)];
                }
            }
        }
        Ok(out)
    }
}

fn affine(layer: &Layer, a: &Matrix) -> Matrix {
    let mut z = Matrix::zeros(a.rows(), layer.outputs());
    for r in 0..a.rows() {
        let x = a.row(r);
        let out = z.row_mut(r);
        for (o, slot) in out.iter_mut().enumerate() {
            let w = layer.weights.row(o);
            *slot = layer.bias[o] + w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>();
        }
    }
    z
}
