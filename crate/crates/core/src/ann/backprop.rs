use alloc::vec;
use alloc::vec::Vec;

use super::{smooth_loss, smooth_loss_grad, AnnError, NetworkModel, OutputActivation, TrainingBatch};
use crate::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Gradient of the loss with respect to every parameter, layer by layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

impl Gradients {
    pub fn iter_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers
            .iter()
            .flat_map(|l| l.weights.as_slice().iter().chain(&l.bias).copied())
    }
}

/// Analytic gradient of the smooth-L1 loss of `model` on `batch`. Labels are taken
/// in the network's training space.
pub fn backward(model: &NetworkModel, batch: &TrainingBatch) -> Result<Gradients, AnnError> {
    loss_and_gradients(model, &batch.inputs, &batch.labels).map(|(_, g)| g)
}

/// Loss and gradient in one forward/backward pass. The ReLU subgradient at 0 is 0.
pub fn loss_and_gradients(
    model: &NetworkModel,
    inputs: &Matrix,
    labels: &Matrix,
) -> Result<(f64, Gradients), AnnError> {
    let acts = model.forward_all(inputs)?;
    let out = acts.last().expect("output layer");
    let loss = smooth_loss(out, labels)?;
    let mut delta = smooth_loss_grad(out, labels)?;

    let n_layers = model.layers.len();
    let mut grads: Vec<LayerGradient> = Vec::with_capacity(n_layers);
    for k in (0..n_layers).rev() {
        let layer = &model.layers[k];
        let relu_here = k + 1 < n_layers || model.config.output_activation == OutputActivation::Relu;
        if relu_here {
            // acts[k + 1] is post-ReLU; positive exactly where the pre-activation is
            for (d, a) in delta.as_mut_slice().iter_mut().zip(acts[k + 1].as_slice()) {
                if *a <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        let prev = &acts[k];
        let mut gw = Matrix::zeros(layer.outputs(), layer.inputs());
        let mut gb = vec![0.0; layer.outputs()];
        for r in 0..delta.rows() {
            let d = delta.row(r);
            let x = prev.row(r);
            for (o, &dv) in d.iter().enumerate() {
                if dv == 0.0 {
                    continue;
                }
                gb[o] += dv;
                for (g, xi) in gw.row_mut(o).iter_mut().zip(x) {
                    *g += dv * xi;
                }
            }
        }
        if k > 0 {
            let mut next = Matrix::zeros(delta.rows(), layer.inputs());
            for r in 0..delta.rows() {
                let d = delta.row(r).to_vec();
                let dst = next.row_mut(r);
                for (o, dv) in d.iter().enumerate() {
                    if *dv == 0.0 {
                        continue;
                    }
                    for (t, w) in dst.iter_mut().zip(layer.weights.row(o)) {
                        *t += dv * w;
                    }
                }
            }
            delta = next;
        }
        grads.push(LayerGradient { weights: gw, bias: gb });
    }
    grads.reverse();
    Ok((loss, Gradients { layers: grads }))
}
