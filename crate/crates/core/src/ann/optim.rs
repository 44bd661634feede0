use super::{AnnError, Gradients, NetworkModel};

/// One RMSprop update: `E <- decay E + (1 - decay) g^2`, then
/// `w <- w - lr / sqrt(E + eps) * g`. Parameters with a zero gradient are not moved,
/// which keeps the `eps = 0` form well defined.
pub fn rmsprop_step(model: &mut NetworkModel, grads: &Gradients) -> Result<(), AnnError> {
    if grads.layers.len() != model.layers.len() {
        return Err(AnnError::ShapeMismatch("gradient layer count".into()));
    }
    let decay = model.config.rms_decay;
    let lr = model.config.learning_rate;
    let eps = model.config.epsilon;
    let update = |w: &mut f64, e: &mut f64, g: f64| {
        *e = decay * *e + (1.0 - decay) * g * g;
        if g != 0.0 {
            *w -= lr / libm::sqrt(*e + eps) * g;
        }
    };
    for ((layer, state), grad) in model.layers.iter_mut().zip(model.state.iter_mut()).zip(&grads.layers) {
        if grad.weights.shape() != layer.weights.shape() || grad.bias.len() != layer.bias.len() {
            return Err(AnnError::ShapeMismatch("gradient does not match layer".into()));
        }
        for ((w, e), g) in layer
            .weights
            .as_mut_slice()
            .iter_mut()
            .zip(state.weights_sq.as_mut_slice())
            .zip(grad.weights.as_slice())
        {
            update(w, e, *g);
        }
        for ((w, e), g) in layer.bias.iter_mut().zip(state.bias_sq.iter_mut()).zip(&grad.bias) {
            update(w, e, *g);
        }
    }
    Ok(())
}
