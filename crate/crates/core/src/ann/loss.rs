use super::AnnError;
use crate::Matrix;

fn check(pred: &Matrix, labels: &Matrix) -> Result<(), AnnError> {
    if pred.shape() != labels.shape() {
        return Err(AnnError::ShapeMismatch(alloc::format!(
            "predictions {:?} vs labels {:?}",
            pred.shape(),
            labels.shape()
        )));
    }
    if pred.as_slice().is_empty() {
        return Err(AnnError::ShapeMismatch("empty predictions".into()));
    }
    Ok(())
}

/// Smooth-L1 loss averaged over every element: `0.5 r^2` for `|r| < 1`,
/// `|r| - 0.5` otherwise, with `r = prediction - label`.
pub fn smooth_loss(pred: &Matrix, labels: &Matrix) -> Result<f64, AnnError> {
    check(pred, labels)?;
    let n = pred.as_slice().len() as f64;
    let total: f64 = pred
        .as_slice()
        .iter()
        .zip(labels.as_slice())
        .map(|(x, y)| {
            let r = x - y;
            if r.abs() < 1.0 {
                0.5 * r * r
            } else {
                r.abs() - 0.5
            }
        })
        .sum();
    Ok(total / n)
}

/// Derivative of [`smooth_loss`] with respect to each prediction element.
pub fn smooth_loss_grad(pred: &Matrix, labels: &Matrix) -> Result<Matrix, AnnError> {
    check(pred, labels)?;
    let n = pred.as_slice().len() as f64;
    let mut g = pred.clone();
    for (gi, y) in g.as_mut_slice().iter_mut().zip(labels.as_slice()) {
        let r = *gi - y;
        *gi = if r.abs() < 1.0 { r / n } else { r.signum() / n };
    }
    Ok(g)
}
