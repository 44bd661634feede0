use super::AnnError;

/// Mean absolute percentage error, `100/N * sum |actual - predicted| / |actual|`.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64, AnnError> {
    if actual.len() != predicted.len() {
        return Err(AnnError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(AnnError::EmptySeries);
    }
    let mut total = 0.0;
    for (index, (a, p)) in actual.iter().zip(predicted).enumerate() {
        if *a == 0.0 {
            return Err(AnnError::ZeroActual { index });
        }
        total += (a - p).abs() / a.abs();
    }
    Ok(total / actual.len() as f64 * 100.0)
}
