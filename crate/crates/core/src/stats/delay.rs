use crate::error::{Error, Result};

/// Power-weighted RMS delay spread of `(power, delay)` pairs, seconds.
///
/// Uses centered second moments, so a common delay offset does not cost
/// precision.
pub fn rms_delay_spread(paths: &[(f64, f64)]) -> Result<f64> {
    if paths.is_empty() {
        return Err(Error::Empty("path list"));
    }
    let total: f64 = paths.iter().map(|(p, _)| p).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroPower);
    }
    let mean = paths.iter().map(|(p, t)| p * t).sum::<f64>() / total;
    let var = paths.iter().map(|(p, t)| p * (t - mean).powi(2)).sum::<f64>() / total;
    Ok(var.max(0.0).sqrt())
}
