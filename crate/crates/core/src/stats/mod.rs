//! Correlation, dispersion and distribution statistics over ensembles.

pub mod cdf;
pub mod correlation;
pub mod delay;
pub mod fit;

pub use cdf::{empirical_cdf, CdfCurve};
pub use correlation::{
    acf, ccf, fcf, stfcf, stfcf_parts, CorrelationCurve, CorrelationEstimate, CorrelationSamples, Estimator, Lag,
    Normalization, PathFilter, StatQuery, StfcfParts,
};
pub use delay::rms_delay_spread;
pub use fit::{cdf_distance, mmse_fit, FitConfig, FitParam, FitResult};
