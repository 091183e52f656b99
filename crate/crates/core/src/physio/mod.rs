//! Signal-processing kernels for the cognitive-load indicators and their
//! per-symbol aggregation.

mod filter;
mod heart;
pub mod scr;
mod spectral;
mod table;

pub use filter::{filtfilt, Biquad};
pub use heart::{detect_beats, heart_rate, ibi_stats, HeartRate, MAX_RELIABLE_CV};
pub use scr::{detect_scrs, ScrEvent, DEFAULT_MIN_AMPLITUDE_US};
pub use spectral::{band_power, welch, Band, BandPower, Psd, WelchParams};
pub use table::{
    build_metric_table, MetricContext, MetricExtractor, MetricParams, MetricRow, MetricTable, SymbolGroup,
    ExtractorRegistry, METRIC_NAMES,
};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum PhysioError {
    #[error("sample rate {rate} Hz is below the required {min} Hz")]
    RateTooLow { rate: f64, min: f64 },
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("series too short: need {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("band upper edge {high} Hz exceeds Nyquist {nyquist} Hz")]
    AboveNyquist { high: f64, nyquist: f64 },
    #[error("only {0} beats detected")]
    TooFewBeats(usize),
    #[error("empty series")]
    EmptySeries,
    #[error("baseline mean must be positive")]
    NonPositiveBaseline,
    #[error("unknown metric extractor {0:?}")]
    UnknownExtractor(String),
    #[error("metric table: {0}")]
    Table(String),
}

/// `100 (mean(series) - mean(baseline)) / mean(baseline)`.
pub fn pupil_dilation_pct(series: &[f64], baseline: &[f64]) -> Result<f64, PhysioError> {
    if series.is_empty() || baseline.is_empty() {
        return Err(PhysioError::EmptySeries);
    }
    if series.iter().chain(baseline).any(|v| !v.is_finite()) {
        return Err(PhysioError::NonFinite);
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let b = mean(baseline);
    if b <= 0.0 {
        return Err(PhysioError::NonPositiveBaseline);
    }
    Ok(100.0 * (mean(series) - b) / b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dilation_examples() {
        let s = [3.1, 2.9, 3.0];
        assert_eq!(pupil_dilation_pct(&s, &s).unwrap(), 0.0);
        let pct = pupil_dilation_pct(&[3.3, 3.3], &[3.0, 2.9, 3.1]).unwrap();
        assert!((pct - 10.0).abs() < 1e-9);
        assert_eq!(pupil_dilation_pct(&[], &s), Err(PhysioError::EmptySeries));
        assert_eq!(pupil_dilation_pct(&s, &[0.0, -1.0]), Err(PhysioError::NonPositiveBaseline));
    }

    proptest! {
        #[test]
        fn dilation_of_self_is_zero(s in prop::collection::vec(0.5f64..9.0, 1..200)) {
            prop_assert!(pupil_dilation_pct(&s, &s).unwrap().abs() < 1e-9);
        }

        #[test]
        fn dilation_matches_formula(
            s in prop::collection::vec(0.5f64..9.0, 1..50),
            b in prop::collection::vec(0.5f64..9.0, 1..50),
        ) {
            let ms: f64 = s.iter().sum::<f64>() / s.len() as f64;
            let mb: f64 = b.iter().sum::<f64>() / b.len() as f64;
            let expect = (ms / mb - 1.0) * 100.0;
            prop_assert!((pupil_dilation_pct(&s, &b).unwrap() - expect).abs() < 1e-9);
        }
    }
}
