//! Heart rate from a photoplethysmogram.

use serde::{Deserialize, Serialize};

use super::filter::{filtfilt, Biquad};
use super::PhysioError;

pub const MIN_SECONDS: f64 = 10.0;
/// Inter-beat interval variation above which a rate is flagged unreliable.
pub const MAX_RELIABLE_CV: f64 = 0.2;
/// Beats closer than this are merged (200 bpm ceiling).
pub const REFRACTORY_S: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeartRate {
    pub bpm: f64,
    pub ibis: Vec<f64>,
    /// Coefficient of variation of the inter-beat intervals.
    pub ibi_cv: f64,
    pub reliable: bool,
}

/// Beat indices: local maxima of the 0.5-4 Hz band-passed signal above
/// `mean + 0.5 sd`, thinned to one per refractory period (tallest wins).
pub fn detect_beats(x: &[f64], rate: f64) -> Vec<usize> {
    let f = filtfilt(
        &[Biquad::highpass(0.5, rate), Biquad::lowpass(4.0, rate)],
        x,
        rate.ceil() as usize,
    );
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let sd = (f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let threshold = mean + 0.5 * sd;
    let mut candidates: Vec<usize> = (1..f.len().saturating_sub(1))
        .filter(|&i| f[i] > threshold && f[i] > f[i - 1] && f[i] >= f[i + 1])
        .collect();
    candidates.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
    let gap = (REFRACTORY_S * rate).round() as usize;
    let mut kept: Vec<usize> = Vec::new();
    for c in candidates {
        if kept.iter().all(|&k| k.abs_diff(c) >= gap) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

pub fn ibi_stats(ibis: &[f64]) -> (f64, f64) {
    let n = ibis.len() as f64;
    let mean = ibis.iter().sum::<f64>() / n;
    let sd = (ibis.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    (mean, sd / mean)
}

pub fn heart_rate(x: &[f64], rate: f64) -> Result<HeartRate, PhysioError> {
    if !(rate >= 8.0) || !rate.is_finite() {
        return Err(PhysioError::RateTooLow { rate, min: 8.0 });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(PhysioError::NonFinite);
    }
    let needed = (MIN_SECONDS * rate).ceil() as usize;
    if x.len() < needed {
        return Err(PhysioError::TooShort { needed, got: x.len() });
    }
    let beats = detect_beats(x, rate);
    if beats.len() < 2 {
        return Err(PhysioError::TooFewBeats(beats.len()));
    }
    let ibis: Vec<f64> = beats.windows(2).map(|w| (w[1] - w[0]) as f64 / rate).collect();
    let (mean, cv) = ibi_stats(&ibis);
    Ok(HeartRate {
        bpm: 60.0 / mean,
        ibis,
        ibi_cv: cv,
        reliable: cv <= MAX_RELIABLE_CV,
    })
}
