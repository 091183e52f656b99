//! Skin conductance responses by the trough-to-peak method.
//!
//! 1. The series is low-passed at 1 Hz (zero phase).
//! 2. Turning points of the smoothed series are found; steps smaller than
//!    [`FLAT_EPSILON`] do not change direction. Each trough followed by a
//!    peak whose smoothed rise reaches [`CANDIDATE_FRACTION`] of
//!    `min_amplitude` is a candidate; the low-pass flattens short ramps, so
//!    the smoothed rise understates the raw one.
//! 3. Onset and peak are refined on the raw samples. The peak is the
//!    earliest raw maximum between the trough and the next trough. The onset
//!    is the latest sample within [`ONSET_NOISE_TOLERANCE`] noise sigmas
//!    (robust sigma of raw minus smoothed) of the raw minimum between the
//!    previous peak and the refined peak, looking back at most
//!    [`ONSET_LOOKBACK_S`] before the trough.
//! 4. The raw rise must also reach `min_amplitude`.

use serde::{Deserialize, Serialize};

use super::filter::{filtfilt, Biquad};
use super::PhysioError;

pub const DEFAULT_MIN_AMPLITUDE_US: f64 = 0.01;
pub const MIN_RATE_HZ: f64 = 16.0;
pub const LOWPASS_HZ: f64 = 1.0;
pub const FLAT_EPSILON: f64 = 1e-9;
pub const ONSET_LOOKBACK_S: f64 = 0.5;
/// Share of `min_amplitude` a smoothed rise needs to be refined at all.
pub const CANDIDATE_FRACTION: f64 = 0.5;
/// Onset refinement tolerance in units of the estimated noise sigma.
pub const ONSET_NOISE_TOLERANCE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScrEvent {
    pub onset: f64,
    pub peak: f64,
    pub amplitude: f64,
    pub rise_time: f64,
    #[serde(skip)]
    pub onset_index: usize,
    #[serde(skip)]
    pub peak_index: usize,
}

/// Samples needed before the filter is trusted: one second.
pub fn warmup_samples(rate: f64) -> usize {
    rate.ceil() as usize
}

pub fn smooth(x: &[f64], rate: f64) -> Vec<f64> {
    filtfilt(&[Biquad::lowpass(LOWPASS_HZ, rate)], x, warmup_samples(rate))
}

/// Alternating turning points `(index, is_peak)` of `f`, interior only.
pub fn turning_points(f: &[f64]) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    // direction of the last non-flat step: +1 rising, -1 falling
    let mut dir = 0i8;
    let mut candidate = 0usize;
    for i in 1..f.len() {
        let d = f[i] - f[i - 1];
        let step = if d > FLAT_EPSILON {
            1
        } else if d < -FLAT_EPSILON {
            -1
        } else {
            0
        };
        if step == 0 {
            continue;
        }
        if dir != 0 && step != dir {
            out.push((candidate, dir > 0));
        }
        if step != dir || (step > 0 && f[i] > f[candidate]) || (step < 0 && f[i] < f[candidate]) {
            candidate = i;
        }
        dir = step;
    }
    out
}

fn earliest_argmax(x: &[f64], lo: usize, hi: usize) -> usize {
    (lo..=hi).fold(lo, |best, i| if x[i] > x[best] { i } else { best })
}

/// Latest index in `lo..=hi` within `tol` of the minimum there.
fn latest_near_min(x: &[f64], lo: usize, hi: usize, tol: f64) -> usize {
    let m = x[lo..=hi].iter().fold(f64::INFINITY, |a, &b| a.min(b));
    (lo..=hi).rev().find(|&i| x[i] <= m + tol).unwrap_or(hi)
}

/// `1.4826 * median |x - f|`, a noise estimate that ignores the responses.
pub fn noise_sigma(x: &[f64], f: &[f64]) -> f64 {
    let mut r: Vec<f64> = x.iter().zip(f).map(|(a, b)| (a - b).abs()).collect();
    let mid = r.len() / 2;
    let (_, m, _) = r.select_nth_unstable_by(mid, f64::total_cmp);
    1.4826 * *m
}

/// Detects SCRs in a microsiemens series sampled at `rate` Hz. Times are
/// seconds from the first sample.
pub fn detect_scrs(x: &[f64], rate: f64, min_amplitude: f64) -> Result<Vec<ScrEvent>, PhysioError> {
    if !(rate >= MIN_RATE_HZ) || !rate.is_finite() {
        return Err(PhysioError::RateTooLow { rate, min: MIN_RATE_HZ });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(PhysioError::NonFinite);
    }
    if x.len() < warmup_samples(rate) {
        return Err(PhysioError::TooShort {
            needed: warmup_samples(rate),
            got: x.len(),
        });
    }
    let f = smooth(x, rate);
    let tp = turning_points(&f);
    let lookback = (ONSET_LOOKBACK_S * rate).round() as usize;
    let tol = ONSET_NOISE_TOLERANCE * noise_sigma(x, &f);
    let mut out = Vec::new();
    for (k, &(trough, is_peak)) in tp.iter().enumerate() {
        if is_peak {
            continue;
        }
        let Some(&(smooth_peak, true)) = tp.get(k + 1) else {
            continue;
        };
        if f[smooth_peak] - f[trough] < CANDIDATE_FRACTION * min_amplitude {
            continue;
        }
        let next_trough = tp.get(k + 2).map_or(x.len() - 1, |t| t.0);
        let prev_peak = k.checked_sub(1).map_or(0, |j| tp[j].0);
        let peak = earliest_argmax(x, trough, next_trough);
        let onset = latest_near_min(x, prev_peak.max(trough.saturating_sub(lookback)), peak, tol);
        let amplitude = x[peak] - x[onset];
        if peak <= onset || amplitude < min_amplitude {
            continue;
        }
        out.push(ScrEvent {
            onset: onset as f64 / rate,
            peak: peak as f64 / rate,
            amplitude,
            rise_time: (peak - onset) as f64 / rate,
            onset_index: onset,
            peak_index: peak,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const RATE: f64 = 128.0;

    /// Baseline 2.0 µS, linear rise of `amp` over `rise` s from `onset`,
    /// then exponential decay with time constant 3 s.
    fn ramp(n: usize, onset: f64, amp: f64, rise: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64 / RATE;
                let dt = t - onset;
                2.0 + if dt <= 0.0 {
                    0.0
                } else if dt < rise {
                    amp * dt / rise
                } else {
                    amp * (-(dt - rise) / 3.0).exp()
                }
            })
            .collect()
    }

    #[test]
    fn flat_series_has_no_responses() {
        assert!(detect_scrs(&vec![2.0; 1280], RATE, 0.01).unwrap().is_empty());
    }

    #[test]
    fn single_ramp() {
        let x = ramp(1280, 3.0, 0.5, 1.5);
        let e = detect_scrs(&x, RATE, 0.01).unwrap();
        assert_eq!(e.len(), 1);
        assert!((e[0].amplitude - 0.5).abs() < 0.01, "{e:?}");
        assert!((e[0].rise_time - 1.5).abs() <= 1.0 / RATE + 1e-12, "{e:?}");
        assert!((e[0].onset - 3.0).abs() <= 1.0 / RATE + 1e-12);
    }

    #[test]
    fn small_responses_are_ignored() {
        let x = ramp(1280, 3.0, 0.005, 1.5);
        assert!(detect_scrs(&x, RATE, 0.01).unwrap().is_empty());
    }

    #[test]
    fn input_validation() {
        assert!(matches!(detect_scrs(&[2.0; 100], 8.0, 0.01), Err(PhysioError::RateTooLow { .. })));
        assert!(matches!(detect_scrs(&[2.0; 100], RATE, 0.01), Err(PhysioError::TooShort { .. })));
        let mut x = vec![2.0; 200];
        x[5] = f64::NAN;
        assert!(matches!(detect_scrs(&x, RATE, 0.01), Err(PhysioError::NonFinite)));
    }

    #[test]
    fn turning_points_alternate_and_skip_plateaus() {
        let f = [0.0, 1.0, 1.0, 2.0, 2.0, 1.0, 1.0, 0.0, 3.0];
        assert_eq!(turning_points(&f), [(3, true), (7, false)]);
    }

    fn noisy() -> impl Strategy<Value = Vec<f64>> {
        (prop::collection::vec(-0.01f64..0.01, 600), 0.05f64..0.6, 1.0f64..3.5).prop_map(|(noise, amp, at)| {
            let base = ramp(600, at, amp, 1.0);
            base.iter().zip(&noise).map(|(b, n)| b + n).collect()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn level_invariance(x in noisy(), c in -1.5f64..5.0) {
            let a = detect_scrs(&x, RATE, 0.01).unwrap();
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let b = detect_scrs(&shifted, RATE, 0.01).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(&b) {
                prop_assert_eq!((p.onset_index, p.peak_index), (q.onset_index, q.peak_index));
                prop_assert!((p.amplitude - q.amplitude).abs() < 1e-9);
            }
        }

        #[test]
        fn scale_covariance(x in noisy(), k in 0.2f64..5.0) {
            let a = detect_scrs(&x, RATE, 0.01).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| v * k).collect();
            let b = detect_scrs(&scaled, RATE, 0.01 * k).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (p, q) in a.iter().zip(&b) {
                prop_assert_eq!((p.onset, p.peak), (q.onset, q.peak));
                prop_assert!((p.amplitude * k - q.amplitude).abs() < 1e-9 * k.max(1.0));
            }
        }
    }
}
