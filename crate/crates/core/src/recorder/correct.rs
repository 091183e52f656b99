use crate::stream::ClockOffsetEstimate;

use super::RecorderError;

/// Offset to add at sender time `t`: linear between neighbouring estimates,
/// held constant outside the measured range. `history` must be non-empty and
/// sorted by `measured_at`.
pub fn offset_at(history: &[ClockOffsetEstimate], t: f64) -> f64 {
    let first = &history[0];
    let last = &history[history.len() - 1];
    if t <= first.measured_at {
        return first.offset;
    }
    if t >= last.measured_at {
        return last.offset;
    }
    let i = history.partition_point(|e| e.measured_at <= t);
    let (a, b) = (&history[i - 1], &history[i]);
    let span = b.measured_at - a.measured_at;
    if span <= 0.0 {
        return b.offset;
    }
    let u = (t - a.measured_at) / span;
    a.offset + u * (b.offset - a.offset)
}

/// Maps sender timestamps onto the receiver clock.
///
/// Estimates are looked up by the sample's own timestamp. The lookup key and
/// `measured_at` live on different clocks; the resulting error is the offset
/// slope times the clock gap, i.e. microseconds for realistic drift.
pub fn correct_timestamps(
    timestamps: &[f64],
    history: &[ClockOffsetEstimate],
) -> Result<Vec<f64>, RecorderError> {
    if history.is_empty() {
        return Err(RecorderError::EmptyOffsetHistory);
    }
    if history.windows(2).any(|w| w[0].measured_at > w[1].measured_at) {
        return Err(RecorderError::UnsortedOffsetHistory);
    }
    Ok(timestamps.iter().map(|&t| t + offset_at(history, t)).collect())
}
