//! Second-order Butterworth sections and zero-phase (forward-backward)
//! filtering with steady-state initial conditions.

use std::f64::consts::{PI, SQRT_2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    /// `a[0]` is normalized to 1 and omitted.
    pub a: [f64; 2],
}

impl Biquad {
    fn butterworth(cutoff_hz: f64, rate_hz: f64, highpass: bool) -> Self {
        let k = (PI * cutoff_hz / rate_hz).tan();
        let norm = 1.0 / (1.0 + SQRT_2 * k + k * k);
        let b = if highpass {
            [norm, -2.0 * norm, norm]
        } else {
            let b0 = k * k * norm;
            [b0, 2.0 * b0, b0]
        };
        Biquad {
            b,
            a: [2.0 * (k * k - 1.0) * norm, (1.0 - SQRT_2 * k + k * k) * norm],
        }
    }

    pub fn lowpass(cutoff_hz: f64, rate_hz: f64) -> Self {
        Self::butterworth(cutoff_hz, rate_hz, false)
    }

    pub fn highpass(cutoff_hz: f64, rate_hz: f64) -> Self {
        Self::butterworth(cutoff_hz, rate_hz, true)
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / (1.0 + self.a[0] + self.a[1])
    }

    /// Transposed direct form II, state chosen so a constant input equal to
    /// `x[0]` passes without a transient.
    pub fn run(&self, x: &[f64]) -> Vec<f64> {
        let Some(&x0) = x.first() else {
            return Vec::new();
        };
        let g = self.dc_gain();
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        let mut z1 = (g - b0) * x0;
        let mut z2 = (b2 - a2 * g) * x0;
        x.iter()
            .map(|&v| {
                let y = b0 * v + z1;
                z1 = b1 * v - a1 * y + z2;
                z2 = b2 * v - a2 * y;
                y
            })
            .collect()
    }
}

/// Zero-phase filtering through `sections` in order. The input is extended
/// at both ends by odd reflection of `pad` samples to tame edge transients.
pub fn filtfilt(sections: &[Biquad], x: &[f64], pad: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let pad = pad.min(n - 1);
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
    for s in sections {
        ext = s.run(&ext);
        ext.reverse();
        ext = s.run(&ext);
        ext.reverse();
    }
    ext[pad..pad + n].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_passes_unchanged() {
        let x = vec![3.25; 500];
        for s in [Biquad::lowpass(1.0, 128.0)] {
            for y in filtfilt(&[s], &x, 128) {
                assert!((y - 3.25).abs() < 1e-9);
            }
        }
        for y in filtfilt(&[Biquad::highpass(0.5, 64.0)], &x, 64) {
            assert!(y.abs() < 1e-9);
        }
    }

    fn gain_at(sections: &[Biquad], f: f64, rate: f64) -> f64 {
        let n = (rate * 40.0) as usize;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * f * i as f64 / rate).sin()).collect();
        let y = filtfilt(sections, &x, n / 4);
        let mid = &y[n / 4..3 * n / 4];
        mid.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    #[test]
    fn lowpass_response() {
        let lp = [Biquad::lowpass(1.0, 128.0)];
        assert!((gain_at(&lp, 0.1, 128.0) - 1.0).abs() < 0.01);
        // forward-backward squares the magnitude: -6 dB at cutoff
        assert!((gain_at(&lp, 1.0, 128.0) - 0.5).abs() < 0.02);
        assert!(gain_at(&lp, 10.0, 128.0) < 0.02);
    }

    #[test]
    fn bandpass_response() {
        let bp = [Biquad::highpass(0.5, 64.0), Biquad::lowpass(4.0, 64.0)];
        assert!(gain_at(&bp, 1.5, 64.0) > 0.8);
        assert!(gain_at(&bp, 0.05, 64.0) < 0.02);
        assert!(gain_at(&bp, 20.0, 64.0) < 0.05);
    }
}
