//! Welch power spectral density and band power.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::PhysioError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub name: String,
    pub low: f64,
    pub high: f64,
}

impl Band {
    pub fn new(name: &str, low: f64, high: f64) -> Self {
        Band {
            name: name.to_string(),
            low,
            high,
        }
    }

    pub fn alpha() -> Self {
        Self::new("alpha", 7.0, 13.0)
    }

    pub fn theta() -> Self {
        Self::new("theta", 4.0, 7.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPower {
    pub band: Band,
    /// µV² when the input is in µV.
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WelchParams {
    pub segment_s: f64,
    /// Fraction of a segment shared with the next one.
    pub overlap: f64,
}

impl Default for WelchParams {
    fn default() -> Self {
        WelchParams {
            segment_s: 2.0,
            overlap: 0.5,
        }
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    pub resolution_hz: f64,
    pub density: Vec<f64>,
}

impl Psd {
    pub fn frequency(&self, k: usize) -> f64 {
        k as f64 * self.resolution_hz
    }

    /// Trapezoidal integral over the bins whose frequency lies in `[low, high]`.
    pub fn integrate(&self, low: f64, high: f64) -> f64 {
        let eps = 1e-9 * self.resolution_hz;
        let bins: Vec<usize> = (0..self.density.len())
            .filter(|&k| self.frequency(k) >= low - eps && self.frequency(k) <= high + eps)
            .collect();
        bins.windows(2)
            .map(|w| (self.density[w[0]] + self.density[w[1]]) / 2.0 * self.resolution_hz)
            .sum()
    }
}

fn hann(n: usize) -> Vec<f64> {
    // periodic form, as is usual for spectral estimation
    (0..n).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos()).collect()
}

/// Welch estimate: Hann-tapered, mean-removed segments averaged as a
/// density-scaled one-sided periodogram.
pub fn welch(x: &[f64], rate: f64, params: &WelchParams) -> Result<Psd, PhysioError> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(PhysioError::RateTooLow { rate, min: 0.0 });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(PhysioError::NonFinite);
    }
    let nseg = (params.segment_s * rate).round() as usize;
    if nseg < 2 || !(0.0..1.0).contains(&params.overlap) {
        return Err(PhysioError::InvalidParams("segment too short or overlap outside [0, 1)".into()));
    }
    if x.len() < nseg {
        return Err(PhysioError::TooShort {
            needed: nseg,
            got: x.len(),
        });
    }
    let step = ((nseg as f64) * (1.0 - params.overlap)).round().max(1.0) as usize;
    let window = hann(nseg);
    let scale = 1.0 / (rate * window.iter().map(|w| w * w).sum::<f64>());
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nseg);
    let bins = nseg / 2 + 1;
    let mut density = vec![0.0; bins];
    let mut segments = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); nseg];
    let mut start = 0;
    while start + nseg <= x.len() {
        let seg = &x[start..start + nseg];
        let mean = seg.iter().sum::<f64>() / nseg as f64;
        for (b, (v, w)) in buf.iter_mut().zip(seg.iter().zip(&window)) {
            *b = Complex::new((v - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, d) in density.iter_mut().enumerate() {
            let one_sided = if k == 0 || (nseg % 2 == 0 && k == nseg / 2) { 1.0 } else { 2.0 };
            *d += one_sided * buf[k].norm_sqr() * scale;
        }
        segments += 1;
        start += step;
    }
    for d in &mut density {
        *d /= segments as f64;
    }
    Ok(Psd {
        resolution_hz: rate / nseg as f64,
        density,
    })
}

pub fn band_power(x: &[f64], rate: f64, band: &Band, params: &WelchParams) -> Result<BandPower, PhysioError> {
    if !(band.low >= 0.0 && band.low < band.high) {
        return Err(PhysioError::InvalidParams(format!("band {} has low >= high", band.name)));
    }
    if band.high > rate / 2.0 {
        return Err(PhysioError::AboveNyquist {
            high: band.high,
            nyquist: rate / 2.0,
        });
    }
    let psd = welch(x, rate, params)?;
    Ok(BandPower {
        band: band.clone(),
        power: psd.integrate(band.low, band.high),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn sine(f: f64, rate: f64, secs: f64) -> Vec<f64> {
        let n = (rate * secs) as usize;
        (0..n).map(|i| (2.0 * PI * f * i as f64 / rate).sin()).collect()
    }

    #[test]
    fn ten_hz_tone_lands_in_alpha() {
        let x = sine(10.0, 128.0, 8.0);
        let p = WelchParams::default();
        let a = band_power(&x, 128.0, &Band::alpha(), &p).unwrap().power;
        let t = band_power(&x, 128.0, &Band::theta(), &p).unwrap().power;
        assert!(a / t.max(1e-300) > 100.0);
        // a unit sine carries 1/2 in mean power
        assert!((a - 0.5).abs() < 0.01, "{a}");
    }

    #[test]
    fn zero_signal_has_zero_power() {
        let p = band_power(&vec![0.0; 512], 128.0, &Band::alpha(), &WelchParams::default()).unwrap();
        assert_eq!(p.power, 0.0);
    }

    #[test]
    fn bands_within_total() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x: Vec<f64> = (0..2048).map(|_| StandardNormal.sample(&mut rng)).collect();
        let p = WelchParams::default();
        let a = band_power(&x, 128.0, &Band::alpha(), &p).unwrap().power;
        let t = band_power(&x, 128.0, &Band::theta(), &p).unwrap().power;
        let total = band_power(&x, 128.0, &Band::new("all", 0.0, 64.0), &p).unwrap().power;
        assert!(a > 0.0 && t > 0.0);
        assert!(a + t <= total);
    }

    #[test]
    fn rejects_bad_requests() {
        let x = sine(10.0, 128.0, 8.0);
        let p = WelchParams::default();
        assert!(matches!(
            band_power(&x, 128.0, &Band::new("hi", 50.0, 70.0), &p),
            Err(PhysioError::AboveNyquist { .. })
        ));
        assert!(matches!(
            band_power(&x[..200], 128.0, &Band::alpha(), &p),
            Err(PhysioError::TooShort { .. })
        ));
        assert!(band_power(&x, 128.0, &Band::new("bad", 9.0, 8.0), &p).is_err());
    }
}
