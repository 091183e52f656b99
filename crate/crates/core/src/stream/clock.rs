//! Four-timestamp clock offset estimation and the UDP probe exchange.
//!
//! A probe records `t0` (receiver send), `t1` (sender receive), `t2` (sender
//! reply) and `t3` (receiver receive). The offset is what must be added to a
//! sender timestamp to land on the receiver clock.

use std::net::{SocketAddr, UdpSocket};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::StreamError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockProbe {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

impl ClockProbe {
    pub fn new(t0: f64, t1: f64, t2: f64, t3: f64) -> Self {
        ClockProbe { t0, t1, t2, t3 }
    }

    /// How far the sender clock runs ahead of the receiver clock,
    /// `((t1 - t0) + (t2 - t3)) / 2`.
    pub fn sender_offset(&self) -> f64 {
        ((self.t1 - self.t0) + (self.t2 - self.t3)) / 2.0
    }

    /// Correction to add to a sender timestamp to land on the receiver clock.
    pub fn offset(&self) -> f64 {
        -self.sender_offset()
    }

    pub fn round_trip(&self) -> f64 {
        (self.t3 - self.t0) - (self.t2 - self.t1)
    }

    fn is_valid(&self) -> bool {
        [self.t0, self.t1, self.t2, self.t3].iter().all(|t| t.is_finite())
            && self.t0 <= self.t3
            && self.t1 <= self.t2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockOffsetEstimate {
    /// Seconds to add to the sender clock to get the receiver clock.
    pub offset: f64,
    pub round_trip: f64,
    /// Receiver time at which the estimate was taken.
    pub measured_at: f64,
}

/// Picks the probe with the smallest round trip and reports its offset.
pub fn estimate_clock_offset(probes: &[ClockProbe]) -> Result<ClockOffsetEstimate, StreamError> {
    let mut best: Option<&ClockProbe> = None;
    for p in probes {
        if !p.is_valid() {
            return Err(StreamError::InvalidProbe);
        }
        if best.is_none_or(|b| p.round_trip() < b.round_trip()) {
            best = Some(p);
        }
    }
    let p = best.ok_or(StreamError::NoProbes)?;
    Ok(ClockOffsetEstimate {
        offset: p.offset(),
        round_trip: p.round_trip().max(0.0),
        measured_at: (p.t0 + p.t3) / 2.0,
    })
}

pub const PROBE_MAGIC: [u8; 4] = *b"CGTP";
const PROBE_REQUEST: u8 = 0;
const PROBE_REPLY: u8 = 1;

/// Request: magic, kind 0, f64 `t0`. 13 bytes.
pub fn encode_probe_request(t0: f64) -> [u8; 13] {
    let mut b = [0u8; 13];
    b[..4].copy_from_slice(&PROBE_MAGIC);
    b[4] = PROBE_REQUEST;
    b[5..13].copy_from_slice(&t0.to_le_bytes());
    b
}

/// Reply: magic, kind 1, f64 `t0`, f64 `t1`, f64 `t2`. 29 bytes.
pub fn encode_probe_reply(t0: f64, t1: f64, t2: f64) -> [u8; 29] {
    let mut b = [0u8; 29];
    b[..4].copy_from_slice(&PROBE_MAGIC);
    b[4] = PROBE_REPLY;
    b[5..13].copy_from_slice(&t0.to_le_bytes());
    b[13..21].copy_from_slice(&t1.to_le_bytes());
    b[21..29].copy_from_slice(&t2.to_le_bytes());
    b
}

pub fn decode_probe_request(b: &[u8]) -> Option<f64> {
    if b.len() != 13 || b[..4] != PROBE_MAGIC || b[4] != PROBE_REQUEST {
        return None;
    }
    Some(f64::from_le_bytes(b[5..13].try_into().ok()?))
}

pub fn decode_probe_reply(b: &[u8]) -> Option<(f64, f64, f64)> {
    if b.len() != 29 || b[..4] != PROBE_MAGIC || b[4] != PROBE_REPLY {
        return None;
    }
    let f = |r: std::ops::Range<usize>| f64::from_le_bytes(b[r].try_into().unwrap());
    Some((f(5..13), f(13..21), f(21..29)))
}

/// A monotonic clock in seconds, optionally shifted and skewed. Simulated
/// devices use the shift to stand in for an unsynchronized hardware clock.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    origin: Instant,
    offset_s: f64,
    rate: f64,
}

impl MonotonicClock {
    pub fn new() -> Self {
        Self::shifted(0.0, 0.0)
    }

    pub fn shifted(offset_s: f64, drift_ppm: f64) -> Self {
        MonotonicClock {
            origin: Instant::now(),
            offset_s,
            rate: 1.0 + drift_ppm * 1e-6,
        }
    }

    pub fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64() * self.rate + self.offset_s
    }
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self::new()
    }
}

/// Sends a burst of probes to a simulator's probe port and returns the
/// min-RTT estimate. Lost or malformed replies are skipped.
pub fn probe_burst(
    target: SocketAddr,
    clock: &MonotonicClock,
    count: usize,
    reply_timeout: Duration,
) -> Result<ClockOffsetEstimate, StreamError> {
    let socket = UdpSocket::bind(("0.0.0.0", 0)).map_err(StreamError::Io)?;
    socket
        .set_read_timeout(Some(reply_timeout))
        .map_err(StreamError::Io)?;
    let mut probes = Vec::with_capacity(count);
    let mut buf = [0u8; 64];
    for _ in 0..count {
        let t0 = clock.now();
        if socket.send_to(&encode_probe_request(t0), target).is_err() {
            continue;
        }
        loop {
            match socket.recv_from(&mut buf) {
                Ok((n, _)) => {
                    let t3 = clock.now();
                    if let Some((echo, t1, t2)) = decode_probe_reply(&buf[..n]) {
                        if echo.to_bits() == t0.to_bits() {
                            probes.push(ClockProbe::new(t0, t1, t2, t3));
                            break;
                        }
                    }
                }
                Err(_) => break,
            }
        }
    }
    estimate_clock_offset(&probes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_single_probe() {
        // Sender runs 5 s ahead with a 1 ms one-way delay each way.
        let p = ClockProbe::new(0.0, 5.001, 5.001, 0.002);
        assert_abs_diff_eq!(p.sender_offset(), 5.0, epsilon = 1e-12);
        let e = estimate_clock_offset(&[p]).unwrap();
        assert_abs_diff_eq!(e.offset, -5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.round_trip, 0.002, epsilon = 1e-12);
    }

    #[test]
    fn picks_min_round_trip() {
        let slow = ClockProbe::new(0.0, 1.010, 1.010, 0.030);
        let fast = ClockProbe::new(1.0, 2.001, 2.001, 1.002);
        let e = estimate_clock_offset(&[slow, fast]).unwrap();
        assert_abs_diff_eq!(e.round_trip, 0.002, epsilon = 1e-12);
        assert_abs_diff_eq!(e.offset, fast.offset(), epsilon = 0.0);
    }

    #[test]
    fn empty_and_invalid() {
        assert!(matches!(
            estimate_clock_offset(&[]),
            Err(StreamError::NoProbes)
        ));
        let bad = ClockProbe::new(1.0, 0.0, 0.0, 0.5);
        assert!(matches!(
            estimate_clock_offset(&[bad]),
            Err(StreamError::InvalidProbe)
        ));
    }

    /// Sender clock = receiver clock + `skew`; offset to add is `-skew`.
    fn probe_from_model(t0: f64, skew: f64, d_out: f64, d_back: f64, service: f64) -> ClockProbe {
        let t1 = t0 + d_out + skew;
        let t2 = t1 + service;
        let t3 = t2 - skew + d_back;
        ClockProbe::new(t0, t1, t2, t3)
    }

    #[test]
    fn zero_delay_recovers_offset_exactly() {
        let p = probe_from_model(10.0, 2.5, 0.0, 0.0, 0.0);
        let e = estimate_clock_offset(&[p]).unwrap();
        assert_eq!(e.offset, -2.5);
        assert_eq!(e.round_trip, 0.0);
    }

    #[test]
    fn random_symmetric_jitter_within_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let probes: Vec<_> = (0..100)
            .map(|i| {
                let d = rng.random_range(0.0..0.005);
                probe_from_model(i as f64 * 0.05, -2.5, d, d, 1e-4)
            })
            .collect();
        let e = estimate_clock_offset(&probes).unwrap();
        assert!((e.offset - 2.5).abs() <= 0.0025, "{e:?}");
    }

    #[test]
    fn error_bounded_by_half_rtt_under_asymmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let skew = rng.random_range(-100.0..100.0);
            let d_out = rng.random_range(0.0..0.02);
            let d_back = rng.random_range(0.0..0.02);
            let p = probe_from_model(rng.random_range(0.0..1e4), skew, d_out, d_back, 1e-3);
            let e = estimate_clock_offset(&[p]).unwrap();
            assert!((e.offset + skew).abs() <= e.round_trip / 2.0 + 1e-9);
        }
    }

    #[test]
    fn probe_wire_roundtrip() {
        assert_eq!(decode_probe_request(&encode_probe_request(1.25)), Some(1.25));
        assert_eq!(
            decode_probe_reply(&encode_probe_reply(1.0, 2.0, 3.0)),
            Some((1.0, 2.0, 3.0))
        );
        assert_eq!(decode_probe_request(&encode_probe_reply(1.0, 2.0, 3.0)), None);
    }
}
