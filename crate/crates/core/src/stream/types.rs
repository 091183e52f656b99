use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::StreamError;

/// Kind of signal carried by a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Gaze,
    Eeg,
    Eda,
    Ppg,
    Temperature,
    Marker,
}

impl Modality {
    pub const ALL: [Modality; 6] = [
        Modality::Gaze,
        Modality::Eeg,
        Modality::Eda,
        Modality::Ppg,
        Modality::Temperature,
        Modality::Marker,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Modality::Gaze => "gaze",
            Modality::Eeg => "eeg",
            Modality::Eda => "eda",
            Modality::Ppg => "ppg",
            Modality::Temperature => "temperature",
            Modality::Marker => "marker",
        }
    }

    /// Irregular streams have no nominal rate and are exempt from cadence checks.
    pub fn is_irregular(self) -> bool {
        self == Modality::Marker
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Modality {
    type Err = StreamError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Modality::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| StreamError::UnknownModality(s.to_string()))
    }
}

/// Identity and layout of one sensor stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamInfo {
    pub name: String,
    pub modality: Modality,
    pub channel_count: u16,
    /// Samples per second; 0 for irregular (marker) streams.
    pub nominal_rate: f64,
    pub channel_labels: Vec<String>,
    pub source_id: String,
}

impl StreamInfo {
    pub fn new(
        name: impl Into<String>,
        modality: Modality,
        nominal_rate: f64,
        channel_labels: Vec<String>,
        source_id: impl Into<String>,
    ) -> Result<Self, StreamError> {
        let info = StreamInfo {
            name: name.into(),
            modality,
            channel_count: u16::try_from(channel_labels.len())
                .map_err(|_| StreamError::InvalidInfo("too many channels".into()))?,
            nominal_rate,
            channel_labels,
            source_id: source_id.into(),
        };
        info.validate()?;
        Ok(info)
    }

    pub fn validate(&self) -> Result<(), StreamError> {
        if self.channel_count == 0 {
            return Err(StreamError::InvalidInfo(format!(
                "stream {} has no channels",
                self.source_id
            )));
        }
        if usize::from(self.channel_count) != self.channel_labels.len() {
            return Err(StreamError::InvalidInfo(format!(
                "stream {} declares {} channels but has {} labels",
                self.source_id,
                self.channel_count,
                self.channel_labels.len()
            )));
        }
        if !self.nominal_rate.is_finite() || self.nominal_rate < 0.0 {
            return Err(StreamError::InvalidInfo(format!(
                "stream {} has invalid nominal rate {}",
                self.source_id, self.nominal_rate
            )));
        }
        if self.source_id.is_empty() {
            return Err(StreamError::InvalidInfo("empty source_id".into()));
        }
        Ok(())
    }
}

/// One multichannel reading stamped on the sender's monotonic clock.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub timestamp: f64,
    pub values: Vec<f32>,
}

impl Sample {
    pub fn new(timestamp: f64, values: Vec<f32>) -> Self {
        Sample { timestamp, values }
    }
}

/// A non-empty run of samples from a single stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub stream_id: String,
    pub samples: Vec<Sample>,
}

impl Chunk {
    pub fn new(stream_id: impl Into<String>, samples: Vec<Sample>) -> Result<Self, StreamError> {
        let chunk = Chunk {
            stream_id: stream_id.into(),
            samples,
        };
        chunk.validate()?;
        Ok(chunk)
    }

    pub fn channel_count(&self) -> usize {
        self.samples.first().map_or(0, |s| s.values.len())
    }

    pub fn validate(&self) -> Result<(), StreamError> {
        let first = self.samples.first().ok_or(StreamError::EmptyChunk)?;
        let channels = first.values.len();
        if channels == 0 || channels > usize::from(u16::MAX) {
            return Err(StreamError::ChannelMismatch {
                expected: channels,
                found: channels,
            });
        }
        for s in &self.samples {
            if s.values.len() != channels {
                return Err(StreamError::ChannelMismatch {
                    expected: channels,
                    found: s.values.len(),
                });
            }
        }
        Ok(())
    }
}
