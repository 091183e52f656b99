//! Session directory layout.
//!
//! ```text
//! <dir>/manifest.toml
//! <dir>/streams/<source_id>.bin
//! <dir>/events.csv      receiver_time,kind,label
//! <dir>/responses.csv   step_id,item_id,value
//! ```
//!
//! Stream file, little-endian:
//!
//! | bytes       | field                                   |
//! |-------------|-----------------------------------------|
//! | 4           | magic `CGTS`                            |
//! | 1           | version (1)                             |
//! | 1           | reserved (0)                            |
//! | 2           | channel count `c`                       |
//! | 8           | sample count `n`                        |
//! | 8·n         | timestamps, f64, receiver clock         |
//! | 4·n per ch. | channel columns, f32, in label order    |

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::ops::Range;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::stream::{ClockOffsetEstimate, Modality, StreamInfo};

use super::RecorderError;

pub const MANIFEST_FORMAT: &str = "cognitrace-session/1";
pub const STREAM_MAGIC: [u8; 4] = *b"CGTS";
const STREAM_VERSION: u8 = 1;
const STREAM_HEADER_LEN: u64 = 16;

/// Pseudonymous session identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionMeta {
    pub session_id: String,
    pub participant_id: String,
    /// Wall-clock start, seconds since the Unix epoch.
    pub started_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub format: String,
    #[serde(flatten)]
    pub meta: SessionMeta,
    pub duration_s: f64,
    /// Sum of the stream file sizes.
    pub total_bytes: u64,
    pub streams: Vec<StreamEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamEntry {
    #[serde(flatten)]
    pub info: StreamInfo,
    pub file: String,
    pub sample_count: u64,
    pub bytes: u64,
    #[serde(default)]
    pub offsets: Vec<ClockOffsetEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub receiver_time: f64,
    pub kind: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub step_id: String,
    pub item_id: String,
    pub value: String,
}

/// One stream in columnar form.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamData {
    pub info: StreamInfo,
    pub timestamps: Vec<f64>,
    /// One column per channel label.
    pub channels: Vec<Vec<f32>>,
}

impl StreamData {
    pub fn empty(info: StreamInfo) -> Self {
        let channels = vec![Vec::new(); info.channel_labels.len()];
        StreamData {
            info,
            timestamps: Vec::new(),
            channels,
        }
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn channel(&self, label: &str) -> Option<&[f32]> {
        let i = self.info.channel_labels.iter().position(|l| l == label)?;
        Some(&self.channels[i])
    }

    /// Indices of samples with timestamp in `[start, end]`.
    pub fn range(&self, start: f64, end: f64) -> Range<usize> {
        let lo = self.timestamps.partition_point(|&t| t < start);
        let hi = self.timestamps.partition_point(|&t| t <= end);
        lo..hi.max(lo)
    }

    pub fn file_size(&self) -> u64 {
        STREAM_HEADER_LEN + self.len() as u64 * (8 + 4 * self.channels.len() as u64)
    }
}

/// Everything a finalized session directory holds, timestamps corrected.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionData {
    pub meta: SessionMeta,
    pub streams: IndexMap<String, StreamData>,
    pub events: Vec<EventRecord>,
    pub responses: Vec<ResponseRecord>,
}

impl SessionData {
    pub fn streams_of(&self, modality: Modality) -> impl Iterator<Item = &StreamData> {
        self.streams.values().filter(move |s| s.info.modality == modality)
    }

    /// Earliest-to-latest span over samples and events.
    pub fn duration(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in self.streams.values() {
            if let (Some(a), Some(b)) = (s.timestamps.first(), s.timestamps.last()) {
                lo = lo.min(*a);
                hi = hi.max(*b);
            }
        }
        for e in &self.events {
            lo = lo.min(e.receiver_time);
            hi = hi.max(e.receiver_time);
        }
        if hi >= lo {
            hi - lo
        } else {
            0.0
        }
    }
}

pub(crate) fn write_stream_file(path: &Path, data: &StreamData) -> Result<u64, RecorderError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&STREAM_MAGIC)?;
    w.write_all(&[STREAM_VERSION, 0])?;
    w.write_all(&(data.channels.len() as u16).to_le_bytes())?;
    w.write_all(&(data.len() as u64).to_le_bytes())?;
    for t in &data.timestamps {
        w.write_all(&t.to_le_bytes())?;
    }
    for col in &data.channels {
        for v in col {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(data.file_size())
}

pub(crate) fn read_stream_file(path: &Path, info: StreamInfo) -> Result<StreamData, RecorderError> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let corrupt = |why: &str| RecorderError::Corrupt(format!("{}: {why}", path.display()));
    if bytes.len() < STREAM_HEADER_LEN as usize || bytes[..4] != STREAM_MAGIC {
        return Err(corrupt("bad header"));
    }
    if bytes[4] != STREAM_VERSION {
        return Err(corrupt("unsupported version"));
    }
    let channels = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if channels != info.channel_labels.len() {
        return Err(corrupt("channel count disagrees with manifest"));
    }
    let expected = (STREAM_HEADER_LEN as usize)
        .checked_add(n.checked_mul(8 + 4 * channels).ok_or_else(|| corrupt("overflow"))?)
        .ok_or_else(|| corrupt("overflow"))?;
    if bytes.len() != expected {
        return Err(corrupt("length disagrees with sample count"));
    }
    let mut at = STREAM_HEADER_LEN as usize;
    let timestamps = (0..n)
        .map(|i| f64::from_le_bytes(bytes[at + 8 * i..at + 8 * i + 8].try_into().unwrap()))
        .collect();
    at += 8 * n;
    let columns = (0..channels)
        .map(|c| {
            let base = at + 4 * n * c;
            (0..n)
                .map(|i| f32::from_le_bytes(bytes[base + 4 * i..base + 4 * i + 4].try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok(StreamData {
        info,
        timestamps,
        channels: columns,
    })
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), RecorderError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, RecorderError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

pub fn read_manifest(dir: &Path) -> Result<SessionManifest, RecorderError> {
    let text = fs::read_to_string(dir.join("manifest.toml"))?;
    let m: SessionManifest =
        toml::from_str(&text).map_err(|e| RecorderError::Corrupt(format!("manifest: {e}")))?;
    if m.format != MANIFEST_FORMAT {
        return Err(RecorderError::Corrupt(format!("unknown format {:?}", m.format)));
    }
    Ok(m)
}

/// Loads a finalized session directory, checking files against the manifest.
pub fn load_session(dir: &Path) -> Result<SessionData, RecorderError> {
    let m = read_manifest(dir)?;
    let mut streams = IndexMap::new();
    for entry in &m.streams {
        let data = read_stream_file(&dir.join(&entry.file), entry.info.clone())?;
        if data.len() as u64 != entry.sample_count || data.file_size() != entry.bytes {
            return Err(RecorderError::Corrupt(format!(
                "{} does not match its manifest entry",
                entry.file
            )));
        }
        streams.insert(entry.info.source_id.clone(), data);
    }
    Ok(SessionData {
        meta: m.meta,
        streams,
        events: read_csv(&dir.join("events.csv"))?,
        responses: read_csv(&dir.join("responses.csv"))?,
    })
}
