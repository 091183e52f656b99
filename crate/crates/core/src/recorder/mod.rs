//! In-memory recording session and its persistence.

mod correct;
mod store;

use std::collections::HashSet;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use indexmap::IndexMap;
use parking_lot::Mutex;

use crate::stream::{Chunk, ClockOffsetEstimate, StreamError, StreamInfo};

pub use correct::{correct_timestamps, offset_at};
pub use store::{
    load_session, read_manifest, EventRecord, ResponseRecord, SessionData, SessionManifest,
    SessionMeta, StreamData, StreamEntry, MANIFEST_FORMAT, STREAM_MAGIC,
};

/// Samples older than the buffer tail by more than this are rejected.
pub const REGRESSION_TOLERANCE_S: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum RecorderError {
    #[error("a recording needs at least one stream")]
    NoStreams,
    #[error("duplicate source_id {0:?}")]
    DuplicateStream(String),
    #[error("source_id {0:?} cannot be used as a file name")]
    InvalidStreamId(String),
    #[error("unknown stream {0:?}")]
    UnknownStream(String),
    #[error("chunk for {stream} has {found} channels, stream has {expected}")]
    ChannelMismatch {
        stream: String,
        expected: usize,
        found: usize,
    },
    #[error("timestamp regression on {stream}: {got} after {tail}")]
    TimestampRegression { stream: String, tail: f64, got: f64 },
    #[error("recording is stopped")]
    Stopped,
    #[error("recording must be stopped before finalizing")]
    NotStopped,
    #[error("session already finalized")]
    AlreadyFinalized,
    #[error("offset history is empty")]
    EmptyOffsetHistory,
    #[error("offset history is not sorted by measured_at")]
    UnsortedOffsetHistory,
    #[error("corrupt session: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("manifest: {0}")]
    Manifest(#[from] toml::ser::Error),
}

#[derive(Debug, Default)]
struct Buffer {
    timestamps: Vec<f64>,
    /// Row-major, `channel_count` values per sample.
    values: Vec<f32>,
    offsets: Vec<ClockOffsetEstimate>,
}

#[derive(Debug)]
struct Slot {
    info: StreamInfo,
    buffer: Mutex<Buffer>,
    count: AtomicU64,
}

/// A live recording. Appends to different streams may run concurrently;
/// appends to one stream serialize on that stream's lock.
#[derive(Debug)]
pub struct RecordingSession {
    meta: SessionMeta,
    slots: IndexMap<String, Slot>,
    events: Mutex<Vec<EventRecord>>,
    responses: Mutex<Vec<ResponseRecord>>,
    stopped: AtomicBool,
    finalized: Mutex<bool>,
}

fn valid_file_stem(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl RecordingSession {
    pub fn start(meta: SessionMeta, streams: Vec<StreamInfo>) -> Result<Self, RecorderError> {
        if streams.is_empty() {
            return Err(RecorderError::NoStreams);
        }
        let mut seen = HashSet::new();
        let mut slots = IndexMap::new();
        for info in streams {
            info.validate()?;
            if !seen.insert(info.source_id.clone()) {
                return Err(RecorderError::DuplicateStream(info.source_id));
            }
            if !valid_file_stem(&info.source_id) {
                return Err(RecorderError::InvalidStreamId(info.source_id));
            }
            slots.insert(
                info.source_id.clone(),
                Slot {
                    info,
                    buffer: Mutex::default(),
                    count: AtomicU64::new(0),
                },
            );
        }
        Ok(RecordingSession {
            meta,
            slots,
            events: Mutex::default(),
            responses: Mutex::default(),
            stopped: AtomicBool::new(false),
            finalized: Mutex::new(false),
        })
    }

    pub fn meta(&self) -> &SessionMeta {
        &self.meta
    }

    pub fn stream_infos(&self) -> impl Iterator<Item = &StreamInfo> {
        self.slots.values().map(|s| &s.info)
    }

    pub fn sample_count(&self, stream_id: &str) -> Option<u64> {
        self.slots.get(stream_id).map(|s| s.count.load(Ordering::Relaxed))
    }

    fn slot(&self, stream_id: &str) -> Result<&Slot, RecorderError> {
        self.slots
            .get(stream_id)
            .ok_or_else(|| RecorderError::UnknownStream(stream_id.to_string()))
    }

    /// Appends a chunk. The whole chunk is rejected if any sample regresses
    /// more than [`REGRESSION_TOLERANCE_S`] behind its predecessor.
    pub fn append(&self, stream_id: &str, chunk: &Chunk) -> Result<(), RecorderError> {
        if self.stopped.load(Ordering::Acquire) {
            return Err(RecorderError::Stopped);
        }
        let slot = self.slot(stream_id)?;
        chunk.validate()?;
        let expected = slot.info.channel_labels.len();
        if chunk.channel_count() != expected {
            return Err(RecorderError::ChannelMismatch {
                stream: stream_id.to_string(),
                expected,
                found: chunk.channel_count(),
            });
        }
        let mut buf = slot.buffer.lock();
        let mut tail = buf.timestamps.last().copied().unwrap_or(f64::NEG_INFINITY);
        for s in &chunk.samples {
            if !s.timestamp.is_finite() {
                return Err(StreamError::NonFinite.into());
            }
            if s.timestamp < tail - REGRESSION_TOLERANCE_S {
                return Err(RecorderError::TimestampRegression {
                    stream: stream_id.to_string(),
                    tail,
                    got: s.timestamp,
                });
            }
            tail = tail.max(s.timestamp);
        }
        for s in &chunk.samples {
            buf.timestamps.push(s.timestamp);
            buf.values.extend_from_slice(&s.values);
        }
        slot.count.fetch_add(chunk.samples.len() as u64, Ordering::Relaxed);
        Ok(())
    }

    /// Adds an offset estimate; history is kept sorted by `measured_at`.
    pub fn record_offset(&self, stream_id: &str, estimate: ClockOffsetEstimate) -> Result<(), RecorderError> {
        let slot = self.slot(stream_id)?;
        let mut buf = slot.buffer.lock();
        let at = buf
            .offsets
            .partition_point(|e| e.measured_at <= estimate.measured_at);
        buf.offsets.insert(at, estimate);
        Ok(())
    }

    pub fn log_event(&self, receiver_time: f64, kind: impl Into<String>, label: impl Into<String>) {
        self.events.lock().push(EventRecord {
            receiver_time,
            kind: kind.into(),
            label: label.into(),
        });
    }

    pub fn log_response(&self, step_id: impl Into<String>, item_id: impl Into<String>, value: impl Into<String>) {
        self.responses.lock().push(ResponseRecord {
            step_id: step_id.into(),
            item_id: item_id.into(),
            value: value.into(),
        });
    }

    pub fn stop(&self) {
        self.stopped.store(true, Ordering::Release);
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped.load(Ordering::Acquire)
    }

    /// Current contents with timestamps on the receiver clock. Streams with
    /// no offset estimate are taken as already synchronized.
    pub fn snapshot(&self) -> SessionData {
        let streams = self
            .slots
            .iter()
            .map(|(id, slot)| (id.clone(), Self::corrected(slot)))
            .collect();
        let mut events = self.events.lock().clone();
        events.sort_by(|a, b| a.receiver_time.total_cmp(&b.receiver_time));
        SessionData {
            meta: self.meta.clone(),
            streams,
            events,
            responses: self.responses.lock().clone(),
        }
    }

    fn corrected(slot: &Slot) -> StreamData {
        let buf = slot.buffer.lock();
        let timestamps = if buf.offsets.is_empty() {
            if !buf.timestamps.is_empty() {
                log::warn!(
                    "stream {} has no clock offset estimates; timestamps kept as received",
                    slot.info.source_id
                );
            }
            buf.timestamps.clone()
        } else {
            correct_timestamps(&buf.timestamps, &buf.offsets).expect("history kept sorted")
        };
        let ch = slot.info.channel_labels.len();
        let n = buf.timestamps.len();
        let channels = (0..ch)
            .map(|c| (0..n).map(|i| buf.values[i * ch + c]).collect())
            .collect();
        StreamData {
            info: slot.info.clone(),
            timestamps,
            channels,
        }
    }

    /// Writes the session directory. Requires a stopped recording; a second
    /// call is rejected.
    pub fn finalize(&self, dir: &Path) -> Result<SessionManifest, RecorderError> {
        let mut done = self.finalized.lock();
        if *done {
            return Err(RecorderError::AlreadyFinalized);
        }
        if !self.is_stopped() {
            return Err(RecorderError::NotStopped);
        }
        let data = self.snapshot();
        let manifest = write_session(dir, &data, |id| self.slots[id].buffer.lock().offsets.clone())?;
        *done = true;
        Ok(manifest)
    }
}

/// Persists `data` to `dir`; `offsets` supplies the per-stream history kept
/// for auditing.
pub fn write_session(
    dir: &Path,
    data: &SessionData,
    offsets: impl Fn(&str) -> Vec<ClockOffsetEstimate>,
) -> Result<SessionManifest, RecorderError> {
    fs::create_dir_all(dir.join("streams"))?;
    let mut entries = Vec::new();
    for (id, stream) in &data.streams {
        let file = format!("streams/{id}.bin");
        let bytes = store::write_stream_file(&dir.join(&file), stream)?;
        entries.push(StreamEntry {
            info: stream.info.clone(),
            file,
            sample_count: stream.len() as u64,
            bytes,
            offsets: offsets(id),
        });
    }
    store::write_csv(&dir.join("events.csv"), &["receiver_time", "kind", "label"], &data.events)?;
    store::write_csv(&dir.join("responses.csv"), &["step_id", "item_id", "value"], &data.responses)?;
    let manifest = SessionManifest {
        format: MANIFEST_FORMAT.to_string(),
        meta: data.meta.clone(),
        duration_s: data.duration(),
        total_bytes: entries.iter().map(|e| e.bytes).sum(),
        streams: entries,
    };
    fs::write(dir.join("manifest.toml"), toml::to_string(&manifest)?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{default_device_set, run_simulator, Modality, Sample};
    use proptest::prelude::*;

    fn meta() -> SessionMeta {
        SessionMeta {
            session_id: "s1".into(),
            participant_id: "p01".into(),
            started_at: 1_700_000_000,
        }
    }

    fn five() -> Vec<StreamInfo> {
        default_device_set(0)
            .iter()
            .map(|p| p.stream_info().unwrap())
            .collect()
    }

    fn eda_info() -> StreamInfo {
        StreamInfo::new("EDA", Modality::Eda, 128.0, vec!["gsr".into()], "eda").unwrap()
    }

    #[test]
    fn start_validates_stream_set() {
        assert!(matches!(
            RecordingSession::start(meta(), vec![]),
            Err(RecorderError::NoStreams)
        ));
        let s = RecordingSession::start(meta(), five()).unwrap();
        assert_eq!(s.stream_infos().count(), 5);
        assert!(s.stream_infos().all(|i| s.sample_count(&i.source_id) == Some(0)));
        assert!(matches!(
            RecordingSession::start(meta(), vec![eda_info(), eda_info()]),
            Err(RecorderError::DuplicateStream(_))
        ));
        let mut bad = eda_info();
        bad.source_id = "../x".into();
        assert!(matches!(
            RecordingSession::start(meta(), vec![bad]),
            Err(RecorderError::InvalidStreamId(_))
        ));
    }

    #[test]
    fn append_counts_and_rejects() {
        let s = RecordingSession::start(meta(), vec![eda_info()]).unwrap();
        let p = &default_device_set(7)[2];
        let samples = run_simulator(p, 10.0).unwrap();
        s.append("eda", &Chunk::new("eda", samples).unwrap()).unwrap();
        assert_eq!(s.sample_count("eda"), Some(1280));
        let one = Chunk::new("eda", vec![Sample::new(100.0, vec![1.0])]).unwrap();
        assert!(matches!(s.append("eeg", &one), Err(RecorderError::UnknownStream(_))));
        let old = Chunk::new("eda", vec![Sample::new(10.0 - 1.0 / 128.0 - 2.0, vec![1.0])]).unwrap();
        assert!(matches!(
            s.append("eda", &old),
            Err(RecorderError::TimestampRegression { .. })
        ));
        // sub-millisecond jitter is tolerated
        let jitter = Chunk::new("eda", vec![Sample::new(10.0 - 1.0 / 128.0 - 0.0005, vec![1.0])]).unwrap();
        s.append("eda", &jitter).unwrap();
        assert_eq!(s.sample_count("eda"), Some(1281));
    }

    #[test]
    fn finalize_empty_five_stream_session() {
        let dir = tempfile::tempdir().unwrap();
        let s = RecordingSession::start(meta(), five()).unwrap();
        assert!(matches!(s.finalize(dir.path()), Err(RecorderError::NotStopped)));
        s.stop();
        let m = s.finalize(dir.path()).unwrap();
        assert_eq!(m.streams.len(), 5);
        assert!(m.streams.iter().all(|e| e.sample_count == 0));
        assert!(matches!(s.finalize(dir.path()), Err(RecorderError::AlreadyFinalized)));
        assert_eq!(read_manifest(dir.path()).unwrap(), m);
    }

    #[test]
    fn ten_second_session_bytes_match_disk_and_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let profiles = default_device_set(3);
        let s = RecordingSession::start(meta(), five()).unwrap();
        for p in &profiles {
            let samples = run_simulator(p, 10.0).unwrap();
            for part in samples.chunks(37) {
                s.append(&p.source_id, &Chunk::new(p.source_id.clone(), part.to_vec()).unwrap())
                    .unwrap();
            }
            s.record_offset(
                &p.source_id,
                ClockOffsetEstimate { offset: 0.25, round_trip: 0.001, measured_at: 0.0 },
            )
            .unwrap();
        }
        s.log_event(0.5, "start", "task:t1");
        s.log_event(9.5, "stop", "task:t1");
        s.log_response("tlx-1", "mental", "55");
        s.stop();
        let m = s.finalize(dir.path()).unwrap();
        let on_disk: u64 = walkdir::WalkDir::new(dir.path().join("streams"))
            .into_iter()
            .filter_map(Result::ok)
            .filter(|e| e.file_type().is_file())
            .map(|e| e.metadata().unwrap().len())
            .sum();
        assert_eq!(m.total_bytes, on_disk);
        let loaded = load_session(dir.path()).unwrap();
        assert_eq!(loaded, s.snapshot());
        assert_eq!(loaded.streams["eda"].timestamps[0], 0.25);
        for p in &profiles {
            assert_eq!(
                loaded.streams[&p.source_id].len() as u64,
                s.sample_count(&p.source_id).unwrap()
            );
        }
    }

    #[test]
    fn corrupt_stream_file_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let s = RecordingSession::start(meta(), vec![eda_info()]).unwrap();
        s.append("eda", &Chunk::new("eda", vec![Sample::new(0.0, vec![1.0])]).unwrap())
            .unwrap();
        s.stop();
        s.finalize(dir.path()).unwrap();
        let f = dir.path().join("streams/eda.bin");
        let mut bytes = fs::read(&f).unwrap();
        bytes.pop();
        fs::write(&f, bytes).unwrap();
        assert!(matches!(load_session(dir.path()), Err(RecorderError::Corrupt(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn persisted_counts_equal_appended(
            sizes in prop::collection::vec(1usize..50, 0..12),
            labels in prop::collection::vec("[a-z]{1,6}", 1..5),
        ) {
            let info = StreamInfo::new("x", Modality::Eeg, 100.0, labels.clone(), "x").unwrap();
            let s = RecordingSession::start(meta(), vec![info]).unwrap();
            let mut t = 0.0;
            let mut total = 0;
            for n in &sizes {
                let samples = (0..*n)
                    .map(|i| {
                        t += 0.01;
                        Sample::new(t, vec![i as f32; labels.len()])
                    })
                    .collect();
                s.append("x", &Chunk::new("x", samples).unwrap()).unwrap();
                total += n;
            }
            s.stop();
            let dir = tempfile::tempdir().unwrap();
            let m = s.finalize(dir.path()).unwrap();
            prop_assert_eq!(m.streams[0].sample_count, total as u64);
            let loaded = load_session(dir.path()).unwrap();
            prop_assert_eq!(loaded, s.snapshot());
        }
    }
}
