//! Stream ingestion. Discovery, one reader thread per stream and a clock
//! probe loop run on plain threads and write straight into the recorder, so
//! nothing on the API side can hold up a sample.

use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use cognitrace::recorder::{RecorderError, RecordingSession, SessionData, SessionMeta};
use cognitrace::stream::clock::probe_burst;
use cognitrace::stream::net::Inlet;
use cognitrace::stream::{Discovery, MonotonicClock, StreamError, StreamInfo};
use indexmap::IndexMap;
use parking_lot::{Mutex, RwLock};
use serde::Serialize;

const PROBE_INTERVAL: Duration = Duration::from_secs(5);
const PROBES_PER_BURST: usize = 8;
const PROBE_REPLY_TIMEOUT: Duration = Duration::from_millis(200);
const CONNECT_TIMEOUT: Duration = Duration::from_secs(1);
const DISCOVERY_POLL: Duration = Duration::from_millis(100);

struct LiveStream {
    info: StreamInfo,
    probe_addr: SocketAddr,
    samples: AtomicU64,
    /// Receiver time of the latest chunk, as f64 bits; NaN before the first.
    last_chunk: AtomicU64,
    connected: AtomicBool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StreamStatus {
    pub source_id: String,
    pub name: String,
    pub modality: String,
    pub nominal_rate: f64,
    pub channel_count: usize,
    /// Samples received since the stream was discovered.
    pub samples: u64,
    /// Seconds since the last chunk arrived.
    pub last_sample_age_s: Option<f64>,
    pub connected: bool,
    pub recording: bool,
}

/// Connected streams plus the recording they feed, if one is running.
pub struct Hub {
    clock: MonotonicClock,
    discovery_addr: SocketAddr,
    streams: RwLock<IndexMap<String, Arc<LiveStream>>>,
    recording: RwLock<Option<Arc<RecordingSession>>>,
    stop: AtomicBool,
    threads: Mutex<Vec<JoinHandle<()>>>,
}

impl Hub {
    /// Binds discovery on `discovery` and starts accepting announced streams.
    pub fn start(discovery: SocketAddr) -> Result<Arc<Self>, StreamError> {
        let socket = Discovery::bind(discovery)?;
        let hub = Arc::new(Hub {
            clock: MonotonicClock::new(),
            discovery_addr: socket.local_addr()?,
            streams: RwLock::default(),
            recording: RwLock::default(),
            stop: AtomicBool::new(false),
            threads: Mutex::default(),
        });
        let h = hub.clone();
        let discover = std::thread::spawn(move || h.discovery_loop(socket));
        let h = hub.clone();
        let probe = std::thread::spawn(move || h.probe_loop());
        hub.threads.lock().extend([discover, probe]);
        Ok(hub)
    }

    /// Where simulators should announce themselves.
    pub fn discovery_addr(&self) -> SocketAddr {
        self.discovery_addr
    }

    /// Receiver clock, seconds.
    pub fn now(&self) -> f64 {
        self.clock.now()
    }

    fn discovery_loop(self: Arc<Self>, socket: Discovery) {
        while !self.stop.load(Ordering::Relaxed) {
            match socket.recv(DISCOVERY_POLL) {
                Ok(Some(d)) => {
                    let id = d.announcement.info.source_id.clone();
                    if self.streams.read().get(&id).is_some_and(|s| s.connected.load(Ordering::Relaxed)) {
                        continue;
                    }
                    match Inlet::connect(d.data_addr(), CONNECT_TIMEOUT) {
                        Ok(inlet) => {
                            let stream = Arc::new(LiveStream {
                                info: d.announcement.info.clone(),
                                probe_addr: d.probe_addr(),
                                samples: AtomicU64::new(0),
                                last_chunk: AtomicU64::new(f64::NAN.to_bits()),
                                connected: AtomicBool::new(true),
                            });
                            log::info!("connected to stream {id} at {}", d.data_addr());
                            self.streams.write().insert(id, stream.clone());
                            let hub = self.clone();
                            // readers are detached: a blocked read ends when the sender goes away
                            std::thread::spawn(move || hub.read_loop(stream, inlet));
                        }
                        Err(e) => log::warn!("cannot connect to stream {id}: {e}"),
                    }
                }
                Ok(None) => {}
                Err(e) => {
                    log::error!("discovery socket failed: {e}");
                    return;
                }
            }
        }
    }

    fn read_loop(self: Arc<Self>, stream: Arc<LiveStream>, mut inlet: Inlet) {
        let id = &stream.info.source_id;
        while !self.stop.load(Ordering::Relaxed) {
            match inlet.next_chunk() {
                Ok(Some(chunk)) if chunk.stream_id == *id => {
                    stream.samples.fetch_add(chunk.samples.len() as u64, Ordering::Relaxed);
                    stream.last_chunk.store(self.now().to_bits(), Ordering::Relaxed);
                    let rec = self.recording.read().clone();
                    if let Some(rec) = rec {
                        match rec.append(id, &chunk) {
                            Ok(()) | Err(RecorderError::UnknownStream(_)) | Err(RecorderError::Stopped) => {}
                            Err(e) => log::warn!("dropping chunk of {id}: {e}"),
                        }
                    }
                }
                Ok(Some(chunk)) => log::warn!("stream {id} sent a chunk for {}", chunk.stream_id),
                Ok(None) => break,
                Err(e) => {
                    log::warn!("stream {id} failed: {e}");
                    break;
                }
            }
        }
        stream.connected.store(false, Ordering::Relaxed);
    }

    fn probe_loop(self: Arc<Self>) {
        while !self.stop.load(Ordering::Relaxed) {
            self.probe_all();
            let mut left = PROBE_INTERVAL;
            while !left.is_zero() && !self.stop.load(Ordering::Relaxed) {
                let step = left.min(Duration::from_millis(50));
                std::thread::sleep(step);
                left -= step;
            }
        }
    }

    /// One probe burst per recorded stream.
    fn probe_all(&self) {
        let Some(rec) = self.recording.read().clone() else {
            return;
        };
        let targets: Vec<(String, SocketAddr)> = rec
            .stream_infos()
            .filter_map(|i| self.streams.read().get(&i.source_id).map(|s| (i.source_id.clone(), s.probe_addr)))
            .collect();
        for (id, addr) in targets {
            match probe_burst(addr, &self.clock, PROBES_PER_BURST, PROBE_REPLY_TIMEOUT) {
                Ok(estimate) => {
                    if let Err(e) = rec.record_offset(&id, estimate) {
                        log::warn!("offset for {id} rejected: {e}");
                    }
                }
                Err(e) => log::warn!("clock probe of {id} failed: {e}"),
            }
        }
    }

    /// Starts recording every connected stream and takes a first clock
    /// estimate for each.
    pub fn start_recording(&self, meta: SessionMeta) -> Result<Arc<RecordingSession>, RecorderError> {
        let infos: Vec<StreamInfo> = self
            .streams
            .read()
            .values()
            .filter(|s| s.connected.load(Ordering::Relaxed))
            .map(|s| s.info.clone())
            .collect();
        let rec = Arc::new(RecordingSession::start(meta, infos)?);
        *self.recording.write() = Some(rec.clone());
        self.probe_all();
        Ok(rec)
    }

    /// Detaches and stops the running recording.
    pub fn stop_recording(&self) -> Option<Arc<RecordingSession>> {
        let rec = self.recording.write().take()?;
        rec.stop();
        Some(rec)
    }

    pub fn recording(&self) -> Option<Arc<RecordingSession>> {
        self.recording.read().clone()
    }

    /// Logs to the running recording; dropped when nothing records.
    pub fn log_event(&self, t: f64, kind: &str, label: &str) {
        if let Some(rec) = self.recording.read().as_ref() {
            rec.log_event(t, kind, label);
        }
    }

    pub fn snapshot(&self) -> Option<SessionData> {
        self.recording.read().as_ref().map(|r| r.snapshot())
    }

    pub fn statuses(&self) -> Vec<StreamStatus> {
        let now = self.now();
        let rec = self.recording.read().clone();
        self.streams
            .read()
            .values()
            .map(|s| {
                let last = f64::from_bits(s.last_chunk.load(Ordering::Relaxed));
                StreamStatus {
                    source_id: s.info.source_id.clone(),
                    name: s.info.name.clone(),
                    modality: s.info.modality.as_str().to_string(),
                    nominal_rate: s.info.nominal_rate,
                    channel_count: s.info.channel_labels.len(),
                    samples: s.samples.load(Ordering::Relaxed),
                    last_sample_age_s: (!last.is_nan()).then(|| (now - last).max(0.0)),
                    connected: s.connected.load(Ordering::Relaxed),
                    recording: rec.as_ref().is_some_and(|r| r.sample_count(&s.info.source_id).is_some()),
                }
            })
            .collect()
    }

    pub fn shutdown(&self) {
        self.stop.store(true, Ordering::Relaxed);
        for t in self.threads.lock().drain(..) {
            let _ = t.join();
        }
    }
}
