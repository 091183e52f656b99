//! Stream protocol: sample frames, clock synchronization, discovery and
//! simulated devices.

pub mod clock;
pub mod discovery;
pub mod frame;
pub mod net;
pub mod simulator;
mod types;

pub use clock::{estimate_clock_offset, ClockOffsetEstimate, ClockProbe, MonotonicClock};
pub use discovery::{discover_streams, Announcement, Discovery};
pub use frame::{decode_chunk, encode_chunk, read_frame};
pub use simulator::{
    default_device_set, run_simulator, DeviceProfile, SignalSource, Simulator, SourceRegistry,
};
pub use types::{Chunk, Modality, Sample, StreamInfo};

#[derive(Debug, thiserror::Error)]
pub enum StreamError {
    #[error("chunk has no samples")]
    EmptyChunk,
    #[error("channel count mismatch: expected {expected}, found {found}")]
    ChannelMismatch { expected: usize, found: usize },
    #[error("non-finite timestamp or value")]
    NonFinite,
    #[error("stream id longer than 65535 bytes")]
    IdTooLong,
    #[error("frame exceeds maximum size")]
    FrameTooLarge,
    #[error("truncated frame")]
    Truncated,
    #[error("bad frame magic")]
    BadMagic,
    #[error("unsupported frame version {0}")]
    UnsupportedVersion(u8),
    #[error("stream id is not valid UTF-8")]
    InvalidUtf8,
    #[error("unknown modality {0:?}")]
    UnknownModality(String),
    #[error("invalid stream info: {0}")]
    InvalidInfo(String),
    #[error("no clock probes")]
    NoProbes,
    #[error("clock probe violates t0<=t3, t1<=t2")]
    InvalidProbe,
    #[error("unsupported signal generator {0:?}")]
    UnsupportedGenerator(String),
    #[error("invalid device profile {source_id}: {reason}")]
    InvalidProfile { source_id: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
