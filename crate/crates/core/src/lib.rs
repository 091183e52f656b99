//! Study-session engine: multi-sensor stream protocol and recording, gaze to
//! source-code mapping, physiological metrics, scriptable code heatmaps and
//! an automated study workflow.

pub mod stream;
pub mod recorder;
pub mod code;
pub mod gaze;
pub mod physio;
pub mod highlight;
pub mod workflow;
pub mod session;
