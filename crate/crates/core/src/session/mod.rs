//! Session configuration, the offline analysis pipeline and headless
//! recordings driven by a scripted participant.
//!
//! A session file is TOML; paths are relative to its directory.
//!
//! ```toml
//! workflow = "workflow.toml"
//! corpus = "corpus"               # defaults to the workflow's corpus
//! output = "sessions"
//! participant_id = "p01"
//! seed = 7                        # defaults to the workflow's participant_seed
//! started_at = 1767225600         # wall-clock start stamped on headless recordings
//! time_scale = 10.0               # phase timers run this much faster
//! tab_width = 4
//!
//! [geometry]                      # EditorGeometry
//! [gaze]                          # fixation parameters, granularity, window lead/lag
//! [metrics]                       # MetricParams
//! [highlight]
//! script = "norm(gaze_duration_ms)"
//! per_file = false
//! [service]
//! api_port = 8620
//! discovery_port = 16571
//!
//! [[devices]]                     # DeviceProfile; the default sensor set when absent
//! ```

mod pipeline;
mod replay;
mod script;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::code::{CodeError, EditorGeometry, DEFAULT_TAB_WIDTH};
use crate::gaze::{GazeConfig, GazeError};
use crate::highlight::{parse_script, HighlightError, DEFAULT_SCRIPT};
use crate::physio::{ExtractorRegistry, MetricParams, PhysioError};
use crate::recorder::RecorderError;
use crate::stream::net::DEFAULT_DISCOVERY_PORT;
use crate::stream::{default_device_set, DeviceProfile, StreamError};
use crate::workflow::{load_workflow, Workflow, WorkflowError};

pub use pipeline::{
    analyze_dir, analyze_session, heatmap_dir, render_session_heatmap, write_heatmap, Analysis, AnalysisSettings,
    SessionDir, ANALYSIS_FILE, CORPUS_DIR, HEATMAP_HTML, METRICS_CSV, OVERLAY_CSV,
};
pub use replay::{record_headless, session_id, write_session_extras, ReplayOptions, ReplayOutcome, WORKFLOW_STATE_FILE};
pub use script::{EventScript, ScriptAction, ScriptedEvent};

pub const DEFAULT_API_PORT: u16 = 8620;

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("invalid session config:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("invalid event script:\n  {}", .0.join("\n  "))]
    Script(Vec<String>),
    #[error("scripted session: {0}")]
    Replay(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Workflow(#[from] WorkflowError),
    #[error(transparent)]
    Recorder(#[from] RecorderError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Gaze(#[from] GazeError),
    #[error(transparent)]
    Physio(#[from] PhysioError),
    #[error(transparent)]
    Highlight(#[from] HighlightError),
}

impl SessionError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        SessionError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HighlightConfig {
    pub script: String,
    /// Normalize per file instead of over the whole session.
    pub per_file: bool,
}

impl Default for HighlightConfig {
    fn default() -> Self {
        HighlightConfig {
            script: DEFAULT_SCRIPT.to_string(),
            per_file: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub api_port: u16,
    pub discovery_port: u16,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            api_port: DEFAULT_API_PORT,
            discovery_port: DEFAULT_DISCOVERY_PORT,
        }
    }
}

fn default_participant() -> String {
    "p01".into()
}

fn default_output() -> String {
    "sessions".into()
}

fn default_time_scale() -> f64 {
    1.0
}

fn default_tab_width() -> usize {
    DEFAULT_TAB_WIDTH
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    workflow: String,
    corpus: Option<String>,
    #[serde(default = "default_output")]
    output: String,
    #[serde(default = "default_participant")]
    participant_id: String,
    seed: Option<u64>,
    started_at: Option<u64>,
    #[serde(default = "default_time_scale")]
    time_scale: f64,
    #[serde(default = "default_tab_width")]
    tab_width: usize,
    #[serde(default)]
    geometry: EditorGeometry,
    #[serde(default)]
    gaze: GazeConfig,
    #[serde(default)]
    metrics: MetricParams,
    #[serde(default)]
    highlight: HighlightConfig,
    #[serde(default)]
    service: ServiceConfig,
    #[serde(default)]
    devices: Vec<DeviceProfile>,
}

/// A validated session configuration with every path resolved.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub path: PathBuf,
    pub workflow: Workflow,
    pub corpus_dir: PathBuf,
    pub output_dir: PathBuf,
    pub participant_id: String,
    pub seed: Option<u64>,
    pub started_at: Option<u64>,
    pub time_scale: f64,
    pub settings: AnalysisSettings,
    pub service: ServiceConfig,
    /// Empty means the default sensor set.
    pub devices: Vec<DeviceProfile>,
}

impl SessionConfig {
    /// Reads and validates `path`, reporting every problem found.
    pub fn load(path: &Path) -> Result<Self, SessionError> {
        let text = std::fs::read_to_string(path).map_err(|e| SessionError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, path)
    }

    pub fn parse(text: &str, base: &Path, path: &Path) -> Result<Self, SessionError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| SessionError::Config(vec![e.to_string()]))?;
        let mut problems = Vec::new();

        let workflow = match load_workflow(&base.join(&raw.workflow)) {
            Ok(w) => Some(w),
            Err(WorkflowError::Invalid(p)) => {
                problems.extend(p.into_iter().map(|p| format!("workflow: {p}")));
                None
            }
            Err(e) => {
                problems.push(format!("workflow: {e}"));
                None
            }
        };
        let corpus_dir = match (&raw.corpus, workflow.as_ref().and_then(|w| w.corpus_dir.clone())) {
            (Some(c), _) => Some(base.join(c)),
            (None, dir) => dir,
        };
        match &corpus_dir {
            Some(dir) if !dir.is_dir() => problems.push(format!("corpus directory {} does not exist", dir.display())),
            None if workflow.is_some() => problems.push("no corpus directory configured".to_string()),
            _ => {}
        }

        if let Err(e) = raw.geometry.validate() {
            problems.push(format!("geometry: {e}"));
        }
        if raw.gaze.fixation.validate().is_err() {
            problems.push("gaze: fixation parameters must be positive and finite".to_string());
        }
        if !(raw.gaze.lead_s >= 0.0 && raw.gaze.lag_s >= 0.0) {
            problems.push("gaze: lead_s and lag_s must be non-negative".to_string());
        }
        if let Err(e) = parse_script(&raw.highlight.script) {
            problems.push(format!("highlight script: {e}"));
        }
        let registry = ExtractorRegistry::with_builtins();
        for name in &raw.metrics.extractors {
            if registry.get(name).is_err() {
                problems.push(format!("metrics: unknown extractor {name:?}"));
            }
        }
        if !(raw.time_scale.is_finite() && raw.time_scale > 0.0) {
            problems.push(format!("time_scale must be positive, got {}", raw.time_scale));
        }
        if raw.tab_width == 0 {
            problems.push("tab_width must be positive".to_string());
        }
        let mut ids = HashSet::new();
        for d in &raw.devices {
            if let Err(e) = d.stream_info() {
                problems.push(format!("device {}: {e}", d.source_id));
            }
            if !ids.insert(d.source_id.as_str()) {
                problems.push(format!("duplicate device source_id {:?}", d.source_id));
            }
        }
        if raw.participant_id.is_empty() {
            problems.push("participant_id is empty".to_string());
        }

        match (workflow, corpus_dir) {
            (Some(workflow), Some(corpus_dir)) if problems.is_empty() => Ok(SessionConfig {
                path: path.to_path_buf(),
                workflow,
                corpus_dir,
                output_dir: base.join(&raw.output),
                participant_id: raw.participant_id,
                seed: raw.seed,
                started_at: raw.started_at,
                time_scale: raw.time_scale,
                settings: AnalysisSettings {
                    tab_width: raw.tab_width,
                    geometry: raw.geometry,
                    gaze: raw.gaze,
                    metrics: raw.metrics,
                    highlight: raw.highlight,
                },
                service: raw.service,
                devices: raw.devices,
            }),
            _ => Err(SessionError::Config(problems)),
        }
    }

    /// Participant seed: explicit override, then config, then workflow.
    pub fn seed(&self, cli: Option<u64>) -> u64 {
        cli.or(self.seed).unwrap_or(self.workflow.participant_seed)
    }

    pub fn device_profiles(&self, seed: u64) -> Vec<DeviceProfile> {
        if self.devices.is_empty() {
            simulated_devices(seed)
        } else {
            self.devices.clone()
        }
    }
}

/// The default sensor set with unsynchronized clocks: each device starts a
/// few seconds off true time and drifts by tens of ppm.
pub fn simulated_devices(seed: u64) -> Vec<DeviceProfile> {
    let mut devices = default_device_set(seed);
    for (i, d) in devices.iter_mut().enumerate() {
        let i = i as f64;
        d.clock_offset_s = 2.5 * (i + 1.0) * if i as usize % 2 == 0 { 1.0 } else { -1.0 };
        d.drift_ppm = 20.0 * i - 40.0;
    }
    devices
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/study/session.toml")
    }

    #[test]
    fn fixture_config_loads() {
        let c = SessionConfig::load(&fixture()).unwrap();
        assert_eq!(c.workflow.id, "tracing-study");
        assert_eq!(c.seed(None), 7);
        assert_eq!(c.seed(Some(3)), 3);
        assert_eq!(c.time_scale, 10.0);
        assert_eq!(c.device_profiles(1).len(), 5);
        assert!(c.corpus_dir.join("org/example/tracing/risk/RiskCalculator.java").is_file());
    }

    #[test]
    fn problems_are_collected() {
        let base = fixture().parent().unwrap().to_path_buf();
        let text = r#"
            workflow = "workflow.toml"
            corpus = "no-such-dir"
            time_scale = 0
            [geometry]
            origin_x = 0
            origin_y = 0
            cell_width = 0
            cell_height = 16
            first_visible_line = 0
            viewport_width = 100
            viewport_height = 100
            [highlight]
            script = "norm(nope)"
        "#;
        let Err(SessionError::Config(p)) = SessionConfig::parse(text, &base, Path::new("x.toml")) else {
            panic!("expected config errors");
        };
        assert_eq!(p.len(), 4, "{p:?}");
        assert!(p[0].contains("no-such-dir"));
    }

    #[test]
    fn simulated_clocks_differ() {
        let d = simulated_devices(1);
        let offsets: HashSet<_> = d.iter().map(|d| d.clock_offset_s.to_bits()).collect();
        assert_eq!(offsets.len(), d.len());
        assert!(d.iter().all(|d| d.clock_offset_s != 0.0));
    }
}
