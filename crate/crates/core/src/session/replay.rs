//! Headless recording on a virtual clock.
//!
//! Simulated devices are polled in virtual time, each stamping samples on
//! its own offset and drifting clock. Clock probes with random one-way delays
//! feed the recorder's offset history every few seconds. The workflow runs
//! on the receiver clock, driven by the event script and by phase timers
//! divided by `time_scale`. Nothing reads the wall clock, so a rerun with the
//! same inputs writes the same bytes.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use parking_lot::Mutex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::script::{EventScript, ScriptAction};
use super::{AnalysisSettings, SessionConfig, SessionError, ANALYSIS_FILE, CORPUS_DIR};
use crate::code::EditorGeometry;
use crate::gaze::{CLOSE_FILE, OPEN_FILE, SCROLL};
use crate::recorder::{RecordingSession, SessionData, SessionManifest, SessionMeta};
use crate::stream::simulator::{PointerSource, ScriptedPointer};
use crate::stream::{estimate_clock_offset, Chunk, ClockProbe, Modality, Simulator, SourceRegistry};
use crate::workflow::{advance, PhaseKind, WorkflowEvent, WorkflowState};

/// Final workflow state, as JSON.
pub const WORKFLOW_STATE_FILE: &str = "workflow.json";

const TICK_S: f64 = 0.25;
const PROBE_INTERVAL_S: f64 = 5.0;
const PROBES_PER_BURST: usize = 8;
const PROBE_SPACING_S: f64 = 0.002;
const ONE_WAY_DELAY_S: (f64, f64) = (0.2e-3, 2.0e-3);
const PROBE_TURNAROUND_S: f64 = 50e-6;
/// Streams run this long before the workflow starts and after it ends.
const MARGIN_S: f64 = 1.0;
const SACCADE_S: f64 = 0.03;

#[derive(Debug, Clone, Default)]
pub struct ReplayOptions {
    pub seed: Option<u64>,
    /// Overrides the config's `time_scale`.
    pub time_scale: Option<f64>,
    /// Virtual-time budget; the default is one day.
    pub max_duration_s: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub dir: PathBuf,
    pub manifest: SessionManifest,
    pub state: WorkflowState,
    /// The recording as the live pipeline saw it when it stopped.
    pub data: SessionData,
}

pub fn session_id(participant_id: &str, workflow_id: &str, seed: u64) -> String {
    format!("{participant_id}-{workflow_id}-s{seed}")
}

struct Device {
    id: String,
    sim: Simulator,
    offset: f64,
    rate: f64,
}

impl Device {
    fn clock(&self, t: f64) -> f64 {
        self.offset + t * self.rate
    }
}

#[derive(Clone)]
struct SharedPointer(Arc<Mutex<ScriptedPointer>>);

impl PointerSource for SharedPointer {
    fn position(&mut self, t: f64) -> (f64, f64) {
        self.0.lock().position(t)
    }
}

enum Action {
    Start,
    Script(ScriptAction),
}

struct Pending {
    at: f64,
    action: Action,
}

struct Driver<'a> {
    config: &'a SessionConfig,
    script: &'a EventScript,
    session: RecordingSession,
    devices: Vec<Device>,
    rng: ChaCha8Rng,
    state: WorkflowState,
    scale: f64,
    geometry: EditorGeometry,
    /// Open file and its first visible line.
    view: Option<(String, usize)>,
    waypoints: Vec<[f64; 3]>,
    pointer: Option<SharedPointer>,
    rest: (f64, f64),
    /// Sorted by time; ties keep insertion order.
    pending: Vec<Pending>,
    now: f64,
    next_probe: f64,
}

impl Driver<'_> {
    fn advance_streams(&mut self, target: f64) -> Result<(), SessionError> {
        while self.now < target || self.next_probe <= target {
            let next_tick = ((self.now / TICK_S).floor() + 1.0) * TICK_S;
            let step = target.min(next_tick).min(self.next_probe);
            if step > self.now {
                self.poll_all(step)?;
                self.now = step;
            }
            if self.next_probe <= self.now {
                self.probe_burst(self.next_probe)?;
                self.next_probe += PROBE_INTERVAL_S;
            }
        }
        Ok(())
    }

    fn poll_all(&mut self, until: f64) -> Result<(), SessionError> {
        for d in &mut self.devices {
            let mut samples = d.sim.poll(until);
            if samples.is_empty() {
                continue;
            }
            for s in &mut samples {
                s.timestamp = d.offset + s.timestamp * d.rate;
            }
            self.session.append(&d.id, &Chunk::new(d.id.clone(), samples)?)?;
        }
        Ok(())
    }

    fn probe_burst(&mut self, at: f64) -> Result<(), SessionError> {
        for d in &self.devices {
            let probes: Vec<ClockProbe> = (0..PROBES_PER_BURST)
                .map(|k| {
                    let t0 = at + k as f64 * PROBE_SPACING_S;
                    let out = self.rng.random_range(ONE_WAY_DELAY_S.0..ONE_WAY_DELAY_S.1);
                    let back = self.rng.random_range(ONE_WAY_DELAY_S.0..ONE_WAY_DELAY_S.1);
                    let t1 = d.clock(t0 + out);
                    let t2 = t1 + PROBE_TURNAROUND_S;
                    let t3 = t0 + out + PROBE_TURNAROUND_S / d.rate + back;
                    ClockProbe::new(t0, t1, t2, t3)
                })
                .collect();
            self.session.record_offset(&d.id, estimate_clock_offset(&probes)?)?;
        }
        Ok(())
    }

    fn deadline(&self) -> Option<f64> {
        Some(self.state.activated_at? + self.state.active_phase()?.timer_s()? / self.scale)
    }

    fn active_label(&self) -> String {
        self.state.active_phase().map_or_else(|| "no phase".into(), |p| p.label())
    }

    fn apply(&mut self, event: WorkflowEvent) -> Result<(), SessionError> {
        let before = self.state.current;
        let responses_before = self.state.responses.len();
        let (next, markers) = advance(&self.state, &event, self.now)
            .map_err(|e| SessionError::Replay(format!("{}: {e}", self.active_label())))?;
        self.state = next;
        if self.state.current != before {
            self.close_view();
            self.pending.clear();
        }
        for m in markers {
            self.session.log_event(m.receiver_time, m.kind, m.label);
        }
        for r in &self.state.responses[responses_before..] {
            self.session.log_response(&r.step_id, &r.item_id, &r.value);
        }
        if self.state.current != before {
            self.enter_phase();
        }
        Ok(())
    }

    fn enter_phase(&mut self) {
        let Some(phase) = self.state.active_phase().cloned() else {
            return;
        };
        if let PhaseKind::Task { task, .. } = &phase.kind {
            if let Some(file) = self.config.workflow.tasks.get(task).and_then(|t| t.files.first()) {
                self.open(file.clone());
            }
        }
        for e in self.script.for_phase(&phase.id) {
            self.pending.push(Pending {
                at: self.now + e.after,
                action: Action::Script(e.action.clone()),
            });
        }
    }

    fn open(&mut self, file: String) {
        self.session.log_event(self.now, OPEN_FILE, file.clone());
        self.view = Some((file, self.geometry.first_visible_line));
    }

    fn close_view(&mut self) {
        if let Some((file, _)) = self.view.take() {
            self.session.log_event(self.now, CLOSE_FILE, file);
        }
    }

    fn look(&mut self, line: usize, col: usize, duration_s: f64) -> Result<(), SessionError> {
        let (file, first) = self
            .view
            .clone()
            .ok_or_else(|| SessionError::Replay(format!("{}: look with no file open", self.active_label())))?;
        let geometry = EditorGeometry {
            first_visible_line: first,
            ..self.geometry
        };
        let (x, y) = geometry
            .rect_for_cell(line, col)
            .ok_or_else(|| SessionError::Replay(format!("{file} line {line} col {col} is not on screen")))?
            .center();
        let Some(pointer) = &self.pointer else {
            return Ok(());
        };
        let start = self.waypoints.last().map_or(self.now, |w| w[0].max(self.now));
        let (rx, ry) = self.rest;
        self.waypoints.extend([
            [start, rx, ry],
            [start + SACCADE_S, x, y],
            [start + SACCADE_S + duration_s, x, y],
            [start + 2.0 * SACCADE_S + duration_s, rx, ry],
        ]);
        *pointer.0.lock() = ScriptedPointer::new(self.waypoints.clone());
        Ok(())
    }

    fn run_action(&mut self, action: Action) -> Result<(), SessionError> {
        let script = match action {
            Action::Start => return self.apply(WorkflowEvent::Start),
            Action::Script(a) => a,
        };
        match script {
            ScriptAction::Complete { answers } => self.apply(WorkflowEvent::StepCompleted { answers })?,
            ScriptAction::Abort => self.apply(WorkflowEvent::Abort)?,
            ScriptAction::OpenFile { file } => {
                if !self.config.corpus_dir.join(&file).is_file() {
                    return Err(SessionError::Replay(format!("open_file: {file} is not in the corpus")));
                }
                self.close_view();
                self.open(file);
            }
            ScriptAction::CloseFile => self.close_view(),
            ScriptAction::Scroll { line } => match &mut self.view {
                Some((_, first)) => {
                    *first = line;
                    self.session.log_event(self.now, SCROLL, line.to_string());
                }
                None => return Err(SessionError::Replay(format!("{}: scroll with no file open", self.active_label()))),
            },
            ScriptAction::Look { line, col, duration_s } => self.look(line, col, duration_s)?,
        }
        Ok(())
    }

    fn run(&mut self, budget: f64) -> Result<(), SessionError> {
        self.advance_streams(0.0)?;
        self.pending.push(Pending {
            at: MARGIN_S,
            action: Action::Start,
        });
        while !self.state.is_terminal() {
            self.pending.sort_by(|a, b| a.at.total_cmp(&b.at));
            let next_event = self.pending.first().map(|p| p.at);
            let deadline = self.deadline();
            let target = match (next_event, deadline) {
                (Some(e), Some(d)) => e.min(d),
                (Some(t), None) | (None, Some(t)) => t,
                (None, None) => {
                    return Err(SessionError::Replay(format!(
                        "{} has no timer and nothing left in the script to complete it",
                        self.active_label()
                    )))
                }
            };
            if target > budget {
                return Err(SessionError::Replay(format!(
                    "still at {} after {budget} s of virtual time",
                    self.active_label()
                )));
            }
            self.advance_streams(target)?;
            if deadline.is_some_and(|d| next_event.is_none_or(|e| d < e)) {
                self.apply(WorkflowEvent::TimerElapsed)?;
            } else {
                let p = self.pending.remove(0);
                self.run_action(p.action)?;
            }
        }
        self.advance_streams(self.now + MARGIN_S)
    }
}

/// Runs the configured workflow against `script` and finalizes the
/// recording into `out`, together with the analysis settings, a corpus
/// snapshot and the final workflow state.
pub fn record_headless(
    config: &SessionConfig,
    script: &EventScript,
    out: &Path,
    options: &ReplayOptions,
) -> Result<ReplayOutcome, SessionError> {
    let seed = config.seed(options.seed);
    let scale = options.time_scale.unwrap_or(config.time_scale);
    if !(scale.is_finite() && scale > 0.0) {
        return Err(SessionError::Config(vec![format!("time_scale must be positive, got {scale}")]));
    }
    let state = WorkflowState::new(&config.workflow, seed);
    script.check(&state.phases)?;

    let geometry = config.settings.geometry;
    let registry = SourceRegistry::with_builtins();
    let rest = (geometry.origin_x / 2.0, geometry.origin_y / 2.0);
    let mut pointer = None;
    let mut devices = Vec::new();
    for p in config.device_profiles(seed) {
        let sim = if p.modality == Modality::Gaze && pointer.is_none() {
            let shared = SharedPointer(Arc::new(Mutex::new(ScriptedPointer::new(vec![[0.0, rest.0, rest.1]]))));
            pointer = Some(shared.clone());
            Simulator::from_pointer(&p, Box::new(shared))?
        } else {
            Simulator::new(&registry, &p)?
        };
        devices.push(Device {
            id: p.source_id.clone(),
            sim,
            offset: p.clock_offset_s,
            rate: 1.0 + p.drift_ppm * 1e-6,
        });
    }
    let meta = SessionMeta {
        session_id: session_id(&config.participant_id, &config.workflow.id, seed),
        participant_id: config.participant_id.clone(),
        started_at: config.started_at.unwrap_or(0),
    };
    let session = RecordingSession::start(meta, devices.iter().map(|d| d.sim.info().clone()).collect())?;

    let mut driver = Driver {
        config,
        script,
        session,
        devices,
        rng: ChaCha8Rng::seed_from_u64(seed ^ 0x636c_6f63_6b73),
        state,
        scale,
        geometry,
        view: None,
        waypoints: vec![[0.0, rest.0, rest.1]],
        pointer,
        rest,
        pending: Vec::new(),
        now: 0.0,
        next_probe: 0.0,
    };
    driver.run(options.max_duration_s.unwrap_or(86_400.0))?;
    driver.session.stop();
    let data = driver.session.snapshot();
    let manifest = driver.session.finalize(out)?;

    write_session_extras(out, &config.settings, &config.corpus_dir, &driver.state)?;

    Ok(ReplayOutcome {
        dir: out.to_path_buf(),
        manifest,
        state: driver.state,
        data,
    })
}

/// Writes what a finalized recording needs for offline analysis: the
/// analysis settings, a corpus snapshot and the final workflow state.
pub fn write_session_extras(
    out: &Path,
    settings: &AnalysisSettings,
    corpus_dir: &Path,
    state: &WorkflowState,
) -> Result<(), SessionError> {
    let settings_path = out.join(ANALYSIS_FILE);
    let text = toml::to_string(settings)
        .map_err(|e| SessionError::Replay(format!("cannot serialize analysis settings: {e}")))?;
    fs::write(&settings_path, text).map_err(|e| SessionError::io(&settings_path, e))?;
    copy_corpus(corpus_dir, &out.join(CORPUS_DIR))?;
    let state_path = out.join(WORKFLOW_STATE_FILE);
    let json = serde_json::to_string_pretty(state).expect("workflow state serializes");
    fs::write(&state_path, json + "\n").map_err(|e| SessionError::io(&state_path, e))
}

/// Copies the `.java` files of `from` into `to`, keeping relative paths.
fn copy_corpus(from: &Path, to: &Path) -> Result<(), SessionError> {
    for entry in walkdir::WalkDir::new(from).sort_by_file_name() {
        let entry = entry.map_err(|e| SessionError::io(from, e.into()))?;
        let path = entry.path();
        if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "java") {
            continue;
        }
        let target = to.join(path.strip_prefix(from).unwrap_or(path));
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(|e| SessionError::io(parent, e))?;
        }
        fs::copy(path, &target).map_err(|e| SessionError::io(&target, e))?;
    }
    Ok(())
}
