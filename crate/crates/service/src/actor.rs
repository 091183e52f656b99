//! The single writer of the workflow state. Handlers send commands over a
//! channel and read published snapshots; phase timers fire inside the actor.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use cognitrace::gaze::{CLOSE_FILE, OPEN_FILE, SCROLL};
use cognitrace::recorder::SessionMeta;
use cognitrace::session::{session_id, write_session_extras, SessionConfig};
use cognitrace::workflow::{advance, Answers, PhaseKind, WorkflowEvent, WorkflowState};
use serde::Serialize;
use tokio::sync::{mpsc, oneshot, watch};

use crate::error::ApiError;
use crate::live::Hub;

pub type Reply = oneshot::Sender<Result<(), ApiError>>;

#[derive(Debug)]
pub enum Command {
    Start(Reply),
    Submit(Answers, Reply),
    Abort(Reply),
    /// An editor view change reported by the UI.
    Editor { kind: String, label: String, reply: Reply },
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkflowSnapshot {
    pub session_id: String,
    pub state: WorkflowState,
    /// Receiver time at which the active phase's timer runs out.
    pub deadline: Option<f64>,
    /// Receiver time at which recording began.
    pub recording_since: Option<f64>,
    /// Set once the recording is finalized.
    pub session_dir: Option<PathBuf>,
    /// Why finalization failed, if it did.
    pub finalize_error: Option<String>,
}

pub struct Actor {
    hub: Arc<Hub>,
    config: Arc<SessionConfig>,
    scale: f64,
    snapshot: WorkflowSnapshot,
    /// File the editor shows.
    view: Option<String>,
    publish: watch::Sender<Arc<WorkflowSnapshot>>,
}

impl Actor {
    pub fn spawn(
        hub: Arc<Hub>,
        config: Arc<SessionConfig>,
        seed: u64,
        scale: f64,
    ) -> (mpsc::Sender<Command>, watch::Receiver<Arc<WorkflowSnapshot>>) {
        let snapshot = WorkflowSnapshot {
            session_id: session_id(&config.participant_id, &config.workflow.id, seed),
            state: WorkflowState::new(&config.workflow, seed),
            deadline: None,
            recording_since: None,
            session_dir: None,
            finalize_error: None,
        };
        let (publish, watch_rx) = watch::channel(Arc::new(snapshot.clone()));
        let (tx, rx) = mpsc::channel(64);
        let actor = Actor {
            hub,
            config,
            scale,
            snapshot,
            view: None,
            publish,
        };
        tokio::spawn(actor.run(rx));
        (tx, watch_rx)
    }

    async fn run(mut self, mut rx: mpsc::Receiver<Command>) {
        loop {
            let wait = self
                .snapshot
                .deadline
                .map(|d| Duration::from_secs_f64((d - self.hub.now()).max(0.0)));
            tokio::select! {
                cmd = rx.recv() => match cmd {
                    Some(cmd) => self.handle(cmd),
                    None => break,
                },
                _ = tokio::time::sleep(wait.unwrap_or(Duration::ZERO)), if wait.is_some() => {
                    if let Err(e) = self.apply(WorkflowEvent::TimerElapsed) {
                        log::error!("timer transition rejected: {}", e.message);
                    }
                }
            }
        }
    }

    fn handle(&mut self, cmd: Command) {
        let (result, reply) = match cmd {
            Command::Start(r) => (self.apply(WorkflowEvent::Start), r),
            Command::Submit(answers, r) => (self.apply(WorkflowEvent::StepCompleted { answers }), r),
            Command::Abort(r) => (self.apply(WorkflowEvent::Abort), r),
            Command::Editor { kind, label, reply } => (self.editor(&kind, &label), reply),
        };
        let _ = reply.send(result);
    }

    fn apply(&mut self, event: WorkflowEvent) -> Result<(), ApiError> {
        let now = self.hub.now();
        let before = &self.snapshot.state;
        let (next, markers) = advance(before, &event, now)?;
        let phase_changed = next.current != before.current;
        let responses_before = before.responses.len();
        let was_terminal = before.is_terminal();
        if event == WorkflowEvent::Start {
            let meta = SessionMeta {
                session_id: self.snapshot.session_id.clone(),
                participant_id: self.config.participant_id.clone(),
                started_at: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs()),
            };
            self.hub
                .start_recording(meta)
                .map_err(|e| ApiError::conflict(format!("cannot start recording: {e}")))?;
            self.snapshot.recording_since = Some(now);
        }
        if phase_changed {
            self.close_view(now);
        }
        for m in &markers {
            self.hub.log_event(m.receiver_time, &m.kind, &m.label);
        }
        if let Some(rec) = self.hub.recording() {
            for r in &next.responses[responses_before..] {
                rec.log_response(&r.step_id, &r.item_id, &r.value);
            }
        }
        self.snapshot.state = next;
        if phase_changed {
            self.enter_phase(now);
        }
        if self.snapshot.state.is_terminal() && !was_terminal {
            self.finalize();
        }
        self.snapshot.deadline = self.deadline();
        self.publish();
        Ok(())
    }

    fn deadline(&self) -> Option<f64> {
        let s = &self.snapshot.state;
        Some(s.activated_at? + s.active_phase()?.timer_s()? / self.scale)
    }

    fn enter_phase(&mut self, now: f64) {
        let Some(PhaseKind::Task { task, .. }) = self.snapshot.state.active_phase().map(|p| p.kind.clone()) else {
            return;
        };
        if let Some(file) = self.config.workflow.tasks.get(&task).and_then(|t| t.files.first()) {
            self.hub.log_event(now, OPEN_FILE, file);
            self.view = Some(file.clone());
        }
    }

    fn close_view(&mut self, now: f64) {
        if let Some(file) = self.view.take() {
            self.hub.log_event(now, CLOSE_FILE, &file);
        }
    }

    fn editor(&mut self, kind: &str, label: &str) -> Result<(), ApiError> {
        if self.hub.recording().is_none() {
            return Err(ApiError::conflict("nothing is being recorded"));
        }
        let now = self.hub.now();
        match kind {
            OPEN_FILE => {
                if !self.config.corpus_dir.join(label).is_file() {
                    return Err(ApiError::bad_request(format!("{label} is not in the corpus")));
                }
                self.close_view(now);
                self.hub.log_event(now, OPEN_FILE, label);
                self.view = Some(label.to_string());
            }
            CLOSE_FILE => self.close_view(now),
            SCROLL => {
                if self.view.is_none() {
                    return Err(ApiError::conflict("scroll with no file open"));
                }
                let line: usize = label
                    .trim()
                    .parse()
                    .map_err(|_| ApiError::bad_request(format!("scroll label {label:?} is not a line number")))?;
                self.hub.log_event(now, SCROLL, &line.to_string());
            }
            other => return Err(ApiError::bad_request(format!("unknown editor event {other:?}"))),
        }
        Ok(())
    }

    fn finalize(&mut self) {
        let Some(rec) = self.hub.stop_recording() else {
            return;
        };
        let dir = unused_dir(&self.config.output_dir.join(&self.snapshot.session_id));
        let result = rec
            .finalize(&dir)
            .map_err(|e| e.to_string())
            .and_then(|_| {
                write_session_extras(&dir, &self.config.settings, &self.config.corpus_dir, &self.snapshot.state)
                    .map_err(|e| e.to_string())
            });
        match result {
            Ok(()) => {
                log::info!("session written to {}", dir.display());
                self.snapshot.session_dir = Some(dir);
            }
            Err(e) => {
                log::error!("finalizing {} failed: {e}", dir.display());
                self.snapshot.finalize_error = Some(e);
            }
        }
    }

    fn publish(&self) {
        self.publish.send_replace(Arc::new(self.snapshot.clone()));
    }
}

/// `dir`, or `dir-2`, `dir-3`, ... when it already exists.
fn unused_dir(dir: &Path) -> PathBuf {
    if !dir.exists() {
        return dir.to_path_buf();
    }
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    (2..)
        .map(|i| dir.with_file_name(format!("{name}-{i}")))
        .find(|d| !d.exists())
        .expect("some suffix is free")
}
