//! HTTP API. Reads go to the latest published snapshot and the ingestion
//! counters; writes go through the workflow actor.

use std::convert::Infallible;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::header;
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cognitrace::code::SourceCorpus;
use cognitrace::highlight::OverlayRow;
use cognitrace::physio::ExtractorRegistry;
use cognitrace::recorder::{load_session, SessionData};
use cognitrace::session::{analyze_session, render_session_heatmap, SessionConfig};
use cognitrace::workflow::{Answers, Phase, PhaseKind, QuestionnaireSpec, StepStatus, TaskKind};
use futures::Stream;
use serde::{Deserialize, Serialize};
use tokio::sync::{mpsc, oneshot, watch};

use crate::actor::{Command, WorkflowSnapshot};
use crate::error::ApiError;
use crate::live::{Hub, StreamStatus};

/// Status ticks on the event stream.
pub const STATUS_INTERVAL: Duration = Duration::from_secs(1);

#[derive(Clone)]
pub struct AppState {
    pub hub: Arc<Hub>,
    pub commands: mpsc::Sender<Command>,
    pub snapshot: watch::Receiver<Arc<WorkflowSnapshot>>,
    pub config: Arc<SessionConfig>,
    pub corpus: Arc<SourceCorpus>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/status", get(get_status))
        .route("/api/status/stream", get(status_stream))
        .route("/api/step", get(get_step).post(submit_step))
        .route("/api/session/start", post(start_session))
        .route("/api/session/abort", post(abort_session))
        .route("/api/editor", post(editor_event))
        .route("/api/heatmap", get(get_heatmap))
        .with_state(state)
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseStatus {
    pub id: String,
    pub label: String,
    pub status: StepStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkflowStatus {
    pub id: String,
    pub seed: u64,
    /// pending, active, finished or aborted.
    pub state: &'static str,
    pub description: String,
    pub current: Option<usize>,
    pub phases: Vec<PhaseStatus>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionStatus {
    pub session_id: String,
    pub workflow: WorkflowStatus,
    pub streams: Vec<StreamStatus>,
    pub recording: bool,
    /// Seconds since recording began.
    pub elapsed_s: f64,
    pub session_dir: Option<String>,
    pub finalize_error: Option<String>,
}

fn state_name(s: &WorkflowSnapshot) -> &'static str {
    let w = &s.state;
    if w.aborted {
        "aborted"
    } else if w.finished {
        "finished"
    } else if w.current.is_some() {
        "active"
    } else {
        "pending"
    }
}

pub fn session_status(app: &AppState) -> SessionStatus {
    let snap = app.snapshot.borrow().clone();
    let w = &snap.state;
    let recording = app.hub.recording().is_some();
    SessionStatus {
        session_id: snap.session_id.clone(),
        workflow: WorkflowStatus {
            id: w.workflow_id.clone(),
            seed: w.seed,
            state: state_name(&snap),
            description: w.describe(),
            current: w.current,
            phases: w
                .phases
                .iter()
                .zip(&w.status)
                .map(|(p, s)| PhaseStatus {
                    id: p.id.clone(),
                    label: p.label(),
                    status: *s,
                })
                .collect(),
        },
        streams: app.hub.statuses(),
        recording,
        elapsed_s: match snap.recording_since {
            Some(t0) if recording => (app.hub.now() - t0).max(0.0),
            _ => 0.0,
        },
        session_dir: snap.session_dir.as_ref().map(|d| d.display().to_string()),
        finalize_error: snap.finalize_error.clone(),
    }
}

async fn get_status(State(app): State<AppState>) -> Json<SessionStatus> {
    Json(session_status(&app))
}

async fn status_stream(State(app): State<AppState>) -> Sse<impl Stream<Item = Result<Event, Infallible>>> {
    let ticks = futures::stream::unfold((app, tokio::time::interval(STATUS_INTERVAL)), |(app, mut every)| async move {
        every.tick().await;
        let event = Event::default()
            .event("status")
            .json_data(session_status(&app))
            .unwrap_or_else(|_| Event::default().comment("status unavailable"));
        Some((Ok(event), (app, every)))
    });
    Sse::new(ticks).keep_alive(KeepAlive::default())
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskView {
    pub id: String,
    pub kind: TaskKind,
    pub instructions: String,
    pub files: Vec<String>,
}

/// What the participant should see right now.
#[derive(Debug, Clone, Serialize)]
pub struct StepView {
    pub state: &'static str,
    pub index: Option<usize>,
    pub total: usize,
    pub phase: Option<Phase>,
    pub label: Option<String>,
    /// Seconds left on the phase timer.
    pub remaining_s: Option<f64>,
    /// Timed phases without a participant-declared end cannot be submitted.
    pub submit_enabled: bool,
    pub questionnaire: Option<QuestionnaireSpec>,
    pub task: Option<TaskView>,
}

fn step_view(app: &AppState) -> StepView {
    let snap = app.snapshot.borrow().clone();
    let w = &snap.state;
    let phase = w.active_phase().cloned();
    let (questionnaire, task, submit_enabled) = match phase.as_ref().map(|p| &p.kind) {
        Some(PhaseKind::Questionnaire { questionnaire }) => (w.questionnaire(questionnaire).cloned(), None, true),
        Some(PhaseKind::Task { task, .. }) => (
            None,
            app.config.workflow.tasks.get(task).map(|t| TaskView {
                id: t.id.clone(),
                kind: t.kind,
                instructions: t.instructions_text.clone(),
                files: t.files.clone(),
            }),
            true,
        ),
        _ => (None, None, false),
    };
    StepView {
        state: state_name(&snap),
        index: w.current,
        total: w.phases.len(),
        label: phase.as_ref().map(|p| p.label()),
        phase,
        remaining_s: snap.deadline.map(|d| (d - app.hub.now()).max(0.0)),
        submit_enabled,
        questionnaire,
        task,
    }
}

async fn get_step(State(app): State<AppState>) -> Json<StepView> {
    Json(step_view(&app))
}

async fn send(app: &AppState, make: impl FnOnce(oneshot::Sender<Result<(), ApiError>>) -> Command) -> Result<Json<StepView>, ApiError> {
    let (tx, rx) = oneshot::channel();
    app.commands
        .send(make(tx))
        .await
        .map_err(|_| ApiError::internal("workflow actor stopped"))?;
    rx.await.map_err(|_| ApiError::internal("workflow actor stopped"))??;
    Ok(Json(step_view(app)))
}

#[derive(Debug, Default, Deserialize)]
pub struct SubmitBody {
    #[serde(default)]
    pub answers: Answers,
}

async fn submit_step(State(app): State<AppState>, body: Option<Json<SubmitBody>>) -> Result<Json<StepView>, ApiError> {
    let answers = body.map(|b| b.0.answers).unwrap_or_default();
    send(&app, |r| Command::Submit(answers, r)).await
}

async fn start_session(State(app): State<AppState>) -> Result<Json<StepView>, ApiError> {
    send(&app, Command::Start).await
}

async fn abort_session(State(app): State<AppState>) -> Result<Json<StepView>, ApiError> {
    send(&app, Command::Abort).await
}

#[derive(Debug, Deserialize)]
pub struct EditorBody {
    pub kind: String,
    pub label: String,
}

async fn editor_event(State(app): State<AppState>, Json(body): Json<EditorBody>) -> Result<Json<StepView>, ApiError> {
    send(&app, |reply| Command::Editor {
        kind: body.kind,
        label: body.label,
        reply,
    })
    .await
}

#[derive(Debug, Default, Deserialize)]
pub struct HeatmapQuery {
    /// Overrides the configured script.
    pub script: Option<String>,
    /// `json` (default) or `html`.
    pub format: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HeatmapResponse {
    pub script: String,
    pub overlay: Vec<OverlayRow>,
    pub diagnostics: Vec<String>,
    /// Symbol count of the metric table the scores came from.
    pub symbols: usize,
}

/// The data so far: the live recording, else the finalized one, else nothing.
fn current_data(app: &AppState) -> Result<SessionData, ApiError> {
    if let Some(data) = app.hub.snapshot() {
        return Ok(data);
    }
    let snap = app.snapshot.borrow().clone();
    if let Some(dir) = &snap.session_dir {
        return load_session(dir).map_err(|e| ApiError::internal(e.to_string()));
    }
    Ok(SessionData {
        meta: cognitrace::recorder::SessionMeta {
            session_id: snap.session_id.clone(),
            participant_id: app.config.participant_id.clone(),
            started_at: 0,
        },
        streams: Default::default(),
        events: Vec::new(),
        responses: Vec::new(),
    })
}

async fn get_heatmap(State(app): State<AppState>, Query(q): Query<HeatmapQuery>) -> Result<Response, ApiError> {
    let data = current_data(&app)?;
    let script = q.script.unwrap_or_else(|| app.config.settings.highlight.script.clone());
    let html = match q.format.as_deref() {
        None | Some("json") => false,
        Some("html") => true,
        Some(other) => return Err(ApiError::bad_request(format!("unknown format {other:?}"))),
    };
    let corpus = app.corpus.clone();
    let settings = app.config.settings.clone();
    let s = script.clone();
    let (export, symbols) = tokio::task::spawn_blocking(move || {
        let analysis = analyze_session(&data, &corpus, &settings, &ExtractorRegistry::with_builtins())?;
        let title = format!("Session {}", data.meta.session_id);
        let export = render_session_heatmap(&analysis.table, &corpus, &s, settings.highlight.per_file, &title)?;
        Ok::<_, cognitrace::session::SessionError>((export, analysis.table.len()))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    if html {
        return Ok(([(header::CONTENT_TYPE, "text/html; charset=utf-8")], export.html).into_response());
    }
    Ok(Json(HeatmapResponse {
        script,
        overlay: export.overlay,
        diagnostics: export.diagnostics,
        symbols,
    })
    .into_response())
}
