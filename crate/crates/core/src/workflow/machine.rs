//! Pure workflow state machine. Each transition returns the new state and the
//! start/stop markers it emits for the recorder.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::questionnaire::{score_nasa_tlx, Answers, NasaTlxResponse, QuestionnaireSpec, NASA_TLX_ID};
use super::{Phase, PhaseKind, Workflow, WorkflowError};
use crate::recorder::{EventRecord, ResponseRecord};

pub const MARKER_START: &str = "start";
pub const MARKER_STOP: &str = "stop";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Pending,
    Active,
    Done,
    /// Was active when the session was aborted.
    Interrupted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WorkflowEvent {
    Start,
    StepCompleted {
        #[serde(default)]
        answers: Answers,
    },
    TimerElapsed,
    Abort,
}

impl WorkflowEvent {
    fn name(&self) -> &'static str {
        match self {
            WorkflowEvent::Start => "start",
            WorkflowEvent::StepCompleted { .. } => "step_completed",
            WorkflowEvent::TimerElapsed => "timer_elapsed",
            WorkflowEvent::Abort => "abort",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkflowState {
    pub workflow_id: String,
    pub seed: u64,
    pub phases: Vec<Phase>,
    pub status: Vec<StepStatus>,
    pub current: Option<usize>,
    /// Receiver time at which the current phase became active.
    pub activated_at: Option<f64>,
    pub started: bool,
    pub finished: bool,
    pub aborted: bool,
    pub responses: Vec<ResponseRecord>,
    pub markers: Vec<EventRecord>,
    #[serde(skip)]
    questionnaires: IndexMap<String, QuestionnaireSpec>,
}

impl WorkflowState {
    /// Everything pending; a `Start` event activates the first phase.
    pub fn new(workflow: &Workflow, seed: u64) -> Self {
        let phases = workflow.plan(seed);
        WorkflowState {
            workflow_id: workflow.id.clone(),
            seed,
            status: vec![StepStatus::Pending; phases.len()],
            phases,
            current: None,
            activated_at: None,
            started: false,
            finished: false,
            aborted: false,
            responses: Vec::new(),
            markers: Vec::new(),
            questionnaires: workflow.questionnaires.clone(),
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.finished || self.aborted
    }

    pub fn active_phase(&self) -> Option<&Phase> {
        self.current.map(|i| &self.phases[i])
    }

    /// When the active phase's timer runs out.
    pub fn deadline(&self) -> Option<f64> {
        Some(self.activated_at? + self.active_phase()?.timer_s()?)
    }

    pub fn questionnaire(&self, id: &str) -> Option<&QuestionnaireSpec> {
        self.questionnaires.get(id)
    }

    pub fn describe(&self) -> String {
        if self.aborted {
            "aborted".into()
        } else if self.finished {
            "finished".into()
        } else if let Some(p) = self.active_phase() {
            format!("{} is active", p.label())
        } else {
            "pending".into()
        }
    }

    fn marker(&mut self, out: &mut Vec<EventRecord>, now: f64, kind: &str, i: usize) {
        let m = EventRecord {
            receiver_time: now,
            kind: kind.to_string(),
            label: self.phases[i].label(),
        };
        self.markers.push(m.clone());
        out.push(m);
    }

    fn activate(&mut self, i: usize, now: f64, out: &mut Vec<EventRecord>) {
        self.status[i] = StepStatus::Active;
        self.current = Some(i);
        self.activated_at = Some(now);
        self.marker(out, now, MARKER_START, i);
    }

    fn complete(&mut self, i: usize, now: f64, out: &mut Vec<EventRecord>) {
        self.status[i] = StepStatus::Done;
        self.marker(out, now, MARKER_STOP, i);
        if i + 1 < self.phases.len() {
            self.activate(i + 1, now, out);
        } else {
            self.current = None;
            self.activated_at = None;
            self.finished = true;
        }
    }

    fn record_answers(&mut self, i: usize, answers: &Answers) -> Result<(), WorkflowError> {
        let phase = &self.phases[i];
        let mut records: Vec<ResponseRecord> = answers
            .iter()
            .map(|(k, v)| ResponseRecord {
                step_id: phase.id.clone(),
                item_id: k.clone(),
                value: v.render(),
            })
            .collect();
        if let PhaseKind::Questionnaire { questionnaire } = &phase.kind {
            let spec = self
                .questionnaires
                .get(questionnaire)
                .ok_or_else(|| WorkflowError::InvalidPayload(format!("unknown questionnaire {questionnaire}")))?;
            spec.check(answers)?;
            if questionnaire == NASA_TLX_ID {
                let raw = score_nasa_tlx(&NasaTlxResponse::from_answers(answers)?)?;
                records.push(ResponseRecord {
                    step_id: phase.id.clone(),
                    item_id: "raw_tlx".into(),
                    value: raw.to_string(),
                });
            }
        }
        self.responses.extend(records);
        Ok(())
    }
}

/// Applies `event` at receiver time `now`. Rejected events leave `state`
/// untouched; after a terminal state only `Abort` is accepted, as a no-op.
pub fn advance(
    state: &WorkflowState,
    event: &WorkflowEvent,
    now: f64,
) -> Result<(WorkflowState, Vec<EventRecord>), WorkflowError> {
    let illegal = || WorkflowError::IllegalTransition {
        event: event.name().to_string(),
        state: state.describe(),
    };
    let mut next = state.clone();
    let mut out = Vec::new();
    if state.is_terminal() {
        return match event {
            WorkflowEvent::Abort => Ok((next, out)),
            _ => Err(illegal()),
        };
    }
    let Some(i) = state.current else {
        match event {
            WorkflowEvent::Start if !state.started && !state.phases.is_empty() => {
                next.started = true;
                next.activate(0, now, &mut out);
            }
            WorkflowEvent::Abort => next.aborted = true,
            _ => return Err(illegal()),
        }
        return Ok((next, out));
    };
    let phase = &state.phases[i];
    match event {
        WorkflowEvent::Start => return Err(illegal()),
        WorkflowEvent::StepCompleted { answers } => match phase.kind {
            PhaseKind::Questionnaire { .. } | PhaseKind::Task { .. } => {
                next.record_answers(i, answers)?;
                next.complete(i, now, &mut out);
            }
            PhaseKind::RelaxationVideo { .. } | PhaseKind::Baseline { .. } => return Err(illegal()),
        },
        WorkflowEvent::TimerElapsed => {
            if phase.timer_s().is_none() {
                return Err(illegal());
            }
            next.complete(i, now, &mut out);
        }
        WorkflowEvent::Abort => {
            next.status[i] = StepStatus::Interrupted;
            next.marker(&mut out, now, MARKER_STOP, i);
            next.current = None;
            next.activated_at = None;
            next.aborted = true;
        }
    }
    Ok((next, out))
}

/// Receiver-time interval of the first baseline phase in a marker log.
pub fn baseline_interval(events: &[EventRecord]) -> Option<(f64, f64)> {
    let start = events
        .iter()
        .find(|e| e.kind == MARKER_START && e.label.starts_with("baseline:"))?;
    let stop = events
        .iter()
        .find(|e| e.kind == MARKER_STOP && e.label == start.label && e.receiver_time >= start.receiver_time)?;
    Some((start.receiver_time, stop.receiver_time))
}
