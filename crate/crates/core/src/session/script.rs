//! Scripted participant behaviour for headless recordings.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SessionError;
use crate::workflow::{Answers, Phase};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScriptAction {
    Complete { answers: Answers },
    Abort,
    OpenFile { file: String },
    /// Closes the open file.
    CloseFile,
    Scroll { line: usize },
    /// Hold the gaze on a cell of the open file.
    Look { line: usize, col: usize, duration_s: f64 },
}

/// `action` fires `after` seconds once phase `phase` is active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedEvent {
    pub phase: String,
    pub after: f64,
    pub action: ScriptAction,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvent {
    phase: String,
    after: f64,
    action: String,
    #[serde(default)]
    answers: Answers,
    file: Option<String>,
    line: Option<usize>,
    col: Option<usize>,
    duration_s: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScript {
    #[serde(default)]
    events: Vec<RawEvent>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventScript {
    /// In file order; events of one phase fire in `after` order, ties in
    /// file order.
    pub events: Vec<ScriptedEvent>,
}

impl RawEvent {
    fn into_event(self) -> Result<ScriptedEvent, String> {
        let need = |v: Option<usize>, name: &str| v.ok_or_else(|| format!("{} needs `{name}`", self.action));
        let action = match self.action.as_str() {
            "complete" => ScriptAction::Complete {
                answers: self.answers.clone(),
            },
            "abort" => ScriptAction::Abort,
            "open_file" => ScriptAction::OpenFile {
                file: self.file.clone().ok_or("open_file needs `file`")?,
            },
            "close_file" => ScriptAction::CloseFile,
            "scroll" => ScriptAction::Scroll {
                line: need(self.line, "line")?,
            },
            "look" => {
                let duration_s = self.duration_s.ok_or("look needs `duration_s`")?;
                if !(duration_s.is_finite() && duration_s > 0.0) {
                    return Err(format!("look duration {duration_s} must be positive"));
                }
                ScriptAction::Look {
                    line: need(self.line, "line")?,
                    col: need(self.col, "col")?,
                    duration_s,
                }
            }
            other => return Err(format!("unknown action {other:?}")),
        };
        if !(self.after.is_finite() && self.after >= 0.0) {
            return Err(format!("after = {} must be non-negative", self.after));
        }
        Ok(ScriptedEvent {
            phase: self.phase,
            after: self.after,
            action,
        })
    }
}

impl EventScript {
    pub fn parse(text: &str) -> Result<Self, SessionError> {
        let raw: RawScript = toml::from_str(text).map_err(|e| SessionError::Script(vec![e.to_string()]))?;
        let mut events = Vec::new();
        let mut problems = Vec::new();
        for (i, r) in raw.events.into_iter().enumerate() {
            let phase = r.phase.clone();
            match r.into_event() {
                Ok(e) => events.push(e),
                Err(p) => problems.push(format!("event {} ({phase}): {p}", i + 1)),
            }
        }
        if problems.is_empty() {
            Ok(EventScript { events })
        } else {
            Err(SessionError::Script(problems))
        }
    }

    pub fn load(path: &Path) -> Result<Self, SessionError> {
        let text = std::fs::read_to_string(path).map_err(|e| SessionError::io(path, e))?;
        Self::parse(&text)
    }

    /// Every event must name a phase of `plan`.
    pub fn check(&self, plan: &[Phase]) -> Result<(), SessionError> {
        let ids: HashSet<&str> = plan.iter().map(|p| p.id.as_str()).collect();
        let problems: Vec<String> = self
            .events
            .iter()
            .enumerate()
            .filter(|(_, e)| !ids.contains(e.phase.as_str()))
            .map(|(i, e)| format!("event {}: no phase {:?} in the workflow", i + 1, e.phase))
            .collect();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(SessionError::Script(problems))
        }
    }

    /// Events for `phase`, ordered by `after`.
    pub fn for_phase<'a>(&'a self, phase: &str) -> Vec<&'a ScriptedEvent> {
        let mut out: Vec<&ScriptedEvent> = self.events.iter().filter(|e| e.phase == phase).collect();
        out.sort_by(|a, b| a.after.total_cmp(&b.after));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workflow::Answer;

    #[test]
    fn parses_actions_and_reports_all_problems() {
        let s = EventScript::parse(
            r#"
            [[events]]
            phase = "pre"
            after = 1.5
            action = "complete"
            answers = { age = 30, role = "dev" }
            [[events]]
            phase = "t"
            after = 0
            action = "look"
            line = 3
            col = 4
            duration_s = 1
            "#,
        )
        .unwrap();
        assert_eq!(s.events.len(), 2);
        let ScriptAction::Complete { answers } = &s.events[0].action else { panic!() };
        assert_eq!(answers["age"], Answer::Number(30.0));
        assert_eq!(answers["role"], Answer::Text("dev".into()));

        let e = EventScript::parse(
            r#"
            [[events]]
            phase = "t"
            after = 0
            action = "look"
            line = 3
            [[events]]
            phase = "t"
            after = -1
            action = "dance"
            "#,
        )
        .unwrap_err();
        let SessionError::Script(p) = e else { panic!() };
        assert_eq!(p.len(), 2);
        assert!(p[1].contains("dance"));
    }

    #[test]
    fn for_phase_is_stable() {
        let s = EventScript::parse(
            r#"
            [[events]]
            phase = "t"
            after = 2
            action = "abort"
            [[events]]
            phase = "t"
            after = 1
            action = "scroll"
            line = 10
            [[events]]
            phase = "t"
            after = 1
            action = "close_file"
            "#,
        )
        .unwrap();
        let got: Vec<_> = s.for_phase("t").iter().map(|e| e.action.clone()).collect();
        assert_eq!(got, [ScriptAction::Scroll { line: 10 }, ScriptAction::CloseFile, ScriptAction::Abort]);
    }
}
