use serde::{Deserialize, Serialize};

use crate::code::EditorGeometry;
use crate::recorder::EventRecord;

pub const OPEN_FILE: &str = "open_file";
pub const CLOSE_FILE: &str = "close_file";
/// Label is the new first visible line.
pub const SCROLL: &str = "scroll";

/// The file shown in the editor and how it is laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditorView {
    pub file: String,
    pub geometry: EditorGeometry,
}

/// Editor state over time, rebuilt from the session event log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ViewTimeline {
    /// Sorted by time; `None` means no file is open.
    changes: Vec<(f64, Option<EditorView>)>,
}

impl ViewTimeline {
    /// A single file open for the whole session.
    pub fn fixed(view: EditorView) -> Self {
        ViewTimeline {
            changes: vec![(f64::NEG_INFINITY, Some(view))],
        }
    }

    /// Replays `open_file`, `close_file` and `scroll` events. Other kinds
    /// are ignored; a close for a file that is not open is ignored.
    pub fn from_events(events: &[EventRecord], geometry: EditorGeometry) -> Self {
        let mut sorted: Vec<&EventRecord> = events.iter().collect();
        sorted.sort_by(|a, b| a.receiver_time.total_cmp(&b.receiver_time));
        let mut current: Option<EditorView> = None;
        let mut changes = Vec::new();
        for e in sorted {
            let next = match e.kind.as_str() {
                OPEN_FILE => Some(EditorView {
                    file: e.label.clone(),
                    geometry,
                }),
                CLOSE_FILE if current.as_ref().is_some_and(|v| v.file == e.label) => None,
                SCROLL => match (current.clone(), e.label.trim().parse::<usize>()) {
                    (Some(mut v), Ok(line)) => {
                        v.geometry.first_visible_line = line;
                        Some(v)
                    }
                    _ => continue,
                },
                _ => continue,
            };
            current = next.clone();
            changes.push((e.receiver_time, next));
        }
        ViewTimeline { changes }
    }

    pub fn at(&self, t: f64) -> Option<&EditorView> {
        let i = self.changes.partition_point(|(at, _)| *at <= t);
        i.checked_sub(1).and_then(|i| self.changes[i].1.as_ref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(t: f64, kind: &str, label: &str) -> EventRecord {
        EventRecord {
            receiver_time: t,
            kind: kind.into(),
            label: label.into(),
        }
    }

    #[test]
    fn replays_open_scroll_close() {
        let tl = ViewTimeline::from_events(
            &[
                ev(5.0, CLOSE_FILE, "a"),
                ev(1.0, OPEN_FILE, "a"),
                ev(2.0, SCROLL, "40"),
                ev(3.0, "start", "task:t1"),
                ev(6.0, OPEN_FILE, "b"),
                ev(7.0, CLOSE_FILE, "a"),
            ],
            EditorGeometry::default(),
        );
        assert!(tl.at(0.5).is_none());
        assert_eq!(tl.at(1.5).unwrap().geometry.first_visible_line, 0);
        assert_eq!(tl.at(2.0).unwrap().geometry.first_visible_line, 40);
        assert!(tl.at(5.5).is_none());
        assert_eq!(tl.at(7.5).unwrap().file, "b");
    }
}
