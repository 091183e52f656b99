//! Fixation detection, fixation-to-symbol mapping and physiological window
//! attachment.

mod idt;
mod view;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::code::{Granularity, SourceCorpus};
use crate::recorder::{SessionData, StreamData};
use crate::stream::Modality;

pub use idt::{detect_fixations, dispersion, TIME_EPSILON};
pub use view::{EditorView, ViewTimeline, CLOSE_FILE, OPEN_FILE, SCROLL};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GazeError {
    #[error("gaze samples are not time-ordered at index {0}")]
    Unordered(usize),
    #[error("non-finite timestamp at index {0}")]
    NonFiniteTime(usize),
    #[error("fixation parameters must be strictly positive")]
    InvalidParams,
    #[error("gaze stream {0:?} lacks x/y channels")]
    MissingChannels(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FixationParams {
    pub dispersion_px: f64,
    pub min_duration_s: f64,
    pub max_gap_s: f64,
}

impl Default for FixationParams {
    fn default() -> Self {
        FixationParams {
            dispersion_px: 50.0,
            min_duration_s: 0.10,
            max_gap_s: 0.075,
        }
    }
}

impl FixationParams {
    pub fn validate(&self) -> Result<(), GazeError> {
        let ok = [self.dispersion_px, self.min_duration_s, self.max_gap_s]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        ok.then_some(()).ok_or(GazeError::InvalidParams)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl GazePoint {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        GazePoint { t, x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    pub start: f64,
    pub duration: f64,
    pub x: f64,
    pub y: f64,
    pub sample_count: usize,
    /// Index range of the member samples in the detector input.
    #[serde(skip)]
    pub first_index: usize,
}

impl Fixation {
    pub fn end(&self) -> f64 {
        self.start + self.duration
    }
}

/// Samples of one non-gaze stream that fall inside a hit's time window.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysioWindow {
    pub source_id: String,
    pub modality: Modality,
    pub start: f64,
    pub end: f64,
    pub range: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolHit {
    pub fixation: Fixation,
    pub file: Option<String>,
    /// Cell under the centroid when it lies in the viewport.
    pub cell: Option<(usize, usize)>,
    pub symbol_id: Option<String>,
    pub windows: Vec<PhysioWindow>,
}

/// Gaze points from the `x`/`y` channels of a gaze stream.
pub fn gaze_points(stream: &StreamData) -> Result<Vec<GazePoint>, GazeError> {
    let missing = || GazeError::MissingChannels(stream.info.source_id.clone());
    let xs = stream.channel("x").ok_or_else(missing)?;
    let ys = stream.channel("y").ok_or_else(missing)?;
    Ok(stream
        .timestamps
        .iter()
        .zip(xs.iter().zip(ys))
        .map(|(&t, (&x, &y))| GazePoint::new(t, x as f64, y as f64))
        .collect())
}

/// Composes pixel-to-cell and symbol lookup for the view active at the
/// fixation start. Fixations that miss the viewport keep `symbol_id = None`.
pub fn map_fixation(
    fixation: &Fixation,
    view: Option<&EditorView>,
    corpus: &SourceCorpus,
    granularity: Granularity,
) -> SymbolHit {
    let mut hit = SymbolHit {
        fixation: *fixation,
        file: None,
        cell: None,
        symbol_id: None,
        windows: Vec::new(),
    };
    let Some(view) = view else {
        return hit;
    };
    let Some(cell) = view.geometry.cell_from_point(fixation.x, fixation.y) else {
        return hit;
    };
    hit.file = Some(view.file.clone());
    hit.cell = Some(cell);
    hit.symbol_id = corpus
        .locate(&view.file, cell.0, cell.1, granularity)
        .ok()
        .flatten()
        .map(|s| s.symbol_id.clone());
    hit
}

/// Total fixation duration per symbol; unmapped hits are skipped.
pub fn accumulate_dwell(hits: &[SymbolHit]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for h in hits {
        if let Some(id) = &h.symbol_id {
            *out.entry(id.clone()).or_insert(0.0) += h.fixation.duration;
        }
    }
    out
}

/// Attaches, per non-gaze stream, the samples with timestamps in
/// `[start - lead, start + duration + lag]`.
pub fn attach_physio_windows(hits: &mut [SymbolHit], session: &SessionData, lead_s: f64, lag_s: f64) {
    for h in hits {
        let start = h.fixation.start - lead_s;
        let end = h.fixation.end() + lag_s;
        h.windows = session
            .streams
            .values()
            .filter(|s| !matches!(s.info.modality, Modality::Gaze | Modality::Marker))
            .map(|s| PhysioWindow {
                source_id: s.info.source_id.clone(),
                modality: s.info.modality,
                start,
                end,
                range: s.range(start, end),
            })
            .collect();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GazeConfig {
    #[serde(flatten)]
    pub fixation: FixationParams,
    pub granularity: Granularity,
    pub lead_s: f64,
    pub lag_s: f64,
}

impl Default for GazeConfig {
    fn default() -> Self {
        GazeConfig {
            fixation: FixationParams::default(),
            granularity: Granularity::Line,
            lead_s: 0.0,
            lag_s: 1.0,
        }
    }
}

/// Detects fixations on every gaze stream of `session`, maps them through
/// the view timeline and attaches physiological windows. Hits are ordered by
/// fixation start.
pub fn session_hits(
    session: &SessionData,
    corpus: &SourceCorpus,
    timeline: &ViewTimeline,
    config: &GazeConfig,
) -> Result<Vec<SymbolHit>, GazeError> {
    let mut hits = Vec::new();
    for stream in session.streams_of(Modality::Gaze) {
        let points = gaze_points(stream)?;
        for f in detect_fixations(&points, &config.fixation)? {
            hits.push(map_fixation(&f, timeline.at(f.start), corpus, config.granularity));
        }
    }
    hits.sort_by(|a, b| a.fixation.start.total_cmp(&b.fixation.start));
    attach_physio_windows(&mut hits, session, config.lead_s, config.lag_s);
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{EditorGeometry, SymbolKind};
    use crate::recorder::SessionMeta;
    use crate::stream::StreamInfo;
    use indexmap::IndexMap;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fix(start: f64, duration: f64, x: f64, y: f64) -> Fixation {
        Fixation { start, duration, x, y, sample_count: 10, first_index: 0 }
    }

    fn corpus() -> SourceCorpus {
        SourceCorpus::from_files([("A.java", "class A { void f() { int x; } }\n\nint y;\n")], 4).unwrap()
    }

    fn view() -> EditorView {
        EditorView {
            file: "A.java".into(),
            geometry: EditorGeometry {
                origin_x: 100.0,
                origin_y: 50.0,
                ..EditorGeometry::default()
            },
        }
    }

    #[test]
    fn mapping_examples() {
        let c = corpus();
        let v = view();
        // "x" is at line 0, col 25 -> cell center (100 + 25*8 + 4, 50 + 8)
        let h = map_fixation(&fix(1.0, 0.2, 304.0, 58.0), Some(&v), &c, SymbolKind::Identifier);
        assert_eq!(h.symbol_id.as_deref(), Some("A.java:identifier:0:25"));
        let h = map_fixation(&fix(1.0, 0.2, 10.0, 10.0), Some(&v), &c, SymbolKind::Line);
        assert_eq!(h.symbol_id, None);
        assert_eq!(h.cell, None);
        let h = map_fixation(&fix(1.0, 0.2, 120.0, 74.0), Some(&v), &c, SymbolKind::Line);
        assert_eq!(h.symbol_id.as_deref(), Some("A.java:line:1:0"));
        let h = map_fixation(&fix(1.0, 0.2, 304.0, 58.0), None, &c, SymbolKind::Line);
        assert_eq!(h.symbol_id, None);
    }

    fn hit(id: Option<&str>, d: f64) -> SymbolHit {
        SymbolHit {
            fixation: fix(0.0, d, 0.0, 0.0),
            file: None,
            cell: None,
            symbol_id: id.map(String::from),
            windows: vec![],
        }
    }

    #[test]
    fn dwell_sums() {
        let d = accumulate_dwell(&[hit(Some("s"), 0.2), hit(Some("s"), 0.3), hit(None, 5.0)]);
        assert_eq!(d.len(), 1);
        assert!((d["s"] - 0.5).abs() < 1e-12);
        assert!(accumulate_dwell(&[]).is_empty());

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let hits: Vec<_> = (0..500)
            .map(|_| {
                let id = ["a", "b", "c", "d"][rng.random_range(0..4)];
                hit((rng.random_range(0..5) > 0).then_some(id), rng.random_range(0.1..1.0))
            })
            .collect();
        let d = accumulate_dwell(&hits);
        for (id, total) in &d {
            let brute: f64 = hits
                .iter()
                .filter(|h| h.symbol_id.as_deref() == Some(id.as_str()))
                .map(|h| h.fixation.duration)
                .sum();
            assert!((brute - total).abs() < 1e-9);
        }
    }

    fn session_with_eda(n: usize, rate: f64) -> SessionData {
        let info = StreamInfo::new("EDA", Modality::Eda, rate, vec!["gsr".into()], "eda").unwrap();
        let mut s = StreamData::empty(info);
        s.timestamps = (0..n).map(|i| i as f64 / rate).collect();
        s.channels[0] = vec![1.0; n];
        let mut streams = IndexMap::new();
        streams.insert("eda".to_string(), s);
        SessionData {
            meta: SessionMeta { session_id: "s".into(), participant_id: "p".into(), started_at: 0 },
            streams,
            events: vec![],
            responses: vec![],
        }
    }

    #[test]
    fn physio_windows() {
        let session = session_with_eda(128 * 20, 128.0);
        let mut hits = vec![hit(Some("a"), 1.0)];
        hits[0].fixation.start = 10.0;
        attach_physio_windows(&mut hits, &session, 0.0, 0.0);
        let n = hits[0].windows[0].range.len();
        assert!((127..=129).contains(&n), "{n}");

        let empty = SessionData { streams: IndexMap::new(), ..session.clone() };
        attach_physio_windows(&mut hits, &empty, 0.0, 0.0);
        assert!(hits[0].windows.is_empty());

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let mut h = vec![hit(Some("a"), rng.random_range(0.1..2.0))];
            h[0].fixation.start = rng.random_range(-1.0..21.0);
            attach_physio_windows(&mut h, &session, 0.0, 2.0);
            let w = &h[0].windows[0];
            let ts = &session.streams["eda"].timestamps;
            let brute: Vec<usize> = (0..ts.len()).filter(|&i| ts[i] >= w.start && ts[i] <= w.end).collect();
            assert_eq!(w.range.clone().collect::<Vec<_>>(), brute);
        }
    }
}
