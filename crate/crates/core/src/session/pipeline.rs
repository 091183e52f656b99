//! Session directory to metric table and heatmap. Every function here is a
//! pure function of its inputs, so a finalized directory always analyzes to
//! the same bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HighlightConfig, SessionError};
use crate::code::{EditorGeometry, SourceCorpus, DEFAULT_TAB_WIDTH};
use crate::gaze::{session_hits, GazeConfig, SymbolHit, ViewTimeline};
use crate::highlight::{
    evaluate, parse_script, render_heatmap, EvalOptions, HeatmapExport, HighlightError, HighlightMap, Palette,
};
use crate::physio::{build_metric_table, ExtractorRegistry, MetricContext, MetricParams, MetricTable};
use crate::recorder::{load_session, SessionData};
use crate::workflow::baseline_interval;

/// Analysis parameters stored next to a recording.
pub const ANALYSIS_FILE: &str = "analysis.toml";
/// Snapshot of the source corpus shown during the recording.
pub const CORPUS_DIR: &str = "corpus";
pub const METRICS_CSV: &str = "metrics.csv";
pub const OVERLAY_CSV: &str = "overlay.csv";
pub const HEATMAP_HTML: &str = "heatmap.html";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisSettings {
    pub tab_width: usize,
    pub geometry: EditorGeometry,
    pub gaze: GazeConfig,
    pub metrics: MetricParams,
    pub highlight: HighlightConfig,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            tab_width: DEFAULT_TAB_WIDTH,
            geometry: EditorGeometry::default(),
            gaze: GazeConfig::default(),
            metrics: MetricParams::default(),
            highlight: HighlightConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub hits: Vec<SymbolHit>,
    pub table: MetricTable,
}

/// Fixations mapped through the editor view log, then aggregated per symbol.
/// The pupil baseline is the workflow's first baseline phase.
pub fn analyze_session(
    data: &SessionData,
    corpus: &SourceCorpus,
    settings: &AnalysisSettings,
    registry: &ExtractorRegistry,
) -> Result<Analysis, SessionError> {
    let timeline = ViewTimeline::from_events(&data.events, settings.geometry);
    let hits = session_hits(data, corpus, &timeline, &settings.gaze)?;
    let ctx = MetricContext {
        session: data,
        baseline: baseline_interval(&data.events),
        params: &settings.metrics,
    };
    let table = build_metric_table(&hits, &ctx, registry)?;
    Ok(Analysis { hits, table })
}

/// Scores `table` with `script` and renders it over `corpus`. An empty table
/// renders the corpus uncolored.
pub fn render_session_heatmap(
    table: &MetricTable,
    corpus: &SourceCorpus,
    script: &str,
    per_file: bool,
    title: &str,
) -> Result<HeatmapExport, SessionError> {
    let script = parse_script(script).map_err(HighlightError::from)?;
    let options = EvalOptions {
        per_file,
        palette: Palette::default(),
    };
    let map = if table.is_empty() {
        HighlightMap::default()
    } else {
        evaluate(&script, table, &options)?
    };
    Ok(render_heatmap(&map, corpus, &options.palette, title))
}

/// A finalized recording with its analysis settings and corpus snapshot.
#[derive(Debug, Clone)]
pub struct SessionDir {
    pub path: PathBuf,
    pub data: SessionData,
    pub settings: AnalysisSettings,
    pub corpus: SourceCorpus,
}

impl SessionDir {
    /// Missing settings fall back to defaults; a missing corpus snapshot
    /// means an empty corpus.
    pub fn open(dir: &Path) -> Result<Self, SessionError> {
        let data = load_session(dir)?;
        let settings_path = dir.join(ANALYSIS_FILE);
        let settings = if settings_path.is_file() {
            let text = fs::read_to_string(&settings_path).map_err(|e| SessionError::io(&settings_path, e))?;
            toml::from_str(&text).map_err(|e| SessionError::Config(vec![format!("{}: {e}", settings_path.display())]))?
        } else {
            AnalysisSettings::default()
        };
        let corpus_dir = dir.join(CORPUS_DIR);
        let corpus = if corpus_dir.is_dir() {
            SourceCorpus::load(&corpus_dir, settings.tab_width)?
        } else {
            SourceCorpus::from_files(Vec::<(String, String)>::new(), settings.tab_width)?
        };
        Ok(SessionDir {
            path: dir.to_path_buf(),
            data,
            settings,
            corpus,
        })
    }

    pub fn analyze(&self) -> Result<Analysis, SessionError> {
        analyze_session(&self.data, &self.corpus, &self.settings, &ExtractorRegistry::with_builtins())
    }

    /// `script` overrides the stored highlight script.
    pub fn heatmap(&self, table: &MetricTable, script: Option<&str>) -> Result<HeatmapExport, SessionError> {
        let h = &self.settings.highlight;
        render_session_heatmap(
            table,
            &self.corpus,
            script.unwrap_or(&h.script),
            h.per_file,
            &format!("Session {}", self.data.meta.session_id),
        )
    }
}

pub fn analyze_dir(dir: &Path) -> Result<MetricTable, SessionError> {
    Ok(SessionDir::open(dir)?.analyze()?.table)
}

pub fn heatmap_dir(dir: &Path, script: Option<&str>) -> Result<HeatmapExport, SessionError> {
    let session = SessionDir::open(dir)?;
    let analysis = session.analyze()?;
    session.heatmap(&analysis.table, script)
}

/// Writes `overlay.csv` and `heatmap.html` into `out`.
pub fn write_heatmap(export: &HeatmapExport, out: &Path) -> Result<(), SessionError> {
    fs::create_dir_all(out).map_err(|e| SessionError::io(out, e))?;
    let mut csv = Vec::new();
    export.write_overlay_csv(&mut csv)?;
    let overlay = out.join(OVERLAY_CSV);
    fs::write(&overlay, csv).map_err(|e| SessionError::io(&overlay, e))?;
    let html = out.join(HEATMAP_HTML);
    fs::write(&html, &export.html).map_err(|e| SessionError::io(&html, e))?;
    Ok(())
}
