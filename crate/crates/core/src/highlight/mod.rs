//! Scriptable code highlighting: a small expression language evaluated over
//! the metric table, a color palette and heatmap exports.

mod eval;
mod palette;
mod render;
mod script;

pub use eval::{evaluate, EvalOptions, HighlightEntry, HighlightMap};
pub use palette::{color_for_score, Palette, Rgba};
pub use render::{render_heatmap, HeatmapExport, OverlayRow};
pub use script::{parse_script, BinOp, Expr, Func, ScoreScript, ScriptError, ScriptErrorKind};

/// Scores symbols by how long they were looked at.
pub const DEFAULT_SCRIPT: &str = "norm(gaze_duration_ms)";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HighlightError {
    #[error("script error at {0}")]
    Script(#[from] ScriptError),
    #[error("metric table is empty")]
    EmptyTable,
    #[error("division by zero for symbol {symbol}")]
    DivisionByZero { symbol: String },
    #[error("log of non-positive value {value} for symbol {symbol}")]
    LogDomain { symbol: String, value: f64 },
    #[error("non-finite intermediate value for symbol {symbol}")]
    NonFinite { symbol: String },
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("palette needs at least one anchor and a positive max_alpha")]
    InvalidPalette,
    #[error("export: {0}")]
    Io(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::SourceCorpus;
    use crate::physio::{MetricRow, MetricTable};

    fn row(id: &str, file: &str, dwell: f64) -> MetricRow {
        MetricRow {
            symbol_id: id.into(),
            file: file.into(),
            gaze_duration_ms: dwell,
            ..MetricRow::default()
        }
    }

    fn default_eval(t: &MetricTable) -> HighlightMap {
        evaluate(&parse_script(DEFAULT_SCRIPT).unwrap(), t, &EvalOptions::default()).unwrap()
    }

    #[test]
    fn default_script_examples() {
        let t = MetricTable::from_rows(vec![row("A", "f", 500.0), row("B", "f", 1500.0)]);
        let m = default_eval(&t);
        assert_eq!((m.score("A"), m.score("B")), (Some(0.0), Some(1.0)));
        assert!(m.warnings.is_empty());
        let m = default_eval(&MetricTable::from_rows(vec![row("A", "f", 42.0)]));
        assert_eq!(m.score("A"), Some(0.5));
    }

    #[test]
    fn missing_values_warn_and_guards_name_symbols() {
        let mut a = row("A", "f", 100.0);
        a.theta_power = Some(2.0);
        let t = MetricTable::from_rows(vec![a, row("B", "f", 300.0)]);
        let m = evaluate(&parse_script("norm(theta_power)").unwrap(), &t, &EvalOptions::default()).unwrap();
        assert_eq!(m.warnings, ["B: theta_power missing, read as 0"]);
        assert_eq!((m.score("A"), m.score("B")), (Some(1.0), Some(0.0)));

        let e = evaluate(&parse_script("1 / theta_power").unwrap(), &t, &EvalOptions::default()).unwrap_err();
        assert_eq!(e, HighlightError::DivisionByZero { symbol: "B".into() });
        let e = evaluate(&parse_script("log(theta_power)").unwrap(), &t, &EvalOptions::default()).unwrap_err();
        assert!(matches!(e, HighlightError::LogDomain { ref symbol, .. } if symbol == "B"));
        let ok = evaluate(&parse_script("gaze_duration_ms / max(theta_power, 1e-9)").unwrap(), &t, &EvalOptions::default());
        assert!(ok.is_ok());
        assert_eq!(
            evaluate(&parse_script("1").unwrap(), &MetricTable::default(), &EvalOptions::default()),
            Err(HighlightError::EmptyTable)
        );
    }

    #[test]
    fn scores_are_clamped_and_per_file_switch_works() {
        let t = MetricTable::from_rows(vec![row("a1", "a", 1.0), row("a2", "a", 2.0), row("b1", "b", 10.0), row("b2", "b", 30.0)]);
        let m = evaluate(&parse_script("gaze_duration_ms - 5").unwrap(), &t, &EvalOptions::default()).unwrap();
        assert_eq!(m.entries.iter().map(|e| e.score).collect::<Vec<_>>(), [0.0, 0.0, 1.0, 1.0]);
        let script = parse_script(DEFAULT_SCRIPT).unwrap();
        let session = evaluate(&script, &t, &EvalOptions::default()).unwrap();
        assert!(session.score("a2").unwrap() < 0.05);
        let per_file = evaluate(&script, &t, &EvalOptions { per_file: true, ..EvalOptions::default() }).unwrap();
        assert_eq!((per_file.score("a1"), per_file.score("a2")), (Some(0.0), Some(1.0)));
        assert_eq!((per_file.score("b1"), per_file.score("b2")), (Some(0.0), Some(1.0)));
    }

    fn corpus() -> SourceCorpus {
        SourceCorpus::from_files([("A.java", "class A {\n  int x;\n}\n")], 4).unwrap()
    }

    #[test]
    fn render_examples() {
        let c = corpus();
        let p = Palette::default();
        let empty = render_heatmap(&HighlightMap::default(), &c, &p, "t");
        assert!(empty.overlay.is_empty());
        assert!(!empty.html.contains("class=\"hl"));
        assert!(empty.html.contains("class A {"));

        let t = MetricTable::from_rows(vec![row("A.java:line:1:0", "A.java", 10.0), row("Nope.java:line:0:0", "Nope.java", 5.0)]);
        let m = evaluate(&parse_script("gaze_duration_ms / 10").unwrap(), &t, &EvalOptions::default()).unwrap();
        let out = render_heatmap(&m, &c, &p, "t");
        assert_eq!(out.html.matches("class=\"hl").count(), 1);
        assert_eq!(out.overlay.len(), 1);
        assert_eq!((out.overlay[0].start_line, out.overlay[0].rgba_hex.as_str()), (1, "#ff0000ff"));
        assert_eq!(out.diagnostics, ["symbol Nope.java:line:0:0 is not in the corpus"]);
        assert!(out.html.contains("Nope.java:line:0:0 is not in the corpus"));

        let mut csv = Vec::new();
        out.write_overlay_csv(&mut csv).unwrap();
        assert_eq!(
            String::from_utf8(csv).unwrap(),
            "file,start_line,start_col,end_line,end_col,score,rgba_hex\nA.java,1,0,1,8,1.0,#ff0000ff\n"
        );
    }

    #[test]
    fn html_escapes_source() {
        let c = SourceCorpus::from_files([("B.java", "class B { boolean f() { return 1 < 2 && 3 > 2; } }\n")], 4).unwrap();
        let out = render_heatmap(&HighlightMap::default(), &c, &Palette::default(), "<b>");
        assert!(out.html.contains("1 &lt; 2 &amp;&amp; 3 &gt; 2"));
        assert!(out.html.contains("<title>&lt;b&gt;</title>"));
    }
}
