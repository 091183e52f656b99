//! Heatmap exports: an overlay listing and a standalone HTML document.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::eval::{HighlightEntry, HighlightMap};
use super::palette::{color_for_score, Palette};
use super::HighlightError;
use crate::code::{Position, SourceCorpus, SourceFile, SymbolKind, SymbolSpan};

/// One highlighted span. Lines and columns are 0-based display positions,
/// the end exclusive, as in symbol ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRow {
    pub file: String,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
    pub score: f64,
    pub rgba_hex: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapExport {
    /// Highest score first, ties by symbol id.
    pub overlay: Vec<OverlayRow>,
    pub diagnostics: Vec<String>,
    pub html: String,
}

impl HeatmapExport {
    pub fn write_overlay_csv<W: Write>(&self, w: W) -> Result<(), HighlightError> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.overlay {
            out.serialize(r).map_err(|e| HighlightError::Io(e.to_string()))?;
        }
        if self.overlay.is_empty() {
            out.write_record(["file", "start_line", "start_col", "end_line", "end_col", "score", "rgba_hex"])
                .map_err(|e| HighlightError::Io(e.to_string()))?;
        }
        out.flush().map_err(|e| HighlightError::Io(e.to_string()))
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

/// Highlighted spans of one file with their entries.
fn file_spans<'a>(file: &SourceFile, resolved: &[(&'a HighlightEntry, &'a SymbolSpan)]) -> Vec<(&'a HighlightEntry, &'a SymbolSpan)> {
    resolved
        .iter()
        .filter(|(e, s)| s.file == file.path && e.color.a > 0)
        .copied()
        .collect()
}

/// Where spans overlap, the higher score (then the smaller id) colors a cell.
fn render_file(html: &mut String, file: &SourceFile, spans: &[(&HighlightEntry, &SymbolSpan)]) {
    let _ = writeln!(html, "<h2>{}</h2>\n<pre>", escape(&file.path));
    let better = |a: &HighlightEntry, b: &HighlightEntry| {
        a.score > b.score || (a.score == b.score && a.symbol_id < b.symbol_id)
    };
    for (ln, text) in file.lines.iter().enumerate() {
        let chars: Vec<char> = text.chars().collect();
        let line_entry = spans
            .iter()
            .filter(|(_, s)| s.kind == SymbolKind::Line && s.start.line == ln)
            .map(|(e, _)| *e)
            .reduce(|a, b| if better(b, a) { b } else { a });
        let cell_entry = |col: usize| {
            spans
                .iter()
                .filter(|(_, s)| s.kind != SymbolKind::Line && s.contains(Position { line: ln, col }))
                .map(|(e, _)| *e)
                .reduce(|a, b| if better(b, a) { b } else { a })
        };
        let _ = write!(html, "<span class=\"ln\">{:>5} </span>", ln + 1);
        if let Some(e) = line_entry {
            let _ = write!(
                html,
                "<span class=\"hl line\" title=\"{} {:.3}\" style=\"background:{}\">",
                escape(&e.symbol_id),
                e.score,
                e.color.css()
            );
        }
        let mut col = 0;
        while col < chars.len() {
            let owner = cell_entry(col);
            let mut end = col + 1;
            while end < chars.len() && cell_entry(end).map(|e| &e.symbol_id) == owner.map(|e| &e.symbol_id) {
                end += 1;
            }
            let piece: String = chars[col..end].iter().collect();
            match owner {
                Some(e) => {
                    let _ = write!(
                        html,
                        "<span class=\"hl\" title=\"{} {:.3}\" style=\"background:{}\">{}</span>",
                        escape(&e.symbol_id),
                        e.score,
                        e.color.css(),
                        escape(&piece)
                    );
                }
                None => html.push_str(&escape(&piece)),
            }
            col = end;
        }
        if line_entry.is_some() {
            html.push_str("</span>");
        }
        html.push('\n');
    }
    html.push_str("</pre>\n");
}

fn legend(palette: &Palette) -> String {
    let stops: Vec<String> = (0..=4)
        .map(|i| {
            let s = i as f64 / 4.0;
            color_for_score(s, palette).map(|c| c.css()).unwrap_or_default()
        })
        .collect();
    format!(
        "<div class=\"legend\">score 0 <span class=\"bar\" style=\"background:linear-gradient(to right, {})\"></span> 1</div>\n",
        stops.join(", ")
    )
}

/// Overlay rows for entries found in `corpus`; unknown symbol ids and the
/// map's evaluation warnings become diagnostics.
pub fn render_heatmap(map: &HighlightMap, corpus: &SourceCorpus, palette: &Palette, title: &str) -> HeatmapExport {
    let mut diagnostics: Vec<String> = Vec::new();
    let mut resolved = Vec::new();
    for e in &map.entries {
        match corpus.span(&e.symbol_id) {
            Some(s) => resolved.push((e, s)),
            None => diagnostics.push(format!("symbol {} is not in the corpus", e.symbol_id)),
        }
    }
    diagnostics.extend(map.warnings.iter().cloned());

    let mut ranked = resolved.clone();
    ranked.sort_by(|(a, _), (b, _)| b.score.total_cmp(&a.score).then_with(|| a.symbol_id.cmp(&b.symbol_id)));
    let overlay = ranked
        .iter()
        .map(|(e, s)| OverlayRow {
            file: s.file.clone(),
            start_line: s.start.line,
            start_col: s.start.col,
            end_line: s.end.line,
            end_col: s.end.col,
            score: e.score,
            rgba_hex: e.color.hex(),
        })
        .collect();

    let mut html = String::new();
    let _ = write!(
        html,
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>{t}</title>\n<style>\n\
         body {{ font-family: sans-serif; margin: 1.5em; }}\n\
         pre {{ font-family: monospace; line-height: 1.35; background: #fafafa; padding: 0.5em; }}\n\
         .ln {{ color: #999; user-select: none; }}\n\
         .line {{ display: inline-block; min-width: 60ch; }}\n\
         .bar {{ display: inline-block; width: 12em; height: 0.9em; vertical-align: middle; border: 1px solid #ccc; }}\n\
         </style>\n</head>\n<body>\n<h1>{t}</h1>\n",
        t = escape(title)
    );
    html.push_str(&legend(palette));
    for file in corpus.files() {
        render_file(&mut html, file, &file_spans(file, &resolved));
    }
    html.push_str("<section id=\"diagnostics\">\n<h2>Diagnostics</h2>\n");
    if diagnostics.is_empty() {
        html.push_str("<p>none</p>\n");
    } else {
        html.push_str("<ul>\n");
        for d in &diagnostics {
            let _ = writeln!(html, "<li>{}</li>", escape(d));
        }
        html.push_str("</ul>\n");
    }
    html.push_str("</section>\n</body>\n</html>\n");
    HeatmapExport {
        overlay,
        diagnostics,
        html,
    }
}
