//! Source symbol model: spans recovered from Java-like text, a corpus of
//! parsed files, and the monospace editor geometry that maps pixels to
//! text cells.

mod geometry;
pub mod lexer;

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use geometry::{CellRect, EditorGeometry};
use lexer::{tokenize, Token, TokenKind};

pub const DEFAULT_TAB_WIDTH: usize = 4;

/// 0-based line and display column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Position {
    pub line: usize,
    pub col: usize,
}

impl Position {
    pub const fn new(line: usize, col: usize) -> Self {
        Position { line, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Class,
    Method,
    Field,
    Identifier,
    Line,
}

/// Highlighting granularity is a symbol kind.
pub type Granularity = SymbolKind;

impl SymbolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolKind::Class => "class",
            SymbolKind::Method => "method",
            SymbolKind::Field => "field",
            SymbolKind::Identifier => "identifier",
            SymbolKind::Line => "line",
        }
    }
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SymbolKind {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, CodeError> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "class" => SymbolKind::Class,
            "method" => SymbolKind::Method,
            "field" => SymbolKind::Field,
            "identifier" => SymbolKind::Identifier,
            "line" => SymbolKind::Line,
            _ => return Err(CodeError::UnknownGranularity(s.to_string())),
        })
    }
}

/// A contiguous region `[start, end)` of one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSpan {
    pub symbol_id: String,
    pub file: String,
    pub kind: SymbolKind,
    pub start: Position,
    pub end: Position,
    pub name: String,
}

impl SymbolSpan {
    fn new(file: &str, kind: SymbolKind, start: Position, end: Position, name: String) -> Self {
        SymbolSpan {
            symbol_id: format!("{file}:{kind}:{}:{}", start.line, start.col),
            file: file.to_string(),
            kind,
            start,
            end,
            name,
        }
    }

    /// Line spans cover every column of their line; other spans are
    /// half-open in (line, column) order.
    pub fn contains(&self, p: Position) -> bool {
        match self.kind {
            SymbolKind::Line => p.line == self.start.line,
            _ => self.start <= p && p < self.end,
        }
    }

    fn extent(&self) -> (usize, isize) {
        (
            self.end.line - self.start.line,
            self.end.col as isize - self.start.col as isize,
        )
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CodeError {
    #[error("unknown file {0:?}")]
    UnknownFile(String),
    #[error("unknown granularity {0:?}")]
    UnknownGranularity(String),
    #[error("duplicate path {0:?}")]
    DuplicatePath(String),
    #[error("{path}: not valid UTF-8")]
    NotUtf8 { path: PathBuf },
    #[error("invalid editor geometry: {0}")]
    InvalidGeometry(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Walk(#[from] walkdir::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scope {
    Class { name_tok: usize, start: Position, enum_constants: bool },
    AnonClass,
    Method { name_tok: usize, start: Position },
    Block,
}

struct Recovery<'a> {
    toks: &'a [Token],
    path: &'a str,
    spans: Vec<SymbolSpan>,
}

fn is_punct(t: &Token, c: char) -> bool {
    t.kind == TokenKind::Punct(c)
}

impl Recovery<'_> {
    /// Statement tokens with annotations removed.
    fn strip_annotations(&self, stmt: &[usize]) -> Vec<usize> {
        let mut out = Vec::with_capacity(stmt.len());
        let mut i = 0;
        while i < stmt.len() {
            let t = &self.toks[stmt[i]];
            let next_is_name = stmt
                .get(i + 1)
                .is_some_and(|&j| self.toks[j].kind == TokenKind::Ident);
            if is_punct(t, '@') && next_is_name {
                i += 2;
                while i + 1 < stmt.len()
                    && is_punct(&self.toks[stmt[i]], '.')
                    && self.toks[stmt[i + 1]].kind == TokenKind::Ident
                {
                    i += 2;
                }
                if i < stmt.len() && is_punct(&self.toks[stmt[i]], '(') {
                    let mut depth = 0;
                    while i < stmt.len() {
                        let t = &self.toks[stmt[i]];
                        if is_punct(t, '(') {
                            depth += 1;
                        } else if is_punct(t, ')') {
                            depth -= 1;
                        }
                        i += 1;
                        if depth == 0 {
                            break;
                        }
                    }
                }
                continue;
            }
            out.push(stmt[i]);
            i += 1;
        }
        out
    }

    /// Name token of a type declaration header and whether it declares an enum.
    fn class_header(&self, stmt: &[usize]) -> Option<(usize, bool)> {
        for w in 0..stmt.len().saturating_sub(1) {
            let t = &self.toks[stmt[w]];
            let is_decl_kw = match t.kind {
                TokenKind::Keyword => matches!(t.text.as_str(), "class" | "interface" | "enum"),
                TokenKind::Ident => t.text == "record",
                _ => false,
            };
            let after_dot = w > 0 && is_punct(&self.toks[stmt[w - 1]], '.');
            if is_decl_kw && !after_dot && self.toks[stmt[w + 1]].kind == TokenKind::Ident {
                return Some((stmt[w + 1], t.text == "enum"));
            }
        }
        None
    }

    /// Name token of a method or constructor header.
    fn method_header(&self, stmt: &[usize]) -> Option<usize> {
        let s = self.strip_annotations(stmt);
        let open = s.iter().position(|&i| is_punct(&self.toks[i], '('))?;
        if open == 0 {
            return None;
        }
        let name = s[open - 1];
        let blocked = s[..open].iter().any(|&i| {
            let t = &self.toks[i];
            is_punct(t, '=') || t.kind == TokenKind::Arrow || (t.kind == TokenKind::Keyword && t.text == "new")
        });
        (self.toks[name].kind == TokenKind::Ident && !blocked).then_some(name)
    }

    /// Name token of a field declaration: the last identifier before the
    /// first top-level `=` or `,`.
    fn field_name(&self, stmt: &[usize]) -> Option<usize> {
        let s = self.strip_annotations(stmt);
        let mut angle = 0i32;
        let mut name = None;
        for &i in &s {
            let t = &self.toks[i];
            match t.kind {
                TokenKind::Punct('<') => angle += 1,
                TokenKind::Punct('>') => angle -= 1,
                TokenKind::Punct('=') => break,
                TokenKind::Punct(',') if angle <= 0 => break,
                TokenKind::Punct('(') => return None,
                TokenKind::Ident => name = Some(i),
                _ => {}
            }
        }
        name
    }

    fn emit(&mut self, kind: SymbolKind, start: Position, end: Position, name_tok: usize) {
        let name = self.toks[name_tok].text.clone();
        self.spans.push(SymbolSpan::new(self.path, kind, start, end, name));
    }

    fn run(&mut self, eof: Position) {
        let mut stack: Vec<(Scope, Vec<usize>)> = Vec::new();
        let mut stmt: Vec<usize> = Vec::new();
        for (i, t) in self.toks.iter().enumerate() {
            if t.kind == TokenKind::Comment {
                continue;
            }
            let in_type_body = matches!(
                stack.last(),
                Some((Scope::Class { .. } | Scope::AnonClass, _))
            );
            match t.kind {
                TokenKind::Punct('{') => {
                    let scope = if let Some((name_tok, is_enum)) = self.class_header(&stmt) {
                        Scope::Class {
                            name_tok,
                            start: self.toks[stmt[0]].start,
                            enum_constants: is_enum,
                        }
                    } else if let Some(name_tok) = in_type_body.then(|| self.method_header(&stmt)).flatten() {
                        Scope::Method {
                            name_tok,
                            start: self.toks[stmt[0]].start,
                        }
                    } else if stmt.last().is_some_and(|&j| is_punct(&self.toks[j], ')'))
                        && stmt.iter().any(|&j| self.toks[j].kind == TokenKind::Keyword && self.toks[j].text == "new")
                    {
                        Scope::AnonClass
                    } else {
                        Scope::Block
                    };
                    stack.push((scope, std::mem::take(&mut stmt)));
                }
                TokenKind::Punct('}') => {
                    let Some((scope, saved)) = stack.pop() else {
                        stmt.clear();
                        continue;
                    };
                    match scope {
                        Scope::Class { name_tok, start, .. } => {
                            self.emit(SymbolKind::Class, start, t.end, name_tok)
                        }
                        Scope::Method { name_tok, start } => {
                            self.emit(SymbolKind::Method, start, t.end, name_tok)
                        }
                        Scope::AnonClass => {
                            stmt = saved;
                            continue;
                        }
                        Scope::Block => {
                            if saved.iter().any(|&j| is_punct(&self.toks[j], '=')) {
                                stmt = saved;
                                continue;
                            }
                        }
                    }
                    stmt.clear();
                }
                TokenKind::Punct(';') => {
                    if in_type_body && !stmt.is_empty() {
                        let top = stack.last_mut().map(|(s, _)| s);
                        if let Some(Scope::Class { enum_constants, .. }) = top {
                            if *enum_constants {
                                *enum_constants = false;
                                stmt.clear();
                                continue;
                            }
                        }
                        let start = self.toks[stmt[0]].start;
                        if let Some(n) = self.method_header(&stmt) {
                            self.emit(SymbolKind::Method, start, t.end, n);
                        } else if let Some(n) = self.field_name(&stmt) {
                            self.emit(SymbolKind::Field, start, t.end, n);
                        }
                    } else if let Some((Scope::Class { enum_constants, .. }, _)) = stack.last_mut() {
                        *enum_constants = false;
                    }
                    stmt.clear();
                }
                _ => stmt.push(i),
            }
        }
        while let Some((scope, _)) = stack.pop() {
            match scope {
                Scope::Class { name_tok, start, .. } => self.emit(SymbolKind::Class, start, eof, name_tok),
                Scope::Method { name_tok, start } => self.emit(SymbolKind::Method, start, eof, name_tok),
                _ => {}
            }
        }
    }
}

/// Display lines of `text`: tabs expanded, `\r` dropped, no phantom line
/// after a trailing newline.
pub fn display_lines(text: &str, tab_width: usize) -> Vec<String> {
    let tab_width = tab_width.max(1);
    let mut lines: Vec<String> = text
        .split('\n')
        .map(|raw| {
            let mut out = String::new();
            let mut col = 0;
            for c in raw.chars() {
                match c {
                    '\r' => {}
                    '\t' => {
                        let next = (col / tab_width + 1) * tab_width;
                        out.extend(std::iter::repeat_n(' ', next - col));
                        col = next;
                    }
                    c => {
                        out.push(c);
                        col += 1;
                    }
                }
            }
            out
        })
        .collect();
    if text.is_empty() || text.ends_with('\n') {
        lines.pop();
    }
    lines
}

/// Parses one file into spans sorted by start, then kind.
///
/// Never fails: unbalanced braces close at end of file and unrecognized
/// structure degrades to Line and Identifier spans.
pub fn parse_source(path: &str, text: &str) -> Vec<SymbolSpan> {
    parse_source_with_tabs(path, text, DEFAULT_TAB_WIDTH)
}

pub fn parse_source_with_tabs(path: &str, text: &str, tab_width: usize) -> Vec<SymbolSpan> {
    let lines = display_lines(text, tab_width);
    let toks = tokenize(text, tab_width);
    let eof = lines
        .last()
        .map_or(Position::new(0, 0), |l| Position::new(lines.len() - 1, l.chars().count()));
    let mut r = Recovery {
        toks: &toks,
        path,
        spans: Vec::new(),
    };
    r.run(eof);
    let mut spans = r.spans;
    for t in toks.iter().filter(|t| t.kind == TokenKind::Ident) {
        spans.push(SymbolSpan::new(path, SymbolKind::Identifier, t.start, t.end, t.text.clone()));
    }
    for (n, l) in lines.iter().enumerate() {
        spans.push(SymbolSpan::new(
            path,
            SymbolKind::Line,
            Position::new(n, 0),
            Position::new(n, l.chars().count()),
            format!("L{}", n + 1),
        ));
    }
    spans.sort_by(|a, b| (a.start, a.kind).cmp(&(b.start, b.kind)));
    spans
}

/// Picks the smallest span of `kind` containing `p`; among equal sizes the
/// latest-starting wins.
fn smallest_containing(spans: &[SymbolSpan], kind: SymbolKind, p: Position) -> Option<&SymbolSpan> {
    spans
        .iter()
        .filter(|s| s.kind == kind && s.contains(p))
        .min_by(|a, b| a.extent().cmp(&b.extent()).then(b.start.cmp(&a.start)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
    /// Tab-expanded display lines.
    pub lines: Vec<String>,
    pub spans: Vec<SymbolSpan>,
}

impl SourceFile {
    pub fn parse(path: impl Into<String>, text: impl Into<String>, tab_width: usize) -> Self {
        let path = path.into();
        let text = text.into();
        SourceFile {
            lines: display_lines(&text, tab_width),
            spans: parse_source_with_tabs(&path, &text, tab_width),
            path,
            text,
        }
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn locate(&self, line: usize, col: usize, granularity: Granularity) -> Option<&SymbolSpan> {
        if line >= self.lines.len() {
            return None;
        }
        smallest_containing(&self.spans, granularity, Position::new(line, col))
    }
}

/// Parsed files keyed by `/`-separated relative path, in path order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceCorpus {
    files: IndexMap<String, SourceFile>,
    by_id: HashMap<String, (usize, usize)>,
}

impl SourceCorpus {
    pub fn from_files<P: Into<String>, T: Into<String>>(
        files: impl IntoIterator<Item = (P, T)>,
        tab_width: usize,
    ) -> Result<Self, CodeError> {
        let mut parsed: Vec<SourceFile> = Vec::new();
        for (p, t) in files {
            let f = SourceFile::parse(p, t, tab_width);
            if parsed.iter().any(|g| g.path == f.path) {
                return Err(CodeError::DuplicatePath(f.path));
            }
            parsed.push(f);
        }
        parsed.sort_by(|a, b| a.path.cmp(&b.path));
        let mut corpus = SourceCorpus::default();
        for (fi, f) in parsed.into_iter().enumerate() {
            for (si, s) in f.spans.iter().enumerate() {
                corpus.by_id.insert(s.symbol_id.clone(), (fi, si));
            }
            corpus.files.insert(f.path.clone(), f);
        }
        Ok(corpus)
    }

    /// Loads every `.java` file below `dir`.
    pub fn load(dir: &Path, tab_width: usize) -> Result<Self, CodeError> {
        let mut files = Vec::new();
        for entry in walkdir::WalkDir::new(dir).sort_by_file_name() {
            let entry = entry?;
            let path = entry.path();
            if !entry.file_type().is_file() || path.extension().is_none_or(|e| e != "java") {
                continue;
            }
            let bytes = std::fs::read(path)?;
            let text = String::from_utf8(bytes).map_err(|_| CodeError::NotUtf8 {
                path: path.to_path_buf(),
            })?;
            let rel = path.strip_prefix(dir).unwrap_or(path);
            let key = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            files.push((key, text));
        }
        Self::from_files(files, tab_width)
    }

    pub fn files(&self) -> impl Iterator<Item = &SourceFile> {
        self.files.values()
    }

    pub fn file(&self, path: &str) -> Option<&SourceFile> {
        self.files.get(path)
    }

    pub fn total_lines(&self) -> usize {
        self.files.values().map(SourceFile::line_count).sum()
    }

    pub fn span(&self, symbol_id: &str) -> Option<&SymbolSpan> {
        let &(fi, si) = self.by_id.get(symbol_id)?;
        Some(&self.files[fi].spans[si])
    }

    pub fn locate(
        &self,
        file: &str,
        line: usize,
        col: usize,
        granularity: Granularity,
    ) -> Result<Option<&SymbolSpan>, CodeError> {
        let f = self
            .files
            .get(file)
            .ok_or_else(|| CodeError::UnknownFile(file.to_string()))?;
        Ok(f.locate(line, col, granularity))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn of_kind(spans: &[SymbolSpan], kind: SymbolKind) -> Vec<(&str, Position, Position)> {
        spans
            .iter()
            .filter(|s| s.kind == kind)
            .map(|s| (s.name.as_str(), s.start, s.end))
            .collect()
    }

    fn p(line: usize, col: usize) -> Position {
        Position::new(line, col)
    }

    #[test]
    fn empty_text_has_no_spans() {
        assert!(parse_source("A.java", "").is_empty());
    }

    #[test]
    fn one_line_class() {
        // columns: class=0 A=6 {=8 void=10 f=15 (=16 )=17 {=19 int=21 x=25 ;=26 }=28 }=30
        let spans = parse_source("A.java", "class A { void f() { int x; } }");
        assert_eq!(of_kind(&spans, SymbolKind::Class), [("A", p(0, 0), p(0, 31))]);
        assert_eq!(of_kind(&spans, SymbolKind::Method), [("f", p(0, 10), p(0, 29))]);
        assert_eq!(
            of_kind(&spans, SymbolKind::Identifier),
            [("A", p(0, 6), p(0, 7)), ("f", p(0, 15), p(0, 16)), ("x", p(0, 25), p(0, 26))]
        );
        assert_eq!(of_kind(&spans, SymbolKind::Line), [("L1", p(0, 0), p(0, 31))]);
        assert!(of_kind(&spans, SymbolKind::Field).is_empty());
        assert_eq!(spans[0].symbol_id, "A.java:class:0:0");
    }

    const SAMPLE: &str = "\
package a.b;

import java.util.List;

/** Doc mentioning class Fake { } */
@Deprecated
public final class Outer<T> extends Base implements Runnable {
    private static final int LIMIT = 10;
    private final Map<String, List<T>> index = new HashMap<>();
    int[] table = {1, 2, 3};
    String s = \"class Nope { void g() {} }\";

    @SuppressWarnings(\"unchecked\")
    public Outer(int x) {
        if (x > 0) { run(); }
        Runnable r = new Runnable() {
            public void run() { }
        };
    }

    abstract void hook(int a);

    public void run() {
        for (int i = 0; i < LIMIT; i++) { }
    }

    enum Mode { FAST(1), SLOW(2); final int w; Mode(int w) { this.w = w; } }

    interface Cb { void call(); }
}
";

    #[test]
    fn structure_recovery_on_realistic_code() {
        let spans = parse_source("o/Outer.java", SAMPLE);
        let classes: Vec<_> = of_kind(&spans, SymbolKind::Class).iter().map(|c| c.0).collect();
        assert_eq!(classes, ["Outer", "Mode", "Cb"]);
        let outer = spans.iter().find(|s| s.name == "Outer" && s.kind == SymbolKind::Class).unwrap();
        assert_eq!(outer.start, p(5, 0), "annotation belongs to the header");
        assert_eq!(outer.end, p(29, 1));
        let methods: Vec<_> = of_kind(&spans, SymbolKind::Method).iter().map(|m| m.0).collect();
        assert_eq!(methods, ["Outer", "run", "hook", "run", "Mode", "call"]);
        let fields: Vec<_> = of_kind(&spans, SymbolKind::Field).iter().map(|f| f.0).collect();
        assert_eq!(fields, ["LIMIT", "index", "table", "s", "w"]);
        assert!(!spans.iter().any(|s| s.name == "Nope" || s.name == "Fake"));
        assert_eq!(of_kind(&spans, SymbolKind::Line).len(), 30);
    }

    #[test]
    fn unbalanced_input_closes_at_eof() {
        let spans = parse_source("X.java", "class X {\n  void f() {\n    int y;\n");
        let c = of_kind(&spans, SymbolKind::Class);
        assert_eq!(c, [("X", p(0, 0), p(2, 10))]);
        assert_eq!(of_kind(&spans, SymbolKind::Method).len(), 1);
        let stray = parse_source("Y.java", "}}} class {{ ( ;");
        assert_eq!(of_kind(&stray, SymbolKind::Line).len(), 1);
    }

    #[test]
    fn locate_by_granularity() {
        let f = SourceFile::parse("A.java", "class A { void f() { int x; } }\n\nint y;\n", 4);
        assert_eq!(f.locate(0, 25, SymbolKind::Identifier).unwrap().name, "x");
        assert_eq!(f.locate(0, 25, SymbolKind::Line).unwrap().name, "L1");
        assert_eq!(f.locate(0, 25, SymbolKind::Method).unwrap().name, "f");
        assert_eq!(f.locate(0, 25, SymbolKind::Class).unwrap().name, "A");
        assert!(f.locate(0, 200, SymbolKind::Identifier).is_none());
        assert_eq!(f.locate(0, 200, SymbolKind::Line).unwrap().name, "L1");
        assert_eq!(f.locate(1, 0, SymbolKind::Line).unwrap().name, "L2");
        assert!(f.locate(3, 0, SymbolKind::Line).is_none());
        assert_eq!(f.line_count(), 3);
    }

    #[test]
    fn nested_classes_pick_innermost() {
        let src = "class A {\n  class B {\n    int z;\n  }\n}\n";
        let f = SourceFile::parse("A.java", src, 4);
        assert_eq!(f.locate(2, 8, SymbolKind::Class).unwrap().name, "B");
        assert_eq!(f.locate(4, 0, SymbolKind::Class).unwrap().name, "A");
        assert_eq!(f.locate(2, 8, SymbolKind::Field).unwrap().name, "z");
    }

    #[test]
    fn corpus_lookup_and_unknown_file() {
        let c = SourceCorpus::from_files([("b/B.java", "class B {}\n"), ("a/A.java", "class A {}\n")], 4)
            .unwrap();
        assert_eq!(c.files().map(|f| f.path.as_str()).collect::<Vec<_>>(), ["a/A.java", "b/B.java"]);
        assert_eq!(c.span("b/B.java:class:0:0").unwrap().name, "B");
        assert!(matches!(c.locate("zz", 0, 0, SymbolKind::Line), Err(CodeError::UnknownFile(_))));
        assert!(SourceCorpus::from_files([("a", ""), ("a", "")], 4).is_err());
    }

    proptest! {
        #[test]
        fn parsing_is_total_and_well_formed(src in "[a-z{}();=\"/*\\n\\t ]{0,200}") {
            let spans = parse_source("F.java", &src);
            prop_assert_eq!(spans.clone(), parse_source("F.java", &src));
            let lines = display_lines(&src, 4).len();
            prop_assert_eq!(spans.iter().filter(|s| s.kind == SymbolKind::Line).count(), lines);
            let mut idents: Vec<_> = spans.iter().filter(|s| s.kind == SymbolKind::Identifier).collect();
            idents.sort_by_key(|s| s.start);
            for s in &spans {
                prop_assert!(s.start <= s.end);
            }
            for w in idents.windows(2) {
                prop_assert!(w[0].end <= w[1].start);
                prop_assert_eq!(w[0].start.line, w[0].end.line);
            }
            let blocks: Vec<_> = spans
                .iter()
                .filter(|s| matches!(s.kind, SymbolKind::Class | SymbolKind::Method))
                .collect();
            for a in &blocks {
                for b in &blocks {
                    let disjoint = a.end <= b.start || b.end <= a.start;
                    let nested = (a.start <= b.start && b.end <= a.end) || (b.start <= a.start && a.end <= b.end);
                    prop_assert!(disjoint || nested);
                }
            }
        }

        #[test]
        fn line_locate_succeeds_everywhere(src in "[a-z {}\\n]{1,120}", col in 0usize..300) {
            let f = SourceFile::parse("F.java", src, 4);
            for line in 0..f.line_count() {
                prop_assert!(f.locate(line, col, SymbolKind::Line).is_some());
            }
        }
    }
}
