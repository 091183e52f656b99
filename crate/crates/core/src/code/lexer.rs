//! Total tokenizer for Java-like text. Positions are 0-based (line, display
//! column) with tabs expanded; a token's end is exclusive.

use super::Position;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    Number,
    Str,
    Char,
    Comment,
    Punct(char),
    /// `->`, `::`, `==` and friends are split into single `Punct`s except
    /// for the arrow, which matters for lambda bodies.
    Arrow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub start: Position,
    pub end: Position,
}

pub const KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "return", "short", "static",
    "strictfp", "super", "switch", "synchronized", "this", "throw", "throws", "transient", "try",
    "void", "volatile", "while", "true", "false", "null",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Scanner {
    chars: Vec<char>,
    i: usize,
    line: usize,
    col: usize,
    tab_width: usize,
}

impl Scanner {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn pos(&self) -> Position {
        Position::new(self.line, self.col)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.i += 1;
        match c {
            '\n' => {
                self.line += 1;
                self.col = 0;
            }
            '\r' => {}
            '\t' => self.col = (self.col / self.tab_width + 1) * self.tab_width,
            _ => self.col += 1,
        }
        Some(c)
    }

    fn bump_while(&mut self, f: impl Fn(char) -> bool) {
        while self.peek(0).is_some_and(&f) {
            self.bump();
        }
    }

    /// Consumes a quoted literal; stops at an unescaped `quote` or, for
    /// single-line literals, at end of line.
    fn quoted(&mut self, quote: char) {
        self.bump();
        while let Some(c) = self.peek(0) {
            match c {
                '\\' => {
                    self.bump();
                    if self.peek(0).is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                '\n' => break,
                c if c == quote => {
                    self.bump();
                    break;
                }
                _ => {
                    self.bump();
                }
            }
        }
    }
}

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

pub fn tokenize(text: &str, tab_width: usize) -> Vec<Token> {
    let mut s = Scanner {
        chars: text.chars().collect(),
        i: 0,
        line: 0,
        col: 0,
        tab_width: tab_width.max(1),
    };
    let mut out = Vec::new();
    while let Some(c) = s.peek(0) {
        if c.is_whitespace() {
            s.bump();
            continue;
        }
        let start = s.pos();
        let from = s.i;
        let kind = if c == '/' && s.peek(1) == Some('/') {
            s.bump_while(|c| c != '\n');
            TokenKind::Comment
        } else if c == '/' && s.peek(1) == Some('*') {
            s.bump();
            s.bump();
            while s.peek(0).is_some() && !(s.peek(0) == Some('*') && s.peek(1) == Some('/')) {
                s.bump();
            }
            s.bump();
            s.bump();
            TokenKind::Comment
        } else if c == '"' && s.peek(1) == Some('"') && s.peek(2) == Some('"') {
            for _ in 0..3 {
                s.bump();
            }
            while s.peek(0).is_some()
                && !(s.peek(0) == Some('"') && s.peek(1) == Some('"') && s.peek(2) == Some('"'))
            {
                if s.peek(0) == Some('\\') {
                    s.bump();
                }
                s.bump();
            }
            for _ in 0..3 {
                s.bump();
            }
            TokenKind::Str
        } else if c == '"' {
            s.quoted('"');
            TokenKind::Str
        } else if c == '\'' {
            s.quoted('\'');
            TokenKind::Char
        } else if ident_start(c) {
            s.bump_while(ident_part);
            let word: String = s.chars[from..s.i].iter().collect();
            if is_keyword(&word) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            }
        } else if c.is_ascii_digit() || (c == '.' && s.peek(1).is_some_and(|d| d.is_ascii_digit())) {
            s.bump();
            while let Some(d) = s.peek(0) {
                let prev = s.chars[s.i - 1];
                let hex = s.chars[from..s.i].iter().any(|c| matches!(c, 'x' | 'X'));
                let exponent = if hex {
                    matches!(prev, 'p' | 'P')
                } else {
                    matches!(prev, 'e' | 'E')
                };
                if ident_part(d) || d == '.' {
                    s.bump();
                } else if (d == '+' || d == '-') && exponent {
                    s.bump();
                } else {
                    break;
                }
            }
            TokenKind::Number
        } else if c == '-' && s.peek(1) == Some('>') {
            s.bump();
            s.bump();
            TokenKind::Arrow
        } else {
            s.bump();
            TokenKind::Punct(c)
        };
        let text: String = s.chars[from..s.i].iter().collect();
        out.push(Token {
            kind,
            text,
            start,
            end: s.pos(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src, 4).into_iter().map(|t| (t.kind, t.text)).collect()
    }

    #[test]
    fn comments_and_strings_are_single_tokens() {
        let k = kinds("a /* x y */ \"b c\" // d e\n'\\'' f");
        let idents: Vec<_> = k
            .iter()
            .filter(|(k, _)| *k == TokenKind::Ident)
            .map(|(_, t)| t.as_str())
            .collect();
        assert_eq!(idents, ["a", "f"]);
        assert_eq!(k.len(), 6);
    }

    #[test]
    fn tabs_expand_to_next_stop() {
        let t = tokenize("\tx\ty", 4);
        assert_eq!(t[0].start, Position::new(0, 4));
        assert_eq!(t[1].start, Position::new(0, 8));
        let t = tokenize("ab\tc", 4);
        assert_eq!(t[1].start, Position::new(0, 4));
    }

    #[test]
    fn numbers_with_exponents() {
        let k = kinds("1e-9 0x1F 3.5f x-1");
        assert_eq!(k[0], (TokenKind::Number, "1e-9".into()));
        assert_eq!(k[1], (TokenKind::Number, "0x1F".into()));
        assert_eq!(k[2], (TokenKind::Number, "3.5f".into()));
        assert_eq!(k[4], (TokenKind::Punct('-'), "-".into()));
    }

    #[test]
    fn unterminated_constructs_do_not_panic() {
        for src in ["\"abc", "/* abc", "'", "\"\"\"abc", "a\\", "\"\\"] {
            let _ = tokenize(src, 4);
        }
    }
}
