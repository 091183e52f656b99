//! Score script language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | primary
//! primary := number | variable | call | '(' expr ')'
//! call    := name '(' expr (',' expr)* ')'
//! ```
//!
//! Functions: `min` and `max` (two or more arguments), `abs`, `log` (natural)
//! and `norm` (one argument). `#` starts a comment running to end of line.

use std::fmt;

use crate::physio::METRIC_NAMES;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScriptErrorKind {
    Syntax,
    UnexpectedEnd,
    UnknownIdentifier,
    UnknownFunction,
    Arity,
}

/// Diagnostic with a 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ScriptError {
    pub kind: ScriptErrorKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Min,
    Max,
    Abs,
    Log,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Min => "min",
            Func::Max => "max",
            Func::Abs => "abs",
            Func::Log => "log",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Index into [`METRIC_NAMES`].
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    /// Min-max normalization of the argument across symbols.
    Norm(Box<Expr>),
}

impl Expr {
    /// Indices of the variables referenced anywhere in the tree.
    pub fn variables(&self, out: &mut Vec<usize>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(i) => {
                if !out.contains(i) {
                    out.push(*i);
                }
            }
            Expr::Neg(e) | Expr::Norm(e) => e.variables(out),
            Expr::Bin(_, a, b) => {
                a.variables(out);
                b.variables(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.variables(out)),
        }
    }
}

/// Fully parenthesized form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => f.write_str(METRIC_NAMES[*i]),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Expr::Norm(e) => write!(f, "norm({e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreScript {
    pub source: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn err(kind: ScriptErrorKind, line: usize, col: usize, message: impl Into<String>) -> ScriptError {
    ScriptError {
        kind,
        line,
        col,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ScriptError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| err(ScriptErrorKind::Syntax, tl, tc, format!("malformed number {s:?}")))?;
            out.push(Token { tok: Tok::Num(v), line: tl, col: tc });
        } else if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
        } else if "+-*/(),".contains(c) {
            i += 1;
            out.push(Token { tok: Tok::Op(c), line: tl, col: tc });
        } else {
            return Err(err(ScriptErrorKind::Syntax, tl, tc, format!("unexpected character {c:?}")));
        }
        col += i - start;
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn unexpected(t: &Token, wanted: &str) -> ScriptError {
        match &t.tok {
            Tok::End => err(ScriptErrorKind::UnexpectedEnd, t.line, t.col, format!("unexpected end of script, expected {wanted}")),
            Tok::Num(v) => err(ScriptErrorKind::Syntax, t.line, t.col, format!("unexpected number {v}, expected {wanted}")),
            Tok::Ident(s) => err(ScriptErrorKind::Syntax, t.line, t.col, format!("unexpected {s:?}, expected {wanted}")),
            Tok::Op(c) => err(ScriptErrorKind::Syntax, t.line, t.col, format!("unexpected {c:?}, expected {wanted}")),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ScriptError> {
        let t = self.next();
        if t.tok == Tok::Op(c) {
            Ok(())
        } else {
            Err(Self::unexpected(&t, &format!("{c:?}")))
        }
    }

    fn expr(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ScriptError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ScriptError> {
        if self.peek().tok == Tok::Op('-') {
            self.next();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ScriptError> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(ref name) if self.peek().tok == Tok::Op('(') => {
                self.next();
                let mut args = vec![self.expr()?];
                while self.peek().tok == Tok::Op(',') {
                    self.next();
                    args.push(self.expr()?);
                }
                self.expect(')')?;
                Self::call(&t, name, args)
            }
            Tok::Ident(ref name) => METRIC_NAMES
                .iter()
                .position(|m| m == name)
                .map(Expr::Var)
                .ok_or_else(|| {
                    err(
                        ScriptErrorKind::UnknownIdentifier,
                        t.line,
                        t.col,
                        format!("unknown variable {name:?}; known: {}", METRIC_NAMES.join(", ")),
                    )
                }),
            _ => Err(Self::unexpected(&t, "a number, variable, call or '('")),
        }
    }

    fn call(t: &Token, name: &str, mut args: Vec<Expr>) -> Result<Expr, ScriptError> {
        let arity = |ok: bool, want: &str| {
            if ok {
                Ok(())
            } else {
                Err(err(
                    ScriptErrorKind::Arity,
                    t.line,
                    t.col,
                    format!("{name} takes {want}, got {}", args.len()),
                ))
            }
        };
        match name {
            "norm" => {
                arity(args.len() == 1, "one argument")?;
                Ok(Expr::Norm(Box::new(args.remove(0))))
            }
            "abs" | "log" => {
                arity(args.len() == 1, "one argument")?;
                Ok(Expr::Call(if name == "abs" { Func::Abs } else { Func::Log }, args))
            }
            "min" | "max" => {
                arity(args.len() >= 2, "two or more arguments")?;
                Ok(Expr::Call(if name == "min" { Func::Min } else { Func::Max }, args))
            }
            _ => Err(err(
                ScriptErrorKind::UnknownFunction,
                t.line,
                t.col,
                format!("unknown function {name:?}; known: min, max, abs, log, norm"),
            )),
        }
    }
}

pub fn parse_script(text: &str) -> Result<ScoreScript, ScriptError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let expr = p.expr()?;
    let t = p.next();
    if t.tok != Tok::End {
        return Err(Parser::unexpected(&t, "an operator or end of script"));
    }
    Ok(ScoreScript {
        source: text.to_string(),
        expr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_and_nested_scripts_parse() {
        let s = parse_script("norm(gaze_duration_ms)").unwrap();
        assert_eq!(s.expr, Expr::Norm(Box::new(Expr::Var(0))));
        let s = parse_script("norm(alpha_power / max(theta_power, 1e-9))").unwrap();
        let Expr::Norm(inner) = s.expr else { panic!() };
        let Expr::Bin(BinOp::Div, _, rhs) = *inner else { panic!() };
        assert_eq!(*rhs, Expr::Call(Func::Max, vec![Expr::Var(5), Expr::Num(1e-9)]));
    }

    #[test]
    fn precedence_and_unary() {
        let s = parse_script("1 + 2 * -3 - 4").unwrap();
        assert_eq!(s.expr.to_string(), "((1.0 + (2.0 * (-3.0))) - 4.0)");
        let s = parse_script("# comment\n(1 + 2) * 3").unwrap();
        assert_eq!(s.expr.to_string(), "((1.0 + 2.0) * 3.0)");
    }

    #[test]
    fn diagnostics_carry_positions() {
        let e = parse_script("scr_count * 2 + ").unwrap_err();
        assert_eq!((e.kind, e.line, e.col), (ScriptErrorKind::UnexpectedEnd, 1, 17));
        let e = parse_script("norm(gaze)").unwrap_err();
        assert_eq!((e.kind, e.line, e.col), (ScriptErrorKind::UnknownIdentifier, 1, 6));
        let e = parse_script("1 +\n  foo(2)").unwrap_err();
        assert_eq!((e.kind, e.line, e.col), (ScriptErrorKind::UnknownFunction, 2, 3));
        let e = parse_script("max(1)").unwrap_err();
        assert_eq!(e.kind, ScriptErrorKind::Arity);
        let e = parse_script("1 2").unwrap_err();
        assert_eq!((e.kind, e.col), (ScriptErrorKind::Syntax, 3));
        let e = parse_script("temp_c $").unwrap_err();
        assert_eq!((e.kind, e.col), (ScriptErrorKind::Syntax, 8));
        assert_eq!(parse_script("").unwrap_err().kind, ScriptErrorKind::UnexpectedEnd);
    }

    fn expr_tree() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e6).prop_map(Expr::Num),
            (0usize..METRIC_NAMES.len()).prop_map(Expr::Var),
        ];
        leaf.prop_recursive(4, 32, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                inner.clone().prop_map(|e| Expr::Norm(Box::new(e))),
                (inner.clone(), inner.clone(), 0..4usize).prop_map(|(a, b, op)| {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div][op];
                    Expr::Bin(op, Box::new(a), Box::new(b))
                }),
                (prop::collection::vec(inner.clone(), 2..4), any::<bool>())
                    .prop_map(|(args, min)| Expr::Call(if min { Func::Min } else { Func::Max }, args)),
                inner.prop_map(|e| Expr::Call(Func::Abs, vec![e])),
            ]
        })
    }

    proptest! {
        #[test]
        fn printed_trees_parse_back(e in expr_tree()) {
            prop_assert_eq!(parse_script(&e.to_string()).unwrap().expr, e);
        }
    }
}
