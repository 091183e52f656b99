//! Column-wise evaluation of a score script over a metric table.

use serde::{Deserialize, Serialize};

use super::palette::{color_for_score, Palette, Rgba};
use super::script::{BinOp, Expr, Func, ScoreScript};
use super::HighlightError;
use crate::physio::{MetricTable, METRIC_NAMES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct EvalOptions {
    /// Normalize within each file instead of across the session.
    pub per_file: bool,
    pub palette: Palette,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HighlightEntry {
    pub symbol_id: String,
    pub file: String,
    pub score: f64,
    pub color: Rgba,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct HighlightMap {
    /// Ordered by symbol id.
    pub entries: Vec<HighlightEntry>,
    pub warnings: Vec<String>,
}

impl HighlightMap {
    pub fn score(&self, symbol_id: &str) -> Option<f64> {
        self.entries
            .binary_search_by(|e| e.symbol_id.as_str().cmp(symbol_id))
            .ok()
            .map(|i| self.entries[i].score)
    }
}

struct Columns<'a> {
    table: &'a MetricTable,
    /// Row indices of each normalization group.
    groups: Vec<Vec<usize>>,
}

impl Columns<'_> {
    fn symbol(&self, row: usize) -> String {
        self.table.rows[row].symbol_id.clone()
    }

    fn checked(&self, v: Vec<f64>) -> Result<Vec<f64>, HighlightError> {
        match v.iter().position(|x| !x.is_finite()) {
            Some(i) => Err(HighlightError::NonFinite { symbol: self.symbol(i) }),
            None => Ok(v),
        }
    }

    fn eval(&self, e: &Expr) -> Result<Vec<f64>, HighlightError> {
        let n = self.table.rows.len();
        let v = match e {
            Expr::Num(x) => vec![*x; n],
            Expr::Var(i) => self
                .table
                .rows
                .iter()
                .map(|r| r.get(METRIC_NAMES[*i]).unwrap_or(0.0))
                .collect(),
            Expr::Neg(a) => self.eval(a)?.into_iter().map(|x| -x).collect(),
            Expr::Bin(op, a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                if *op == BinOp::Div {
                    if let Some(i) = b.iter().position(|&x| x == 0.0) {
                        return Err(HighlightError::DivisionByZero { symbol: self.symbol(i) });
                    }
                }
                a.iter()
                    .zip(&b)
                    .map(|(&x, &y)| match op {
                        BinOp::Add => x + y,
                        BinOp::Sub => x - y,
                        BinOp::Mul => x * y,
                        BinOp::Div => x / y,
                    })
                    .collect()
            }
            Expr::Call(func, args) => {
                let cols = args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
                match func {
                    Func::Abs => cols[0].iter().map(|x| x.abs()).collect(),
                    Func::Log => {
                        if let Some(i) = cols[0].iter().position(|&x| x <= 0.0) {
                            return Err(HighlightError::LogDomain { symbol: self.symbol(i), value: cols[0][i] });
                        }
                        cols[0].iter().map(|x| x.ln()).collect()
                    }
                    Func::Min | Func::Max => (0..n)
                        .map(|r| {
                            let it = cols.iter().map(|c| c[r]);
                            if *func == Func::Min {
                                it.fold(f64::INFINITY, f64::min)
                            } else {
                                it.fold(f64::NEG_INFINITY, f64::max)
                            }
                        })
                        .collect(),
                }
            }
            Expr::Norm(a) => {
                let x = self.eval(a)?;
                let mut out = vec![0.0; n];
                for g in &self.groups {
                    let lo = g.iter().map(|&i| x[i]).fold(f64::INFINITY, f64::min);
                    let hi = g.iter().map(|&i| x[i]).fold(f64::NEG_INFINITY, f64::max);
                    for &i in g {
                        out[i] = if hi > lo { (x[i] - lo) / (hi - lo) } else { 0.5 };
                    }
                }
                out
            }
        };
        self.checked(v)
    }
}

/// Scores every row of `table`, clamped to `[0, 1]`. Referenced variables
/// that a row lacks read as 0 and produce one warning per symbol and variable.
pub fn evaluate(script: &ScoreScript, table: &MetricTable, options: &EvalOptions) -> Result<HighlightMap, HighlightError> {
    if table.is_empty() {
        return Err(HighlightError::EmptyTable);
    }
    options.palette.validate()?;
    let groups = if options.per_file {
        let mut files: Vec<&str> = table.rows.iter().map(|r| r.file.as_str()).collect();
        files.sort_unstable();
        files.dedup();
        files
            .iter()
            .map(|f| (0..table.len()).filter(|&i| table.rows[i].file == *f).collect())
            .collect()
    } else {
        vec![(0..table.len()).collect()]
    };
    let cols = Columns { table, groups };
    let scores = cols.eval(&script.expr)?;

    let mut vars = Vec::new();
    script.expr.variables(&mut vars);
    vars.sort_unstable();
    let mut warnings = Vec::new();
    for r in &table.rows {
        for &v in &vars {
            if r.get(METRIC_NAMES[v]).is_none() {
                warnings.push(format!("{}: {} missing, read as 0", r.symbol_id, METRIC_NAMES[v]));
            }
        }
    }
    let entries = table
        .rows
        .iter()
        .zip(scores)
        .map(|(r, s)| {
            let score = s.clamp(0.0, 1.0);
            Ok(HighlightEntry {
                symbol_id: r.symbol_id.clone(),
                file: r.file.clone(),
                score,
                color: color_for_score(score, &options.palette)?,
            })
        })
        .collect::<Result<Vec<_>, HighlightError>>()?;
    Ok(HighlightMap { entries, warnings })
}
