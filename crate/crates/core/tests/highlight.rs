use cognitrace::highlight::{evaluate, parse_script, BinOp, EvalOptions, Expr, Func, DEFAULT_SCRIPT};
use cognitrace::physio::{MetricRow, MetricTable, METRIC_NAMES};
use proptest::prelude::*;

/// Row-at-a-time interpreter; `norm` re-evaluates its argument on every row.
fn oracle(e: &Expr, rows: &[MetricRow], r: usize) -> f64 {
    match e {
        Expr::Num(v) => *v,
        Expr::Var(i) => rows[r].get(METRIC_NAMES[*i]).unwrap_or(0.0),
        Expr::Neg(a) => -oracle(a, rows, r),
        Expr::Bin(op, a, b) => {
            let (x, y) = (oracle(a, rows, r), oracle(b, rows, r));
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
            }
        }
        Expr::Call(f, args) => {
            let v: Vec<f64> = args.iter().map(|a| oracle(a, rows, r)).collect();
            match f {
                Func::Abs => v[0].abs(),
                Func::Log => v[0].ln(),
                Func::Min => v.iter().copied().fold(f64::INFINITY, f64::min),
                Func::Max => v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        }
        Expr::Norm(a) => {
            let all: Vec<f64> = (0..rows.len()).map(|k| oracle(a, rows, k)).collect();
            let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                0.5
            } else {
                (all[r] - lo) / (hi - lo)
            }
        }
    }
}

fn opt(v: f64, present: bool) -> Option<f64> {
    present.then_some(v)
}

fn table() -> impl Strategy<Value = MetricTable> {
    prop::collection::vec(
        (1.0f64..5000.0, 0u32..6, prop::option::of(0.0f64..50.0), prop::option::of(0.1f64..3.0), any::<[bool; 3]>()),
        1..40,
    )
    .prop_map(|rows| {
        MetricTable::from_rows(
            rows.into_iter()
                .enumerate()
                .map(|(i, (dwell, scr, theta, alpha, present))| MetricRow {
                    symbol_id: format!("F{}.java:line:{i}:0", i % 3),
                    file: format!("F{}.java", i % 3),
                    gaze_duration_ms: dwell,
                    scr_count: present[0].then_some(scr),
                    theta_power: theta,
                    alpha_power: alpha,
                    temp_c: opt(33.0 + dwell / 1e4, present[1]),
                    heart_rate_bpm: opt(60.0 + scr as f64, present[2]),
                    ..MetricRow::default()
                })
                .collect(),
        )
    })
}

const SCRIPTS: [&str; 5] = [
    "norm(scr_count + theta_power)",
    "norm(alpha_power / max(theta_power, 1e-9))",
    "0.5 * norm(gaze_duration_ms) + 0.5 * norm(-temp_c)",
    "min(1, abs(heart_rate_bpm - 60) / 10) * norm(log(gaze_duration_ms))",
    "norm(norm(scr_count) * 2 - theta_power / 50)",
];

proptest! {
    #[test]
    fn evaluator_matches_row_interpreter(t in table(), which in 0..SCRIPTS.len()) {
        let script = parse_script(SCRIPTS[which]).unwrap();
        let map = evaluate(&script, &t, &EvalOptions::default()).unwrap();
        for (r, e) in map.entries.iter().enumerate() {
            let want = oracle(&script.expr, &t.rows, r).clamp(0.0, 1.0);
            prop_assert!((e.score - want).abs() < 1e-9, "{}: {} vs {want}", SCRIPTS[which], e.score);
        }
    }

    #[test]
    fn default_script_is_monotone_in_dwell(t in table()) {
        let map = evaluate(&parse_script(DEFAULT_SCRIPT).unwrap(), &t, &EvalOptions::default()).unwrap();
        for a in 0..t.len() {
            for b in 0..t.len() {
                if t.rows[a].gaze_duration_ms >= t.rows[b].gaze_duration_ms {
                    prop_assert!(map.entries[a].score >= map.entries[b].score);
                }
            }
        }
    }

    #[test]
    fn norm_ignores_positive_affine_maps(t in table(), k in 0.01f64..100.0, c in -1e3f64..1e3) {
        let base = evaluate(&parse_script("norm(gaze_duration_ms)").unwrap(), &t, &EvalOptions::default()).unwrap();
        let moved = evaluate(&parse_script(&format!("norm({k:?} * gaze_duration_ms + {c:?})")).unwrap(), &t, &EvalOptions::default()).unwrap();
        for (a, b) in base.entries.iter().zip(&moved.entries) {
            prop_assert!((a.score - b.score).abs() < 1e-9);
        }
    }

    #[test]
    fn evaluation_is_deterministic_and_bounded(t in table(), which in 0..SCRIPTS.len()) {
        let script = parse_script(SCRIPTS[which]).unwrap();
        let a = evaluate(&script, &t, &EvalOptions::default()).unwrap();
        let b = evaluate(&script, &t, &EvalOptions::default()).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.entries.iter().all(|e| (0.0..=1.0).contains(&e.score)));
        for e in &a.entries {
            prop_assert!((e.color.a as f64 / 255.0 - e.score).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }
}
