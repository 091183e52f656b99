//! Dispersion-threshold fixation identification.
//!
//! Within each run of finite samples whose consecutive gaps are at most
//! `max_gap_s`, a window starts at index `i` and is seeded with the shortest
//! prefix spanning `min_duration_s`. If its dispersion
//! `(max x - min x) + (max y - min y)` is within `dispersion_px`, it grows
//! one sample at a time while the bound holds and is emitted; the scan then
//! resumes after it. Otherwise the start advances by one sample.

use super::{Fixation, FixationParams, GazeError, GazePoint};

/// Slack on time comparisons so sample grids like `k / 60` hit exact
/// thresholds regardless of rounding.
pub const TIME_EPSILON: f64 = 1e-9;

pub fn dispersion(points: &[GazePoint]) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    (x1 - x0) + (y1 - y0)
}

fn fixation(points: &[GazePoint], first: usize) -> Fixation {
    let n = points.len() as f64;
    Fixation {
        start: points[0].t,
        duration: points[points.len() - 1].t - points[0].t,
        x: points.iter().map(|p| p.x).sum::<f64>() / n,
        y: points.iter().map(|p| p.y).sum::<f64>() / n,
        sample_count: points.len(),
        first_index: first,
    }
}

fn scan_segment(pts: &[GazePoint], offset: usize, params: &FixationParams, out: &mut Vec<Fixation>) {
    let mut i = 0;
    while i < pts.len() {
        // shortest window from i spanning the minimum duration
        let Some(mut j) = (i..pts.len()).find(|&j| pts[j].t - pts[i].t >= params.min_duration_s - TIME_EPSILON)
        else {
            break;
        };
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in &pts[i..=j] {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y);
            y1 = y1.max(p.y);
        }
        if (x1 - x0) + (y1 - y0) > params.dispersion_px {
            i += 1;
            continue;
        }
        while let Some(p) = pts.get(j + 1) {
            let (nx0, nx1, ny0, ny1) = (x0.min(p.x), x1.max(p.x), y0.min(p.y), y1.max(p.y));
            if (nx1 - nx0) + (ny1 - ny0) > params.dispersion_px {
                break;
            }
            (x0, x1, y0, y1) = (nx0, nx1, ny0, ny1);
            j += 1;
        }
        out.push(fixation(&pts[i..=j], offset + i));
        i = j + 1;
    }
}

/// Fixations in time order. Non-finite coordinates and gaps longer than
/// `max_gap_s` split the input into independently scanned segments.
pub fn detect_fixations(points: &[GazePoint], params: &FixationParams) -> Result<Vec<Fixation>, GazeError> {
    params.validate()?;
    for (i, p) in points.iter().enumerate() {
        if !p.t.is_finite() {
            return Err(GazeError::NonFiniteTime(i));
        }
        if i > 0 && p.t < points[i - 1].t {
            return Err(GazeError::Unordered(i));
        }
    }
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..=points.len() {
        let boundary = match points.get(i) {
            None => true,
            Some(p) if !(p.x.is_finite() && p.y.is_finite()) => true,
            Some(p) => i > start && p.t - points[i - 1].t > params.max_gap_s + TIME_EPSILON,
        };
        if boundary {
            scan_segment(&points[start..i], start, params, &mut out);
            let finite = points.get(i).is_some_and(|p| p.x.is_finite() && p.y.is_finite());
            start = if finite { i } else { i + 1 };
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at60(xy: impl IntoIterator<Item = (f64, f64)>) -> Vec<GazePoint> {
        xy.into_iter()
            .enumerate()
            .map(|(i, (x, y))| GazePoint::new(i as f64 / 60.0, x, y))
            .collect()
    }

    #[test]
    fn stationary_gaze_is_one_fixation() {
        let pts = at60(std::iter::repeat_n((400.0, 300.0), 60));
        let f = detect_fixations(&pts, &FixationParams::default()).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f[0].duration - 59.0 / 60.0).abs() < 1e-12);
        assert_eq!((f[0].x, f[0].y, f[0].sample_count), (400.0, 300.0, 60));
    }

    #[test]
    fn two_clusters() {
        let pts = at60(std::iter::repeat_n((100.0, 100.0), 30).chain(std::iter::repeat_n((600.0, 100.0), 30)));
        let f = detect_fixations(&pts, &FixationParams::default()).unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f[1].x, 600.0);
    }

    #[test]
    fn minimum_duration_needs_seven_samples_at_60hz() {
        let params = FixationParams::default();
        let six = at60(std::iter::repeat_n((1.0, 1.0), 6));
        assert!(detect_fixations(&six, &params).unwrap().is_empty());
        let seven = at60(std::iter::repeat_n((1.0, 1.0), 7));
        assert_eq!(detect_fixations(&seven, &params).unwrap().len(), 1);
    }

    #[test]
    fn gaps_and_dropouts_split() {
        let mut pts = at60(std::iter::repeat_n((5.0, 5.0), 40));
        pts[20].x = f64::NAN;
        let f = detect_fixations(&pts, &FixationParams::default()).unwrap();
        assert_eq!(f.iter().map(|f| f.sample_count).collect::<Vec<_>>(), [20, 19]);
        let mut pts = at60(std::iter::repeat_n((5.0, 5.0), 40));
        for p in &mut pts[20..] {
            p.t += 0.2;
        }
        assert_eq!(detect_fixations(&pts, &FixationParams::default()).unwrap().len(), 2);
    }

    #[test]
    fn rejects_unordered_and_bad_params() {
        let pts = vec![GazePoint::new(1.0, 0.0, 0.0), GazePoint::new(0.5, 0.0, 0.0)];
        assert_eq!(detect_fixations(&pts, &FixationParams::default()), Err(GazeError::Unordered(1)));
        let bad = FixationParams { dispersion_px: 0.0, ..FixationParams::default() };
        assert_eq!(detect_fixations(&[], &bad), Err(GazeError::InvalidParams));
    }

    fn trace() -> impl Strategy<Value = Vec<GazePoint>> {
        prop::collection::vec((0.0f64..80.0, 0.0f64..80.0, prop::bool::weighted(0.05)), 0..150).prop_map(|v| {
            v.into_iter()
                .enumerate()
                .map(|(i, (x, y, jump))| {
                    let off = if jump { 500.0 } else { 0.0 };
                    GazePoint::new(i as f64 / 60.0, x + off, y)
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn fixations_satisfy_definition(pts in trace()) {
            let params = FixationParams::default();
            let fs = detect_fixations(&pts, &params).unwrap();
            for w in fs.windows(2) {
                prop_assert!(w[0].end() < w[1].start);
            }
            for f in &fs {
                let members = &pts[f.first_index..f.first_index + f.sample_count];
                prop_assert!(dispersion(members) <= params.dispersion_px);
                prop_assert!(f.duration >= params.min_duration_s - TIME_EPSILON);
            }
        }

        #[test]
        fn invariant_under_time_translation(pts in trace(), shift in -1e4f64..1e4) {
            let params = FixationParams::default();
            let a = detect_fixations(&pts, &params).unwrap();
            let moved: Vec<_> = pts.iter().map(|p| GazePoint::new(p.t + shift, p.x, p.y)).collect();
            let b = detect_fixations(&moved, &params).unwrap();
            prop_assert_eq!(a.len(), b.len());
            for (f, g) in a.iter().zip(&b) {
                prop_assert_eq!((f.first_index, f.sample_count), (g.first_index, g.sample_count));
            }
        }
    }
}
