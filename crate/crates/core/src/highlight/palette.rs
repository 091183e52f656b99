use std::fmt;

use serde::{Deserialize, Serialize};

use super::HighlightError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rgba {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub a: u8,
}

impl Rgba {
    /// `#rrggbbaa`
    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}{:02x}", self.r, self.g, self.b, self.a)
    }

    pub fn css(&self) -> String {
        format!("rgba({}, {}, {}, {:.3})", self.r, self.g, self.b, self.a as f64 / 255.0)
    }
}

impl fmt::Display for Rgba {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

/// Anchor colors spread evenly over `[0, 1]`; alpha grows linearly with the
/// score up to `max_alpha`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Palette {
    pub anchors: Vec<[u8; 3]>,
    pub max_alpha: u8,
}

impl Default for Palette {
    /// Transparent at 0 through yellow to opaque red.
    fn default() -> Self {
        Palette {
            anchors: vec![[255, 255, 0], [255, 0, 0]],
            max_alpha: 255,
        }
    }
}

impl Palette {
    pub fn validate(&self) -> Result<(), HighlightError> {
        if self.anchors.is_empty() || self.max_alpha == 0 {
            return Err(HighlightError::InvalidPalette);
        }
        Ok(())
    }

    /// Inverse of the alpha ramp, exact to one alpha step.
    pub fn score_of(&self, color: Rgba) -> f64 {
        color.a as f64 / self.max_alpha as f64
    }
}

pub fn color_for_score(score: f64, palette: &Palette) -> Result<Rgba, HighlightError> {
    if !(0.0..=1.0).contains(&score) {
        return Err(HighlightError::ScoreOutOfRange(score));
    }
    palette.validate()?;
    let n = palette.anchors.len();
    let [r, g, b] = if n == 1 {
        palette.anchors[0]
    } else {
        let pos = score * (n - 1) as f64;
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        let (lo, hi) = (palette.anchors[i], palette.anchors[i + 1]);
        let mix = |k: usize| (lo[k] as f64 + (hi[k] as f64 - lo[k] as f64) * frac).round() as u8;
        [mix(0), mix(1), mix(2)]
    };
    Ok(Rgba {
        r,
        g,
        b,
        a: (score * palette.max_alpha as f64).round() as u8,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn palette_examples() {
        let p = Palette::default();
        assert_eq!(color_for_score(0.0, &p).unwrap().a, 0);
        assert_eq!(color_for_score(1.0, &p).unwrap(), Rgba { r: 255, g: 0, b: 0, a: 255 });
        let two = Palette { anchors: vec![[0, 100, 200], [100, 200, 0]], max_alpha: 200 };
        assert_eq!(color_for_score(0.5, &two).unwrap(), Rgba { r: 50, g: 150, b: 100, a: 100 });
        assert!(matches!(color_for_score(1.5, &p), Err(HighlightError::ScoreOutOfRange(_))));
        assert!(color_for_score(f64::NAN, &p).is_err());
        assert_eq!(color_for_score(1.0, &p).unwrap().hex(), "#ff0000ff");
    }

    proptest! {
        #[test]
        fn alpha_monotone_and_reversible(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let p = Palette::default();
            let (ca, cb) = (color_for_score(a, &p).unwrap(), color_for_score(b, &p).unwrap());
            if a <= b {
                prop_assert!(ca.a <= cb.a);
            }
            prop_assert!((p.score_of(ca) - a).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }
}
