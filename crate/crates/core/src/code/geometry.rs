use serde::{Deserialize, Serialize};

use super::CodeError;

/// Monospace text area. The viewport is `[origin, origin + size)` in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EditorGeometry {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_width: f64,
    pub cell_height: f64,
    pub first_visible_line: usize,
    #[serde(default)]
    pub horizontal_scroll: usize,
    pub viewport_width: f64,
    pub viewport_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellRect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl CellRect {
    pub fn center(&self) -> (f64, f64) {
        (self.x + self.width / 2.0, self.y + self.height / 2.0)
    }
}

impl Default for EditorGeometry {
    fn default() -> Self {
        EditorGeometry {
            origin_x: 0.0,
            origin_y: 0.0,
            cell_width: 8.0,
            cell_height: 16.0,
            first_visible_line: 0,
            horizontal_scroll: 0,
            viewport_width: 1280.0,
            viewport_height: 960.0,
        }
    }
}

impl EditorGeometry {
    pub fn validate(&self) -> Result<(), CodeError> {
        let all_finite = [
            self.origin_x,
            self.origin_y,
            self.cell_width,
            self.cell_height,
            self.viewport_width,
            self.viewport_height,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(CodeError::InvalidGeometry("non-finite value".into()));
        }
        if self.cell_width <= 0.0 || self.cell_height <= 0.0 {
            return Err(CodeError::InvalidGeometry("cell dimensions must be positive".into()));
        }
        if self.viewport_width < 0.0 || self.viewport_height < 0.0 {
            return Err(CodeError::InvalidGeometry("viewport size must be non-negative".into()));
        }
        Ok(())
    }

    pub fn visible_lines(&self) -> usize {
        (self.viewport_height / self.cell_height).ceil() as usize
    }

    pub fn visible_cols(&self) -> usize {
        (self.viewport_width / self.cell_width).ceil() as usize
    }

    /// The (line, column) cell under a pixel, or `None` outside the viewport.
    pub fn cell_from_point(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let dx = x - self.origin_x;
        let dy = y - self.origin_y;
        if !(dx >= 0.0 && dy >= 0.0 && dx < self.viewport_width && dy < self.viewport_height) {
            return None;
        }
        let line = self.first_visible_line + (dy / self.cell_height).floor() as usize;
        let col = self.horizontal_scroll + (dx / self.cell_width).floor() as usize;
        Some((line, col))
    }

    /// Pixel rectangle of a cell whose top-left corner is inside the viewport.
    pub fn rect_for_cell(&self, line: usize, col: usize) -> Option<CellRect> {
        let row = line.checked_sub(self.first_visible_line)?;
        let column = col.checked_sub(self.horizontal_scroll)?;
        let x = self.origin_x + column as f64 * self.cell_width;
        let y = self.origin_y + row as f64 * self.cell_height;
        if x - self.origin_x >= self.viewport_width || y - self.origin_y >= self.viewport_height {
            return None;
        }
        Some(CellRect {
            x,
            y,
            width: self.cell_width,
            height: self.cell_height,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g() -> EditorGeometry {
        EditorGeometry {
            origin_x: 100.0,
            origin_y: 50.0,
            cell_width: 8.0,
            cell_height: 16.0,
            first_visible_line: 10,
            horizontal_scroll: 0,
            viewport_width: 800.0,
            viewport_height: 600.0,
        }
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(g().cell_from_point(100.0, 50.0), Some((10, 0)));
        assert_eq!(g().cell_from_point(116.0, 82.0), Some((12, 2)));
        assert_eq!(g().cell_from_point(99.9, 60.0), None);
        assert_eq!(g().cell_from_point(900.0, 60.0), None);
        assert_eq!(g().cell_from_point(120.0, 650.0), None);
        assert_eq!(g().cell_from_point(f64::NAN, 60.0), None);
    }

    #[test]
    fn validation() {
        assert!(g().validate().is_ok());
        assert!(EditorGeometry { cell_width: 0.0, ..g() }.validate().is_err());
        assert!(EditorGeometry { origin_x: f64::INFINITY, ..g() }.validate().is_err());
    }

    proptest! {
        #[test]
        fn cell_center_maps_back(
            ox in -500.0f64..500.0, oy in -500.0f64..500.0,
            cw in 1.0f64..20.0, ch in 1.0f64..40.0,
            first in 0usize..1000, hs in 0usize..50,
            vw in 10.0f64..2000.0, vh in 10.0f64..2000.0,
            fl in 0.0f64..1.0, fc in 0.0f64..1.0,
        ) {
            let g = EditorGeometry {
                origin_x: ox, origin_y: oy, cell_width: cw, cell_height: ch,
                first_visible_line: first, horizontal_scroll: hs,
                viewport_width: vw, viewport_height: vh,
            };
            // only cells whose center lies inside the viewport
            let rows = ((vh - ch / 2.0) / ch).ceil().max(0.0) as usize;
            let cols = ((vw - cw / 2.0) / cw).ceil().max(0.0) as usize;
            prop_assume!(rows > 0 && cols > 0);
            let line = first + ((fl * rows as f64) as usize).min(rows - 1);
            let col = hs + ((fc * cols as f64) as usize).min(cols - 1);
            let (x, y) = g.rect_for_cell(line, col).unwrap().center();
            prop_assert_eq!(g.cell_from_point(x, y), Some((line, col)));
        }
    }
}
