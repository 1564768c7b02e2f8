use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Integer cells for every vertex plus occupancy bookkeeping.
///
/// `vertex_loss_count` is the number of vertices that do not get a cell of
/// their own: `n - (distinct occupied cells)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridLayout {
    cells: Vec<[i64; 2]>,
    occupancy: BTreeMap<[i64; 2], Vec<usize>>,
    vertex_loss_count: usize,
    bbox: [i64; 4],
}

impl GridLayout {
    pub fn from_cells(cells: Vec<[i64; 2]>) -> Self {
        let mut occupancy: BTreeMap<[i64; 2], Vec<usize>> = BTreeMap::new();
        for (v, &c) in cells.iter().enumerate() {
            occupancy.entry(c).or_default().push(v);
        }
        let vertex_loss_count = cells.len() - occupancy.len();
        let bbox = if cells.is_empty() {
            [0, 0, 0, 0]
        } else {
            cells.iter().fold([i64::MAX, i64::MAX, i64::MIN, i64::MIN], |b, c| {
                [b[0].min(c[0]), b[1].min(c[1]), b[2].max(c[0]), b[3].max(c[1])]
            })
        };
        Self { cells, occupancy, vertex_loss_count, bbox }
    }

    /// Translates the layout so its bounding box starts at the origin, then
    /// rounds every coordinate half away from zero.
    pub fn round(coords: &[[f64; 2]]) -> Self {
        let min_x = coords.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let min_y = coords.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        let cells = coords.iter().map(|p| [(p[0] - min_x).round() as i64, (p[1] - min_y).round() as i64]).collect();
        Self::from_cells(cells)
    }

    pub fn cells(&self) -> &[[i64; 2]] {
        &self.cells
    }

    pub fn num_vertices(&self) -> usize {
        self.cells.len()
    }

    pub fn occupancy(&self) -> &BTreeMap<[i64; 2], Vec<usize>> {
        &self.occupancy
    }

    pub fn vertex_loss_count(&self) -> usize {
        self.vertex_loss_count
    }

    /// `[min_x, min_y, max_x, max_y]`, inclusive.
    pub fn bbox(&self) -> [i64; 4] {
        self.bbox
    }

    /// Number of columns spanned by the bounding box.
    pub fn width(&self) -> i64 {
        if self.cells.is_empty() {
            0
        } else {
            self.bbox[2] - self.bbox[0] + 1
        }
    }

    pub fn height(&self) -> i64 {
        if self.cells.is_empty() {
            0
        } else {
            self.bbox[3] - self.bbox[1] + 1
        }
    }

    /// Larger bounding-box side.
    pub fn side(&self) -> i64 {
        self.width().max(self.height())
    }

    /// Cells shifted so the bounding box starts at the origin.
    pub fn aligned(&self) -> GridLayout {
        let [mx, my, ..] = self.bbox;
        Self::from_cells(self.cells.iter().map(|c| [c[0] - mx, c[1] - my]).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GridJson { cells: self.cells.clone(), loss: self.vertex_loss_count, bbox: self.bbox })
            .expect("grid layout serializes")
    }

    /// Parses the `{"cells", "loss", "bbox"}` form. Loss and bounding box are
    /// recomputed from the cells.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let raw: GridJson = serde_json::from_str(text)?;
        Ok(Self::from_cells(raw.cells))
    }
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    cells: Vec<[i64; 2]>,
    loss: usize,
    bbox: [i64; 4],
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loss_counts_extra_occupants() {
        let g = GridLayout::from_cells(vec![[0, 0], [0, 0], [1, 0], [0, 0], [2, 2]]);
        assert_eq!(g.vertex_loss_count(), 2);
        assert_eq!(g.occupancy()[&[0, 0]], vec![0, 1, 3]);
        assert_eq!(g.bbox(), [0, 0, 2, 2]);
        assert_eq!(g.side(), 3);
    }

    #[test]
    fn rounding_aligns_and_rounds_half_away() {
        let g = GridLayout::round(&[[-3.0, 10.0], [-1.5, 10.5], [-2.6, 12.49]]);
        assert_eq!(g.cells(), &[[0, 0], [2, 1], [0, 2]]);
        assert_eq!(g.bbox()[..2], [0, 0]);
    }

    #[test]
    fn json_round_trip() {
        let g = GridLayout::from_cells(vec![[0, 0], [3, 1], [3, 1]]);
        let text = g.to_json();
        assert!(text.contains("\"loss\":1"));
        assert_eq!(GridLayout::from_json(&text).unwrap(), g);
    }
}
