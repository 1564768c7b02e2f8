//! Rasterizes grid layouts into RGB images.

use crate::graph::Graph;
use crate::layout::GridLayout;

/// Twelve well-separated colors; class `k` uses `PALETTE[k % 12]`.
pub const PALETTE: [[u8; 3]; 12] = [
    [31, 119, 180],
    [255, 127, 14],
    [44, 160, 44],
    [214, 39, 40],
    [148, 103, 189],
    [140, 86, 75],
    [227, 119, 194],
    [127, 127, 127],
    [188, 189, 34],
    [23, 190, 207],
    [57, 59, 121],
    [99, 121, 57],
];
const BACKGROUND: [u8; 3] = [255, 255, 255];
const EDGE: [u8; 3] = [200, 200, 200];
/// Cells holding several vertices get a dark border.
const POOLED: [u8; 3] = [0, 0, 0];

/// Row-major 8-bit RGB image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<u8>,
}

impl Image {
    fn new(width: usize, height: usize) -> Self {
        Self { width, height, rgb: BACKGROUND.repeat(width * height) }
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    fn put(&mut self, x: usize, y: usize, c: [u8; 3]) {
        if x < self.width && y < self.height {
            let i = 3 * (y * self.width + x);
            self.rgb[i..i + 3].copy_from_slice(&c);
        }
    }

    /// Binary PPM (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

#[derive(Clone, Debug)]
pub struct RenderOptions {
    /// Pixels per grid cell, at least 1.
    pub cell_px: usize,
    pub draw_edges: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { cell_px: 8, draw_edges: true }
    }
}

/// Color class of every vertex derived from features or labels.
pub fn feature_classes(g: &Graph) -> Vec<usize> {
    if let Some(features) = g.features() {
        features
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
                    .0
            })
            .collect()
    } else if let Some(labels) = g.labels() {
        labels.iter().map(|&l| l.rem_euclid(PALETTE.len() as i64) as usize).collect()
    } else {
        vec![0; g.num_vertices()]
    }
}

/// Draws `layout` with one filled square per occupied cell and, optionally,
/// straight edges between cell centers. `classes[v]` picks the color of `v`;
/// a shared cell takes the color of its lowest vertex.
pub fn render(g: &Graph, layout: &GridLayout, classes: &[usize], opts: &RenderOptions) -> Image {
    assert_eq!(classes.len(), layout.num_vertices(), "one class per vertex");
    let px = opts.cell_px.max(1);
    let aligned = layout.aligned();
    let (w, h) = (aligned.width().max(0) as usize, aligned.height().max(0) as usize);
    let mut img = Image::new(w * px, h * px);
    let center = |c: [i64; 2]| (c[0] as usize * px + px / 2, c[1] as usize * px + px / 2);

    if opts.draw_edges {
        for &(u, v) in g.edges() {
            let (a, b) = (center(aligned.cells()[u]), center(aligned.cells()[v]));
            line(&mut img, a, b, EDGE);
        }
    }
    for (cell, vertices) in aligned.occupancy() {
        let color = PALETTE[classes[vertices[0]] % PALETTE.len()];
        let (x0, y0) = (cell[0] as usize * px, cell[1] as usize * px);
        let inset = usize::from(px >= 4);
        for y in y0 + inset..y0 + px - inset {
            for x in x0 + inset..x0 + px - inset {
                let border = vertices.len() > 1 && (x == x0 + inset || y == y0 + inset || x + inset + 1 == x0 + px || y + inset + 1 == y0 + px);
                img.put(x, y, if border { POOLED } else { color });
            }
        }
    }
    img
}

/// Bresenham segment.
fn line(img: &mut Image, (x0, y0): (usize, usize), (x1, y1): (usize, usize), c: [u8; 3]) {
    let (mut x, mut y) = (x0 as i64, y0 as i64);
    let (x1, y1) = (x1 as i64, y1 as i64);
    let (dx, dy) = ((x1 - x).abs(), -(y1 - y).abs());
    let (sx, sy) = ((x1 - x).signum(), (y1 - y).signum());
    let mut err = dx + dy;
    loop {
        img.put(x as usize, y as usize, c);
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_and_edges() {
        let g = Graph::path(2);
        let layout = GridLayout::from_cells(vec![[3, 1], [5, 1]]);
        let img = render(&g, &layout, &[0, 1], &RenderOptions { cell_px: 4, draw_edges: true });
        assert_eq!((img.width, img.height), (12, 4));
        assert_eq!(img.pixel(1, 1), PALETTE[0]);
        assert_eq!(img.pixel(9, 1), PALETTE[1]);
        // The empty middle cell carries only the edge.
        assert_eq!(img.pixel(6, 2), EDGE);
        assert_eq!(img.pixel(6, 0), BACKGROUND);
        assert!(img.to_ppm().starts_with(b"P6\n12 4\n255\n"));
        assert_eq!(img.to_ppm().len(), 12 + 12 * 4 * 3);
    }

    #[test]
    fn classes_from_features_then_labels() {
        let g = Graph::empty(2).with_features(vec![vec![0.0, 3.0, 1.0], vec![2.0, 0.0, 2.0]]).unwrap();
        assert_eq!(feature_classes(&g), vec![1, 0]);
        let g = Graph::empty(2).with_labels(vec![-1, 14]).unwrap();
        assert_eq!(feature_classes(&g), vec![11, 2]);
        assert_eq!(feature_classes(&Graph::empty(3)), vec![0; 3]);
    }

    #[test]
    fn pooled_cell_has_border() {
        let layout = GridLayout::from_cells(vec![[0, 0], [0, 0]]);
        let img = render(&Graph::empty(2), &layout, &[2, 3], &RenderOptions { cell_px: 8, draw_edges: false });
        assert_eq!(img.pixel(1, 1), POOLED);
        assert_eq!(img.pixel(4, 4), PALETTE[2]);
    }
}
