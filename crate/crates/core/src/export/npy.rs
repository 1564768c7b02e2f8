//! NPY version 1.0 (little-endian `float32`, C order) and the JSON sidecar.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ExportError, FeatureGrid};

const MAGIC: &[u8] = b"\x93NUMPY";
/// Magic, version and header-length field.
const PREAMBLE: usize = 10;
const ALIGN: usize = 64;

/// A parsed `float32` array.
#[derive(Clone, Debug, PartialEq)]
pub struct NpyArray {
    pub shape: Vec<usize>,
    pub data: Vec<f32>,
}

/// Encodes `data` with the given shape. The header is space-padded so the
/// payload starts on a 64-byte boundary.
pub fn write_npy(shape: &[usize], data: &[f32]) -> Vec<u8> {
    debug_assert_eq!(shape.iter().product::<usize>(), data.len());
    let dims = match shape {
        [single] => format!("({single},)"),
        _ => format!("({})", shape.iter().map(usize::to_string).collect::<Vec<_>>().join(", ")),
    };
    let mut header = format!("{{'descr': '<f4', 'fortran_order': False, 'shape': {dims}, }}");
    let total = (PREAMBLE + header.len() + 1).div_ceil(ALIGN) * ALIGN;
    header.extend(std::iter::repeat_n(' ', total - PREAMBLE - header.len() - 1));
    header.push('\n');

    let mut out = Vec::with_capacity(total + 4 * data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&[1, 0]);
    out.extend_from_slice(&(header.len() as u16).to_le_bytes());
    out.extend_from_slice(header.as_bytes());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn bad(msg: impl Into<String>) -> ExportError {
    ExportError::Npy(msg.into())
}

/// Value of `key` in a header dict, up to the next top-level comma.
fn header_field<'a>(header: &'a str, key: &str) -> Result<&'a str, ExportError> {
    let start = header.find(&format!("'{key}':")).ok_or_else(|| bad(format!("header lacks {key}")))? + key.len() + 3;
    let rest = header[start..].trim_start();
    let end = if rest.starts_with('(') {
        rest.find(')').map(|i| i + 1)
    } else {
        rest.find([',', '}'])
    }
    .ok_or_else(|| bad(format!("unterminated {key}")))?;
    Ok(rest[..end].trim())
}

/// Decodes a version 1.0 little-endian `float32` C-order array.
pub fn read_npy(bytes: &[u8]) -> Result<NpyArray, ExportError> {
    if bytes.len() < PREAMBLE || &bytes[..6] != MAGIC {
        return Err(bad("missing magic string"));
    }
    if bytes[6..8] != [1, 0] {
        return Err(bad(format!("unsupported version {}.{}", bytes[6], bytes[7])));
    }
    let header_len = u16::from_le_bytes([bytes[8], bytes[9]]) as usize;
    let header = bytes
        .get(PREAMBLE..PREAMBLE + header_len)
        .and_then(|h| std::str::from_utf8(h).ok())
        .ok_or_else(|| bad("truncated or non-ascii header"))?;
    if header_field(header, "descr")?.trim_matches('\'') != "<f4" {
        return Err(bad("only '<f4' arrays are supported"));
    }
    if header_field(header, "fortran_order")? != "False" {
        return Err(bad("only C-order arrays are supported"));
    }
    let shape: Vec<usize> = header_field(header, "shape")?
        .trim_matches(|c| c == '(' || c == ')')
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad(format!("bad dimension {s:?}"))))
        .collect::<Result<_, _>>()?;
    let count: usize = shape.iter().product();
    let payload = &bytes[PREAMBLE + header_len..];
    if payload.len() != 4 * count {
        return Err(bad(format!("expected {} payload bytes, found {}", 4 * count, payload.len())));
    }
    let data = payload.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    Ok(NpyArray { shape, data })
}

/// Metadata written next to each tensor.
///
/// `mask_rle` holds alternating run lengths over the row-major mask, starting
/// with a run of unoccupied cells (possibly empty).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub mask_rle: Vec<usize>,
    pub assignment: Vec<[usize; 2]>,
    pub pooled_cells: Vec<[usize; 2]>,
    pub graph_label: Option<i64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub grown: bool,
}

impl Sidecar {
    pub fn from_grid(grid: &FeatureGrid) -> Self {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0;
        for &m in &grid.mask {
            if m == current {
                len += 1;
            } else {
                runs.push(len);
                current = m;
                len = 1;
            }
        }
        runs.push(len);
        Self {
            mask_rle: runs,
            assignment: grid.assignment.clone(),
            pooled_cells: grid.pooled_cells.clone(),
            graph_label: grid.graph_label,
            grown: grid.grown,
        }
    }

    pub fn mask(&self) -> Vec<bool> {
        self.mask_rle.iter().enumerate().flat_map(|(k, &len)| std::iter::repeat_n(k % 2 == 1, len)).collect()
    }
}

/// `<dataset>_<graph_id>_<seed>`.
pub fn file_stem(dataset: &str, graph_id: usize, seed: u64) -> String {
    format!("{dataset}_{graph_id}_{seed}")
}

/// Writes `<dir>/<stem>.npy` and `<dir>/<stem>.json`.
pub fn write_grid(grid: &FeatureGrid, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf), ExportError> {
    let npy_path = dir.join(format!("{stem}.npy"));
    let json_path = dir.join(format!("{stem}.json"));
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExportError::Io { path, source }
    };
    std::fs::write(&npy_path, write_npy(&grid.shape(), &grid.data)).map_err(io(&npy_path))?;
    let sidecar = serde_json::to_string(&Sidecar::from_grid(grid))?;
    std::fs::write(&json_path, sidecar).map_err(io(&json_path))?;
    Ok((npy_path, json_path))
}

/// Reads a tensor and the sidecar with the same stem.
pub fn read_grid(npy_path: &Path) -> Result<FeatureGrid, ExportError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ExportError::Io { path, source }
    };
    let array = read_npy(&std::fs::read(npy_path).map_err(io(npy_path))?)?;
    let json_path = npy_path.with_extension("json");
    let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(&json_path).map_err(io(&json_path))?)?;
    let [height, width, channels] = array.shape[..] else {
        return Err(bad(format!("expected a 3-d array, found shape {:?}", array.shape)));
    };
    let mask = sidecar.mask();
    if mask.len() != height * width {
        return Err(bad(format!("mask covers {} cells, tensor has {}", mask.len(), height * width)));
    }
    Ok(FeatureGrid {
        height,
        width,
        channels,
        data: array.data,
        mask,
        assignment: sidecar.assignment,
        pooled_cells: sidecar.pooled_cells,
        graph_label: sidecar.graph_label,
        grown: sidecar.grown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_2x2x1_layout() {
        let bytes = write_npy(&[2, 2, 1], &[0.0; 4]);
        assert_eq!(bytes.len(), 128 + 16);
        assert_eq!(&bytes[..8], b"\x93NUMPY\x01\x00");
        assert_eq!(bytes[127], b'\n');
        let header = std::str::from_utf8(&bytes[10..128]).unwrap();
        assert!(header.starts_with("{'descr': '<f4', 'fortran_order': False, 'shape': (2, 2, 1), }"));
    }

    #[test]
    fn round_trip_and_rejections() {
        let data: Vec<f32> = (0..24).map(|i| i as f32 * 0.5 - 3.0).collect();
        let bytes = write_npy(&[2, 3, 4], &data);
        assert_eq!(bytes.len() % 4, 0);
        assert_eq!((bytes.len() - 4 * 24) % 64, 0);
        let back = read_npy(&bytes).unwrap();
        assert_eq!(back, NpyArray { shape: vec![2, 3, 4], data });
        assert_eq!(read_npy(&write_npy(&[3], &[1.0, 2.0, 3.0])).unwrap().shape, vec![3]);
        assert!(read_npy(&bytes[..bytes.len() - 4]).is_err());
        assert!(read_npy(b"not an npy file").is_err());
    }

    #[test]
    fn mask_rle_starts_unoccupied() {
        let grid = FeatureGrid {
            height: 2,
            width: 3,
            channels: 1,
            data: vec![1.0, 0.0, 0.0, 0.0, 1.0, 1.0],
            mask: vec![true, false, false, false, true, true],
            assignment: vec![[0, 0], [1, 1], [1, 2]],
            pooled_cells: vec![],
            graph_label: Some(1),
            grown: false,
        };
        let sidecar = Sidecar::from_grid(&grid);
        assert_eq!(sidecar.mask_rle, vec![0, 1, 3, 2]);
        assert_eq!(sidecar.mask(), grid.mask);
        let text = serde_json::to_string(&sidecar).unwrap();
        assert_eq!(text, r#"{"mask_rle":[0,1,3,2],"assignment":[[0,0],[1,1],[1,2]],"pooled_cells":[],"graph_label":1}"#);
    }
}
