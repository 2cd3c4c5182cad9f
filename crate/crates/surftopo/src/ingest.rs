//! Depth-map / label-mask ingestion and sliding-window patch extraction.
//!
//! Depth maps are dense row-major grids of finite `f64` heights. Two on-disk
//! formats are supported: 16-bit grayscale PNG (values scaled to `[0, 1]`)
//! and plain whitespace-separated text matrices. Label masks mark engraved
//! pixels (`1`) versus natural background (`0`); patches inherit a class
//! label from the engraved fraction under the window.

use std::fmt;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};

use crate::error::{Error, Result};

/// Class label for patches dominated by engraved pixels.
pub const LABEL_ENGRAVED: u8 = 1;
/// Class label for natural (background) patches.
pub const LABEL_NATURAL: u8 = 2;

/// On-disk representation of a depth map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthFormat {
    /// Grayscale PNG; sample values are divided by the bit-depth maximum.
    Png16,
    /// Whitespace-separated rows of decimal numbers.
    TextMatrix,
}

impl fmt::Display for DepthFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DepthFormat::Png16 => write!(f, "png16"),
            DepthFormat::TextMatrix => write!(f, "text"),
        }
    }
}

/// A dense row-major grid of finite depth values.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl DepthMap {
    /// Build a map from row-major values, validating shape and finiteness.
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidConfig(
                "depth map must have at least one row and one column".into(),
            ));
        }
        if values.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected_height: height,
                expected_width: width,
                got_height: values.len() / width.max(1),
                got_width: width,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "depth value at flat index {i} is {}",
                values[i]
            )));
        }
        Ok(DepthMap {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Row-major backing slice.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `(row, col)`; panics when out of range.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.height && col < self.width, "pixel out of range");
        self.values[row * self.width + col]
    }

    /// Minimum and maximum value over the whole map.
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Write as 16-bit grayscale PNG. Values are clamped to `[0, 1]` and
    /// scaled by 65535, so a `Png16` round trip quantizes to 1/65535 steps.
    pub fn save_png16(&self, path: &Path) -> Result<()> {
        let mut buf =
            ImageBuffer::<Luma<u16>, Vec<u16>>::new(self.width as u32, self.height as u32);
        for (i, pixel) in buf.pixels_mut().enumerate() {
            let v = self.values[i].clamp(0.0, 1.0);
            *pixel = Luma([(v * 65535.0).round() as u16]);
        }
        buf.save(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    /// Write as a text matrix (space-separated values, one row per line).
    /// Values print with the shortest representation that round-trips, so a
    /// `TextMatrix` round trip is exact.
    pub fn save_text(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for r in 0..self.height {
            let row = &self.values[r * self.width..(r + 1) * self.width];
            for (c, v) in row.iter().enumerate() {
                if c > 0 {
                    out.push(' ');
                }
                out.push_str(&format!("{v}"));
            }
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// Binary ground-truth mask aligned with a depth map (1 = engraved).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMask {
    height: usize,
    width: usize,
    labels: Vec<u8>,
}

impl LabelMask {
    /// Build a mask from row-major 0/1 values.
    pub fn new(height: usize, width: usize, labels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidConfig(
                "label mask must have at least one row and one column".into(),
            ));
        }
        if labels.len() != height * width {
            return Err(Error::ShapeMismatch {
                expected_height: height,
                expected_width: width,
                got_height: labels.len() / width.max(1),
                got_width: width,
            });
        }
        if let Some(i) = labels.iter().position(|&v| v > 1) {
            return Err(Error::InvalidConfig(format!(
                "mask value at flat index {i} is {}; expected 0 or 1",
                labels[i]
            )));
        }
        Ok(LabelMask {
            height,
            width,
            labels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        assert!(row < self.height && col < self.width, "pixel out of range");
        self.labels[row * self.width + col]
    }

    /// Fraction of engraved pixels over the whole mask.
    pub fn engraved_fraction(&self) -> f64 {
        let ones: usize = self.labels.iter().map(|&v| v as usize).sum();
        ones as f64 / self.labels.len() as f64
    }

    /// Write as an 8-bit grayscale PNG (engraved pixels stored as 255).
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let mut buf = ImageBuffer::<Luma<u8>, Vec<u8>>::new(self.width as u32, self.height as u32);
        for (i, pixel) in buf.pixels_mut().enumerate() {
            *pixel = Luma([if self.labels[i] != 0 { 255 } else { 0 }]);
        }
        buf.save(path).map_err(|e| Error::Image {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}

/// Load a depth map from disk in the given format.
///
/// PNG inputs must be grayscale without alpha; 8-bit samples are divided by
/// 255 and 16-bit samples by 65535, so values land in `[0, 1]`.
pub fn load_depth_map(path: &Path, format: DepthFormat) -> Result<DepthMap> {
    match format {
        DepthFormat::Png16 => {
            let img = image::ImageReader::open(path)
                .map_err(|e| Error::io(path, e))?
                .decode()
                .map_err(|e| Error::Image {
                    path: path.to_path_buf(),
                    reason: e.to_string(),
                })?;
            let (values, width, height) = match img {
                DynamicImage::ImageLuma16(buf) => {
                    let (w, h) = buf.dimensions();
                    let v = buf.as_raw().iter().map(|&s| s as f64 / 65535.0).collect();
                    (v, w, h)
                }
                DynamicImage::ImageLuma8(buf) => {
                    let (w, h) = buf.dimensions();
                    let v = buf.as_raw().iter().map(|&s| s as f64 / 255.0).collect();
                    (v, w, h)
                }
                other => {
                    return Err(Error::Image {
                        path: path.to_path_buf(),
                        reason: format!(
                            "expected grayscale without alpha, got {:?}",
                            other.color()
                        ),
                    })
                }
            };
            DepthMap::new(height as usize, width as usize, values)
        }
        DepthFormat::TextMatrix => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            let mut rows: Vec<Vec<f64>> = Vec::new();
            let mut width = 0usize;
            for (lineno, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let mut row = Vec::new();
                for tok in line.split_whitespace() {
                    let v: f64 = tok.parse().map_err(|_| Error::TextMatrix {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        reason: format!("token {tok:?} is not a number"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::TextMatrix {
                            path: path.to_path_buf(),
                            line: lineno + 1,
                            reason: format!("non-finite value {v}"),
                        });
                    }
                    row.push(v);
                }
                if rows.is_empty() {
                    width = row.len();
                } else if row.len() != width {
                    return Err(Error::TextMatrix {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        reason: format!("row has {} values, expected {width}", row.len()),
                    });
                }
                rows.push(row);
            }
            if rows.is_empty() || width == 0 {
                return Err(Error::TextMatrix {
                    path: path.to_path_buf(),
                    line: 0,
                    reason: "matrix is empty".into(),
                });
            }
            let height = rows.len();
            DepthMap::new(height, width, rows.into_iter().flatten().collect())
        }
    }
}

/// Load a label mask from a grayscale PNG; any nonzero sample means engraved.
pub fn load_label_mask(path: &Path) -> Result<LabelMask> {
    let img = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    let (labels, width, height) = match img {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = buf.dimensions();
            let v = buf.as_raw().iter().map(|&s| u8::from(s != 0)).collect();
            (v, w, h)
        }
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            let v = buf.as_raw().iter().map(|&s| u8::from(s != 0)).collect();
            (v, w, h)
        }
        other => {
            return Err(Error::Image {
                path: path.to_path_buf(),
                reason: format!("expected grayscale without alpha, got {:?}", other.color()),
            })
        }
    };
    LabelMask::new(height as usize, width as usize, labels)
}

/// A square window cut from a depth map, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    /// `(row, col)` of the top-left pixel in the source map.
    pub origin: (usize, usize),
    /// Side length in pixels.
    pub size: usize,
    /// Row-major window values, `size * size` entries.
    pub values: Vec<f64>,
    /// Class label when a mask was supplied.
    pub label: Option<u8>,
    /// Fraction of engraved pixels under the window (when a mask was given).
    pub engraved_fraction: Option<f64>,
    /// Identifier of the parent map.
    pub source_id: String,
}

impl Patch {
    /// Value at `(row, col)` inside the patch.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        assert!(row < self.size && col < self.size, "pixel out of range");
        self.values[row * self.size + col]
    }

    /// Minimum and maximum over the patch.
    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }
}

/// Extract square sliding windows of side `size` with stride `step`.
///
/// Windows are emitted row-major over their origins; for an `H x W` map
/// there are `((H - size) / step + 1) * ((W - size) / step + 1)` of them.
/// When `mask` is given, each patch is labelled [`LABEL_ENGRAVED`] when the
/// engraved fraction under the window is `>= label_threshold`, otherwise
/// [`LABEL_NATURAL`].
pub fn extract_patches(
    map: &DepthMap,
    mask: Option<&LabelMask>,
    size: usize,
    step: usize,
    label_threshold: f64,
    source_id: &str,
) -> Result<Vec<Patch>> {
    if size < 2 {
        return Err(Error::InvalidConfig(format!(
            "patch size must be at least 2, got {size}"
        )));
    }
    if step == 0 {
        return Err(Error::InvalidConfig("patch step must be positive".into()));
    }
    if size > map.height || size > map.width {
        return Err(Error::InvalidConfig(format!(
            "patch size {size} exceeds map extent {}x{}",
            map.height, map.width
        )));
    }
    if !(0.0..=1.0).contains(&label_threshold) {
        return Err(Error::InvalidConfig(format!(
            "label threshold must lie in [0, 1], got {label_threshold}"
        )));
    }
    if let Some(m) = mask {
        if m.height != map.height || m.width != map.width {
            return Err(Error::ShapeMismatch {
                expected_height: map.height,
                expected_width: map.width,
                got_height: m.height,
                got_width: m.width,
            });
        }
    }

    let mut patches = Vec::new();
    let mut row = 0;
    while row + size <= map.height {
        let mut col = 0;
        while col + size <= map.width {
            let mut values = Vec::with_capacity(size * size);
            for r in row..row + size {
                values.extend_from_slice(
                    &map.values[r * map.width + col..r * map.width + col + size],
                );
            }
            let (label, engraved_fraction) = match mask {
                Some(m) => {
                    let mut ones = 0usize;
                    for r in row..row + size {
                        for c in col..col + size {
                            ones += m.labels[r * m.width + c] as usize;
                        }
                    }
                    let frac = ones as f64 / (size * size) as f64;
                    let label = if frac >= label_threshold {
                        LABEL_ENGRAVED
                    } else {
                        LABEL_NATURAL
                    };
                    (Some(label), Some(frac))
                }
                None => (None, None),
            };
            patches.push(Patch {
                origin: (row, col),
                size,
                values,
                label,
                engraved_fraction,
                source_id: source_id.to_string(),
            });
            col += step;
        }
        row += step;
    }
    Ok(patches)
}

/// Value rescaling applied to a patch before filtration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizeMode {
    /// Leave values untouched.
    None,
    /// Per-patch affine map of `[min, max]` onto `[0, 1]`.
    MinMax,
    /// Affine map of a fixed `[min, max]` onto `[0, 1]`, shared across
    /// patches (typically the global range of the source maps).
    Global { min: f64, max: f64 },
}

/// Rescale patch values according to `mode`.
///
/// Returns the rescaled patch and a degeneracy flag: a constant patch under
/// `MinMax` (or a zero-width global range) cannot be rescaled, so its values
/// all map to `0` and the flag is set.
pub fn normalize_patch(patch: &Patch, mode: NormalizeMode) -> Result<(Patch, bool)> {
    let mut out = patch.clone();
    let degenerate = match mode {
        NormalizeMode::None => false,
        NormalizeMode::MinMax => {
            let (lo, hi) = patch.min_max();
            scale_values(&mut out.values, lo, hi)
        }
        NormalizeMode::Global { min, max } => {
            if !min.is_finite() || !max.is_finite() {
                return Err(Error::NonFinite("global normalization range".into()));
            }
            if max < min {
                return Err(Error::InvalidConfig(format!(
                    "global normalization range is inverted: [{min}, {max}]"
                )));
            }
            scale_values(&mut out.values, min, max)
        }
    };
    Ok((out, degenerate))
}

/// Map `[lo, hi]` onto `[0, 1]` in place; returns true when the range is
/// degenerate (all outputs forced to 0).
fn scale_values(values: &mut [f64], lo: f64, hi: f64) -> bool {
    let span = hi - lo;
    if span <= 0.0 {
        values.iter_mut().for_each(|v| *v = 0.0);
        return true;
    }
    for v in values.iter_mut() {
        *v = (*v - lo) / span;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map_from(rows: &[&[f64]]) -> DepthMap {
        let h = rows.len();
        let w = rows[0].len();
        DepthMap::new(h, w, rows.concat()).unwrap()
    }

    #[test]
    fn text_matrix_parses_rows_and_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        std::fs::write(&path, "0 1\n2 3\n").unwrap();
        let m = load_depth_map(&path, DepthFormat::TextMatrix).unwrap();
        assert_eq!((m.height(), m.width()), (2, 2));
        assert_eq!(m.values(), &[0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn text_matrix_rejects_ragged_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        std::fs::write(&path, "0 1\n2\n").unwrap();
        let err = load_depth_map(&path, DepthFormat::TextMatrix).unwrap_err();
        assert!(matches!(err, Error::TextMatrix { line: 2, .. }));
    }

    #[test]
    fn text_matrix_rejects_non_numeric_and_non_finite() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        std::fs::write(&path, "0 x\n").unwrap();
        assert!(load_depth_map(&path, DepthFormat::TextMatrix).is_err());
        std::fs::write(&path, "0 nan\n").unwrap();
        assert!(load_depth_map(&path, DepthFormat::TextMatrix).is_err());
        std::fs::write(&path, "\n\n").unwrap();
        assert!(load_depth_map(&path, DepthFormat::TextMatrix).is_err());
    }

    #[test]
    fn text_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let m = map_from(&[&[0.1, 1.5e-7], &[-3.25, 4.0]]);
        m.save_text(&path).unwrap();
        let back = load_depth_map(&path, DepthFormat::TextMatrix).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn png16_scales_by_bit_depth_max() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_fn(3, 2, |x, y| Luma([(y * 3 + x) as u16 * 6000 + 2768]));
        buf.save(&path).unwrap();
        let m = load_depth_map(&path, DepthFormat::Png16).unwrap();
        assert_eq!((m.height(), m.width()), (2, 3));
        assert_eq!(m.get(0, 0), 2768.0 / 65535.0);
        // Sample 32768 maps to 32768/65535, not 0.5: scaling is by the
        // bit-depth maximum.
        assert_eq!(m.get(1, 2), 32768.0 / 65535.0);
    }

    #[test]
    fn png16_round_trip_quantizes_to_one_over_65535() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let m = map_from(&[&[0.0, 0.25], &[0.5, 1.0]]);
        m.save_png16(&path).unwrap();
        let back = load_depth_map(&path, DepthFormat::Png16).unwrap();
        for (a, b) in m.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 0.5 / 65535.0);
        }
    }

    #[test]
    fn png_rejects_color_images() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        let buf: ImageBuffer<image::Rgb<u8>, Vec<u8>> = ImageBuffer::new(2, 2);
        buf.save(&path).unwrap();
        assert!(matches!(
            load_depth_map(&path, DepthFormat::Png16),
            Err(Error::Image { .. })
        ));
        assert!(matches!(load_label_mask(&path), Err(Error::Image { .. })));
    }

    #[test]
    fn mask_round_trip_through_png() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.png");
        let mask = LabelMask::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        mask.save_png(&path).unwrap();
        let back = load_label_mask(&path).unwrap();
        assert_eq!(mask, back);
        assert_eq!(back.engraved_fraction(), 0.5);
    }

    #[test]
    fn patch_grid_dimensions_follow_the_stride_formula() {
        // 160x160 map, 128-pixel windows at stride 16: origins {0,16,32}^2.
        let m = DepthMap::new(160, 160, vec![0.0; 160 * 160]).unwrap();
        let patches = extract_patches(&m, None, 128, 16, 0.5, "m").unwrap();
        assert_eq!(patches.len(), 9);
        let origins: Vec<_> = patches.iter().map(|p| p.origin).collect();
        assert_eq!(
            origins,
            vec![
                (0, 0),
                (0, 16),
                (0, 32),
                (16, 0),
                (16, 16),
                (16, 32),
                (32, 0),
                (32, 16),
                (32, 32)
            ]
        );
        // 512x512 at the benchmark geometry: 25x25 windows.
        let m = DepthMap::new(512, 512, vec![0.0; 512 * 512]).unwrap();
        let n = extract_patches(&m, None, 128, 16, 0.5, "m").unwrap().len();
        assert_eq!(n, 625);
    }

    #[test]
    fn patch_values_window_the_map_row_major() {
        let m = map_from(&[
            &[0.0, 1.0, 2.0, 3.0],
            &[4.0, 5.0, 6.0, 7.0],
            &[8.0, 9.0, 10.0, 11.0],
        ]);
        let patches = extract_patches(&m, None, 2, 1, 0.5, "m").unwrap();
        assert_eq!(patches.len(), 2 * 3);
        let p = patches.iter().find(|p| p.origin == (1, 2)).unwrap();
        assert_eq!(p.values, vec![6.0, 7.0, 10.0, 11.0]);
        assert_eq!(p.get(1, 0), 10.0);
    }

    #[test]
    fn labels_compare_engraved_fraction_to_threshold() {
        let m = DepthMap::new(2, 4, vec![0.0; 8]).unwrap();
        // Window (0,0): fraction 3/4. Window (0,2): fraction 1/4.
        let mask = LabelMask::new(2, 4, vec![1, 1, 1, 0, 1, 0, 0, 0]).unwrap();
        let patches = extract_patches(&m, Some(&mask), 2, 2, 0.5, "m").unwrap();
        assert_eq!(patches.len(), 2);
        assert_eq!(patches[0].label, Some(LABEL_ENGRAVED));
        assert_eq!(patches[0].engraved_fraction, Some(0.75));
        assert_eq!(patches[1].label, Some(LABEL_NATURAL));
        assert_eq!(patches[1].engraved_fraction, Some(0.25));
        // Threshold is inclusive: fraction == threshold maps to engraved.
        let mask = LabelMask::new(2, 4, vec![1, 1, 0, 0, 0, 0, 1, 1]).unwrap();
        let patches = extract_patches(&m, Some(&mask), 2, 2, 0.5, "m").unwrap();
        assert_eq!(patches[0].label, Some(LABEL_ENGRAVED));
        assert_eq!(patches[1].label, Some(LABEL_ENGRAVED));
    }

    #[test]
    fn geometry_and_mask_validation() {
        let m = DepthMap::new(4, 4, vec![0.0; 16]).unwrap();
        assert!(extract_patches(&m, None, 8, 1, 0.5, "m").is_err());
        assert!(extract_patches(&m, None, 2, 0, 0.5, "m").is_err());
        assert!(extract_patches(&m, None, 1, 1, 0.5, "m").is_err());
        assert!(extract_patches(&m, None, 2, 1, 1.5, "m").is_err());
        let mask = LabelMask::new(2, 2, vec![0; 4]).unwrap();
        assert!(matches!(
            extract_patches(&m, Some(&mask), 2, 1, 0.5, "m"),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn minmax_normalization_maps_range_onto_unit_interval() {
        let m = map_from(&[&[0.0, 2.0], &[4.0, 8.0]]);
        let patch = &extract_patches(&m, None, 2, 1, 0.5, "m").unwrap()[0];
        let (n, degenerate) = normalize_patch(patch, NormalizeMode::MinMax).unwrap();
        assert!(!degenerate);
        assert_eq!(n.values, vec![0.0, 0.25, 0.5, 1.0]);
    }

    #[test]
    fn constant_patch_is_degenerate_under_minmax() {
        let m = map_from(&[&[3.0, 3.0], &[3.0, 3.0]]);
        let patch = &extract_patches(&m, None, 2, 1, 0.5, "m").unwrap()[0];
        let (n, degenerate) = normalize_patch(patch, NormalizeMode::MinMax).unwrap();
        assert!(degenerate);
        assert_eq!(n.values, vec![0.0; 4]);
    }

    #[test]
    fn global_normalization_shares_one_range() {
        let m = map_from(&[&[2.0, 4.0], &[6.0, 10.0]]);
        let patch = &extract_patches(&m, None, 2, 1, 0.5, "m").unwrap()[0];
        let mode = NormalizeMode::Global {
            min: 0.0,
            max: 20.0,
        };
        let (n, degenerate) = normalize_patch(patch, mode).unwrap();
        assert!(!degenerate);
        assert_eq!(n.values, vec![0.1, 0.2, 0.3, 0.5]);
        assert!(normalize_patch(patch, NormalizeMode::Global { min: 1.0, max: 0.0 }).is_err());
        assert!(normalize_patch(
            patch,
            NormalizeMode::Global {
                min: 0.0,
                max: f64::NAN
            }
        )
        .is_err());
    }

    #[test]
    fn depth_map_validation_rejects_bad_input() {
        assert!(DepthMap::new(0, 2, vec![]).is_err());
        assert!(DepthMap::new(2, 2, vec![0.0; 3]).is_err());
        assert!(DepthMap::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(LabelMask::new(1, 2, vec![0, 3]).is_err());
    }
}
