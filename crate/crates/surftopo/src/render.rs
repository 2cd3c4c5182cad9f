//! Quick-look PNG rendering of diagrams, persistence images, and
//! per-feature score grids.

use std::path::Path;

use image::{ImageFormat, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::ingest::{DepthMap, LabelMask};
use crate::persistence::PersistenceDiagram;

/// Color scheme of grid renderings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorMap {
    Gray,
    Viridis,
}

/// Map `t` in `[0, 1]` to a color.
fn color(t: f64, map: ColorMap) -> Rgb<u8> {
    let t = t.clamp(0.0, 1.0);
    match map {
        ColorMap::Gray => {
            let g = (t * 255.0).round() as u8;
            Rgb([g, g, g])
        }
        ColorMap::Viridis => {
            // Linear interpolation between five standard viridis anchors.
            const ANCHORS: [[f64; 3]; 5] = [
                [0x44 as f64, 0x01 as f64, 0x54 as f64],
                [0x3b as f64, 0x52 as f64, 0x8b as f64],
                [0x21 as f64, 0x91 as f64, 0x8c as f64],
                [0x5e as f64, 0xc9 as f64, 0x62 as f64],
                [0xfd as f64, 0xe7 as f64, 0x25 as f64],
            ];
            let pos = t * 4.0;
            let i = (pos.floor() as usize).min(3);
            let frac = pos - i as f64;
            let mix = |a: f64, b: f64| (a + (b - a) * frac).round() as u8;
            Rgb([
                mix(ANCHORS[i][0], ANCHORS[i + 1][0]),
                mix(ANCHORS[i][1], ANCHORS[i + 1][1]),
                mix(ANCHORS[i][2], ANCHORS[i + 1][2]),
            ])
        }
    }
}

fn save(img: RgbImage, path: &Path) -> Result<()> {
    img.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
}

/// Render `height x width` values as a colored grid PNG, each value an
/// `scale x scale` block. Values are normalized by the maximum finite
/// value; infinities saturate. With `flip_y` row 0 is drawn at the bottom
/// (natural for persistence-image axes).
pub fn render_grid(
    values: &[f64],
    height: usize,
    width: usize,
    scale: u32,
    map: ColorMap,
    flip_y: bool,
    path: &Path,
) -> Result<()> {
    if height == 0 || width == 0 || values.len() != height * width {
        return Err(Error::InvalidConfig(format!(
            "grid shape {height}x{width} does not match {} values",
            values.len()
        )));
    }
    if scale == 0 || scale > 256 {
        return Err(Error::InvalidConfig(format!(
            "render scale must lie in 1..=256, got {scale}"
        )));
    }
    let max = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let normalized = |v: f64| -> f64 {
        if v.is_infinite() && v > 0.0 {
            1.0
        } else if !v.is_finite() || v <= 0.0 || max <= 0.0 {
            0.0
        } else {
            v / max
        }
    };
    let img = RgbImage::from_fn(width as u32 * scale, height as u32 * scale, |px, py| {
        let gx = (px / scale) as usize;
        let mut gy = (py / scale) as usize;
        if flip_y {
            gy = height - 1 - gy;
        }
        color(normalized(values[gy * width + gx]), map)
    });
    save(img, path)
}

/// Render a persistence image (row 0 at the bottom).
pub fn render_pi(
    image: &crate::descriptors::PersistenceImage,
    scale: u32,
    map: ColorMap,
    path: &Path,
) -> Result<()> {
    let res = image.config.resolution;
    render_grid(&image.pixels, res, res, scale, map, true, path)
}

const DIAGRAM_BG: Rgb<u8> = Rgb([255, 255, 255]);
const DIAGRAM_DIAGONAL: Rgb<u8> = Rgb([200, 200, 200]);
const DIAGRAM_H0: Rgb<u8> = Rgb([31, 90, 166]);
const DIAGRAM_H1: Rgb<u8> = Rgb([196, 52, 38]);
const DIAGRAM_ESSENTIAL: Rgb<u8> = Rgb([120, 30, 150]);

/// Scatter a diagram into a `size x size` birth/death plot: dimension 0
/// blue, dimension 1 red, essential classes purple along the top edge, and
/// the diagonal in light gray.
pub fn render_diagram(diagram: &PersistenceDiagram, size: u32, path: &Path) -> Result<()> {
    if !(16..=4096).contains(&size) {
        return Err(Error::InvalidConfig(format!(
            "diagram plot size must lie in 16..=4096, got {size}"
        )));
    }
    let (lo, hi) = diagram.value_range;
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let mut img = RgbImage::from_pixel(size, size, DIAGRAM_BG);
    for i in 0..size {
        img.put_pixel(i, size - 1 - i, DIAGRAM_DIAGONAL);
    }
    let n = size as i64;
    let to_px = |v: f64| -> i64 { (((v - lo) / span) * (n - 1) as f64).round() as i64 };
    let mut dot = |x: i64, y_up: i64, c: Rgb<u8>| {
        for dy in -1..=1i64 {
            for dx in -1..=1i64 {
                let (px, py) = (x + dx, n - 1 - (y_up + dy));
                if (0..n).contains(&px) && (0..n).contains(&py) {
                    img.put_pixel(px as u32, py as u32, c);
                }
            }
        }
    };
    for p in &diagram.points {
        let x = to_px(p.birth);
        if p.death.is_finite() {
            let c = if p.dim == 0 { DIAGRAM_H0 } else { DIAGRAM_H1 };
            dot(x, to_px(p.death), c);
        } else {
            dot(x, n - 1, DIAGRAM_ESSENTIAL);
        }
    }
    save(img, path)
}

/// Render a depth map with the mask tinted red on top.
pub fn render_mask_overlay(depth: &DepthMap, mask: &LabelMask, path: &Path) -> Result<()> {
    if depth.height() != mask.height() || depth.width() != mask.width() {
        return Err(Error::ShapeMismatch {
            expected_height: depth.height(),
            expected_width: depth.width(),
            got_height: mask.height(),
            got_width: mask.width(),
        });
    }
    let (lo, hi) = depth.min_max();
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let img = RgbImage::from_fn(depth.width() as u32, depth.height() as u32, |x, y| {
        let (row, col) = (y as usize, x as usize);
        let g = (((depth.get(row, col) - lo) / span) * 255.0).round() as u8;
        if mask.get(row, col) != 0 {
            // Blend toward red to flag engraved pixels.
            let keep = |v: u8| (v as f64 * 0.45) as u8;
            Rgb([keep(g).saturating_add(140), keep(g), keep(g)])
        } else {
            Rgb([g, g, g])
        }
    });
    save(img, path)
}
