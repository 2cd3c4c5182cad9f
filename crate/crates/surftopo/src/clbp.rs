//! Completed local binary pattern (CLBP) maps over depth images.
//!
//! For every pixel far enough from the border, `samples` neighbors are read
//! by bilinear interpolation on a circle of `radius` pixels. The sign and
//! the magnitude of the neighbor-center differences are binarized into two
//! code maps:
//!
//! * sign: bit `k` set when the difference is `>= 0`;
//! * magnitude: bit `k` set when `|difference| >= mu`, where `mu` is the
//!   global mean absolute difference over the whole valid region.
//!
//! Codes are made rotation-insensitive either by taking the minimum over
//! cyclic bit rotations (`ri`) or by mapping uniform patterns to their
//! popcount and the rest to `samples + 1` (`riu2`). The resulting maps can
//! be re-interpreted as scalar fields and fed through the same filtration
//! pipeline as raw depth.

use std::path::Path;

use image::{ImageBuffer, Luma};

use crate::error::{Error, Result};
use crate::ingest::DepthMap;

/// Rotation-insensitive encoding of a circular bit pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClbpEncoding {
    /// Uniform patterns (at most two 0/1 transitions) map to their
    /// popcount, all others to `samples + 1`; `samples + 2` distinct codes.
    Riu2,
    /// Minimum over all cyclic rotations; up to `2^samples` distinct codes.
    Ri,
}

/// Which of the two CLBP component maps to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClbpComponent {
    Sign,
    Magnitude,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClbpConfig {
    /// Sampling circle radius in pixels.
    pub radius: usize,
    /// Number of neighbors on the circle; must be a positive multiple of 4
    /// so the sample ring is exactly 90-degree symmetric.
    pub samples: usize,
    pub encoding: ClbpEncoding,
}

impl ClbpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1..=16).contains(&self.radius) {
            return Err(Error::InvalidConfig(format!(
                "radius must lie in 1..=16, got {}",
                self.radius
            )));
        }
        if !(4..=24).contains(&self.samples) || !self.samples.is_multiple_of(4) {
            return Err(Error::InvalidConfig(format!(
                "samples must be a multiple of 4 in 4..=24, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    /// Number of distinct code values the encoding can produce.
    pub fn code_count(&self) -> usize {
        match self.encoding {
            ClbpEncoding::Riu2 => self.samples + 2,
            ClbpEncoding::Ri => 1usize << self.samples,
        }
    }
}

/// Sign and magnitude code maps over the valid region of a depth map.
#[derive(Debug, Clone, PartialEq)]
pub struct ClbpMaps {
    height: usize,
    width: usize,
    /// Offset of the valid region inside the source map (`radius` on both
    /// axes).
    pub origin: (usize, usize),
    pub config: ClbpConfig,
    /// Global magnitude threshold (mean absolute difference).
    pub mu: f64,
    s_codes: Vec<u32>,
    m_codes: Vec<u32>,
}

impl ClbpMaps {
    /// Valid-region height.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Valid-region width.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn codes(&self, component: ClbpComponent) -> &[u32] {
        match component {
            ClbpComponent::Sign => &self.s_codes,
            ClbpComponent::Magnitude => &self.m_codes,
        }
    }

    pub fn get(&self, component: ClbpComponent, row: usize, col: usize) -> u32 {
        assert!(row < self.height && col < self.width, "pixel out of range");
        self.codes(component)[row * self.width + col]
    }

    /// Reinterpret one code map as a scalar field for the filtration
    /// pipeline.
    pub fn to_depth_map(&self, component: ClbpComponent) -> DepthMap {
        let values = self.codes(component).iter().map(|&c| c as f64).collect();
        DepthMap::new(self.height, self.width, values)
            .expect("code map dimensions are valid by construction")
    }

    /// Save one code map as grayscale PNG (8-bit when the encoding fits in
    /// a byte, 16-bit otherwise; wider encodings are rejected).
    pub fn save_png(&self, component: ClbpComponent, path: &Path) -> Result<()> {
        let codes = self.codes(component);
        let (w, h) = (self.width as u32, self.height as u32);
        let err = |e: image::ImageError| Error::Image {
            path: path.to_path_buf(),
            reason: e.to_string(),
        };
        if self.config.code_count() <= 256 {
            let mut buf = ImageBuffer::<Luma<u8>, Vec<u8>>::new(w, h);
            for (i, px) in buf.pixels_mut().enumerate() {
                *px = Luma([codes[i] as u8]);
            }
            buf.save(path).map_err(err)
        } else if self.config.code_count() <= 65536 {
            let mut buf = ImageBuffer::<Luma<u16>, Vec<u16>>::new(w, h);
            for (i, px) in buf.pixels_mut().enumerate() {
                *px = Luma([codes[i] as u16]);
            }
            buf.save(path).map_err(err)
        } else {
            Err(Error::InvalidConfig(format!(
                "{} codes do not fit a 16-bit PNG",
                self.config.code_count()
            )))
        }
    }
}

/// Compute the CLBP sign and magnitude maps of a depth map.
pub fn clbp_maps(map: &DepthMap, config: &ClbpConfig) -> Result<ClbpMaps> {
    config.validate()?;
    let r = config.radius;
    let n = config.samples;
    let (h, w) = (map.height(), map.width());
    if h <= 2 * r || w <= 2 * r {
        return Err(Error::InvalidConfig(format!(
            "map {h}x{w} leaves no valid region at radius {r}"
        )));
    }
    let (vh, vw) = (h - 2 * r, w - 2 * r);
    let offsets = sample_offsets(r, n);

    // First pass: neighbor-center differences for every valid pixel, kept
    // for the second pass so each sample is interpolated once.
    let mut diffs = vec![0.0f64; vh * vw * n];
    for vi in 0..vh {
        for vj in 0..vw {
            let (i, j) = (vi + r, vj + r);
            let center = map.get(i, j);
            let base = (vi * vw + vj) * n;
            for (k, &(dy, dx)) in offsets.iter().enumerate() {
                let sample = bilinear(map, i as f64 + dy, j as f64 + dx);
                diffs[base + k] = sample - center;
            }
        }
    }
    let mu = diffs.iter().map(|d| d.abs()).sum::<f64>() / diffs.len() as f64;

    let mut s_codes = vec![0u32; vh * vw];
    let mut m_codes = vec![0u32; vh * vw];
    for p in 0..vh * vw {
        let mut s_raw = 0u32;
        let mut m_raw = 0u32;
        for k in 0..n {
            let d = diffs[p * n + k];
            if d >= 0.0 {
                s_raw |= 1 << k;
            }
            if d.abs() >= mu {
                m_raw |= 1 << k;
            }
        }
        s_codes[p] = encode(s_raw, n as u32, config.encoding);
        m_codes[p] = encode(m_raw, n as u32, config.encoding);
    }

    Ok(ClbpMaps {
        height: vh,
        width: vw,
        origin: (r, r),
        config: config.clone(),
        mu,
        s_codes,
        m_codes,
    })
}

/// `(dy, dx)` sample offsets at angles `2 pi k / samples`.
///
/// Only the first quadrant is computed trigonometrically; the rest are
/// exact 90-degree rotations of it, so the ring is exactly symmetric under
/// quarter turns. Offsets within 1e-9 of an integer are snapped, making
/// axis-aligned samples exact lattice reads.
fn sample_offsets(radius: usize, samples: usize) -> Vec<(f64, f64)> {
    let q = samples / 4;
    let mut out = vec![(0.0, 0.0); samples];
    for k in 0..q {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        let dx = snap(radius as f64 * theta.cos());
        let dy = snap(radius as f64 * theta.sin());
        out[k] = (dy, dx);
        out[k + q] = (dx, -dy);
        out[k + 2 * q] = (-dy, -dx);
        out[k + 3 * q] = (-dx, dy);
    }
    out
}

fn snap(v: f64) -> f64 {
    let nearest = v.round();
    if (v - nearest).abs() < 1e-9 {
        nearest
    } else {
        v
    }
}

/// Bilinear interpolation at real coordinates inside the map.
fn bilinear(map: &DepthMap, y: f64, x: f64) -> f64 {
    let y0 = y.floor() as usize;
    let x0 = x.floor() as usize;
    let fy = y - y0 as f64;
    let fx = x - x0 as f64;
    let y1 = (y0 + 1).min(map.height() - 1);
    let x1 = (x0 + 1).min(map.width() - 1);
    (1.0 - fy) * (1.0 - fx) * map.get(y0, x0)
        + (1.0 - fy) * fx * map.get(y0, x1)
        + fy * (1.0 - fx) * map.get(y1, x0)
        + fy * fx * map.get(y1, x1)
}

fn encode(raw: u32, n: u32, encoding: ClbpEncoding) -> u32 {
    match encoding {
        ClbpEncoding::Ri => min_rotation(raw, n),
        ClbpEncoding::Riu2 => {
            if transitions(raw, n) <= 2 {
                raw.count_ones()
            } else {
                n + 1
            }
        }
    }
}

/// Minimum value over all cyclic rotations of an `n`-bit pattern.
fn min_rotation(raw: u32, n: u32) -> u32 {
    let mask = (1u64 << n) - 1;
    (0..n)
        .map(|s| ((((raw as u64) >> s) | ((raw as u64) << (n - s))) & mask) as u32)
        .min()
        .unwrap()
}

/// Number of circular 0/1 transitions of an `n`-bit pattern.
fn transitions(raw: u32, n: u32) -> u32 {
    let mask = (1u64 << n) - 1;
    let rot1 = ((((raw as u64) >> 1) | ((raw as u64) << (n - 1))) & mask) as u32;
    (raw ^ rot1).count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn map_from(rows: &[&[f64]]) -> DepthMap {
        DepthMap::new(rows.len(), rows[0].len(), rows.concat()).unwrap()
    }

    fn cfg(radius: usize, samples: usize, encoding: ClbpEncoding) -> ClbpConfig {
        ClbpConfig {
            radius,
            samples,
            encoding,
        }
    }

    #[test]
    fn riu2_maps_uniform_patterns_to_popcount() {
        // 0b00001111 has two circular transitions: uniform, popcount 4.
        assert_eq!(encode(0b0000_1111, 8, ClbpEncoding::Riu2), 4);
        assert_eq!(encode(0, 8, ClbpEncoding::Riu2), 0);
        assert_eq!(encode(0xFF, 8, ClbpEncoding::Riu2), 8);
        // 0b01010101 alternates: eight transitions, mapped to n + 1.
        assert_eq!(encode(0b0101_0101, 8, ClbpEncoding::Riu2), 9);
        assert_eq!(encode(0b0001_1000, 8, ClbpEncoding::Riu2), 2);
        assert_eq!(encode(0b1000_0001, 8, ClbpEncoding::Riu2), 2);
    }

    #[test]
    fn ri_takes_the_minimal_rotation() {
        assert_eq!(encode(0b0110_0000, 8, ClbpEncoding::Ri), 0b11);
        assert_eq!(encode(0b1000_0001, 8, ClbpEncoding::Ri), 0b11);
        assert_eq!(encode(0, 8, ClbpEncoding::Ri), 0);
        assert_eq!(encode(0xFF, 8, ClbpEncoding::Ri), 0xFF);
        // 16-bit patterns use the full width.
        assert_eq!(encode(0b1000_0000_0000_0001, 16, ClbpEncoding::Ri), 0b11);
    }

    #[test]
    fn hand_computed_codes_on_a_three_by_three() {
        // Center 3, axis neighbors (right, down, left, up) = 9, 2, 4, 5.
        // Differences: +6, -1, +1, +2 -> sign bits 1101 (value 13).
        // |d| = 6, 1, 1, 2; mu = 2.5 -> magnitude bits 0001 (value 1).
        let m = map_from(&[&[1.0, 5.0, 1.0], &[4.0, 3.0, 9.0], &[1.0, 2.0, 1.0]]);

        let ri = clbp_maps(&m, &cfg(1, 4, ClbpEncoding::Ri)).unwrap();
        assert_eq!((ri.height(), ri.width()), (1, 1));
        assert_eq!(ri.origin, (1, 1));
        assert_eq!(ri.mu, 2.5);
        // min rotations: 1101 -> 0111 = 7; 0001 -> 0001 = 1.
        assert_eq!(ri.get(ClbpComponent::Sign, 0, 0), 0b0111);
        assert_eq!(ri.get(ClbpComponent::Magnitude, 0, 0), 0b0001);

        let riu2 = clbp_maps(&m, &cfg(1, 4, ClbpEncoding::Riu2)).unwrap();
        assert_eq!(riu2.get(ClbpComponent::Sign, 0, 0), 3);
        assert_eq!(riu2.get(ClbpComponent::Magnitude, 0, 0), 1);
    }

    #[test]
    fn flat_images_give_all_ones_codes() {
        let m = DepthMap::new(7, 7, vec![4.0; 49]).unwrap();
        let maps = clbp_maps(&m, &cfg(2, 8, ClbpEncoding::Riu2)).unwrap();
        assert_eq!((maps.height(), maps.width()), (3, 3));
        assert_eq!(maps.mu, 0.0);
        // All differences are zero: signs are >= 0 and magnitudes >= mu = 0,
        // so both patterns are all ones -> riu2 code = samples.
        assert!(maps.codes(ClbpComponent::Sign).iter().all(|&c| c == 8));
        assert!(maps.codes(ClbpComponent::Magnitude).iter().all(|&c| c == 8));
    }

    #[test]
    fn valid_region_geometry_and_errors() {
        let m = DepthMap::new(10, 8, vec![0.0; 80]).unwrap();
        let maps = clbp_maps(&m, &cfg(3, 8, ClbpEncoding::Riu2)).unwrap();
        assert_eq!((maps.height(), maps.width()), (4, 2));
        assert_eq!(maps.origin, (3, 3));
        let small = DepthMap::new(6, 6, vec![0.0; 36]).unwrap();
        assert!(clbp_maps(&small, &cfg(3, 8, ClbpEncoding::Riu2)).is_err());
        assert!(clbp_maps(&m, &cfg(0, 8, ClbpEncoding::Riu2)).is_err());
        assert!(clbp_maps(&m, &cfg(3, 6, ClbpEncoding::Riu2)).is_err());
        assert!(clbp_maps(&m, &cfg(3, 28, ClbpEncoding::Riu2)).is_err());
    }

    #[test]
    fn code_maps_travel_through_depth_map_and_png() {
        let values: Vec<f64> = (0..100).map(|i| ((i * 37) % 11) as f64).collect();
        let m = DepthMap::new(10, 10, values).unwrap();
        let maps = clbp_maps(&m, &cfg(2, 8, ClbpEncoding::Riu2)).unwrap();
        let field = maps.to_depth_map(ClbpComponent::Sign);
        assert_eq!((field.height(), field.width()), (6, 6));
        for row in 0..6 {
            for col in 0..6 {
                assert_eq!(
                    field.get(row, col),
                    maps.get(ClbpComponent::Sign, row, col) as f64
                );
            }
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.png");
        maps.save_png(ClbpComponent::Sign, &path).unwrap();
        let back = crate::ingest::load_depth_map(&path, crate::ingest::DepthFormat::Png16).unwrap();
        for (i, &code) in maps.codes(ClbpComponent::Sign).iter().enumerate() {
            assert_eq!((back.values()[i] * 255.0).round() as u32, code);
        }
    }

    #[test]
    fn sixteen_bit_ri_codes_save_as_png16() {
        let values: Vec<f64> = (0..144).map(|i| ((i * 53) % 17) as f64).collect();
        let m = DepthMap::new(12, 12, values).unwrap();
        let maps = clbp_maps(&m, &cfg(2, 16, ClbpEncoding::Ri)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.png");
        maps.save_png(ClbpComponent::Magnitude, &path).unwrap();
        let back = crate::ingest::load_depth_map(&path, crate::ingest::DepthFormat::Png16).unwrap();
        for (i, &code) in maps.codes(ClbpComponent::Magnitude).iter().enumerate() {
            assert_eq!((back.values()[i] * 65535.0).round() as u32, code);
        }
    }

    /// Rotating the image by 90 degrees permutes the sample ring by a
    /// quarter turn, so rotation-insensitive codes rotate with the image.
    #[test]
    fn codes_are_coherent_under_quarter_rotations() {
        let side = 9;
        let values: Vec<f64> = (0..side * side).map(|i| ((i * 157) % 23) as f64).collect();
        let m = DepthMap::new(side, side, values.clone()).unwrap();
        // Counterclockwise quarter turn: rotated(i, j) = original(j, side-1-i).
        let rotated: Vec<f64> = (0..side * side)
            .map(|idx| {
                let (i, j) = (idx / side, idx % side);
                values[j * side + (side - 1 - i)]
            })
            .collect();
        let mr = DepthMap::new(side, side, rotated).unwrap();
        for encoding in [ClbpEncoding::Riu2, ClbpEncoding::Ri] {
            let a = clbp_maps(&m, &cfg(2, 8, encoding)).unwrap();
            let b = clbp_maps(&mr, &cfg(2, 8, encoding)).unwrap();
            // Same multiset of differences, summed in another order.
            assert!((a.mu - b.mu).abs() < 1e-12);
            let side_v = a.height();
            for component in [ClbpComponent::Sign, ClbpComponent::Magnitude] {
                for i in 0..side_v {
                    for j in 0..side_v {
                        assert_eq!(
                            b.get(component, i, j),
                            a.get(component, j, side_v - 1 - i),
                            "{component:?} mismatch at ({i}, {j})"
                        );
                    }
                }
            }
        }
    }

    proptest! {
        /// `ri` codes are invariant under any rotation of the bit ring, and
        /// `riu2` of a uniform pattern counts its bits.
        #[test]
        fn encodings_are_rotation_invariant(raw in 0u32..(1 << 16), shift in 0u32..16) {
            let n = 16u32;
            let mask = (1u64 << n) - 1;
            let rotated =
                ((((raw as u64) >> shift) | ((raw as u64) << (n - shift))) & mask) as u32;
            prop_assert_eq!(
                encode(raw, n, ClbpEncoding::Ri),
                encode(rotated, n, ClbpEncoding::Ri)
            );
            prop_assert_eq!(
                encode(raw, n, ClbpEncoding::Riu2),
                encode(rotated, n, ClbpEncoding::Riu2)
            );
            prop_assert!(encode(raw, n, ClbpEncoding::Riu2) <= n + 1);
            prop_assert!(encode(raw, n, ClbpEncoding::Ri) <= raw);
        }
    }
}
