//! Seeded synthetic surface generator for benchmarking.
//!
//! A sample is composed of
//! 1. a smooth random base relief (a superposition of plane waves whose
//!    amplitudes decay as `frequency^-roughness`),
//! 2. engraved grooves: curved polyline strokes carved into the surface
//!    with a smooth cosine-squared depth profile (these define the ground
//!    truth mask),
//! 3. natural pits: compact round dents of comparable depth that are *not*
//!    engravings — clutter that penalizes classifiers keying on mere
//!    presence of deep wells rather than their arrangement, and
//! 4. per-pixel noise.
//!
//! Strokes are added until the engraved pixel fraction reaches the target
//! band; candidate strokes that would overshoot are discarded (the draw
//! stays deterministic in the seed because rejected candidates consume the
//! same random stream).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ingest::{DepthMap, LabelMask};

/// Parameters of one synthetic sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub height: usize,
    pub width: usize,
    pub seed: u64,
    /// Number of plane-wave components of the base relief.
    pub waves: usize,
    /// Spectral decay exponent of the wave amplitudes.
    pub roughness: f64,
    /// Peak-to-peak range of the normalized base relief.
    pub base_amplitude: f64,
    /// Amplitude of the uniform per-pixel noise.
    pub noise: f64,
    /// Carving depth of a groove at its centerline.
    pub groove_depth: f64,
    /// Half-width of a groove in pixels.
    pub groove_width: f64,
    /// Segments per stroke polyline.
    pub stroke_steps: usize,
    /// Length of one polyline segment in pixels.
    pub stroke_step_len: f64,
    /// Maximum heading change per segment (radians); larger values curl
    /// the strokes.
    pub stroke_turn: f64,
    /// Relative spread of per-stroke and per-pit depths.
    pub depth_jitter: f64,
    /// Relative spread of per-stroke widths and per-pit radii.
    pub width_jitter: f64,
    /// Desired engraved pixel fraction (0 disables engraving).
    pub target_fraction: f64,
    /// Accepted deviation from the target fraction.
    pub fraction_tolerance: f64,
    /// Candidate strokes drawn before giving up on the target band.
    pub max_stroke_attempts: usize,
    /// Number of natural pits.
    pub pits: usize,
    /// Carving depth of a pit at its center.
    pub pit_depth: f64,
    /// Nominal pit radius in pixels.
    pub pit_radius: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            height: 512,
            width: 512,
            seed: 0,
            waves: 48,
            roughness: 1.1,
            base_amplitude: 0.22,
            noise: 0.004,
            groove_depth: 0.32,
            groove_width: 7.0,
            stroke_steps: 70,
            stroke_step_len: 4.0,
            stroke_turn: 0.55,
            depth_jitter: 0.25,
            width_jitter: 0.3,
            target_fraction: 0.166,
            fraction_tolerance: 0.02,
            max_stroke_attempts: 400,
            pits: 140,
            pit_depth: 0.26,
            pit_radius: 7.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.height < 8 || self.width < 8 {
            return Err(Error::InvalidConfig(format!(
                "surface must be at least 8x8, got {}x{}",
                self.height, self.width
            )));
        }
        if self.waves == 0 {
            return Err(Error::InvalidConfig("waves must be positive".into()));
        }
        for (name, v, lo, hi) in [
            ("roughness", self.roughness, 0.0, 4.0),
            ("base_amplitude", self.base_amplitude, 0.0, 1.0),
            ("noise", self.noise, 0.0, 0.2),
            ("groove_depth", self.groove_depth, 0.0, 1.0),
            ("depth_jitter", self.depth_jitter, 0.0, 0.9),
            ("width_jitter", self.width_jitter, 0.0, 0.9),
            ("target_fraction", self.target_fraction, 0.0, 0.6),
            ("pit_depth", self.pit_depth, 0.0, 1.0),
        ] {
            if !(v.is_finite() && (lo..=hi).contains(&v)) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [{lo}, {hi}], got {v}"
                )));
            }
        }
        if !(self.groove_width.is_finite() && self.groove_width >= 1.0) {
            return Err(Error::InvalidConfig(
                "groove_width must be at least 1 pixel".into(),
            ));
        }
        if !(self.pit_radius.is_finite() && self.pit_radius >= 1.0) {
            return Err(Error::InvalidConfig(
                "pit_radius must be at least 1 pixel".into(),
            ));
        }
        if self.target_fraction > 0.0 {
            if !(self.fraction_tolerance.is_finite() && self.fraction_tolerance > 0.0) {
                return Err(Error::InvalidConfig(
                    "fraction_tolerance must be positive".into(),
                ));
            }
            if self.stroke_steps == 0
                || self.stroke_step_len.is_nan()
                || self.stroke_step_len <= 0.0
            {
                return Err(Error::InvalidConfig(
                    "strokes need positive steps and step length".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A generated surface with its ground truth.
#[derive(Debug, Clone)]
pub struct SyntheticSample {
    pub depth: DepthMap,
    pub mask: LabelMask,
    /// Achieved engraved pixel fraction.
    pub engraved_fraction: f64,
}

/// Generate one sample (see the module docs for the composition).
pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticSample> {
    spec.validate()?;
    let (h, w) = (spec.height, spec.width);
    let n = h * w;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let base = base_relief(spec, &mut rng);
    // Carvings are depths below the base, kept separately so overlapping
    // tools deepen to the deepest one instead of accumulating.
    let mut carve = vec![0.0f64; n];
    let mut mask = vec![0u8; n];

    carve_pits(spec, &mut rng, &mut carve);
    let engraved = carve_strokes(spec, &mut rng, &mut carve, &mut mask)?;

    let mut values = vec![0.0f64; n];
    for i in 0..n {
        let noise = if spec.noise > 0.0 {
            spec.noise * (2.0 * rng.random::<f64>() - 1.0)
        } else {
            0.0
        };
        values[i] = (base[i] - carve[i] + noise).clamp(0.0, 1.0);
    }

    Ok(SyntheticSample {
        depth: DepthMap::new(h, w, values)?,
        mask: LabelMask::new(h, w, mask)?,
        engraved_fraction: engraved as f64 / n as f64,
    })
}

/// Generate `count` samples; sample `i` uses `spec.seed + i`.
pub fn generate_set(spec: &SyntheticSpec, count: usize) -> Result<Vec<SyntheticSample>> {
    (0..count)
        .map(|i| {
            let mut s = spec.clone();
            s.seed = spec.seed.wrapping_add(i as u64);
            generate(&s)
        })
        .collect()
}

/// Smooth base relief normalized to `0.5 +- base_amplitude / 2`.
fn base_relief(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let (h, w) = (spec.height, spec.width);
    let scale = h.max(w) as f64;
    // (kx, ky, phase, amplitude) per wave; frequency in cycles per extent.
    let waves: Vec<(f64, f64, f64, f64)> = (0..spec.waves)
        .map(|_| {
            let freq = 2.0 + 22.0 * rng.random::<f64>();
            let theta = std::f64::consts::TAU * rng.random::<f64>();
            let phase = std::f64::consts::TAU * rng.random::<f64>();
            let k = std::f64::consts::TAU * freq / scale;
            let amp = freq.powf(-spec.roughness);
            (k * theta.cos(), k * theta.sin(), phase, amp)
        })
        .collect();
    let mut raw = vec![0.0f64; h * w];
    raw.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        for (x, v) in row.iter_mut().enumerate() {
            let mut sum = 0.0;
            for &(kx, ky, phase, amp) in &waves {
                sum += amp * (kx * x as f64 + ky * y as f64 + phase).sin();
            }
            *v = sum;
        }
    });
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (max - min).max(f64::MIN_POSITIVE);
    let lo = 0.5 - spec.base_amplitude / 2.0;
    raw.iter_mut()
        .for_each(|v| *v = lo + spec.base_amplitude * (*v - min) / span);
    raw
}

/// Smooth radial/transversal carving profile: full depth at the center,
/// zero (with zero slope) at distance `width`.
fn profile(depth: f64, dist: f64, width: f64) -> f64 {
    if dist >= width {
        return 0.0;
    }
    let c = (std::f64::consts::FRAC_PI_2 * dist / width).cos();
    depth * c * c
}

fn jittered(value: f64, jitter: f64, rng: &mut ChaCha8Rng) -> f64 {
    value * (1.0 + jitter * (2.0 * rng.random::<f64>() - 1.0))
}

fn carve_pits(spec: &SyntheticSpec, rng: &mut ChaCha8Rng, carve: &mut [f64]) {
    let (h, w) = (spec.height as f64, spec.width as f64);
    for _ in 0..spec.pits {
        let cy = h * rng.random::<f64>();
        let cx = w * rng.random::<f64>();
        let radius = jittered(spec.pit_radius, spec.width_jitter, rng).max(1.0);
        let depth = jittered(spec.pit_depth, spec.depth_jitter, rng).max(0.0);
        let y0 = ((cy - radius).floor().max(0.0)) as usize;
        let y1 = ((cy + radius).ceil().min(h - 1.0)) as usize;
        let x0 = ((cx - radius).floor().max(0.0)) as usize;
        let x1 = ((cx + radius).ceil().min(w - 1.0)) as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let d = ((y as f64 - cy).powi(2) + (x as f64 - cx).powi(2)).sqrt();
                let p = profile(depth, d, radius);
                let cell = &mut carve[y * spec.width + x];
                *cell = cell.max(p);
            }
        }
    }
}

/// One carved stroke as a pixel-index set with per-pixel carving depths.
struct Stroke {
    touched: Vec<(usize, f64)>,
}

fn propose_stroke(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Stroke {
    let (h, w) = (spec.height as f64, spec.width as f64);
    let width = jittered(spec.groove_width, spec.width_jitter, rng).max(1.0);
    let depth = jittered(spec.groove_depth, spec.depth_jitter, rng).max(0.0);
    let mut y = h * rng.random::<f64>();
    let mut x = w * rng.random::<f64>();
    let mut heading = std::f64::consts::TAU * rng.random::<f64>();
    let mut points = Vec::with_capacity(spec.stroke_steps + 1);
    points.push((y, x));
    for _ in 0..spec.stroke_steps {
        heading += spec.stroke_turn * (2.0 * rng.random::<f64>() - 1.0);
        y += spec.stroke_step_len * heading.sin();
        x += spec.stroke_step_len * heading.cos();
        // Bounce off the borders so strokes stay on the surface.
        if y < 0.0 || y > h - 1.0 {
            y = y.clamp(0.0, h - 1.0);
            heading = -heading;
        }
        if x < 0.0 || x > w - 1.0 {
            x = x.clamp(0.0, w - 1.0);
            heading = std::f64::consts::PI - heading;
        }
        points.push((y, x));
    }

    // Rasterize: deepest profile over all segments per touched pixel.
    let mut best: std::collections::HashMap<usize, f64> = std::collections::HashMap::new();
    for seg in points.windows(2) {
        let (ay, ax) = seg[0];
        let (by, bx) = seg[1];
        let y0 = ((ay.min(by) - width).floor().max(0.0)) as usize;
        let y1 = ((ay.max(by) + width).ceil().min(h - 1.0)) as usize;
        let x0 = ((ax.min(bx) - width).floor().max(0.0)) as usize;
        let x1 = ((ax.max(bx) + width).ceil().min(w - 1.0)) as usize;
        for py in y0..=y1 {
            for px in x0..=x1 {
                let d = point_segment_distance(py as f64, px as f64, ay, ax, by, bx);
                if d < width {
                    let p = profile(depth, d, width);
                    let entry = best.entry(py * spec.width + px).or_insert(0.0);
                    *entry = entry.max(p);
                }
            }
        }
    }
    let mut touched: Vec<(usize, f64)> = best.into_iter().collect();
    touched.sort_unstable_by_key(|&(i, _)| i);
    Stroke { touched }
}

fn point_segment_distance(py: f64, px: f64, ay: f64, ax: f64, by: f64, bx: f64) -> f64 {
    let (dy, dx) = (by - ay, bx - ax);
    let len2 = dy * dy + dx * dx;
    let t = if len2 > 0.0 {
        (((py - ay) * dy + (px - ax) * dx) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (cy, cx) = (ay + t * dy, ax + t * dx);
    ((py - cy).powi(2) + (px - cx).powi(2)).sqrt()
}

/// Add strokes until the engraved fraction enters the target band; returns
/// the number of engraved pixels.
fn carve_strokes(
    spec: &SyntheticSpec,
    rng: &mut ChaCha8Rng,
    carve: &mut [f64],
    mask: &mut [u8],
) -> Result<usize> {
    if spec.target_fraction == 0.0 {
        return Ok(0);
    }
    let n = (spec.height * spec.width) as f64;
    let lower = spec.target_fraction - spec.fraction_tolerance;
    let upper = spec.target_fraction + spec.fraction_tolerance;
    let mut engraved = 0usize;
    let mut attempts = 0usize;
    while (engraved as f64) < lower * n {
        if attempts >= spec.max_stroke_attempts {
            return Err(Error::Experiment(format!(
                "engraved fraction {:.4} did not reach the band [{lower:.4}, {upper:.4}] \
                 within {} stroke candidates",
                engraved as f64 / n,
                spec.max_stroke_attempts
            )));
        }
        attempts += 1;
        let stroke = propose_stroke(spec, rng);
        let new_pixels = stroke
            .touched
            .iter()
            .filter(|&&(i, _)| mask[i] == 0)
            .count();
        if (engraved + new_pixels) as f64 > upper * n {
            continue; // Would overshoot; draw a different stroke.
        }
        for &(i, p) in &stroke.touched {
            carve[i] = carve[i].max(p);
            if mask[i] == 0 {
                mask[i] = 1;
                engraved += 1;
            }
        }
    }
    Ok(engraved)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            height: 256,
            width: 256,
            seed,
            pits: 40,
            ..Default::default()
        }
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let a = generate(&small_spec(5)).unwrap();
        let b = generate(&small_spec(5)).unwrap();
        assert_eq!(a.depth.values(), b.depth.values());
        assert_eq!(a.mask.labels(), b.mask.labels());
        assert_eq!(a.engraved_fraction, b.engraved_fraction);
        let c = generate(&small_spec(6)).unwrap();
        assert_ne!(a.depth.values(), c.depth.values());
    }

    #[test]
    fn values_stay_in_range_and_fraction_hits_the_band() {
        let spec = small_spec(1);
        let sample = generate(&spec).unwrap();
        assert_eq!(sample.depth.height(), 256);
        assert_eq!(sample.depth.width(), 256);
        assert!(sample
            .depth
            .values()
            .iter()
            .all(|v| v.is_finite() && (0.0..=1.0).contains(v)));
        let f = sample.engraved_fraction;
        assert!(
            (spec.target_fraction - spec.fraction_tolerance
                ..=spec.target_fraction + spec.fraction_tolerance)
                .contains(&f),
            "fraction {f}"
        );
        // The reported fraction is the mask average.
        assert!((f - sample.mask.engraved_fraction()).abs() < 1e-12);
    }

    #[test]
    fn grooves_depress_the_engraved_region() {
        let sample = generate(&small_spec(2)).unwrap();
        let values = sample.depth.values();
        let mask = sample.mask.labels();
        let mean = |want: u8| {
            let picked: Vec<f64> = values
                .iter()
                .zip(mask)
                .filter(|&(_, &m)| m == want)
                .map(|(&v, _)| v)
                .collect();
            picked.iter().sum::<f64>() / picked.len() as f64
        };
        assert!(
            mean(1) + 0.1 < mean(0),
            "engraved {} natural {}",
            mean(1),
            mean(0)
        );
    }

    #[test]
    fn pits_carve_wells_outside_the_mask() {
        let spec = small_spec(3);
        let sample = generate(&spec).unwrap();
        let min_outside = sample
            .depth
            .values()
            .iter()
            .zip(sample.mask.labels())
            .filter(|&(_, &m)| m == 0)
            .map(|(&v, _)| v)
            .fold(f64::INFINITY, f64::min);
        // The base floor sits at 0.39; pits dig well below it.
        assert!(min_outside < 0.3, "min outside mask {min_outside}");
        let no_pits = generate(&SyntheticSpec {
            pits: 0,
            target_fraction: 0.0,
            ..spec
        })
        .unwrap();
        let floor = no_pits
            .depth
            .values()
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        assert!(floor > 0.35, "pit-free floor {floor}");
    }

    #[test]
    fn zero_target_disables_engraving() {
        let spec = SyntheticSpec {
            target_fraction: 0.0,
            ..small_spec(4)
        };
        let sample = generate(&spec).unwrap();
        assert_eq!(sample.engraved_fraction, 0.0);
        assert!(sample.mask.labels().iter().all(|&m| m == 0));
    }

    #[test]
    fn generate_set_steps_the_seed() {
        let set = generate_set(&small_spec(10), 3).unwrap();
        assert_eq!(set.len(), 3);
        let single = generate(&small_spec(11)).unwrap();
        assert_eq!(set[1].depth.values(), single.depth.values());
        assert_ne!(set[0].depth.values(), set[2].depth.values());
    }

    #[test]
    fn spec_validation() {
        let bad = [
            SyntheticSpec {
                height: 4,
                ..Default::default()
            },
            SyntheticSpec {
                target_fraction: 0.9,
                ..Default::default()
            },
            SyntheticSpec {
                fraction_tolerance: 0.0,
                ..Default::default()
            },
            SyntheticSpec {
                groove_width: 0.5,
                ..Default::default()
            },
        ];
        for spec in bad {
            assert!(spec.validate().is_err());
        }
        assert!(SyntheticSpec::default().validate().is_ok());
    }

    #[test]
    fn unreachable_fraction_errors_out() {
        // A tiny attempt budget cannot fill 16.6% of the surface.
        let spec = SyntheticSpec {
            max_stroke_attempts: 0,
            ..small_spec(7)
        };
        assert!(matches!(generate(&spec), Err(Error::Experiment(_))));
    }
}
