//! Fixed-length descriptors of (finite) persistence diagrams.
//!
//! Two vectorizations are provided:
//!
//! * [`pd_agg`] — twelve order-independent statistics of the interval
//!   lengths (count, extremes, moments, quartiles and power sums).
//! * [`persistence_image`] — a discretized kernel-density surface: each
//!   diagram point spreads an isotropic Gaussian over the plane and every
//!   grid pixel stores the exact Gaussian mass inside it, via the normal CDF
//!   in closed form. Mass beyond [`CLIP_SIGMAS`] standard deviations is
//!   ignored, an error around 1e-17 of a point's unit mass.
//!
//! [`quadrature_pi`] recomputes persistence images by composite midpoint
//! integration of the density and serves as an independent numerical check
//! of the closed form.
//!
//! Both descriptors require diagrams without infinite deaths; run
//! [`crate::persistence::finitize`] first.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;

/// Length of the interval-statistics vector.
pub const PD_AGG_LEN: usize = 12;

/// Component names of the interval-statistics vector, in order.
pub const PD_AGG_NAMES: [&str; PD_AGG_LEN] = [
    "count", "min", "max", "mean", "std", "variance", "q1", "median", "q3", "sum_sqrt", "sum",
    "sum_sq",
];

/// Twelve statistics of the interval lengths of a finite diagram.
///
/// Lengths are sorted before aggregation, so the result is exactly invariant
/// under permutations of the diagram points. `drop_zero_length` removes
/// zero-length intervals (diagonal points) first. An empty length set maps
/// to the all-zero vector.
pub fn pd_agg(diagram: &PersistenceDiagram, drop_zero_length: bool) -> Result<[f64; PD_AGG_LEN]> {
    require_finite(diagram)?;
    let mut lengths: Vec<f64> = diagram
        .points
        .iter()
        .map(|p| p.death - p.birth)
        .filter(|&l| !drop_zero_length || l > 0.0)
        .collect();
    lengths.sort_unstable_by(f64::total_cmp);
    if lengths.is_empty() {
        return Ok([0.0; PD_AGG_LEN]);
    }
    let n = lengths.len();
    let count = n as f64;
    let min = lengths[0];
    let max = lengths[n - 1];
    let mean = lengths.iter().sum::<f64>() / count;
    let variance = lengths
        .iter()
        .map(|&l| (l - mean) * (l - mean))
        .sum::<f64>()
        / count;
    let std = variance.sqrt();
    let q1 = quantile_sorted(&lengths, 0.25);
    let median = quantile_sorted(&lengths, 0.5);
    let q3 = quantile_sorted(&lengths, 0.75);
    let sum_sqrt = lengths.iter().map(|&l| l.sqrt()).sum::<f64>();
    let sum = lengths.iter().sum::<f64>();
    let sum_sq = lengths.iter().map(|&l| l * l).sum::<f64>();
    Ok([
        count, min, max, mean, std, variance, q1, median, q3, sum_sqrt, sum, sum_sq,
    ])
}

/// Quantile of an ascending slice with linear interpolation between the two
/// nearest order statistics (`h = (n - 1) q`).
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&q));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

/// Mean and population standard deviation (divide by `n`).
pub(crate) fn mean_and_population_std(xs: &[f64]) -> (f64, f64) {
    debug_assert!(!xs.is_empty());
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Coordinate system of the persistence-image plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiAxes {
    /// x = birth, y = death (the default).
    BirthDeath,
    /// x = birth, y = death - birth.
    BirthPersistence,
}

/// Persistence-image parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PiConfig {
    /// Grid side; the image has `resolution * resolution` pixels.
    pub resolution: usize,
    /// Gaussian bandwidth (standard deviation) in value units.
    pub sigma: f64,
    /// Weight points by a persistence ramp instead of uniformly.
    pub weighted: bool,
    /// Span of the x (birth) axis.
    pub birth_range: (f64, f64),
    /// Span of the y axis (death, or persistence for `BirthPersistence`).
    pub death_range: (f64, f64),
    /// Ramp normalizer: weight = `min(1, persistence / max_persistence)`.
    pub max_persistence: f64,
    pub axes: PiAxes,
}

impl Default for PiConfig {
    /// 16x16 unweighted birth/death image over the unit square with
    /// `sigma = 0.001`, matching normalized depth patches.
    fn default() -> Self {
        PiConfig {
            resolution: 16,
            sigma: 0.001,
            weighted: false,
            birth_range: (0.0, 1.0),
            death_range: (0.0, 1.0),
            max_persistence: 1.0,
            axes: PiAxes::BirthDeath,
        }
    }
}

impl PiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution == 0 || self.resolution > 4096 {
            return Err(Error::InvalidConfig(format!(
                "image resolution must lie in 1..=4096, got {}",
                self.resolution
            )));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            )));
        }
        for (name, (lo, hi)) in [("birth", self.birth_range), ("death", self.death_range)] {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::InvalidConfig(format!(
                    "{name} range [{lo}, {hi}] must be finite and increasing"
                )));
            }
        }
        if self.weighted && !(self.max_persistence.is_finite() && self.max_persistence > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "max_persistence must be positive when weighting, got {}",
                self.max_persistence
            )));
        }
        Ok(())
    }
}

/// A rasterized persistence surface.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceImage {
    pub config: PiConfig,
    /// Row-major pixels: `pixels[y_index * resolution + x_index]`, y index 0
    /// at the low end of the y axis.
    pub pixels: Vec<f64>,
}

impl PersistenceImage {
    pub fn resolution(&self) -> usize {
        self.config.resolution
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.config.resolution + x]
    }

    /// Flattened feature vector (row-major pixels).
    pub fn vector(&self) -> &[f64] {
        &self.pixels
    }
}

/// Gaussian mass farther than this many standard deviations from a point is
/// discarded (relative error ~1e-17, far below every tolerance used here).
pub const CLIP_SIGMAS: f64 = 8.5;

/// Standard normal CDF.
pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Bin indices of an axis (`resolution` bins of width `step` starting at
/// `lo`, covering up to `hi`) that intersect the clip window around
/// `center`; `None` when the window misses the axis entirely.
fn clip_window(
    lo: f64,
    hi: f64,
    step: f64,
    resolution: usize,
    sigma: f64,
    center: f64,
) -> Option<(usize, usize)> {
    let radius = CLIP_SIGMAS * sigma;
    if center + radius < lo || center - radius > hi {
        return None;
    }
    let first = (((center - radius) - lo) / step).floor().max(0.0) as usize;
    let last = ((((center + radius) - lo) / step).floor().max(0.0) as usize).min(resolution - 1);
    Some((first.min(resolution - 1), last))
}

/// One axis of the image grid with cached per-center bin masses.
///
/// Diagram coordinates repeat heavily (births and deaths come from shared
/// cell values), so masses are memoized by the bit pattern of the center.
struct AxisGrid {
    lo: f64,
    hi: f64,
    step: f64,
    resolution: usize,
    sigma: f64,
    cache: HashMap<u64, Vec<(usize, f64)>>,
}

impl AxisGrid {
    fn new(range: (f64, f64), resolution: usize, sigma: f64) -> Self {
        AxisGrid {
            lo: range.0,
            hi: range.1,
            step: (range.1 - range.0) / resolution as f64,
            resolution,
            sigma,
            cache: HashMap::new(),
        }
    }

    /// `(bin, mass)` pairs for the Gaussian centred at `center`: the exact
    /// normal mass of each intersecting bin via the CDF.
    fn masses(&mut self, center: f64) -> &[(usize, f64)] {
        let (lo, hi, step, resolution, sigma) =
            (self.lo, self.hi, self.step, self.resolution, self.sigma);
        self.cache.entry(center.to_bits()).or_insert_with(|| {
            let mut out = Vec::new();
            if let Some((first, last)) = clip_window(lo, hi, step, resolution, sigma, center) {
                for i in first..=last {
                    let x0 = lo + i as f64 * step;
                    let x1 = x0 + step;
                    let mass =
                        normal_cdf((x1 - center) / sigma) - normal_cdf((x0 - center) / sigma);
                    out.push((i, mass));
                }
            }
            out
        })
    }
}

/// Ramp weight of a point under `config`.
fn point_weight(persistence: f64, config: &PiConfig) -> f64 {
    if config.weighted {
        (persistence / config.max_persistence).min(1.0)
    } else {
        1.0
    }
}

/// x/y plane coordinates of a point under the configured axes.
fn plane_coords(birth: f64, death: f64, axes: PiAxes) -> (f64, f64) {
    match axes {
        PiAxes::BirthDeath => (birth, death),
        PiAxes::BirthPersistence => (birth, death - birth),
    }
}

/// Rasterize a finite diagram into a persistence image (closed form).
pub fn persistence_image(
    diagram: &PersistenceDiagram,
    config: &PiConfig,
) -> Result<PersistenceImage> {
    config.validate()?;
    require_finite(diagram)?;
    let res = config.resolution;
    let mut pixels = vec![0.0f64; res * res];
    let mut x_axis = AxisGrid::new(config.birth_range, res, config.sigma);
    let mut y_axis = AxisGrid::new(config.death_range, res, config.sigma);
    for p in &diagram.points {
        let (x, y) = plane_coords(p.birth, p.death, config.axes);
        let w = point_weight(p.death - p.birth, config);
        if w == 0.0 {
            continue;
        }
        // The 2D Gaussian factorizes, so the pixel mass is the product of
        // the two 1D bin masses.
        let my = y_axis.masses(y).to_vec();
        for &(ix, mx) in x_axis.masses(x) {
            for &(iy, m) in &my {
                pixels[iy * res + ix] += w * mx * m;
            }
        }
    }
    Ok(PersistenceImage {
        config: config.clone(),
        pixels,
    })
}

/// Reference persistence image by composite midpoint quadrature.
///
/// Each 1D bin mass is integrated numerically with step `sigma /
/// steps_per_sigma` over the part of the bin inside the clip window; the
/// absolute error per unit mass is about `0.04 / steps_per_sigma^2`. The
/// closed form shares only the windowing logic, not the CDF.
pub fn quadrature_pi(
    diagram: &PersistenceDiagram,
    config: &PiConfig,
    steps_per_sigma: usize,
) -> Result<PersistenceImage> {
    config.validate()?;
    require_finite(diagram)?;
    if steps_per_sigma == 0 {
        return Err(Error::InvalidConfig(
            "steps_per_sigma must be positive".into(),
        ));
    }
    let res = config.resolution;
    let mut pixels = vec![0.0f64; res * res];
    let h_target = config.sigma / steps_per_sigma as f64;
    let axis_masses = |range: (f64, f64), center: f64| -> Vec<(usize, f64)> {
        let (lo, hi) = range;
        let step = (hi - lo) / res as f64;
        let mut out = Vec::new();
        let radius = CLIP_SIGMAS * config.sigma;
        if let Some((first, last)) = clip_window(lo, hi, step, res, config.sigma, center) {
            for i in first..=last {
                let x0 = (lo + i as f64 * step).max(center - radius);
                let x1 = (lo + (i + 1) as f64 * step).min(center + radius);
                if x1 <= x0 {
                    continue;
                }
                let m = ((x1 - x0) / h_target).ceil() as usize;
                let h = (x1 - x0) / m as f64;
                let norm = 1.0 / (config.sigma * (2.0 * std::f64::consts::PI).sqrt());
                let mut mass = 0.0;
                for k in 0..m {
                    let x = x0 + (k as f64 + 0.5) * h;
                    let u = (x - center) / config.sigma;
                    mass += (-0.5 * u * u).exp();
                }
                out.push((i, mass * norm * h));
            }
        }
        out
    };
    for p in &diagram.points {
        let (x, y) = plane_coords(p.birth, p.death, config.axes);
        let w = point_weight(p.death - p.birth, config);
        if w == 0.0 {
            continue;
        }
        let mxs = axis_masses(config.birth_range, x);
        let mys = axis_masses(config.death_range, y);
        for &(ix, mx) in &mxs {
            for &(iy, my) in &mys {
                pixels[iy * res + ix] += w * mx * my;
            }
        }
    }
    Ok(PersistenceImage {
        config: config.clone(),
        pixels,
    })
}

fn require_finite(diagram: &PersistenceDiagram) -> Result<()> {
    let unbounded = diagram
        .points
        .iter()
        .filter(|p| !p.death.is_finite())
        .count();
    if unbounded > 0 {
        return Err(Error::UnboundedIntervals { count: unbounded });
    }
    Ok(())
}
