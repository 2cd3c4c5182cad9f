//! C ABI for the surftopo library.
//!
//! Conventions, mirrored in the generated `include/surftopo.h`:
//!
//! * Every fallible function returns a [`Status`]; `SURFTOPO_STATUS_OK`
//!   (zero) means success. On failure, [`surftopo_last_error_message`]
//!   returns a description valid until the next failing call on the same
//!   thread.
//! * `surftopo_depth_map`, `surftopo_diagram`, and `surftopo_model` are
//!   opaque handles created and destroyed only through this interface.
//!   Each `*_free` accepts null and must be called at most once.
//! * Panics never cross the boundary; they are caught and reported as
//!   `SURFTOPO_STATUS_PANIC`.
//! * Buffers are caller-allocated; sizes are queried through the
//!   corresponding `*_len` / dimension functions first.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use libc::{c_char, size_t};

use surftopo::cubical::{CubicalFiltration, Direction as CoreDirection};
use surftopo::descriptors::{
    pd_agg, persistence_image, PiAxes as CorePiAxes, PiConfig as CorePiConfig, PD_AGG_LEN,
};
use surftopo::eval::dsc;
use surftopo::ingest::{load_depth_map, DepthFormat as CoreDepthFormat, DepthMap};
use surftopo::persistence::{compute_persistence, finitize, FinitizePolicy, PersistenceDiagram};
use surftopo::rusboost::{train_rusboost, BoostedEnsemble, FeatureMatrix, RusBoostConfig};
use surftopo::Error;

// ----------------------------------------------------------------- status

/// Result of a call through the C interface.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// The call succeeded.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument or configuration was rejected; see the error message.
    InvalidArgument = 2,
    /// Reading or writing a file failed.
    Io = 3,
    /// A string argument was not valid UTF-8.
    Utf8 = 4,
    /// The implementation panicked; treat the handle state as poisoned.
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: Status, message: &str) -> Status {
    set_error(message);
    status
}

fn fail_lib(err: Error) -> Status {
    let status = match err {
        Error::Io { .. }
        | Error::Image { .. }
        | Error::TextMatrix { .. }
        | Error::Csv { .. }
        | Error::ModelFormat { .. } => Status::Io,
        _ => Status::InvalidArgument,
    };
    fail(status, &err.to_string())
}

/// Runs a fallible body, converting panics into `SURFTOPO_STATUS_PANIC`.
fn guarded<F: FnOnce() -> Status>(body: F) -> Status {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("panic");
            fail(Status::Panic, msg)
        }
    }
}

/// Message for the most recent failure on this thread, or an empty string.
///
/// # Safety
///
/// The pointer stays valid until the next failing surftopo call on the
/// same thread; copy the string before calling anything else.
#[no_mangle]
pub unsafe extern "C" fn surftopo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn surftopo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ------------------------------------------------------- pointer helpers

macro_rules! require {
    ($ptr:expr, $name:literal) => {
        if $ptr.is_null() {
            return fail(Status::NullPointer, concat!($name, " is null"));
        }
    };
}

unsafe fn path_arg(ptr: *const c_char) -> Result<PathBuf, Status> {
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(Status::Utf8)
        }
    }
}

// ------------------------------------------------------------ depth maps

/// Opaque handle to a loaded depth map.
pub struct DepthMapHandle(DepthMap);

/// On-disk encoding of a depth map.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthFormat {
    /// 16-bit grayscale PNG; values are rescaled to `[0, 1]`.
    Png16 = 0,
    /// Whitespace-separated text matrix of finite decimal values.
    Text = 1,
}

/// Load a depth map from `path`, writing a new handle to `*out`.
///
/// # Safety
///
/// `path` must be a nul-terminated string and `out` a valid location;
/// on success the caller owns the handle and must free it with
/// `surftopo_depth_map_free`.
#[no_mangle]
pub unsafe extern "C" fn surftopo_depth_map_load(
    path: *const c_char,
    format: DepthFormat,
    out: *mut *mut DepthMapHandle,
) -> Status {
    require!(path, "path");
    require!(out, "out");
    guarded(|| {
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let core_format = match format {
            DepthFormat::Png16 => CoreDepthFormat::Png16,
            DepthFormat::Text => CoreDepthFormat::TextMatrix,
        };
        match load_depth_map(&path, core_format) {
            Ok(map) => {
                *out = Box::into_raw(Box::new(DepthMapHandle(map)));
                Status::Ok
            }
            Err(e) => fail_lib(e),
        }
    })
}

/// Build a depth map from a row-major `height * width` array of finite
/// values, writing a new handle to `*out`.
///
/// # Safety
///
/// `values` must point to `height * width` readable doubles; `out` must be
/// a valid location. The caller owns the returned handle.
#[no_mangle]
pub unsafe extern "C" fn surftopo_depth_map_from_values(
    height: size_t,
    width: size_t,
    values: *const f64,
    out: *mut *mut DepthMapHandle,
) -> Status {
    require!(values, "values");
    require!(out, "out");
    guarded(|| {
        let Some(len) = height.checked_mul(width) else {
            return fail(Status::InvalidArgument, "height * width overflows");
        };
        let values = std::slice::from_raw_parts(values, len).to_vec();
        match DepthMap::new(height, width, values) {
            Ok(map) => {
                *out = Box::into_raw(Box::new(DepthMapHandle(map)));
                Status::Ok
            }
            Err(e) => fail_lib(e),
        }
    })
}

/// Write the map's dimensions to `*height` and `*width`.
///
/// # Safety
///
/// All pointers must be valid; `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn surftopo_depth_map_dims(
    map: *const DepthMapHandle,
    height: *mut size_t,
    width: *mut size_t,
) -> Status {
    require!(map, "map");
    require!(height, "height");
    require!(width, "width");
    let map = &(*map).0;
    *height = map.height();
    *width = map.width();
    Status::Ok
}

/// Copy the map's row-major values into `buffer` (`capacity` doubles).
///
/// # Safety
///
/// `buffer` must hold at least `height * width` doubles; `map` must be a
/// live handle.
#[no_mangle]
pub unsafe extern "C" fn surftopo_depth_map_values(
    map: *const DepthMapHandle,
    buffer: *mut f64,
    capacity: size_t,
) -> Status {
    require!(map, "map");
    require!(buffer, "buffer");
    let values = (*map).0.values();
    if capacity < values.len() {
        return fail(
            Status::InvalidArgument,
            "buffer capacity is smaller than height * width",
        );
    }
    std::ptr::copy_nonoverlapping(values.as_ptr(), buffer, values.len());
    Status::Ok
}

/// Release a depth map handle; accepts null.
///
/// # Safety
///
/// `map` must come from this interface and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn surftopo_depth_map_free(map: *mut DepthMapHandle) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

// -------------------------------------------------------------- diagrams

/// Opaque handle to a persistence diagram.
pub struct DiagramHandle(PersistenceDiagram);

/// Sweep direction of the filtration.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    /// Sublevel sets: cells enter at their depth value, valleys first.
    Sublevel = 0,
    /// Superlevel sets: ridges first (implemented by negating values).
    Superlevel = 1,
}

/// How unbounded (never-dying) classes are reported.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EssentialPolicy {
    /// Keep them with death = +infinity.
    KeepInfinite = 0,
    /// Cap their death at the maximum filtration value.
    CapAtMax = 1,
    /// Drop them from the diagram.
    Drop = 2,
}

/// One birth/death pair of the diagram.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CDiagramPoint {
    /// Homology dimension: 0 for components, 1 for loops.
    pub dim: u8,
    pub birth: f64,
    pub death: f64,
}

/// Compute the persistence diagram of the whole map treated as one window.
///
/// With `normalize` set, values are first rescaled so `[min, max]` maps to
/// `[0, 1]` (a constant map becomes all zeros). Unbounded classes are
/// handled per `essentials`. The new handle is written to `*out`.
///
/// # Safety
///
/// `map` must be a live handle and `out` a valid location; the caller owns
/// the returned diagram handle.
#[no_mangle]
pub unsafe extern "C" fn surftopo_diagram_compute(
    map: *const DepthMapHandle,
    direction: SweepDirection,
    normalize: bool,
    essentials: EssentialPolicy,
    out: *mut *mut DiagramHandle,
) -> Status {
    require!(map, "map");
    require!(out, "out");
    guarded(|| {
        let map = &(*map).0;
        let mut values = map.values().to_vec();
        if normalize {
            let (lo, hi) = map.min_max();
            let span = hi - lo;
            if span > 0.0 {
                for v in &mut values {
                    *v = (*v - lo) / span;
                }
            } else {
                values.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let core_direction = match direction {
            SweepDirection::Sublevel => CoreDirection::Sublevel,
            SweepDirection::Superlevel => CoreDirection::Superlevel,
        };
        let result =
            CubicalFiltration::from_values(map.height(), map.width(), &values, core_direction)
                .and_then(|filtration| compute_persistence(&filtration));
        match result {
            Ok(diagram) => {
                let diagram = match essentials {
                    EssentialPolicy::KeepInfinite => diagram,
                    EssentialPolicy::CapAtMax => finitize(&diagram, FinitizePolicy::CapAtMax),
                    EssentialPolicy::Drop => finitize(&diagram, FinitizePolicy::DropEssential),
                };
                *out = Box::into_raw(Box::new(DiagramHandle(diagram)));
                Status::Ok
            }
            Err(e) => fail_lib(e),
        }
    })
}

/// Write the number of diagram points to `*out`.
///
/// # Safety
///
/// `diagram` must be a live handle and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn surftopo_diagram_len(
    diagram: *const DiagramHandle,
    out: *mut size_t,
) -> Status {
    require!(diagram, "diagram");
    require!(out, "out");
    *out = (*diagram).0.points.len();
    Status::Ok
}

/// Copy all diagram points into `buffer` (`capacity` entries).
///
/// # Safety
///
/// `buffer` must hold at least `surftopo_diagram_len` entries; `diagram`
/// must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn surftopo_diagram_points(
    diagram: *const DiagramHandle,
    buffer: *mut CDiagramPoint,
    capacity: size_t,
) -> Status {
    require!(diagram, "diagram");
    require!(buffer, "buffer");
    let points = &(*diagram).0.points;
    if capacity < points.len() {
        return fail(
            Status::InvalidArgument,
            "buffer capacity is smaller than the diagram",
        );
    }
    for (i, p) in points.iter().enumerate() {
        *buffer.add(i) = CDiagramPoint {
            dim: p.dim,
            birth: p.birth,
            death: p.death,
        };
    }
    Status::Ok
}

/// Release a diagram handle; accepts null.
///
/// # Safety
///
/// `diagram` must come from this interface and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn surftopo_diagram_free(diagram: *mut DiagramHandle) {
    if !diagram.is_null() {
        drop(Box::from_raw(diagram));
    }
}

// ----------------------------------------------------------- descriptors

/// Number of interval statistics written by `surftopo_pd_agg`.
#[no_mangle]
pub extern "C" fn surftopo_pd_agg_len() -> size_t {
    PD_AGG_LEN
}

/// Summarize interval lengths as the fixed statistics vector
/// (count, min, max, mean, std, variance, q1, median, q3, sum_sqrt, sum,
/// sum_sq). With `drop_zero_length` set, zero-length intervals are ignored.
///
/// # Safety
///
/// `diagram` must be a live, finite handle (no infinite deaths) and `out`
/// must hold `surftopo_pd_agg_len()` doubles.
#[no_mangle]
pub unsafe extern "C" fn surftopo_pd_agg(
    diagram: *const DiagramHandle,
    drop_zero_length: bool,
    out: *mut f64,
) -> Status {
    require!(diagram, "diagram");
    require!(out, "out");
    guarded(|| match pd_agg(&(*diagram).0, drop_zero_length) {
        Ok(stats) => {
            std::ptr::copy_nonoverlapping(stats.as_ptr(), out, stats.len());
            Status::Ok
        }
        Err(e) => fail_lib(e),
    })
}

/// Axis layout of a persistence image.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageAxes {
    /// x = birth, y = death.
    BirthDeath = 0,
    /// x = birth, y = death - birth.
    BirthPersistence = 1,
}

/// Persistence-image parameters; initialize with
/// `surftopo_pi_config_default` and override fields as needed.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CPiConfig {
    /// Grid side; the image has `resolution * resolution` pixels.
    pub resolution: size_t,
    /// Gaussian bandwidth in value units.
    pub sigma: f64,
    /// Weight points by a persistence ramp instead of uniformly.
    pub weighted: bool,
    pub birth_min: f64,
    pub birth_max: f64,
    pub death_min: f64,
    pub death_max: f64,
    /// Ramp normalizer: weight = min(1, persistence / max_persistence).
    pub max_persistence: f64,
    pub axes: ImageAxes,
}

impl CPiConfig {
    fn to_core(self) -> CorePiConfig {
        CorePiConfig {
            resolution: self.resolution,
            sigma: self.sigma,
            weighted: self.weighted,
            birth_range: (self.birth_min, self.birth_max),
            death_range: (self.death_min, self.death_max),
            max_persistence: self.max_persistence,
            axes: match self.axes {
                ImageAxes::BirthDeath => CorePiAxes::BirthDeath,
                ImageAxes::BirthPersistence => CorePiAxes::BirthPersistence,
            },
        }
    }
}

/// Write the default persistence-image configuration (16x16 unweighted
/// birth/death grid over the unit square, sigma 0.001) to `*out`.
///
/// # Safety
///
/// `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn surftopo_pi_config_default(out: *mut CPiConfig) -> Status {
    require!(out, "out");
    let d = CorePiConfig::default();
    *out = CPiConfig {
        resolution: d.resolution,
        sigma: d.sigma,
        weighted: d.weighted,
        birth_min: d.birth_range.0,
        birth_max: d.birth_range.1,
        death_min: d.death_range.0,
        death_max: d.death_range.1,
        max_persistence: d.max_persistence,
        axes: match d.axes {
            CorePiAxes::BirthDeath => ImageAxes::BirthDeath,
            CorePiAxes::BirthPersistence => ImageAxes::BirthPersistence,
        },
    };
    Status::Ok
}

/// Rasterize the diagram as a persistence image, writing
/// `resolution * resolution` row-major pixels (y varies slowest, low end
/// first) into `pixels`.
///
/// # Safety
///
/// `diagram` and `config` must be valid; `pixels` must hold `capacity`
/// doubles with `capacity >= resolution * resolution`.
#[no_mangle]
pub unsafe extern "C" fn surftopo_persistence_image(
    diagram: *const DiagramHandle,
    config: *const CPiConfig,
    pixels: *mut f64,
    capacity: size_t,
) -> Status {
    require!(diagram, "diagram");
    require!(config, "config");
    require!(pixels, "pixels");
    guarded(|| {
        let core = (*config).to_core();
        let Some(needed) = core.resolution.checked_mul(core.resolution) else {
            return fail(Status::InvalidArgument, "resolution overflows");
        };
        if capacity < needed {
            return fail(
                Status::InvalidArgument,
                "pixel capacity is smaller than resolution * resolution",
            );
        }
        match persistence_image(&(*diagram).0, &core) {
            Ok(image) => {
                std::ptr::copy_nonoverlapping(image.pixels.as_ptr(), pixels, needed);
                Status::Ok
            }
            Err(e) => fail_lib(e),
        }
    })
}

// -------------------------------------------------------------- boosting

/// Opaque handle to a trained boosted-tree model.
pub struct ModelHandle(BoostedEnsemble);

/// Training parameters; initialize with `surftopo_boost_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CBoostConfig {
    /// Boosting rounds to attempt.
    pub rounds: size_t,
    /// Depth budget of each tree.
    pub max_depth: size_t,
    /// Majority size as a multiple of the minority size; a non-finite or
    /// non-positive value disables undersampling (plain boosting).
    pub undersample_ratio: f64,
    /// Seed for undersampling draws.
    pub seed: u64,
    /// Redraws allowed when a round's sample is rejected.
    pub max_redraws: size_t,
}

impl CBoostConfig {
    fn to_core(self) -> RusBoostConfig {
        RusBoostConfig {
            rounds: self.rounds,
            max_depth: self.max_depth,
            undersample_ratio: (self.undersample_ratio.is_finite() && self.undersample_ratio > 0.0)
                .then_some(self.undersample_ratio),
            seed: self.seed,
            max_redraws: self.max_redraws,
        }
    }
}

/// Write the default training configuration (50 rounds, depth 3,
/// undersample ratio 1, seed 0, 10 redraws) to `*out`.
///
/// # Safety
///
/// `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn surftopo_boost_config_default(out: *mut CBoostConfig) -> Status {
    require!(out, "out");
    let d = RusBoostConfig::default();
    *out = CBoostConfig {
        rounds: d.rounds,
        max_depth: d.max_depth,
        undersample_ratio: d.undersample_ratio.unwrap_or(0.0),
        seed: d.seed,
        max_redraws: d.max_redraws,
    };
    Status::Ok
}

/// Train a model on `n_rows x n_features` row-major values with per-row
/// labels (1 = positive/minority class, 2 = negative class; 0 rows are
/// rejected here). The new handle is written to `*out`.
///
/// # Safety
///
/// `values` must hold `n_rows * n_features` doubles, `labels` `n_rows`
/// bytes; `config` and `out` must be valid. The caller owns the handle.
#[no_mangle]
pub unsafe extern "C" fn surftopo_model_train(
    n_rows: size_t,
    n_features: size_t,
    values: *const f64,
    labels: *const u8,
    config: *const CBoostConfig,
    out: *mut *mut ModelHandle,
) -> Status {
    require!(values, "values");
    require!(labels, "labels");
    require!(config, "config");
    require!(out, "out");
    guarded(|| {
        let Some(len) = n_rows.checked_mul(n_features) else {
            return fail(Status::InvalidArgument, "n_rows * n_features overflows");
        };
        let values = std::slice::from_raw_parts(values, len).to_vec();
        let labels = std::slice::from_raw_parts(labels, n_rows);
        if let Some(bad) = labels.iter().position(|l| !matches!(l, 1 | 2)) {
            return fail(
                Status::InvalidArgument,
                &format!("row {bad} has label {}, expected 1 or 2", labels[bad]),
            );
        }
        let names = (0..n_features).map(|i| format!("f{i}")).collect();
        let result = FeatureMatrix::new(names, values, labels.to_vec())
            .and_then(|matrix| train_rusboost(&matrix, &(*config).to_core()));
        match result {
            Ok(model) => {
                *out = Box::into_raw(Box::new(ModelHandle(model)));
                Status::Ok
            }
            Err(e) => fail_lib(e),
        }
    })
}

/// Write the model's feature count to `*out`.
///
/// # Safety
///
/// `model` must be a live handle and `out` a valid location.
#[no_mangle]
pub unsafe extern "C" fn surftopo_model_n_features(
    model: *const ModelHandle,
    out: *mut size_t,
) -> Status {
    require!(model, "model");
    require!(out, "out");
    *out = (*model).0.feature_names.len();
    Status::Ok
}

/// Score `n_rows` rows laid out as in training. `scores` receives values
/// in `[0, 1]` (closeness to the positive class) and `labels` the hard
/// class per row (1 or 2); either output may be null to skip it.
///
/// # Safety
///
/// `values` must hold `n_rows * n_features` doubles where `n_features`
/// matches `surftopo_model_n_features`; non-null outputs must hold
/// `n_rows` entries.
#[no_mangle]
pub unsafe extern "C" fn surftopo_model_predict(
    model: *const ModelHandle,
    n_rows: size_t,
    n_features: size_t,
    values: *const f64,
    scores: *mut f64,
    labels: *mut u8,
) -> Status {
    require!(model, "model");
    require!(values, "values");
    guarded(|| {
        let model = &(*model).0;
        if n_features != model.feature_names.len() {
            return fail(
                Status::InvalidArgument,
                &format!(
                    "model was trained on {} features, got {n_features}",
                    model.feature_names.len()
                ),
            );
        }
        let Some(len) = n_rows.checked_mul(n_features) else {
            return fail(Status::InvalidArgument, "n_rows * n_features overflows");
        };
        let values = std::slice::from_raw_parts(values, len).to_vec();
        // The matrix type requires class labels, but prediction ignores
        // them; fill with the negative class.
        let result = FeatureMatrix::new(model.feature_names.clone(), values, vec![2; n_rows])
            .and_then(|matrix| model.predict(&matrix));
        match result {
            Ok((s, l)) => {
                if !scores.is_null() {
                    std::ptr::copy_nonoverlapping(s.as_ptr(), scores, n_rows);
                }
                if !labels.is_null() {
                    std::ptr::copy_nonoverlapping(l.as_ptr(), labels, n_rows);
                }
                Status::Ok
            }
            Err(e) => fail_lib(e),
        }
    })
}

/// Copy the model's normalized per-feature importances into `buffer`.
///
/// # Safety
///
/// `buffer` must hold at least `surftopo_model_n_features` doubles.
#[no_mangle]
pub unsafe extern "C" fn surftopo_model_importance(
    model: *const ModelHandle,
    buffer: *mut f64,
    capacity: size_t,
) -> Status {
    require!(model, "model");
    require!(buffer, "buffer");
    guarded(|| match (*model).0.gini_importance() {
        Ok(importance) => {
            if capacity < importance.len() {
                return fail(
                    Status::InvalidArgument,
                    "buffer capacity is smaller than the feature count",
                );
            }
            std::ptr::copy_nonoverlapping(importance.as_ptr(), buffer, importance.len());
            Status::Ok
        }
        Err(e) => fail_lib(e),
    })
}

/// Serialize the model to a JSON file at `path`.
///
/// # Safety
///
/// `model` must be a live handle and `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn surftopo_model_save_json(
    model: *const ModelHandle,
    path: *const c_char,
) -> Status {
    require!(model, "model");
    require!(path, "path");
    guarded(|| {
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match (*model).0.save_json(&path) {
            Ok(()) => Status::Ok,
            Err(e) => fail_lib(e),
        }
    })
}

/// Load a model previously saved with `surftopo_model_save_json`, writing
/// a new handle to `*out`.
///
/// # Safety
///
/// `path` must be a nul-terminated string and `out` a valid location; the
/// caller owns the returned handle.
#[no_mangle]
pub unsafe extern "C" fn surftopo_model_load_json(
    path: *const c_char,
    out: *mut *mut ModelHandle,
) -> Status {
    require!(path, "path");
    require!(out, "out");
    guarded(|| {
        let path = match path_arg(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match BoostedEnsemble::load_json(&path) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(ModelHandle(model)));
                Status::Ok
            }
            Err(e) => fail_lib(e),
        }
    })
}

/// Release a model handle; accepts null.
///
/// # Safety
///
/// `model` must come from this interface and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn surftopo_model_free(model: *mut ModelHandle) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

// ------------------------------------------------------------ evaluation

/// Dice overlap of the positive class (label 1) between two equal-length
/// label arrays, written to `*out`. Defined as 1 when neither side
/// contains the positive class.
///
/// # Safety
///
/// `predicted` and `truth` must hold `len` readable bytes; `out` must be
/// a valid location.
#[no_mangle]
pub unsafe extern "C" fn surftopo_dsc(
    predicted: *const u8,
    truth: *const u8,
    len: size_t,
    out: *mut f64,
) -> Status {
    require!(predicted, "predicted");
    require!(truth, "truth");
    require!(out, "out");
    guarded(|| {
        let predicted = std::slice::from_raw_parts(predicted, len);
        let truth = std::slice::from_raw_parts(truth, len);
        match dsc(predicted, truth) {
            Ok(value) => {
                *out = value;
                Status::Ok
            }
            Err(e) => fail_lib(e),
        }
    })
}
