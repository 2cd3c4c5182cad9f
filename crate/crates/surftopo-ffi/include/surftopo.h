/* C interface to the surftopo surface-topology library.
 *
 * Every fallible function returns a surftopo_status; on failure a
 * human-readable message is available from surftopo_last_error_message()
 * until the next failing call on the same thread. Handle types are opaque;
 * free them with the matching *_free function exactly once.
 */

#ifndef SURFTOPO_H
#define SURFTOPO_H

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of a call through the C interface.
typedef enum surftopo_status {
  // The call succeeded.
  SURFTOPO_STATUS_OK = 0,
  // A required pointer argument was null.
  SURFTOPO_STATUS_NULL_POINTER = 1,
  // An argument or configuration was rejected; see the error message.
  SURFTOPO_STATUS_INVALID_ARGUMENT = 2,
  // Reading or writing a file failed.
  SURFTOPO_STATUS_IO = 3,
  // A string argument was not valid UTF-8.
  SURFTOPO_STATUS_UTF8 = 4,
  // The implementation panicked; treat the handle state as poisoned.
  SURFTOPO_STATUS_PANIC = 5,
} surftopo_status;

// On-disk encoding of a depth map.
typedef enum surftopo_depth_format {
  // 16-bit grayscale PNG; values are rescaled to `[0, 1]`.
  SURFTOPO_DEPTH_FORMAT_PNG16 = 0,
  // Whitespace-separated text matrix of finite decimal values.
  SURFTOPO_DEPTH_FORMAT_TEXT = 1,
} surftopo_depth_format;

// Sweep direction of the filtration.
typedef enum surftopo_sweep_direction {
  // Sublevel sets: cells enter at their depth value, valleys first.
  SURFTOPO_SWEEP_DIRECTION_SUBLEVEL = 0,
  // Superlevel sets: ridges first (implemented by negating values).
  SURFTOPO_SWEEP_DIRECTION_SUPERLEVEL = 1,
} surftopo_sweep_direction;

// How unbounded (never-dying) classes are reported.
typedef enum surftopo_essential_policy {
  // Keep them with death = +infinity.
  SURFTOPO_ESSENTIAL_POLICY_KEEP_INFINITE = 0,
  // Cap their death at the maximum filtration value.
  SURFTOPO_ESSENTIAL_POLICY_CAP_AT_MAX = 1,
  // Drop them from the diagram.
  SURFTOPO_ESSENTIAL_POLICY_DROP = 2,
} surftopo_essential_policy;

// Axis layout of a persistence image.
typedef enum surftopo_image_axes {
  // x = birth, y = death.
  SURFTOPO_IMAGE_AXES_BIRTH_DEATH = 0,
  // x = birth, y = death - birth.
  SURFTOPO_IMAGE_AXES_BIRTH_PERSISTENCE = 1,
} surftopo_image_axes;

// Opaque handle to a loaded depth map.
typedef struct surftopo_depth_map surftopo_depth_map;

// Opaque handle to a persistence diagram.
typedef struct surftopo_diagram surftopo_diagram;

// Opaque handle to a trained boosted-tree model.
typedef struct surftopo_model surftopo_model;

// One birth/death pair of the diagram.
typedef struct surftopo_diagram_point {
  // Homology dimension: 0 for components, 1 for loops.
  uint8_t dim;
  double birth;
  double death;
} surftopo_diagram_point;

// Persistence-image parameters; initialize with
// `surftopo_pi_config_default` and override fields as needed.
typedef struct surftopo_pi_config {
  // Grid side; the image has `resolution * resolution` pixels.
  size_t resolution;
  // Gaussian bandwidth in value units.
  double sigma;
  // Weight points by a persistence ramp instead of uniformly.
  bool weighted;
  double birth_min;
  double birth_max;
  double death_min;
  double death_max;
  // Ramp normalizer: weight = min(1, persistence / max_persistence).
  double max_persistence;
  enum surftopo_image_axes axes;
} surftopo_pi_config;

// Training parameters; initialize with `surftopo_boost_config_default`.
typedef struct surftopo_boost_config {
  // Boosting rounds to attempt.
  size_t rounds;
  // Depth budget of each tree.
  size_t max_depth;
  // Majority size as a multiple of the minority size; a non-finite or
  // non-positive value disables undersampling (plain boosting).
  double undersample_ratio;
  // Seed for undersampling draws.
  uint64_t seed;
  // Redraws allowed when a round's sample is rejected.
  size_t max_redraws;
} surftopo_boost_config;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the most recent failure on this thread, or an empty string.
//
// # Safety
//
// The pointer stays valid until the next failing surftopo call on the
// same thread; copy the string before calling anything else.
const char *surftopo_last_error_message(void);

// Library version as a static nul-terminated string.
const char *surftopo_version(void);

// Load a depth map from `path`, writing a new handle to `*out`.
//
// # Safety
//
// `path` must be a nul-terminated string and `out` a valid location;
// on success the caller owns the handle and must free it with
// `surftopo_depth_map_free`.
enum surftopo_status surftopo_depth_map_load(const char *path,
                                             enum surftopo_depth_format format,
                                             struct surftopo_depth_map **out);

// Build a depth map from a row-major `height * width` array of finite
// values, writing a new handle to `*out`.
//
// # Safety
//
// `values` must point to `height * width` readable doubles; `out` must be
// a valid location. The caller owns the returned handle.
enum surftopo_status surftopo_depth_map_from_values(size_t height,
                                                    size_t width,
                                                    const double *values,
                                                    struct surftopo_depth_map **out);

// Write the map's dimensions to `*height` and `*width`.
//
// # Safety
//
// All pointers must be valid; `map` must be a live handle.
enum surftopo_status surftopo_depth_map_dims(const struct surftopo_depth_map *map,
                                             size_t *height,
                                             size_t *width);

// Copy the map's row-major values into `buffer` (`capacity` doubles).
//
// # Safety
//
// `buffer` must hold at least `height * width` doubles; `map` must be a
// live handle.
enum surftopo_status surftopo_depth_map_values(const struct surftopo_depth_map *map,
                                               double *buffer,
                                               size_t capacity);

// Release a depth map handle; accepts null.
//
// # Safety
//
// `map` must come from this interface and not be freed twice.
void surftopo_depth_map_free(struct surftopo_depth_map *map);

// Compute the persistence diagram of the whole map treated as one window.
//
// With `normalize` set, values are first rescaled so `[min, max]` maps to
// `[0, 1]` (a constant map becomes all zeros). Unbounded classes are
// handled per `essentials`. The new handle is written to `*out`.
//
// # Safety
//
// `map` must be a live handle and `out` a valid location; the caller owns
// the returned diagram handle.
enum surftopo_status surftopo_diagram_compute(const struct surftopo_depth_map *map,
                                              enum surftopo_sweep_direction direction,
                                              bool normalize,
                                              enum surftopo_essential_policy essentials,
                                              struct surftopo_diagram **out);

// Write the number of diagram points to `*out`.
//
// # Safety
//
// `diagram` must be a live handle and `out` a valid location.
enum surftopo_status surftopo_diagram_len(const struct surftopo_diagram *diagram, size_t *out);

// Copy all diagram points into `buffer` (`capacity` entries).
//
// # Safety
//
// `buffer` must hold at least `surftopo_diagram_len` entries; `diagram`
// must be a live handle.
enum surftopo_status surftopo_diagram_points(const struct surftopo_diagram *diagram,
                                             struct surftopo_diagram_point *buffer,
                                             size_t capacity);

// Release a diagram handle; accepts null.
//
// # Safety
//
// `diagram` must come from this interface and not be freed twice.
void surftopo_diagram_free(struct surftopo_diagram *diagram);

// Number of interval statistics written by `surftopo_pd_agg`.
size_t surftopo_pd_agg_len(void);

// Summarize interval lengths as the fixed statistics vector
// (count, min, max, mean, std, variance, q1, median, q3, sum_sqrt, sum,
// sum_sq). With `drop_zero_length` set, zero-length intervals are ignored.
//
// # Safety
//
// `diagram` must be a live, finite handle (no infinite deaths) and `out`
// must hold `surftopo_pd_agg_len()` doubles.
enum surftopo_status surftopo_pd_agg(const struct surftopo_diagram *diagram,
                                     bool drop_zero_length,
                                     double *out);

// Write the default persistence-image configuration (16x16 unweighted
// birth/death grid over the unit square, sigma 0.001) to `*out`.
//
// # Safety
//
// `out` must be a valid location.
enum surftopo_status surftopo_pi_config_default(struct surftopo_pi_config *out);

// Rasterize the diagram as a persistence image, writing
// `resolution * resolution` row-major pixels (y varies slowest, low end
// first) into `pixels`.
//
// # Safety
//
// `diagram` and `config` must be valid; `pixels` must hold `capacity`
// doubles with `capacity >= resolution * resolution`.
enum surftopo_status surftopo_persistence_image(const struct surftopo_diagram *diagram,
                                                const struct surftopo_pi_config *config,
                                                double *pixels,
                                                size_t capacity);

// Write the default training configuration (50 rounds, depth 3,
// undersample ratio 1, seed 0, 10 redraws) to `*out`.
//
// # Safety
//
// `out` must be a valid location.
enum surftopo_status surftopo_boost_config_default(struct surftopo_boost_config *out);

// Train a model on `n_rows x n_features` row-major values with per-row
// labels (1 = positive/minority class, 2 = negative class; 0 rows are
// rejected here). The new handle is written to `*out`.
//
// # Safety
//
// `values` must hold `n_rows * n_features` doubles, `labels` `n_rows`
// bytes; `config` and `out` must be valid. The caller owns the handle.
enum surftopo_status surftopo_model_train(size_t n_rows,
                                          size_t n_features,
                                          const double *values,
                                          const uint8_t *labels,
                                          const struct surftopo_boost_config *config,
                                          struct surftopo_model **out);

// Write the model's feature count to `*out`.
//
// # Safety
//
// `model` must be a live handle and `out` a valid location.
enum surftopo_status surftopo_model_n_features(const struct surftopo_model *model, size_t *out);

// Score `n_rows` rows laid out as in training. `scores` receives values
// in `[0, 1]` (closeness to the positive class) and `labels` the hard
// class per row (1 or 2); either output may be null to skip it.
//
// # Safety
//
// `values` must hold `n_rows * n_features` doubles where `n_features`
// matches `surftopo_model_n_features`; non-null outputs must hold
// `n_rows` entries.
enum surftopo_status surftopo_model_predict(const struct surftopo_model *model,
                                            size_t n_rows,
                                            size_t n_features,
                                            const double *values,
                                            double *scores,
                                            uint8_t *labels);

// Copy the model's normalized per-feature importances into `buffer`.
//
// # Safety
//
// `buffer` must hold at least `surftopo_model_n_features` doubles.
enum surftopo_status surftopo_model_importance(const struct surftopo_model *model,
                                               double *buffer,
                                               size_t capacity);

// Serialize the model to a JSON file at `path`.
//
// # Safety
//
// `model` must be a live handle and `path` a nul-terminated string.
enum surftopo_status surftopo_model_save_json(const struct surftopo_model *model, const char *path);

// Load a model previously saved with `surftopo_model_save_json`, writing
// a new handle to `*out`.
//
// # Safety
//
// `path` must be a nul-terminated string and `out` a valid location; the
// caller owns the returned handle.
enum surftopo_status surftopo_model_load_json(const char *path, struct surftopo_model **out);

// Release a model handle; accepts null.
//
// # Safety
//
// `model` must come from this interface and not be freed twice.
void surftopo_model_free(struct surftopo_model *model);

// Dice overlap of the positive class (label 1) between two equal-length
// label arrays, written to `*out`. Defined as 1 when neither side
// contains the positive class.
//
// # Safety
//
// `predicted` and `truth` must hold `len` readable bytes; `out` must be
// a valid location.
enum surftopo_status surftopo_dsc(const uint8_t *predicted,
                                  const uint8_t *truth,
                                  size_t len,
                                  double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SURFTOPO_H */
