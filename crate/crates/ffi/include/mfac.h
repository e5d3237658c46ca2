#ifndef MFAC_H
#define MFAC_H

/* Generated by cbindgen from mfac-ffi. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum MfacStatus {
  /**
   * The call succeeded.
   */
  MFAC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  MFAC_STATUS_NULL_ARGUMENT = 1,
  /**
   * Arguments or data were rejected before any numerical work.
   */
  MFAC_STATUS_INVALID_INPUT = 2,
  /**
   * Dimensions of the arguments do not agree.
   */
  MFAC_STATUS_DIMENSION_MISMATCH = 3,
  /**
   * The computation ran but could not produce a usable answer.
   */
  MFAC_STATUS_NUMERICAL = 4,
  /**
   * Reading or writing a file failed.
   */
  MFAC_STATUS_IO = 5,
  /**
   * A size guard refused the problem instance.
   */
  MFAC_STATUS_GUARD = 6,
  /**
   * An internal invariant broke; the library state is still valid.
   */
  MFAC_STATUS_PANIC = 7,
} MfacStatus;

/**
 * A learned concept bound to its recovered subspace.
 */
typedef struct MfacClassifier MfacClassifier;

/**
 * Recovered orthogonal split of the sample coordinates.
 */
typedef struct MfacFactorization MfacFactorization;

/**
 * Samples held as a dense matrix, one row per observation, with optional
 * binary labels.
 */
typedef struct MfacSamples MfacSamples;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static string; never freed by the caller.
 */
const char *mfac_version(void);

/**
 * Text of the most recent failure on this thread.
 *
 * The pointer stays valid until the next library call on the same thread;
 * copy the string before calling anything else. Returns an empty string
 * when no failure has been recorded.
 */
const char *mfac_last_error_message(void);

/**
 * Creates a sample set from a dense row-major array.
 *
 * `data` holds `rows * cols` values, one observation per row. `labels` is
 * either null or `rows` bytes of 0/1 class labels. The data is copied, so
 * the caller's buffers can be released immediately. Returns null on
 * failure.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles and `labels`, when
 * non-null, to `rows` readable bytes.
 */
struct MfacSamples *mfac_samples_create(const double *data,
                                        size_t rows,
                                        size_t cols,
                                        const uint8_t *labels);

/**
 * Loads samples from a file, choosing CSV or the binary format by
 * extension. Returns null on failure.
 *
 * # Safety
 * `path` must be a valid nul-terminated string.
 */
struct MfacSamples *mfac_samples_load(const char *path);

/**
 * Writes samples to a file, choosing CSV or the binary format by
 * extension.
 *
 * # Safety
 * `handle` must be a live samples handle and `path` a valid nul-terminated
 * string.
 */
enum MfacStatus mfac_samples_save(const struct MfacSamples *handle, const char *path);

/**
 * Number of observations, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live samples handle.
 */
size_t mfac_samples_rows(const struct MfacSamples *handle);

/**
 * Coordinate dimension, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live samples handle.
 */
size_t mfac_samples_cols(const struct MfacSamples *handle);

/**
 * Releases a samples handle. Null is ignored.
 *
 * # Safety
 * `handle` must be null or a samples handle not yet freed.
 */
void mfac_samples_free(struct MfacSamples *handle);

/**
 * Splits the coordinates of `samples` into a non-gaussian subspace and a
 * gaussian complement.
 *
 * `m_max` caps the moment order used in the search and `restarts` the
 * number of fresh attempts; pass 0 for either to keep the defaults. When
 * `whiten` is set the samples are whitened first and the recovered basis
 * refers to whitened coordinates. `seed` fixes the randomness. Returns
 * null on failure.
 *
 * # Safety
 * `samples` must be a live samples handle.
 */
struct MfacFactorization *mfac_factor_gaussian(const struct MfacSamples *samples,
                                               uint32_t m_max,
                                               uint32_t restarts,
                                               bool whiten_first,
                                               uint64_t seed);

/**
 * Dimension of the recovered non-gaussian subspace, or 0 for null.
 *
 * # Safety
 * `handle` must be null or a live factorization handle.
 */
size_t mfac_factorization_subspace_dim(const struct MfacFactorization *handle);

/**
 * Dimension of the coordinate space the split lives in, or 0 for null.
 *
 * # Safety
 * `handle` must be null or a live factorization handle.
 */
size_t mfac_factorization_ambient_dim(const struct MfacFactorization *handle);

/**
 * Whether the split passed its own independence and complement checks.
 *
 * # Safety
 * `handle` must be null or a live factorization handle.
 */
bool mfac_factorization_verified(const struct MfacFactorization *handle);

/**
 * Recovery attempts consumed, or 0 for null.
 *
 * # Safety
 * `handle` must be null or a live factorization handle.
 */
size_t mfac_factorization_attempts(const struct MfacFactorization *handle);

/**
 * Copies the recovered orthonormal basis into `out`.
 *
 * The basis is written row-major as `subspace_dim` rows of `ambient_dim`
 * values, one direction per row. `capacity` is the number of doubles `out`
 * can hold and must be at least `subspace_dim * ambient_dim`.
 *
 * # Safety
 * `handle` must be a live factorization handle and `out` must point to
 * `capacity` writable doubles.
 */
enum MfacStatus mfac_factorization_basis(const struct MfacFactorization *handle,
                                         double *out,
                                         size_t capacity);

/**
 * Releases a factorization handle. Null is ignored.
 *
 * # Safety
 * `handle` must be null or a factorization handle not yet freed.
 */
void mfac_factorization_free(struct MfacFactorization *handle);

/**
 * Learns a concept living on a `k`-dimensional subspace from labeled
 * samples whose remaining directions are gaussian.
 *
 * The samples must carry labels. `m_max` of 0 keeps the default moment
 * cap. `use_hull` selects a convex-hull hypothesis instead of an
 * axis-aligned box in the recovered coordinates; the box needs the concept
 * frame to align with the recovered directions, the hull does not. `seed`
 * fixes the randomness. Returns null on failure.
 *
 * # Safety
 * `samples` must be a live samples handle.
 */
struct MfacClassifier *mfac_learn(const struct MfacSamples *samples,
                                  size_t k,
                                  uint32_t m_max,
                                  bool use_hull,
                                  uint64_t seed);

/**
 * Holdout error rate estimated during learning, or NaN for null.
 *
 * # Safety
 * `handle` must be null or a live classifier handle.
 */
double mfac_classifier_holdout_error(const struct MfacClassifier *handle);

/**
 * Dimension of raw points the classifier accepts, or 0 for null.
 *
 * # Safety
 * `handle` must be null or a live classifier handle.
 */
size_t mfac_classifier_input_dim(const struct MfacClassifier *handle);

/**
 * Labels one raw point: 1 inside the concept, 0 outside, -1 on failure.
 *
 * `dim` must match [`mfac_classifier_input_dim`].
 *
 * # Safety
 * `handle` must be a live classifier handle and `point` must hold `dim`
 * readable doubles.
 */
int mfac_classifier_predict(const struct MfacClassifier *handle, const double *point, size_t dim);

/**
 * Serializes a classifier to a JSON string owned by the library; release
 * it with [`mfac_string_free`]. Returns null on failure.
 *
 * # Safety
 * `handle` must be a live classifier handle.
 */
char *mfac_classifier_to_json(const struct MfacClassifier *handle);

/**
 * Rebuilds a classifier from its JSON form. The holdout error of a
 * restored classifier reads as NaN. Returns null on failure.
 *
 * # Safety
 * `json` must be a valid nul-terminated string.
 */
struct MfacClassifier *mfac_classifier_from_json(const char *json);

/**
 * Releases a classifier handle. Null is ignored.
 *
 * # Safety
 * `handle` must be null or a classifier handle not yet freed.
 */
void mfac_classifier_free(struct MfacClassifier *handle);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string returned by a library call, not yet freed.
 */
void mfac_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MFAC_H */
