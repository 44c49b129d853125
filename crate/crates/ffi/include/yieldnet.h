#ifndef YIELDNET_H
#define YIELDNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum YnKind {
  YN_KIND_INVALID = 0,
  YN_KIND_GRNN = 1,
  YN_KIND_SVR = 2,
  YN_KIND_MLFN = 3,
} YnKind;

typedef enum YnStatus {
  YN_STATUS_OK = 0,
  YN_STATUS_NULL_POINTER = 1,
  YN_STATUS_INVALID_ARGUMENT = 2,
  YN_STATUS_IO = 3,
  YN_STATUS_FORMAT = 4,
  YN_STATUS_CHECKSUM = 5,
  YN_STATUS_UNSUPPORTED_VERSION = 6,
  YN_STATUS_DIMENSION = 7,
  YN_STATUS_TRAINING = 8,
  YN_STATUS_PANIC = 9,
} YnStatus;

// A trained model with its provenance.
typedef struct YnModel YnModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Loads a model file. On success `*out` owns a new handle.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a valid pointer.
enum YnStatus yn_model_load(const char *path, struct YnModel **out);

// Writes `model` to `path`.
//
// # Safety
// `model` must come from this library; `path` must be NUL-terminated.
enum YnStatus yn_model_save(const struct YnModel *model, const char *path);

// Predicts one sample of `len` raw feature values into `*out`.
//
// # Safety
// `x` must point to `len` doubles and `out` to one writable double.
enum YnStatus yn_model_predict(const struct YnModel *model,
                               const double *x,
                               size_t len,
                               double *out);

// Predicts `rows` samples stored row-major with `cols` values each.
//
// # Safety
// `x` must point to `rows * cols` doubles and `out` to `rows` doubles.
enum YnStatus yn_model_predict_batch(const struct YnModel *model,
                                     const double *x,
                                     size_t rows,
                                     size_t cols,
                                     double *out);

// Number of input features, or 0 for a null handle.
//
// # Safety
// `model` must be null or come from this library.
size_t yn_model_dim(const struct YnModel *model);

// Model family, or `YN_KIND_INVALID` for a null handle.
//
// # Safety
// `model` must be null or come from this library.
enum YnKind yn_model_kind(const struct YnModel *model);

// Releases a handle. Null is ignored.
//
// # Safety
// `model` must be null or a handle not yet freed.
void yn_model_free(struct YnModel *model);

// Fits a GRNN on `rows` samples of `cols` features (row-major `x`) and
// targets `y`. A `sigma` of zero or less selects the bandwidth by
// leave-one-out error over the default grid.
//
// # Safety
// `x` must point to `rows * cols` doubles, `y` to `rows` doubles and `out`
// to a writable handle pointer.
enum YnStatus yn_grnn_fit(const double *x,
                          size_t rows,
                          size_t cols,
                          const double *y,
                          double sigma,
                          struct YnModel **out);

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *yn_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *yn_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* YIELDNET_H */
