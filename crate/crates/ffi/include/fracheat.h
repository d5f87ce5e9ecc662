#ifndef FRACHEAT_H
#define FRACHEAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes shared by every entry point.
typedef enum FhStatus {
  FH_STATUS_OK = 0,
  FH_STATUS_NULL_POINTER = 1,
  FH_STATUS_INVALID_PARAMETER = 2,
  FH_STATUS_NUMERICAL = 3,
  // A verification command found violations; the report is still returned.
  FH_STATUS_VIOLATIONS = 4,
  FH_STATUS_INVALID_UTF8 = 5,
  FH_STATUS_PANIC = 6,
} FhStatus;

// Opaque handle to a sampled periodic function.
typedef struct FhFunction FhFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next call into this library on the same thread; do not free it.
const char *fh_last_error(void);

// Library version as a static string; do not free it.
const char *fh_version(void);

// Build a function from `len` samples on a `dim`-dimensional grid of side `size`.
//
// # Safety
// `values` must point to `len` readable doubles and `out` must be a valid
// pointer to writable storage for a handle.
enum FhStatus fh_function_from_samples(uintptr_t dim,
                                       uintptr_t size,
                                       const double *values,
                                       uintptr_t len,
                                       struct FhFunction **out);

// Build a named test function from a JSON description such as
// `{"family":"lacunary","s":0.5}`.
//
// # Safety
// `spec_json` must be a NUL-terminated string and `out` a valid pointer to
// writable storage for a handle.
enum FhStatus fh_function_from_spec(uintptr_t dim,
                                    uintptr_t size,
                                    const char *spec_json,
                                    struct FhFunction **out);

// Release a handle; NULL is ignored.
//
// # Safety
// `f` must be NULL or a handle returned by this library that was not freed yet.
void fh_function_free(struct FhFunction *f);

// Number of samples held by the handle.
//
// # Safety
// `f` must be a live handle and `out` a valid pointer.
enum FhStatus fh_function_len(const struct FhFunction *f, uintptr_t *out);

// Copy the samples into `buf`, which must hold exactly as many values as
// [`fh_function_len`] reports.
//
// # Safety
// `f` must be a live handle and `buf` must point to `len` writable doubles.
enum FhStatus fh_function_values(const struct FhFunction *f, double *buf, uintptr_t len);

// `T_{α,t} f` as a new handle.
//
// # Safety
// `f` must be a live handle and `out` a valid pointer.
enum FhStatus fh_semigroup_apply(const struct FhFunction *f,
                                 double alpha,
                                 double t,
                                 struct FhFunction **out);

// Radial derivative of order `k` of the kernel `K_α` in dimension `n`,
// with its quadrature error estimate.
//
// # Safety
// `value` and `error` must be valid pointers.
enum FhStatus fh_kernel(double alpha,
                        uintptr_t n,
                        uintptr_t k,
                        double x,
                        double *value,
                        double *error);

// Heat-side and difference-side `Λ_s` seminorms; the difference order is `⌊s⌋ + 1`.
//
// # Safety
// `f` must be a live handle; `heat` and `diff` must be valid pointers.
enum FhStatus fh_lambda_s_seminorms(const struct FhFunction *f,
                                    double alpha,
                                    uint32_t r,
                                    double s,
                                    uintptr_t octaves,
                                    uintptr_t per_octave,
                                    double *heat,
                                    double *diff);

// The envelope `max t^{αr-s} |∂_t^r u|` over the time grid.
//
// # Safety
// `f` must be a live handle and `out` a valid pointer.
enum FhStatus fh_envelope(const struct FhFunction *f,
                          double alpha,
                          uint32_t r,
                          double s,
                          uintptr_t octaves,
                          uintptr_t per_octave,
                          double *out);

// Run a CLI command (`kernel`, `lipnorm`, `verify`, ...) on a TOML config
// and return its JSON document in `*out`, to be released with
// [`fh_string_free`]. `Violations` still sets `*out`.
//
// # Safety
// `command` and `config_toml` must be NUL-terminated strings and `out` a
// valid pointer.
enum FhStatus fh_run_json(const char *command, const char *config_toml, char **out);

// Release a string returned by this library; NULL is ignored.
//
// # Safety
// `s` must be NULL or a string returned by [`fh_run_json`] that was not freed yet.
void fh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACHEAT_H */
