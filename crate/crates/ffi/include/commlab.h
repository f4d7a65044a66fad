#ifndef COMMLAB_H
#define COMMLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Built-in function families for [`commlab_function_new`].
typedef enum CommlabFunctionKind {
  COMMLAB_FUNCTION_KIND_XOR = 0,
  COMMLAB_FUNCTION_KIND_EQ = 1,
  COMMLAB_FUNCTION_KIND_MAT_VEC = 2,
} CommlabFunctionKind;

typedef enum CommlabGenerator {
  COMMLAB_GENERATOR_PARTITION = 0,
  COMMLAB_GENERATOR_RANDOM_BOUNDED = 1,
} CommlabGenerator;

typedef enum CommlabRhoMode {
  COMMLAB_RHO_MODE_GLOBAL = 0,
  COMMLAB_RHO_MODE_MAX_BOX = 1,
  COMMLAB_RHO_MODE_EXPECTED = 2,
} CommlabRhoMode;

// Result code of every fallible call.
typedef enum CommlabStatus {
  COMMLAB_STATUS_OK = 0,
  COMMLAB_STATUS_INVALID_INPUT = 1,
  COMMLAB_STATUS_UNCOVERED_CELL = 2,
  COMMLAB_STATUS_INVALID_SELECTOR = 3,
  COMMLAB_STATUS_INVALID_TREE = 4,
  COMMLAB_STATUS_GENERATION_FAILURE = 5,
  COMMLAB_STATUS_DEGENERATE = 6,
  COMMLAB_STATUS_SIZE_CAP = 7,
  // A required pointer argument was null.
  COMMLAB_STATUS_NULL_POINTER = 8,
  // A string argument was not UTF-8.
  COMMLAB_STATUS_INVALID_UTF8 = 9,
  // An exact search stopped at its time limit; bounds are still filled.
  COMMLAB_STATUS_TIMEOUT = 10,
  // Internal panic caught at the boundary.
  COMMLAB_STATUS_INTERNAL = 11,
} CommlabStatus;

typedef enum CommlabSuite {
  COMMLAB_SUITE_MAIN = 0,
  COMMLAB_SUITE_TRANSCRIPT = 1,
  COMMLAB_SUITE_IC = 2,
  COMMLAB_SUITE_MULTIPARTY = 3,
  COMMLAB_SUITE_TREE = 4,
} CommlabSuite;

// Opaque colored function.
typedef struct CommlabFunction CommlabFunction;

// Opaque validated instance.
typedef struct CommlabInstance CommlabInstance;

// Headline quantities of one instance. Two-party-only values are NaN for
// other arities.
typedef struct CommlabProfile {
  size_t arity;
  uint32_t rho_global;
  uint32_t rho_box_max;
  double h_t;
  double i_xy;
  double i_xy_given_t;
  double ic;
  double margin_main;
} CommlabProfile;

// Exact cover outcome; `lower == upper` unless the search timed out.
typedef struct CommlabCover {
  size_t lower;
  size_t upper;
  size_t greedy;
} CommlabCover;

typedef struct CommlabBounds {
  size_t color_count;
  size_t cover_lower;
  size_t cover_upper;
  size_t cover_greedy;
  size_t fooling_best;
  size_t rank_rational;
  size_t rank_gf2;
} CommlabBounds;

typedef struct CommlabBatchSummary {
  size_t rows;
  size_t violations;
  size_t errors;
  // Smallest margin over all checks of all rows.
  double min_margin;
} CommlabBatchSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer is
// valid until the next failing call on the same thread.
const char *commlab_last_error(void);

// Library version as a static NUL-terminated string.
const char *commlab_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void commlab_string_free(char *s);

// Parses and validates an instance document (`commlab-instance-v1`).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum CommlabStatus commlab_instance_from_json(const char *json, struct CommlabInstance **out);

// Canonical JSON of an instance; free with [`commlab_string_free`].
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum CommlabStatus commlab_instance_to_json(const struct CommlabInstance *inst, char **out);

// # Safety
// `inst` must be null or a live handle from this library.
void commlab_instance_free(struct CommlabInstance *inst);

// Information profile and main-inequality margin of an instance.
//
// # Safety
// `inst` must be a live handle; `out` must be writable.
enum CommlabStatus commlab_instance_profile(const struct CommlabInstance *inst,
                                            enum CommlabRhoMode rho_mode,
                                            struct CommlabProfile *out);

// Builds a built-in function. `parties` is used by `MatVec` only.
//
// # Safety
// `out` must be writable.
enum CommlabStatus commlab_function_new(enum CommlabFunctionKind kind,
                                        uint32_t n,
                                        size_t parties,
                                        struct CommlabFunction **out);

// Number of distinct colors.
//
// # Safety
// `f` must be a live handle.
uint32_t commlab_function_num_colors(const struct CommlabFunction *f);

// # Safety
// `f` must be null or a live handle from this library.
void commlab_function_free(struct CommlabFunction *f);

// Monochromatic cover number. With `exact == false` only the greedy value
// is computed and `lower`/`upper` equal it. A non-positive `timeout_s`
// means no limit. Returns `Timeout` with valid bounds if time ran out.
//
// # Safety
// `f` must be a live handle; `out` must be writable.
enum CommlabStatus commlab_cover_number(const struct CommlabFunction *f,
                                        bool exact,
                                        double timeout_s,
                                        struct CommlabCover *out);

// All lower and upper bounds at once. Fooling set and ranks are summed
// over colors.
//
// # Safety
// `f` must be a live handle; `out` must be writable.
enum CommlabStatus commlab_bounds(const struct CommlabFunction *f,
                                  double timeout_s,
                                  struct CommlabBounds *out);

// Runs a verification suite over seeds `seed_lo..=seed_hi`.
//
// # Safety
// `out` must be writable.
enum CommlabStatus commlab_verify_batch(enum CommlabSuite suite,
                                        enum CommlabGenerator generator,
                                        size_t arity,
                                        size_t max_side,
                                        uint32_t rho_max,
                                        uint64_t seed_lo,
                                        uint64_t seed_hi,
                                        enum CommlabRhoMode rho_mode,
                                        double tol,
                                        struct CommlabBatchSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMMLAB_H */
