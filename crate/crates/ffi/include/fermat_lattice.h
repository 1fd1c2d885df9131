#ifndef FERMAT_LATTICE_H
#define FERMAT_LATTICE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes of every fallible call.
 */
typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_ARGUMENT = 1,
  FL_STATUS_INVALID_ARGUMENT = 2,
  FL_STATUS_DIMENSION_MISMATCH = 3,
  FL_STATUS_NOT_SYMMETRIC = 4,
  FL_STATUS_NOT_UNIMODULAR = 5,
  FL_STATUS_STRUCTURAL = 6,
  FL_STATUS_REFUSED = 7,
  FL_STATUS_FORMAT = 8,
  FL_STATUS_IO = 9,
  FL_STATUS_PANIC = 10,
  FL_STATUS_INTERNAL = 11,
} FlStatus;

/**
 * Which lattice `fl_compute` builds.
 */
typedef enum FlTarget {
  FL_TARGET_FULL_LINEAR = 0,
  FL_TARGET_PRIMITIVE_LINEAR = 1,
  FL_TARGET_PRIMITIVE_HODGE = 2,
} FlTarget;

/**
 * Dense matrix of arbitrary-precision integers.
 */
typedef struct FlMatrix FlMatrix;

/**
 * Rank, elementary divisors and discriminant sign of one lattice.
 */
typedef struct FlReport FlReport;

/**
 * Outcome of comparing the linear-cycle and Hodge-cycle lattices.
 */
typedef struct FlVerification FlVerification;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *fl_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fl_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void fl_string_free(char *s);

/**
 * Builds a matrix from `rows * cols` row-major 64-bit entries.
 *
 * # Safety
 * `entries` must point to `rows * cols` readable values; `out` must be writable.
 */
enum FlStatus fl_matrix_new(size_t rows,
                            size_t cols,
                            const int64_t *entries,
                            struct FlMatrix **out);

/**
 * Parses `{"rows":r,"cols":c,"entries":["decimal",...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FlStatus fl_matrix_from_json(const char *json, struct FlMatrix **out);

/**
 * # Safety
 * `m` must be NULL or a live matrix handle.
 */
void fl_matrix_free(struct FlMatrix *m);

/**
 * Number of rows, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live matrix handle.
 */
size_t fl_matrix_rows(const struct FlMatrix *m);

/**
 * Number of columns, or 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live matrix handle.
 */
size_t fl_matrix_cols(const struct FlMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle; `out` must be writable.
 */
enum FlStatus fl_matrix_to_json(const struct FlMatrix *m, char **out);

/**
 * Elementary divisors as a JSON array of decimal strings.
 *
 * # Safety
 * `m` must be a live matrix handle; `out` must be writable.
 */
enum FlStatus fl_elementary_divisors(const struct FlMatrix *m, char **out);

/**
 * Invariants of `V / V^perp` for a symmetric Gram matrix. `n` and `d`
 * are recorded in the report; pass 0 when they do not apply.
 *
 * # Safety
 * `gram` must be a live matrix handle; `out` must be writable.
 */
enum FlStatus fl_lattice_invariants(const struct FlMatrix *gram,
                                    uint32_t n,
                                    uint32_t d,
                                    struct FlReport **out);

/**
 * Runs one branch of the pipeline under default resource caps.
 * `cache_dir` may be NULL.
 *
 * # Safety
 * `cache_dir` must be NULL or NUL-terminated; `out` must be writable.
 */
enum FlStatus fl_compute(uint32_t n,
                         uint32_t d,
                         enum FlTarget target,
                         const char *cache_dir,
                         struct FlReport **out);

/**
 * Runs both branches and compares them. `cache_dir` may be NULL.
 *
 * # Safety
 * `cache_dir` must be NULL or NUL-terminated; `out` must be writable.
 */
enum FlStatus fl_verify(uint32_t n, uint32_t d, const char *cache_dir, struct FlVerification **out);

/**
 * Number of linear cycles on the Fermat variety, as a decimal string.
 *
 * # Safety
 * `out` must be writable.
 */
enum FlStatus fl_cycle_count(uint32_t n, uint32_t d, char **out);

/**
 * # Safety
 * `r` must be NULL or a live report handle.
 */
void fl_report_free(struct FlReport *r);

/**
 * Rank of the nondegenerate quotient, or 0 for NULL.
 *
 * # Safety
 * `r` must be NULL or a live report handle.
 */
size_t fl_report_rank(const struct FlReport *r);

/**
 * Discriminant sign, +1 or -1; 0 for NULL.
 *
 * # Safety
 * `r` must be NULL or a live report handle.
 */
int32_t fl_report_sign(const struct FlReport *r);

/**
 * Divisors in table notation with the sign, e.g. `+1^26·5^10·25^1`.
 *
 * # Safety
 * `r` must be a live report handle; `out` must be writable.
 */
enum FlStatus fl_report_divisors(const struct FlReport *r, char **out);

/**
 * # Safety
 * `r` must be a live report handle; `out` must be writable.
 */
enum FlStatus fl_report_to_json(const struct FlReport *r, char **out);

/**
 * # Safety
 * `v` must be NULL or a live verification handle.
 */
void fl_verification_free(struct FlVerification *v);

/**
 * # Safety
 * `v` must be NULL or a live verification handle.
 */
bool fl_verification_lists_equal(const struct FlVerification *v);

/**
 * # Safety
 * `v` must be NULL or a live verification handle.
 */
bool fl_verification_table_relation_ok(const struct FlVerification *v);

/**
 * # Safety
 * `v` must be NULL or a live verification handle.
 */
bool fl_verification_condition_eq1(const struct FlVerification *v);

/**
 * # Safety
 * `v` must be a live verification handle; `out` must be writable.
 */
enum FlStatus fl_verification_to_json(const struct FlVerification *v, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FERMAT_LATTICE_H */
