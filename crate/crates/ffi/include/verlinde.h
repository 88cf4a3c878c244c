#ifndef VERLINDE_H
#define VERLINDE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes shared by every fallible function.
 */
typedef enum VerlindeStatus {
  VERLINDE_STATUS_OK = 0,
  VERLINDE_STATUS_NULL_POINTER = 1,
  VERLINDE_STATUS_INVALID_INPUT = 2,
  VERLINDE_STATUS_UNSUPPORTED_TYPE = 3,
  VERLINDE_STATUS_INADMISSIBLE = 4,
  VERLINDE_STATUS_COMPUTATION = 5,
  VERLINDE_STATUS_OUT_OF_RANGE = 6,
  VERLINDE_STATUS_INVALID_UTF8 = 7,
  VERLINDE_STATUS_PANIC = 8,
} VerlindeStatus;

/*
 A root system (group type). Opaque.
 */
typedef struct VerlindeGroup VerlindeGroup;

/*
 A level on a group. Opaque; only valid with the group it was made for.
 */
typedef struct VerlindeLevel VerlindeLevel;

/*
 A truncated power series. Opaque.
 */
typedef struct VerlindeSeries VerlindeSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty after a success.
 The pointer stays valid until the next call into this library on the
 same thread.
 */
const char *verlinde_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *verlinde_version(void);

/*
 Creates a group from a label such as `A2`, `G2`, `T1` or `A1xT1`.

 # Safety
 `label` must be a NUL-terminated string; `out` must be writable.
 */
enum VerlindeStatus verlinde_group_new(const char *label, struct VerlindeGroup **out);

/*
 # Safety
 `group` must come from [`verlinde_group_new`] and not be used afterwards.
 */
void verlinde_group_free(struct VerlindeGroup *group);

/*
 Rank of the maximal torus; `0` for a NULL handle.

 # Safety
 `group` must be NULL or a live handle.
 */
size_t verlinde_group_rank(const struct VerlindeGroup *group);

/*
 Order of the Weyl group; `0` for a NULL handle.

 # Safety
 `group` must be NULL or a live handle.
 */
size_t verlinde_group_weyl_order(const struct VerlindeGroup *group);

/*
 The level `k` times the basic invariant form.

 # Safety
 `group` must be a live handle; `out` must be writable.
 */
enum VerlindeStatus verlinde_level_new_scalar(const struct VerlindeGroup *group,
                                              int64_t k,
                                              struct VerlindeLevel **out);

/*
 A level given as a symmetric `rank × rank` integer matrix in row-major
 order on the coweight lattice.

 # Safety
 `entries` must point to `rank * rank` values; `out` must be writable.
 */
enum VerlindeStatus verlinde_level_new_matrix(const struct VerlindeGroup *group,
                                              const int64_t *entries,
                                              struct VerlindeLevel **out);

/*
 # Safety
 `level` must come from a `verlinde_level_new_*` call and not be reused.
 */
void verlinde_level_free(struct VerlindeLevel *level);

/*
 Size of the Verlinde point set, `|det(h + c)|`; `0` for NULL.

 # Safety
 `level` must be NULL or a live handle.
 */
int64_t verlinde_level_point_count(const struct VerlindeLevel *level);

/*
 Verlinde number at the given genus.

 # Safety
 Handles must be live; `out` must be writable.
 */
enum VerlindeStatus verlinde_number(const struct VerlindeGroup *group,
                                    const struct VerlindeLevel *level,
                                    uint32_t genus,
                                    double *out);

/*
 Genus-`g` partition function of the level-`k` fusion ring (simple
 groups only), computed independently of the Verlinde formula.

 # Safety
 `group` must be live; `out` must be writable.
 */
enum VerlindeStatus verlinde_fusion_oracle(const struct VerlindeGroup *group,
                                           int64_t k,
                                           uint32_t genus,
                                           int64_t *out);

/*
 Index deformed by one representation in the variable `t`, truncated at
 `order`. `deformation_weight` and `insertion_weight` are highest weights
 of length `rank`; NULL means no deformation and the trivial insertion.

 # Safety
 Handles must be live; weight pointers must be NULL or hold `rank`
 values; `out` must be writable.
 */
enum VerlindeStatus verlinde_index_even(const struct VerlindeGroup *group,
                                        const struct VerlindeLevel *level,
                                        uint32_t genus,
                                        const int64_t *deformation_weight,
                                        const int64_t *insertion_weight,
                                        size_t order,
                                        struct VerlindeSeries **out);

/*
 # Safety
 `series` must come from this library and not be reused.
 */
void verlinde_series_free(struct VerlindeSeries *series);

/*
 Number of variables; `0` for NULL.

 # Safety
 `series` must be NULL or a live handle.
 */
size_t verlinde_series_num_vars(const struct VerlindeSeries *series);

/*
 Truncation order (total degree); `0` for NULL.

 # Safety
 `series` must be NULL or a live handle.
 */
size_t verlinde_series_order(const struct VerlindeSeries *series);

/*
 Number of stored coefficients (all monomials up to the order); `0` for
 NULL.

 # Safety
 `series` must be NULL or a live handle.
 */
size_t verlinde_series_num_terms(const struct VerlindeSeries *series);

/*
 The `index`-th coefficient in monomial order. `exponents` receives
 `num_vars` values and may be NULL.

 # Safety
 `series` must be live; `exponents` must be NULL or hold `num_vars`
 slots; `re` and `im` must be writable.
 */
enum VerlindeStatus verlinde_series_term(const struct VerlindeSeries *series,
                                         size_t index,
                                         uint32_t *exponents,
                                         double *re,
                                         double *im);

/*
 Coefficient of `t^n` for a one-variable series.

 # Safety
 `series` must be live; `re` and `im` must be writable.
 */
enum VerlindeStatus verlinde_series_coefficient(const struct VerlindeSeries *series,
                                                uint32_t n,
                                                double *re,
                                                double *im);

/*
 SL(2) Verlinde number at a possibly large level.

 # Safety
 `out` must be writable.
 */
enum VerlindeStatus verlinde_su2_number(int64_t level, uint32_t genus, double *out);

/*
 Large-`n` limit of the SL(2) Verlinde numbers at level `n(l+2)−2`
 divided by `n^{3(g−1)}`.

 # Safety
 `out` must be writable.
 */
enum VerlindeStatus verlinde_su2_limit(int64_t l, uint32_t genus, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VERLINDE_H */
