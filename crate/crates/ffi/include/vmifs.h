#ifndef VMIFS_H
#define VMIFS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum VmifsStatus {
  VMIFS_STATUS_OK = 0,
  VMIFS_STATUS_NULL_POINTER = 1,
  VMIFS_STATUS_INVALID_UTF8 = 2,
  VMIFS_STATUS_IO = 3,
  VMIFS_STATUS_PARSE = 4,
  VMIFS_STATUS_INVALID_ARGUMENT = 5,
  VMIFS_STATUS_INVALID_DATASET = 6,
  VMIFS_STATUS_CONTINUOUS_COLUMN = 7,
  VMIFS_STATUS_CAP_EXCEEDED = 8,
  VMIFS_STATUS_UNSUPPORTED = 9,
  VMIFS_STATUS_ESTIMATION = 10,
  VMIFS_STATUS_PANIC = 11,
} VmifsStatus;

typedef enum VmifsBinStrategy {
  VMIFS_BIN_STRATEGY_EQUAL_WIDTH = 0,
  VMIFS_BIN_STRATEGY_EQUAL_FREQUENCY = 1,
} VmifsBinStrategy;

typedef enum VmifsMethod {
  VMIFS_METHOD_VMI_NAIVE = 0,
  VMIFS_METHOD_VMI_PAIRWISE = 1,
  VMIFS_METHOD_MIM = 2,
  VMIFS_METHOD_MRMR = 3,
  VMIFS_METHOD_JMI = 4,
  VMIFS_METHOD_CMIM = 5,
  VMIFS_METHOD_CIFE = 6,
  VMIFS_METHOD_EXACT_GREEDY = 7,
} VmifsMethod;

/**
 * Opaque dataset handle.
 */
typedef struct VmifsDataset VmifsDataset;

/**
 * Opaque selection result handle.
 */
typedef struct VmifsSelection VmifsSelection;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *vmifs_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *vmifs_version(void);

/**
 * Loads a CSV file. `label` names the label column (header name or 0-based
 * index); NULL selects the last column.
 *
 * # Safety
 * `path` and a non-null `label` must be NUL-terminated strings; `out` must
 * be writable.
 */
enum VmifsStatus vmifs_dataset_from_csv(const char *path,
                                        const char *label,
                                        struct VmifsDataset **out);

/**
 * Samples `n` rows of the nine-feature Gaussian tree model.
 *
 * # Safety
 * `out` must be writable.
 */
enum VmifsStatus vmifs_dataset_gen_tree(size_t n, uint64_t seed, struct VmifsDataset **out);

/**
 * Bins every continuous column into a new dataset.
 *
 * # Safety
 * `ds` must be a live handle; `out` must be writable.
 */
enum VmifsStatus vmifs_dataset_discretize(const struct VmifsDataset *ds,
                                          size_t bins,
                                          enum VmifsBinStrategy strategy,
                                          struct VmifsDataset **out);

/**
 * Row count, or 0 for NULL.
 *
 * # Safety
 * `ds` must be NULL or a live handle.
 */
size_t vmifs_dataset_n_samples(const struct VmifsDataset *ds);

/**
 * Feature count, or 0 for NULL.
 *
 * # Safety
 * `ds` must be NULL or a live handle.
 */
size_t vmifs_dataset_n_features(const struct VmifsDataset *ds);

/**
 * # Safety
 * `ds` must be NULL or a handle not yet freed.
 */
void vmifs_dataset_free(struct VmifsDataset *ds);

/**
 * Plug-in `I(x_feature; y)` in nats.
 *
 * # Safety
 * `ds` must be a live handle; `out` must be writable.
 */
enum VmifsStatus vmifs_mi_plugin(const struct VmifsDataset *ds,
                                 size_t feature,
                                 double alpha,
                                 double *out);

/**
 * Exact empirical `I(x_S; y)` for the `len` feature indices at `features`.
 *
 * # Safety
 * `ds` must be a live handle; `features` must point to `len` values (or be
 * NULL when `len` is 0); `out` must be writable.
 */
enum VmifsStatus vmifs_joint_mi_exact(const struct VmifsDataset *ds,
                                      const size_t *features,
                                      size_t len,
                                      double *out);

/**
 * Greedy selection of `n_select` features. `alpha` is the smoothing used by
 * the VMI methods and ignored by the others.
 *
 * # Safety
 * `ds` must be a live handle; `out` must be writable.
 */
enum VmifsStatus vmifs_select(const struct VmifsDataset *ds,
                              enum VmifsMethod method,
                              size_t n_select,
                              double alpha,
                              struct VmifsSelection **out);

/**
 * Number of selected features, or 0 for NULL.
 *
 * # Safety
 * `sel` must be NULL or a live handle.
 */
size_t vmifs_selection_len(const struct VmifsSelection *sel);

/**
 * Feature index at `rank`, or `SIZE_MAX` when out of range.
 *
 * # Safety
 * `sel` must be NULL or a live handle.
 */
size_t vmifs_selection_feature(const struct VmifsSelection *sel, size_t rank);

/**
 * Objective value after the selection at `rank`, or NaN when out of range.
 *
 * # Safety
 * `sel` must be NULL or a live handle.
 */
double vmifs_selection_score(const struct VmifsSelection *sel, size_t rank);

/**
 * Number of restarts during the run, or 0 for NULL.
 *
 * # Safety
 * `sel` must be NULL or a live handle.
 */
size_t vmifs_selection_restart_count(const struct VmifsSelection *sel);

/**
 * # Safety
 * `sel` must be NULL or a handle not yet freed.
 */
void vmifs_selection_free(struct VmifsSelection *sel);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VMIFS_H */
