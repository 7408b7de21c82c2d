#ifndef MIMETIC_MAXWELL_H
#define MIMETIC_MAXWELL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Mesh families accepted by [`mm_discretization_new`].
 */
typedef enum MmMeshKind {
  MM_MESH_KIND_CUBE_PYRAMIDS = 0,
  MM_MESH_KIND_BCC = 1,
} MmMeshKind;

/**
 * Status codes returned by every fallible function.
 */
typedef enum MmStatus {
  MM_STATUS_OK = 0,
  MM_STATUS_NULL_POINTER = 1,
  MM_STATUS_INVALID_ARGUMENT = 2,
  MM_STATUS_INVALID_MESH = 3,
  MM_STATUS_DEGENERATE_GEOMETRY = 4,
  MM_STATUS_NUMERICAL_BREAKDOWN = 5,
  /**
   * The run finished but at least one step did not reach the outer tolerance.
   */
  MM_STATUS_NOT_CONVERGED = 6,
  MM_STATUS_BUFFER_TOO_SMALL = 7,
  MM_STATUS_INTERNAL = 8,
  MM_STATUS_PANIC = 9,
} MmStatus;

/**
 * Mesh, dual geometry and operators for one refinement level.
 */
typedef struct MmDiscretization MmDiscretization;

/**
 * Result of a time-stepping run.
 */
typedef struct MmReport MmReport;

/**
 * Entity and unknown counts of a discretization.
 */
typedef struct MmCounts {
  uintptr_t vertices;
  uintptr_t edges;
  uintptr_t faces;
  uintptr_t tets;
  uintptr_t interior_vertices;
  uintptr_t interior_edges;
  uintptr_t interior_faces;
  /**
   * Interior unknowns of the time-stepping system.
   */
  uintptr_t dofs;
  double h;
  /**
   * Largest relative deviation of the four measure identities.
   */
  double identity_residual;
  /**
   * Nonzero when the requested mesh was replaced by the BCC mesh.
   */
  int32_t substituted;
} MmCounts;

/**
 * Headline numbers of a run.
 */
typedef struct MmSummary {
  uintptr_t steps;
  double err_e;
  double err_b;
  double iters_mean;
  double div_b_max;
  double energy_drift;
  uintptr_t nonconverged_steps;
} MmSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version string of the library, statically allocated.
 */
const char *mm_version(void);

/**
 * Copies the last error message of the calling thread into `buf`.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes; `needed` must be null or valid for one write.
 */
enum MmStatus mm_last_error(char *buf, uintptr_t len, uintptr_t *needed);

/**
 * Builds the mesh of family `kind` at refinement level `refine`, its dual
 * geometry and operators. For BCC the lattice has `2^refine` cells per side.
 *
 * # Safety
 * `out` must be valid for one write. On success `*out` owns a handle that must
 * be released with [`mm_discretization_free`].
 */
enum MmStatus mm_discretization_new(enum MmMeshKind kind,
                                    uint32_t refine,
                                    struct MmDiscretization **out);

/**
 * Releases a discretization. Null is ignored.
 *
 * # Safety
 * `d` must be null or a handle from [`mm_discretization_new`] not yet released.
 */
void mm_discretization_free(struct MmDiscretization *d);

/**
 * Fills `out` with entity counts and the measure-identity residual.
 *
 * # Safety
 * `d` must be a live handle and `out` valid for one write.
 */
enum MmStatus mm_discretization_counts(const struct MmDiscretization *d, struct MmCounts *out);

/**
 * Runs the manufactured-solution problem on `d`.
 *
 * `config_json` is a run configuration in the JSON form written by the CLI,
 * or null for the defaults; missing fields take their defaults and the mesh fields are replaced by those of `d`.
 * Returns [`MmStatus::NotConverged`] (with a valid report) when some step
 * missed the outer tolerance.
 *
 * # Safety
 * `d` must be a live handle, `config_json` null or a NUL-terminated UTF-8
 * string, and `out` valid for one write. On success `*out` must be released
 * with [`mm_report_free`].
 */
enum MmStatus mm_run(const struct MmDiscretization *d,
                     const char *config_json,
                     struct MmReport **out);

/**
 * Fills `out` with the headline numbers of a report.
 *
 * # Safety
 * `r` must be a live report handle and `out` valid for one write.
 */
enum MmStatus mm_report_summary(const struct MmReport *r, struct MmSummary *out);

/**
 * Copies the full JSON report into `buf`. With a null or short buffer
 * the required capacity is still stored in `needed`.
 *
 * # Safety
 * `r` must be a live report handle, `buf` null or valid for `len` bytes,
 * and `needed` null or valid for one write.
 */
enum MmStatus mm_report_json(const struct MmReport *r, char *buf, uintptr_t len, uintptr_t *needed);

/**
 * Releases a report. Null is ignored.
 *
 * # Safety
 * `r` must be null or a handle from [`mm_run`] not yet released.
 */
void mm_report_free(struct MmReport *r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIMETIC_MAXWELL_H */
