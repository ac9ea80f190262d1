#ifndef DIHEDRAL_H
#define DIHEDRAL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DhKind {
  DH_KIND_CYCLIC = 0,
  DH_KIND_DIHEDRAL = 1,
} DhKind;

typedef enum DhRelation {
  DH_RELATION_FACE = 0,
  DH_RELATION_MORPHISM = 1,
  DH_RELATION_COMPOSITION = 2,
  DH_RELATION_HOMOTOPY = 3,
} DhRelation;

typedef enum DhStatus {
  DH_STATUS_OK = 0,
  DH_STATUS_NULL_POINTER = 1,
  DH_STATUS_INVALID_UTF8 = 2,
  DH_STATUS_PARSE = 3,
  DH_STATUS_WINDOW = 4,
  DH_STATUS_UNVERIFIED = 5,
  DH_STATUS_INCOMPATIBLE = 6,
  DH_STATUS_OUT_OF_RANGE = 7,
  DH_STATUS_INTERNAL = 8,
} DhStatus;

/**
 * An involutive A∞-algebra with its coefficient ring.
 */
typedef struct DhAlgebra DhAlgebra;

/**
 * Homology of a total complex in a range of degrees.
 */
typedef struct DhHomology DhHomology;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *dh_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void dh_string_free(char *s);

/**
 * Parses a JSON document with an `algebra` section. `ring` ("z", "q" or
 * "zp:<p>") overrides the document's ring and may be null.
 *
 * # Safety
 * `json` and a non-null `ring` must be NUL-terminated strings; `out` must
 * be writable.
 */
enum DhStatus dh_algebra_from_json(const char *json, const char *ring, struct DhAlgebra **out);

/**
 * # Safety
 * `alg` must be null or a handle from `dh_algebra_from_json` not yet freed.
 */
void dh_algebra_free(struct DhAlgebra *alg);

/**
 * Number of generators.
 *
 * # Safety
 * `alg` must be a live handle.
 */
enum DhStatus dh_algebra_dim(const struct DhAlgebra *alg, size_t *out);

/**
 * Checks the A∞ relations, the involution and the tensor module relations
 * up to level `truncate`. `report_json` may be null; otherwise it receives
 * the reports as a JSON array.
 *
 * # Safety
 * `alg` must be a live handle; `passed` must be writable.
 */
enum DhStatus dh_algebra_verify(const struct DhAlgebra *alg,
                                size_t truncate,
                                bool *passed,
                                char **report_json);

/**
 * HC or HD of the algebra in degrees lo..=hi using the tensor module
 * truncated at level `truncate` (which must exceed hi).
 *
 * # Safety
 * `alg` must be a live handle; `out` must be writable.
 */
enum DhStatus dh_homology_compute(const struct DhAlgebra *alg,
                                  enum DhKind kind,
                                  size_t truncate,
                                  size_t lo,
                                  size_t hi,
                                  struct DhHomology **out);

/**
 * # Safety
 * `h` must be null or a handle from `dh_homology_compute` not yet freed.
 */
void dh_homology_free(struct DhHomology *h);

/**
 * Number of degrees in the result.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum DhStatus dh_homology_len(const struct DhHomology *h, size_t *out);

/**
 * Largest total degree certified by the truncation.
 *
 * # Safety
 * `h` must be a live handle.
 */
enum DhStatus dh_homology_certified_bound(const struct DhHomology *h, size_t *out);

/**
 * Degree, free rank and number of torsion factors of entry `i`.
 *
 * # Safety
 * `h` must be a live handle; the out-parameters must be writable.
 */
enum DhStatus dh_homology_entry(const struct DhHomology *h,
                                size_t i,
                                size_t *degree,
                                size_t *rank,
                                size_t *torsion_count);

/**
 * Torsion factor `j` of entry `i` as a decimal string.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum DhStatus dh_homology_torsion(const struct DhHomology *h, size_t i, size_t j, char **out);

/**
 * The whole result as JSON.
 *
 * # Safety
 * `h` must be a live handle; `out` must be writable.
 */
enum DhStatus dh_homology_to_json(const struct DhHomology *h, char **out);

/**
 * Symbolic expansion of a relation for a tuple such as "(i,j)" or "(0,2)".
 *
 * # Safety
 * `tuple` must be a NUL-terminated string; `out` must be writable.
 */
enum DhStatus dh_expand(enum DhRelation relation, const char *tuple, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIHEDRAL_H */
