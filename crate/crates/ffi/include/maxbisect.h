#ifndef MAXBISECT_H
#define MAXBISECT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MbStatus {
  MB_STATUS_OK = 0,
  MB_STATUS_NULL_POINTER = 1,
  MB_STATUS_INVALID_UTF8 = 2,
  MB_STATUS_PARSE = 3,
  MB_STATUS_INVALID = 4,
  MB_STATUS_IO = 5,
  /**
   * The call succeeded but the certificate or replay did not verify.
   */
  MB_STATUS_NOT_VERIFIED = 6,
  MB_STATUS_OUT_OF_RANGE = 7,
  MB_STATUS_PANIC = 8,
} MbStatus;

typedef struct MbBlueprint MbBlueprint;

typedef struct MbCertificate MbCertificate;

/**
 * Closed interval [lo, hi].
 */
typedef struct MbInterval {
  double lo;
  double hi;
} MbInterval;

typedef struct MbConstants {
  struct MbInterval alpha_gw;
  struct MbInterval b_gw;
  struct MbInterval c_gw;
} MbConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; valid until the next
 * failure on the same thread.
 */
const char *mb_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mb_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void mb_string_free(char *s);

/**
 * # Safety
 * `out_constants` must be valid for writes.
 */
enum MbStatus mb_constants(struct MbConstants *out_constants);

/**
 * Enclosure of Γ_ρ(q1, q2) for point arguments.
 *
 * # Safety
 * `out_value` must be valid for writes.
 */
enum MbStatus mb_gamma(double rho, double q1, double q2, struct MbInterval *out_value);

/**
 * The built-in blueprint 𝒟*.
 *
 * # Safety
 * `out_bp` must be valid for writes.
 */
enum MbStatus mb_blueprint_dstar(struct MbBlueprint **out_bp);

/**
 * Parses a blueprint file's contents.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out_bp` valid for writes.
 */
enum MbStatus mb_blueprint_parse(const char *text_in, struct MbBlueprint **out_bp);

/**
 * # Safety
 * `bp` must be null or a handle from this library, not yet freed.
 */
void mb_blueprint_free(struct MbBlueprint *bp);

/**
 * Number of biases, or 0 for a null handle.
 *
 * # Safety
 * `bp` must be null or a live handle.
 */
size_t mb_blueprint_len(const struct MbBlueprint *bp);

/**
 * # Safety
 * `bp` must be a live handle; `out_value` valid for writes.
 */
enum MbStatus mb_blueprint_completeness(const struct MbBlueprint *bp, struct MbInterval *out_value);

/**
 * Soundness and balance residual at threshold values t[0..n], one per bias
 * in blueprint order.
 *
 * # Safety
 * `bp` must be a live handle, `t` must point to `n` doubles and the outputs
 * must be valid for writes (`out_balance` may be null).
 */
enum MbStatus mb_blueprint_soundness(const struct MbBlueprint *bp,
                                     const double *t,
                                     size_t n,
                                     struct MbInterval *out_value,
                                     struct MbInterval *out_balance);

/**
 * Runs the certifier. Returns `Ok` when verified and `NotVerified`
 * otherwise; in both cases `*out_cert` receives the certificate.
 *
 * # Safety
 * `bp` must be a live handle; `out_cert` valid for writes.
 */
enum MbStatus mb_certify(const struct MbBlueprint *bp,
                         double bound,
                         uint32_t max_depth,
                         struct MbCertificate **out_cert);

/**
 * # Safety
 * `text` must be NUL-terminated; `out_cert` valid for writes.
 */
enum MbStatus mb_certificate_parse(const char *text_in, struct MbCertificate **out_cert);

/**
 * # Safety
 * `cert` must be null or a live handle.
 */
void mb_certificate_free(struct MbCertificate *cert);

/**
 * 1 if the certificate claims verification, 0 otherwise (including null).
 *
 * # Safety
 * `cert` must be null or a live handle.
 */
int32_t mb_certificate_verified(const struct MbCertificate *cert);

/**
 * Number of verified regions, or 0 for a null handle.
 *
 * # Safety
 * `cert` must be null or a live handle.
 */
size_t mb_certificate_regions(const struct MbCertificate *cert);

/**
 * Largest s/c_GW upper bound over the verified regions.
 *
 * # Safety
 * `cert` must be a live handle; `out_ratio` valid for writes.
 */
enum MbStatus mb_certificate_max_ratio(const struct MbCertificate *cert, double *out_ratio);

/**
 * Serialized certificate; free with `mb_string_free`.
 *
 * # Safety
 * `cert` must be a live handle; `out_text` valid for writes.
 */
enum MbStatus mb_certificate_to_text(const struct MbCertificate *cert, char **out_text);

/**
 * Independent re-check against `bp`, re-evaluating every `stride`-th
 * region (0 or 1 for all). `Ok` iff the replay verifies; the reason for a
 * mismatch is available from `mb_last_error`.
 *
 * # Safety
 * Both handles must be live.
 */
enum MbStatus mb_certificate_replay(const struct MbCertificate *cert,
                                    const struct MbBlueprint *bp,
                                    size_t stride);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAXBISECT_H */
