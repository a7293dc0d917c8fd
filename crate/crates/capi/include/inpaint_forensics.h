#ifndef INPAINT_FORENSICS_H
#define INPAINT_FORENSICS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum IpfStatus {
  IPF_STATUS_OK = 0,
  IPF_STATUS_NULL_ARGUMENT = 1,
  IPF_STATUS_INVALID_ARGUMENT = 2,
  IPF_STATUS_DECODE_ERROR = 3,
  IPF_STATUS_IO_ERROR = 4,
  IPF_STATUS_INTERNAL_ERROR = 5,
} IpfStatus;

/**
 * Opaque per-pixel forgery probability map.
 */
typedef struct IpfCandidate IpfCandidate;

/**
 * Opaque decoded image.
 */
typedef struct IpfImage IpfImage;

/**
 * Opaque binary forgery mask.
 */
typedef struct IpfMask IpfMask;

/**
 * Pixel-level metric bundle; NaN marks an undefined (0/0) metric.
 */
typedef struct IpfMetrics {
  uint64_t true_positives;
  uint64_t false_positives;
  uint64_t false_negatives;
  uint64_t true_negatives;
  double iou;
  double f1;
  double precision;
  double recall;
  double accuracy;
  double balanced_accuracy;
} IpfMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Last error message for this thread; valid until the next failing call.
 */
const char *ipf_last_error(void);

/**
 * Library version as a static string.
 */
const char *ipf_version(void);

/**
 * Decode a PNG or NetPBM buffer into an image handle.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` must be a valid
 * pointer to receive the handle.
 */
enum IpfStatus ipf_image_decode(const uint8_t *bytes, uintptr_t len, struct IpfImage **out);

/**
 * # Safety
 * `img` must be a live handle from this library or null.
 */
void ipf_image_free(struct IpfImage *img);

/**
 * # Safety
 * `img` must be a live image handle.
 */
uint32_t ipf_image_width(const struct IpfImage *img);

/**
 * # Safety
 * `img` must be a live image handle.
 */
uint32_t ipf_image_height(const struct IpfImage *img);

/**
 * # Safety
 * `img` must be a live image handle.
 */
uint32_t ipf_image_channels(const struct IpfImage *img);

/**
 * Decode a gray PNG/PGM buffer into a candidate probability map; its
 * dimensions must match the image exactly.
 *
 * # Safety
 * Pointer arguments as in [`ipf_image_decode`].
 */
enum IpfStatus ipf_candidate_decode(const uint8_t *bytes,
                                    uintptr_t len,
                                    const struct IpfImage *img,
                                    struct IpfCandidate **out);

/**
 * Score a candidate with the built-in scattering baseline.
 *
 * # Safety
 * `img` must be a live image handle; `out` must be valid.
 */
enum IpfStatus ipf_candidate_baseline(const struct IpfImage *img, struct IpfCandidate **out);

/**
 * # Safety
 * `cand` must be a live handle from this library or null.
 */
void ipf_candidate_free(struct IpfCandidate *cand);

/**
 * Run the detection pipeline with default parameters and return the
 * refined binary mask.
 *
 * # Safety
 * `img` and `cand` must be live handles; `out` must be valid.
 */
enum IpfStatus ipf_detect(const struct IpfImage *img,
                          const struct IpfCandidate *cand,
                          struct IpfMask **out);

/**
 * Threshold a candidate into a binary mask (strict greater-than).
 *
 * # Safety
 * `cand` must be a live handle; `out` must be valid.
 */
enum IpfStatus ipf_candidate_threshold(const struct IpfCandidate *cand,
                                       double threshold,
                                       struct IpfMask **out);

/**
 * # Safety
 * `mask` must be a live handle from this library or null.
 */
void ipf_mask_free(struct IpfMask *mask);

/**
 * # Safety
 * `mask` must be a live mask handle.
 */
uint32_t ipf_mask_width(const struct IpfMask *mask);

/**
 * # Safety
 * `mask` must be a live mask handle.
 */
uint32_t ipf_mask_height(const struct IpfMask *mask);

/**
 * Copy mask bits into a caller buffer of width*height bytes (1 = forged).
 *
 * # Safety
 * `buf` must point to at least `buf_len` writable bytes.
 */
enum IpfStatus ipf_mask_copy_bits(const struct IpfMask *mask, uint8_t *buf, uintptr_t buf_len);

/**
 * Serialize a mask as an 8-bit PGM into a freshly allocated buffer; free
 * it with [`ipf_buffer_free`].
 *
 * # Safety
 * `out` and `out_len` must be valid pointers.
 */
enum IpfStatus ipf_mask_to_pgm(const struct IpfMask *mask, uint8_t **out, uintptr_t *out_len);

/**
 * # Safety
 * `buf`/`len` must come from [`ipf_mask_to_pgm`].
 */
void ipf_buffer_free(uint8_t *buf, uintptr_t len);

/**
 * Pixel-level metrics of a predicted mask against a truth mask. Undefined
 * (0/0) metrics come back as NaN.
 *
 * # Safety
 * `pred` and `truth` must be live mask handles; `out` must be valid.
 */
enum IpfStatus ipf_metrics(const struct IpfMask *pred,
                           const struct IpfMask *truth,
                           struct IpfMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INPAINT_FORENSICS_H */
