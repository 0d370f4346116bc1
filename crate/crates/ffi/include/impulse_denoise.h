#ifndef IMPULSE_DENOISE_H
#define IMPULSE_DENOISE_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum IdStatus {
  ID_STATUS_OK = 0,
  ID_STATUS_NULL_POINTER = 1,
  ID_STATUS_INVALID_ARGUMENT = 2,
  ID_STATUS_SHAPE_MISMATCH = 3,
  ID_STATUS_IO = 4,
  ID_STATUS_DECODE = 5,
  ID_STATUS_ENCODE = 6,
  ID_STATUS_PANIC = 7,
} IdStatus;

typedef enum IdFamily {
  ID_FAMILY_CI = 0,
  ID_FAMILY_CT = 1,
} IdFamily;

typedef enum IdDetectorKind {
  ID_DETECTOR_KIND_DM1 = 1,
  ID_DETECTOR_KIND_DM2 = 2,
  ID_DETECTOR_KIND_DM3 = 3,
  ID_DETECTOR_KIND_DM4 = 4,
  ID_DETECTOR_KIND_DM5 = 5,
} IdDetectorKind;

typedef enum IdWeighting {
  ID_WEIGHTING_UNIFORM = 0,
  ID_WEIGHTING_RECIPROCAL = 1,
  ID_WEIGHTING_RECIPROCAL_SQUARED = 2,
} IdWeighting;

typedef enum IdSet2 {
  ID_SET2_COMPLEMENT = 0,
  ID_SET2_SHIFT = 1,
} IdSet2;

typedef enum IdReplacement {
  ID_REPLACEMENT_VMF = 0,
  ID_REPLACEMENT_AMF = 1,
} IdReplacement;

/*
 A validated detector configuration.
 */
typedef struct IdDetector IdDetector;

/*
 An RGB image.
 */
typedef struct IdImage IdImage;

/*
 A binary mask, one bit per pixel.
 */
typedef struct IdMask IdMask;

/*
 One `(d, k)` step of the iterative peer group detector.
 */
typedef struct IdPeerStep {
  double d;
  uint8_t k;
} IdPeerStep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread; empty if none. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *id_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *id_version(void);

/*
 Creates an image from `width * height * 3` interleaved RGB bytes.

 # Safety
 `data` must point to `len` readable bytes; `out` must be writable.
 */
enum IdStatus id_image_from_rgb(size_t width,
                                size_t height,
                                const uint8_t *data,
                                size_t len,
                                struct IdImage **out);

/*
 Reads a PNG or PPM file.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum IdStatus id_image_read(const char *path, struct IdImage **out);

/*
 Writes a `.png` or `.ppm` file, chosen by extension.

 # Safety
 `img` must be a live handle and `path` a NUL-terminated string.
 */
enum IdStatus id_image_write(const struct IdImage *img, const char *path);

/*
 # Safety
 `img` must be null or a live handle.
 */
size_t id_image_width(const struct IdImage *img);

/*
 # Safety
 `img` must be null or a live handle.
 */
size_t id_image_height(const struct IdImage *img);

/*
 Copies the interleaved RGB bytes into `buf`, which must hold exactly
 `width * height * 3` bytes.

 # Safety
 `img` must be a live handle and `buf` must point to `len` writable bytes.
 */
enum IdStatus id_image_copy_rgb(const struct IdImage *img, uint8_t *buf, size_t len);

/*
 # Safety
 `img` must be null or a handle not yet freed.
 */
void id_image_free(struct IdImage *img);

/*
 # Safety
 `mask` must be null or a live handle.
 */
size_t id_mask_width(const struct IdMask *mask);

/*
 # Safety
 `mask` must be null or a live handle.
 */
size_t id_mask_height(const struct IdMask *mask);

/*
 Number of set pixels.

 # Safety
 `mask` must be null or a live handle.
 */
size_t id_mask_count(const struct IdMask *mask);

/*
 Copies the mask row-major into `buf`, one byte per pixel (1 = set).

 # Safety
 `mask` must be a live handle and `buf` must point to `len` writable bytes.
 */
enum IdStatus id_mask_copy(const struct IdMask *mask, uint8_t *buf, size_t len);

/*
 Writes a `.png` or `.pbm` mask file.

 # Safety
 `mask` must be a live handle and `path` a NUL-terminated string.
 */
enum IdStatus id_mask_write(const struct IdMask *mask, const char *path);

/*
 # Safety
 `mask` must be null or a handle not yet freed.
 */
void id_mask_free(struct IdMask *mask);

/*
 Corrupts `img` with impulse noise. `variant` is 1 (extremes), 2 (uniform)
 or 3 (tails). `out_mask` may be null when the ground truth is not needed.

 # Safety
 `img` must be a live handle; `out_noisy` (and `out_mask` if non-null) must be writable.
 */
enum IdStatus id_corrupt(const struct IdImage *img,
                         enum IdFamily family,
                         uint8_t variant,
                         double p,
                         uint64_t seed,
                         struct IdImage **out_noisy,
                         struct IdMask **out_mask);

/*
 Detector with its built-in default parameters.

 # Safety
 `out` must be writable.
 */
enum IdStatus id_detector_default(enum IdDetectorKind kind, struct IdDetector **out);

/*
 Rank-weighted threshold detector: `dm1` when `minimum_only` is false
 (center score minus window minimum), `dm2` otherwise (window minimum).

 # Safety
 `out` must be writable.
 */
enum IdStatus id_detector_rank(double alpha,
                               enum IdWeighting w,
                               bool minimum_only,
                               struct IdDetector **out);

/*
 Peer group detector (`dm3`).

 # Safety
 `out` must be writable.
 */
enum IdStatus id_detector_peer(double d, uint8_t k, struct IdDetector **out);

/*
 Iterative peer group detector (`dm4`) over `len` steps.

 # Safety
 `steps` must point to `len` readable elements; `out` must be writable.
 */
enum IdStatus id_detector_peer_schedule(const struct IdPeerStep *steps,
                                        size_t len,
                                        struct IdDetector **out);

/*
 Morphological detector (`dm5`) with a 3x3 square structuring element.

 # Safety
 `out` must be writable.
 */
enum IdStatus id_detector_morph(uint8_t pset,
                                uint8_t mset,
                                uint8_t level,
                                enum IdSet2 set2,
                                struct IdDetector **out);

/*
 # Safety
 `det` must be null or a handle not yet freed.
 */
void id_detector_free(struct IdDetector *det);

/*
 Runs a detector.

 # Safety
 `img` and `det` must be live handles; `out` must be writable.
 */
enum IdStatus id_detect(const struct IdImage *img,
                        const struct IdDetector *det,
                        struct IdMask **out);

/*
 Switching filter: detect, then replace flagged pixels, `passes` times.
 `out_mask` (union of all detections) may be null.

 # Safety
 `img` and `det` must be live handles; `out_img` (and `out_mask` if non-null) must be writable.
 */
enum IdStatus id_denoise(const struct IdImage *img,
                         const struct IdDetector *det,
                         enum IdReplacement replacement,
                         uint32_t passes,
                         struct IdImage **out_img,
                         struct IdMask **out_mask);

/*
 Mean squared error over all channels and PSNR in dB (+inf when equal).

 # Safety
 `a` and `b` must be live handles; `mse` and `psnr` must be writable.
 */
enum IdStatus id_mse_psnr(const struct IdImage *a,
                          const struct IdImage *b,
                          double *mse,
                          double *psnr);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMPULSE_DENOISE_H */
