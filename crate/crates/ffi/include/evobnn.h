#ifndef EVOBNN_H
#define EVOBNN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum BnnStatus {
  BNN_STATUS_OK = 0,
  BNN_STATUS_NULL_POINTER = 1,
  BNN_STATUS_INVALID_ARGUMENT = 2,
  BNN_STATUS_DIMENSION_MISMATCH = 3,
  BNN_STATUS_BAD_FORMAT = 4,
  BNN_STATUS_BUFFER_TOO_SMALL = 5,
  BNN_STATUS_PANIC = 6,
} BnnStatus;

/**
 * Opaque network handle.
 */
typedef struct BnnNetwork BnnNetwork;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a random network with widths `sizes[0..n_sizes]`, input first.
 *
 * # Safety
 * `sizes` must point to `n_sizes` readable values and `out` must be writable.
 */
enum BnnStatus bnn_network_random(uint64_t seed,
                                  const size_t *sizes,
                                  size_t n_sizes,
                                  struct BnnNetwork **out);

/**
 * Parses a serialized network.
 *
 * # Safety
 * `bytes` must point to `len` readable bytes and `out` must be writable.
 */
enum BnnStatus bnn_network_load(const uint8_t *bytes, size_t len, struct BnnNetwork **out);

/**
 * Serializes `net` into `buf`. `*written` receives the encoded length, also
 * when the buffer is too small, so callers can query the size with `cap == 0`.
 *
 * # Safety
 * `net` must be a live handle, `buf` writable for `cap` bytes, `written`
 * writable.
 */
enum BnnStatus bnn_network_save(const struct BnnNetwork *net,
                                uint8_t *buf,
                                size_t cap,
                                size_t *written);

/**
 * Number of weight layers, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t bnn_network_depth(const struct BnnNetwork *net);

/**
 * Input width, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t bnn_network_input_dim(const struct BnnNetwork *net);

/**
 * Output width, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t bnn_network_output_dim(const struct BnnNetwork *net);

/**
 * Runs the network on one packed input of `input_dim` bits and writes the
 * packed output. Padding bits of the input are ignored; those of the output
 * are zero.
 *
 * # Safety
 * `input` must hold `n_words` words and `output` have room for `out_cap`.
 */
enum BnnStatus bnn_network_forward(const struct BnnNetwork *net,
                                   const uint64_t *input,
                                   size_t n_words,
                                   uint64_t *output,
                                   size_t out_cap);

/**
 * Predicted class of one packed input, with the output split into `classes`
 * equal groups; the group with the most set bits wins, lowest index on ties.
 *
 * # Safety
 * `input` must hold `n_words` words and `class_out` be writable.
 */
enum BnnStatus bnn_network_predict(const struct BnnNetwork *net,
                                   const uint64_t *input,
                                   size_t n_words,
                                   size_t classes,
                                   size_t *class_out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `net` must be null or a handle not yet freed.
 */
void bnn_network_free(struct BnnNetwork *net);

/**
 * Static, NUL-terminated description of a status code.
 */
const char *bnn_status_message(enum BnnStatus status);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVOBNN_H */
