#ifndef PUNCTEXT_H
#define PUNCTEXT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PtxStatus {
  PTX_STATUS_OK = 0,
  PTX_STATUS_NULL_POINTER = 1,
  PTX_STATUS_INVALID_UTF8 = 2,
  PTX_STATUS_INVALID_ARGUMENT = 3,
  PTX_STATUS_UNSUPPORTED_TEXT = 4,
  PTX_STATUS_BUFFER_TOO_SMALL = 5,
  PTX_STATUS_BROKEN_FRAME = 6,
  PTX_STATUS_IO = 7,
  PTX_STATUS_PANIC = 8,
} PtxStatus;

/**
 * Opaque engine: dictionary index, filter bank and link.
 */
typedef struct PtxEngine PtxEngine;

/**
 * Outcome of one transmitted sentence.
 */
typedef struct PtxTrial {
  /**
   * 0 ok, 1 frame lost, 2 failed.
   */
  uint32_t status;
  double bleu;
  double char_accuracy;
  double word_accuracy;
  uintptr_t omitted;
  uintptr_t symbols;
} PtxTrial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ptx_version(void);

/**
 * Copy of the last error message on this thread, or NULL if there is none.
 * Release with [`ptx_string_free`].
 */
char *ptx_last_error_message(void);

/**
 * # Safety
 * `s` is NULL or a string returned by this library and not yet freed.
 */
void ptx_string_free(char *s);

/**
 * Creates an engine. `dictionary_path` may be NULL for the bundled word
 * list. `keep_ratio` lies in (0, 1]; `filters` and `window_len` are at least 1.
 *
 * # Safety
 * `dictionary_path` is NULL or a NUL-terminated string; `out` is writable.
 */
enum PtxStatus ptx_engine_new(const char *dictionary_path,
                              uintptr_t window_len,
                              uintptr_t filters,
                              double keep_ratio,
                              uint64_t seed,
                              struct PtxEngine **out);

/**
 * # Safety
 * `engine` is NULL or was returned by [`ptx_engine_new`] and not yet freed.
 */
void ptx_engine_free(struct PtxEngine *engine);

/**
 * Writes the importance score of each letter of `word` into `scores`
 * (capacity `cap`) and its length into `len`. With a short buffer the call
 * fails with `BufferTooSmall` after setting `len`.
 *
 * # Safety
 * Pointers are valid; `scores` has room for `cap` doubles.
 */
enum PtxStatus ptx_score_word(const struct PtxEngine *engine,
                              const char *word,
                              double *scores,
                              uintptr_t cap,
                              uintptr_t *len);

/**
 * Punctures `text`. `random_seed < 0` selects filters by score, otherwise
 * uniformly with that seed. The kept characters go to `payload` (free with
 * [`ptx_string_free`]), one filter index per window to `indices`.
 *
 * # Safety
 * Pointers are valid; `indices` has room for `cap` entries.
 */
enum PtxStatus ptx_puncture(const struct PtxEngine *engine,
                            const char *text,
                            int64_t random_seed,
                            char **payload,
                            uint32_t *indices,
                            uintptr_t cap,
                            uintptr_t *count,
                            bool *tail_unpunctured);

/**
 * Re-inserts `*` at the dropped positions; the result goes to `out`.
 *
 * # Safety
 * Pointers are valid; `indices` holds `count` entries.
 */
enum PtxStatus ptx_indicate(const struct PtxEngine *engine,
                            const char *payload,
                            const uint32_t *indices,
                            uintptr_t count,
                            bool tail_unpunctured,
                            char **out);

/**
 * Fills every `*` of `indicated` with the dictionary backend.
 *
 * # Safety
 * Pointers are valid.
 */
enum PtxStatus ptx_recover(const struct PtxEngine *engine, const char *indicated, char **out);

/**
 * Sends `text` through the whole chain. `snr_db` may be infinite for a
 * noiseless channel; `symbols_per_char <= 0` pads to whole codewords.
 * `recovered` may be NULL; otherwise it receives the recovered text.
 *
 * # Safety
 * Pointers are valid.
 */
enum PtxStatus ptx_transmit(const struct PtxEngine *engine,
                            const char *text,
                            double snr_db,
                            double symbols_per_char,
                            uint64_t noise_seed,
                            struct PtxTrial *trial,
                            char **recovered);

/**
 * Sentence BLEU of `candidate` against `reference`.
 *
 * # Safety
 * Pointers are valid.
 */
enum PtxStatus ptx_bleu(const char *reference, const char *candidate, uintptr_t max_n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PUNCTEXT_H */
