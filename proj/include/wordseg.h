/* wordseg — trainable greedy neural word segmenter, C API.
 *
 * All functions return WS_OK on success; on failure they return an error
 * code and leave a human-readable message retrievable with ws_last_error()
 * (thread-local). Objects returned through out-parameters are owned by the
 * caller and released with the matching *_free function.
 */
#ifndef WORDSEG_H
#define WORDSEG_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ws_status {
  WS_OK = 0,
  WS_ERR_INVALID_ARG = 1,
  WS_ERR_IO = 2,
  WS_ERR_ENCODING = 3,
  WS_ERR_PARSE = 4,
  WS_ERR_DIMENSION = 5,
  WS_ERR_CONTRACT = 6,
  WS_ERR_FORMAT = 7,
  WS_ERR_VERSION = 8,
  WS_ERR_INTEGRITY = 9,
  WS_ERR_INTERNAL = 10
} ws_status;

const char* ws_status_name(ws_status s);
/* Message from the most recent failing call on this thread ("" if none). */
const char* ws_last_error(void);

/* ---- corpora ---- */

typedef struct ws_corpus ws_corpus;

/* SIGHAN format: UTF-8, one sentence per line, words separated by spaces. */
ws_status ws_corpus_load(const char* path, ws_corpus** out);
void ws_corpus_free(ws_corpus* c);
ws_status ws_corpus_stats(const ws_corpus* c, uint64_t* sentences, uint64_t* words,
                          uint64_t* characters);

/* ---- models ---- */

typedef struct ws_model ws_model;

typedef struct ws_train_config {
  int32_t char_dim;         /* d_c */
  int32_t word_dim;         /* d_w */
  int32_t hidden;           /* LSTM hidden units */
  int32_t max_word_len;
  double margin_discount;   /* mu */
  int32_t beam_size;        /* shared between training and decoding */
  double learning_rate;     /* eta_0; eta_t = eta_0 / (1 + gamma t) */
  double gamma;
  int32_t max_epochs;
  int32_t patience;
  const char* strategy;     /* "standard" | "early" | "laso" */
  double shortlist_fraction;
  double dev_fraction;      /* last fraction of training sentences held out */
  uint64_t seed;
  uint64_t unk_threshold;
  double unk_replace_prob;
  double grad_clip_norm;
  int32_t normalize_ascii; /* collapse ASCII digits/letters to class symbols */
} ws_train_config;

/* Fills cfg with the published defaults (d_c=d_w=H=50, L=4, mu=0.2, k=1,
 * lr=0.2, gamma=0.1, early update, shortlist 0.5, dev 0.1, epochs 50). */
void ws_train_config_init(ws_train_config* cfg);

/* Trains on a segmented corpus file. pretrained_path (optional, may be NULL)
 * points at word2vec-text character vectors; report_path (optional) receives
 * one JSON record per epoch. */
ws_status ws_train(const ws_train_config* cfg, const char* train_path,
                   const char* pretrained_path, const char* report_path, ws_model** out);

ws_status ws_model_load(const char* path, ws_model** out);
ws_status ws_model_save(const ws_model* m, const char* path);
void ws_model_free(ws_model* m);

/* Metadata summary as a JSON string; free with ws_string_free. */
ws_status ws_model_info_json(const ws_model* m, char** out_json);

/* ---- decoding ---- */

/* Segments one unsegmented UTF-8 line; *out is the line with words joined by
 * single spaces (free with ws_string_free). Whitespace in the input is
 * discarded; unknown characters are decoded through the UNK embedding. */
ws_status ws_segment_line(const ws_model* m, const char* utf8_line, int32_t beam_size,
                          char** out);

void ws_string_free(char* s);

/* ---- evaluation ---- */

typedef struct ws_metrics {
  double precision;
  double recall;
  double f1;
  double oov_recall;
  uint64_t gold_words;
  uint64_t pred_words;
  uint64_t correct_words;
  uint64_t oov_gold_words;
  uint64_t oov_correct_words;
  uint64_t sentences;
  uint64_t characters;
  double seconds; /* decode + scoring wall time */
} ws_metrics;

/* Decodes a gold (SIGHAN format) file at the given beam size and scores it.
 * train_vocab_path (optional) is a segmented corpus defining the in-vocabulary
 * word set for OOV recall; without it OOV recall stays at its empty-
 * denominator convention of 1.0. oracle != 0 bypasses decoding and predicts
 * the gold itself. */
ws_status ws_evaluate(const ws_model* m, const char* gold_path, int32_t beam_size,
                      const char* train_vocab_path, int32_t oracle, ws_metrics* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* WORDSEG_H */
