#include "wordseg.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "wordseg/errors.hpp"
#include "wordseg/metrics.hpp"
#include "wordseg/model_io.hpp"
#include "wordseg/pipeline.hpp"
#include "wordseg/scorer.hpp"
#include "wordseg/search.hpp"

using namespace wordseg;

struct ws_corpus {
  Corpus corpus;
};

struct ws_model {
  ModelBundle bundle;
};

namespace {

thread_local std::string g_last_error;

ws_status fail(ws_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <class Fn>
ws_status guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return WS_OK;
  } catch (const VersionError& e) {
    return fail(WS_ERR_VERSION, e.what());
  } catch (const FormatError& e) {
    return fail(WS_ERR_FORMAT, e.what());
  } catch (const IntegrityError& e) {
    return fail(WS_ERR_INTEGRITY, e.what());
  } catch (const DimensionError& e) {
    return fail(WS_ERR_DIMENSION, e.what());
  } catch (const EncodingError& e) {
    return fail(WS_ERR_ENCODING, e.what());
  } catch (const ParseError& e) {
    return fail(WS_ERR_PARSE, e.what());
  } catch (const ContractError& e) {
    return fail(WS_ERR_CONTRACT, e.what());
  } catch (const IoError& e) {
    return fail(WS_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(WS_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

TrainConfig to_config(const ws_train_config& c) {
  TrainConfig cfg;
  cfg.dims.d_c = c.char_dim;
  cfg.dims.d_w = c.word_dim;
  cfg.dims.hidden = c.hidden;
  cfg.dims.max_word_len = c.max_word_len;
  cfg.mu = c.margin_discount;
  cfg.beam_size = c.beam_size;
  cfg.lr0 = c.learning_rate;
  cfg.gamma = c.gamma;
  cfg.max_epochs = c.max_epochs;
  cfg.patience = c.patience;
  cfg.strategy = strategy_from_name(c.strategy ? c.strategy : "early");
  cfg.shortlist_fraction = c.shortlist_fraction;
  cfg.dev_fraction = c.dev_fraction;
  cfg.seed = c.seed;
  cfg.unk_threshold = c.unk_threshold;
  cfg.unk_replace_prob = c.unk_replace_prob;
  cfg.grad_clip_norm = c.grad_clip_norm;
  cfg.normalize_ascii = c.normalize_ascii != 0;
  return cfg;
}

}  // namespace

extern "C" {

const char* ws_status_name(ws_status s) {
  switch (s) {
    case WS_OK: return "ok";
    case WS_ERR_INVALID_ARG: return "invalid_argument";
    case WS_ERR_IO: return "io_error";
    case WS_ERR_ENCODING: return "encoding_error";
    case WS_ERR_PARSE: return "parse_error";
    case WS_ERR_DIMENSION: return "dimension_error";
    case WS_ERR_CONTRACT: return "contract_error";
    case WS_ERR_FORMAT: return "format_error";
    case WS_ERR_VERSION: return "version_error";
    case WS_ERR_INTEGRITY: return "integrity_error";
    case WS_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* ws_last_error(void) { return g_last_error.c_str(); }

ws_status ws_corpus_load(const char* path, ws_corpus** out) {
  if (!path || !out) return fail(WS_ERR_INVALID_ARG, "null argument");
  *out = nullptr;
  return guard([&] {
    auto c = new ws_corpus{load_segmented_corpus(path)};
    *out = c;
  });
}

void ws_corpus_free(ws_corpus* c) { delete c; }

ws_status ws_corpus_stats(const ws_corpus* c, uint64_t* sentences, uint64_t* words,
                          uint64_t* characters) {
  if (!c) return fail(WS_ERR_INVALID_ARG, "null corpus");
  if (sentences) *sentences = c->corpus.sentences.size();
  if (words) *words = c->corpus.n_words;
  if (characters) *characters = c->corpus.n_chars;
  return WS_OK;
}

void ws_train_config_init(ws_train_config* cfg) {
  if (!cfg) return;
  cfg->char_dim = 50;
  cfg->word_dim = 50;
  cfg->hidden = 50;
  cfg->max_word_len = 4;
  cfg->margin_discount = 0.2;
  cfg->beam_size = 1;
  cfg->learning_rate = 0.2;
  cfg->gamma = 0.1;
  cfg->max_epochs = 50;
  cfg->patience = 5;
  cfg->strategy = "early";
  cfg->shortlist_fraction = 0.5;
  cfg->dev_fraction = 0.1;
  cfg->seed = 1;
  cfg->unk_threshold = 1;
  cfg->unk_replace_prob = 0.5;
  cfg->grad_clip_norm = 5.0;
  cfg->normalize_ascii = 0;
}

ws_status ws_train(const ws_train_config* cfg, const char* train_path,
                   const char* pretrained_path, const char* report_path, ws_model** out) {
  if (!cfg || !train_path || !out) return fail(WS_ERR_INVALID_ARG, "null argument");
  *out = nullptr;
  return guard([&] {
    PipelineResult result =
        train_pipeline(to_config(*cfg), train_path, pretrained_path ? pretrained_path : "",
                       report_path ? report_path : "");
    *out = new ws_model{std::move(result.bundle)};
  });
}

ws_status ws_model_load(const char* path, ws_model** out) {
  if (!path || !out) return fail(WS_ERR_INVALID_ARG, "null argument");
  *out = nullptr;
  return guard([&] { *out = new ws_model{load_model(path)}; });
}

ws_status ws_model_save(const ws_model* m, const char* path) {
  if (!m || !path) return fail(WS_ERR_INVALID_ARG, "null argument");
  return guard([&] { save_model(m->bundle, path); });
}

void ws_model_free(ws_model* m) { delete m; }

ws_status ws_model_info_json(const ws_model* m, char** out_json) {
  if (!m || !out_json) return fail(WS_ERR_INVALID_ARG, "null argument");
  *out_json = nullptr;
  return guard([&] {
    const std::string text = model_info(m->bundle).dump();
    *out_json = dup_string(text);
    if (!*out_json) throw std::bad_alloc();
  });
}

ws_status ws_segment_line(const ws_model* m, const char* utf8_line, int32_t beam_size,
                          char** out) {
  if (!m || !utf8_line || !out) return fail(WS_ERR_INVALID_ARG, "null argument");
  *out = nullptr;
  return guard([&] {
    std::string kept;
    for (const char* p = utf8_line; *p; ++p) {
      if (*p != ' ' && *p != '\t' && *p != '\r' && *p != '\n' && *p != '\v' && *p != '\f') {
        kept += *p;
      }
    }
    if (kept.empty()) {
      *out = dup_string("");
      if (!*out) throw std::bad_alloc();
      return;
    }
    const Sentence sent = make_sentence(kept, "input line");
    const ModelBundle& b = m->bundle;
    const std::vector<int> ids = b.vocab.encode(sent, b.normalize_ascii);
    const SpanShortlistIds table =
        SpanShortlistIds::build(sent, b.shortlist, b.params.dims.max_word_len);
    const DecodeResult dec = decode(b.params, ids, table, beam_size);

    std::string text;
    int pos = 0;
    for (std::size_t i = 0; i < dec.seg.size(); ++i) {
      if (i) text += ' ';
      text += sent.span_str(pos, pos + dec.seg[i]);
      pos += dec.seg[i];
    }
    *out = dup_string(text);
    if (!*out) throw std::bad_alloc();
  });
}

void ws_string_free(char* s) { std::free(s); }

ws_status ws_evaluate(const ws_model* m, const char* gold_path, int32_t beam_size,
                      const char* train_vocab_path, int32_t oracle, ws_metrics* out) {
  if (!m || !gold_path || !out) return fail(WS_ERR_INVALID_ARG, "null argument");
  return guard([&] {
    const Corpus gold = load_segmented_corpus(gold_path, m->bundle.normalize_ascii);
    std::unordered_set<std::string> train_words;
    bool have_words = false;
    if (train_vocab_path && *train_vocab_path) {
      const Corpus tc = load_segmented_corpus(train_vocab_path, m->bundle.normalize_ascii);
      for (const auto& [w, f] : tc.word_freq) train_words.insert(w);
      have_words = true;
    }
    const ModelBundle& b = m->bundle;
    const SegMetrics metrics =
        evaluate_corpus(b.params, b.vocab, b.shortlist, gold, beam_size,
                        have_words ? &train_words : nullptr, oracle != 0);
    out->precision = metrics.precision;
    out->recall = metrics.recall;
    out->f1 = metrics.f1;
    out->oov_recall = metrics.oov_recall;
    out->gold_words = metrics.gold_words;
    out->pred_words = metrics.pred_words;
    out->correct_words = metrics.correct_words;
    out->oov_gold_words = metrics.oov_gold_words;
    out->oov_correct_words = metrics.oov_correct_words;
    out->sentences = metrics.sentences;
    out->characters = metrics.characters;
    out->seconds = metrics.seconds;
  });
}

}  // extern "C"
