#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wordseg/segmentation.hpp"
#include "wordseg/tensor.hpp"

namespace wordseg {

// One sentence: the unsegmented character sequence plus, when supervised, the
// gold cut positions. A cut value j means a word boundary after the j-th
// character (1-based), so cuts lie in [1, n-1].
struct Sentence {
  std::string text;                    // concatenated characters, UTF-8, no spaces
  std::vector<std::int32_t> offsets;   // n+1 byte offsets into text
  std::vector<std::int32_t> cuts;      // strictly increasing; empty for a 1-word sentence
  bool has_gold = false;

  int size() const { return offsets.empty() ? 0 : static_cast<int>(offsets.size()) - 1; }
  std::string_view char_at(int i) const {
    return std::string_view(text).substr(offsets[i], offsets[i + 1] - offsets[i]);
  }
  // Characters [start, end) as one UTF-8 string.
  std::string_view span_str(int start, int end) const {
    return std::string_view(text).substr(offsets[start], offsets[end] - offsets[start]);
  }
  Segmentation gold_segmentation() const;
  // "words joined by single spaces" rendering of the gold segmentation
  std::string render_gold() const;
};

Sentence make_sentence(std::string_view raw_chars, std::string_view where = {});
Sentence make_sentence(std::string_view raw_chars, const Segmentation& gold);

struct Corpus {
  std::vector<Sentence> sentences;
  std::unordered_map<std::string, std::uint64_t> word_freq;
  std::string source;
  std::uint64_t n_words = 0;
  std::uint64_t n_chars = 0;

  std::size_t size() const { return sentences.size(); }
};

// Optional input normalization: ASCII digits collapse to '0' and ASCII
// letters to 'x', one class symbol each. Off by default.
std::string normalize_ascii_classes(std::string_view text);

// SIGHAN format: UTF-8, one sentence per line, words separated by whitespace
// runs. Empty lines are skipped. With normalize_ascii the stored characters
// are class-normalized.
Corpus load_segmented_corpus(const std::string& path, bool normalize_ascii = false);
Corpus parse_segmented_text(std::string_view body, std::string_view source_name,
                            bool normalize_ascii = false);

// Unsegmented input for decoding: one sentence per line, any whitespace is
// discarded. Sentences carry no gold cuts and keep their original characters
// (normalization for decoding happens at encode time).
std::vector<Sentence> load_raw_lines(const std::string& path);

// Character vocabulary. Id 0 is the UNK character; real characters get dense
// ids from 1 in first-occurrence order. Padding has no embedding row and is
// exposed only as the sentinel kPadId.
class CharVocab {
 public:
  static constexpr int kUnkId = 0;
  static constexpr int kPadId = -1;

  CharVocab();

  int size() const { return static_cast<int>(chars_.size()); }
  int id_of(std::string_view c) const;
  const std::string& char_at(int id) const { return chars_[id]; }
  std::uint64_t freq(int id) const { return freq_[id]; }
  // Flagged for stochastic UNK replacement during training.
  bool rare(int id) const { return rare_[id] != 0; }
  std::uint64_t unk_threshold() const { return unk_threshold_; }

  // With normalize_ascii, characters pass through the class normalization
  // before lookup (used when decoding raw text for a normalized model).
  std::vector<int> encode(const Sentence& s, bool normalize_ascii = false) const;

  // Serialization support: rebuild from stored listings.
  static CharVocab from_entries(const std::vector<std::string>& chars,
                                const std::vector<std::uint64_t>& freqs,
                                std::uint64_t unk_threshold);

 private:
  friend CharVocab build_char_vocab(const Corpus&, std::uint64_t);
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> chars_;
  std::vector<std::uint64_t> freq_;
  std::vector<std::uint8_t> rare_;
  std::uint64_t unk_threshold_ = 0;
};

// Characters with frequency <= unk_threshold are flagged rare. Throws
// ContractError on an empty corpus.
CharVocab build_char_vocab(const Corpus& corpus, std::uint64_t unk_threshold);

// The most frequent training words. Sorted by (frequency desc, word asc);
// the first ceil(fraction * distinct_word_count) are kept.
class ShortList {
 public:
  ShortList() = default;

  int size() const { return static_cast<int>(words_.size()); }
  double fraction() const { return fraction_; }
  // -1 when the word is not listed.
  int id_of(std::string_view w) const;
  const std::string& word(int id) const { return words_[id]; }
  const std::vector<std::string>& words() const { return words_; }

  static ShortList from_words(std::vector<std::string> words, double fraction);

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> words_;
  double fraction_ = 0.0;
};

ShortList build_short_list(const Corpus& corpus, double fraction);

// Dev split: the last ceil(fraction * N) sentences in file order become dev.
std::pair<Corpus, Corpus> split_dev(const Corpus& corpus, double fraction = 0.1);

// ----- pre-trained character embeddings (word2vec text format) -----

struct PretrainedChars {
  Tensor rows;                     // |vocab| x d_c; only `present` rows are meaningful
  std::vector<std::uint8_t> present;
  double coverage = 0.0;           // matched vocab characters / vocab characters (UNK excluded)
  int matched = 0;
};

// Header line "V d", then one "token v1 .. vd" per line. Tokens that are a
// single vocabulary character overwrite that character's row.
PretrainedChars load_pretrained_embeddings(const std::string& path, const CharVocab& vocab, int d_c);

}  // namespace wordseg
