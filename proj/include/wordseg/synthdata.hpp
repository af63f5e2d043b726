#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace wordseg::synth {

// Deterministic generator of bakeoff-style segmented corpora: a Zipfian word
// inventory over a closed character set, characters carrying positional roles
// (single / begin / middle / end) so that segmentations are learnable, and
// exact sentence/word/character totals. Used for offline tests and demos in
// place of the (non-redistributable) Bakeoff-2005 data; see README.
struct CorpusSpec {
  std::uint64_t sentences = 0;
  std::uint64_t words = 0;
  std::uint64_t chars = 0;
  std::uint64_t seed = 0;    // fixes the word/character inventory
  std::uint64_t stream = 0;  // distinguishes train/test drawn from one inventory
  int char_inventory = 3000;
  int word_types = 45000;
};

// Profiles matching the published PKU/MSR corpus statistics. Train and test
// halves of one corpus share the word inventory (same seed base).
CorpusSpec pku_train();
CorpusSpec pku_test();
CorpusSpec msr_train();
CorpusSpec msr_test();
// Small corpus for unit tests: 120 sentences, 1500 words, 2400 characters.
CorpusSpec tiny(std::uint64_t seed = 7);

void write_corpus(const CorpusSpec& spec, std::ostream& out);
void write_corpus_file(const CorpusSpec& spec, const std::string& path);
std::string corpus_text(const CorpusSpec& spec);

}  // namespace wordseg::synth
