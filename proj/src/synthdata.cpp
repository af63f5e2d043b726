#include "wordseg/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wordseg/errors.hpp"
#include "wordseg/rng.hpp"

namespace wordseg::synth {

namespace {

constexpr int kMaxWordLen = 6;

std::string encode_cp(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

// Zipf-like sampler over ranks 0..n-1.
class ZipfSampler {
 public:
  ZipfSampler(int n, double exponent, double shift) {
    cum_.reserve(n);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += 1.0 / std::pow(i + shift, exponent);
      cum_.push_back(acc);
    }
  }
  int sample(Rng& rng) const {
    const double u = rng.uniform() * cum_.back();
    return static_cast<int>(std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
  }

 private:
  std::vector<double> cum_;
};

// Characters play positional roles; words are role-shaped so the corpus has a
// recoverable segmentation. The begin/end classes overlap a little to keep
// some boundaries ambiguous.
struct Inventory {
  std::vector<std::string> chars;                    // index -> utf8
  std::vector<std::vector<std::string>> words;       // per length 1..kMaxWordLen (index l-1)
};

Inventory build_inventory(const CorpusSpec& spec) {
  Rng rng(spec.seed);
  Inventory inv;
  const int n = std::max(spec.char_inventory, 24);
  inv.chars.reserve(n);
  for (int i = 0; i < n; ++i) inv.chars.push_back(encode_cp(0x4E00 + i));

  const int n_single = std::max(2, static_cast<int>(n * 0.24));
  const int n_begin = std::max(2, static_cast<int>(n * 0.30));
  const int n_mid = std::max(2, static_cast<int>(n * 0.14));
  const int overlap = std::max(1, n / 33);

  struct Range {
    int lo, hi;
  };
  const Range single{0, n_single};
  const Range begin{n_single, n_single + n_begin};
  const Range mid{n_single + n_begin, n_single + n_begin + n_mid};
  const Range end{n_single + n_begin + n_mid - overlap, n};

  auto sampler_for = [&](const Range& r) {
    return ZipfSampler(r.hi - r.lo, 1.05, 3.0);
  };
  const ZipfSampler s_begin = sampler_for(begin);
  const ZipfSampler s_mid = sampler_for(mid);
  const ZipfSampler s_end = sampler_for(end);

  inv.words.assign(kMaxWordLen, {});
  for (int i = single.lo; i < single.hi; ++i) inv.words[0].push_back(inv.chars[i]);

  const int rest = std::max(spec.word_types - static_cast<int>(inv.words[0].size()), 5);
  const int targets[kMaxWordLen] = {0,
                                    static_cast<int>(rest * 0.70),
                                    static_cast<int>(rest * 0.18),
                                    static_cast<int>(rest * 0.09),
                                    std::max(2, static_cast<int>(rest * 0.02)),
                                    std::max(1, static_cast<int>(rest * 0.01))};

  for (int len = 2; len <= kMaxWordLen; ++len) {
    std::set<std::string> seen;
    std::vector<std::string>& list = inv.words[len - 1];
    const long attempts_cap = 60L * targets[len - 1] + 1000;
    for (long a = 0; a < attempts_cap && static_cast<int>(list.size()) < targets[len - 1]; ++a) {
      std::string w = inv.chars[begin.lo + s_begin.sample(rng)];
      for (int k = 0; k < len - 2; ++k) w += inv.chars[mid.lo + s_mid.sample(rng)];
      w += inv.chars[end.lo + s_end.sample(rng)];
      if (seen.insert(w).second) list.push_back(w);
    }
    if (list.empty()) {
      std::string w = inv.chars[begin.lo];
      for (int k = 0; k < len - 2; ++k) w += inv.chars[mid.lo + k % (mid.hi - mid.lo)];
      w += inv.chars[end.lo];
      list.push_back(w);
    }
  }
  return inv;
}

}  // namespace

void write_corpus(const CorpusSpec& spec, std::ostream& out) {
  if (spec.sentences == 0) throw ContractError("synth: need at least one sentence");
  if (spec.words < spec.sentences) throw ContractError("synth: fewer words than sentences");
  if (spec.chars < spec.words || spec.chars > spec.words * kMaxWordLen) {
    throw ContractError("synth: character total outside [words, 6*words]");
  }

  const Inventory inv = build_inventory(spec);
  std::vector<ZipfSampler> pick;
  pick.reserve(kMaxWordLen);
  for (int len = 1; len <= kMaxWordLen; ++len) {
    pick.emplace_back(static_cast<int>(inv.words[len - 1].size()), 1.04, 2.5);
  }

  Rng rng(spec.seed * 2654435761ull + 97001ull * (spec.stream + 1));

  std::uint64_t s_left = spec.sentences;
  std::uint64_t w_left = spec.words;
  std::uint64_t c_left = spec.chars;
  std::string line;
  std::vector<int> lengths;

  while (s_left > 0) {
    std::uint64_t w;
    std::uint64_t c;
    if (s_left == 1) {
      w = w_left;
      c = c_left;
    } else {
      const double mean_w = static_cast<double>(w_left) / s_left;
      w = static_cast<std::uint64_t>(std::llround(mean_w * rng.uniform(0.6, 1.4)));
      w = std::clamp<std::uint64_t>(w, 1, w_left - (s_left - 1));
      // keep the remaining totals satisfiable: chars per word stay in [1, 6];
      // the invariants words <= chars <= 6*words make this window non-empty
      const std::uint64_t rest_words = w_left - w;
      const std::uint64_t lo =
          c_left > 6 * rest_words ? std::max<std::uint64_t>(w, c_left - 6 * rest_words) : w;
      const std::uint64_t hi = std::min<std::uint64_t>(6 * w, c_left - rest_words);
      const double ratio = static_cast<double>(c_left) / w_left;
      c = static_cast<std::uint64_t>(std::llround(w * ratio + rng.uniform(-2.0, 2.0)));
      c = std::clamp(c, lo, hi);
    }

    lengths.assign(w, 1);
    std::uint64_t extras = c - w;
    while (extras > 0) {
      const std::size_t j = rng.below(lengths.size());
      if (lengths[j] < kMaxWordLen) {
        ++lengths[j];
        --extras;
      } else {
        // crowded sentence: find any extendable slot
        bool placed = false;
        for (std::size_t k = 0; k < lengths.size(); ++k) {
          if (lengths[k] < kMaxWordLen) {
            ++lengths[k];
            --extras;
            placed = true;
            break;
          }
        }
        if (!placed) throw ContractError("synth: cannot place extra characters");
      }
    }

    line.clear();
    for (std::size_t i = 0; i < lengths.size(); ++i) {
      if (i) line += ' ';
      const auto& list = inv.words[lengths[i] - 1];
      line += list[pick[lengths[i] - 1].sample(rng)];
    }
    out << line << '\n';

    --s_left;
    w_left -= w;
    c_left -= c;
  }
}

void write_corpus_file(const CorpusSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_corpus(spec, out);
  if (!out) throw IoError("write failed on " + path);
}

std::string corpus_text(const CorpusSpec& spec) {
  std::ostringstream ss;
  write_corpus(spec, ss);
  return ss.str();
}

CorpusSpec pku_train() { return {19000, 1110000, 1788000, 101, 0, 3000, 45000}; }
CorpusSpec pku_test() { return {2000, 104000, 169000, 101, 1, 3000, 45000}; }
CorpusSpec msr_train() { return {87000, 2368000, 3981000, 202, 0, 3600, 60000}; }
CorpusSpec msr_test() { return {4000, 107000, 181000, 202, 1, 3600, 60000}; }
CorpusSpec tiny(std::uint64_t seed) { return {120, 1500, 2400, seed, 0, 60, 140}; }

}  // namespace wordseg::synth
