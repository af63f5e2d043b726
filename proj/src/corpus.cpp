#include "wordseg/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wordseg/errors.hpp"
#include "wordseg/utf8.hpp"

namespace wordseg {

namespace {

bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed on " + path);
  return ss.str();
}

}  // namespace

Segmentation Sentence::gold_segmentation() const {
  if (!has_gold) throw ContractError("sentence has no gold segmentation");
  return lengths_from_cuts(cuts, size());
}

std::string Sentence::render_gold() const {
  const Segmentation lengths = gold_segmentation();
  std::string out;
  out.reserve(text.size() + lengths.size());
  int pos = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (i) out += ' ';
    out += span_str(pos, pos + lengths[i]);
    pos += lengths[i];
  }
  return out;
}

Sentence make_sentence(std::string_view raw_chars, std::string_view where) {
  Sentence s;
  s.text.assign(raw_chars);
  s.offsets = utf8::boundaries(s.text, where);
  return s;
}

Sentence make_sentence(std::string_view raw_chars, const Segmentation& gold) {
  Sentence s = make_sentence(raw_chars);
  spans_from_lengths(gold, s.size());  // validates
  s.cuts = cuts_from_lengths(gold);
  s.has_gold = true;
  return s;
}

std::string normalize_ascii_classes(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c >= '0' && c <= '9') {
      out += '0';
    } else if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
      out += 'x';
    } else {
      out += c;
    }
  }
  return out;
}

Corpus parse_segmented_text(std::string_view body, std::string_view source_name,
                            bool normalize_ascii) {
  Corpus corpus;
  corpus.source.assign(source_name);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::string word_buf;
  while (pos < body.size()) {
    const std::size_t eol = body.find('\n', pos);
    std::string_view line =
        body.substr(pos, eol == std::string_view::npos ? body.size() - pos : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? body.size() : eol + 1;

    const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
    Sentence sent;
    std::vector<std::int32_t> lengths;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_space_byte(line[i])) ++i;
      const std::size_t start = i;
      while (i < line.size() && !is_space_byte(line[i])) ++i;
      if (i == start) break;
      const std::string_view word = line.substr(start, i - start);
      const std::size_t n = utf8::length(word, where);
      word_buf.assign(word);
      if (normalize_ascii) word_buf = normalize_ascii_classes(word_buf);
      sent.text.append(word_buf);
      lengths.push_back(static_cast<std::int32_t>(n));
      ++corpus.word_freq[word_buf];
    }
    if (lengths.empty()) continue;  // blank line
    sent.offsets = utf8::boundaries(sent.text);
    sent.cuts = cuts_from_lengths(lengths);
    sent.has_gold = true;
    corpus.n_words += lengths.size();
    corpus.n_chars += sent.size();
    corpus.sentences.push_back(std::move(sent));
  }
  return corpus;
}

Corpus load_segmented_corpus(const std::string& path, bool normalize_ascii) {
  return parse_segmented_text(read_file(path), path, normalize_ascii);
}

std::vector<Sentence> load_raw_lines(const std::string& path) {
  const std::string body = read_file(path);
  std::vector<Sentence> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < body.size()) {
    const std::size_t eol = body.find('\n', pos);
    std::string_view line = std::string_view(body).substr(
        pos, eol == std::string_view::npos ? body.size() - pos : eol - pos);
    ++line_no;
    pos = eol == std::string_view::npos ? body.size() : eol + 1;

    std::string kept;
    kept.reserve(line.size());
    for (char c : line) {
      if (!is_space_byte(c)) kept += c;
    }
    out.push_back(make_sentence(kept, path + ":" + std::to_string(line_no)));
  }
  return out;
}

// ----- CharVocab -----

CharVocab::CharVocab() {
  chars_.push_back("<unk>");
  freq_.push_back(0);
  rare_.push_back(0);
}

int CharVocab::id_of(std::string_view c) const {
  auto it = ids_.find(std::string(c));
  return it == ids_.end() ? kUnkId : it->second;
}

std::vector<int> CharVocab::encode(const Sentence& s, bool normalize_ascii) const {
  std::vector<int> ids(s.size());
  for (int i = 0; i < s.size(); ++i) {
    if (normalize_ascii) {
      ids[i] = id_of(normalize_ascii_classes(s.char_at(i)));
    } else {
      ids[i] = id_of(s.char_at(i));
    }
  }
  return ids;
}

CharVocab build_char_vocab(const Corpus& corpus, std::uint64_t unk_threshold) {
  if (corpus.sentences.empty()) throw ContractError("build_char_vocab: corpus is empty");
  CharVocab v;
  v.unk_threshold_ = unk_threshold;
  for (const Sentence& s : corpus.sentences) {
    for (int i = 0; i < s.size(); ++i) {
      const std::string c(s.char_at(i));
      auto it = v.ids_.find(c);
      if (it == v.ids_.end()) {
        const int id = static_cast<int>(v.chars_.size());
        v.ids_.emplace(c, id);
        v.chars_.push_back(c);
        v.freq_.push_back(1);
      } else {
        ++v.freq_[it->second];
      }
    }
  }
  v.rare_.assign(v.chars_.size(), 0);
  for (std::size_t id = 1; id < v.chars_.size(); ++id) {
    if (v.freq_[id] <= unk_threshold) v.rare_[id] = 1;
  }
  return v;
}

CharVocab CharVocab::from_entries(const std::vector<std::string>& chars,
                                  const std::vector<std::uint64_t>& freqs,
                                  std::uint64_t unk_threshold) {
  if (chars.size() != freqs.size()) {
    throw ContractError("vocab entries and frequencies differ in length");
  }
  CharVocab v;
  v.unk_threshold_ = unk_threshold;
  v.freq_[0] = chars.empty() ? 0 : freqs[0];
  for (std::size_t i = 1; i < chars.size(); ++i) {
    v.ids_.emplace(chars[i], static_cast<int>(i));
    v.chars_.push_back(chars[i]);
    v.freq_.push_back(freqs[i]);
    v.rare_.push_back(freqs[i] <= unk_threshold ? 1 : 0);
  }
  return v;
}

// ----- ShortList -----

int ShortList::id_of(std::string_view w) const {
  auto it = ids_.find(std::string(w));
  return it == ids_.end() ? -1 : it->second;
}

ShortList ShortList::from_words(std::vector<std::string> words, double fraction) {
  ShortList sl;
  sl.fraction_ = fraction;
  sl.words_ = std::move(words);
  sl.ids_.reserve(sl.words_.size());
  for (std::size_t i = 0; i < sl.words_.size(); ++i) {
    sl.ids_.emplace(sl.words_[i], static_cast<int>(i));
  }
  return sl;
}

ShortList build_short_list(const Corpus& corpus, double fraction) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw ContractError("build_short_list: fraction " + std::to_string(fraction) +
                        " outside [0, 1]");
  }
  std::vector<std::pair<const std::string*, std::uint64_t>> items;
  items.reserve(corpus.word_freq.size());
  for (const auto& [word, freq] : corpus.word_freq) items.emplace_back(&word, freq);
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return *a.first < *b.first;
  });
  const std::size_t keep =
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(items.size())));
  std::vector<std::string> words;
  words.reserve(keep);
  for (std::size_t i = 0; i < keep && i < items.size(); ++i) words.push_back(*items[i].first);
  return ShortList::from_words(std::move(words), fraction);
}

// ----- dev split -----

std::pair<Corpus, Corpus> split_dev(const Corpus& corpus, double fraction) {
  const std::size_t n = corpus.sentences.size();
  if (n < 10) {
    throw ContractError("split_dev: need at least 10 sentences, got " + std::to_string(n));
  }
  const std::size_t dev_n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  const std::size_t train_n = n - dev_n;

  auto collect = [&](std::size_t begin, std::size_t end, const char* tag) {
    Corpus c;
    c.source = corpus.source + tag;
    for (std::size_t i = begin; i < end; ++i) {
      const Sentence& s = corpus.sentences[i];
      c.n_chars += s.size();
      const Segmentation lengths = s.gold_segmentation();
      c.n_words += lengths.size();
      int pos = 0;
      for (std::int32_t len : lengths) {
        auto [it, fresh] = c.word_freq.emplace(std::string(s.span_str(pos, pos + len)), 0);
        ++it->second;
        pos += len;
      }
      c.sentences.push_back(s);
    }
    return c;
  };

  return {collect(0, train_n, "#train"), collect(train_n, n, "#dev")};
}

// ----- pre-trained embeddings -----

PretrainedChars load_pretrained_embeddings(const std::string& path, const CharVocab& vocab,
                                           int d_c) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  PretrainedChars pre;
  pre.rows = Tensor(vocab.size(), d_c);
  pre.present.assign(vocab.size(), 0);

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(path + ":1: missing header line");
  ++line_no;
  std::istringstream header(line);
  std::uint64_t declared = 0;
  int dim = 0;
  if (!(header >> declared >> dim)) throw ParseError(path + ":1: header must be \"V d\"");
  if (dim != d_c) {
    throw DimensionError("pretrained embedding size " + std::to_string(dim) +
                         " does not match d_c " + std::to_string(d_c));
  }

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": missing token");
    }
    std::vector<double> values;
    values.reserve(d_c);
    double x;
    while (ss >> x) values.push_back(x);
    if (static_cast<int>(values.size()) != d_c) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(d_c) + " values, got " + std::to_string(values.size()));
    }
    if (!utf8::valid(token) || utf8::length(token) != 1) continue;  // not a single character
    const int id = vocab.id_of(token);
    if (id == CharVocab::kUnkId && token != vocab.char_at(CharVocab::kUnkId)) continue;
    if (pre.present[id]) continue;  // first occurrence wins
    for (int j = 0; j < d_c; ++j) pre.rows.at(id, j) = values[j];
    pre.present[id] = 1;
    ++pre.matched;
  }
  const int denom = vocab.size() - 1;  // UNK excluded
  pre.coverage = denom > 0 ? static_cast<double>(pre.matched) / denom : 0.0;
  return pre;
}

}  // namespace wordseg
