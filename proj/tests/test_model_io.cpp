#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "wordseg/corpus.hpp"
#include "wordseg/model_io.hpp"
#include "wordseg/search.hpp"
#include "wordseg/synthdata.hpp"

using namespace wordseg;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("wordseg_io_" + name);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << body;
}

ModelBundle sample_bundle(std::uint64_t seed) {
  const Corpus corpus = parse_segmented_text(synth::corpus_text(synth::tiny(seed)), "mem");
  ModelBundle b;
  b.vocab = build_char_vocab(corpus, 1);
  b.shortlist = build_short_list(corpus, 0.5);
  b.params = init_params({6, 6, 6, 4}, b.vocab.size(), b.shortlist.size(), seed);
  oracle::randomize_params(b.params, seed + 1, 0.4);
  b.seed = seed;
  b.provenance = {{"strategy", "early"}, {"best_dev_f1", 0.5}};
  return b;
}

struct Cleanup {
  std::vector<fs::path> paths;
  ~Cleanup() {
    for (const auto& p : paths) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }
};

}  // namespace

TEST_CASE("save/load/save reproduces the file byte for byte") {
  Cleanup cleanup;
  const auto p1 = temp_path("rt1.wsg");
  const auto p2 = temp_path("rt2.wsg");
  cleanup.paths = {p1, p2};

  const ModelBundle original = sample_bundle(5);
  save_model(original, p1.string());
  const ModelBundle loaded = load_model(p1.string());
  save_model(loaded, p2.string());
  CHECK(slurp(p1) == slurp(p2));

  // loaded state matches
  CHECK(loaded.vocab.size() == original.vocab.size());
  CHECK(loaded.shortlist.size() == original.shortlist.size());
  CHECK(loaded.seed == original.seed);
  CHECK(loaded.provenance == original.provenance);
  bool params_equal = true;
  original.params.for_each_tensor([&](const std::string& name, const Tensor& t) {
    loaded.params.for_each_tensor([&](const std::string& name2, const Tensor& t2) {
      if (name != name2) return;
      for (std::size_t i = 0; i < t.numel(); ++i) params_equal = params_equal && t[i] == t2[i];
    });
  });
  CHECK(params_equal);
}

TEST_CASE("decode results survive a round trip bit for bit") {
  Cleanup cleanup;
  const auto p = temp_path("decode.wsg");
  cleanup.paths = {p};

  const ModelBundle original = sample_bundle(6);
  save_model(original, p.string());
  const ModelBundle loaded = load_model(p.string());

  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(12));
    const auto ids = oracle::random_ids(rng, n, original.params.vocab_size());
    const SpanShortlistIds sl = SpanShortlistIds::none(n, 4);
    const DecodeResult a = decode(original.params, ids, sl, 2);
    const DecodeResult b = decode(loaded.params, ids, sl, 2);
    CHECK(a.seg == b.seg);
    CHECK(a.score == b.score);
  }
}

TEST_CASE("payload corruption is detected") {
  Cleanup cleanup;
  const auto p = temp_path("corrupt.wsg");
  cleanup.paths = {p};
  save_model(sample_bundle(7), p.string());
  std::string bytes = slurp(p);
  bytes[bytes.size() - 5] ^= 0x01;  // flip one payload bit
  spit(p, bytes);
  CHECK_THROWS_AS(load_model(p.string()), IntegrityError);
}

TEST_CASE("truncation is detected") {
  Cleanup cleanup;
  const auto p = temp_path("trunc.wsg");
  cleanup.paths = {p};
  save_model(sample_bundle(8), p.string());
  std::string bytes = slurp(p);
  bytes.resize(bytes.size() - 9);
  spit(p, bytes);
  CHECK_THROWS_AS(load_model(p.string()), IntegrityError);
}

TEST_CASE("bad magic and unsupported version are told apart") {
  Cleanup cleanup;
  const auto p = temp_path("magic.wsg");
  cleanup.paths = {p};
  save_model(sample_bundle(9), p.string());

  SUBCASE("magic") {
    std::string bytes = slurp(p);
    bytes[0] = 'X';
    spit(p, bytes);
    CHECK_THROWS_AS(load_model(p.string()), FormatError);
  }
  SUBCASE("version, detected before the payload is touched") {
    std::string bytes = slurp(p);
    bytes[4] = 9;  // version 9
    // also corrupt the payload: the version error must win
    bytes[bytes.size() - 3] ^= 0xFF;
    spit(p, bytes);
    CHECK_THROWS_AS(load_model(p.string()), VersionError);
  }
  SUBCASE("not a model file at all") {
    spit(p, "just text\n");
    CHECK_THROWS_AS(load_model(p.string()), FormatError);
  }
}

TEST_CASE("model_info summarizes the bundle") {
  const ModelBundle b = sample_bundle(10);
  const nlohmann::json info = model_info(b);
  CHECK(info.at("dims").at("d_c") == 6);
  CHECK(info.at("dims").at("max_word_len") == 4);
  CHECK(info.at("vocab_size") == b.vocab.size());
  CHECK(info.at("shortlist_size") == b.shortlist.size());
  CHECK(info.at("shortlist_fraction") == 0.5);
  CHECK(info.at("param_count") == b.params.param_count());
  CHECK(info.at("gate_order") == "input,forget,cell,output");
}

TEST_CASE("missing file raises an I/O error") {
  CHECK_THROWS_AS(load_model("/nonexistent/model.wsg"), IoError);
}
