// Deterministic synthetic bakeoff-style corpora for offline testing and
// demos. Profiles reproduce the published PKU/MSR corpus statistics exactly.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wordseg/synthdata.hpp"

int main(int argc, char** argv) {
  CLI::App app{"wordseg-datagen — synthetic segmented corpora"};
  std::string profile = "tiny";
  std::string out_path;
  std::uint64_t seed = 7;
  app.add_option("--profile", profile, "pku-train|pku-test|msr-train|msr-test|tiny")
      ->capture_default_str();
  app.add_option("--out", out_path, "output file")->required();
  app.add_option("--seed", seed, "seed (tiny profile only)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  using namespace wordseg::synth;
  CorpusSpec spec;
  if (profile == "pku-train") {
    spec = pku_train();
  } else if (profile == "pku-test") {
    spec = pku_test();
  } else if (profile == "msr-train") {
    spec = msr_train();
  } else if (profile == "msr-test") {
    spec = msr_test();
  } else if (profile == "tiny") {
    spec = tiny(seed);
  } else {
    std::cerr << "unknown profile " << profile << "\n";
    return 2;
  }

  try {
    write_corpus_file(spec, out_path);
  } catch (const std::exception& e) {
    std::cerr << "datagen failed: " << e.what() << "\n";
    return 1;
  }
  std::cerr << "wrote " << out_path << " (" << spec.sentences << " sentences, " << spec.words
            << " words, " << spec.chars << " characters)\n";
  return 0;
}
