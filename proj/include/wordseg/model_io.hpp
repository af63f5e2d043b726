#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "wordseg/corpus.hpp"
#include "wordseg/model.hpp"

namespace wordseg {

// Versioned model container.
//
// Layout (all integers little-endian):
//   bytes 0..3    magic "WSEG"
//   bytes 4..7    u32 format version (currently 1)
//   bytes 8..15   u64 metadata length in bytes
//   bytes 16..23  u64 payload length in bytes
//   bytes 24..31  u64 FNV-1a checksum of the payload
//   metadata      UTF-8 JSON: dims, vocab listing (with frequencies and the
//                 UNK threshold), short-list listing, seed, training
//                 provenance, LSTM gate order, and the tensor order the
//                 payload follows
//   payload       raw little-endian float64 values, tensors concatenated in
//                 the declared canonical order
//
// Loading then saving reproduces the file byte for byte.
struct ModelBundle {
  ModelParams params;
  CharVocab vocab;
  ShortList shortlist;
  std::uint64_t seed = 0;
  bool normalize_ascii = false;  // inputs pass through the ASCII class normalization
  nlohmann::json provenance;  // opaque, preserved across round-trips
};

void save_model(const ModelBundle& bundle, const std::string& path);
ModelBundle load_model(const std::string& path);

// Human-oriented metadata summary (used by the inspect command).
nlohmann::json model_info(const ModelBundle& bundle);

}  // namespace wordseg
