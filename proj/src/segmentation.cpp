#include "wordseg/segmentation.hpp"

#include <string>

#include "wordseg/errors.hpp"

namespace wordseg {

std::vector<std::int32_t> cuts_from_lengths(const Segmentation& lengths) {
  std::vector<std::int32_t> cuts;
  if (lengths.empty()) return cuts;
  cuts.reserve(lengths.size() - 1);
  std::int32_t pos = 0;
  for (std::size_t i = 0; i + 1 < lengths.size(); ++i) {
    pos += lengths[i];
    cuts.push_back(pos);
  }
  return cuts;
}

Segmentation lengths_from_cuts(std::span<const std::int32_t> cuts, int n) {
  if (n <= 0) {
    if (!cuts.empty()) throw ContractError("lengths_from_cuts: cuts given for empty sentence");
    return {};
  }
  Segmentation lengths;
  lengths.reserve(cuts.size() + 1);
  std::int32_t prev = 0;
  for (std::int32_t c : cuts) {
    if (c <= prev || c >= n) {
      throw ContractError("lengths_from_cuts: cut " + std::to_string(c) +
                          " out of order or outside [1, " + std::to_string(n - 1) + "]");
    }
    lengths.push_back(c - prev);
    prev = c;
  }
  lengths.push_back(n - prev);
  return lengths;
}

std::vector<std::pair<std::int32_t, std::int32_t>> spans_from_lengths(const Segmentation& lengths,
                                                                      int n) {
  std::vector<std::pair<std::int32_t, std::int32_t>> spans;
  spans.reserve(lengths.size());
  std::int32_t pos = 0;
  for (std::int32_t len : lengths) {
    if (len < 1) throw ContractError("segmentation: word length " + std::to_string(len) + " < 1");
    spans.emplace_back(pos, pos + len);
    pos += len;
  }
  if (pos != n) {
    throw ContractError("segmentation covers " + std::to_string(pos) + " characters, sentence has " +
                        std::to_string(n));
  }
  return spans;
}

}  // namespace wordseg
