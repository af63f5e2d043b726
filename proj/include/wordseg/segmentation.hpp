#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace wordseg {

// A segmentation is the sequence of word lengths partitioning a sentence.
using Segmentation = std::vector<std::int32_t>;

// Cut positions (prefix sums of all lengths but the last), strictly increasing
// values in [1, n-1].
std::vector<std::int32_t> cuts_from_lengths(const Segmentation& lengths);

// Inverse of the above; validates that cuts are strictly increasing in [1, n-1].
Segmentation lengths_from_cuts(std::span<const std::int32_t> cuts, int n);

// Half-open (start, end) spans. Throws ContractError unless lengths are all
// >= 1 and sum to n.
std::vector<std::pair<std::int32_t, std::int32_t>> spans_from_lengths(const Segmentation& lengths, int n);

}  // namespace wordseg
