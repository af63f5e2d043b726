#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wordseg::utf8 {

// Byte offsets of every scalar-value boundary in s, including 0 and s.size().
// Throws EncodingError on malformed input; `where` is prepended to the message.
std::vector<std::int32_t> boundaries(std::string_view s, std::string_view where = {});

// Number of scalar values in s (validates).
std::size_t length(std::string_view s, std::string_view where = {});

bool valid(std::string_view s);

}  // namespace wordseg::utf8
