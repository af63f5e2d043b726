#include "wordseg/utf8.hpp"

#include "wordseg/errors.hpp"

namespace wordseg::utf8 {

namespace {

[[noreturn]] void bad(std::string_view where, std::size_t byte) {
  std::string msg = "invalid UTF-8";
  if (!where.empty()) msg += " in " + std::string(where);
  msg += " at byte " + std::to_string(byte);
  throw EncodingError(msg);
}

// Returns the sequence length at s[i], validating continuations and range.
std::size_t step(std::string_view s, std::size_t i, std::string_view where) {
  const unsigned char b0 = static_cast<unsigned char>(s[i]);
  std::size_t len;
  if (b0 < 0x80) {
    return 1;
  } else if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    if (b0 < 0xC2) bad(where, i);  // overlong
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    if (b0 > 0xF4) bad(where, i);  // beyond U+10FFFF
  } else {
    bad(where, i);
  }
  if (i + len > s.size()) bad(where, i);
  for (std::size_t k = 1; k < len; ++k) {
    if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) bad(where, i + k);
  }
  if (len == 3) {
    const unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
    if (b0 == 0xE0 && b1 < 0xA0) bad(where, i);            // overlong
    if (b0 == 0xED && b1 >= 0xA0) bad(where, i);           // surrogate
  }
  if (len == 4) {
    const unsigned char b1 = static_cast<unsigned char>(s[i + 1]);
    if (b0 == 0xF0 && b1 < 0x90) bad(where, i);            // overlong
    if (b0 == 0xF4 && b1 >= 0x90) bad(where, i);           // > U+10FFFF
  }
  return len;
}

}  // namespace

std::vector<std::int32_t> boundaries(std::string_view s, std::string_view where) {
  std::vector<std::int32_t> out;
  out.reserve(s.size() + 1);
  out.push_back(0);
  std::size_t i = 0;
  while (i < s.size()) {
    i += step(s, i, where);
    out.push_back(static_cast<std::int32_t>(i));
  }
  return out;
}

std::size_t length(std::string_view s, std::string_view where) {
  std::size_t i = 0, n = 0;
  while (i < s.size()) {
    i += step(s, i, where);
    ++n;
  }
  return n;
}

bool valid(std::string_view s) {
  try {
    length(s);
    return true;
  } catch (const EncodingError&) {
    return false;
  }
}

}  // namespace wordseg::utf8
