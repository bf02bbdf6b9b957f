#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nushu {

// All sentence text is held as a sequence of Unicode scalar values. Nüshu
// lives outside the BMP, so byte or UTF-16 unit counts are never lengths.
using Text = std::u32string;

inline constexpr char32_t kNushuFirst = 0x1B170;
inline constexpr char32_t kNushuLast = 0x1B2FB;

class EncodingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Decodes UTF-8; throws EncodingError on malformed input or a leading BOM.
Text from_utf8(std::string_view bytes);
std::string to_utf8(std::u32string_view text);
std::string to_utf8(char32_t c);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t scalar_length(std::string_view bytes);

constexpr bool is_nushu(char32_t c) { return c >= kNushuFirst && c <= kNushuLast; }

/// True for characters dropped by corpus normalization: Unicode punctuation
/// (general categories Pc Pd Ps Pe Pi Pf Po), symbols and punctuation in the
/// Halfwidth and Fullwidth Forms block, and ASCII digits.
bool is_normalization_dropped(char32_t c);

/// U+XXXX notation for diagnostics.
std::string codepoint_label(char32_t c);

}  // namespace nushu
