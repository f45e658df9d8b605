#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sentshift::unicode {

/// Returns the byte offset of the first invalid UTF-8 sequence, or nullopt
/// when the whole buffer is well-formed (overlongs and surrogates rejected).
std::optional<std::size_t> find_invalid_utf8(std::string_view bytes);

/// Decodes well-formed UTF-8. Behaviour on malformed input is unspecified.
std::vector<char32_t> decode(std::string_view utf8);
std::string encode(char32_t cp);

bool is_whitespace(char32_t cp);

/// Simple case mapping for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
/// Scripts without case (Hebrew, CJK) pass through.
char32_t to_lower(char32_t cp);

} // namespace sentshift::unicode
