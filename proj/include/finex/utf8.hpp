#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace finex::utf8 {

/// Lenient decode: malformed bytes come back as U+FFFD.
std::vector<char32_t> decode(std::string_view s);
void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

/// Longest prefix of `s` with at most `max_bytes` bytes that does not split
/// a code point.
std::string_view truncate(std::string_view s, std::size_t max_bytes);

}  // namespace finex::utf8
