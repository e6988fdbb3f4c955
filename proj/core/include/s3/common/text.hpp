#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace s3::text {

std::string trim(std::string_view s);

/// Trim and collapse internal whitespace runs to a single space.
std::string normalize_space(std::string_view s);

/// ASCII lowercase; bytes >= 0x80 pass through.
std::string to_lower(std::string_view s);

bool starts_with_icase(std::string_view s, std::string_view prefix);

/// Lowercased alphanumeric runs. Any ASCII punctuation or whitespace separates tokens;
/// non-ASCII bytes are kept inside tokens.
std::vector<std::string> word_tokens(std::string_view s);

/// Decode UTF-8 into code points. Invalid sequences decode byte-wise as U+FFFD.
std::u32string utf8_decode(std::string_view s);

/// Number of code points.
std::size_t utf8_length(std::string_view s);

/// "a", "a and b", "a, b, and c".
std::string join_phrases(const std::vector<std::string>& phrases);

}  // namespace s3::text
