#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lexner {

// Decodes UTF-8 into code points. Invalid bytes decode to U+FFFD one byte at
// a time, so decoding never fails.
std::vector<char32_t> utf8_decode(std::string_view text);
std::string utf8_encode(char32_t cp);
std::string utf8_encode(const std::vector<char32_t>& cps);

enum class CharCase { kUpper, kLower, kCaseless, kDigit, kOther };

// Case classification for ASCII, Latin-1, Latin Extended-A, Greek and
// Cyrillic. Any other code point >= U+00C0 counts as a caseless letter.
CharCase classify_char(char32_t cp);
char32_t to_lower(char32_t cp);

std::string lowercase(std::string_view text);

// Splits on ASCII whitespace, dropping empty fields.
std::vector<std::string> split_whitespace(std::string_view line);

// 32-bit FNV-1a.
std::uint32_t fnv1a32(std::string_view bytes);
// 64-bit FNV-1a, continuing from `state`.
std::uint64_t fnv1a64(const void* data, std::size_t size,
                      std::uint64_t state = 0xcbf29ce484222325ULL);

}  // namespace lexner
