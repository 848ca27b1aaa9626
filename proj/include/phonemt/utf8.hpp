#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

// Minimal UTF-8 / Unicode helpers for the symbol inventories this toolkit
// deals with (Latin orthographies plus IPA). Not a general Unicode library.

namespace phonemt::utf8 {

struct Utf8Error : std::runtime_error {
  explicit Utf8Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Decodes UTF-8 into Unicode scalar values. Throws Utf8Error on malformed
// input (truncated sequences, overlong encodings, surrogates).
std::u32string decode(std::string_view s);

std::string encode(char32_t cp);
std::string encode(std::u32string_view cps);

std::size_t scalar_count(std::string_view s);

bool is_whitespace(char32_t c);

// Combining marks (Mn ranges relevant to IPA diacritics).
bool is_combining(char32_t c);

// Combining double inverted breve / double breve below, used to tie
// affricates like d͡ʒ.
bool is_tie_bar(char32_t c);

// Common Unicode punctuation (category P over the blocks that show up in
// news text). Spacing modifier letters (ˈ ˌ ː) are letters, not punctuation.
bool is_punctuation(char32_t c);

// ASCII + Latin-1 + Latin Extended-A lowercasing; enough for the German,
// English and constructed-language orthographies in this toolkit.
char32_t to_lower(char32_t c);
std::string to_lower_copy(std::string_view s);

}  // namespace phonemt::utf8
