#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace curate::text {

inline bool is_ascii_space(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

/// Calls fn(string_view) for every maximal run of non-whitespace bytes.
template <typename Fn>
void for_each_word(std::string_view s, Fn&& fn) {
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        while (i < n && is_ascii_space(static_cast<unsigned char>(s[i]))) ++i;
        if (i == n) break;
        std::size_t start = i;
        while (i < n && !is_ascii_space(static_cast<unsigned char>(s[i]))) ++i;
        fn(s.substr(start, i - start));
    }
}

std::vector<std::string_view> split_words(std::string_view s);
std::size_t count_whitespace_words(std::string_view s);

/// Splits on '\n' only; "a\n" yields {"a", ""}.
std::vector<std::string_view> split_lines(std::string_view s);
std::string join(const std::vector<std::string_view>& parts, std::string_view sep);

std::string_view trim(std::string_view s);
std::string ascii_lower(std::string_view s);
bool is_blank(std::string_view s);

// Unicode helpers (ICU-backed beyond ASCII).

/// Decodes the code point at s[i] and advances i. Malformed bytes decode to U+FFFD.
char32_t next_code_point(std::string_view s, std::size_t& i);
std::size_t utf8_length(std::string_view s);

bool is_alpha(char32_t c);
bool is_alnum(char32_t c);
bool is_digit(char32_t c);
bool is_upper(char32_t c);
bool is_lower(char32_t c);
bool is_whitespace(char32_t c);
bool is_punct(char32_t c);

bool contains_alpha(std::string_view word);

/// Lowercases and strips leading/trailing punctuation (used for stop-word lookup).
std::string normalize_token(std::string_view word);

// Hashing. MurmurHash3 x64/128, stable across platforms and runs.
std::pair<std::uint64_t, std::uint64_t> hash128(std::string_view data, std::uint64_t seed = 0);
inline std::uint64_t hash64(std::string_view data, std::uint64_t seed = 0) {
    return hash128(data, seed).first;
}

}  // namespace curate::text
