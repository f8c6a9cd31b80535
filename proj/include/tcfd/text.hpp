#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tcfd::text {

/// Strips ASCII control characters and collapses whitespace runs into one
/// space; leading and trailing whitespace is removed.
std::string normalize_whitespace(std::string_view in);

/// Whitespace-delimited words. This is the token unit used for sequence
/// length limits.
std::vector<std::string_view> words(std::string_view in);
std::size_t word_count(std::string_view in);

/// Lowercased alphanumeric tokens with English stopwords removed.
std::set<std::string> content_tokens(std::string_view in);
bool is_stopword(std::string_view lowercase_word);

/// Rule-based sentence splitter: breaks after '.', '!' or '?' (plus any
/// closing quotes/brackets) when followed by whitespace and an uppercase
/// letter, digit or opening quote, unless the period ends a known
/// abbreviation or a single-letter initial. Returned sentences are trimmed.
std::vector<std::string> split_sentences(std::string_view in);

/// Returns the first `max_words` words joined by single spaces.
std::string truncate_words(std::string_view in, std::size_t max_words);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view in);

}  // namespace tcfd::text
