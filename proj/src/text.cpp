#include "tcfd/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <cstdio>

namespace tcfd::text {
namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_control(unsigned char c) { return c < 0x20 || c == 0x7f; }

constexpr std::string_view kStopwords[] = {
    "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are",
    "as", "at", "be", "because", "been", "before", "being", "below", "between", "both", "but",
    "by", "can", "could", "did", "do", "does", "doing", "down", "during", "each", "few", "for",
    "from", "further", "had", "has", "have", "having", "he", "her", "here", "hers", "herself",
    "him", "himself", "his", "how", "i", "if", "in", "into", "is", "it", "its", "itself", "just",
    "me", "more", "most", "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once",
    "only", "or", "other", "our", "ours", "ourselves", "out", "over", "own", "s", "same", "she",
    "should", "so", "some", "such", "t", "than", "that", "the", "their", "theirs", "them",
    "themselves", "then", "there", "these", "they", "this", "those", "through", "to", "too",
    "under", "until", "up", "very", "was", "we", "were", "what", "when", "where", "which",
    "while", "who", "whom", "why", "will", "with", "would", "you", "your", "yours", "yourself",
    "yourselves", "also", "may", "us", "within", "via", "per",
};

constexpr std::string_view kAbbreviations[] = {
    "e.g", "i.e", "etc", "mr", "mrs", "ms", "dr", "prof", "inc", "ltd", "co", "corp", "plc",
    "no", "nos", "vs", "approx", "incl", "fig", "figs", "jan", "feb", "mar", "apr", "jun",
    "jul", "aug", "sep", "sept", "oct", "nov", "dec", "u.s", "u.k", "e.u", "st", "art",
    "para", "cf", "al",
};

bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

bool starts_sentence(unsigned char c) {
  return std::isupper(c) || std::isdigit(c) || c == '"' || c == '\'' || c == '(' || c == '[' ||
         c >= 0x80;
}

// The word immediately before position `dot` (exclusive), lowercased.
std::string word_before(std::string_view s, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(static_cast<unsigned char>(s[b - 1])) && s[b - 1] != '(' &&
         s[b - 1] != '"') {
    --b;
  }
  std::string w(s.substr(b, dot - b));
  for (char& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return w;
}

bool is_abbreviation(std::string_view s, std::size_t dot) {
  const std::string w = word_before(s, dot);
  if (w.empty()) return false;
  if (w.size() == 1 && std::isalpha(static_cast<unsigned char>(w[0]))) {
    // Single-letter initial such as "J. Smith".
    return std::isupper(static_cast<unsigned char>(s[dot - 1])) != 0;
  }
  return std::ranges::find(kAbbreviations, w) != std::end(kAbbreviations);
}

}  // namespace

std::string normalize_whitespace(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  bool pending_space = false;
  for (char ch : in) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (is_control(c)) continue;
    if (pending_space && !out.empty()) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

std::vector<std::string_view> words(std::string_view in) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < in.size()) {
    while (i < in.size() && is_space(static_cast<unsigned char>(in[i]))) ++i;
    const std::size_t b = i;
    while (i < in.size() && !is_space(static_cast<unsigned char>(in[i]))) ++i;
    if (i > b) out.push_back(in.substr(b, i - b));
  }
  return out;
}

std::size_t word_count(std::string_view in) { return words(in).size(); }

bool is_stopword(std::string_view w) {
  return std::ranges::find(kStopwords, w) != std::end(kStopwords);
}

std::set<std::string> content_tokens(std::string_view in) {
  std::set<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !is_stopword(cur)) out.insert(cur);
    cur.clear();
  };
  for (char ch : in) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> split_sentences(std::string_view in) {
  std::vector<std::string> out;
  auto emit = [&](std::size_t b, std::size_t e) {
    std::string s = normalize_whitespace(in.substr(b, e - b));
    if (!s.empty()) out.push_back(std::move(s));
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const char c = in[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t end = i + 1;
    while (end < in.size() && (in[end] == '.' || in[end] == '!' || in[end] == '?')) ++end;
    while (end < in.size() && is_closer(in[end])) ++end;
    if (end < in.size() && !is_space(static_cast<unsigned char>(in[end]))) {
      i = end - 1;
      continue;
    }
    std::size_t next = end;
    while (next < in.size() && is_space(static_cast<unsigned char>(in[next]))) ++next;
    const bool at_end = next >= in.size();
    if (!at_end) {
      if (!starts_sentence(static_cast<unsigned char>(in[next]))) {
        i = end - 1;
        continue;
      }
      if (c == '.' && is_abbreviation(in, i)) {
        i = end - 1;
        continue;
      }
    }
    emit(start, end);
    start = end;
    i = end - 1;
  }
  if (start < in.size()) emit(start, in.size());
  return out;
}

std::string truncate_words(std::string_view in, std::size_t max_words) {
  std::string out;
  std::size_t n = 0;
  for (std::string_view w : words(in)) {
    if (n == max_words) break;
    if (n++ > 0) out.push_back(' ');
    out.append(w);
  }
  return out;
}

std::string fnv1a_hex(std::string_view in) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : in) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tcfd::text
