#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hypreader/common.hpp"

namespace hypreader {

// Tokenization: split on Unicode whitespace, strip leading/trailing
// punctuation from each token, keep hyphenated words whole
// ("performance-enhancing" is one token).

namespace detail {

inline std::uint32_t decode_utf8(std::string_view s, size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 1;
  std::uint32_t cp = b0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  }
  for (int k = 1; k < len && i + k < s.size(); ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) {
      len = k;
      break;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  i += static_cast<size_t>(len);
  return cp;
}

inline bool is_space_cp(std::uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

inline bool is_punct_cp(std::uint32_t cp) {
  if (cp < 0x80) {
    const char c = static_cast<char>(cp);
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
           (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
  }
  switch (cp) {
    case 0x2018: case 0x2019: case 0x201C: case 0x201D:  // curly quotes
    case 0x2013: case 0x2014: case 0x2026:               // dashes, ellipsis
    case 0xAB:   case 0xBB:   case 0xB7:   case 0x2022:
      return true;
    default:
      return false;
  }
}

}  // namespace detail

// Whitespace-delimited chunks of `text`, punctuation untouched. This is the
// "word count" unit used for length censoring.
inline std::vector<std::string> whitespace_chunks(std::string_view text) {
  std::vector<std::string> chunks;
  size_t i = 0, start = 0;
  bool in_chunk = false;
  while (i < text.size()) {
    const size_t at = i;
    const auto cp = detail::decode_utf8(text, i);
    if (detail::is_space_cp(cp)) {
      if (in_chunk) {
        chunks.emplace_back(text.substr(start, at - start));
        in_chunk = false;
      }
    } else if (!in_chunk) {
      start = at;
      in_chunk = true;
    }
  }
  if (in_chunk) chunks.emplace_back(text.substr(start));
  return chunks;
}

// Strip leading/trailing punctuation code points; interior ones survive.
inline std::string strip_edge_punct(std::string_view token) {
  // Decode once to code-point boundaries.
  std::vector<std::pair<size_t, std::uint32_t>> cps;
  size_t i = 0;
  while (i < token.size()) {
    const size_t at = i;
    cps.emplace_back(at, detail::decode_utf8(token, i));
  }
  size_t b = 0, e = cps.size();
  while (b < e && detail::is_punct_cp(cps[b].second)) ++b;
  while (e > b && detail::is_punct_cp(cps[e - 1].second)) --e;
  if (b >= e) return {};
  const size_t byte_begin = cps[b].first;
  const size_t byte_end = e < cps.size() ? cps[e].first : token.size();
  return std::string(token.substr(byte_begin, byte_end - byte_begin));
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  for (const auto& chunk : whitespace_chunks(text)) {
    auto t = strip_edge_punct(chunk);
    if (!t.empty()) tokens.push_back(std::move(t));
  }
  return tokens;
}

// Fixed English stop-word list shipped with the artifact (one token per line
// in data/stopwords_en.txt; this constant is the same list compiled in).
inline constexpr std::string_view kStopwordsEn =
    "i\nme\nmy\nmyself\nwe\nour\nours\nourselves\nyou\nyou're\nyou've\n"
    "you'll\nyou'd\nyour\nyours\nyourself\nyourselves\nhe\nhim\nhis\n"
    "himself\nshe\nshe's\nher\nhers\nherself\nit\nit's\nits\nitself\nthey\n"
    "them\ntheir\ntheirs\nthemselves\nwhat\nwhich\nwho\nwhom\nthis\nthat\n"
    "that'll\nthese\nthose\nam\nis\nare\nwas\nwere\nbe\nbeen\nbeing\nhave\n"
    "has\nhad\nhaving\ndo\ndoes\ndid\ndoing\na\nan\nthe\nand\nbut\nif\nor\n"
    "because\nas\nuntil\nwhile\nof\nat\nby\nfor\nwith\nabout\nagainst\n"
    "between\ninto\nthrough\nduring\nbefore\nafter\nabove\nbelow\nto\nfrom\n"
    "up\ndown\nin\nout\non\noff\nover\nunder\nagain\nfurther\nthen\nonce\n"
    "here\nthere\nwhen\nwhere\nwhy\nhow\nall\nany\nboth\neach\nfew\nmore\n"
    "most\nother\nsome\nsuch\nno\nnor\nnot\nonly\nown\nsame\nso\nthan\ntoo\n"
    "very\ns\nt\ncan\nwill\njust\ndon\ndon't\nshould\nshould've\nnow\nd\n"
    "ll\nm\no\nre\nve\ny\nain\naren\naren't\ncouldn\ncouldn't\ndidn\n"
    "didn't\ndoesn\ndoesn't\nhadn\nhadn't\nhasn\nhasn't\nhaven\nhaven't\n"
    "isn\nisn't\nma\nmightn\nmightn't\nmustn\nmustn't\nneedn\nneedn't\n"
    "shan\nshan't\nshouldn\nshouldn't\nwasn\nwasn't\nweren\nweren't\nwon\n"
    "won't\nwouldn\nwouldn't\n";

using StopwordSet = std::unordered_set<std::string>;

inline StopwordSet parse_stopwords(std::string_view text) {
  StopwordSet set;
  for (const auto& line : split_lines(text)) {
    const auto w = trim(line);
    if (!w.empty()) set.insert(to_lower_ascii(w));
  }
  return set;
}

inline const StopwordSet& default_stopwords() {
  static const StopwordSet set = parse_stopwords(kStopwordsEn);
  return set;
}

inline StopwordSet load_stopwords(const std::string& path) {
  return parse_stopwords(read_file(path));
}

struct NormalizeOpts {
  bool lowercase = true;
  bool strip_stopwords = true;
  bool strip_punct = true;
};

// Deterministic and idempotent under any fixed opts. Stop-word membership is
// always tested case-insensitively against the shipped list.
inline std::vector<std::string> normalize_tokens(
    const std::vector<std::string>& tokens, const NormalizeOpts& opts,
    const StopwordSet& stopwords = default_stopwords()) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& raw : tokens) {
    std::string t = opts.lowercase ? to_lower_ascii(raw) : raw;
    if (opts.strip_punct) {
      t = strip_edge_punct(t);
      if (t.empty()) continue;
    }
    if (opts.strip_stopwords && stopwords.count(to_lower_ascii(t))) continue;
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace hypreader
