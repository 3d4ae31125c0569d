#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <unordered_set>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/text.hpp"

namespace hypreader {

struct Document {
  std::string doc_id;
  std::string raw_text;
};

struct Sentence {
  std::string doc_id;
  std::size_t index = 0;
  std::string text;
  std::vector<std::string> tokens;
};

enum class TriggerKind { hypothesis, proposition, h_short, p_short };

inline const char* to_string(TriggerKind k) {
  switch (k) {
    case TriggerKind::hypothesis: return "hypothesis";
    case TriggerKind::proposition: return "proposition";
    case TriggerKind::h_short: return "h_short";
    default: return "p_short";
  }
}

struct CandidateSentence {
  Sentence sentence;
  TriggerKind trigger_kind = TriggerKind::hypothesis;
  std::string hypothesis_num;  // normalized, e.g. "h_4a"
  std::size_t word_count = 0;  // whitespace-delimited, before stop-word removal
};

struct CorpusStats {
  std::size_t sentence_count = 0;
  double mean_words = 0.0;
  double sd_words = 0.0;  // population standard deviation
  std::map<std::size_t, std::size_t> histogram;
};

namespace ingest_detail {

inline const std::unordered_set<std::string>& abbreviations() {
  static const std::unordered_set<std::string> set = {
      "dr",  "mr",   "mrs", "ms",  "prof", "fig",  "figs", "eq",  "eqs",
      "sec", "vol",  "no",  "pp",  "p",    "ed",   "eds",  "al",  "etc",
      "e.g", "i.e",  "cf",  "vs",  "st",   "jr",   "sr",   "inc", "ltd",
      "co",  "dept", "univ", "approx", "resp", "ca"};
  return set;
}

// Word (letters/digits/periods) ending exactly at byte position `end`.
inline std::string word_before(std::string_view text, size_t end) {
  size_t b = end;
  while (b > 0) {
    const char c = text[b - 1];
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '\'')
      --b;
    else
      break;
  }
  return std::string(text.substr(b, end - b));
}

inline bool is_label_token(const std::string& word) {
  // "H1", "h4a", "P12" style labels.
  static const std::regex re("^[hp][0-9]+[a-z]?$", std::regex::icase);
  return std::regex_match(word, re);
}

inline bool is_number_token(const std::string& word) {
  static const std::regex re("^[0-9]+[a-z]?$", std::regex::icase);
  return std::regex_match(word, re);
}

inline bool is_label_keyword(const std::string& word) {
  const auto w = to_lower_ascii(word);
  return w == "hypothesis" || w == "proposition";
}

// True when the '.' at `pos` must not end a sentence.
inline bool protected_period(std::string_view text, size_t pos) {
  const std::string word = word_before(text, pos);
  if (word.empty()) return false;
  std::string w = to_lower_ascii(word);
  // Strip internal periods accumulated from "e.g." style tokens.
  while (!w.empty() && w.back() == '.') w.pop_back();
  if (w.empty()) return false;
  if (abbreviations().count(w)) return true;
  // Single-letter initials: "J. Smith".
  if (w.size() == 1 && std::isalpha(static_cast<unsigned char>(w[0])))
    return true;
  if (is_label_token(w)) return true;
  if (is_number_token(w)) {
    // "Hypothesis 1." / "Proposition 2a."
    size_t word_start = pos - word.size();
    while (word_start > 0 &&
           std::isspace(static_cast<unsigned char>(text[word_start - 1])))
      --word_start;
    const std::string prev = word_before(text, word_start);
    if (is_label_keyword(prev)) return true;
  }
  return false;
}

inline std::vector<std::string> split_paragraphs(std::string_view text) {
  std::vector<std::string> blocks;
  std::string current;
  auto flush = [&] {
    if (!trim(current).empty()) blocks.push_back(trim(current));
    current.clear();
  };
  size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\r') {
      ++i;
      continue;
    }
    if (c == '\n') {
      // A newline followed (through spaces/tabs/CRs) by another newline is a
      // paragraph break; a lone newline is wrapped text.
      size_t j = i + 1;
      while (j < text.size() &&
             (text[j] == ' ' || text[j] == '\t' || text[j] == '\r'))
        ++j;
      if (j < text.size() && text[j] == '\n') {
        flush();
        i = j + 1;
        while (i < text.size() &&
               std::isspace(static_cast<unsigned char>(text[i])))
          ++i;
      } else {
        current += ' ';
        ++i;
      }
      continue;
    }
    current += c;
    ++i;
  }
  flush();
  return blocks;
}

}  // namespace ingest_detail

// Run a shell command template ("pdftotext {input} -") and capture stdout.
inline std::string run_extractor(const std::string& command_template,
                                 const std::string& path) {
  std::string quoted = "'";
  for (const char c : path) {
    if (c == '\'')
      quoted += "'\\''";
    else
      quoted += c;
  }
  quoted += "'";
  std::string cmd = command_template;
  const std::string placeholder = "{input}";
  const auto pos = cmd.find(placeholder);
  if (pos != std::string::npos)
    cmd.replace(pos, placeholder.size(), quoted);
  else
    cmd += " " + quoted;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw Error("ExtractorFailed", "cannot start: " + cmd);
  std::string output;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
  const int status = ::pclose(pipe);
  if (status != 0)
    throw Error("ExtractorFailed",
                "nonzero exit (" + std::to_string(status) + "): " + cmd);
  return output;
}

inline bool has_txt_extension(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return false;
  return to_lower_ascii(path.substr(dot)) == ".txt";
}

// Plain-text files pass through unchanged; anything else goes through the
// configured external extractor command. Empty output means the document is
// unusable (e.g. failed OCR) and is surfaced as an error for the caller to
// skip with a warning.
inline Document load_document(
    const std::string& path,
    const std::optional<std::string>& extractor = std::nullopt) {
  Document doc;
  doc.doc_id = base_name(path);
  if (has_txt_extension(path)) {
    doc.raw_text = read_file(path);
  } else {
    if (!extractor)
      throw Error("ExtractorMissing",
                  "non-.txt input needs an extractor command: " + path);
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw Error("UnreadableFile", "cannot open " + path);
    doc.raw_text = run_extractor(*extractor, path);
  }
  if (trim(doc.raw_text).empty())
    throw Error("EmptyDocument", "no text extracted from " + path);
  return doc;
}

// Split on terminal punctuation (. ! ?) followed by whitespace and a capital
// or digit. Periods after abbreviations, initials, and hypothesis labels
// ("H1.", "Hypothesis 2.") do not split, so a label stays glued to its
// statement. Paragraph breaks (blank lines) always split.
inline std::vector<Sentence> segment_sentences(const Document& doc) {
  if (trim(doc.raw_text).empty())
    throw Error("EmptyDocument", "document has no text: " + doc.doc_id);
  std::vector<Sentence> sentences;
  std::size_t index = 0;
  for (const auto& block : ingest_detail::split_paragraphs(doc.raw_text)) {
    size_t start = 0;
    for (size_t i = 0; i < block.size(); ++i) {
      const char c = block[i];
      if (c != '.' && c != '!' && c != '?') continue;
      // Look past closing quotes/brackets.
      size_t j = i + 1;
      while (j < block.size() &&
             (block[j] == ')' || block[j] == ']' || block[j] == '"' ||
              block[j] == '\''))
        ++j;
      if (j >= block.size()) continue;  // end of block handled below
      if (!std::isspace(static_cast<unsigned char>(block[j]))) continue;
      size_t next = j;
      while (next < block.size() &&
             std::isspace(static_cast<unsigned char>(block[next])))
        ++next;
      if (next >= block.size()) continue;
      const char n = block[next];
      const bool starts_sentence =
          std::isupper(static_cast<unsigned char>(n)) ||
          std::isdigit(static_cast<unsigned char>(n));
      if (!starts_sentence) continue;
      if (c == '.' && ingest_detail::protected_period(block, i)) continue;
      const std::string piece = trim(block.substr(start, j - start));
      if (!piece.empty()) {
        Sentence s;
        s.doc_id = doc.doc_id;
        s.index = index++;
        s.text = piece;
        s.tokens = tokenize(piece);
        sentences.push_back(std::move(s));
      }
      start = next;
      i = next - 1;
    }
    const std::string piece = trim(block.substr(start));
    if (!piece.empty()) {
      Sentence s;
      s.doc_id = doc.doc_id;
      s.index = index++;
      s.text = piece;
      s.tokens = tokenize(piece);
      sentences.push_back(std::move(s));
    }
  }
  return sentences;
}

struct TriggerMatch {
  TriggerKind kind;
  std::string hypothesis_num;
};

// First trigger expression in `text`, if any: "Hypothesis 1", "Proposition 2a",
// "H1", "P.3", case-insensitive, optional punctuation between label and number.
inline std::optional<TriggerMatch> find_trigger(const std::string& text) {
  static const std::regex full_re(
      R"(\b(hypothesis|proposition)[\s:.\-\(\)]{0,3}([0-9]+[a-z]?)\b)",
      std::regex::icase);
  static const std::regex short_re(R"(\b([hp])[:.\-]?([0-9]+[a-z]?)\b)",
                                   std::regex::icase);
  std::smatch m_full, m_short;
  const bool has_full = std::regex_search(text, m_full, full_re);
  const bool has_short = std::regex_search(text, m_short, short_re);
  if (!has_full && !has_short) return std::nullopt;
  // Prefer whichever match occurs first; the long form wins ties.
  bool use_full = has_full;
  if (has_full && has_short && m_short.position(0) < m_full.position(0))
    use_full = false;
  const std::smatch& m = use_full ? m_full : m_short;
  TriggerMatch out;
  const std::string head = to_lower_ascii(m[1].str());
  if (use_full)
    out.kind = head == "hypothesis" ? TriggerKind::hypothesis
                                    : TriggerKind::proposition;
  else
    out.kind = head == "h" ? TriggerKind::h_short : TriggerKind::p_short;
  const char prefix =
      (out.kind == TriggerKind::hypothesis || out.kind == TriggerKind::h_short)
          ? 'h'
          : 'p';
  out.hypothesis_num = std::string(1, prefix) + "_" + to_lower_ascii(m[2].str());
  return out;
}

// Sentences matching a trigger become candidates. A trigger sentence shorter
// than 4 tokens (a bare label like "H1.") absorbs following sentences, up to
// 3 segmented sentences per candidate. Over-extraction is expected; the
// detector filters false positives downstream.
inline std::vector<CandidateSentence> extract_candidates(
    const std::vector<Sentence>& sentences) {
  std::vector<CandidateSentence> out;
  std::size_t i = 0;
  while (i < sentences.size()) {
    const auto trig = find_trigger(sentences[i].text);
    if (!trig) {
      ++i;
      continue;
    }
    Sentence merged = sentences[i];
    std::size_t used = 1;
    while (used < 3 && merged.tokens.size() < 4 && i + used < sentences.size() &&
           sentences[i + used].doc_id == merged.doc_id) {
      merged.text += " " + sentences[i + used].text;
      merged.tokens = tokenize(merged.text);
      ++used;
    }
    CandidateSentence cand;
    cand.sentence = std::move(merged);
    cand.trigger_kind = trig->kind;
    cand.hypothesis_num = trig->hypothesis_num;
    cand.word_count = whitespace_chunks(cand.sentence.text).size();
    out.push_back(std::move(cand));
    i += used;
  }
  return out;
}

// Drop candidates with more than `max_words` whitespace-delimited words;
// keeps relative order.
inline std::vector<CandidateSentence> censor_by_length(
    const std::vector<CandidateSentence>& candidates,
    std::size_t max_words = 60) {
  if (max_words < 1) throw Error("BadMaxWords", "max_words must be >= 1");
  std::vector<CandidateSentence> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates)
    if (c.word_count <= max_words) out.push_back(c);
  return out;
}

inline std::vector<std::string> normalize_tokens(
    const Sentence& sentence, const NormalizeOpts& opts,
    const StopwordSet& stopwords = default_stopwords()) {
  return normalize_tokens(sentence.tokens, opts, stopwords);
}

inline CorpusStats corpus_stats(const std::vector<CandidateSentence>& cands) {
  if (cands.empty()) throw Error("EmptyCorpus", "no candidates");
  CorpusStats stats;
  stats.sentence_count = cands.size();
  double sum = 0.0;
  for (const auto& c : cands) {
    sum += static_cast<double>(c.word_count);
    ++stats.histogram[c.word_count];
  }
  stats.mean_words = sum / static_cast<double>(cands.size());
  double ss = 0.0;
  for (const auto& c : cands) {
    const double d = static_cast<double>(c.word_count) - stats.mean_words;
    ss += d * d;
  }
  stats.sd_words = std::sqrt(ss / static_cast<double>(cands.size()));
  return stats;
}

}  // namespace hypreader
