#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/detector.hpp"
#include "hypreader/ingest.hpp"
#include "hypreader/jsonl.hpp"
#include "hypreader/linker.hpp"
#include "hypreader/tagger.hpp"

namespace hypreader {

// End-to-end batch pipeline: documents in, deconstructed hypothesis table out.

struct HypothesisRecord {
  std::string file_name;
  std::string hypothesis_num;
  std::string hypothesis;   // label stripped, lowercased, single-spaced
  std::string variable_1;
  std::string variable_2;
  Direction direction = Direction::pos;
  int causal_relationship = 0;
};

inline constexpr const char* kCsvHeader =
    "file_name,hypothesis_num,hypothesis,variable_1,variable_2,direction,"
    "causal_relationship";

inline std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

inline std::string records_to_csv(const std::vector<HypothesisRecord>& records) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : records) {
    out += csv_escape(r.file_name);
    out += ',';
    out += csv_escape(r.hypothesis_num);
    out += ',';
    out += csv_escape(r.hypothesis);
    out += ',';
    out += csv_escape(r.variable_1);
    out += ',';
    out += csv_escape(r.variable_2);
    out += ',';
    out += to_string(r.direction);
    out += ',';
    out += std::to_string(r.causal_relationship);
    out += '\n';
  }
  return out;
}

namespace pipeline_detail {

// "h_12a" -> (h, 12, 'a') for natural ordering of hypothesis numbers.
struct NumKey {
  char prefix = 'h';
  long number = 0;
  std::string suffix;
};

inline NumKey parse_num_key(const std::string& num) {
  NumKey key;
  static const std::regex re("^([hp])_([0-9]+)([a-z]?)$");
  std::smatch m;
  if (std::regex_match(num, m, re)) {
    key.prefix = m[1].str()[0];
    key.number = std::stol(m[2].str());
    key.suffix = m[3].str();
  } else {
    key.suffix = num;
  }
  return key;
}

inline bool record_less(const HypothesisRecord& a, const HypothesisRecord& b) {
  if (a.file_name != b.file_name) return a.file_name < b.file_name;
  const auto ka = parse_num_key(a.hypothesis_num);
  const auto kb = parse_num_key(b.hypothesis_num);
  if (ka.prefix != kb.prefix) return ka.prefix < kb.prefix;
  if (ka.number != kb.number) return ka.number < kb.number;
  if (ka.suffix != kb.suffix) return ka.suffix < kb.suffix;
  return a.hypothesis < b.hypothesis;
}

inline std::string collapse_spaces(const std::string& s) {
  std::string out;
  bool in_space = false;
  for (const char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out += ' ';
    in_space = false;
    out += c;
  }
  return out;
}

}  // namespace pipeline_detail

// The exported hypothesis text: leading label stripped, lowercased,
// whitespace collapsed, one trailing terminal mark removed.
inline std::string record_text(const std::string& candidate_text) {
  static const std::regex label_re(
      R"(^\s*(hypothesis|proposition|[hp])[\s:.\-\(\)]{0,3}[0-9]+[a-z]?\s*[:.\-\)]*\s*)",
      std::regex::icase);
  std::string text = std::regex_replace(candidate_text, label_re, "",
                                        std::regex_constants::format_first_only);
  text = pipeline_detail::collapse_spaces(to_lower_ascii(trim(text)));
  while (!text.empty() && (text.back() == '.' || text.back() == '!' ||
                           text.back() == '?')) {
    text.pop_back();
    break;  // strip exactly one terminal mark
  }
  return trim(text);
}

struct PipelineModels {
  DetectorModel detector;
  TaggerModel tagger;
  LinkModel linker;
};

struct DocumentResult {
  std::vector<HypothesisRecord> records;
  std::vector<CandidateSentence> rejected;  // detector-negative candidates
  std::vector<std::string> warnings;
};

// Segment, extract candidates, censor, detect, tag, decode, classify.
// Records with an empty variable keep their row but add an `incomplete`
// warning for stderr.
inline DocumentResult process_document(
    const PipelineModels& models, const Document& doc, double threshold = 0.5,
    std::size_t max_words = 60,
    const StopwordSet& stopwords = default_stopwords()) {
  DocumentResult result;
  const auto sentences = segment_sentences(doc);
  const auto candidates = censor_by_length(extract_candidates(sentences), max_words);
  for (const auto& cand : candidates) {
    const auto det_tokens =
        normalize_tokens(cand.sentence.tokens, NormalizeOpts{true, true, true},
                         stopwords);
    const auto probs = models.detector.probabilities(det_tokens);
    if (!(probs[1] > threshold)) {
      result.rejected.push_back(cand);
      continue;
    }
    HypothesisRecord rec;
    rec.file_name = doc.doc_id;
    rec.hypothesis_num = cand.hypothesis_num;
    rec.hypothesis = record_text(cand.sentence.text);
    if (rec.hypothesis.empty()) {
      result.warnings.push_back(doc.doc_id + " " + cand.hypothesis_num +
                                ": empty hypothesis text after label strip");
      continue;
    }
    const auto hyp_tokens = tokenize(rec.hypothesis);
    if (hyp_tokens.empty()) {
      result.warnings.push_back(doc.doc_id + " " + cand.hypothesis_num +
                                ": no tokens to tag");
      continue;
    }
    const auto tagged = tag(models.tagger, hyp_tokens);
    const auto spans = decode_spans(tagged);
    rec.variable_1 = spans.variable_1;
    rec.variable_2 = spans.variable_2;
    const auto link_tokens =
        normalize_tokens(hyp_tokens, NormalizeOpts{true, true, true}, stopwords);
    const auto link = predict_link(models.linker, link_tokens);
    rec.direction = link.direction;
    rec.causal_relationship = link.causal;
    if (rec.variable_1.empty() || rec.variable_2.empty())
      result.warnings.push_back(doc.doc_id + " " + rec.hypothesis_num +
                                ": incomplete record (empty variable)");
    result.records.push_back(std::move(rec));
  }
  return result;
}

struct RunConfig {
  std::string input_dir;
  std::string output_path;
  std::string detector_path;
  std::string tagger_path;
  std::string linker_path;
  std::optional<std::string> glove_path;  // validated when given; the tagger
                                          // container already embeds vectors
  std::optional<std::string> extractor;   // command template for non-.txt input
  std::optional<std::string> dump_rejected_path;
  std::optional<std::string> stopwords_path;
  double threshold = 0.5;
  std::size_t max_words = 60;
  std::uint64_t seed = 1;  // the pipeline itself is deterministic; recorded
                           // for provenance in logs
};

struct RunResult {
  std::size_t documents = 0;
  std::size_t failed_documents = 0;
  std::size_t records = 0;
  std::size_t incomplete_records = 0;
  std::vector<std::string> warnings;
  std::string csv;
};

inline std::vector<std::string> list_input_files(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(cfg.input_dir))
    throw Error("UnreadableInput", "not a directory: " + cfg.input_dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(cfg.input_dir)) {
    if (!entry.is_regular_file()) continue;
    const auto path = entry.path().string();
    if (has_txt_extension(path) || cfg.extractor) paths.push_back(path);
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

// Documents are processed by parallel workers over read-only shared models;
// rows are buffered and emitted in deterministic sorted order. A document
// failure warns and continues; it never aborts the batch.
inline RunResult run_pipeline(const PipelineModels& models, const RunConfig& cfg) {
  RunResult result;
  const auto paths = list_input_files(cfg);
  result.documents = paths.size();
  const StopwordSet stopwords = cfg.stopwords_path
                                    ? load_stopwords(*cfg.stopwords_path)
                                    : default_stopwords();
  if (cfg.glove_path) load_glove(*cfg.glove_path);  // existence/format check

  struct DocOutcome {
    DocumentResult result;
    std::optional<std::string> failure;
  };
  std::vector<DocOutcome> outcomes(paths.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(
          paths.size(), std::thread::hardware_concurrency()));
  std::atomic<std::size_t> cursor{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= paths.size()) return;
      try {
        const auto doc = load_document(paths[i], cfg.extractor);
        outcomes[i].result = process_document(models, doc, cfg.threshold,
                                              cfg.max_words, stopwords);
      } catch (const std::exception& e) {
        outcomes[i].failure = std::string(e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w + 1 < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::vector<HypothesisRecord> records;
  std::vector<CandidateSentence> rejected;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    auto& out = outcomes[i];
    if (out.failure) {
      ++result.failed_documents;
      result.warnings.push_back("document failed: " + paths[i] + ": " +
                                *out.failure);
      continue;
    }
    for (auto& w : out.result.warnings) {
      if (w.find("incomplete record") != std::string::npos)
        ++result.incomplete_records;
      result.warnings.push_back(std::move(w));
    }
    for (auto& r : out.result.records) records.push_back(std::move(r));
    for (auto& r : out.result.rejected) rejected.push_back(std::move(r));
  }
  std::stable_sort(records.begin(), records.end(), pipeline_detail::record_less);
  result.records = records.size();
  result.csv = records_to_csv(records);
  if (!cfg.output_path.empty()) write_file(cfg.output_path, result.csv);
  if (cfg.dump_rejected_path) {
    std::stable_sort(rejected.begin(), rejected.end(),
                     [](const CandidateSentence& a, const CandidateSentence& b) {
                       if (a.sentence.doc_id != b.sentence.doc_id)
                         return a.sentence.doc_id < b.sentence.doc_id;
                       return a.sentence.index < b.sentence.index;
                     });
    write_file(*cfg.dump_rejected_path, candidates_to_jsonl(rejected));
  }
  return result;
}

inline PipelineModels load_pipeline_models(const std::string& detector_path,
                                           const std::string& tagger_path,
                                           const std::string& linker_path) {
  PipelineModels models;
  models.detector = load_detector(detector_path);
  models.tagger = load_tagger(tagger_path);
  models.linker = load_link_model(linker_path);
  return models;
}

}  // namespace hypreader
