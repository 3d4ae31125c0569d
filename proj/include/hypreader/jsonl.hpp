#pragma once

#include <string>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/detector.hpp"
#include "hypreader/ingest.hpp"
#include "hypreader/linker.hpp"
#include "hypreader/tagger.hpp"
#include "hypreader/text.hpp"

#include "json.hpp"

namespace hypreader {

// JSONL data files: one UTF-8 JSON object per LF-terminated line.

namespace jsonl_detail {

template <typename Fn>
void for_each_object(const std::string& path, Fn&& fn) {
  const std::string content = read_file(path);
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw Error("BadJsonl",
                  path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    try {
      fn(obj);
    } catch (const nlohmann::json::exception& e) {
      throw Error("BadJsonl",
                  path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace jsonl_detail

// Detector/linker features share the ingest normalization policy: lowercase,
// punctuation stripped, stop-words removed.
inline std::vector<std::string> classifier_tokens(
    const std::string& text, const StopwordSet& stopwords = default_stopwords()) {
  return normalize_tokens(tokenize(text), NormalizeOpts{true, true, true},
                          stopwords);
}

// {"text": ..., "label": 0|1}
inline std::vector<LabeledSentence> read_labeled_sentences(
    const std::string& path, const StopwordSet& stopwords = default_stopwords()) {
  std::vector<LabeledSentence> out;
  jsonl_detail::for_each_object(path, [&](const nlohmann::json& obj) {
    LabeledSentence s;
    s.tokens = classifier_tokens(obj.at("text").get<std::string>(), stopwords);
    s.label = obj.at("label").get<int>();
    out.push_back(std::move(s));
  });
  return out;
}

// {"tokens": [...], "tags": [0,1,2,...]}
inline std::vector<TagSequence> read_tag_sequences(const std::string& path) {
  std::vector<TagSequence> out;
  jsonl_detail::for_each_object(path, [&](const nlohmann::json& obj) {
    TagSequence ts;
    ts.tokens = obj.at("tokens").get<std::vector<std::string>>();
    ts.tags = obj.at("tags").get<std::vector<int>>();
    out.push_back(std::move(ts));
  });
  return out;
}

// {"text": ..., "causal": 0|1, "direction": "pos"|"neg"|"non_lin"}
inline std::vector<LinkExample> read_link_examples(
    const std::string& path, const StopwordSet& stopwords = default_stopwords()) {
  std::vector<LinkExample> out;
  jsonl_detail::for_each_object(path, [&](const nlohmann::json& obj) {
    LinkExample e;
    e.tokens = classifier_tokens(obj.at("text").get<std::string>(), stopwords);
    e.causal = obj.at("causal").get<int>();
    e.direction = direction_from_string(obj.at("direction").get<std::string>());
    out.push_back(std::move(e));
  });
  return out;
}

inline std::string candidates_to_jsonl(
    const std::vector<CandidateSentence>& candidates) {
  std::string out;
  for (const auto& c : candidates) {
    const nlohmann::json obj = {{"doc_id", c.sentence.doc_id},
                                {"sentence_index", c.sentence.index},
                                {"hypothesis_num", c.hypothesis_num},
                                {"text", c.sentence.text}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

}  // namespace hypreader
