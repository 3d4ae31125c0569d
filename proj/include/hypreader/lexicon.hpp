#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/porter.hpp"

#include "json.hpp"

namespace hypreader {

// Pre-trained word vectors in GloVe text format: one entry per line,
// "token v1 ... vd", single-space separated.
class WordVectorTable {
 public:
  WordVectorTable() = default;
  WordVectorTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }

  void insert(const std::string& token, std::vector<double> values) {
    if (dim_ == 0) dim_ = values.size();
    if (values.size() != dim_)
      throw Error("DimensionMismatch",
                  "vector for '" + token + "' has length " +
                      std::to_string(values.size()) + ", expected " +
                      std::to_string(dim_));
    if (index_.count(token))
      throw Error("DuplicateToken", "duplicate entry '" + token + "'");
    index_.emplace(token, data_.size() / std::max<std::size_t>(dim_, 1));
    data_.insert(data_.end(), values.begin(), values.end());
  }

  const double* find(const std::string& token) const {
    const auto it = index_.find(token);
    if (it == index_.end()) return nullptr;
    return data_.data() + it->second * dim_;
  }

  bool contains(const std::string& token) const { return index_.count(token); }

  // Tokens in lexicographic order (deterministic embedding layout).
  std::vector<std::string> sorted_tokens() const {
    std::vector<std::string> tokens;
    tokens.reserve(index_.size());
    for (const auto& [t, _] : index_) tokens.push_back(t);
    std::sort(tokens.begin(), tokens.end());
    return tokens;
  }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

inline WordVectorTable load_glove(const std::string& path) {
  const std::string content = read_file(path);
  WordVectorTable table;
  std::size_t line_no = 0;
  for (const auto& line : split_lines(content)) {
    ++line_no;
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos)
      throw Error("BadGloveLine",
                  path + ":" + std::to_string(line_no) + ": no vector values");
    const std::string token = line.substr(0, sp);
    std::vector<double> values;
    size_t pos = sp + 1;
    while (pos < line.size()) {
      size_t end = line.find(' ', pos);
      if (end == std::string::npos) end = line.size();
      const std::string field = line.substr(pos, end - pos);
      if (!field.empty()) {
        try {
          std::size_t used = 0;
          const double v = std::stod(field, &used);
          if (used != field.size()) throw std::invalid_argument(field);
          values.push_back(v);
        } catch (const std::exception&) {
          throw Error("BadGloveLine", path + ":" + std::to_string(line_no) +
                                          ": non-numeric field '" + field + "'");
        }
      }
      pos = end + 1;
    }
    if (values.empty())
      throw Error("BadGloveLine",
                  path + ":" + std::to_string(line_no) + ": no vector values");
    try {
      table.insert(token, std::move(values));
    } catch (const Error& e) {
      throw Error(e.code(), path + ":" + std::to_string(line_no) + ": " +
                                e.what());
    }
  }
  return table;
}

// Component-wise mean of per-token vectors. Out-of-vocabulary tokens
// contribute the zero vector and are counted in the denominator, so sentence
// embeddings stay length-sensitive.
inline std::vector<double> embed_sentence(const WordVectorTable& table,
                                          const std::vector<std::string>& tokens) {
  std::vector<double> mean(table.dim(), 0.0);
  if (tokens.empty() || table.dim() == 0) return mean;
  for (const auto& t : tokens) {
    if (const double* v = table.find(t))
      for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& x : mean) x *= inv;
  return mean;
}

inline std::size_t count_known(const WordVectorTable& table,
                               const std::vector<std::string>& tokens) {
  std::size_t n = 0;
  for (const auto& t : tokens)
    if (table.contains(t)) ++n;
  return n;
}

enum class VocabNormalization { none, stem };

struct VocabEntry {
  std::size_t id = 0;
  std::size_t doc_freq = 0;
  std::size_t corpus_freq = 0;
};

// N-gram vocabulary over a token corpus. Ids are dense 0..size-1 assigned in
// lexicographic order of the n-gram string, so rebuilding from the same corpus
// yields identical ids.
struct Vocabulary {
  int max_n = 1;
  VocabNormalization normalization = VocabNormalization::none;
  std::map<std::string, VocabEntry> entries;

  std::size_t size() const { return entries.size(); }
};

namespace lexicon_detail {

inline std::vector<std::string> apply_normalization(
    const std::vector<std::string>& tokens, VocabNormalization norm) {
  if (norm == VocabNormalization::none) return tokens;
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(porter_stem(t));
  return out;
}

template <typename Fn>
void for_each_ngram(const std::vector<std::string>& tokens, int max_n, Fn&& fn) {
  for (int n = 1; n <= max_n; ++n) {
    if (tokens.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size();
         ++i) {
      std::string gram = tokens[i];
      for (int k = 1; k < n; ++k) {
        gram += ' ';
        gram += tokens[i + static_cast<std::size_t>(k)];
      }
      fn(gram);
    }
  }
}

}  // namespace lexicon_detail

inline Vocabulary build_vocabulary(
    const std::vector<std::vector<std::string>>& corpus, int max_n,
    std::size_t min_count = 1,
    VocabNormalization normalization = VocabNormalization::none) {
  if (corpus.empty()) throw Error("EmptyCorpus", "no sentences");
  if (max_n < 1 || max_n > 3)
    throw Error("BadNgramOrder", "max_n must be 1, 2 or 3");
  Vocabulary vocab;
  vocab.max_n = max_n;
  vocab.normalization = normalization;
  std::map<std::string, std::pair<std::size_t, std::size_t>> freq;  // corpus, doc
  std::map<std::string, std::size_t> seen_in_doc;
  for (const auto& raw_tokens : corpus) {
    const auto tokens =
        lexicon_detail::apply_normalization(raw_tokens, normalization);
    seen_in_doc.clear();
    lexicon_detail::for_each_ngram(tokens, max_n, [&](const std::string& g) {
      ++freq[g].first;
      ++seen_in_doc[g];
    });
    for (const auto& [g, _] : seen_in_doc) ++freq[g].second;
  }
  std::size_t next_id = 0;
  for (const auto& [gram, counts] : freq) {
    if (counts.first < min_count) continue;
    vocab.entries.emplace(gram,
                          VocabEntry{next_id++, counts.second, counts.first});
  }
  return vocab;
}

// Sparse n-gram counts; in std::map so iteration order is id-independent
// deterministic.
struct BowVector {
  std::map<std::size_t, std::size_t> counts;

  // L2-normalized weights; empty vector when there are no counts.
  std::vector<std::pair<std::size_t, double>> l2_normalized() const {
    std::vector<std::pair<std::size_t, double>> out;
    double ss = 0.0;
    for (const auto& [id, c] : counts) ss += static_cast<double>(c) * c;
    if (ss <= 0.0) return out;
    const double inv = 1.0 / std::sqrt(ss);
    out.reserve(counts.size());
    for (const auto& [id, c] : counts)
      out.emplace_back(id, static_cast<double>(c) * inv);
    return out;
  }
};

inline BowVector bow_vector(const Vocabulary& vocab,
                            const std::vector<std::string>& raw_tokens) {
  BowVector bow;
  const auto tokens =
      lexicon_detail::apply_normalization(raw_tokens, vocab.normalization);
  lexicon_detail::for_each_ngram(tokens, vocab.max_n, [&](const std::string& g) {
    const auto it = vocab.entries.find(g);
    if (it != vocab.entries.end()) ++bow.counts[it->second.id];
  });
  return bow;
}

inline nlohmann::json vocabulary_to_json(const Vocabulary& vocab) {
  nlohmann::json entries = nlohmann::json::array();
  std::vector<const std::pair<const std::string, VocabEntry>*> order;
  order.reserve(vocab.entries.size());
  for (const auto& kv : vocab.entries) order.push_back(&kv);
  std::sort(order.begin(), order.end(),
            [](const auto* a, const auto* b) { return a->second.id < b->second.id; });
  for (const auto* kv : order) {
    entries.push_back({{"ngram", kv->first},
                       {"id", kv->second.id},
                       {"corpus_freq", kv->second.corpus_freq}});
  }
  return {{"max_n", vocab.max_n},
          {"normalization",
           vocab.normalization == VocabNormalization::stem ? "stem" : "none"},
          {"entries", entries}};
}

inline Vocabulary vocabulary_from_json(const nlohmann::json& j) {
  Vocabulary vocab;
  vocab.max_n = j.at("max_n").get<int>();
  const auto norm = j.at("normalization").get<std::string>();
  vocab.normalization =
      norm == "stem" ? VocabNormalization::stem : VocabNormalization::none;
  for (const auto& e : j.at("entries")) {
    VocabEntry entry;
    entry.id = e.at("id").get<std::size_t>();
    entry.corpus_freq = e.at("corpus_freq").get<std::size_t>();
    vocab.entries.emplace(e.at("ngram").get<std::string>(), entry);
  }
  return vocab;
}

}  // namespace hypreader
