#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/rng.hpp"

#include "json.hpp"

namespace hypreader {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

// F-1 is the harmonic mean of precision and recall; defined as 0 when both
// are 0.
inline double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  if (denom <= 0.0) return 0.0;
  return 2.0 * precision * recall / denom;
}

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

template <typename T>
ConfusionCounts confusion_counts(const std::vector<T>& preds,
                                 const std::vector<T>& golds,
                                 const T& positive_class) {
  if (preds.size() != golds.size())
    throw Error("LengthMismatch", "preds and golds differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == positive_class;
    const bool g = golds[i] == positive_class;
    if (p && g) ++c.tp;
    else if (p && !g) ++c.fp;
    else if (!p && g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

inline Metrics metrics_from_counts(const ConfusionCounts& c) {
  Metrics m;
  m.support = c.tp + c.fn;
  const std::size_t total = c.tp + c.fp + c.fn + c.tn;
  m.accuracy = total ? static_cast<double>(c.tp + c.tn) / total : 0.0;
  m.precision = (c.tp + c.fp) ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
  m.recall = (c.tp + c.fn) ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
  m.f1 = f1_score(m.precision, m.recall);
  return m;
}

template <typename T>
Metrics binary_metrics(const std::vector<T>& preds, const std::vector<T>& golds,
                       const T& positive_class) {
  return metrics_from_counts(confusion_counts(preds, golds, positive_class));
}

// Micro average: pool confusion counts over classes, then compute metrics.
inline Metrics micro_average(const std::vector<ConfusionCounts>& per_class) {
  ConfusionCounts pooled;
  for (const auto& c : per_class) {
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    pooled.tn += c.tn;
  }
  return metrics_from_counts(pooled);
}

// Macro average: unweighted mean of per-class precision/recall/F-1.
inline Metrics macro_average(const std::vector<Metrics>& per_class) {
  Metrics m;
  if (per_class.empty()) return m;
  for (const auto& c : per_class) {
    m.precision += c.precision;
    m.recall += c.recall;
    m.f1 += c.f1;
    m.accuracy += c.accuracy;
    m.support += c.support;
  }
  const double n = static_cast<double>(per_class.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  m.accuracy /= n;
  return m;
}

// Support-weighted mean of per-class metrics.
inline Metrics weighted_average(const std::vector<Metrics>& per_class) {
  Metrics m;
  std::size_t total = 0;
  for (const auto& c : per_class) total += c.support;
  if (total == 0) return m;
  for (const auto& c : per_class) {
    const double w = static_cast<double>(c.support) / total;
    m.precision += w * c.precision;
    m.recall += w * c.recall;
    m.f1 += w * c.f1;
  }
  m.support = total;
  return m;
}

struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;  // item index -> fold id
  bool stratified = false;
  std::uint64_t seed = 0;
  std::string prng = Rng::kAlgorithm;

  std::vector<std::size_t> fold_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> complement_indices(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(i);
    return out;
  }
};

// Seeded shuffle then round-robin assignment; fold sizes differ by at most 1.
inline FoldPlan kfold(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw Error("BadFoldCount", "k must be >= 2");
  if (n < static_cast<std::size_t>(k))
    throw Error("BadFoldCount", "n < k");
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  Rng rng(seed);
  const auto order = rng.permutation(n);
  for (std::size_t i = 0; i < n; ++i)
    plan.assignments[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return plan;
}

// Stratified variant: within each class the fold counts differ by at most 1
// from proportionality, and total fold sizes differ by at most 1 (classes are
// assigned cyclically, carrying the fold offset from one class to the next).
template <typename L>
FoldPlan stratified_kfold(const std::vector<L>& labels, int k,
                          std::uint64_t seed) {
  if (k < 2) throw Error("BadFoldCount", "k must be >= 2");
  if (labels.size() < static_cast<std::size_t>(k))
    throw Error("BadFoldCount", "n < k");
  std::map<L, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    by_class[labels[i]].push_back(i);
  for (const auto& [label, ids] : by_class) {
    if (ids.size() < static_cast<std::size_t>(k))
      throw Error("ClassTooSmall",
                  "a class has fewer members than the fold count");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratified = true;
  plan.assignments.assign(labels.size(), 0);
  Rng rng(seed);
  int offset = 0;
  for (auto& [label, ids] : by_class) {
    rng.shuffle(ids);
    for (std::size_t j = 0; j < ids.size(); ++j)
      plan.assignments[ids[j]] =
          static_cast<int>((offset + static_cast<int>(j)) % k);
    offset = (offset + static_cast<int>(ids.size() % static_cast<std::size_t>(k))) % k;
  }
  return plan;
}

struct HoldoutSplit {
  std::vector<std::size_t> train_ids;
  std::vector<std::size_t> test_ids;
};

// Metric tables mirroring the columns of the published evaluations:
// Model, Feature Normalization, Accuracy, Precision, Recall, F1-Score.
struct ReportRow {
  std::string model;
  std::string normalization;
  Metrics metrics;
};

inline std::string metrics_report_table(const std::vector<ReportRow>& rows) {
  std::string out =
      "Model                                    Feature Normalization  "
      "Accuracy  Precision  Recall  F1-Score\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%-40s %-22s %7.1f%% %9.1f%% %6.1f%% %8.1f%%\n",
                  r.model.c_str(), r.normalization.c_str(),
                  100.0 * r.metrics.accuracy, 100.0 * r.metrics.precision,
                  100.0 * r.metrics.recall, 100.0 * r.metrics.f1);
    out += buf;
  }
  return out;
}

inline std::string metrics_report_csv(const std::vector<ReportRow>& rows) {
  std::string out =
      "Model,Feature Normalization,Accuracy,Precision,Recall,F1-Score\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "\"%s\",%s,%.4f,%.4f,%.4f,%.4f\n",
                  r.model.c_str(), r.normalization.c_str(), r.metrics.accuracy,
                  r.metrics.precision, r.metrics.recall, r.metrics.f1);
    out += buf;
  }
  return out;
}

inline nlohmann::json metrics_report_json(const std::vector<ReportRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"model", r.model},
                   {"feature_normalization", r.normalization},
                   {"accuracy", r.metrics.accuracy},
                   {"precision", r.metrics.precision},
                   {"recall", r.metrics.recall},
                   {"f1_score", r.metrics.f1}});
  }
  return arr;
}

// Disjoint, exhaustive, seeded split with round(fraction * n) training items
// (clamped so both sides are nonempty).
inline HoldoutSplit holdout_split(std::size_t n, double train_fraction,
                                  std::uint64_t seed) {
  if (n < 2) throw Error("DegenerateSplit", "need at least 2 items");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error("BadFraction", "train fraction must lie in (0, 1)");
  auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::min(std::max<std::size_t>(n_train, 1), n - 1);
  Rng rng(seed);
  const auto order = rng.permutation(n);
  HoldoutSplit split;
  split.train_ids.assign(order.begin(),
                         order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test_ids.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                        order.end());
  return split;
}

}  // namespace hypreader
