#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/evalkit.hpp"
#include "hypreader/rng.hpp"
#include "hypreader/serialize.hpp"

namespace hypreader {

// Task 1: fastText-style supervised classifier. The averaged n-gram embedding
// is the hidden layer; a linear output head scores the two labels. Uni-grams
// index embedding rows directly, higher-order word n-grams are FNV-1a-hashed
// into `bucket_count` buckets.

enum class DetectorLoss { softmax, negative_sampling };

struct DetectorConfig {
  int ngram = 1;                 // word n-gram order (1, 2 or 5 in the tables)
  double lr = 0.3;
  int dim = 120;
  DetectorLoss loss = DetectorLoss::negative_sampling;
  int epochs = 5;
  int neg_samples = 5;
  std::int64_t bucket_count = 2000003;  // prime
  std::uint64_t seed = 1;

  void validate() const {
    if (lr <= 0) throw Error("BadConfig", "lr must be > 0");
    if (dim < 1) throw Error("BadConfig", "dim must be >= 1");
    if (epochs < 1) throw Error("BadConfig", "epochs must be >= 1");
    if (ngram < 1) throw Error("BadConfig", "ngram must be >= 1");
    if (loss == DetectorLoss::negative_sampling && neg_samples < 1)
      throw Error("BadConfig", "neg_samples must be >= 1 for negative sampling");
    if (ngram > 1 && bucket_count < 1)
      throw Error("BadConfig", "bucket_count must be >= 1 for n-grams");
  }
};

struct LabeledSentence {
  std::vector<std::string> tokens;  // already normalized
  int label = 0;                    // 0 or 1
};

struct Prediction {
  int label = 0;
  double prob = 0.5;  // probability of the predicted label
};

namespace detector_detail {

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace detector_detail

class DetectorModel {
 public:
  DetectorConfig config;
  std::map<std::string, std::size_t> vocab;  // token -> embedding row
  std::vector<double> input;    // (nwords + buckets) x dim, row-major
  std::vector<double> output;   // 2 x dim
  std::vector<double> epoch_mean_loss;  // training diagnostics, not serialized
  std::size_t label_counts[2] = {0, 0};

  std::size_t rows() const {
    return vocab.size() +
           (config.ngram > 1 ? static_cast<std::size_t>(config.bucket_count)
                             : 0);
  }

  // Embedding row ids for a token sequence: known uni-grams plus hashed
  // higher-order n-grams over the full token sequence.
  std::vector<std::size_t> line_ids(const std::vector<std::string>& tokens) const {
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size() * static_cast<std::size_t>(config.ngram));
    for (const auto& t : tokens) {
      const auto it = vocab.find(t);
      if (it != vocab.end()) ids.push_back(it->second);
    }
    if (config.ngram > 1) {
      for (int n = 2; n <= config.ngram; ++n) {
        if (tokens.size() < static_cast<std::size_t>(n)) break;
        for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size();
             ++i) {
          std::string gram = tokens[i];
          for (int k = 1; k < n; ++k) {
            gram += ' ';
            gram += tokens[i + static_cast<std::size_t>(k)];
          }
          const auto h = detector_detail::fnv1a(gram) %
                         static_cast<std::uint64_t>(config.bucket_count);
          ids.push_back(vocab.size() + static_cast<std::size_t>(h));
        }
      }
    }
    return ids;
  }

  std::vector<double> hidden(const std::vector<std::size_t>& ids) const {
    std::vector<double> h(static_cast<std::size_t>(config.dim), 0.0);
    if (ids.empty()) return h;
    for (const auto id : ids) {
      const double* row = input.data() + id * static_cast<std::size_t>(config.dim);
      for (int d = 0; d < config.dim; ++d) h[static_cast<std::size_t>(d)] += row[d];
    }
    const double inv = 1.0 / static_cast<double>(ids.size());
    for (double& x : h) x *= inv;
    return h;
  }

  // Softmax probabilities over the two labels; equal scores give (0.5, 0.5).
  std::array<double, 2> probabilities(const std::vector<std::string>& tokens) const {
    const auto ids = line_ids(tokens);
    if (ids.empty()) return {0.5, 0.5};
    const auto h = hidden(ids);
    double s[2] = {0.0, 0.0};
    for (int c = 0; c < 2; ++c) {
      const double* w = output.data() + static_cast<std::size_t>(c * config.dim);
      for (int d = 0; d < config.dim; ++d) s[c] += w[d] * h[static_cast<std::size_t>(d)];
    }
    const double mx = std::max(s[0], s[1]);
    const double e0 = std::exp(s[0] - mx);
    const double e1 = std::exp(s[1] - mx);
    const double z = e0 + e1;
    return {e0 / z, e1 / z};
  }
};

// Deterministic prediction; ties break toward label 0. An empty token list is
// the degenerate case: label 0 at probability 0.5.
inline Prediction predict(const DetectorModel& model,
                          const std::vector<std::string>& tokens) {
  const auto p = model.probabilities(tokens);
  Prediction pred;
  pred.label = p[1] > p[0] ? 1 : 0;
  pred.prob = p[pred.label];
  return pred;
}

namespace detector_detail {

// Softmax cross-entropy loss and gradient step shared by training and the
// finite-difference tests. Returns the loss; fills grad_hidden (dL/dh) and
// grad_output (dL/dO, 2 x dim) without applying updates.
inline double softmax_loss_grads(const DetectorModel& model,
                                 const std::vector<double>& h, int label,
                                 std::vector<double>& grad_hidden,
                                 std::vector<double>& grad_output) {
  const int dim = model.config.dim;
  double s[2] = {0.0, 0.0};
  for (int c = 0; c < 2; ++c) {
    const double* w = model.output.data() + static_cast<std::size_t>(c * dim);
    for (int d = 0; d < dim; ++d) s[c] += w[d] * h[static_cast<std::size_t>(d)];
  }
  const double mx = std::max(s[0], s[1]);
  const double e0 = std::exp(s[0] - mx);
  const double e1 = std::exp(s[1] - mx);
  const double z = e0 + e1;
  const double p[2] = {e0 / z, e1 / z};
  grad_hidden.assign(static_cast<std::size_t>(dim), 0.0);
  grad_output.assign(static_cast<std::size_t>(2 * dim), 0.0);
  for (int c = 0; c < 2; ++c) {
    const double g = p[c] - (c == label ? 1.0 : 0.0);
    const double* w = model.output.data() + static_cast<std::size_t>(c * dim);
    double* go = grad_output.data() + static_cast<std::size_t>(c * dim);
    for (int d = 0; d < dim; ++d) {
      go[d] = g * h[static_cast<std::size_t>(d)];
      grad_hidden[static_cast<std::size_t>(d)] += g * w[d];
    }
  }
  return -std::log(std::max(p[label], 1e-300));
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Binary-logistic negative-sampling loss: the true label is a positive
// example, `neg_samples` draws from the label distribution (rejecting the
// true label) are negatives. With two classes this reduces to logistic loss
// against the opposite label.
inline double negative_sampling_loss_grads(const DetectorModel& model,
                                           const std::vector<double>& h,
                                           int label, Rng& rng,
                                           std::vector<double>& grad_hidden,
                                           std::vector<double>& grad_output) {
  const int dim = model.config.dim;
  grad_hidden.assign(static_cast<std::size_t>(dim), 0.0);
  grad_output.assign(static_cast<std::size_t>(2 * dim), 0.0);
  double loss = 0.0;
  const std::size_t total = model.label_counts[0] + model.label_counts[1];
  auto update_pair = [&](int target_label, double target) {
    const double* w =
        model.output.data() + static_cast<std::size_t>(target_label * dim);
    double score = 0.0;
    for (int d = 0; d < dim; ++d) score += w[d] * h[static_cast<std::size_t>(d)];
    const double p = sigmoid(score);
    const double g = p - target;
    double* go = grad_output.data() + static_cast<std::size_t>(target_label * dim);
    for (int d = 0; d < dim; ++d) {
      go[d] += g * h[static_cast<std::size_t>(d)];
      grad_hidden[static_cast<std::size_t>(d)] += g * w[d];
    }
    return target > 0.5 ? -std::log(std::max(p, 1e-300))
                        : -std::log(std::max(1.0 - p, 1e-300));
  };
  loss += update_pair(label, 1.0);
  for (int s = 0; s < model.config.neg_samples; ++s) {
    int neg = label;
    while (neg == label) {
      const std::uint64_t r = rng.bounded(total);
      neg = r < model.label_counts[0] ? 0 : 1;
    }
    loss += update_pair(neg, 0.0);
  }
  return loss;
}

}  // namespace detector_detail

// SGD training over shuffled sentences with a linear learning-rate decay from
// cfg.lr to 0 over the total number of updates. Same (corpus, cfg, seed)
// yields a byte-identical serialized model.
inline DetectorModel train_detector(const std::vector<LabeledSentence>& corpus,
                                    const DetectorConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw Error("EmptyCorpus", "no training sentences");
  DetectorModel model;
  model.config = cfg;
  for (const auto& s : corpus) {
    if (s.label != 0 && s.label != 1)
      throw Error("BadLabel", "labels must be 0 or 1");
    ++model.label_counts[s.label];
  }
  if (model.label_counts[0] == 0 || model.label_counts[1] == 0)
    throw Error("SingleClass", "training corpus must contain both labels");

  std::size_t next = 0;
  for (const auto& s : corpus)
    for (const auto& t : s.tokens)
      if (model.vocab.emplace(t, 0).second) ++next;
  // Lexicographic ids (std::map iterates sorted).
  next = 0;
  for (auto& [token, id] : model.vocab) id = next++;

  const std::size_t rows = model.rows();
  const std::size_t dim = static_cast<std::size_t>(cfg.dim);
  model.input.assign(rows * dim, 0.0);
  model.output.assign(2 * dim, 0.0);
  Rng rng(cfg.seed);
  const double bound = 1.0 / static_cast<double>(cfg.dim);
  for (double& x : model.input) x = rng.uniform(-bound, bound);

  // Precompute line ids once; they do not change during training.
  std::vector<std::vector<std::size_t>> lines(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i)
    lines[i] = model.line_ids(corpus[i].tokens);

  const double total_updates =
      static_cast<double>(cfg.epochs) * static_cast<double>(corpus.size());
  double seen = 0.0;
  std::vector<double> grad_hidden, grad_output;
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t loss_n = 0;
    for (const auto idx : order) {
      const double lr =
          cfg.lr * std::max(0.0, 1.0 - seen / total_updates);
      seen += 1.0;
      const auto& ids = lines[idx];
      if (ids.empty()) continue;
      const auto h = model.hidden(ids);
      double loss;
      if (cfg.loss == DetectorLoss::softmax)
        loss = detector_detail::softmax_loss_grads(model, h, corpus[idx].label,
                                                   grad_hidden, grad_output);
      else
        loss = detector_detail::negative_sampling_loss_grads(
            model, h, corpus[idx].label, rng, grad_hidden, grad_output);
      loss_sum += loss;
      ++loss_n;
      for (std::size_t i = 0; i < 2 * dim; ++i)
        model.output[i] -= lr * grad_output[i];
      const double scale = lr / static_cast<double>(ids.size());
      for (const auto id : ids) {
        double* row = model.input.data() + id * dim;
        for (std::size_t d = 0; d < dim; ++d) row[d] -= scale * grad_hidden[d];
      }
    }
    model.epoch_mean_loss.push_back(loss_n ? loss_sum / loss_n : 0.0);
  }
  return model;
}

constexpr const char* kDetectorMagic = "HYPODETECT";
constexpr int kDetectorVersion = 1;

inline void save_detector(const DetectorModel& model, const std::string& path) {
  ModelContainer mc;
  mc.magic = kDetectorMagic;
  nlohmann::json vocab = nlohmann::json::array();
  for (const auto& [token, id] : model.vocab) vocab.push_back(token);
  mc.header = {
      {"version", kDetectorVersion},
      {"config",
       {{"ngram", model.config.ngram},
        {"lr", model.config.lr},
        {"dim", model.config.dim},
        {"loss", model.config.loss == DetectorLoss::softmax
                     ? "softmax"
                     : "negative_sampling"},
        {"epochs", model.config.epochs},
        {"neg_samples", model.config.neg_samples},
        {"bucket_count", model.config.bucket_count},
        {"seed", model.config.seed}}},
      {"label_counts", {model.label_counts[0], model.label_counts[1]}},
      {"vocab", vocab}};
  append_f32(mc.payload, model.input);
  append_f32(mc.payload, model.output);
  write_container(path, mc);
}

inline DetectorModel load_detector(const std::string& path) {
  const auto mc = read_container(path, kDetectorMagic, kDetectorVersion);
  DetectorModel model;
  const auto& cfg = mc.header.at("config");
  model.config.ngram = cfg.at("ngram").get<int>();
  model.config.lr = cfg.at("lr").get<double>();
  model.config.dim = cfg.at("dim").get<int>();
  model.config.loss = cfg.at("loss").get<std::string>() == "softmax"
                          ? DetectorLoss::softmax
                          : DetectorLoss::negative_sampling;
  model.config.epochs = cfg.at("epochs").get<int>();
  model.config.neg_samples = cfg.at("neg_samples").get<int>();
  model.config.bucket_count = cfg.at("bucket_count").get<std::int64_t>();
  model.config.seed = cfg.at("seed").get<std::uint64_t>();
  model.label_counts[0] = mc.header.at("label_counts")[0].get<std::size_t>();
  model.label_counts[1] = mc.header.at("label_counts")[1].get<std::size_t>();
  std::size_t id = 0;
  for (const auto& t : mc.header.at("vocab"))
    model.vocab.emplace(t.get<std::string>(), id++);
  size_t cursor = 0;
  const std::size_t dim = static_cast<std::size_t>(model.config.dim);
  model.input = take_f64(mc.payload, cursor, model.rows() * dim);
  model.output = take_f64(mc.payload, cursor, 2 * dim);
  return model;
}

struct CvResult {
  std::vector<Metrics> per_fold;
  Metrics mean;    // fold metrics averaged with equal weight
  Metrics pooled;  // metrics over predictions pooled across folds
};

// K-fold cross-validation of the detector (positive class = 1). Also usable
// for the paper's single 75/25 split through `holdout_evaluate_detector`.
inline CvResult cross_validate_detector(const std::vector<LabeledSentence>& corpus,
                                        const DetectorConfig& cfg, int k = 10) {
  if (k < 2) throw Error("BadFoldCount", "k must be >= 2");
  if (corpus.size() < static_cast<std::size_t>(k))
    throw Error("BadFoldCount", "corpus smaller than fold count");
  const auto plan = kfold(corpus.size(), k, cfg.seed);
  CvResult result;
  std::vector<int> pooled_preds, pooled_golds;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<LabeledSentence> train;
    for (const auto i : plan.complement_indices(fold)) train.push_back(corpus[i]);
    DetectorConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + static_cast<std::uint64_t>(fold) + 1;
    const auto model = train_detector(train, fold_cfg);
    std::vector<int> preds, golds;
    for (const auto i : plan.fold_indices(fold)) {
      preds.push_back(predict(model, corpus[i].tokens).label);
      golds.push_back(corpus[i].label);
      pooled_preds.push_back(preds.back());
      pooled_golds.push_back(golds.back());
    }
    result.per_fold.push_back(binary_metrics(preds, golds, 1));
  }
  double acc = 0, p = 0, r = 0, f = 0;
  for (const auto& m : result.per_fold) {
    acc += m.accuracy;
    p += m.precision;
    r += m.recall;
    f += m.f1;
  }
  const double kn = static_cast<double>(k);
  result.mean.accuracy = acc / kn;
  result.mean.precision = p / kn;
  result.mean.recall = r / kn;
  result.mean.f1 = f / kn;
  result.mean.support = corpus.size();
  result.pooled = binary_metrics(pooled_preds, pooled_golds, 1);
  return result;
}

inline Metrics holdout_evaluate_detector(const std::vector<LabeledSentence>& corpus,
                                         const DetectorConfig& cfg,
                                         double train_fraction = 0.75) {
  const auto split = holdout_split(corpus.size(), train_fraction, cfg.seed);
  std::vector<LabeledSentence> train;
  for (const auto i : split.train_ids) train.push_back(corpus[i]);
  const auto model = train_detector(train, cfg);
  std::vector<int> preds, golds;
  for (const auto i : split.test_ids) {
    preds.push_back(predict(model, corpus[i].tokens).label);
    golds.push_back(corpus[i].label);
  }
  return binary_metrics(preds, golds, 1);
}

}  // namespace hypreader
