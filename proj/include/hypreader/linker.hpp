#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/evalkit.hpp"
#include "hypreader/lexicon.hpp"
#include "hypreader/serialize.hpp"

namespace hypreader {

// Task 3: classify each hypothesis link's nature (causal vs association) and
// direction (pos/neg/non_lin) with L2-regularized logistic regression over
// stemmed uni/bi/tri-gram BOW features.

enum class Direction { pos, neg, non_lin };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::pos: return "pos";
    case Direction::neg: return "neg";
    default: return "non_lin";
  }
}

inline Direction direction_from_string(const std::string& s) {
  if (s == "pos") return Direction::pos;
  if (s == "neg") return Direction::neg;
  if (s == "non_lin") return Direction::non_lin;
  throw Error("BadDirection", "unknown direction '" + s + "'");
}

struct LinkLabel {
  int causal = 0;  // 0 = association, 1 = causal
  Direction direction = Direction::pos;
};

enum class LinkTask { causality, direction };

using SparseVector = std::vector<std::pair<std::size_t, double>>;

// Stem, form n-grams, count, L2-normalize.
inline SparseVector featurize(const Vocabulary& vocab,
                              const std::vector<std::string>& tokens) {
  return bow_vector(vocab, tokens).l2_normalized();
}

struct LogisticModel {
  LinkTask task = LinkTask::causality;
  std::vector<std::string> classes;  // ordered label list
  std::size_t n_features = 0;
  std::vector<double> weights;  // rows x n_features (binary: 1 row)
  std::vector<double> bias;     // one per row
  double reg_strength = 1.0;

  std::size_t rows() const { return classes.size() == 2 ? 1 : classes.size(); }

  // Per-class probabilities: sigmoid for binary, softmax otherwise.
  std::vector<double> probabilities(const SparseVector& x) const {
    std::vector<double> scores(rows(), 0.0);
    for (std::size_t r = 0; r < rows(); ++r) {
      double s = bias[r];
      const double* w = weights.data() + r * n_features;
      for (const auto& [id, v] : x) s += w[id] * v;
      scores[r] = s;
    }
    if (classes.size() == 2) {
      const double p1 = 1.0 / (1.0 + std::exp(-scores[0]));
      return {1.0 - p1, p1};
    }
    const double mx = *std::max_element(scores.begin(), scores.end());
    double z = 0.0;
    std::vector<double> p(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
      p[i] = std::exp(scores[i] - mx);
      z += p[i];
    }
    for (auto& v : p) v /= z;
    return p;
  }

  // Argmax with ties broken toward the earlier class in `classes`.
  std::size_t predict_class(const SparseVector& x) const {
    const auto p = probabilities(x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
      if (p[i] > p[best]) best = i;
    return best;
  }
};

namespace linker_detail {

// Mean negative log-likelihood + (reg/2)||W||^2 (bias unpenalized), with
// gradients. Shared by training and the finite-difference tests.
inline double objective_and_grad(const std::vector<SparseVector>& xs,
                                 const std::vector<std::size_t>& ys,
                                 std::size_t n_classes, std::size_t n_features,
                                 const std::vector<double>& weights,
                                 const std::vector<double>& bias, double reg,
                                 std::vector<double>* grad_w,
                                 std::vector<double>* grad_b) {
  const std::size_t rows = n_classes == 2 ? 1 : n_classes;
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  if (grad_w) grad_w->assign(weights.size(), 0.0);
  if (grad_b) grad_b->assign(bias.size(), 0.0);
  double nll = 0.0;
  std::vector<double> scores(rows), p(n_classes);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t r = 0; r < rows; ++r) {
      double s = bias[r];
      const double* w = weights.data() + r * n_features;
      for (const auto& [id, v] : xs[i]) s += w[id] * v;
      scores[r] = s;
    }
    if (n_classes == 2) {
      const double p1 = 1.0 / (1.0 + std::exp(-scores[0]));
      p[0] = 1.0 - p1;
      p[1] = p1;
    } else {
      const double mx = *std::max_element(scores.begin(), scores.end());
      double z = 0.0;
      for (std::size_t c = 0; c < n_classes; ++c) {
        p[c] = std::exp(scores[c] - mx);
        z += p[c];
      }
      for (auto& v : p) v /= z;
    }
    nll += -std::log(std::max(p[ys[i]], 1e-300));
    if (!grad_w) continue;
    if (n_classes == 2) {
      const double g = (p[1] - (ys[i] == 1 ? 1.0 : 0.0)) * inv_n;
      for (const auto& [id, v] : xs[i]) (*grad_w)[id] += g * v;
      (*grad_b)[0] += g;
    } else {
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double g = (p[c] - (ys[i] == c ? 1.0 : 0.0)) * inv_n;
        double* gw = grad_w->data() + c * n_features;
        for (const auto& [id, v] : xs[i]) gw[id] += g * v;
        (*grad_b)[c] += g;
      }
    }
  }
  double obj = nll * inv_n;
  double reg_term = 0.0;
  for (const double w : weights) reg_term += w * w;
  obj += 0.5 * reg * reg_term;
  if (grad_w)
    for (std::size_t i = 0; i < weights.size(); ++i)
      (*grad_w)[i] += reg * weights[i];
  return obj;
}

}  // namespace linker_detail

// L2-regularized maximum likelihood by full-batch gradient descent with
// backtracking line search; converged when the gradient max-norm drops below
// 1e-6 or after 2,000 iterations. Deterministic from zero initialization, so
// the seed parameter is accepted for interface parity but not consumed.
inline LogisticModel train_logreg(const std::vector<SparseVector>& xs,
                                  const std::vector<std::size_t>& ys,
                                  const std::vector<std::string>& classes,
                                  std::size_t n_features, double reg_strength,
                                  std::uint64_t /*seed*/ = 0) {
  if (xs.size() != ys.size())
    throw Error("LengthMismatch", "features and labels differ in length");
  if (xs.empty()) throw Error("EmptyCorpus", "no training rows");
  if (classes.size() < 2) throw Error("SingleClass", "need at least 2 classes");
  std::vector<std::size_t> present(classes.size(), 0);
  for (const auto y : ys) {
    if (y >= classes.size()) throw Error("BadLabel", "label id out of range");
    ++present[y];
  }
  for (std::size_t c = 0; c < classes.size(); ++c)
    if (present[c] == 0)
      throw Error("SingleClass", "class '" + classes[c] + "' has no examples");

  LogisticModel model;
  model.classes = classes;
  model.n_features = n_features;
  model.reg_strength = reg_strength;
  model.weights.assign(model.rows() * n_features, 0.0);
  model.bias.assign(model.rows(), 0.0);

  std::vector<double> grad_w, grad_b;
  double step = 1.0;
  double obj = linker_detail::objective_and_grad(
      xs, ys, classes.size(), n_features, model.weights, model.bias,
      reg_strength, &grad_w, &grad_b);
  std::vector<double> trial_w(model.weights.size()), trial_b(model.bias.size());
  for (int iter = 0; iter < 2000; ++iter) {
    double gmax = 0.0, gnorm2 = 0.0;
    for (const double g : grad_w) {
      gmax = std::max(gmax, std::fabs(g));
      gnorm2 += g * g;
    }
    for (const double g : grad_b) {
      gmax = std::max(gmax, std::fabs(g));
      gnorm2 += g * g;
    }
    if (gmax < 1e-6) break;
    // Backtracking (Armijo) line search, reusing the last accepted step.
    step = std::min(step * 2.0, 1e6);
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < trial_w.size(); ++i)
        trial_w[i] = model.weights[i] - step * grad_w[i];
      for (std::size_t i = 0; i < trial_b.size(); ++i)
        trial_b[i] = model.bias[i] - step * grad_b[i];
      const double trial_obj = linker_detail::objective_and_grad(
          xs, ys, classes.size(), n_features, trial_w, trial_b, reg_strength,
          nullptr, nullptr);
      if (trial_obj <= obj - 1e-4 * step * gnorm2) {
        model.weights.swap(trial_w);
        model.bias.swap(trial_b);
        obj = trial_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    obj = linker_detail::objective_and_grad(xs, ys, classes.size(), n_features,
                                            model.weights, model.bias,
                                            reg_strength, &grad_w, &grad_b);
  }
  return model;
}

inline const std::vector<std::string>& causality_classes() {
  static const std::vector<std::string> c = {"0", "1"};
  return c;
}

inline const std::vector<std::string>& direction_classes() {
  static const std::vector<std::string> c = {"pos", "neg", "non_lin"};
  return c;
}

struct LinkExample {
  std::vector<std::string> tokens;  // normalized (lowercased, stop-words out)
  int causal = 0;
  Direction direction = Direction::pos;
};

// The paired models plus the vocabulary they featurize against.
struct LinkModel {
  Vocabulary vocab;
  LogisticModel causality;
  LogisticModel direction;
};

struct LinkTrainOptions {
  int max_n = 3;
  std::size_t min_count = 1;
  // The objective normalizes the likelihood by sample count, so useful
  // penalties sit at the small end of the tuning grid.
  double causality_reg = 0.01;
  double direction_reg = 0.01;
};

inline LinkModel train_link_model(const std::vector<LinkExample>& examples,
                                  const LinkTrainOptions& opts = {}) {
  if (examples.empty()) throw Error("EmptyCorpus", "no link examples");
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(examples.size());
  for (const auto& e : examples) corpus.push_back(e.tokens);
  LinkModel model;
  model.vocab = build_vocabulary(corpus, opts.max_n, opts.min_count,
                                 VocabNormalization::stem);
  std::vector<SparseVector> xs;
  xs.reserve(examples.size());
  for (const auto& e : examples) xs.push_back(featurize(model.vocab, e.tokens));
  std::vector<std::size_t> y_causal, y_dir;
  for (const auto& e : examples) {
    y_causal.push_back(static_cast<std::size_t>(e.causal));
    y_dir.push_back(static_cast<std::size_t>(e.direction));
  }
  model.causality = train_logreg(xs, y_causal, causality_classes(),
                                 model.vocab.size(), opts.causality_reg);
  model.causality.task = LinkTask::causality;
  model.direction = train_logreg(xs, y_dir, direction_classes(),
                                 model.vocab.size(), opts.direction_reg);
  model.direction.task = LinkTask::direction;
  return model;
}

// causal: sigmoid threshold 0.5, tie toward 0 (association).
// direction: softmax argmax, ties toward pos < neg < non_lin.
inline LinkLabel predict_link(const LinkModel& model,
                              const std::vector<std::string>& tokens) {
  const auto x = featurize(model.vocab, tokens);
  LinkLabel label;
  label.causal = model.causality.probabilities(x)[1] > 0.5 ? 1 : 0;
  label.direction =
      static_cast<Direction>(model.direction.predict_class(x));
  return label;
}

struct TunePoint {
  double reg_strength = 0.0;
  Metrics metrics;          // mean over k x repeats folds (macro F-1 for 3-class)
  Metrics weighted;         // support-weighted variant, reported alongside
};

struct TuneResult {
  std::vector<TunePoint> grid;
  TunePoint best;  // highest F-1; ties toward stronger regularization
};

inline std::vector<double> default_reg_grid() {
  return {100.0, 10.0, 1.0, 0.1, 0.01};
}

// The tuning protocol: stratified k-fold, `repeats` times with distinct fold
// seeds, mean F-1 per grid point.
inline TuneResult tune(const std::vector<SparseVector>& xs,
                       const std::vector<std::size_t>& ys,
                       const std::vector<std::string>& classes,
                       std::size_t n_features, const std::vector<double>& grid,
                       int k = 10, int repeats = 3, std::uint64_t seed = 1) {
  if (grid.empty()) throw Error("EmptyGrid", "no grid points");
  TuneResult result;
  for (const double reg : grid) {
    double f1_sum = 0.0, acc_sum = 0.0, prec_sum = 0.0, rec_sum = 0.0,
           wf1_sum = 0.0;
    int n_folds = 0;
    for (int rep = 0; rep < repeats; ++rep) {
      const auto plan =
          stratified_kfold(ys, k, seed + static_cast<std::uint64_t>(rep));
      for (int fold = 0; fold < k; ++fold) {
        std::vector<SparseVector> train_x;
        std::vector<std::size_t> train_y;
        for (const auto i : plan.complement_indices(fold)) {
          train_x.push_back(xs[i]);
          train_y.push_back(ys[i]);
        }
        const auto model =
            train_logreg(train_x, train_y, classes, n_features, reg);
        std::vector<std::size_t> preds, golds;
        for (const auto i : plan.fold_indices(fold)) {
          preds.push_back(model.predict_class(xs[i]));
          golds.push_back(ys[i]);
        }
        Metrics m, wm;
        if (classes.size() == 2) {
          m = binary_metrics(preds, golds, std::size_t{1});
          wm = m;
        } else {
          std::vector<Metrics> per_class;
          for (std::size_t c = 0; c < classes.size(); ++c)
            per_class.push_back(binary_metrics(preds, golds, c));
          m = macro_average(per_class);
          wm = weighted_average(per_class);
          std::size_t correct = 0;
          for (std::size_t i = 0; i < preds.size(); ++i)
            if (preds[i] == golds[i]) ++correct;
          m.accuracy = preds.empty() ? 0.0
                                     : static_cast<double>(correct) /
                                           static_cast<double>(preds.size());
        }
        f1_sum += m.f1;
        acc_sum += m.accuracy;
        prec_sum += m.precision;
        rec_sum += m.recall;
        wf1_sum += wm.f1;
        ++n_folds;
      }
    }
    TunePoint point;
    point.reg_strength = reg;
    point.metrics.f1 = f1_sum / n_folds;
    point.metrics.accuracy = acc_sum / n_folds;
    point.metrics.precision = prec_sum / n_folds;
    point.metrics.recall = rec_sum / n_folds;
    point.metrics.support = ys.size();
    point.weighted.f1 = wf1_sum / n_folds;
    result.grid.push_back(point);
  }
  result.best = result.grid.front();
  for (const auto& point : result.grid) {
    const bool better = point.metrics.f1 > result.best.metrics.f1;
    const bool tie_stronger = point.metrics.f1 == result.best.metrics.f1 &&
                              point.reg_strength > result.best.reg_strength;
    if (better || tie_stronger) result.best = point;
  }
  return result;
}

constexpr const char* kLinkerMagic = "HYPOLINKER";
constexpr int kLinkerVersion = 1;

inline void save_link_model(const LinkModel& model, const std::string& path) {
  ModelContainer mc;
  mc.magic = kLinkerMagic;
  mc.header = {{"version", kLinkerVersion},
               {"vocab", vocabulary_to_json(model.vocab)},
               {"causality",
                {{"classes", model.causality.classes},
                 {"reg_strength", model.causality.reg_strength}}},
               {"direction",
                {{"classes", model.direction.classes},
                 {"reg_strength", model.direction.reg_strength}}}};
  append_f32(mc.payload, model.causality.weights);
  append_f32(mc.payload, model.causality.bias);
  append_f32(mc.payload, model.direction.weights);
  append_f32(mc.payload, model.direction.bias);
  write_container(path, mc);
}

inline LinkModel load_link_model(const std::string& path) {
  const auto mc = read_container(path, kLinkerMagic, kLinkerVersion);
  LinkModel model;
  model.vocab = vocabulary_from_json(mc.header.at("vocab"));
  model.causality.task = LinkTask::causality;
  model.causality.classes =
      mc.header.at("causality").at("classes").get<std::vector<std::string>>();
  model.causality.reg_strength =
      mc.header.at("causality").at("reg_strength").get<double>();
  model.causality.n_features = model.vocab.size();
  model.direction.task = LinkTask::direction;
  model.direction.classes =
      mc.header.at("direction").at("classes").get<std::vector<std::string>>();
  model.direction.reg_strength =
      mc.header.at("direction").at("reg_strength").get<double>();
  model.direction.n_features = model.vocab.size();
  size_t cursor = 0;
  model.causality.weights = take_f64(
      mc.payload, cursor, model.causality.rows() * model.vocab.size());
  model.causality.bias = take_f64(mc.payload, cursor, model.causality.rows());
  model.direction.weights = take_f64(
      mc.payload, cursor, model.direction.rows() * model.vocab.size());
  model.direction.bias = take_f64(mc.payload, cursor, model.direction.rows());
  return model;
}

}  // namespace hypreader
