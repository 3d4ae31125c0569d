#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/detector.hpp"
#include "hypreader/rng.hpp"

#include "json.hpp"

namespace hypreader {

// LIME-style local explanation of detector predictions. Variations of a
// sentence are scored by the detector, and a ridge-regularized linear model
// over token-presence bits stands in for it; the fitted weights are the
// per-word importances.

struct Perturbation {
  std::vector<std::uint8_t> mask;       // 1 = token kept
  std::vector<std::string> tokens_kept;
  double model_prob = 0.0;              // filled when the detector is applied
};

struct Explanation {
  std::vector<std::string> tokens;
  std::vector<double> weights;  // per token position; positive pushes toward
                                // the hypothesis class
  double intercept = 0.0;
  double fidelity = 0.0;  // 1 - mean |stand-in - detector| over perturbations
  double prediction = 0.0;  // detector hypothesis probability, full sentence
  // Stand-in settings recorded in the output metadata.
  double ridge = 1e-3;
  double kernel_width = 0.0;
  int n_random = 0;
  std::uint64_t seed = 0;
};

struct ExplainOptions {
  int n_random = 0;          // 0 = pure leave-one-out, the paper-faithful mode
  std::uint64_t seed = 0;
  double ridge = 1e-3;
  double kernel_width_factor = 0.25;  // width = factor * sentence length
  double drop_prob = 0.3;             // per-token drop rate for random masks
};

// The full sentence, every leave-one-out variation, and n_random random
// multi-token masks (each keeps at least one token). Deterministic in seed.
inline std::vector<Perturbation> perturb(const std::vector<std::string>& tokens,
                                         int n_random, std::uint64_t seed,
                                         double drop_prob = 0.3) {
  if (tokens.empty()) throw Error("EmptySentence", "cannot perturb no tokens");
  const std::size_t n = tokens.size();
  std::vector<Perturbation> out;
  auto push_mask = [&](std::vector<std::uint8_t> mask) {
    Perturbation p;
    p.mask = std::move(mask);
    for (std::size_t i = 0; i < n; ++i)
      if (p.mask[i]) p.tokens_kept.push_back(tokens[i]);
    out.push_back(std::move(p));
  };
  push_mask(std::vector<std::uint8_t>(n, 1));
  if (n > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::uint8_t> mask(n, 1);
      mask[i] = 0;
      push_mask(std::move(mask));
    }
  }
  Rng rng(seed);
  for (int r = 0; r < n_random; ++r) {
    std::vector<std::uint8_t> mask(n, 1);
    std::size_t kept = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng.bernoulli(drop_prob)) {
        mask[i] = 0;
        --kept;
      }
    }
    if (kept == 0) mask[rng.bounded(n)] = 1;
    push_mask(std::move(mask));
  }
  return out;
}

namespace explainer_detail {

// Solve A x = b in place by Gaussian elimination with partial pivoting.
inline std::vector<double> solve_dense(std::vector<std::vector<double>> a,
                                       std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    const double diag = a[col][col];
    if (std::fabs(diag) < 1e-12) continue;  // leave singular direction at 0
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / diag;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (std::fabs(a[i][i]) >= 1e-12) x[i] = b[i] / a[i][i];
  return x;
}

}  // namespace explainer_detail

using ProbFn = std::function<double(const std::vector<std::string>&)>;

// Fit the stand-in model for one sentence. Samples are weighted by an
// exponential kernel on the number of dropped tokens; the intercept is not
// penalized. Sentences shorter than 2 tokens get the trivial explanation.
inline Explanation explain(const ProbFn& prob_fn,
                           const std::vector<std::string>& tokens,
                           const ExplainOptions& opts = {}) {
  if (tokens.empty()) throw Error("EmptySentence", "cannot explain no tokens");
  const std::size_t n = tokens.size();
  Explanation ex;
  ex.tokens = tokens;
  ex.ridge = opts.ridge;
  ex.n_random = opts.n_random;
  ex.seed = opts.seed;
  ex.kernel_width = opts.kernel_width_factor * static_cast<double>(n);
  ex.prediction = prob_fn(tokens);
  if (n < 2) {
    ex.intercept = prob_fn({});
    ex.weights = {ex.prediction - ex.intercept};
    ex.fidelity = 1.0;
    return ex;
  }

  auto perts = perturb(tokens, opts.n_random, opts.seed, opts.drop_prob);
  for (auto& p : perts) p.model_prob = prob_fn(p.tokens_kept);

  // Weighted ridge over presence bits plus an unpenalized intercept column.
  const std::size_t cols = n + 1;
  std::vector<std::vector<double>> ata(cols, std::vector<double>(cols, 0.0));
  std::vector<double> atb(cols, 0.0);
  const double width = std::max(ex.kernel_width, 1e-9);
  std::vector<double> sample_weights(perts.size());
  for (std::size_t s = 0; s < perts.size(); ++s) {
    const auto& p = perts[s];
    std::size_t dropped = 0;
    for (const auto kept : p.mask)
      if (!kept) ++dropped;
    const double d = static_cast<double>(dropped) / width;
    const double w = std::exp(-d * d);
    sample_weights[s] = w;
    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < n; ++i)
      if (p.mask[i]) present.push_back(i);
    // Feature layout: [presence bits 0..n-1, intercept].
    for (const auto i : present) {
      for (const auto j : present) ata[i][j] += w;
      ata[i][n] += w;
      ata[n][i] += w;
      atb[i] += w * p.model_prob;
    }
    ata[n][n] += w;
    atb[n] += w * p.model_prob;
  }
  for (std::size_t i = 0; i < n; ++i) ata[i][i] += opts.ridge;
  const auto beta = explainer_detail::solve_dense(std::move(ata), std::move(atb));
  ex.weights.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(n));
  ex.intercept = beta[n];

  double abs_err = 0.0;
  for (std::size_t s = 0; s < perts.size(); ++s) {
    double yhat = ex.intercept;
    for (std::size_t i = 0; i < n; ++i)
      if (perts[s].mask[i]) yhat += ex.weights[i];
    yhat = std::clamp(yhat, 0.0, 1.0);
    abs_err += std::fabs(yhat - perts[s].model_prob);
  }
  ex.fidelity = 1.0 - abs_err / static_cast<double>(perts.size());
  return ex;
}

inline ProbFn detector_prob_fn(const DetectorModel& model) {
  return [&model](const std::vector<std::string>& tokens) {
    return model.probabilities(tokens)[1];
  };
}

inline Explanation explain(const DetectorModel& model,
                           const std::vector<std::string>& tokens,
                           const ExplainOptions& opts = {}) {
  return explain(detector_prob_fn(model), tokens, opts);
}

// Leave-one-out probability deltas, P(full) - P(without token i): the
// implicit importance measure the stand-in weights are checked against.
inline std::vector<double> loo_deltas(const ProbFn& prob_fn,
                                      const std::vector<std::string>& tokens) {
  const double full = prob_fn(tokens);
  std::vector<double> deltas(tokens.size(), 0.0);
  if (tokens.size() < 2) return deltas;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::vector<std::string> rest;
    for (std::size_t j = 0; j < tokens.size(); ++j)
      if (j != i) rest.push_back(tokens[j]);
    deltas[i] = full - prob_fn(rest);
  }
  return deltas;
}

// JSON form emitted by the CLI `explain` command, tokens sorted by |weight|
// descending.
inline nlohmann::json explanation_to_json(const Explanation& ex,
                                          const std::string& text) {
  std::vector<std::size_t> order(ex.tokens.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(ex.weights[a]) > std::fabs(ex.weights[b]);
  });
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto i : order)
    tokens.push_back({{"token", ex.tokens[i]}, {"weight", ex.weights[i]}});
  return {{"text", text},
          {"tokens", tokens},
          {"intercept", ex.intercept},
          {"fidelity", ex.fidelity},
          {"prediction", ex.prediction},
          {"metadata",
           {{"ridge", ex.ridge},
            {"kernel_width", ex.kernel_width},
            {"n_random", ex.n_random},
            {"seed", ex.seed}}}};
}

}  // namespace hypreader
