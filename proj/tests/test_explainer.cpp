#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hypreader/explainer.hpp"
#include "hypreader/jsonl.hpp"
#include "hypreader/synth.hpp"

using namespace hypreader;

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va <= 0 || vb <= 0) return 0;
  return cov / std::sqrt(va * vb);
}

DetectorModel trained_detector() {
  std::vector<LabeledSentence> corpus;
  for (const auto& s : synth_detector_corpus(120, 120, 3))
    corpus.push_back({classifier_tokens(s.text), s.label});
  DetectorConfig cfg;
  cfg.dim = 16;
  cfg.epochs = 20;
  cfg.seed = 5;
  return train_detector(corpus, cfg);
}

}  // namespace

TEST_CASE("perturb produces full + leave-one-out + random masks") {
  const std::vector<std::string> three = {"a", "b", "c"};
  const auto base = perturb(three, 0, 1);
  REQUIRE(base.size() == 4);
  CHECK(base[0].tokens_kept == three);
  for (std::size_t i = 1; i < 4; ++i) CHECK(base[i].tokens_kept.size() == 2);

  // Single token: leave-one-out would empty the sentence, so only the full
  // mask remains.
  const auto single = perturb({"only"}, 0, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0].tokens_kept == std::vector<std::string>{"only"});

  CHECK_THROWS_AS(perturb({}, 0, 1), Error);
}

TEST_CASE("perturb is deterministic in the seed and keeps at least one token") {
  const std::vector<std::string> tokens = {"a", "b", "c", "d", "e"};
  const auto p1 = perturb(tokens, 10, 99);
  const auto p2 = perturb(tokens, 10, 99);
  REQUIRE(p1.size() == p2.size());
  for (std::size_t i = 0; i < p1.size(); ++i) {
    CHECK(p1[i].mask == p2[i].mask);
    CHECK(!p1[i].tokens_kept.empty());
  }
  const auto p3 = perturb(tokens, 10, 100);
  bool any_diff = false;
  for (std::size_t i = 0; i < p1.size(); ++i)
    if (p1[i].mask != p3[i].mask) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("a token the model exclusively relies on gets the top weight") {
  // Detector stand-in: probability rises only with "associated" present.
  ProbFn fn = [](const std::vector<std::string>& tokens) {
    for (const auto& t : tokens)
      if (t == "associated") return 0.9;
    return 0.2;
  };
  ExplainOptions opts;
  opts.n_random = 20;
  opts.seed = 3;
  const std::vector<std::string> tokens = {"growth", "is", "associated", "with",
                                           "size"};
  const auto ex = explain(fn, tokens, opts);
  std::size_t best = 0;
  for (std::size_t i = 1; i < ex.weights.size(); ++i)
    if (std::fabs(ex.weights[i]) > std::fabs(ex.weights[best])) best = i;
  CHECK(tokens[best] == "associated");
  CHECK(ex.weights[best] > 0);
}

TEST_CASE("single-token sentence carries the whole deviation from intercept") {
  ProbFn fn = [](const std::vector<std::string>& tokens) {
    return tokens.empty() ? 0.5 : 0.8;
  };
  const auto ex = explain(fn, {"word"}, {});
  CHECK(ex.intercept == Catch::Approx(0.5));
  REQUIRE(ex.weights.size() == 1);
  CHECK(ex.weights[0] == Catch::Approx(0.3));
  CHECK(ex.fidelity == 1.0);
  CHECK(ex.prediction == Catch::Approx(0.8));
}

TEST_CASE("fidelity is exactly 1 for a presence-linear detector (ridge 0)") {
  // y = 0.35 + 0.08 x0 - 0.05 x1 + 0.12 x2 + 0.02 x3, always inside [0, 1].
  const std::vector<std::string> tokens = {"t0", "t1", "t2", "t3"};
  const std::vector<double> coef = {0.08, -0.05, 0.12, 0.02};
  ProbFn fn = [&](const std::vector<std::string>& kept) {
    double y = 0.35;
    for (const auto& t : kept)
      for (std::size_t i = 0; i < tokens.size(); ++i)
        if (t == tokens[i]) y += coef[i];
    return y;
  };
  ExplainOptions opts;
  opts.n_random = 30;
  opts.seed = 17;
  opts.ridge = 0.0;
  const auto ex = explain(fn, tokens, opts);
  CHECK(ex.fidelity == Catch::Approx(1.0).margin(1e-6));
  for (std::size_t i = 0; i < coef.size(); ++i)
    CHECK(ex.weights[i] == Catch::Approx(coef[i]).margin(1e-6));
  CHECK(ex.intercept == Catch::Approx(0.35).margin(1e-6));
}

TEST_CASE("explanations are deterministic given model, tokens and seed") {
  const auto model = trained_detector();
  const std::vector<std::string> tokens = {"employee", "commitment",
                                           "positively", "associated",
                                           "firm", "performance"};
  ExplainOptions opts;
  opts.n_random = 25;
  opts.seed = 11;
  const auto a = explain(model, tokens, opts);
  const auto b = explain(model, tokens, opts);
  CHECK(a.weights == b.weights);
  CHECK(a.intercept == b.intercept);
  CHECK(a.fidelity == b.fidelity);
}

TEST_CASE("stand-in weights track leave-one-out deltas") {
  const auto model = trained_detector();
  const auto fn = detector_prob_fn(model);
  Rng rng(23);
  std::vector<double> correlations;
  for (int trial = 0; trial < 12; ++trial) {
    // Mixed sentences keep the probability off the saturated ends.
    const auto h = synth_hypothesis(static_cast<int>(rng.bounded(16)), rng);
    auto tokens = classifier_tokens(h.text() + ". these results support the regression test");
    if (tokens.size() < 4) continue;
    ExplainOptions opts;
    opts.n_random = static_cast<int>(5 * tokens.size());
    opts.seed = rng.next_u64();
    const auto ex = explain(fn, tokens, opts);
    const auto deltas = loo_deltas(fn, tokens);
    correlations.push_back(pearson(ex.weights, deltas));
  }
  REQUIRE(!correlations.empty());
  double mean = 0;
  for (const double c : correlations) mean += c;
  mean /= static_cast<double>(correlations.size());
  CHECK(mean >= 0.9);
}

TEST_CASE("explanation JSON sorts tokens by |weight| descending") {
  Explanation ex;
  ex.tokens = {"a", "b", "c"};
  ex.weights = {0.1, -0.5, 0.3};
  ex.intercept = 0.2;
  ex.fidelity = 0.95;
  ex.prediction = 0.7;
  const auto j = explanation_to_json(ex, "a b c");
  CHECK(j.at("text") == "a b c");
  CHECK(j.at("tokens")[0].at("token") == "b");
  CHECK(j.at("tokens")[1].at("token") == "c");
  CHECK(j.at("tokens")[2].at("token") == "a");
  CHECK(j.at("fidelity") == 0.95);
  CHECK(j.at("prediction") == 0.7);
  CHECK(j.at("metadata").contains("ridge"));
  CHECK(j.at("metadata").contains("kernel_width"));
}
