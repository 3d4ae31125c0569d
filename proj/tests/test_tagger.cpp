#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "hypreader/rng.hpp"
#include "hypreader/synth.hpp"
#include "hypreader/tagger.hpp"
#include <set>
#include <algorithm>

using namespace hypreader;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

WordVectorTable tiny_vectors(std::size_t dim, std::uint64_t seed) {
  std::set<std::string> tokens = {"alpha", "beta", "gamma", "delta", "epsilon"};
  return synth_word_vectors(tokens, dim, seed);
}

// Reference LSTM evaluation written independently of the implementation:
// plain loops over the gate equations, no shared helpers.
struct RefLstm {
  const LstmWeights& lw;

  static double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

  // inputs: steps x input_dim. Returns h per step (steps x units).
  std::vector<std::vector<double>> run(
      const std::vector<std::vector<double>>& inputs) const {
    const int u = lw.units;
    std::vector<double> h(u, 0.0), c(u, 0.0);
    std::vector<std::vector<double>> out;
    for (const auto& x : inputs) {
      std::vector<double> zi(u), zf(u), zg(u), zo(u);
      for (int k = 0; k < u; ++k) {
        double ai = lw.b[k], af = lw.b[u + k], ag = lw.b[2 * u + k],
               ao = lw.b[3 * u + k];
        for (std::size_t d = 0; d < x.size(); ++d) {
          ai += lw.w[(0 * u + k) * x.size() + d] * x[d];
          af += lw.w[(1 * u + k) * x.size() + d] * x[d];
          ag += lw.w[(2 * u + k) * x.size() + d] * x[d];
          ao += lw.w[(3 * u + k) * x.size() + d] * x[d];
        }
        for (int j = 0; j < u; ++j) {
          ai += lw.u[(0 * u + k) * u + j] * h[j];
          af += lw.u[(1 * u + k) * u + j] * h[j];
          ag += lw.u[(2 * u + k) * u + j] * h[j];
          ao += lw.u[(3 * u + k) * u + j] * h[j];
        }
        zi[k] = sig(ai);
        zf[k] = sig(af);
        zg[k] = std::tanh(ag);
        zo[k] = sig(ao);
      }
      std::vector<double> nh(u), nc(u);
      for (int k = 0; k < u; ++k) {
        nc[k] = zf[k] * c[k] + zi[k] * zg[k];
        nh[k] = zo[k] * std::tanh(nc[k]);
      }
      h = nh;
      c = nc;
      out.push_back(h);
    }
    return out;
  }
};

}  // namespace

TEST_CASE("pad_or_truncate pads right and truncates the tail") {
  TaggerConfig cfg;
  cfg.lstm1_units = 2;
  cfg.lstm2_units = 2;
  auto model = make_tagger_model(tiny_vectors(4, 1), cfg);

  std::vector<std::string> three = {"alpha", "beta", "unknown"};
  const auto seq = pad_or_truncate(model, three, 50);
  REQUIRE(seq.ids.size() == 50);
  CHECK(seq.n_real == 3);
  CHECK(seq.ids[0] != kPadIndex);
  CHECK(seq.ids[2] == kUnkIndex);  // OOV shares the UNK row
  for (std::size_t i = 3; i < 50; ++i) CHECK(seq.ids[i] == kPadIndex);

  std::vector<std::string> exact(50, "alpha");
  CHECK(pad_or_truncate(model, exact, 50).n_real == 50);

  std::vector<std::string> longer(58, "alpha");
  const auto trunc = pad_or_truncate(model, longer, 50);
  CHECK(trunc.n_real == 50);
  CHECK(trunc.ids.size() == 50);
}

TEST_CASE("all-zero weights give the uniform distribution at every position") {
  TaggerConfig cfg;
  cfg.lstm1_units = 2;
  cfg.lstm2_units = 3;
  cfg.pad_len = 6;
  auto model = make_tagger_model(tiny_vectors(4, 2), cfg);
  for (auto span : model.parameter_tensors())
    for (auto& x : span) x = 0.0;
  const auto seq = pad_or_truncate(model, {"alpha", "beta"}, cfg.pad_len);
  const auto probs = tagger_forward(model, seq, false);
  REQUIRE(probs.size() == 6);
  for (const auto& p : probs)
    for (int c = 0; c < 3; ++c)
      CHECK(p[static_cast<std::size_t>(c)] == Catch::Approx(1.0 / 3).margin(1e-12));
  // Tie-break toward class 0 under argmax.
  const auto ts = tag(model, {"alpha", "beta"});
  CHECK(ts.tags == std::vector<int>{0, 0});
}

TEST_CASE("probabilities sum to 1 at every position") {
  TaggerConfig cfg;
  cfg.lstm1_units = 3;
  cfg.lstm2_units = 4;
  cfg.pad_len = 8;
  cfg.seed = 3;
  auto model = make_tagger_model(tiny_vectors(5, 3), cfg);
  Rng rng(7);
  const std::vector<std::string> pool = {"alpha", "beta", "gamma", "delta",
                                         "epsilon", "oov"};
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::string> tokens;
    const std::size_t len = 1 + rng.bounded(8);
    for (std::size_t i = 0; i < len; ++i)
      tokens.push_back(pool[rng.bounded(pool.size())]);
    const auto seq = pad_or_truncate(model, tokens, cfg.pad_len);
    const auto probs = tagger_forward(model, seq, false);
    for (const auto& p : probs)
      CHECK(p[0] + p[1] + p[2] == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("forward pass matches an independent reference evaluation") {
  // Tiny model: embedding dim 4, layer units 2 and 3, 2 real positions.
  TaggerConfig cfg;
  cfg.lstm1_units = 2;
  cfg.lstm2_units = 3;
  cfg.pad_len = 2;
  cfg.seed = 11;
  auto model = make_tagger_model(tiny_vectors(4, 4), cfg);

  const std::vector<std::string> tokens = {"alpha", "gamma"};
  const auto seq = pad_or_truncate(model, tokens, cfg.pad_len);
  const auto got = tagger_forward(model, seq, false);

  // Reference: embedding lookup.
  const std::size_t e = 4;
  std::vector<std::vector<double>> x;
  for (std::size_t t = 0; t < seq.n_real; ++t) {
    std::vector<double> row(e);
    for (std::size_t d = 0; d < e; ++d)
      row[d] = model.embedding[seq.ids[t] * e + d];
    x.push_back(row);
  }
  auto reversed = x;
  std::reverse(reversed.begin(), reversed.end());

  const auto h1f = RefLstm{model.l1f}.run(x);
  const auto h1b_rev = RefLstm{model.l1b}.run(reversed);
  std::vector<std::vector<double>> o1;
  for (std::size_t t = 0; t < x.size(); ++t) {
    std::vector<double> cat = h1f[t];
    const auto& hb = h1b_rev[x.size() - 1 - t];
    cat.insert(cat.end(), hb.begin(), hb.end());
    o1.push_back(cat);
  }
  auto o1_rev = o1;
  std::reverse(o1_rev.begin(), o1_rev.end());
  const auto h2f = RefLstm{model.l2f}.run(o1);
  const auto h2b_rev = RefLstm{model.l2b}.run(o1_rev);

  for (std::size_t t = 0; t < x.size(); ++t) {
    std::vector<double> cat = h2f[t];
    const auto& hb = h2b_rev[x.size() - 1 - t];
    cat.insert(cat.end(), hb.begin(), hb.end());
    double logits[3];
    for (int c = 0; c < 3; ++c) {
      double acc = model.dense_b[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < cat.size(); ++k)
        acc += model.dense_w[static_cast<std::size_t>(c) * cat.size() + k] * cat[k];
      logits[c] = acc;
    }
    const double mx = std::max({logits[0], logits[1], logits[2]});
    double z = 0;
    double p[3];
    for (int c = 0; c < 3; ++c) {
      p[c] = std::exp(logits[c] - mx);
      z += p[c];
    }
    for (int c = 0; c < 3; ++c) {
      p[c] /= z;
      CHECK(got[t][static_cast<std::size_t>(c)] ==
            Catch::Approx(p[c]).margin(1e-10));
    }
  }
}

TEST_CASE("analytic gradients match central finite differences on all tensors") {
  TaggerConfig cfg;
  cfg.lstm1_units = 2;
  cfg.lstm2_units = 2;
  cfg.pad_len = 4;
  cfg.seed = 13;
  auto model = make_tagger_model(tiny_vectors(3, 5), cfg);

  std::vector<PaddedSeq> batch;
  {
    auto a = pad_or_truncate(model, {"alpha", "beta", "gamma"}, cfg.pad_len);
    a.tags = {1, 0, 2, 0};
    auto b = pad_or_truncate(model, {"delta", "epsilon"}, cfg.pad_len);
    b.tags = {0, 2, 0, 0};
    batch.push_back(a);
    batch.push_back(b);
  }

  tagger_detail::TaggerGrads grads;
  const double base = tagger_detail::loss_and_gradients(model, batch, grads);
  CHECK(base > 0);

  const double h = 1e-5;
  auto params = model.parameter_tensors();
  auto analytic = grads.tensors();
  double worst = 0;
  for (std::size_t ti = 0; ti < params.size(); ++ti) {
    for (std::size_t k = 0; k < params[ti].size(); ++k) {
      const double keep = params[ti][k];
      tagger_detail::TaggerGrads scratch;
      params[ti][k] = keep + h;
      const double up = tagger_detail::loss_and_gradients(model, batch, scratch);
      params[ti][k] = keep - h;
      const double down = tagger_detail::loss_and_gradients(model, batch, scratch);
      params[ti][k] = keep;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic[ti][k];
      if (std::fabs(a) < 1e-7 && std::fabs(numeric) < 1e-7) continue;
      const double rel =
          std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric)});
      INFO(TaggerModel::tensor_name(ti) << "[" << k << "] analytic " << a
                                        << " numeric " << numeric);
      CHECK(rel < 1e-4);
      worst = std::max(worst, rel);
    }
  }
  INFO("worst relative error " << worst);
  CHECK(worst < 1e-4);
}

TEST_CASE("changing tokens or tags at PAD positions changes nothing") {
  TaggerConfig cfg;
  cfg.lstm1_units = 2;
  cfg.lstm2_units = 3;
  cfg.pad_len = 6;
  cfg.seed = 17;
  auto model = make_tagger_model(tiny_vectors(3, 6), cfg);

  auto clean = pad_or_truncate(model, {"alpha", "beta"}, cfg.pad_len);
  clean.tags = {1, 2, 0, 0, 0, 0};
  auto junk = clean;
  junk.ids[3] = 2;   // a real embedding row in the pad region
  junk.ids[5] = 4;
  junk.tags[4] = 2;
  junk.tags[5] = 1;

  tagger_detail::TaggerGrads g1, g2;
  const double l1 = tagger_detail::loss_and_gradients(model, {clean}, g1);
  const double l2 = tagger_detail::loss_and_gradients(model, {junk}, g2);
  CHECK(l1 == l2);
  auto t1 = g1.tensors();
  auto t2 = g2.tensors();
  for (std::size_t ti = 0; ti < t1.size(); ++ti)
    for (std::size_t k = 0; k < t1[ti].size(); ++k)
      CHECK(t1[ti][k] == t2[ti][k]);

  const auto p1 = tagger_forward(model, clean, false);
  const auto p2 = tagger_forward(model, junk, false);
  for (std::size_t t = 0; t < clean.n_real; ++t)
    for (int c = 0; c < 3; ++c)
      CHECK(p1[t][static_cast<std::size_t>(c)] ==
            p2[t][static_cast<std::size_t>(c)]);
}

TEST_CASE("decode_spans joins class tokens in order") {
  // Gold spans from the exported row whose variables read
  // "performance-enhancing practices" / "quit rates and dismissal rates".
  TagSequence ts;
  ts.tokens = {"performance-enhancing", "practices", "will", "be",
               "positively", "related", "to", "both", "quit", "rates",
               "and", "dismissal", "rates"};
  ts.tags = {1, 1, 0, 0, 0, 0, 0, 0, 2, 2, 2, 2, 2};
  const auto spans = decode_spans(ts);
  CHECK(spans.variable_1 == "performance-enhancing practices");
  CHECK(spans.variable_2 == "quit rates and dismissal rates");

  CHECK(decode_spans({{"a", "b"}, {0, 0}}).variable_1.empty());
  CHECK(decode_spans({{"a", "b"}, {0, 0}}).variable_2.empty());

  const auto crossed = decode_spans({{"b", "x", "a"}, {2, 0, 1}});
  CHECK(crossed.variable_1 == "a");
  CHECK(crossed.variable_2 == "b");

  // Non-contiguous runs concatenate; output tokens are exactly the class
  // multiset in original order.
  const auto split_spans =
      decode_spans({{"u", "v", "w", "x"}, {1, 0, 1, 2}});
  CHECK(split_spans.variable_1 == "u w");
  CHECK(split_spans.variable_2 == "x");
}

TEST_CASE("train_tagger validates inputs") {
  TaggerConfig cfg;
  cfg.lstm1_units = 2;
  cfg.lstm2_units = 2;
  const auto vectors = tiny_vectors(3, 7);
  CHECK_THROWS_AS(train_tagger({}, vectors, cfg), Error);
  CHECK_THROWS_AS(train_tagger({{{"alpha"}, {3}}}, vectors, cfg), Error);
  CHECK_THROWS_AS(train_tagger({{{"alpha"}, {0, 1}}}, vectors, cfg), Error);
  CHECK_THROWS_AS(tag(make_tagger_model(vectors, cfg), {}), Error);
}

TEST_CASE("training learns a small synthetic corpus deterministically") {
  const auto data = synth_tagger_corpus(120, 21);
  std::set<std::string> tokens;
  for (const auto& ts : data)
    for (const auto& t : ts.tokens) tokens.insert(t);
  const auto vectors = synth_word_vectors(tokens, 16, 22);

  TaggerConfig cfg;
  cfg.lstm1_units = 8;
  cfg.lstm2_units = 16;
  cfg.pad_len = 30;
  cfg.epochs = 25;
  cfg.batch_size = 8;
  cfg.seed = 23;
  const auto model = train_tagger(data, vectors, cfg);
  REQUIRE(model.epoch_log.size() == 25);
  CHECK(model.epoch_log.back().train_acc > model.epoch_log.front().train_acc);
  CHECK(model.epoch_log.back().train_acc > 0.8);
  for (const auto& s : model.epoch_log) CHECK(s.val_acc.has_value());

  // Seeded determinism: identical data, vectors and config give a
  // byte-identical serialized model.
  const auto again = train_tagger(data, vectors, cfg);
  const auto p1 = temp_path("hyp_tag_a.bin");
  const auto p2 = temp_path("hyp_tag_b.bin");
  save_tagger(model, p1);
  save_tagger(again, p2);
  CHECK(read_file(p1) == read_file(p2));

  // Round trip preserves tagging; tagging is deterministic.
  const auto loaded = load_tagger(p1);
  for (int i = 0; i < 10; ++i) {
    const auto a = tag(model, data[static_cast<std::size_t>(i)].tokens);
    const auto b = tag(loaded, data[static_cast<std::size_t>(i)].tokens);
    const auto c = tag(loaded, data[static_cast<std::size_t>(i)].tokens);
    CHECK(a.tags == b.tags);
    CHECK(b.tags == c.tags);
  }

  const auto csv = epoch_log_csv(model);
  CHECK(csv.rfind("epoch,train_acc,val_acc", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);  // header + 25 epochs
}

TEST_CASE("per_class_metrics equals brute-force confusion counting") {
  // preds == golds -> all metrics 1.
  std::vector<TagSequence> golds = {{{"a", "b", "c"}, {0, 1, 2}},
                                    {{"d", "e"}, {2, 1}}};
  auto report = per_class_metrics(golds, golds);
  for (int c = 0; c < 3; ++c) {
    CHECK(report.per_class[c].precision == 1.0);
    CHECK(report.per_class[c].recall == 1.0);
    CHECK(report.per_class[c].f1 == 1.0);
  }
  CHECK(report.token_accuracy == 1.0);
  CHECK(report.overall_nodes.f1 == 1.0);

  // Random 200-token fixture against independent counting.
  Rng rng(29);
  std::vector<TagSequence> preds, gold2;
  std::vector<int> flat_p, flat_g;
  for (int s = 0; s < 20; ++s) {
    TagSequence p, g;
    for (int t = 0; t < 10; ++t) {
      p.tokens.push_back("w");
      g.tokens.push_back("w");
      p.tags.push_back(static_cast<int>(rng.bounded(3)));
      g.tags.push_back(static_cast<int>(rng.bounded(3)));
      flat_p.push_back(p.tags.back());
      flat_g.push_back(g.tags.back());
    }
    preds.push_back(p);
    gold2.push_back(g);
  }
  report = per_class_metrics(preds, gold2);
  for (int c = 0; c < 3; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < flat_p.size(); ++i) {
      if (flat_p[i] == c && flat_g[i] == c) ++tp;
      if (flat_p[i] == c && flat_g[i] != c) ++fp;
      if (flat_p[i] != c && flat_g[i] == c) ++fn;
    }
    const double prec = tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0;
    const double rec = tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0;
    CHECK(report.per_class[c].precision == Catch::Approx(prec).margin(1e-12));
    CHECK(report.per_class[c].recall == Catch::Approx(rec).margin(1e-12));
  }
  // Overall (nodes) pools classes 1 and 2 only.
  std::size_t tp12 = 0, fp12 = 0, fn12 = 0;
  for (int c = 1; c <= 2; ++c)
    for (std::size_t i = 0; i < flat_p.size(); ++i) {
      if (flat_p[i] == c && flat_g[i] == c) ++tp12;
      if (flat_p[i] == c && flat_g[i] != c) ++fp12;
      if (flat_p[i] != c && flat_g[i] == c) ++fn12;
    }
  CHECK(report.overall_nodes.precision ==
        Catch::Approx(static_cast<double>(tp12) / (tp12 + fp12)).margin(1e-12));
  CHECK(report.overall_nodes.recall ==
        Catch::Approx(static_cast<double>(tp12) / (tp12 + fn12)).margin(1e-12));
  // The macro-all-classes variant is the mean of the three per-class F-1s.
  CHECK(report.overall_macro_all.f1 ==
        Catch::Approx((report.per_class[0].f1 + report.per_class[1].f1 +
                       report.per_class[2].f1) /
                      3.0)
            .margin(1e-12));

  CHECK_THROWS_AS(per_class_metrics(preds, golds), Error);
}
