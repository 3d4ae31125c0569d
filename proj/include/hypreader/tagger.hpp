#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/evalkit.hpp"
#include "hypreader/lexicon.hpp"
#include "hypreader/rng.hpp"
#include "hypreader/serialize.hpp"

namespace hypreader {

// Task 2: per-token labeling of a hypothesis into non-node (0), cause (1) and
// outcome (2). Frozen pre-trained embeddings feed a two-layer stacked
// bidirectional LSTM with a time-distributed dense softmax head. Trained with
// RMSprop on masked categorical cross-entropy; dropout is spatial on the
// embedding channels and variational on the hidden-state recurrence.

struct TagSequence {
  std::vector<std::string> tokens;
  std::vector<int> tags;  // 0, 1 or 2; same length as tokens
};

struct RelationSpans {
  std::string variable_1;
  std::string variable_2;
};

struct TaggerConfig {
  int pad_len = 50;
  int lstm1_units = 32;
  int lstm2_units = 128;
  double spatial_dropout = 0.5;
  double recurrent_dropout = 0.1;
  double lr = 0.001;  // RMSprop
  double rho = 0.9;
  double epsilon = 1e-7;
  int batch_size = 32;
  int epochs = 50;
  double validation_split = 0.1;
  std::uint64_t seed = 1;

  void validate() const {
    if (pad_len < 1) throw Error("BadConfig", "pad_len must be >= 1");
    if (lstm1_units < 1 || lstm2_units < 1)
      throw Error("BadConfig", "lstm units must be >= 1");
    if (spatial_dropout < 0 || spatial_dropout >= 1 || recurrent_dropout < 0 ||
        recurrent_dropout >= 1)
      throw Error("BadConfig", "dropout rates must lie in [0, 1)");
    if (batch_size < 1) throw Error("BadConfig", "batch_size must be >= 1");
    if (epochs < 1) throw Error("BadConfig", "epochs must be >= 1");
    if (validation_split < 0 || validation_split >= 1)
      throw Error("BadConfig", "validation_split must lie in [0, 1)");
  }
};

// One LSTM direction. Gate order in the stacked weight rows is i, f, g, o.
struct LstmWeights {
  int input_dim = 0;
  int units = 0;
  std::vector<double> w;  // 4*units x input_dim
  std::vector<double> u;  // 4*units x units
  std::vector<double> b;  // 4*units

  void resize(int in_dim, int n_units) {
    input_dim = in_dim;
    units = n_units;
    w.assign(static_cast<std::size_t>(4 * units) * input_dim, 0.0);
    u.assign(static_cast<std::size_t>(4 * units) * units, 0.0);
    b.assign(static_cast<std::size_t>(4 * units), 0.0);
  }
};

constexpr std::size_t kPadIndex = 0;
constexpr std::size_t kUnkIndex = 1;

struct EpochStats {
  int epoch = 0;
  double train_acc = 0.0;
  std::optional<double> val_acc;
};

class TaggerModel {
 public:
  TaggerConfig config;
  int embed_dim = 0;
  std::vector<std::string> embed_tokens;  // row i+2 <- embed_tokens[i]
  std::unordered_map<std::string, std::size_t> embed_index;
  std::vector<double> embedding;  // (V+2) x embed_dim; rows 0 (PAD), 1 (UNK) zero
  LstmWeights l1f, l1b, l2f, l2b;
  std::vector<double> dense_w;  // 3 x (2*lstm2_units)
  std::vector<double> dense_b;  // 3
  std::vector<EpochStats> epoch_log;  // not serialized

  std::size_t embedding_rows() const { return embed_tokens.size() + 2; }

  std::size_t token_index(const std::string& token) const {
    const auto it = embed_index.find(to_lower_ascii(token));
    return it == embed_index.end() ? kUnkIndex : it->second;
  }

  std::vector<std::span<double>> parameter_tensors() {
    return {std::span<double>(l1f.w), std::span<double>(l1f.u), std::span<double>(l1f.b),
            std::span<double>(l1b.w), std::span<double>(l1b.u), std::span<double>(l1b.b),
            std::span<double>(l2f.w), std::span<double>(l2f.u), std::span<double>(l2f.b),
            std::span<double>(l2b.w), std::span<double>(l2b.u), std::span<double>(l2b.b),
            std::span<double>(dense_w), std::span<double>(dense_b)};
  }

  static const char* tensor_name(std::size_t i) {
    static const char* names[] = {"l1f.w", "l1f.u", "l1f.b", "l1b.w", "l1b.u",
                                  "l1b.b", "l2f.w", "l2f.u", "l2f.b", "l2b.w",
                                  "l2b.u", "l2b.b", "dense.w", "dense.b"};
    return names[i];
  }
};

struct PaddedSeq {
  std::vector<std::size_t> ids;  // length pad_len, PAD-filled tail
  std::size_t n_real = 0;
  std::vector<int> tags;  // length pad_len for training examples
};

// Right-pad with the PAD index or truncate the tail to pad_len. PAD positions
// are excluded from loss and metrics via n_real, never via the ids.
inline PaddedSeq pad_or_truncate(const TaggerModel& model,
                                 const std::vector<std::string>& tokens,
                                 int pad_len) {
  if (pad_len < 1) throw Error("BadConfig", "pad_len must be >= 1");
  PaddedSeq seq;
  seq.n_real = std::min<std::size_t>(tokens.size(),
                                     static_cast<std::size_t>(pad_len));
  seq.ids.assign(static_cast<std::size_t>(pad_len), kPadIndex);
  for (std::size_t i = 0; i < seq.n_real; ++i)
    seq.ids[i] = model.token_index(tokens[i]);
  return seq;
}

namespace tagger_detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Per-sequence dropout masks (variational style: one mask per sequence).
struct DropoutMasks {
  bool active = false;
  std::vector<double> spatial;  // embed_dim, scaled keep mask
  std::vector<double> rec_l1f, rec_l1b, rec_l2f, rec_l2b;  // per-unit
};

inline std::vector<double> make_keep_mask(std::size_t n, double drop_rate,
                                          Rng& rng) {
  std::vector<double> mask(n, 1.0);
  if (drop_rate <= 0.0) return mask;
  const double scale = 1.0 / (1.0 - drop_rate);
  for (auto& m : mask) m = rng.bernoulli(drop_rate) ? 0.0 : scale;
  return mask;
}

inline DropoutMasks draw_masks(const TaggerModel& model, Rng& rng) {
  DropoutMasks masks;
  masks.active = true;
  masks.spatial = make_keep_mask(static_cast<std::size_t>(model.embed_dim),
                                 model.config.spatial_dropout, rng);
  const auto rec = [&](int units) {
    return make_keep_mask(static_cast<std::size_t>(units),
                          model.config.recurrent_dropout, rng);
  };
  masks.rec_l1f = rec(model.config.lstm1_units);
  masks.rec_l1b = rec(model.config.lstm1_units);
  masks.rec_l2f = rec(model.config.lstm2_units);
  masks.rec_l2b = rec(model.config.lstm2_units);
  return masks;
}

// Forward cache for one direction over the real steps of one sequence,
// indexed in processing order (reversed for the backward direction).
struct DirCache {
  std::vector<double> x;        // steps x input_dim
  std::vector<double> gates;    // steps x 4U (post-activation i,f,g,o)
  std::vector<double> c;        // steps x U
  std::vector<double> tanh_c;   // steps x U
  std::vector<double> h;        // steps x U
  std::vector<double> h_prev_dropped;  // steps x U
};

inline void run_direction(const LstmWeights& lw, const double* inputs,
                          std::size_t steps, const double* rec_mask,
                          DirCache& cache) {
  const int u = lw.units;
  const int d = lw.input_dim;
  const std::size_t su = static_cast<std::size_t>(u);
  const std::size_t sd = static_cast<std::size_t>(d);
  cache.x.assign(steps * sd, 0.0);
  cache.gates.assign(steps * 4 * su, 0.0);
  cache.c.assign(steps * su, 0.0);
  cache.tanh_c.assign(steps * su, 0.0);
  cache.h.assign(steps * su, 0.0);
  cache.h_prev_dropped.assign(steps * su, 0.0);
  std::vector<double> z(4 * su);
  for (std::size_t s = 0; s < steps; ++s) {
    const double* x = inputs + s * sd;
    std::copy(x, x + sd, cache.x.begin() + static_cast<std::ptrdiff_t>(s * sd));
    double* hp = cache.h_prev_dropped.data() + s * su;
    if (s > 0) {
      const double* h_prev = cache.h.data() + (s - 1) * su;
      for (std::size_t k = 0; k < su; ++k)
        hp[k] = rec_mask ? h_prev[k] * rec_mask[k] : h_prev[k];
    }
    for (std::size_t r = 0; r < 4 * su; ++r) {
      const double* wr = lw.w.data() + r * sd;
      double acc = lw.b[r];
      for (std::size_t k = 0; k < sd; ++k) acc += wr[k] * x[k];
      const double* ur = lw.u.data() + r * su;
      for (std::size_t k = 0; k < su; ++k) acc += ur[k] * hp[k];
      z[r] = acc;
    }
    double* gates = cache.gates.data() + s * 4 * su;
    double* c = cache.c.data() + s * su;
    double* tc = cache.tanh_c.data() + s * su;
    double* h = cache.h.data() + s * su;
    const double* c_prev = s > 0 ? cache.c.data() + (s - 1) * su : nullptr;
    for (std::size_t k = 0; k < su; ++k) {
      const double gi = sigmoid(z[k]);
      const double gf = sigmoid(z[su + k]);
      const double gg = std::tanh(z[2 * su + k]);
      const double go = sigmoid(z[3 * su + k]);
      gates[k] = gi;
      gates[su + k] = gf;
      gates[2 * su + k] = gg;
      gates[3 * su + k] = go;
      c[k] = gf * (c_prev ? c_prev[k] : 0.0) + gi * gg;
      tc[k] = std::tanh(c[k]);
      h[k] = go * tc[k];
    }
  }
}

struct LstmGrads {
  std::vector<double> w, u, b;
  void resize_like(const LstmWeights& lw) {
    w.assign(lw.w.size(), 0.0);
    u.assign(lw.u.size(), 0.0);
    b.assign(lw.b.size(), 0.0);
  }
};

// BPTT through one direction. dh_steps holds dL/dh per step in processing
// order; d_inputs (steps x input_dim) receives dL/dx for the layer below.
inline void run_direction_backward(const LstmWeights& lw, const DirCache& cache,
                                   const std::vector<double>& dh_steps,
                                   const double* rec_mask, LstmGrads& grads,
                                   std::vector<double>* d_inputs) {
  const std::size_t su = static_cast<std::size_t>(lw.units);
  const std::size_t sd = static_cast<std::size_t>(lw.input_dim);
  const std::size_t steps = cache.h.size() / std::max<std::size_t>(su, 1);
  if (d_inputs) d_inputs->assign(steps * sd, 0.0);
  std::vector<double> dh_carry(su, 0.0), dc_carry(su, 0.0), dz(4 * su);
  for (std::size_t s = steps; s-- > 0;) {
    const double* gates = cache.gates.data() + s * 4 * su;
    const double* tc = cache.tanh_c.data() + s * su;
    const double* c_prev = s > 0 ? cache.c.data() + (s - 1) * su : nullptr;
    for (std::size_t k = 0; k < su; ++k) {
      const double gi = gates[k];
      const double gf = gates[su + k];
      const double gg = gates[2 * su + k];
      const double go = gates[3 * su + k];
      const double dht = dh_steps[s * su + k] + dh_carry[k];
      const double dot = dht * tc[k];
      double dc = dc_carry[k] + dht * go * (1.0 - tc[k] * tc[k]);
      dz[k] = dc * gg * gi * (1.0 - gi);
      dz[su + k] = dc * (c_prev ? c_prev[k] : 0.0) * gf * (1.0 - gf);
      dz[2 * su + k] = dc * gi * (1.0 - gg * gg);
      dz[3 * su + k] = dot * go * (1.0 - go);
      dc_carry[k] = dc * gf;
    }
    const double* x = cache.x.data() + s * sd;
    const double* hp = cache.h_prev_dropped.data() + s * su;
    for (std::size_t r = 0; r < 4 * su; ++r) {
      const double g = dz[r];
      if (g == 0.0) continue;
      double* gw = grads.w.data() + r * sd;
      for (std::size_t k = 0; k < sd; ++k) gw[k] += g * x[k];
      double* gu = grads.u.data() + r * su;
      for (std::size_t k = 0; k < su; ++k) gu[k] += g * hp[k];
      grads.b[r] += g;
    }
    if (d_inputs) {
      double* dx = d_inputs->data() + s * sd;
      for (std::size_t r = 0; r < 4 * su; ++r) {
        const double g = dz[r];
        if (g == 0.0) continue;
        const double* wr = lw.w.data() + r * sd;
        for (std::size_t k = 0; k < sd; ++k) dx[k] += g * wr[k];
      }
    }
    std::fill(dh_carry.begin(), dh_carry.end(), 0.0);
    for (std::size_t r = 0; r < 4 * su; ++r) {
      const double g = dz[r];
      if (g == 0.0) continue;
      const double* ur = lw.u.data() + r * su;
      for (std::size_t k = 0; k < su; ++k) dh_carry[k] += g * ur[k];
    }
    if (rec_mask)
      for (std::size_t k = 0; k < su; ++k) dh_carry[k] *= rec_mask[k];
  }
}

struct SequenceCache {
  std::vector<double> x;  // n_real x embed_dim, post spatial dropout
  DirCache l1f, l1b, l2f, l2b;
  std::vector<double> o1;  // n_real x 2*H1, position-indexed
  std::vector<double> o2;  // n_real x 2*H2, position-indexed
  std::vector<double> probs;  // pad_len x 3
};

}  // namespace tagger_detail

// Per-position class probabilities. PAD positions (t >= n_real) emit
// softmax(dense bias) of the zero state; they are masked out of loss and
// metrics everywhere else.
inline std::vector<std::array<double, 3>> tagger_forward(
    const TaggerModel& model, const PaddedSeq& seq, bool training_mode,
    Rng* rng = nullptr) {
  tagger_detail::SequenceCache cache;
  tagger_detail::DropoutMasks masks;
  if (training_mode) {
    if (!rng) throw Error("BadConfig", "training-mode forward needs an Rng");
    masks = tagger_detail::draw_masks(model, *rng);
  }
  const std::size_t n = seq.n_real;
  const std::size_t e = static_cast<std::size_t>(model.embed_dim);
  const std::size_t h1 = static_cast<std::size_t>(model.config.lstm1_units);
  const std::size_t h2 = static_cast<std::size_t>(model.config.lstm2_units);

  cache.x.assign(std::max<std::size_t>(n, 1) * e, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    const double* row = model.embedding.data() + seq.ids[t] * e;
    double* x = cache.x.data() + t * e;
    for (std::size_t k = 0; k < e; ++k)
      x[k] = masks.active ? row[k] * masks.spatial[k] : row[k];
  }

  std::vector<double> rev_x(n * e);
  for (std::size_t t = 0; t < n; ++t)
    std::copy_n(cache.x.data() + (n - 1 - t) * e, e, rev_x.data() + t * e);

  tagger_detail::run_direction(model.l1f, cache.x.data(), n,
                               masks.active ? masks.rec_l1f.data() : nullptr,
                               cache.l1f);
  tagger_detail::run_direction(model.l1b, rev_x.data(), n,
                               masks.active ? masks.rec_l1b.data() : nullptr,
                               cache.l1b);

  cache.o1.assign(n * 2 * h1, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    std::copy_n(cache.l1f.h.data() + t * h1, h1, cache.o1.data() + t * 2 * h1);
    std::copy_n(cache.l1b.h.data() + (n - 1 - t) * h1, h1,
                cache.o1.data() + t * 2 * h1 + h1);
  }

  std::vector<double> rev_o1(n * 2 * h1);
  for (std::size_t t = 0; t < n; ++t)
    std::copy_n(cache.o1.data() + (n - 1 - t) * 2 * h1, 2 * h1,
                rev_o1.data() + t * 2 * h1);

  tagger_detail::run_direction(model.l2f, cache.o1.data(), n,
                               masks.active ? masks.rec_l2f.data() : nullptr,
                               cache.l2f);
  tagger_detail::run_direction(model.l2b, rev_o1.data(), n,
                               masks.active ? masks.rec_l2b.data() : nullptr,
                               cache.l2b);

  std::vector<std::array<double, 3>> probs(
      static_cast<std::size_t>(model.config.pad_len));
  std::vector<double> concat(2 * h2, 0.0);
  for (std::size_t t = 0; t < probs.size(); ++t) {
    if (t < n) {
      std::copy_n(cache.l2f.h.data() + t * h2, h2, concat.data());
      std::copy_n(cache.l2b.h.data() + (n - 1 - t) * h2, h2, concat.data() + h2);
    } else {
      std::fill(concat.begin(), concat.end(), 0.0);
    }
    double logits[3];
    for (int c = 0; c < 3; ++c) {
      const double* wr = model.dense_w.data() + static_cast<std::size_t>(c) * 2 * h2;
      double acc = model.dense_b[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < 2 * h2; ++k) acc += wr[k] * concat[k];
      logits[c] = acc;
    }
    const double mx = std::max({logits[0], logits[1], logits[2]});
    double z = 0.0;
    for (int c = 0; c < 3; ++c) {
      probs[t][static_cast<std::size_t>(c)] = std::exp(logits[c] - mx);
      z += probs[t][static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < 3; ++c) probs[t][static_cast<std::size_t>(c)] /= z;
  }
  return probs;
}

namespace tagger_detail {

struct TaggerGrads {
  LstmGrads l1f, l1b, l2f, l2b;
  std::vector<double> dense_w, dense_b;

  void resize_like(const TaggerModel& m) {
    l1f.resize_like(m.l1f);
    l1b.resize_like(m.l1b);
    l2f.resize_like(m.l2f);
    l2b.resize_like(m.l2b);
    dense_w.assign(m.dense_w.size(), 0.0);
    dense_b.assign(m.dense_b.size(), 0.0);
  }

  std::vector<std::span<double>> tensors() {
    return {std::span<double>(l1f.w), std::span<double>(l1f.u), std::span<double>(l1f.b),
            std::span<double>(l1b.w), std::span<double>(l1b.u), std::span<double>(l1b.b),
            std::span<double>(l2f.w), std::span<double>(l2f.u), std::span<double>(l2f.b),
            std::span<double>(l2b.w), std::span<double>(l2b.u), std::span<double>(l2b.b),
            std::span<double>(dense_w), std::span<double>(dense_b)};
  }

  void scale(double f) {
    for (auto span : tensors())
      for (auto& g : span) g *= f;
  }
};

// Forward + backward for one sequence; accumulates unnormalized token CE loss
// and gradients, and returns the number of real tokens contributing. Dropout
// masks are optional (training only).
inline std::size_t sequence_loss_grads(const TaggerModel& model,
                                       const PaddedSeq& seq,
                                       const DropoutMasks& masks,
                                       double& loss_sum, TaggerGrads& grads,
                                       std::size_t* correct = nullptr) {
  const std::size_t n = seq.n_real;
  if (n == 0) return 0;
  const std::size_t e = static_cast<std::size_t>(model.embed_dim);
  const std::size_t h1 = static_cast<std::size_t>(model.config.lstm1_units);
  const std::size_t h2 = static_cast<std::size_t>(model.config.lstm2_units);

  // Forward (cached).
  std::vector<double> x(n * e);
  for (std::size_t t = 0; t < n; ++t) {
    const double* row = model.embedding.data() + seq.ids[t] * e;
    for (std::size_t k = 0; k < e; ++k)
      x[t * e + k] = masks.active ? row[k] * masks.spatial[k] : row[k];
  }
  std::vector<double> rev_x(n * e);
  for (std::size_t t = 0; t < n; ++t)
    std::copy_n(x.data() + (n - 1 - t) * e, e, rev_x.data() + t * e);

  DirCache c1f, c1b, c2f, c2b;
  run_direction(model.l1f, x.data(), n,
                masks.active ? masks.rec_l1f.data() : nullptr, c1f);
  run_direction(model.l1b, rev_x.data(), n,
                masks.active ? masks.rec_l1b.data() : nullptr, c1b);

  std::vector<double> o1(n * 2 * h1);
  for (std::size_t t = 0; t < n; ++t) {
    std::copy_n(c1f.h.data() + t * h1, h1, o1.data() + t * 2 * h1);
    std::copy_n(c1b.h.data() + (n - 1 - t) * h1, h1, o1.data() + t * 2 * h1 + h1);
  }
  std::vector<double> rev_o1(n * 2 * h1);
  for (std::size_t t = 0; t < n; ++t)
    std::copy_n(o1.data() + (n - 1 - t) * 2 * h1, 2 * h1,
                rev_o1.data() + t * 2 * h1);

  run_direction(model.l2f, o1.data(), n,
                masks.active ? masks.rec_l2f.data() : nullptr, c2f);
  run_direction(model.l2b, rev_o1.data(), n,
                masks.active ? masks.rec_l2b.data() : nullptr, c2b);

  // Dense head + loss, and dL/dh for both layer-2 directions (step order).
  std::vector<double> dh2f(n * h2, 0.0), dh2b(n * h2, 0.0);
  std::vector<double> concat(2 * h2);
  for (std::size_t t = 0; t < n; ++t) {
    std::copy_n(c2f.h.data() + t * h2, h2, concat.data());
    std::copy_n(c2b.h.data() + (n - 1 - t) * h2, h2, concat.data() + h2);
    double logits[3];
    for (int c = 0; c < 3; ++c) {
      const double* wr = model.dense_w.data() + static_cast<std::size_t>(c) * 2 * h2;
      double acc = model.dense_b[static_cast<std::size_t>(c)];
      for (std::size_t k = 0; k < 2 * h2; ++k) acc += wr[k] * concat[k];
      logits[c] = acc;
    }
    const double mx = std::max({logits[0], logits[1], logits[2]});
    double p[3], z = 0.0;
    for (int c = 0; c < 3; ++c) {
      p[c] = std::exp(logits[c] - mx);
      z += p[c];
    }
    int argmax = 0;
    for (int c = 0; c < 3; ++c) {
      p[c] /= z;
      if (p[c] > p[argmax]) argmax = c;
    }
    const int gold = seq.tags[t];
    if (correct && argmax == gold) ++*correct;
    loss_sum += -std::log(std::max(p[gold], 1e-300));
    for (int c = 0; c < 3; ++c) {
      const double g = p[c] - (c == gold ? 1.0 : 0.0);
      grads.dense_b[static_cast<std::size_t>(c)] += g;
      double* gw = grads.dense_w.data() + static_cast<std::size_t>(c) * 2 * h2;
      for (std::size_t k = 0; k < 2 * h2; ++k) gw[k] += g * concat[k];
      const double* wr = model.dense_w.data() + static_cast<std::size_t>(c) * 2 * h2;
      for (std::size_t k = 0; k < h2; ++k) dh2f[t * h2 + k] += g * wr[k];
      for (std::size_t k = 0; k < h2; ++k)
        dh2b[(n - 1 - t) * h2 + k] += g * wr[h2 + k];
    }
  }

  // Layer 2 BPTT; collect dL/d(o1) by position.
  std::vector<double> d_in2f, d_in2b;
  run_direction_backward(model.l2f, c2f, dh2f,
                         masks.active ? masks.rec_l2f.data() : nullptr,
                         grads.l2f, &d_in2f);
  run_direction_backward(model.l2b, c2b, dh2b,
                         masks.active ? masks.rec_l2b.data() : nullptr,
                         grads.l2b, &d_in2b);
  std::vector<double> do1(n * 2 * h1, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < 2 * h1; ++k) {
      do1[t * 2 * h1 + k] += d_in2f[t * 2 * h1 + k];
      do1[t * 2 * h1 + k] += d_in2b[(n - 1 - t) * 2 * h1 + k];
    }
  }

  // Layer 1 BPTT (embeddings are frozen; no d_inputs needed).
  std::vector<double> dh1f(n * h1, 0.0), dh1b(n * h1, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < h1; ++k) {
      dh1f[t * h1 + k] = do1[t * 2 * h1 + k];
      dh1b[(n - 1 - t) * h1 + k] = do1[t * 2 * h1 + h1 + k];
    }
  }
  run_direction_backward(model.l1f, c1f, dh1f,
                         masks.active ? masks.rec_l1f.data() : nullptr,
                         grads.l1f, nullptr);
  run_direction_backward(model.l1b, c1b, dh1b,
                         masks.active ? masks.rec_l1b.data() : nullptr,
                         grads.l1b, nullptr);
  return n;
}

// Mean masked cross-entropy over a batch plus gradients; dropout off. This is
// the pure function the finite-difference checks probe.
inline double loss_and_gradients(const TaggerModel& model,
                                 const std::vector<PaddedSeq>& batch,
                                 TaggerGrads& grads) {
  grads.resize_like(model);
  DropoutMasks no_dropout;
  double loss_sum = 0.0;
  std::size_t tokens = 0;
  for (const auto& seq : batch)
    tokens += sequence_loss_grads(model, seq, no_dropout, loss_sum, grads);
  if (tokens == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(tokens);
  grads.scale(inv);
  return loss_sum * inv;
}

}  // namespace tagger_detail

inline void init_tagger_weights(TaggerModel& model, Rng& rng) {
  const auto glorot = [&](std::vector<double>& w, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& x : w) x = rng.uniform(-limit, limit);
  };
  const auto init_layer = [&](LstmWeights& lw) {
    glorot(lw.w, lw.input_dim, 4 * lw.units);
    glorot(lw.u, lw.units, 4 * lw.units);
    std::fill(lw.b.begin(), lw.b.end(), 0.0);
    // Forget-gate bias starts at 1.
    for (int k = 0; k < lw.units; ++k)
      lw.b[static_cast<std::size_t>(lw.units + k)] = 1.0;
  };
  init_layer(model.l1f);
  init_layer(model.l1b);
  init_layer(model.l2f);
  init_layer(model.l2b);
  glorot(model.dense_w, 2 * model.config.lstm2_units, 3);
  std::fill(model.dense_b.begin(), model.dense_b.end(), 0.0);
}

inline TaggerModel make_tagger_model(const WordVectorTable& vectors,
                                     const TaggerConfig& cfg) {
  cfg.validate();
  if (vectors.dim() == 0) throw Error("EmptyVectors", "word vectors are empty");
  TaggerModel model;
  model.config = cfg;
  model.embed_dim = static_cast<int>(vectors.dim());
  model.embed_tokens = vectors.sorted_tokens();
  const std::size_t e = vectors.dim();
  model.embedding.assign((model.embed_tokens.size() + 2) * e, 0.0);
  for (std::size_t i = 0; i < model.embed_tokens.size(); ++i) {
    model.embed_index.emplace(model.embed_tokens[i], i + 2);
    const double* v = vectors.find(model.embed_tokens[i]);
    std::copy_n(v, e, model.embedding.data() + (i + 2) * e);
  }
  model.l1f.resize(model.embed_dim, cfg.lstm1_units);
  model.l1b.resize(model.embed_dim, cfg.lstm1_units);
  model.l2f.resize(2 * cfg.lstm1_units, cfg.lstm2_units);
  model.l2b.resize(2 * cfg.lstm1_units, cfg.lstm2_units);
  model.dense_w.assign(static_cast<std::size_t>(3) * 2 *
                           static_cast<std::size_t>(cfg.lstm2_units),
                       0.0);
  model.dense_b.assign(3, 0.0);
  Rng rng(cfg.seed);
  init_tagger_weights(model, rng);
  return model;
}

// RMSprop on masked categorical cross-entropy; per-epoch training accuracy is
// accumulated from the (dropout-active) training passes and validation
// accuracy from a seeded held-out slice, giving the epoch curve.
inline TaggerModel train_tagger(const std::vector<TagSequence>& data,
                                const WordVectorTable& vectors,
                                const TaggerConfig& cfg) {
  if (data.empty()) throw Error("EmptyCorpus", "no training sequences");
  for (const auto& ts : data) {
    if (ts.tokens.size() != ts.tags.size())
      throw Error("LengthMismatch", "tokens and tags differ in length");
    for (const int t : ts.tags)
      if (t < 0 || t > 2) throw Error("BadTag", "tags must be 0, 1 or 2");
  }
  TaggerModel model = make_tagger_model(vectors, cfg);
  Rng rng(cfg.seed + 0x9e3779b9);

  std::vector<PaddedSeq> seqs(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    seqs[i] = pad_or_truncate(model, data[i].tokens, cfg.pad_len);
    seqs[i].tags.assign(static_cast<std::size_t>(cfg.pad_len), 0);
    for (std::size_t t = 0; t < seqs[i].n_real; ++t)
      seqs[i].tags[t] = data[i].tags[t];
  }

  auto order = rng.permutation(seqs.size());
  std::size_t n_val =
      static_cast<std::size_t>(cfg.validation_split *
                               static_cast<double>(seqs.size()));
  if (cfg.validation_split > 0 && n_val == 0 && seqs.size() > 1) n_val = 1;
  std::vector<std::size_t> val_ids(order.begin(),
                                   order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train_ids(order.begin() + static_cast<std::ptrdiff_t>(n_val),
                                     order.end());
  if (train_ids.empty()) throw Error("EmptyCorpus", "validation split ate all data");

  tagger_detail::TaggerGrads grads, rms;
  grads.resize_like(model);
  rms.resize_like(model);
  auto params = model.parameter_tensors();
  auto rms_t = rms.tensors();

  const auto evaluate_acc = [&](const std::vector<std::size_t>& ids) {
    std::size_t correct = 0, total = 0;
    for (const auto i : ids) {
      const auto probs = tagger_forward(model, seqs[i], false);
      for (std::size_t t = 0; t < seqs[i].n_real; ++t) {
        int argmax = 0;
        for (int c = 1; c < 3; ++c)
          if (probs[t][static_cast<std::size_t>(c)] >
              probs[t][static_cast<std::size_t>(argmax)])
            argmax = c;
        if (argmax == seqs[i].tags[t]) ++correct;
        ++total;
      }
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train_ids);
    std::size_t epoch_correct = 0, epoch_total = 0;
    for (std::size_t b = 0; b < train_ids.size();
         b += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          train_ids.size(), b + static_cast<std::size_t>(cfg.batch_size));
      grads.resize_like(model);
      double loss_sum = 0.0;
      std::size_t tokens = 0;
      for (std::size_t s = b; s < end; ++s) {
        const auto masks = tagger_detail::draw_masks(model, rng);
        std::size_t correct = 0;
        tokens += tagger_detail::sequence_loss_grads(
            model, seqs[train_ids[s]], masks, loss_sum, grads, &correct);
        epoch_correct += correct;
        epoch_total += seqs[train_ids[s]].n_real;
      }
      if (tokens == 0) continue;
      grads.scale(1.0 / static_cast<double>(tokens));
      auto grad_t = grads.tensors();
      for (std::size_t ti = 0; ti < params.size(); ++ti) {
        auto p = params[ti];
        auto g = grad_t[ti];
        auto a = rms_t[ti];
        for (std::size_t k = 0; k < p.size(); ++k) {
          a[k] = cfg.rho * a[k] + (1.0 - cfg.rho) * g[k] * g[k];
          p[k] -= cfg.lr * g[k] / (std::sqrt(a[k]) + cfg.epsilon);
        }
      }
    }
    EpochStats stats;
    stats.epoch = epoch + 1;
    stats.train_acc = epoch_total ? static_cast<double>(epoch_correct) /
                                        static_cast<double>(epoch_total)
                                  : 0.0;
    if (!val_ids.empty()) stats.val_acc = evaluate_acc(val_ids);
    model.epoch_log.push_back(stats);
  }
  return model;
}

// Per-position argmax with dropout disabled; PAD stripped; ties break toward
// the lower class index.
inline TagSequence tag(const TaggerModel& model,
                       const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw Error("EmptySentence", "cannot tag no tokens");
  const auto seq = pad_or_truncate(model, tokens, model.config.pad_len);
  const auto probs = tagger_forward(model, seq, false);
  TagSequence out;
  out.tokens = tokens;
  out.tags.resize(tokens.size(), 0);
  for (std::size_t t = 0; t < seq.n_real; ++t) {
    int argmax = 0;
    for (int c = 1; c < 3; ++c)
      if (probs[t][static_cast<std::size_t>(c)] >
          probs[t][static_cast<std::size_t>(argmax)])
        argmax = c;
    out.tags[t] = argmax;
  }
  return out;
}

// variable_1 joins all tokens tagged 1 in order, variable_2 all tokens tagged
// 2; non-contiguous runs concatenate, aggregating same-level nodes into one.
inline RelationSpans decode_spans(const TagSequence& ts) {
  RelationSpans spans;
  for (std::size_t i = 0; i < ts.tokens.size() && i < ts.tags.size(); ++i) {
    std::string* target = nullptr;
    if (ts.tags[i] == 1) target = &spans.variable_1;
    else if (ts.tags[i] == 2) target = &spans.variable_2;
    if (!target) continue;
    if (!target->empty()) *target += ' ';
    *target += ts.tokens[i];
  }
  return spans;
}

struct TaggerEvalReport {
  Metrics per_class[3];
  Metrics overall_nodes;      // micro average over classes 1 and 2
  Metrics overall_macro_all;  // macro average over all three classes
  double token_accuracy = 0.0;
  std::size_t token_count = 0;
};

// Token-level metrics per class with PAD excluded (inputs are unpadded).
inline TaggerEvalReport per_class_metrics(const std::vector<TagSequence>& preds,
                                          const std::vector<TagSequence>& golds) {
  if (preds.size() != golds.size())
    throw Error("LengthMismatch", "prediction/gold list sizes differ");
  std::vector<int> flat_pred, flat_gold;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].tags.size() != golds[i].tags.size())
      throw Error("LengthMismatch", "sequence " + std::to_string(i) +
                                        " lengths differ");
    flat_pred.insert(flat_pred.end(), preds[i].tags.begin(), preds[i].tags.end());
    flat_gold.insert(flat_gold.end(), golds[i].tags.begin(), golds[i].tags.end());
  }
  TaggerEvalReport report;
  report.token_count = flat_pred.size();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < flat_pred.size(); ++i)
    if (flat_pred[i] == flat_gold[i]) ++correct;
  report.token_accuracy =
      flat_pred.empty() ? 0.0
                        : static_cast<double>(correct) /
                              static_cast<double>(flat_pred.size());
  std::vector<ConfusionCounts> counts(3);
  std::vector<Metrics> per_class(3);
  for (int c = 0; c < 3; ++c) {
    counts[static_cast<std::size_t>(c)] = confusion_counts(flat_pred, flat_gold, c);
    per_class[static_cast<std::size_t>(c)] =
        metrics_from_counts(counts[static_cast<std::size_t>(c)]);
    report.per_class[c] = per_class[static_cast<std::size_t>(c)];
  }
  report.overall_nodes = micro_average({counts[1], counts[2]});
  report.overall_macro_all = macro_average(per_class);
  return report;
}

constexpr const char* kTaggerMagic = "HYPOTAGGER";
constexpr int kTaggerVersion = 1;

inline void save_tagger(const TaggerModel& model, const std::string& path) {
  ModelContainer mc;
  mc.magic = kTaggerMagic;
  nlohmann::json tokens = nlohmann::json::array();
  for (const auto& t : model.embed_tokens) tokens.push_back(t);
  mc.header = {
      {"version", kTaggerVersion},
      {"config",
       {{"pad_len", model.config.pad_len},
        {"lstm1_units", model.config.lstm1_units},
        {"lstm2_units", model.config.lstm2_units},
        {"spatial_dropout", model.config.spatial_dropout},
        {"recurrent_dropout", model.config.recurrent_dropout},
        {"lr", model.config.lr},
        {"rho", model.config.rho},
        {"epsilon", model.config.epsilon},
        {"batch_size", model.config.batch_size},
        {"epochs", model.config.epochs},
        {"validation_split", model.config.validation_split},
        {"seed", model.config.seed}}},
      {"embed_dim", model.embed_dim},
      {"vocab", tokens},
      {"tensor_order",
       "embedding,l1f.w,l1f.u,l1f.b,l1b.w,l1b.u,l1b.b,l2f.w,l2f.u,l2f.b,"
       "l2b.w,l2b.u,l2b.b,dense.w,dense.b"}};
  append_f32(mc.payload, model.embedding);
  for (const auto* lw : {&model.l1f, &model.l1b, &model.l2f, &model.l2b}) {
    append_f32(mc.payload, lw->w);
    append_f32(mc.payload, lw->u);
    append_f32(mc.payload, lw->b);
  }
  append_f32(mc.payload, model.dense_w);
  append_f32(mc.payload, model.dense_b);
  write_container(path, mc);
}

inline TaggerModel load_tagger(const std::string& path) {
  const auto mc = read_container(path, kTaggerMagic, kTaggerVersion);
  TaggerModel model;
  const auto& cfg = mc.header.at("config");
  model.config.pad_len = cfg.at("pad_len").get<int>();
  model.config.lstm1_units = cfg.at("lstm1_units").get<int>();
  model.config.lstm2_units = cfg.at("lstm2_units").get<int>();
  model.config.spatial_dropout = cfg.at("spatial_dropout").get<double>();
  model.config.recurrent_dropout = cfg.at("recurrent_dropout").get<double>();
  model.config.lr = cfg.at("lr").get<double>();
  model.config.rho = cfg.at("rho").get<double>();
  model.config.epsilon = cfg.at("epsilon").get<double>();
  model.config.batch_size = cfg.at("batch_size").get<int>();
  model.config.epochs = cfg.at("epochs").get<int>();
  model.config.validation_split = cfg.at("validation_split").get<double>();
  model.config.seed = cfg.at("seed").get<std::uint64_t>();
  model.embed_dim = mc.header.at("embed_dim").get<int>();
  for (const auto& t : mc.header.at("vocab"))
    model.embed_tokens.push_back(t.get<std::string>());
  for (std::size_t i = 0; i < model.embed_tokens.size(); ++i)
    model.embed_index.emplace(model.embed_tokens[i], i + 2);
  const std::size_t e = static_cast<std::size_t>(model.embed_dim);
  model.l1f.resize(model.embed_dim, model.config.lstm1_units);
  model.l1b.resize(model.embed_dim, model.config.lstm1_units);
  model.l2f.resize(2 * model.config.lstm1_units, model.config.lstm2_units);
  model.l2b.resize(2 * model.config.lstm1_units, model.config.lstm2_units);
  size_t cursor = 0;
  model.embedding = take_f64(mc.payload, cursor, model.embedding_rows() * e);
  for (auto* lw : {&model.l1f, &model.l1b, &model.l2f, &model.l2b}) {
    lw->w = take_f64(mc.payload, cursor, lw->w.size());
    lw->u = take_f64(mc.payload, cursor, lw->u.size());
    lw->b = take_f64(mc.payload, cursor, lw->b.size());
  }
  model.dense_w = take_f64(
      mc.payload, cursor,
      static_cast<std::size_t>(3) * 2 * static_cast<std::size_t>(model.config.lstm2_units));
  model.dense_b = take_f64(mc.payload, cursor, 3);
  return model;
}

// Epoch curve as CSV: epoch,train_acc,val_acc.
inline std::string epoch_log_csv(const TaggerModel& model) {
  std::string out = "epoch,train_acc,val_acc\n";
  char buf[96];
  for (const auto& s : model.epoch_log) {
    if (s.val_acc)
      std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", s.epoch, s.train_acc,
                    *s.val_acc);
    else
      std::snprintf(buf, sizeof(buf), "%d,%.6f,\n", s.epoch, s.train_acc);
    out += buf;
  }
  return out;
}

}  // namespace hypreader
