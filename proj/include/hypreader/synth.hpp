#pragma once

#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "hypreader/common.hpp"
#include "hypreader/lexicon.hpp"
#include "hypreader/linker.hpp"
#include "hypreader/rng.hpp"
#include "hypreader/tagger.hpp"

namespace hypreader {

// Template-generated corpora for tests and the `synth` CLI subcommand:
// hypothesis-styled sentences with gold tags and link labels, plus
// discussion-styled sentences that mention hypothesis labels without being
// hypotheses (the false-positive class the detector must reject).

struct SynthHypothesis {
  std::vector<std::string> tokens;  // lowercase, no punctuation
  std::vector<int> tags;            // 0/1/2 aligned with tokens
  int causal = 0;
  Direction direction = Direction::pos;

  std::string text() const {
    std::string out;
    for (const auto& t : tokens) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  }
};

namespace synth_detail {

inline const std::vector<std::vector<std::string>>& constructs() {
  static const std::vector<std::vector<std::string>> pool = {
      {"employee", "commitment"},
      {"firm", "performance"},
      {"job", "satisfaction"},
      {"workforce", "diversity"},
      {"organizational", "trust"},
      {"customer", "loyalty"},
      {"market", "orientation"},
      {"environmental", "disclosure"},
      {"board", "independence"},
      {"managerial", "discretion"},
      {"product", "innovation"},
      {"knowledge", "sharing"},
      {"team", "cohesion"},
      {"pay", "dispersion"},
      {"training", "intensity"},
      {"employee", "turnover"},
      {"brand", "reputation"},
      {"supplier", "integration"},
      {"absorptive", "capacity"},
      {"resource", "slack"},
      {"corporate", "philanthropy"},
      {"quality", "management"},
      {"labor", "productivity"},
      {"stakeholder", "engagement"},
      {"strategic", "flexibility"},
      {"service", "climate"},
      {"psychological", "safety"},
      {"voluntary", "disclosure"},
      {"executive", "compensation"},
      {"operational", "efficiency"},
      {"social", "capital"},
      {"green", "innovation"},
      {"institutional", "ownership"},
      {"advertising", "intensity"},
      {"financial", "leverage"},
      {"process", "conformance"},
      {"work", "engagement"},
      {"union", "density"},
      {"digital", "capability"},
      {"market", "share", "growth"},
      {"high", "involvement", "work", "practices"},
      {"profitability"},
      {"absenteeism"},
      {"innovativeness"},
  };
  return pool;
}

inline const std::vector<std::string>& pick_construct(Rng& rng) {
  const auto& pool = constructs();
  return pool[rng.bounded(pool.size())];
}

inline void append_span(SynthHypothesis& h, const std::vector<std::string>& np,
                        int tag) {
  for (const auto& w : np) {
    h.tokens.push_back(w);
    h.tags.push_back(tag);
  }
}

inline void append_filler(SynthHypothesis& h,
                          std::initializer_list<const char*> words) {
  for (const auto* w : words) {
    h.tokens.push_back(w);
    h.tags.push_back(0);
  }
}

}  // namespace synth_detail

inline constexpr int kSynthTemplateCount = 16;

// One gold-labeled hypothesis from template `which` (mod 16). Cause and
// outcome constructs are drawn from a shared pool, so tags depend on context
// rather than on the construct identity.
inline SynthHypothesis synth_hypothesis(int which, Rng& rng) {
  using namespace synth_detail;
  SynthHypothesis h;
  const auto& a = pick_construct(rng);
  const std::vector<std::string>* b = &pick_construct(rng);
  while (*b == a) b = &pick_construct(rng);
  const std::vector<std::string>* c = &pick_construct(rng);
  while (*c == a || *c == *b) c = &pick_construct(rng);
  switch (which % kSynthTemplateCount) {
    case 0:
      append_span(h, a, 1);
      append_filler(h, {"is", "positively", "associated", "with"});
      append_span(h, *b, 2);
      h.causal = 0;
      h.direction = Direction::pos;
      break;
    case 1:
      append_span(h, a, 1);
      append_filler(h, {"is", "negatively", "associated", "with"});
      append_span(h, *b, 2);
      h.causal = 0;
      h.direction = Direction::neg;
      break;
    case 2:
      append_span(h, a, 1);
      append_filler(h, {"will", "be", "positively", "related", "to"});
      append_span(h, *b, 2);
      h.causal = 0;
      h.direction = Direction::pos;
      break;
    case 3:
      append_span(h, a, 1);
      append_filler(h, {"is", "negatively", "related", "to"});
      append_span(h, *b, 2);
      h.causal = 0;
      h.direction = Direction::neg;
      break;
    case 4:
      append_span(h, a, 1);
      append_filler(h, {"has", "a", "positive", "effect", "on"});
      append_span(h, *b, 2);
      h.causal = 1;
      h.direction = Direction::pos;
      break;
    case 5:
      append_span(h, a, 1);
      append_filler(h, {"has", "a", "negative", "effect", "on"});
      append_span(h, *b, 2);
      h.causal = 1;
      h.direction = Direction::neg;
      break;
    case 6:
      append_span(h, a, 1);
      append_filler(h, {"exerts", "a", "positive", "influence", "on"});
      append_span(h, *b, 2);
      h.causal = 1;
      h.direction = Direction::pos;
      break;
    case 7:
      append_span(h, a, 1);
      append_filler(h, {"increases"});
      append_span(h, *b, 2);
      h.causal = 1;
      h.direction = Direction::pos;
      break;
    case 8:
      append_span(h, a, 1);
      append_filler(h, {"reduces"});
      append_span(h, *b, 2);
      h.causal = 1;
      h.direction = Direction::neg;
      break;
    case 9:
      append_span(h, a, 1);
      append_filler(h, {"leads", "to", "higher"});
      append_span(h, *b, 2);
      h.causal = 1;
      h.direction = Direction::pos;
      break;
    case 10:
      append_span(h, a, 1);
      append_filler(h, {"leads", "to", "lower"});
      append_span(h, *b, 2);
      h.causal = 1;
      h.direction = Direction::neg;
      break;
    case 11:
      append_span(h, a, 1);
      append_filler(h, {"has", "an", "inverted", "u-shaped", "relationship",
                        "with"});
      append_span(h, *b, 2);
      h.causal = 0;
      h.direction = Direction::non_lin;
      break;
    case 12: {
      // Mediation: node 2 aggregates "the relationship between B and C".
      append_span(h, a, 1);
      append_filler(h, {"mediates"});
      h.tokens.push_back("the");
      h.tags.push_back(2);
      h.tokens.push_back("relationship");
      h.tags.push_back(2);
      h.tokens.push_back("between");
      h.tags.push_back(2);
      append_span(h, *b, 2);
      h.tokens.push_back("and");
      h.tags.push_back(2);
      append_span(h, *c, 2);
      h.causal = 1;
      h.direction = Direction::non_lin;
      break;
    }
    case 13: {
      append_span(h, a, 1);
      append_filler(h, {"moderates"});
      h.tokens.push_back("the");
      h.tags.push_back(2);
      h.tokens.push_back("relationship");
      h.tags.push_back(2);
      h.tokens.push_back("between");
      h.tags.push_back(2);
      append_span(h, *b, 2);
      h.tokens.push_back("and");
      h.tags.push_back(2);
      append_span(h, *c, 2);
      h.causal = 0;
      h.direction = Direction::non_lin;
      break;
    }
    case 14: {
      // Multiple outcomes aggregate into one node.
      append_span(h, a, 1);
      append_filler(h, {"increases"});
      append_span(h, *b, 2);
      h.tokens.push_back("and");
      h.tags.push_back(2);
      append_span(h, *c, 2);
      h.causal = 1;
      h.direction = Direction::pos;
      break;
    }
    default:
      append_span(h, a, 1);
      append_filler(h, {"is", "curvilinearly", "related", "to"});
      append_span(h, *b, 2);
      h.causal = 0;
      h.direction = Direction::non_lin;
      break;
  }
  return h;
}

// A hypothesis label prefix like "H3." or "Hypothesis 12:".
inline std::string synth_label_prefix(int n, Rng& rng) {
  char buf[48];
  switch (rng.bounded(5)) {
    case 0: std::snprintf(buf, sizeof(buf), "H%d.", n); break;
    case 1: std::snprintf(buf, sizeof(buf), "H%d:", n); break;
    case 2: std::snprintf(buf, sizeof(buf), "Hypothesis %d.", n); break;
    case 3: std::snprintf(buf, sizeof(buf), "Hypothesis %d:", n); break;
    default: std::snprintf(buf, sizeof(buf), "H%da.", n); break;
  }
  return buf;
}

// Discussion-styled sentence that mentions a hypothesis label (label 0 for
// the detector).
inline std::string synth_discussion(Rng& rng) {
  using namespace synth_detail;
  const int n = 1 + static_cast<int>(rng.bounded(9));
  const int k = 1 + static_cast<int>(rng.bounded(6));
  const auto& a = pick_construct(rng);
  std::string np;
  for (const auto& w : a) {
    if (!np.empty()) np += ' ';
    np += w;
  }
  char buf[256];
  switch (rng.bounded(10)) {
    case 0:
      std::snprintf(buf, sizeof(buf), "These results support Hypothesis %d.", n);
      break;
    case 1:
      std::snprintf(buf, sizeof(buf),
                    "The results provide strong support for H%d.", n);
      break;
    case 2:
      std::snprintf(buf, sizeof(buf),
                    "Hypothesis %d was not supported by the data.", n);
      break;
    case 3:
      std::snprintf(buf, sizeof(buf),
                    "Table %d reports the regression estimates used to test H%d.",
                    k, n);
      break;
    case 4:
      std::snprintf(buf, sizeof(buf),
                    "Consistent with Hypothesis %d, the coefficient on %s is "
                    "positive and significant.",
                    n, np.c_str());
      break;
    case 5:
      std::snprintf(buf, sizeof(buf),
                    "We find no evidence for Proposition %d in model %d.", n, k);
      break;
    case 6:
      std::snprintf(buf, sizeof(buf),
                    "The interaction term testing H%d is insignificant at "
                    "conventional levels.",
                    n);
      break;
    case 7:
      std::snprintf(buf, sizeof(buf),
                    "As shown in Table %d, H%d is supported at the 5 percent "
                    "level.",
                    k, n);
      break;
    case 8:
      std::snprintf(buf, sizeof(buf),
                    "In support of H%d, the estimated effect of %s remains "
                    "significant.",
                    n, np.c_str());
      break;
    default:
      std::snprintf(buf, sizeof(buf),
                    "The regression results in model %d reject Hypothesis %d.",
                    k, n);
      break;
  }
  return buf;
}

struct SynthDetectorSentence {
  std::string text;
  int label = 0;
};

// Mirrors the corpus construction: n_pos labeled hypothesis statements with
// label prefixes, n_neg in-text mentions, shuffled together.
inline std::vector<SynthDetectorSentence> synth_detector_corpus(
    std::size_t n_pos, std::size_t n_neg, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SynthDetectorSentence> out;
  out.reserve(n_pos + n_neg);
  for (std::size_t i = 0; i < n_pos; ++i) {
    const auto h = synth_hypothesis(static_cast<int>(rng.bounded(kSynthTemplateCount)), rng);
    const int num = 1 + static_cast<int>(rng.bounded(9));
    out.push_back({synth_label_prefix(num, rng) + " " + h.text() + ".", 1});
  }
  for (std::size_t i = 0; i < n_neg; ++i) out.push_back({synth_discussion(rng), 0});
  rng.shuffle(out);
  return out;
}

inline std::vector<TagSequence> synth_tagger_corpus(std::size_t n,
                                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TagSequence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = synth_hypothesis(static_cast<int>(i) % kSynthTemplateCount, rng);
    out.push_back({h.tokens, h.tags});
  }
  return out;
}

struct SynthLinkSentence {
  std::string text;  // plain lowercase hypothesis text
  int causal = 0;
  Direction direction = Direction::pos;
};

inline std::vector<SynthLinkSentence> synth_link_corpus(std::size_t n,
                                                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SynthLinkSentence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = synth_hypothesis(static_cast<int>(i) % kSynthTemplateCount, rng);
    out.push_back({h.text(), h.causal, h.direction});
  }
  return out;
}

// Deterministic random word vectors for a token set, GloVe text format.
inline WordVectorTable synth_word_vectors(const std::set<std::string>& tokens,
                                          std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  WordVectorTable table;
  for (const auto& t : tokens) {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.uniform(-0.5, 0.5);
    table.insert(t, std::move(v));
  }
  return table;
}

inline std::string glove_format(const WordVectorTable& table) {
  std::string out;
  char buf[48];
  for (const auto& token : table.sorted_tokens()) {
    out += token;
    const double* v = table.find(token);
    for (std::size_t d = 0; d < table.dim(); ++d) {
      std::snprintf(buf, sizeof(buf), " %.6f", v[d]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace hypreader
