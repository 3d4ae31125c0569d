#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hypreader/lexicon.hpp"
#include "hypreader/porter.hpp"
#include "hypreader/rng.hpp"

using namespace hypreader;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("load_glove parses the text format") {
  const auto path = temp_path("hyp_glove_small.txt");
  write_file(path, "the 0.1 0.2 0.3\nfirm -1 2 3.5\n");
  const auto table = load_glove(path);
  CHECK(table.dim() == 3);
  CHECK(table.size() == 2);
  const double* v = table.find("the");
  REQUIRE(v != nullptr);
  CHECK(v[0] == Catch::Approx(0.1));
  CHECK(v[1] == Catch::Approx(0.2));
  CHECK(v[2] == Catch::Approx(0.3));
  CHECK(table.find("absent") == nullptr);
}

TEST_CASE("load_glove rejects malformed files") {
  const auto mismatch = temp_path("hyp_glove_mismatch.txt");
  write_file(mismatch, "a 1 2 3\nb 1 2 3 4\n");
  CHECK_THROWS_MATCHES(load_glove(mismatch), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("DimensionMismatch")));
  const auto dup = temp_path("hyp_glove_dup.txt");
  write_file(dup, "a 1 2\na 3 4\n");
  CHECK_THROWS_MATCHES(load_glove(dup), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("DuplicateToken")));
  const auto bad = temp_path("hyp_glove_bad.txt");
  write_file(bad, "a 1 x\n");
  CHECK_THROWS_MATCHES(load_glove(bad), Error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("BadGloveLine")));
}

TEST_CASE("load_glove matches a line-by-line parse of a 50-line fixture") {
  Rng rng(3);
  std::string content;
  std::map<std::string, std::vector<double>> expected;
  for (int i = 0; i < 50; ++i) {
    const std::string token = "tok" + std::to_string(i);
    std::vector<double> values;
    std::string line = token;
    for (int d = 0; d < 8; ++d) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f", rng.uniform(-2.0, 2.0));
      line += ' ';
      line += buf;
      values.push_back(std::stod(buf));
    }
    expected[token] = values;
    content += line + "\n";
  }
  const auto path = temp_path("hyp_glove_50.txt");
  write_file(path, content);
  const auto table = load_glove(path);
  CHECK(table.size() == 50);
  // Independent oracle: re-parse each line with an istringstream.
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    const double* v = table.find(token);
    REQUIRE(v != nullptr);
    double x;
    std::size_t d = 0;
    while (ls >> x) {
      CHECK(v[d] == Catch::Approx(x).margin(1e-12));
      ++d;
    }
    CHECK(d == table.dim());
  }
}

TEST_CASE("embed_sentence averages with OOV counted in the denominator") {
  WordVectorTable table;
  table.insert("a", {1.0, 2.0});
  table.insert("b", {-1.0, -2.0});
  table.insert("c", {3.0, 0.0});

  // Single known token: identity.
  const auto single = embed_sentence(table, {"a"});
  CHECK(single[0] == Catch::Approx(1.0));
  CHECK(single[1] == Catch::Approx(2.0));

  // Opposite vectors cancel.
  const auto zero = embed_sentence(table, {"a", "b"});
  CHECK(zero[0] == Catch::Approx(0.0).margin(1e-15));
  CHECK(zero[1] == Catch::Approx(0.0).margin(1e-15));

  // Hand-computed mean of a 3-token fixture: (a + c + 0) / 3.
  const auto mean = embed_sentence(table, {"a", "c", "oov"});
  CHECK(mean[0] == Catch::Approx((1.0 + 3.0) / 3.0));
  CHECK(mean[1] == Catch::Approx(2.0 / 3.0));
  CHECK(count_known(table, {"a", "c", "oov"}) == 2);

  // All-OOV: zero vector, flagged through count_known.
  const auto oov = embed_sentence(table, {"x", "y"});
  CHECK(oov[0] == 0.0);
  CHECK(oov[1] == 0.0);
  CHECK(count_known(table, {"x", "y"}) == 0);
}

TEST_CASE("embed_sentence is permutation-invariant") {
  WordVectorTable table;
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> v(4);
    for (auto& x : v) x = rng.uniform(-1, 1);
    table.insert("t" + std::to_string(i), std::move(v));
  }
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> tokens;
    const std::size_t len = 1 + rng.bounded(8);
    for (std::size_t i = 0; i < len; ++i)
      tokens.push_back("t" + std::to_string(rng.bounded(12)));  // some OOV
    auto shuffled = tokens;
    rng.shuffle(shuffled);
    const auto a = embed_sentence(table, tokens);
    const auto b = embed_sentence(table, shuffled);
    for (std::size_t d = 0; d < a.size(); ++d)
      CHECK(a[d] == Catch::Approx(b[d]).margin(1e-12));
  }
}

TEST_CASE("build_vocabulary exhaustive small case") {
  const auto vocab = build_vocabulary({{"a", "b"}}, 2, 1);
  REQUIRE(vocab.size() == 3);
  CHECK(vocab.entries.count("a") == 1);
  CHECK(vocab.entries.count("b") == 1);
  CHECK(vocab.entries.count("a b") == 1);

  const auto empty = build_vocabulary({{"a", "b"}}, 2, 3);
  CHECK(empty.size() == 0);

  CHECK_THROWS_AS(build_vocabulary({}, 2, 1), Error);
  CHECK_THROWS_AS(build_vocabulary({{"a"}}, 4, 1), Error);
}

TEST_CASE("build_vocabulary matches a brute-force n-gram enumerator") {
  Rng rng(7);
  std::vector<std::vector<std::string>> corpus;
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e"};
  for (int s = 0; s < 20; ++s) {
    std::vector<std::string> sent;
    const std::size_t len = 1 + rng.bounded(9);
    for (std::size_t i = 0; i < len; ++i)
      sent.push_back(pool[rng.bounded(pool.size())]);
    corpus.push_back(sent);
  }
  const auto vocab = build_vocabulary(corpus, 3, 2);

  // Independent enumerator: nested loops, no shared helpers.
  std::map<std::string, std::size_t> counts;
  for (const auto& sent : corpus) {
    for (std::size_t i = 0; i < sent.size(); ++i) {
      for (std::size_t n = 1; n <= 3 && i + n <= sent.size(); ++n) {
        std::string g;
        for (std::size_t k = 0; k < n; ++k) {
          if (k) g += ' ';
          g += sent[i + k];
        }
        ++counts[g];
      }
    }
  }
  std::map<std::string, std::size_t> expected;
  for (const auto& [g, c] : counts)
    if (c >= 2) expected[g] = c;
  REQUIRE(vocab.size() == expected.size());
  for (const auto& [g, c] : expected) {
    REQUIRE(vocab.entries.count(g) == 1);
    CHECK(vocab.entries.at(g).corpus_freq == c);
  }

  // Ids are a bijection onto 0..len-1 in lexicographic order, and rebuilding
  // yields identical ids.
  std::size_t next = 0;
  for (const auto& [g, e] : vocab.entries) CHECK(e.id == next++);
  const auto rebuilt = build_vocabulary(corpus, 3, 2);
  for (const auto& [g, e] : vocab.entries)
    CHECK(rebuilt.entries.at(g).id == e.id);
}

TEST_CASE("bow_vector counts in-vocabulary n-grams") {
  const auto vocab =
      build_vocabulary({{"firm", "performance", "and", "firm", "value"}}, 1, 1);
  const auto bow =
      bow_vector(vocab, {"firm", "performance", "and", "firm", "value"});
  CHECK(bow.counts.at(vocab.entries.at("firm").id) == 2);
  CHECK(bow.counts.at(vocab.entries.at("value").id) == 1);

  CHECK(bow_vector(vocab, {}).counts.empty());
  CHECK(bow_vector(vocab, {"unseen"}).counts.empty());
}

TEST_CASE("bow_vector equals a sliding-window oracle with tri-grams") {
  Rng rng(11);
  const std::vector<std::string> pool = {"p", "q", "r", "s"};
  std::vector<std::vector<std::string>> corpus;
  for (int s = 0; s < 10; ++s) {
    std::vector<std::string> sent;
    const std::size_t len = 3 + rng.bounded(7);
    for (std::size_t i = 0; i < len; ++i)
      sent.push_back(pool[rng.bounded(pool.size())]);
    corpus.push_back(sent);
  }
  const auto vocab = build_vocabulary(corpus, 3, 1);
  for (const auto& sent : corpus) {
    const auto bow = bow_vector(vocab, sent);
    std::map<std::string, std::size_t> expected;
    for (std::size_t n = 1; n <= 3; ++n)
      for (std::size_t i = 0; i + n <= sent.size(); ++i) {
        std::string g;
        for (std::size_t k = 0; k < n; ++k) {
          if (k) g += ' ';
          g += sent[i + k];
        }
        ++expected[g];
      }
    std::size_t accounted = 0;
    for (const auto& [g, c] : expected) {
      if (!vocab.entries.count(g)) continue;
      CHECK(bow.counts.at(vocab.entries.at(g).id) == c);
      ++accounted;
    }
    CHECK(bow.counts.size() == accounted);
  }
}

TEST_CASE("L2-normalized weights have unit norm") {
  Rng rng(13);
  const auto vocab = build_vocabulary({{"a", "b", "c"}}, 2, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<std::string> tokens;
    const std::size_t len = 1 + rng.bounded(10);
    const std::vector<std::string> pool = {"a", "b", "c"};
    for (std::size_t i = 0; i < len; ++i)
      tokens.push_back(pool[rng.bounded(pool.size())]);
    const auto weights = bow_vector(vocab, tokens).l2_normalized();
    double norm2 = 0;
    for (const auto& [id, w] : weights) norm2 += w * w;
    CHECK(std::sqrt(norm2) == Catch::Approx(1.0).margin(1e-9));
  }
  CHECK(BowVector{}.l2_normalized().empty());
}

TEST_CASE("stemming normalization applies before n-gram formation") {
  const auto vocab = build_vocabulary(
      {{"positively", "associated", "performance"}}, 2, 1,
      VocabNormalization::stem);
  CHECK(vocab.entries.count("posit") == 1);
  CHECK(vocab.entries.count("associ") == 1);
  CHECK(vocab.entries.count("posit associ") == 1);
  const auto bow = bow_vector(vocab, {"positively", "associated"});
  CHECK(bow.counts.size() == 3);  // posit, associ, "posit associ"
}

TEST_CASE("vocabulary JSON round trip is sorted by id") {
  const auto vocab = build_vocabulary({{"b", "a", "c"}}, 2, 1);
  const auto j = vocabulary_to_json(vocab);
  CHECK(j.at("max_n") == 2);
  CHECK(j.at("normalization") == "none");
  std::size_t prev = 0;
  bool first = true;
  for (const auto& e : j.at("entries")) {
    const auto id = e.at("id").get<std::size_t>();
    if (!first) CHECK(id == prev + 1);
    prev = id;
    first = false;
  }
  const auto back = vocabulary_from_json(j);
  CHECK(back.size() == vocab.size());
  for (const auto& [g, e] : vocab.entries) {
    CHECK(back.entries.at(g).id == e.id);
    CHECK(back.entries.at(g).corpus_freq == e.corpus_freq);
  }
}
