#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <map>
#include <set>

#include "hypreader/evalkit.hpp"
#include "hypreader/rng.hpp"

using namespace hypreader;

TEST_CASE("f1_score basics") {
  CHECK(f1_score(1.0, 1.0) == 1.0);
  CHECK(f1_score(0.0, 0.0) == 0.0);
  CHECK(f1_score(0.0, 1.0) == 0.0);
  // Published rows: the Table-3 pair reproduces its printed F-1; the Table-2
  // "Overall" pair is a macro-average row, so the formula applied to its
  // printed P/R gives 0.9215 (see the acceptance suite notes).
  CHECK(f1_score(0.935, 0.914) ==
        Catch::Approx(2 * 0.935 * 0.914 / (0.935 + 0.914)).epsilon(1e-12));
  CHECK(std::fabs(f1_score(0.935, 0.914) - 0.924) < 0.0005);
  CHECK(f1_score(0.924, 0.919) == Catch::Approx(0.9214932176).margin(1e-9));
}

TEST_CASE("f1_score properties: symmetry and harmonic <= arithmetic") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double p = rng.uniform();
    const double r = rng.uniform();
    CHECK(f1_score(p, r) == Catch::Approx(f1_score(r, p)).margin(1e-15));
    CHECK(f1_score(p, r) <= (p + r) / 2.0 + 1e-15);
  }
}

TEST_CASE("confusion_counts basics") {
  const std::vector<int> golds = {1, 0, 1, 0};
  CHECK_THROWS_AS(confusion_counts(std::vector<int>{1}, golds, 1), Error);

  auto c = confusion_counts(golds, golds, 1);
  CHECK(c.fp == 0);
  CHECK(c.fn == 0);
  CHECK(c.tp == 2);
  CHECK(c.tn == 2);

  const std::vector<int> all_pos = {1, 1, 1, 1};
  const std::vector<int> all_neg = {0, 0, 0, 0};
  c = confusion_counts(all_pos, all_neg, 1);
  CHECK(c.fp == 4);
  CHECK(c.tp == 0);
  CHECK(c.fn == 0);
  CHECK(c.tn == 0);
}

TEST_CASE("confusion_counts equals brute force on a random fixture") {
  Rng rng(17);
  std::vector<int> preds(1000), golds(1000);
  for (auto& p : preds) p = static_cast<int>(rng.bounded(3));
  for (auto& g : golds) g = static_cast<int>(rng.bounded(3));
  for (int positive = 0; positive < 3; ++positive) {
    const auto c = confusion_counts(preds, golds, positive);
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (preds[i] == positive && golds[i] == positive) ++tp;
      if (preds[i] == positive && golds[i] != positive) ++fp;
      if (preds[i] != positive && golds[i] == positive) ++fn;
      if (preds[i] != positive && golds[i] != positive) ++tn;
    }
    CHECK(c.tp == tp);
    CHECK(c.fp == fp);
    CHECK(c.fn == fn);
    CHECK(c.tn == tn);
  }
}

TEST_CASE("micro and macro aggregation equal brute-force recomputation") {
  Rng rng(23);
  std::vector<ConfusionCounts> counts(3);
  for (auto& c : counts) {
    c.tp = 1 + rng.bounded(50);
    c.fp = rng.bounded(50);
    c.fn = rng.bounded(50);
    c.tn = rng.bounded(50);
  }
  const auto micro = micro_average(counts);
  const std::size_t tp = counts[0].tp + counts[1].tp + counts[2].tp;
  const std::size_t fp = counts[0].fp + counts[1].fp + counts[2].fp;
  const std::size_t fn = counts[0].fn + counts[1].fn + counts[2].fn;
  const double mp = static_cast<double>(tp) / (tp + fp);
  const double mr = static_cast<double>(tp) / (tp + fn);
  CHECK(micro.precision == Catch::Approx(mp).margin(1e-15));
  CHECK(micro.recall == Catch::Approx(mr).margin(1e-15));
  CHECK(micro.f1 == Catch::Approx(f1_score(mp, mr)).margin(1e-15));

  std::vector<Metrics> per_class;
  for (const auto& c : counts) per_class.push_back(metrics_from_counts(c));
  const auto macro = macro_average(per_class);
  CHECK(macro.f1 ==
        Catch::Approx((per_class[0].f1 + per_class[1].f1 + per_class[2].f1) / 3)
            .margin(1e-15));
}

TEST_CASE("kfold shapes") {
  const auto singleton = kfold(10, 10, 1);
  std::set<int> folds(singleton.assignments.begin(), singleton.assignments.end());
  CHECK(folds.size() == 10);

  const auto paper = kfold(1300, 10, 1);
  std::map<int, int> sizes;
  for (const int f : paper.assignments) ++sizes[f];
  for (const auto& [fold, size] : sizes) CHECK(size == 130);

  CHECK_THROWS_AS(kfold(5, 10, 1), Error);
  CHECK_THROWS_AS(kfold(10, 1, 1), Error);
}

TEST_CASE("kfold partitions are disjoint, exhaustive and deterministic") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.bounded(200);
    const int k =
        2 + static_cast<int>(rng.bounded(std::min<std::uint64_t>(n - 1, 12)));
    const std::uint64_t seed = rng.next_u64();
    const auto plan = kfold(n, k, seed);
    const auto plan2 = kfold(n, k, seed);
    CHECK(plan.assignments == plan2.assignments);
    std::vector<std::size_t> seen(n, 0);
    std::map<int, std::size_t> sizes;
    for (int f = 0; f < k; ++f)
      for (const auto i : plan.fold_indices(f)) {
        ++seen[i];
        ++sizes[f];
      }
    CHECK(std::all_of(seen.begin(), seen.end(),
                      [](std::size_t c) { return c == 1; }));
    std::size_t mn = n, mx = 0;
    for (const auto& [f, s] : sizes) {
      mn = std::min(mn, s);
      mx = std::max(mx, s);
    }
    CHECK(mx - mn <= 1);
  }
}

TEST_CASE("stratified folds preserve class proportions within one item") {
  std::vector<int> labels;
  for (int i = 0; i < 700; ++i) labels.push_back(0);
  for (int i = 0; i < 600; ++i) labels.push_back(1);
  const auto plan = stratified_kfold(labels, 10, 3);
  for (int f = 0; f < 10; ++f) {
    int a = 0, b = 0;
    for (const auto i : plan.fold_indices(f)) (labels[i] == 0 ? a : b)++;
    CHECK(std::abs(a - 70) <= 1);
    CHECK(std::abs(b - 60) <= 1);
  }

  // Property over random label sets: per-class counts within 1 of
  // proportionality and total fold sizes within 1 of each other.
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<int> ls;
    const int k = 3;
    for (int c = 0; c < 3; ++c) {
      const std::size_t m = static_cast<std::size_t>(k) + rng.bounded(40);
      for (std::size_t i = 0; i < m; ++i) ls.push_back(c);
    }
    rng.shuffle(ls);
    const auto p = stratified_kfold(ls, k, rng.next_u64());
    std::map<int, std::size_t> class_total;
    for (const int l : ls) ++class_total[l];
    std::size_t total_mn = ls.size(), total_mx = 0;
    for (int f = 0; f < k; ++f) {
      std::map<int, std::size_t> in_fold;
      std::size_t fold_size = 0;
      for (const auto i : p.fold_indices(f)) {
        ++in_fold[ls[i]];
        ++fold_size;
      }
      total_mn = std::min(total_mn, fold_size);
      total_mx = std::max(total_mx, fold_size);
      for (const auto& [c, m] : class_total) {
        const double ideal = static_cast<double>(m) / k;
        CHECK(std::fabs(static_cast<double>(in_fold[c]) - ideal) <= 1.0);
      }
    }
    CHECK(total_mx - total_mn <= 1);
  }

  // A class smaller than k is rejected.
  std::vector<int> tiny = {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
  CHECK_THROWS_AS(stratified_kfold(tiny, 10, 1), Error);
}

TEST_CASE("holdout_split") {
  const auto s4 = holdout_split(4, 0.75, 9);
  CHECK(s4.train_ids.size() == 3);
  CHECK(s4.test_ids.size() == 1);

  const auto a = holdout_split(100, 0.75, 42);
  const auto b = holdout_split(100, 0.75, 42);
  CHECK(a.train_ids == b.train_ids);
  CHECK(a.test_ids == b.test_ids);

  const auto paper = holdout_split(1300, 0.75, 7);
  CHECK(paper.train_ids.size() == 975);
  CHECK(paper.test_ids.size() == 325);

  std::set<std::size_t> all(paper.train_ids.begin(), paper.train_ids.end());
  all.insert(paper.test_ids.begin(), paper.test_ids.end());
  CHECK(all.size() == 1300);

  CHECK_THROWS_AS(holdout_split(1, 0.75, 1), Error);
  CHECK_THROWS_AS(holdout_split(10, 0.0, 1), Error);
  CHECK_THROWS_AS(holdout_split(10, 1.0, 1), Error);
}

TEST_CASE("rng shuffle is a permutation and seeded-deterministic") {
  Rng a(123), b(123);
  auto pa = a.permutation(100);
  auto pb = b.permutation(100);
  CHECK(pa == pb);
  std::sort(pa.begin(), pa.end());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i] == i);
  CHECK(std::string(Rng::kAlgorithm) == "xoshiro256starstar");
}

TEST_CASE("metrics report formats carry the table columns") {
  std::vector<ReportRow> rows = {{"Logistic Regression", "Stemming",
                                  Metrics{0.937, 0.935, 0.914, 0.924, 643}}};
  const auto csv = metrics_report_csv(rows);
  CHECK(csv.rfind("Model,Feature Normalization,Accuracy,Precision,Recall,F1-Score",
                  0) == 0);
  CHECK(csv.find("Stemming") != std::string::npos);
  const auto json = metrics_report_json(rows);
  CHECK(json[0]["f1_score"] == 0.924);
  const auto table = metrics_report_table(rows);
  CHECK(table.find("93.7%") != std::string::npos);
}
