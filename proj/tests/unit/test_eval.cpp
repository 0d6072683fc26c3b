#include <doctest.h>

#include <set>

#include "scint/error.hpp"
#include "scint/eval.hpp"
#include "test_support.hpp"

using namespace scint;

namespace {

// Published confusion counts, rows = ground truth.
const std::vector<std::size_t> kTable2{1498, 75, 219, 66, 1456, 272, 279, 351, 1187};

// XOR of two thresholds: a depth-1 tree cannot separate it.
Dataset make_xor(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds(testing::column_names(3), 3);
  for (std::size_t i = 0; i < rows; ++i) {
    const double a = rng.uniform01(), b = rng.uniform01(), c = rng.uniform01();
    const int label = ((a > 0.5) != (b > 0.5)) ? (c > 0.5 ? 2 : 1) : 0;
    ds.add_row(std::vector<double>{a, b, c}, label);
  }
  return ds;
}

}  // namespace

TEST_CASE("published counts give the printed metrics") {
  const auto r = metrics(ConfusionMatrix(3, kTable2));
  CHECK(r.matrix.total() == 5403);
  CHECK(r.matrix.trace() == 4141);
  CHECK(r.accuracy == 4141.0 / 5403.0);
  CHECK(*r.precision[0] == 1498.0 / (1498 + 66 + 279));
  CHECK(*r.precision[1] == 1456.0 / (75 + 1456 + 351));
  CHECK(*r.precision[2] == 1187.0 / (219 + 272 + 1187));
  CHECK(*r.recall[0] == 1498.0 / (1498 + 75 + 219));
  CHECK(*r.recall[1] == 1456.0 / (66 + 1456 + 272));
  CHECK(*r.recall[2] == 1187.0 / (279 + 351 + 1187));
  const double printed_precision[3] = {81.4, 77.4, 70.7};
  const double printed_recall[3] = {83.6, 81.2, 65.4};
  CHECK(std::abs(100.0 * r.accuracy - 76.7) <= 0.15);
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(100.0 * *r.precision[c] - printed_precision[c]) <= 0.15);
    CHECK(std::abs(100.0 * *r.recall[c] - printed_recall[c]) <= 0.15);
  }
}

TEST_CASE("confusion matrix orientation is rows = truth") {
  const std::vector<ClassIndex> truth{0, 0, 1, 2}, pred{1, 0, 1, 1};
  const auto m = confusion(truth, pred, 3);
  CHECK(m.at(0, 1) == 1);
  CHECK(m.at(1, 0) == 0);
  CHECK(m.at(2, 1) == 1);
  CHECK(m.row_sum(0) == 2);
  CHECK(m.col_sum(1) == 3);
  CHECK_THROWS_AS(confusion(truth, std::vector<ClassIndex>{0, 1}, 3), Error);
  CHECK_THROWS_AS(confusion(truth, std::vector<ClassIndex>{0, 1, 1, 3}, 3), Error);
}

TEST_CASE("zero denominators make precision and recall undefined") {
  // Class 3 never occurs and is never predicted; class 2 is never predicted.
  const auto r = metrics(ConfusionMatrix(3, {5, 0, 0, 2, 0, 0, 0, 0, 0}));
  CHECK(*r.precision[0] == 5.0 / 7.0);
  CHECK_FALSE(r.precision[1].has_value());
  CHECK_FALSE(r.precision[2].has_value());
  CHECK(*r.recall[1] == 0.0);
  CHECK_FALSE(r.recall[2].has_value());
  const auto j = r.to_json();
  CHECK(j["precision"][1].is_null());
  const auto back = EvalReport::from_json(j);
  CHECK(back.matrix == r.matrix);
  CHECK_FALSE(back.precision[2].has_value());
  try {
    metrics(ConfusionMatrix(3));
    FAIL("expected EmptyMatrix");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyMatrix);
  }
}

TEST_CASE("stratified holdout cuts each class at the rounded fraction") {
  std::vector<ClassIndex> labels;
  for (int i = 0; i < 27000; ++i) labels.push_back(i % 3);
  const auto s = holdout_split(labels, 3, 0.8, 2);
  CHECK(s.train_indices.size() == 21600);
  CHECK(s.test_indices.size() == 5400);
  std::vector<int> per_class(3, 0);
  for (auto i : s.train_indices) ++per_class[static_cast<std::size_t>(labels[i])];
  CHECK(per_class == std::vector<int>{7200, 7200, 7200});
  std::set<std::size_t> all(s.train_indices.begin(), s.train_indices.end());
  all.insert(s.test_indices.begin(), s.test_indices.end());
  CHECK(all.size() == labels.size());

  const std::vector<ClassIndex> odd{0, 0, 0, 1, 1, 2, 2, 2, 2, 2};
  const auto t = holdout_split(odd, 3, 0.5, 1);
  CHECK(t.train_indices.size() == 2 + 1 + 3);  // round(1.5), round(1.0), round(2.5)
  CHECK(holdout_split(odd, 3, 0.5, 1).test_indices == t.test_indices);
  CHECK(holdout_split(odd, 3, 0.5, 2).test_indices != t.test_indices);
  CHECK(holdout_split(labels, 3, 0.8, 2, false).train_indices.size() == 21600);
  CHECK_THROWS_AS(holdout_split(odd, 3, 1.0, 1), Error);
  CHECK_THROWS_AS(holdout_split(std::vector<ClassIndex>{0}, 3, 0.5, 1), Error);
}

TEST_CASE("apply_split keeps rows and labels together") {
  const auto d = testing::make_blobs(10, 2, 3, 1.0, 1);
  const auto s = holdout_split(d.labels(), 3, 0.7, 3);
  const auto [tr, te] = apply_split(d, s);
  CHECK(tr.rows() + te.rows() == d.rows());
  for (std::size_t i = 0; i < te.rows(); ++i) {
    CHECK(te.labels()[i] == d.labels()[s.test_indices[i]]);
    CHECK(te.at(i, 1) == d.at(s.test_indices[i], 1));
  }
}

TEST_CASE("grid candidates enumerate with the last axis fastest") {
  const auto spec = GridSpec::from_json(nlohmann::json::parse(
      R"({"kind": "knn", "base_params": {"p": 1}, "grid": [["n_neighbors", [1, 5, 9]], ["leaf_size", [2, 4]]]})"));
  REQUIRE(spec.candidate_count() == 6);
  CHECK(spec.candidate(0) == nlohmann::json::parse(R"({"p": 1, "n_neighbors": 1, "leaf_size": 2})"));
  CHECK(spec.candidate(1)["leaf_size"] == 4);
  CHECK(spec.candidate(2)["n_neighbors"] == 5);
  CHECK(spec.candidate(5) == nlohmann::json::parse(R"({"p": 1, "n_neighbors": 9, "leaf_size": 4})"));
  const auto obj = GridSpec::from_json(nlohmann::json::parse(R"({"kind": "gnb", "grid": {"var_smoothing": [1e-9]}})"));
  CHECK(obj.candidate_count() == 1);
  CHECK_THROWS_AS(GridSpec::from_json(nlohmann::json::parse(R"({"kind": "knn", "grid": [["k", []]]})")), Error);
}

TEST_CASE("stratified folds balance classes") {
  std::vector<ClassIndex> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i < 50 ? 0 : i < 80 ? 1 : 2);
  const auto f = stratified_folds(labels, 3, 3, 4);
  std::vector<std::vector<int>> counts(3, std::vector<int>(3, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) ++counts[static_cast<std::size_t>(f[i])][static_cast<std::size_t>(labels[i])];
  for (int c = 0; c < 3; ++c) {
    int lo = 1000, hi = 0;
    for (int k = 0; k < 3; ++k) {
      lo = std::min(lo, counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)]);
      hi = std::max(hi, counts[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)]);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("2x2 grid search agrees with a nested-loop oracle") {
  const auto train = make_xor(600, 5);
  const auto spec = GridSpec::from_json(nlohmann::json::parse(
      R"({"kind": "gbdt", "base_params": {"n_rounds": 20, "split_mode": "exact"},
          "grid": [["max_depth", [1, 4]], ["learning_rate", [0.1, 0.3]]], "folds": 3})"));
  const auto result = grid_search(train, spec, 7, true);
  REQUIRE(result.table.size() == 4);

  const auto folds = stratified_folds(train.labels(), 3, 3, 7);
  std::vector<double> oracle;
  for (int depth : {1, 4}) {
    for (double lr : {0.1, 0.3}) {
      double sum = 0.0;
      for (int f = 0; f < 3; ++f) {
        std::vector<std::size_t> tr, va;
        for (std::size_t i = 0; i < folds.size(); ++i) (folds[i] == f ? va : tr).push_back(i);
        const auto a = train.subset(tr), b = train.subset(va);
        const ModelSpec ms{ModelKind::Gbdt, {{"n_rounds", 20}, {"split_mode", "exact"}, {"max_depth", depth}, {"learning_rate", lr}}};
        const auto model = fit_model(a, ms, false);
        const auto pred = model.predict(b.view(), false);
        std::size_t ok = 0;
        for (std::size_t i = 0; i < b.rows(); ++i) ok += pred.classes[i] == b.labels()[i];
        sum += static_cast<double>(ok) / static_cast<double>(b.rows());
      }
      oracle.push_back(sum / 3.0);
    }
  }
  std::size_t argmax = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(*result.table[i].mean_accuracy == doctest::Approx(oracle[i]).epsilon(1e-12));
    if (oracle[i] > oracle[argmax]) argmax = i;
  }
  CHECK(result.best_index == argmax);
  CHECK(result.best.params["max_depth"] == 4);
  CHECK(result.table[0].params["max_depth"] == 1);
  CHECK(grid_search(train, spec, 7, false).to_csv() == result.to_csv());
}

TEST_CASE("failing candidates are reported, not fatal") {
  const auto train = testing::make_blobs(20, 2, 3, 2.0, 3);
  const auto spec = GridSpec::from_json(
      nlohmann::json::parse(R"({"kind": "knn", "grid": [["n_neighbors", [1, 1000]]], "folds": 2})"));
  const auto result = grid_search(train, spec, 1);
  CHECK(result.best_index == 0);
  CHECK_FALSE(result.table[1].mean_accuracy.has_value());
  CHECK_FALSE(result.table[1].error.empty());
  CHECK(result.to_csv().find("undefined") != std::string::npos);

  const auto all_bad = GridSpec::from_json(
      nlohmann::json::parse(R"({"kind": "knn", "grid": [["n_neighbors", [500, 1000]]], "folds": 2})"));
  CHECK_THROWS_AS(grid_search(train, all_bad, 1), Error);
}

TEST_CASE("ties go to the earliest candidate") {
  const auto train = testing::make_blobs(30, 2, 3, 5.0, 3);
  const auto spec = GridSpec::from_json(
      nlohmann::json::parse(R"({"kind": "gnb", "grid": [["var_smoothing", [1e-9, 2e-9, 3e-9]]]})"));
  const auto r = grid_search(train, spec, 1);
  CHECK(*r.table[0].mean_accuracy == *r.table[2].mean_accuracy);
  CHECK(r.best_index == 0);
}

TEST_CASE("evaluate scores a trained model") {
  const auto train = testing::make_blobs(100, 3, 3, 4.0, 1);
  const auto test = testing::make_blobs(50, 3, 3, 4.0, 2);
  const auto model = fit_model(train, ModelSpec{ModelKind::Gnb, {}});
  const auto r = evaluate(model, test);
  CHECK(r.matrix.total() == 150);
  CHECK(r.accuracy > 0.95);
  Dataset other(testing::column_names(4), 3);
  other.add_row(std::vector<double>{1, 2, 3, 4}, 0);
  CHECK_THROWS_AS(evaluate(model, other), Error);
}
