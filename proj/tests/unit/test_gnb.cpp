#include <doctest.h>

#include "oracles.hpp"
#include "scint/error.hpp"
#include "scint/gnb.hpp"
#include "test_support.hpp"

using namespace scint;

TEST_CASE("per-class moments match a direct computation") {
  const auto train = testing::make_blobs(50, 3, 3, 2.0, 4);
  const auto m = GnbModel::fit(train, {});
  for (int c = 0; c < 3; ++c) {
    for (std::size_t f = 0; f < 3; ++f) {
      double s = 0.0, n = 0.0;
      for (std::size_t r = 0; r < train.rows(); ++r) {
        if (train.labels()[r] == c) {
          s += train.at(r, f);
          n += 1.0;
        }
      }
      const double mean = s / n;
      double ss = 0.0;
      for (std::size_t r = 0; r < train.rows(); ++r) {
        if (train.labels()[r] == c) ss += (train.at(r, f) - mean) * (train.at(r, f) - mean);
      }
      CHECK(m.mean(c, f) == doctest::Approx(mean).epsilon(1e-12));
      CHECK(m.variance(c, f) == doctest::Approx(ss / n + 1e-9).epsilon(1e-12));
    }
    CHECK(m.log_priors()[static_cast<std::size_t>(c)] == doctest::Approx(std::log(1.0 / 3.0)));
  }
}

TEST_CASE("posteriors match products of normal densities") {
  Dataset train(testing::column_names(2), 3);
  Rng rng(8);
  const int per_class[3] = {30, 60, 90};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class[c]; ++i) train.add_row(std::vector<double>{c + rng.normal(), 0.5 * c * rng.normal()}, c);
  }
  const auto m = GnbModel::fit(train, {});
  const auto test = testing::make_uniform(100, 2, 3, 9);
  const auto pred = m.predict(test.view());
  for (std::size_t r = 0; r < test.rows(); ++r) {
    double joint[3], total = 0.0;
    for (int c = 0; c < 3; ++c) {
      joint[c] = per_class[c] / 180.0;
      for (std::size_t f = 0; f < 2; ++f) joint[c] *= oracle::normal_pdf(test.at(r, f), m.mean(c, f), m.variance(c, f));
      total += joint[c];
    }
    for (int c = 0; c < 3; ++c) {
      CHECK(pred.row_proba(r)[static_cast<std::size_t>(c)] == doctest::Approx(joint[c] / total).epsilon(1e-9));
    }
    CHECK(pred.classes[r] == argmax_smallest(pred.row_proba(r)));
  }
}

TEST_CASE("log-space evaluation survives far-out rows") {
  const auto train = testing::make_blobs(40, 4, 3, 1.0, 2);
  const auto m = GnbModel::fit(train, {});
  const std::vector<double> far{1e4, -1e4, 1e4, -1e4};
  const auto p = m.predict(MatrixView{far, 4});
  double sum = 0.0;
  for (double v : p.row_proba(0)) {
    CHECK(std::isfinite(v));
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("uniform prior scaling leaves predictions unchanged") {
  const auto train = testing::make_blobs(40, 2, 3, 1.0, 3);
  const auto m = GnbModel::fit(train, {});
  const auto test = testing::make_blobs(20, 2, 3, 1.0, 4);
  const auto a = m.predict(test.view());
  const auto b = m.with_scaled_priors(0.25).predict(test.view());
  CHECK(a.classes == b.classes);
  for (std::size_t i = 0; i < a.proba.size(); ++i) CHECK(a.proba[i] == doctest::Approx(b.proba[i]).epsilon(1e-12));
}

TEST_CASE("constant features are handled by the variance floor") {
  Dataset train(testing::column_names(1), 3);
  for (int c = 0; c < 3; ++c) {
    train.add_row(std::vector<double>{double(c)}, c);
    train.add_row(std::vector<double>{double(c)}, c);
  }
  const auto m = GnbModel::fit(train, {});
  CHECK(m.variance(1, 0) == 1e-9);
  const auto p = m.predict(train.view());
  for (std::size_t r = 0; r < train.rows(); ++r) CHECK(p.classes[r] == train.labels()[r]);
}

TEST_CASE("missing class and bad config are errors") {
  Dataset train(testing::column_names(1), 3);
  train.add_row(std::vector<double>{1.0}, 0);
  train.add_row(std::vector<double>{2.0}, 2);
  try {
    GnbModel::fit(train, {});
    FAIL("expected EmptyClass");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyClass);
  }
  CHECK_THROWS_AS(GnbModel::fit(Dataset(testing::column_names(1), 3), {}), Error);
  CHECK_THROWS_AS(GnbConfig{0.0}.validate(), Error);
}

TEST_CASE("JSON round-trip predicts identically") {
  const auto train = testing::make_blobs(30, 3, 3, 1.0, 5);
  const auto m = GnbModel::fit(train, {});
  const auto back = GnbModel::from_json(nlohmann::json::parse(m.to_json().dump()));
  CHECK(m.predict(train.view()).proba == back.predict(train.view()).proba);
}
