#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "test_util.hpp"
#include "unotb/datagen.hpp"
#include "unotb/error.hpp"

using namespace unotb;
using namespace unotb::testutil;

namespace {

DatasetSpec spec_2d(const char* name, int64_t n, uint64_t seed) {
  DatasetSpec s;
  s.name = name;
  s.n = n;
  s.seed = seed;
  return s;
}

double label_fraction(const Dataset& d, int32_t label) {
  int64_t hits = 0;
  for (const int32_t l : d.labels) hits += (l == label);
  return double(hits) / double(d.labels.size());
}

double radius(const Dataset& d, int64_t i) {
  const double x = d.points.at(i, 0), y = d.points.at(i, 1);
  return std::sqrt(x * x + y * y);
}

}  // namespace

TEST_CASE("generation is deterministic per seed and varies across seeds") {
  for (const char* name :
       {"spiral", "moons", "gm8", "imbalance_p1", "outlier_p2"}) {
    const Dataset a = generate(spec_2d(name, 300, 11));
    const Dataset b = generate(spec_2d(name, 300, 11));
    const Dataset c = generate(spec_2d(name, 300, 12));
    CHECK(bitwise_equal(a.points, b.points));
    CHECK(a.labels == b.labels);
    CHECK(!bitwise_equal(a.points, c.points));
  }
}

TEST_CASE("imbalanced pairs put a quarter of the mass in the minority mode") {
  const int64_t n = 10000;
  const double band = 3.0 * std::sqrt(0.25 * 0.75 / double(n));
  const Dataset p1 = generate(spec_2d("imbalance_p1", n, 5));
  const Dataset p2 = generate(spec_2d("imbalance_p2", n, 5));
  // p1: label 0 is the upper minority mode; p2 mirrors it.
  CHECK(std::abs(label_fraction(p1, 0) - 0.25) < band);
  CHECK(std::abs(label_fraction(p2, 0) - 0.75) < band);
  for (int64_t i = 0; i < n; ++i) {
    CHECK(std::abs(p1.points.at(i, 0) + 5.0) < 3.0);
    CHECK(std::abs(p2.points.at(i, 0) - 5.0) < 3.0);
    const double y1 = p1.points.at(i, 1);
    CHECK(std::abs(std::abs(y1) - 4.0) < 3.0);
    CHECK((p1.labels[size_t(i)] == 0) == (y1 > 0.0));
  }
}

TEST_CASE("outlier marginals carry five percent far-field mass") {
  const int64_t n = 10000;
  const Dataset p1 = generate(spec_2d("outlier_p1", n, 3));
  int64_t far = 0;
  for (int64_t i = 0; i < n; ++i) {
    const bool outlier = is_outlier_label("outlier_p1", p1.labels[size_t(i)]);
    far += outlier;
    if (outlier)
      CHECK(std::abs(p1.points.at(i, 0) - 10.0) < 1.0);
    else
      CHECK(radius(p1, i) < 6.0);
  }
  const double band = 3.0 * std::sqrt(0.05 * 0.95 / double(n));
  CHECK(std::abs(double(far) / double(n) - 0.05) < band);

  // p2 splits its outliers between x = -10 and x = +10.
  const Dataset p2 = generate(spec_2d("outlier_p2", n, 3));
  for (int64_t i = 0; i < n; ++i)
    if (is_outlier_label("outlier_p2", p2.labels[size_t(i)]))
      CHECK(std::abs(std::abs(p2.points.at(i, 0)) - 10.0) < 1.0);
}

TEST_CASE("the clean outlier marginal stays within the mode radius") {
  const Dataset p3 = generate(spec_2d("outlier_p3", 20000, 9));
  for (int64_t i = 0; i < 20000; ++i) {
    CHECK(radius(p3, i) < 6.0);
    CHECK(!is_outlier_label("outlier_p3", p3.labels[size_t(i)]));
  }
}

TEST_CASE("eight gaussians sit on the radius-4 circle with even weights") {
  const int64_t n = 100000;
  const Dataset d = generate(spec_2d("gm8", n, 21));
  const double band = 3.0 * std::sqrt(0.125 * 0.875 / double(n));
  for (int32_t k = 0; k < 8; ++k)
    CHECK(std::abs(label_fraction(d, k) - 0.125) < band);
  for (int64_t i = 0; i < n; ++i) {
    const double a = std::numbers::pi * double(d.labels[size_t(i)]) / 4.0;
    const double dx = d.points.at(i, 0) - 4.0 * std::cos(a);
    const double dy = d.points.at(i, 1) - 4.0 * std::sin(a);
    CHECK(std::sqrt(dx * dx + dy * dy) < 0.2 * 6.0);
  }
}

TEST_CASE("spiral fills the target box and spans all turns") {
  const int64_t n = 20000;
  const Dataset d = generate(spec_2d("spiral", n, 2));
  double max_r = 0.0, min_r = 100.0;
  for (int64_t i = 0; i < n; ++i) {
    CHECK(std::abs(d.points.at(i, 0)) < 2.3);
    CHECK(std::abs(d.points.at(i, 1)) < 2.3);
    max_r = std::max(max_r, radius(d, i));
    min_r = std::min(min_r, radius(d, i));
  }
  CHECK(max_r > 1.8);   // outer arm reaches the box edge
  CHECK(min_r < 0.35);  // inner arm approaches the centre
}

TEST_CASE("moons are standardized with balanced halves") {
  const int64_t n = 100000;
  const Dataset d = generate(spec_2d("moons", n, 8));
  CHECK(std::abs(label_fraction(d, 0) - 0.5) < 0.01);
  for (int64_t axis = 0; axis < 2; ++axis) {
    double mean = 0.0, sq = 0.0;
    for (int64_t i = 0; i < n; ++i) {
      mean += d.points.at(i, axis);
      sq += d.points.at(i, axis) * d.points.at(i, axis);
    }
    mean /= double(n);
    const double var = sq / double(n) - mean * mean;
    CHECK(std::abs(mean) < 0.02);
    // Noise sits on top of the frozen noiseless moments, so the variance
    // lands slightly above 1.
    CHECK(var == doctest::Approx(1.0).epsilon(0.08));
  }
}

TEST_CASE("gaussian datasets reproduce their moments") {
  DatasetSpec s;
  s.name = "gaussian";
  s.n = 50000;
  s.seed = 4;
  s.mean = Tensor({2});
  s.mean[0] = 1.0;
  s.mean[1] = -2.0;
  s.cov = Tensor::matrix(2, 2, std::vector<double>{2.0, 0.6, 0.6, 0.5});
  const Dataset d = generate(s);
  double mx = 0.0, my = 0.0, cxx = 0.0, cxy = 0.0, cyy = 0.0;
  for (int64_t i = 0; i < s.n; ++i) {
    mx += d.points.at(i, 0);
    my += d.points.at(i, 1);
  }
  mx /= double(s.n);
  my /= double(s.n);
  for (int64_t i = 0; i < s.n; ++i) {
    const double x = d.points.at(i, 0) - mx, y = d.points.at(i, 1) - my;
    cxx += x * x;
    cxy += x * y;
    cyy += y * y;
  }
  CHECK(mx == doctest::Approx(1.0).epsilon(0.02));
  CHECK(my == doctest::Approx(-2.0).epsilon(0.02));
  CHECK(cxx / double(s.n - 1) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(cxy / double(s.n - 1) == doctest::Approx(0.6).epsilon(0.05));
  CHECK(cyy / double(s.n - 1) == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(generate(spec_2d("mystery", 10, 0)), ConfigError);
  CHECK_THROWS_AS(generate(spec_2d("spiral", 0, 0)), ConfigError);
  DatasetSpec s;
  s.name = "gaussian";
  s.n = 10;
  s.mean = Tensor({2});
  s.cov = Tensor::matrix(2, 2, std::vector<double>{1.0, 2.0, 2.0, 1.0});
  CHECK_THROWS_AS(generate(s), NumericError);  // indefinite covariance
  s.cov = Tensor::matrix(2, 3, std::vector<double>{1, 0, 0, 0, 1, 0});
  CHECK_THROWS_AS(generate(s), ConfigError);
}
