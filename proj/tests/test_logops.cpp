#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "keig/errors.hpp"
#include "keig/logops.hpp"
#include "keig/rng.hpp"

using namespace keig;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("log_sum_exp rejects empty input") {
  CHECK_THROWS_AS(log_sum_exp({}), std::invalid_argument);
}

TEST_CASE("log_sum_exp rejects all-degenerate weights") {
  CHECK_THROWS_AS(log_sum_exp({-kInf, -kInf, -kInf}), DegenerateWeightsError);
}

TEST_CASE("log_sum_exp is exact on a single element") {
  CHECK(log_sum_exp({-1234.5}) == -1234.5);
  CHECK(log_sum_exp({0.0}) == 0.0);
}

TEST_CASE("log_sum_exp survives deep underflow via the max shift") {
  // exp(-700) underflows double when naively summed after exponentiation.
  const double a = -700.0;
  const double b = -700.0 + std::log(9.0);
  const double got = log_sum_exp({a, b});
  CHECK(got == doctest::Approx(-700.0 + std::log(10.0)).epsilon(1e-14));
  const std::vector<double> p =
      normalize_log_weights(LogWeightVector{{a, b}});
  CHECK(p[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("log_sum_exp is shift invariant") {
  const std::vector<double> base{-2.0, 0.5, 1.3, -7.0};
  const double ref = log_sum_exp(base);
  for (double shift : {-300.0, -5.0, 11.0, 250.0}) {
    std::vector<double> moved = base;
    for (double& v : moved) v += shift;
    CHECK(log_sum_exp(moved) - shift == doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("log_sum_exp tolerates isolated -inf entries") {
  CHECK(log_sum_exp({-kInf, 0.0, -kInf}) == doctest::Approx(0.0));
}

TEST_CASE("normalized log weights sum to one") {
  const std::vector<double> p =
      normalize_log_weights(LogWeightVector{{-3.0, -1.0, -2.5, 0.7, -400.0}});
  double total = 0.0;
  for (double v : p) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("categorical table reproduces its probabilities") {
  const std::vector<double> probs{0.3, 0.5, 0.2};
  CategoricalTable table(probs);
  RngStream stream(99, StreamPurpose::scratch, 1, 0);
  const int draws = 1000000;
  std::vector<int> counts(3, 0);
  for (int i = 0; i < draws; ++i) ++counts[table.sample(stream)];
  for (int k = 0; k < 3; ++k) {
    // 4 sigma of a binomial proportion at one million draws.
    const double se = std::sqrt(probs[k] * (1 - probs[k]) / draws);
    CHECK(std::abs(counts[k] / double(draws) - probs[k]) < 4.0 * se + 1e-12);
  }
}

TEST_CASE("categorical sampling handles a deterministic cell") {
  const std::vector<double> probs{0.0, 1.0, 0.0};
  CategoricalTable table(probs);
  RngStream stream(7, StreamPurpose::scratch, 0, 0);
  for (int i = 0; i < 100; ++i) CHECK(table.sample(stream) == 1);
  RngStream other(8, StreamPurpose::scratch, 0, 0);
  CHECK(categorical_sample(probs, other) == 1);
}

TEST_CASE("categorical table rejects unnormalized input") {
  CHECK_THROWS_AS(CategoricalTable({0.4, 0.4}), std::invalid_argument);
  CHECK_THROWS_AS(CategoricalTable({0.5, -0.1, 0.6}), std::invalid_argument);
}
