#include <doctest.h>

#include <cmath>
#include <random>

#include "hiertect/stats.hpp"

using namespace hiertect;

TEST_CASE("normal helpers") {
  CHECK(stats::normal_cdf(0) == doctest::Approx(0.5));
  CHECK(stats::normal_quantile(0.95) == doctest::Approx(1.6448536269));
  CHECK(stats::chi_square_survival(3.841458820694124, 1) == doctest::Approx(0.05));
}

TEST_CASE("Kolmogorov survival values") {
  CHECK(stats::kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(stats::kolmogorov_survival(0.05) == doctest::Approx(1.0));
  CHECK(stats::kolmogorov_survival(3.0) < 1e-6);
}

TEST_CASE("KS tests accept the truth and reject a shift") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> a, b, c;
  for (int k = 0; k < 5000; ++k) {
    a.push_back(g(rng));
    b.push_back(g(rng));
    c.push_back(g(rng) + 0.2);
  }
  CHECK(stats::ks_test(a, stats::normal_cdf).p_value > 0.01);
  CHECK(stats::ks_test(c, stats::normal_cdf).p_value < 1e-6);
  CHECK(stats::ks_two_sample(a, b).p_value > 0.01);
  CHECK(stats::ks_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("line fit and moments") {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const auto f = stats::fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2));
  CHECK(f.intercept == doctest::Approx(1));
  CHECK(stats::mean(x) == doctest::Approx(2.5));
  CHECK(stats::variance(x) == doctest::Approx(5.0 / 3));
  CHECK(stats::total_variation(std::vector<double>{0.5, 0.5}, std::vector<double>{1, 0}) == doctest::Approx(0.5));
}
