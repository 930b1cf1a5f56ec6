#include <doctest.h>

#include <cmath>
#include <random>

#include "hiertect/covlearn.hpp"
#include "hiertect/error.hpp"
#include "hiertect/stats.hpp"

using namespace hiertect;

namespace {

// Closed-form gap of the d-ary tree model from per-level tanh factors.
double tree_gap(std::size_t d, std::size_t depth, double beta) {
  std::vector<double> t;
  for (std::size_t l = 1; l <= depth; ++l) t.push_back(std::tanh(double(l) * beta * std::log(double(d)) / 2));
  auto meet = [&](std::size_t m) {
    double c = 0.25;
    for (std::size_t l = m; l < depth; ++l) c *= t[l] * t[l];
    return c;
  };
  double gap = 1e300;
  for (std::size_t m = 1; m < depth; ++m) gap = std::min(gap, meet(m) - meet(m - 1));
  return gap;
}

} // namespace

TEST_CASE("empirical covariance basics") {
  const SnapshotSet one(1, 3, {1, 1, 1});
  const auto r = empirical_cov(one);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(r(i, j) == 1.0);
  }
  CHECK_THROWS_AS(SnapshotSet(0, 3, {}), ValidationError);
  CHECK_THROWS_AS(SnapshotSet(1, 3, {1, 2}), ValidationError);
  CHECK_THROWS_AS(SnapshotSet(1, 2, {1, std::nan("")}), ValidationError);
}

TEST_CASE("pure noise second moments") {
  const std::size_t n = 20000, p = 5;
  const double sigma = 0.5;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0, sigma);
  std::vector<double> data(n * p);
  for (auto& v : data) v = g(rng);
  const auto r = empirical_cov(SnapshotSet(n, p, data));
  const double tol = 3 / std::sqrt(double(n));
  for (std::size_t i = 0; i < p; ++i) {
    CHECK(std::abs(r(i, i) - sigma * sigma) < tol);
    for (std::size_t j = i + 1; j < p; ++j) CHECK(std::abs(r(i, j)) < tol);
  }
}

TEST_CASE("property: symmetric and invariant under snapshot reordering") {
  const std::size_t n = 50, p = 6;
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<double> data(n * p);
  for (auto& v : data) v = g(rng);
  std::vector<double> reversed(n * p);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < p; ++i) reversed[(n - 1 - k) * p + i] = data[k * p + i];
  }
  const auto a = empirical_cov(SnapshotSet(n, p, data), 0.5);
  const auto b = empirical_cov(SnapshotSet(n, p, reversed), 0.5);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      CHECK(a(i, j) == a(j, i));
      CHECK(std::abs(a(i, j) - b(i, j)) <= 1e-12);
    }
  }
}

TEST_CASE("estimation error decays like one over root n") {
  const TreeModel t(2, 3);
  const auto g = GammaSchedule::scaling(t, 0.75);
  const auto truth = exact_leaf_covariance(t, g);
  const std::size_t p = t.leaf_count();
  std::vector<double> log_n, log_err;
  Rng rng(3);
  std::normal_distribution<double> noise(0, 0.1);
  for (std::size_t n : {100u, 400u, 1600u, 6400u, 25600u}) {
    double err = 0;
    const int reps = 30;
    for (int rep = 0; rep < reps; ++rep) {
      std::vector<double> data(n * p);
      for (std::size_t k = 0; k < n; ++k) {
        const auto s = sample(t, g, false, rng);
        for (std::size_t i = 0; i < p; ++i) data[k * p + i] = s.x[i] + noise(rng);
      }
      const auto r = empirical_cov(SnapshotSet(n, p, data), 0.5);
      double worst = 0;
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) worst = std::max(worst, std::abs(r(i, j) - truth(i, j)));
      }
      err += worst / reps;
    }
    log_n.push_back(std::log(double(n)));
    log_err.push_back(std::log(err));
  }
  CHECK(std::abs(stats::fit_line(log_n, log_err).slope + 0.5) <= 0.1);
}

TEST_CASE("gap on a block matrix") {
  const std::size_t p = 4;
  std::vector<double> raw(p * p, 0.1);
  raw[0 * p + 1] = raw[1 * p + 0] = 0.9;
  raw[2 * p + 3] = raw[3 * p + 2] = 0.9;
  const HierarchySet h(p, {{0, 1, 2, 3}, {0, 1}, {2, 3}, {0}, {1}, {2}, {3}});
  CHECK(similarity_gap(SimilarityMatrix(p, raw), h).tau == doctest::Approx(0.8));
  raw[0 * p + 2] = raw[2 * p + 0] = 0.95;
  CHECK_THROWS_AS(similarity_gap(SimilarityMatrix(p, raw), h), ValidationError);
}

TEST_CASE("gap of the small binary tree") {
  const TreeModel t(2, 2);
  const auto g = GammaSchedule::explicit_levels(t, {std::log(2.0), 2 * std::log(2.0)});
  const auto cov = enumerate_distribution(t, g, false).covariance();
  // Siblings 0.09, cousins 0.01.
  CHECK(similarity_gap(cov, t.subtree_hierarchy()).tau == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("gap across a beta scan matches the closed form") {
  for (auto [d, depth] : std::vector<std::pair<std::size_t, std::size_t>>{{2, 2}, {6, 4}, {3, 3}}) {
    const TreeModel t(d, depth);
    for (double beta : {0.25, 0.5, 0.75, 1.0}) {
      const auto cov = exact_leaf_covariance(t, GammaSchedule::scaling(t, beta));
      const double tau = similarity_gap(cov, t.subtree_hierarchy()).tau;
      CHECK(tau == doctest::Approx(tree_gap(d, depth, beta)).epsilon(1e-9));
    }
  }
}

TEST_CASE("recovery is certain with many snapshots and poor with one") {
  const TreeModel t(2, 2);
  const auto g = GammaSchedule::scaling(t, 0.75);
  RecoveryOptions opts;
  opts.trials = 20;
  opts.seed = 4;
  const std::vector<std::size_t> big{100000};
  CHECK(recovery_experiment(t, g, big, opts).front().probability == 1.0);

  const TreeModel t8(2, 3);
  opts.trials = 300;
  const std::vector<std::size_t> one{1};
  CHECK(recovery_experiment(t8, GammaSchedule::scaling(t8, 0.75), one, opts).front().probability < 0.3);
}

TEST_CASE("recovery probability is monotone in n with paired draws") {
  const TreeModel t(3, 2);
  const auto g = GammaSchedule::scaling(t, 0.75);
  RecoveryOptions opts;
  opts.trials = 200;
  opts.seed = 5;
  opts.threads = 2;
  const std::vector<std::size_t> grid{5, 10, 20, 40, 80, 160, 320};
  const auto rows = recovery_experiment(t, g, grid, opts);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].probability >= rows[k - 1].probability - 2 * rows[k - 1].std_error - 1e-12);
  }
  CHECK(rows.back().probability > rows.front().probability);
  opts.threads = 1;
  const auto serial = recovery_experiment(t, g, grid, opts);
  for (std::size_t k = 0; k < rows.size(); ++k) CHECK(serial[k].successes == rows[k].successes);
}

TEST_CASE("recovery validates its inputs") {
  const TreeModel t(2, 2);
  const auto g = GammaSchedule::scaling(t, 0.75);
  RecoveryOptions opts;
  CHECK_THROWS_AS(recovery_experiment(t, g, std::vector<std::size_t>{}, opts), ValidationError);
  CHECK_THROWS_AS(recovery_experiment(t, g, std::vector<std::size_t>{5, 5}, opts), ValidationError);
  CHECK_THROWS_AS(recovery_experiment(t, GammaSchedule::constrained(t, 0.75, 0.3),
                                      std::vector<std::size_t>{5}, opts),
                  ValidationError);
}

TEST_CASE("sample bound behaviour") {
  const double c1 = 2, c2 = 0.01;
  const auto n = thm4_sample_bound(0.05, 64, 0.05, c1, c2);
  const double rhs = std::log(c1 * 64 * 64 / 0.05) / (c2 * 0.05 * 0.05);
  CHECK(double(n) / std::log(double(n)) >= rhs);
  CHECK(double(n - 1) / std::log(double(n - 1)) < rhs);
  CHECK(thm4_sample_bound(0.1, 64, 0.05, c1, c2) < n);
  // With c1 = delta, squaring p doubles the right-hand side, as does dividing tau by sqrt 2.
  const double delta = 0.1;
  const auto squared = thm4_sample_bound(0.05, 64.0 * 64.0, delta, delta, c2);
  const auto narrowed = thm4_sample_bound(0.05 / std::sqrt(2.0), 64, delta, delta, c2);
  CHECK(std::max(squared, narrowed) - std::min(squared, narrowed) <= 1);
  CHECK(thm4_sample_bound(10, 2, 0.5, 1, 1) == 2);
  CHECK_THROWS_AS(thm4_sample_bound(0, 64, 0.05, c1, c2), ValidationError);
  CHECK_THROWS_AS(thm4_sample_bound(0.1, 64, 1.0, c1, c2), ValidationError);
}

TEST_CASE("recovery succeeds at the sample bound") {
  const TreeModel t(2, 2);
  const auto g = GammaSchedule::explicit_levels(t, {std::log(2.0), 2 * std::log(2.0)});
  const auto k = thm4_default_constants(0.1, 1.0);
  CHECK(k.c1 == 2.0);
  CHECK(k.c2 == doctest::Approx(1 / (16 * (2e-4 + 0.04 + 4))));
  const double tau = similarity_gap(exact_leaf_covariance(t, g), t.subtree_hierarchy()).tau;
  const double delta = 0.05;
  const auto n = thm4_sample_bound(tau, 4, delta, k.c1, k.c2);
  RecoveryOptions opts;
  opts.trials = 20;
  opts.seed = 6;
  const auto rows = recovery_experiment(t, g, std::vector<std::size_t>{n}, opts);
  CHECK(rows.front().probability >= 1 - delta);
}
