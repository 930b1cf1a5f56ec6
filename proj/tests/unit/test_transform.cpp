#include <doctest.h>

#include <cmath>
#include <random>

#include "hiertect/error.hpp"
#include "hiertect/ising.hpp"
#include "hiertect/transform.hpp"
#include "../support/oracles.hpp"

using namespace hiertect;

namespace {

std::vector<double> random_symmetric(std::size_t p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> s(p * p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) s[i * p + j] = s[j * p + i] = u(rng);
  }
  return s;
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

} // namespace

TEST_CASE("two-leaf basis") {
  const HaarBasis b(Dendrogram(2, {{0, 1, 2, 0.5}}));
  const double r = 1 / std::sqrt(2.0);
  CHECK(b.column(0)[0] == doctest::Approx(-r));
  CHECK(b.column(0)[1] == doctest::Approx(r));
  CHECK(b.column(1)[0] == doctest::Approx(r));
  CHECK(b.column(1)[1] == doctest::Approx(r));
  CHECK_FALSE(b.provenance(1).has_value());
  CHECK(b.provenance(0)->left == 0);
}

TEST_CASE("single leaf basis is the unit vector") {
  const HaarBasis b(Dendrogram(1, {}));
  CHECK(b.column(0)[0] == doctest::Approx(1.0));
  CHECK(b.analyze(std::vector<double>{3.0})[0] == doctest::Approx(3.0));
}

TEST_CASE("balanced four-leaf basis") {
  const HaarBasis b(Dendrogram(4, {{0, 1, 4, 0}, {2, 3, 5, 0}, {4, 5, 6, 0}}));
  const std::vector<double> expected{-0.5, -0.5, 0.5, 0.5};
  for (std::size_t i = 0; i < 4; ++i) CHECK(b.column(2)[i] == doctest::Approx(expected[i]));
}

TEST_CASE("fast and dense products agree with the formula-built basis") {
  std::mt19937_64 rng(4);
  for (std::size_t p : {3u, 17u, 64u}) {
    const auto raw = random_symmetric(p, rng);
    const HaarBasis basis(agglomerate(SimilarityMatrix(p, raw)));
    const auto ref = oracle::dense_haar(oracle::naive_agglomerate(raw, p), p);
    for (std::size_t k = 0; k < p; ++k) {
      for (std::size_t i = 0; i < p; ++i) {
        CHECK(std::abs(basis.column(k)[i] - ref[k * p + i]) <= 1e-14);
      }
    }
    std::normal_distribution<double> g;
    std::vector<double> v(p);
    for (auto& x : v) x = g(rng);
    const auto fast = basis.analyze(v);
    const auto dense = basis.analyze_dense(v);
    for (std::size_t k = 0; k < p; ++k) {
      double dot = 0;
      for (std::size_t i = 0; i < p; ++i) dot += ref[k * p + i] * v[i];
      CHECK(std::abs(fast[k] - dot) <= 1e-12);
      CHECK(std::abs(dense[k] - dot) <= 1e-12);
    }
    const auto back_fast = basis.synthesize(fast);
    const auto back_dense = basis.synthesize_dense(fast);
    for (std::size_t i = 0; i < p; ++i) {
      CHECK(std::abs(back_fast[i] - v[i]) <= 1e-12);
      CHECK(std::abs(back_dense[i] - v[i]) <= 1e-12);
    }
  }
}

TEST_CASE("all-ones and zero vectors") {
  std::mt19937_64 rng(6);
  const std::size_t p = 20;
  const HaarBasis basis(agglomerate(SimilarityMatrix(p, random_symmetric(p, rng))));
  const std::vector<double> ones(p, 1.0);
  const auto c = basis.analyze(ones);
  CHECK(c.back() == doctest::Approx(std::sqrt(double(p))));
  CHECK(sparsity(c, sparsity_tolerance(ones)) == 1);
  CHECK(sparsity(basis.analyze(std::vector<double>(p, 0.0)), 1e-9) == 0);
  std::vector<double> unit(p, 0.0);
  unit.back() = 1;
  for (double v : basis.synthesize(unit)) CHECK(v == doctest::Approx(1 / std::sqrt(double(p))));
}

TEST_CASE("dimension mismatch is a contract violation") {
  const HaarBasis b(Dendrogram(2, {{0, 1, 2, 0}}));
  CHECK_THROWS_AS(b.analyze(std::vector<double>(3)), ContractViolation);
  CHECK_THROWS_AS(b.synthesize(std::vector<double>(1)), ContractViolation);
  CHECK_THROWS_AS(sparsity(std::vector<double>(2), -1), ContractViolation);
}

TEST_CASE("property: orthonormality, zero sums and support structure") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t p = 5 + 13 * rep;
    const HaarBasis b(agglomerate(SimilarityMatrix(p, random_symmetric(p, rng))));
    for (std::size_t k = 0; k < p; ++k) {
      for (std::size_t l = k; l < p; ++l) {
        double dot = 0;
        for (std::size_t i = 0; i < p; ++i) dot += b.column(k)[i] * b.column(l)[i];
        CHECK(std::abs(dot - (k == l ? 1.0 : 0.0)) <= 1e-12);
      }
      if (k + 1 == p) continue;
      double sum = 0;
      for (double v : b.column(k)) sum += v;
      CHECK(std::abs(sum) <= 1e-12);
      const auto prov = *b.provenance(k);
      const auto& parent = b.dendrogram().cluster(p + k).members;
      std::size_t support = 0;
      for (std::size_t i = 0; i < p; ++i) support += b.column(k)[i] != 0;
      CHECK(support == parent.size());
      for (auto i : b.dendrogram().cluster(prov.left).members) CHECK(b.column(k)[i] < 0);
      for (auto i : b.dendrogram().cluster(prov.right).members) CHECK(b.column(k)[i] > 0);
    }
  }
}

TEST_CASE("property: Parseval and round trip on random vectors") {
  std::mt19937_64 rng(13);
  const std::size_t p = 64;
  const HaarBasis b(agglomerate(SimilarityMatrix(p, random_symmetric(p, rng))));
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v(p);
    for (auto& x : v) x = g(rng);
    const auto c = b.analyze(v);
    CHECK(std::abs(norm(c) - norm(v)) <= 1e-9 * norm(v));
    const auto back = b.synthesize(c);
    for (std::size_t i = 0; i < p; ++i) CHECK(std::abs(back[i] - v[i]) < 1e-9);
  }
}

TEST_CASE("cluster indicators are sparse in the true-tree basis") {
  const TreeModel model(3, 3);
  const HaarBasis b(true_tree_dendrogram(model, 0.75));
  const std::size_t p = model.leaf_count();
  const std::size_t d = 3, depth = 3;
  std::mt19937_64 rng(21);
  const auto blocks = oracle::subtree_blocks(d, depth);
  std::vector<oracle::Members> pool(blocks.begin(), blocks.end());
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 1 + rep % 4;
    std::vector<double> x(p, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      const auto& block = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
      for (auto i : block) x[i] = 1.0;
    }
    const auto c = b.analyze(x);
    CHECK(sparsity(c, sparsity_tolerance(x)) <= m * d * depth);
    double max_abs = 0, nnz = 0;
    for (double v : c) max_abs = std::max(max_abs, std::abs(v));
    for (double v : x) nnz += v;
    // Average energy per non-zero coefficient.
    CHECK(max_abs * max_abs >= nnz / double(sparsity(c, sparsity_tolerance(x))) - 1e-12);
  }
}

TEST_CASE("sampled patterns round-trip exactly after rounding") {
  const TreeModel model(4, 3);
  const auto schedule = GammaSchedule::scaling(model, 0.75);
  const HaarBasis b(true_tree_dendrogram(model, 0.75));
  Rng rng(31);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = sample(model, schedule, false, rng);
    const auto back = b.synthesize(b.analyze(s.leaf_values()));
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(std::lround(back[i]) == s.x[i]);
  }
}
