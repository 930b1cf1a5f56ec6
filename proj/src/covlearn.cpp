#include "hiertect/covlearn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hiertect/error.hpp"
#include "hiertect/parallel.hpp"

namespace hiertect {

SnapshotSet::SnapshotSet(std::size_t n, std::size_t p, std::vector<double> data,
                         double bound)
    : n_(n), p_(p), bound_(bound), data_(std::move(data)) {
  if (n_ < 1) throw ValidationError("snapshots: need at least one snapshot");
  if (p_ < 1) throw ValidationError("snapshots: need at least one node");
  if (data_.size() != n_ * p_) throw ValidationError("snapshots: data is not n x p");
  for (std::size_t k = 0; k < data_.size(); ++k) {
    if (!std::isfinite(data_[k])) {
      throw ValidationError("snapshots: non-finite value in snapshot " +
                            std::to_string(k / p_) + ", node " + std::to_string(k % p_));
    }
  }
}

SimilarityMatrix empirical_cov(const SnapshotSet& snapshots, double center) {
  const std::size_t p = snapshots.nodes();
  std::vector<double> acc(p * p, 0.0);
  std::vector<double> u(p);
  for (std::size_t k = 0; k < snapshots.count(); ++k) {
    const auto y = snapshots.snapshot(k);
    for (std::size_t i = 0; i < p; ++i) u[i] = y[i] - center;
    for (std::size_t i = 0; i < p; ++i) {
      double* row = acc.data() + i * p;
      const double ui = u[i];
      for (std::size_t j = i; j < p; ++j) row[j] += ui * u[j];
    }
  }
  const double n = static_cast<double>(snapshots.count());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      acc[i * p + j] /= n;
      acc[j * p + i] = acc[i * p + j];
    }
  }
  return SimilarityMatrix(p, std::move(acc));
}

GapStats similarity_gap(const SimilarityMatrix& truth, const HierarchySet& h) {
  if (truth.size() != h.leaf_count()) throw ContractViolation("similarity_gap: size mismatch");
  const std::size_t p = truth.size();
  const auto& clusters = h.clusters();
  double tau = std::numeric_limits<double>::infinity();
  std::vector<bool> inside(p);
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const auto& c = clusters[k];
    if (h.parent_of(k) == HierarchySet::npos || c.size() < 2) continue;
    std::fill(inside.begin(), inside.end(), false);
    for (auto i : c) inside[i] = true;
    double within = std::numeric_limits<double>::infinity();
    double cross = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < c.size(); ++x) {
      for (std::size_t y = x + 1; y < c.size(); ++y) {
        within = std::min(within, truth(c[x], c[y]));
      }
      for (std::size_t j = 0; j < p; ++j) {
        if (!inside[j]) cross = std::max(cross, truth(c[x], j));
      }
    }
    tau = std::min(tau, within - cross);
  }
  if (!(tau > 0)) {
    throw ValidationError("similarity_gap: separation violated (gap " +
                          std::to_string(tau) + ")");
  }
  return {tau};
}

std::vector<RecoveryRow> recovery_experiment(const TreeModel& model,
                                             const GammaSchedule& schedule,
                                             std::span<const std::size_t> n_grid,
                                             const RecoveryOptions& options) {
  if (schedule.is_constrained()) {
    throw ValidationError("recovery: needs the unconstrained model");
  }
  for (std::size_t level = 1; level <= model.depth(); ++level) {
    if (!std::isfinite(schedule.gamma(level))) {
      throw ValidationError("recovery: schedule must be finite at every level");
    }
  }
  if (n_grid.empty()) throw ValidationError("recovery: empty snapshot grid");
  if (n_grid.front() < 1 || !std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
    throw ValidationError("recovery: snapshot grid must be strictly increasing and >= 1");
  }
  if (options.trials == 0) throw ValidationError("recovery: trials must be >= 1");
  if (!(options.sigma >= 0)) throw ValidationError("recovery: sigma must be >= 0");

  const std::size_t p = model.leaf_count();
  const HierarchySet truth = model.subtree_hierarchy();
  const double center = options.recenter ? 0.5 : 0.0;
  const std::size_t grid = n_grid.size();
  std::vector<std::uint8_t> success(options.trials * grid, 0);

  parallel_for(options.trials, options.threads, [&](std::size_t t) {
    Rng rng = derive_stream(options.seed, {4, p, t});
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> acc(p * p, 0.0);
    std::vector<double> u(p);
    std::size_t next = 0;
    for (std::size_t n = 1; next < grid; ++n) {
      const auto pattern = sample(model, schedule, false, rng);
      for (std::size_t i = 0; i < p; ++i) {
        u[i] = static_cast<double>(pattern.x[i]) + options.sigma * gauss(rng) - center;
      }
      for (std::size_t i = 0; i < p; ++i) {
        double* row = acc.data() + i * p;
        const double ui = u[i];
        for (std::size_t j = i + 1; j < p; ++j) row[j] += ui * u[j];
      }
      if (n != n_grid[next]) continue;
      std::vector<double> r(p * p, 0.0);
      const double inv = 1.0 / static_cast<double>(n);
      for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
          r[i * p + j] = r[j * p + i] = acc[i * p + j] * inv;
        }
      }
      // The diagonal never enters the linkage, so it is left at zero.
      const auto dendrogram = agglomerate(SimilarityMatrix(p, std::move(r)));
      success[t * grid + next] = contains_hierarchy(dendrogram, truth);
      ++next;
    }
  });

  std::vector<RecoveryRow> rows;
  for (std::size_t g = 0; g < grid; ++g) {
    std::size_t hits = 0;
    for (std::size_t t = 0; t < options.trials; ++t) hits += success[t * grid + g];
    const double n = static_cast<double>(options.trials);
    const double prob = static_cast<double>(hits) / n;
    rows.push_back({p, n_grid[g], options.trials, hits, prob,
                    std::sqrt(prob * (1 - prob) / n)});
  }
  return rows;
}

std::size_t thm4_sample_bound(double tau, double p, double delta, double c1, double c2) {
  if (!(tau > 0)) throw ValidationError("sample bound: tau must be > 0");
  if (!(delta > 0 && delta < 1)) throw ValidationError("sample bound: delta must lie in (0, 1)");
  if (!(c1 > 0 && c2 > 0)) throw ValidationError("sample bound: constants must be > 0");
  if (!(p >= 1)) throw ValidationError("sample bound: p must be >= 1");
  const double rhs = std::log(c1 * p * p / delta) / (c2 * tau * tau);
  auto ratio = [](double n) { return n / std::log(n); };
  if (ratio(2.0) >= rhs) return 2;
  // n / ln n is increasing for n >= 3.
  std::size_t lo = 3;
  if (ratio(3.0) >= rhs) return 3;
  std::size_t hi = 4;
  while (ratio(static_cast<double>(hi)) < rhs) {
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (ratio(static_cast<double>(mid)) >= rhs) hi = mid; else lo = mid;
  }
  return hi;
}

Thm4Constants thm4_default_constants(double sigma, double bound) {
  const double s2 = sigma * sigma;
  const double m2 = bound * bound;
  const double var_bound = 2 * s2 * s2 + 4 * m2 * s2 + 4 * m2 * m2;
  return {2.0, 1.0 / (16.0 * var_bound)};
}

} // namespace hiertect
