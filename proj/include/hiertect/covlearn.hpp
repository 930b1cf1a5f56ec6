#pragma once

// Covariance estimation from noisy snapshots and hierarchy-recovery
// sample-complexity experiments.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hiertect/hierarchy.hpp"
#include "hiertect/ising.hpp"

namespace hiertect {

class SnapshotSet {
public:
  /// n x p row-major observations; throws ValidationError for n < 1,
  /// a size mismatch or non-finite entries.
  SnapshotSet(std::size_t n, std::size_t p, std::vector<double> data,
              double bound = 1.0);

  std::size_t count() const noexcept { return n_; }
  std::size_t nodes() const noexcept { return p_; }
  double bound() const noexcept { return bound_; }
  std::span<const double> snapshot(std::size_t k) const {
    return {data_.data() + k * p_, p_};
  }

private:
  std::size_t n_;
  std::size_t p_;
  double bound_;
  std::vector<double> data_;
};

/// r_ij = (1/n) sum_k (y_i - center)(y_j - center). center = 0 gives the
/// uncentered second moments; 0.5 recentres binary patterns by their known mean.
SimilarityMatrix empirical_cov(const SnapshotSet& snapshots, double center = 0.0);

struct GapStats {
  double tau = 0.0;
};

/// Smallest margin, over clusters c' below the root, between the minimum
/// similarity inside c' and the maximum similarity from c' to the rest of
/// the enclosing clusters. Throws ValidationError if the margin is <= 0.
GapStats similarity_gap(const SimilarityMatrix& truth, const HierarchySet& h);

struct RecoveryRow {
  std::size_t p = 0;
  std::size_t n = 0;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double probability = 0.0;
  double std_error = 0.0;
};

struct RecoveryOptions {
  double sigma = 0.1;
  bool recenter = true; // subtract the known leaf mean 1/2
  std::size_t trials = 100;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// For each n in `n_grid` (ascending): per trial, draw snapshots y = x + noise
/// from the model, cluster the empirical covariance of the first n and score
/// containment of the tree's subtree hierarchy. Grid points of one trial
/// share a snapshot stream (nested prefixes), so successive n are paired.
std::vector<RecoveryRow> recovery_experiment(const TreeModel& model,
                                             const GammaSchedule& schedule,
                                             std::span<const std::size_t> n_grid,
                                             const RecoveryOptions& options);

/// Smallest n >= 2 with n / ln n >= ln(c1 p^2 / delta) / (c2 tau^2).
std::size_t thm4_sample_bound(double tau, double p, double delta, double c1,
                              double c2);

struct Thm4Constants {
  double c1;
  double c2;
};

/// c1 = 2 and c2 = 1 / (16 (2 sigma^4 + 4 M^2 sigma^2 + 4 M^4)), the values
/// that fall out of the Bernstein/union-bound argument.
Thm4Constants thm4_default_constants(double sigma, double bound);

} // namespace hiertect
