#pragma once

// Multi-scale latent Ising model on a uniform d-ary tree.
//
// Vertices are stored level by level (root = level 0, leaves = level L);
// vertex v at level l has position v - offset(l), its parent sits at
// position (v - offset(l)) / d on level l-1. An edge's level is the level of
// its child vertex.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "hiertect/hierarchy.hpp"
#include "hiertect/random.hpp"

namespace hiertect {

class TreeModel {
public:
  /// Throws ValidationError unless degree >= 2, depth >= 1 and the tree has
  /// at most 2^27 vertices.
  TreeModel(std::size_t degree, std::size_t depth);

  std::size_t degree() const noexcept { return degree_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t leaf_count() const noexcept { return level_size_.back(); }
  std::size_t vertex_count() const noexcept { return vertex_count_; }

  std::size_t level_size(std::size_t level) const { return level_size_.at(level); }
  std::size_t level_offset(std::size_t level) const { return level_offset_.at(level); }
  /// |E_l| = d^l edges enter level l (l >= 1).
  std::size_t edge_count(std::size_t level) const { return level_size_.at(level); }

  std::size_t level_of(std::size_t vertex) const;
  std::size_t parent(std::size_t vertex) const;
  std::size_t leaf_vertex(std::size_t leaf) const {
    return level_offset_.back() + leaf;
  }

  /// Level of the root of the smallest subtree holding both leaves.
  std::size_t meeting_level(std::size_t leaf_a, std::size_t leaf_b) const;

  /// All subtrees as leaf sets (singletons and the full set included).
  HierarchySet subtree_hierarchy() const;

private:
  std::size_t degree_;
  std::size_t depth_;
  std::size_t vertex_count_ = 0;
  std::vector<std::size_t> level_size_;
  std::vector<std::size_t> level_offset_;
};

/// q = 1/(1+e^gamma); 0 for gamma = +inf. Throws ValidationError for
/// gamma <= 0 or NaN.
double flip_prob(double gamma);

class GammaSchedule {
public:
  /// gamma_l = l * beta * ln d for every level; beta in (0, 1].
  static GammaSchedule scaling(const TreeModel& model, double beta);

  /// gamma_l = l * beta * ln d for l >= l0 and +inf below, with
  /// l0 = ceil((alpha/beta) L) and 0 < alpha < beta <= 1.
  static GammaSchedule constrained(const TreeModel& model, double beta,
                                   double alpha);

  /// Explicit per-level values for l = 1..L (each > 0, +inf allowed).
  static GammaSchedule explicit_levels(const TreeModel& model,
                                       std::vector<double> gammas);

  std::size_t depth() const noexcept { return gamma_.size(); }
  double gamma(std::size_t level) const { return gamma_.at(level - 1); }
  double flip(std::size_t level) const { return flip_.at(level - 1); }

  std::optional<double> beta() const noexcept { return beta_; }
  std::optional<double> alpha() const noexcept { return alpha_; }
  std::optional<std::size_t> cutoff_level() const noexcept { return cutoff_; }

  /// Built by constrained(): levels above the cutoff are frozen.
  bool is_constrained() const noexcept { return alpha_.has_value(); }

  /// Replaces level flip probabilities (test fixtures for negative controls).
  GammaSchedule with_flip_offset(double delta) const;

private:
  GammaSchedule() = default;
  void set_level(std::size_t index, double gamma);

  std::vector<double> gamma_;
  std::vector<double> flip_;
  std::optional<double> beta_;
  std::optional<double> alpha_;
  std::optional<std::size_t> cutoff_;
};

struct PatternSample {
  std::vector<std::uint8_t> x;         // leaf values
  std::vector<std::uint8_t> z;         // all vertices, level order
  std::vector<std::size_t> flips;      // D_l, index l = 0..L (flips[0] = 0)
  std::vector<std::size_t> active;     // A_l, index l = 0..L
  std::uint8_t root_value = 0;

  std::size_t active_leaves() const { return active.back(); }
  std::vector<double> leaf_values() const { return {x.begin(), x.end()}; }
};

/// Exact draw via root-to-leaf edge flips: the root is uniform (or 0 when
/// constrained) and each child disagrees with its parent with probability
/// q_l, independently.
PatternSample sample(const TreeModel& model, const GammaSchedule& schedule,
                     bool constrain_root_zero, Rng& rng);

/// Leaf pattern distribution; pattern bit i is leaf i.
class LeafDistribution {
public:
  LeafDistribution(std::size_t leaf_count, std::vector<double> probabilities);

  std::size_t leaf_count() const noexcept { return leaf_count_; }
  std::size_t pattern_count() const noexcept { return prob_.size(); }
  double operator[](std::uint64_t pattern) const { return prob_.at(pattern); }
  const std::vector<double>& probabilities() const noexcept { return prob_; }

  /// E[x_i x_j] - E[x_i] E[x_j] from the table.
  SimilarityMatrix covariance() const;

private:
  std::size_t leaf_count_;
  std::vector<double> prob_;
};

inline constexpr std::size_t kMaxEnumerationVertices = 22;

/// Exhaustive sum of exp(Hamiltonian) over every vertex configuration
/// consistent with each leaf pattern. Throws SizeError above 22 vertices.
LeafDistribution enumerate_distribution(const TreeModel& model,
                                        const GammaSchedule& schedule,
                                        bool constrain_root_zero);

/// The same table from the edge-flip factorisation (product of q_l and
/// 1-q_l over edges, root weight 1/2). Same size limit.
LeafDistribution flip_factorized_distribution(const TreeModel& model,
                                              const GammaSchedule& schedule,
                                              bool constrain_root_zero);

/// cov(x_i, x_j) = 1/4 prod over path edges of (1 - 2 q_l) = 1/4 prod of
/// tanh(gamma_l / 2). Throws ValidationError for constrained schedules
/// (the closed form needs the symmetric root).
SimilarityMatrix exact_leaf_covariance(const TreeModel& model,
                                       const GammaSchedule& schedule);

/// 3 d L^2 p^(1-beta). Needs a beta schedule.
double thm1_transform_bound(const TreeModel& model, const GammaSchedule& schedule);

struct CanonicalBounds {
  double lower;
  double upper;
};

/// (c_low p^(1-alpha), C_high L p^(1-alpha)). Needs a constrained schedule.
CanonicalBounds thm2_canonical_bounds(const TreeModel& model,
                                      const GammaSchedule& schedule,
                                      double c_low, double c_high);

/// Dendrogram of the generating tree: agglomerate() over the exact leaf
/// covariance of the finite scaling schedule with this beta.
Dendrogram true_tree_dendrogram(const TreeModel& model, double beta);

} // namespace hiertect
