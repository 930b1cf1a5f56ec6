#pragma once

// Average-linkage agglomerative clustering over a similarity matrix and the
// laminar-family checks used to reason about hierarchy recovery.
//
// Leaf indices are 0-based throughout. Cluster ids 0..p-1 are the singleton
// leaves; merge k creates cluster id p+k.

#include <cstddef>
#include <span>
#include <vector>

namespace hiertect {

class SimilarityMatrix {
public:
  SimilarityMatrix() = default;

  /// Takes a row-major p*p buffer. Throws ValidationError on NaN entries or
  /// asymmetry beyond 1e-12 relative; near-symmetric input is symmetrised.
  SimilarityMatrix(std::size_t size, std::vector<double> row_major);

  std::size_t size() const noexcept { return size_; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return entries_[i * size_ + j];
  }
  std::span<const double> row(std::size_t i) const noexcept {
    return {entries_.data() + i * size_, size_};
  }
  std::span<const double> data() const noexcept { return entries_; }

private:
  std::size_t size_ = 0;
  std::vector<double> entries_;
};

struct Cluster {
  std::size_t id = 0;
  std::vector<std::size_t> members; // sorted ascending, non-empty

  std::size_t min_member() const { return members.front(); }
  std::size_t size() const noexcept { return members.size(); }
};

struct Merge {
  std::size_t left = 0;   // c1: the child holding the smaller min member
  std::size_t right = 0;  // c2
  std::size_t parent = 0;
  double linkage = 0.0;
};

class Dendrogram {
public:
  Dendrogram() = default;

  /// Rebuilds cluster membership from the merge list and validates it:
  /// exactly p-1 merges, parent ids p..2p-2 in order, every child used once,
  /// children disjoint. Throws ValidationError otherwise.
  Dendrogram(std::size_t leaf_count, std::vector<Merge> merges);

  std::size_t leaf_count() const noexcept { return leaf_count_; }
  const std::vector<Merge>& merges() const noexcept { return merges_; }

  /// All 2p-1 clusters indexed by id.
  const std::vector<Cluster>& clusters() const noexcept { return clusters_; }
  const Cluster& cluster(std::size_t id) const { return clusters_.at(id); }
  std::size_t root_id() const noexcept { return clusters_.size() - 1; }

private:
  std::size_t leaf_count_ = 0;
  std::vector<Merge> merges_;
  std::vector<Cluster> clusters_;
};

/// A laminar family over {0..p-1} that contains the full set.
class HierarchySet {
public:
  HierarchySet() = default;

  /// Sorts members, drops duplicate clusters, and throws ValidationError if
  /// the family is not laminar, a member is out of range, or {0..p-1} is absent.
  HierarchySet(std::size_t leaf_count,
               std::vector<std::vector<std::size_t>> clusters);

  std::size_t leaf_count() const noexcept { return leaf_count_; }

  /// Clusters ordered by decreasing size (ties: by members).
  const std::vector<std::vector<std::size_t>>& clusters() const noexcept {
    return clusters_;
  }

  /// For cluster k, the index of the smallest strictly larger cluster that
  /// contains it, or npos for the root.
  std::size_t parent_of(std::size_t k) const { return parent_.at(k); }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
  std::size_t leaf_count_ = 0;
  std::vector<std::vector<std::size_t>> clusters_;
  std::vector<std::size_t> parent_;
};

/// Mean of S(i,j) over i in a, j in b. Throws ContractViolation if the
/// clusters overlap or either is empty.
double average_linkage(const SimilarityMatrix& s, const Cluster& a,
                       const Cluster& b);

/// Greedy average-linkage clustering. Each step merges the pair of active
/// clusters with the largest average similarity; ties go to the
/// lexicographically smallest (min member of c1, min member of c2).
/// Linkages are maintained with size-weighted updates.
Dendrogram agglomerate(const SimilarityMatrix& s);

/// True iff for every nested pair c' in c of H, every similarity between c'
/// and c\c' is strictly below every similarity inside c'.
bool satisfies_separation(const SimilarityMatrix& s, const HierarchySet& h);

/// True iff every cluster of H is one of the dendrogram's clusters.
bool contains_hierarchy(const Dendrogram& d, const HierarchySet& h);

/// The dendrogram's clusters viewed as a hierarchy set.
HierarchySet to_hierarchy(const Dendrogram& d);

} // namespace hiertect
