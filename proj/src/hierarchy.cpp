#include "hiertect/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "hiertect/error.hpp"

namespace hiertect {

SimilarityMatrix::SimilarityMatrix(std::size_t size, std::vector<double> row_major)
    : size_(size), entries_(std::move(row_major)) {
  if (entries_.size() != size_ * size_) {
    throw ValidationError("similarity matrix: expected " +
                          std::to_string(size_ * size_) + " entries, got " +
                          std::to_string(entries_.size()));
  }
  for (std::size_t i = 0; i < size_; ++i) {
    for (std::size_t j = 0; j < size_; ++j) {
      if (std::isnan(entries_[i * size_ + j])) {
        throw ValidationError("similarity matrix: NaN at (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
      }
    }
  }
  for (std::size_t i = 0; i < size_; ++i) {
    for (std::size_t j = i + 1; j < size_; ++j) {
      double& a = entries_[i * size_ + j];
      double& b = entries_[j * size_ + i];
      if (a == b) continue;
      const double scale = std::max({1.0, std::abs(a), std::abs(b)});
      if (!(std::abs(a - b) <= 1e-12 * scale)) {
        throw ValidationError("similarity matrix: not symmetric at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      a = b = 0.5 * (a + b);
    }
  }
}

Dendrogram::Dendrogram(std::size_t leaf_count, std::vector<Merge> merges)
    : leaf_count_(leaf_count), merges_(std::move(merges)) {
  if (leaf_count_ == 0) throw ValidationError("dendrogram: no leaves");
  if (merges_.size() != leaf_count_ - 1) {
    throw ValidationError("dendrogram: expected " + std::to_string(leaf_count_ - 1) +
                          " merges, got " + std::to_string(merges_.size()));
  }
  clusters_.reserve(2 * leaf_count_ - 1);
  for (std::size_t i = 0; i < leaf_count_; ++i) clusters_.push_back({i, {i}});
  std::vector<bool> used(2 * leaf_count_ - 1, false);
  for (std::size_t k = 0; k < merges_.size(); ++k) {
    const Merge& m = merges_[k];
    const std::size_t expected = leaf_count_ + k;
    if (m.parent != expected) {
      throw ValidationError("dendrogram: merge " + std::to_string(k) +
                            " has parent id " + std::to_string(m.parent) +
                            ", expected " + std::to_string(expected));
    }
    if (m.left >= expected || m.right >= expected || m.left == m.right) {
      throw ValidationError("dendrogram: merge " + std::to_string(k) +
                            " references invalid children");
    }
    if (used[m.left] || used[m.right]) {
      throw ValidationError("dendrogram: merge " + std::to_string(k) +
                            " reuses an already merged cluster");
    }
    used[m.left] = used[m.right] = true;
    const auto& a = clusters_[m.left].members;
    const auto& b = clusters_[m.right].members;
    Cluster parent{expected, {}};
    parent.members.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(),
               std::back_inserter(parent.members));
    clusters_.push_back(std::move(parent));
  }
}

HierarchySet::HierarchySet(std::size_t leaf_count,
                           std::vector<std::vector<std::size_t>> clusters)
    : leaf_count_(leaf_count) {
  for (auto& c : clusters) {
    if (c.empty()) throw ValidationError("hierarchy: empty cluster");
    std::sort(c.begin(), c.end());
    if (std::adjacent_find(c.begin(), c.end()) != c.end()) {
      throw ValidationError("hierarchy: repeated member in a cluster");
    }
    if (c.back() >= leaf_count_) {
      throw ValidationError("hierarchy: member " + std::to_string(c.back()) +
                            " out of range");
    }
  }
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  clusters.erase(std::unique(clusters.begin(), clusters.end()), clusters.end());
  if (clusters.empty() || clusters.front().size() != leaf_count_) {
    throw ValidationError("hierarchy: the full node set is missing");
  }

  // Laminar iff, processing by decreasing size, every cluster's members share
  // the same current smallest owner.
  std::vector<std::size_t> owner(leaf_count_, npos);
  parent_.assign(clusters.size(), npos);
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const auto& c = clusters[k];
    const std::size_t o = owner[c.front()];
    for (auto m : c) {
      if (owner[m] != o) {
        throw ValidationError("hierarchy: clusters are not laminar");
      }
    }
    parent_[k] = o;
    for (auto m : c) owner[m] = k;
  }
  clusters_ = std::move(clusters);
}

namespace {

bool disjoint_sorted(const std::vector<std::size_t>& a,
                     const std::vector<std::size_t>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return false;
    if (*i < *j) ++i; else ++j;
  }
  return true;
}

} // namespace

double average_linkage(const SimilarityMatrix& s, const Cluster& a,
                       const Cluster& b) {
  if (a.members.empty() || b.members.empty()) {
    throw ContractViolation("average_linkage: empty cluster");
  }
  if (!disjoint_sorted(a.members, b.members)) {
    throw ContractViolation("average_linkage: clusters overlap");
  }
  double total = 0.0;
  for (auto i : a.members) {
    for (auto j : b.members) total += s(i, j);
  }
  return total / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

Dendrogram agglomerate(const SimilarityMatrix& s) {
  const std::size_t p = s.size();
  if (p == 0) throw ValidationError("agglomerate: empty similarity matrix");

  // Active clusters live in the slot of their smallest member, so slot order
  // is exactly the tie-break order.
  std::vector<double> link(s.data().begin(), s.data().end());
  auto at = [&](std::size_t i, std::size_t j) -> double& { return link[i * p + j]; };

  std::vector<std::size_t> slot_id(p), slot_size(p, 1);
  std::vector<bool> active(p, true);
  for (std::size_t i = 0; i < p; ++i) slot_id[i] = i;

  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> best(p, none);
  std::vector<double> best_value(p, -std::numeric_limits<double>::infinity());

  // Best partner j > i: largest linkage, smallest j on ties.
  auto rescan = [&](std::size_t i) {
    best[i] = none;
    best_value[i] = -std::numeric_limits<double>::infinity();
    for (std::size_t j = i + 1; j < p; ++j) {
      if (!active[j]) continue;
      const double v = at(i, j);
      if (best[i] == none || v > best_value[i]) {
        best[i] = j;
        best_value[i] = v;
      }
    }
  };
  for (std::size_t i = 0; i < p; ++i) rescan(i);

  std::vector<Merge> merges;
  merges.reserve(p - 1);
  for (std::size_t step = 0; step + 1 < p; ++step) {
    std::size_t a = none;
    for (std::size_t i = 0; i < p; ++i) {
      if (!active[i] || best[i] == none) continue;
      if (a == none || best_value[i] > best_value[a]) a = i;
    }
    const std::size_t b = best[a];
    merges.push_back({slot_id[a], slot_id[b], p + step, best_value[a]});

    const double wa = static_cast<double>(slot_size[a]);
    const double wb = static_cast<double>(slot_size[b]);
    for (std::size_t k = 0; k < p; ++k) {
      if (!active[k] || k == a || k == b) continue;
      const double v = (wa * at(a, k) + wb * at(b, k)) / (wa + wb);
      at(a, k) = v;
      at(k, a) = v;
    }
    active[b] = false;
    best[b] = none;
    slot_size[a] += slot_size[b];
    slot_id[a] = p + step;

    rescan(a);
    for (std::size_t i = 0; i < b; ++i) {
      if (!active[i] || i == a) continue;
      if (best[i] == a || best[i] == b) {
        rescan(i);
      } else if (i < a) {
        const double v = at(i, a);
        if (best[i] == none || v > best_value[i] ||
            (v == best_value[i] && a < best[i])) {
          best[i] = a;
          best_value[i] = v;
        }
      }
    }
  }
  return Dendrogram(p, std::move(merges));
}

bool satisfies_separation(const SimilarityMatrix& s, const HierarchySet& h) {
  if (s.size() != h.leaf_count()) {
    throw ContractViolation("satisfies_separation: size mismatch");
  }
  const std::size_t p = s.size();
  const auto& clusters = h.clusters();
  std::vector<bool> inside(p);
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    if (h.parent_of(k) == HierarchySet::npos) continue;
    const auto& c = clusters[k];
    if (c.size() < 2) continue; // no within-cluster pair to violate
    // Supersets form a chain up to the root, which holds every other node.
    std::fill(inside.begin(), inside.end(), false);
    for (auto i : c) inside[i] = true;
    double within = std::numeric_limits<double>::infinity();
    double cross = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < c.size(); ++x) {
      const auto i = c[x];
      for (std::size_t y = x + 1; y < c.size(); ++y) within = std::min(within, s(i, c[y]));
      for (std::size_t j = 0; j < p; ++j) {
        if (!inside[j]) cross = std::max(cross, s(i, j));
      }
    }
    if (!(cross < within)) return false;
  }
  return true;
}

bool contains_hierarchy(const Dendrogram& d, const HierarchySet& h) {
  if (d.leaf_count() != h.leaf_count()) {
    throw ContractViolation("contains_hierarchy: leaf count mismatch");
  }
  std::set<std::vector<std::size_t>> present;
  for (const auto& c : d.clusters()) present.insert(c.members);
  return std::all_of(h.clusters().begin(), h.clusters().end(),
                     [&](const auto& c) { return present.contains(c); });
}

HierarchySet to_hierarchy(const Dendrogram& d) {
  std::vector<std::vector<std::size_t>> sets;
  sets.reserve(d.clusters().size());
  for (const auto& c : d.clusters()) sets.push_back(c.members);
  return HierarchySet(d.leaf_count(), std::move(sets));
}

} // namespace hiertect
