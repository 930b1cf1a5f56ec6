#pragma once

// Slow, independent reference implementations used only by the tests.
// Nothing here calls into the library's algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <set>
#include <vector>

namespace oracle {

using Members = std::vector<std::size_t>;

struct NaiveMerge {
  Members left;
  Members right;
  double linkage;
};

inline double mean_cross(const std::vector<double>& s, std::size_t p, const Members& a,
                         const Members& b) {
  double total = 0;
  for (auto i : a) {
    for (auto j : b) total += s[i * p + j];
  }
  return total / static_cast<double>(a.size() * b.size());
}

// Recomputes every linkage from scratch each step. Ties go to the pair that
// is lexicographically smallest by (min member, other min member).
inline std::vector<NaiveMerge> naive_agglomerate(const std::vector<double>& s, std::size_t p) {
  std::vector<Members> active;
  for (std::size_t i = 0; i < p; ++i) active.push_back({i});
  std::vector<NaiveMerge> out;
  while (active.size() > 1) {
    std::sort(active.begin(), active.end(),
              [](const Members& a, const Members& b) { return a.front() < b.front(); });
    std::size_t best_a = 0, best_b = 1;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < active.size(); ++a) {
      for (std::size_t b = a + 1; b < active.size(); ++b) {
        const double v = mean_cross(s, p, active[a], active[b]);
        if (v > best) {
          best = v;
          best_a = a;
          best_b = b;
        }
      }
    }
    Members merged = active[best_a];
    merged.insert(merged.end(), active[best_b].begin(), active[best_b].end());
    std::sort(merged.begin(), merged.end());
    out.push_back({active[best_a], active[best_b], best});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    active[best_a] = merged;
  }
  return out;
}

// Column-major dense basis straight from the defining formula.
inline std::vector<double> dense_haar(const std::vector<NaiveMerge>& merges, std::size_t p) {
  std::vector<double> b(p * p, 0.0);
  for (std::size_t k = 0; k < merges.size(); ++k) {
    const auto& c1 = merges[k].left;
    const auto& c2 = merges[k].right;
    const double n1 = static_cast<double>(c1.size());
    const double n2 = static_cast<double>(c2.size());
    const double scale = std::sqrt(n1 * n2 / (n1 + n2));
    for (auto i : c1) b[k * p + i] = -scale / n1;
    for (auto i : c2) b[k * p + i] = scale / n2;
  }
  for (std::size_t i = 0; i < p; ++i) b[(p - 1) * p + i] = 1.0 / std::sqrt(double(p));
  return b;
}

// Random laminar family over {0..p-1}: recursive splits into 2..4 parts.
inline std::vector<Members> random_laminar(std::size_t p, std::mt19937_64& rng) {
  std::vector<Members> out;
  std::vector<Members> stack;
  Members all(p);
  for (std::size_t i = 0; i < p; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  stack.push_back(all);
  while (!stack.empty()) {
    Members c = stack.back();
    stack.pop_back();
    Members sorted = c;
    std::sort(sorted.begin(), sorted.end());
    out.push_back(sorted);
    if (c.size() == 1) continue;
    std::uniform_int_distribution<std::size_t> parts_dist(2, std::min<std::size_t>(4, c.size()));
    const std::size_t parts = parts_dist(rng);
    // Random cut points keep every part non-empty.
    std::vector<std::size_t> cuts;
    for (std::size_t k = 1; k < c.size(); ++k) cuts.push_back(k);
    std::shuffle(cuts.begin(), cuts.end(), rng);
    cuts.resize(parts - 1);
    std::sort(cuts.begin(), cuts.end());
    std::size_t start = 0;
    for (std::size_t k = 0; k <= cuts.size(); ++k) {
      const std::size_t end = k < cuts.size() ? cuts[k] : c.size();
      stack.push_back(Members(c.begin() + std::ptrdiff_t(start), c.begin() + std::ptrdiff_t(end)));
      start = end;
    }
  }
  return out;
}

// Similarity that grows with the depth of the deepest cluster holding both
// nodes, plus jitter too small to break separation.
inline std::vector<double> laminar_similarity(const std::vector<Members>& clusters,
                                              std::size_t p, std::mt19937_64& rng) {
  std::vector<std::size_t> depth_of(clusters.size(), 0);
  // Depth = number of strict supersets.
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    for (std::size_t b = 0; b < clusters.size(); ++b) {
      if (clusters[b].size() > clusters[a].size() &&
          std::includes(clusters[b].begin(), clusters[b].end(), clusters[a].begin(),
                        clusters[a].end())) {
        ++depth_of[a];
      }
    }
  }
  std::vector<double> s(p * p, 0.0);
  std::vector<std::size_t> best(p * p, 0);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (auto i : clusters[c]) {
      for (auto j : clusters[c]) best[i * p + j] = std::max(best[i * p + j], depth_of[c]);
    }
  }
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i + 1; j < p; ++j) {
      s[i * p + j] = s[j * p + i] = static_cast<double>(best[i * p + j]) + jitter(rng);
    }
    s[i * p + i] = 100.0;
  }
  return s;
}

// Leaf pattern probabilities of the tree Ising model by summing edge
// weights over all 2^|V| vertex configurations. gamma[l-1] for level l.
inline std::vector<double> brute_leaf_distribution(std::size_t d, std::size_t depth,
                                                   const std::vector<double>& gamma,
                                                   bool root_zero) {
  std::vector<std::size_t> start{0};
  std::size_t width = 1, total = 1;
  for (std::size_t l = 1; l <= depth; ++l) {
    start.push_back(total);
    width *= d;
    total += width;
  }
  const std::size_t leaves = width;
  std::vector<double> probs(std::size_t{1} << leaves, 0.0);
  for (std::uint64_t z = 0; z < (std::uint64_t{1} << total); ++z) {
    if (root_zero && (z & 1)) continue;
    double w = 1.0;
    for (std::size_t l = 1; l <= depth && w > 0; ++l) {
      const std::size_t count = start.size() > l + 1 ? start[l + 1] - start[l] : total - start[l];
      for (std::size_t pos = 0; pos < count; ++pos) {
        const auto child = (z >> (start[l] + pos)) & 1;
        const auto parent = (z >> (start[l - 1] + pos / d)) & 1;
        if (child == parent) {
          if (std::isfinite(gamma[l - 1])) w *= std::exp(gamma[l - 1]);
        } else if (!std::isfinite(gamma[l - 1])) {
          w = 0;
          break;
        }
      }
    }
    std::uint64_t leaf_bits = 0;
    for (std::size_t i = 0; i < leaves; ++i) leaf_bits |= ((z >> (start[depth] + i)) & 1) << i;
    probs[leaf_bits] += w;
  }
  double norm = 0;
  for (double v : probs) norm += v;
  for (double& v : probs) v /= norm;
  return probs;
}

inline std::vector<double> table_covariance(const std::vector<double>& probs, std::size_t p) {
  std::vector<double> cov(p * p, 0.0);
  std::vector<double> mean(p, 0.0);
  for (std::uint64_t x = 0; x < probs.size(); ++x) {
    for (std::size_t i = 0; i < p; ++i) {
      if (!((x >> i) & 1)) continue;
      mean[i] += probs[x];
      for (std::size_t j = 0; j < p; ++j) {
        if ((x >> j) & 1) cov[i * p + j] += probs[x];
      }
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) cov[i * p + j] -= mean[i] * mean[j];
  }
  return cov;
}

// Subtree leaf blocks of a d-ary tree of the given depth.
inline std::set<Members> subtree_blocks(std::size_t d, std::size_t depth) {
  std::set<Members> out;
  std::size_t p = 1;
  for (std::size_t l = 0; l < depth; ++l) p *= d;
  for (std::size_t size = 1; size <= p; size *= d) {
    for (std::size_t start = 0; start < p; start += size) {
      Members m(size);
      for (std::size_t k = 0; k < size; ++k) m[k] = start + k;
      out.insert(m);
    }
  }
  return out;
}

} // namespace oracle
