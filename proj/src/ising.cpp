#include "hiertect/ising.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hiertect/error.hpp"

namespace hiertect {

TreeModel::TreeModel(std::size_t degree, std::size_t depth)
    : degree_(degree), depth_(depth) {
  if (degree_ < 2) throw ValidationError("tree model: degree must be >= 2");
  if (depth_ < 1) throw ValidationError("tree model: depth must be >= 1");
  constexpr std::size_t kMaxVertices = std::size_t{1} << 27;
  std::size_t width = 1;
  for (std::size_t level = 0; level <= depth_; ++level) {
    level_offset_.push_back(vertex_count_);
    level_size_.push_back(width);
    vertex_count_ += width;
    if (vertex_count_ > kMaxVertices) {
      throw ValidationError("tree model: more than 2^27 vertices");
    }
    if (level < depth_) width *= degree_;
  }
}

std::size_t TreeModel::level_of(std::size_t vertex) const {
  if (vertex >= vertex_count_) throw ContractViolation("level_of: bad vertex");
  const auto it = std::upper_bound(level_offset_.begin(), level_offset_.end(), vertex);
  return static_cast<std::size_t>(it - level_offset_.begin()) - 1;
}

std::size_t TreeModel::parent(std::size_t vertex) const {
  const std::size_t level = level_of(vertex);
  if (level == 0) throw ContractViolation("parent: the root has no parent");
  const std::size_t pos = vertex - level_offset_[level];
  return level_offset_[level - 1] + pos / degree_;
}

std::size_t TreeModel::meeting_level(std::size_t a, std::size_t b) const {
  std::size_t level = depth_;
  while (a != b) {
    a /= degree_;
    b /= degree_;
    --level;
  }
  return level;
}

HierarchySet TreeModel::subtree_hierarchy() const {
  std::vector<std::vector<std::size_t>> sets;
  std::size_t span = leaf_count();
  for (std::size_t level = 0; level <= depth_; ++level) {
    for (std::size_t pos = 0; pos < level_size_[level]; ++pos) {
      std::vector<std::size_t> members(span);
      for (std::size_t k = 0; k < span; ++k) members[k] = pos * span + k;
      sets.push_back(std::move(members));
    }
    span /= degree_;
  }
  return HierarchySet(leaf_count(), std::move(sets));
}

double flip_prob(double gamma) {
  if (std::isnan(gamma) || gamma <= 0) {
    throw ValidationError("flip_prob: interaction strength must be > 0");
  }
  if (std::isinf(gamma)) return 0.0;
  // 1/(1+e^g) written to stay accurate for large g.
  return std::exp(-gamma) / (1.0 + std::exp(-gamma));
}

void GammaSchedule::set_level(std::size_t index, double gamma) {
  flip_[index] = flip_prob(gamma);
  gamma_[index] = gamma;
}

GammaSchedule GammaSchedule::scaling(const TreeModel& model, double beta) {
  if (!(beta > 0 && beta <= 1)) throw ValidationError("schedule: beta must lie in (0, 1]");
  GammaSchedule g;
  const std::size_t depth = model.depth();
  g.gamma_.resize(depth);
  g.flip_.resize(depth);
  const double log_d = std::log(static_cast<double>(model.degree()));
  for (std::size_t level = 1; level <= depth; ++level) {
    g.set_level(level - 1, static_cast<double>(level) * beta * log_d);
  }
  g.beta_ = beta;
  return g;
}

GammaSchedule GammaSchedule::constrained(const TreeModel& model, double beta,
                                         double alpha) {
  if (!(alpha > 0 && alpha < beta)) {
    throw ValidationError("schedule: alpha must lie in (0, beta)");
  }
  GammaSchedule g = scaling(model, beta);
  const double ratio = alpha * static_cast<double>(model.depth()) / beta;
  const auto cutoff = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  for (std::size_t level = 1; level < cutoff && level <= model.depth(); ++level) {
    g.set_level(level - 1, std::numeric_limits<double>::infinity());
  }
  g.alpha_ = alpha;
  g.cutoff_ = cutoff;
  return g;
}

GammaSchedule GammaSchedule::explicit_levels(const TreeModel& model,
                                             std::vector<double> gammas) {
  if (gammas.size() != model.depth()) {
    throw ValidationError("schedule: expected " + std::to_string(model.depth()) +
                          " per-level values, got " + std::to_string(gammas.size()));
  }
  GammaSchedule g;
  g.gamma_.resize(gammas.size());
  g.flip_.resize(gammas.size());
  for (std::size_t k = 0; k < gammas.size(); ++k) g.set_level(k, gammas[k]);
  return g;
}

GammaSchedule GammaSchedule::with_flip_offset(double delta) const {
  GammaSchedule g = *this;
  for (auto& q : g.flip_) q = std::clamp(q + delta, 0.0, 1.0);
  return g;
}

PatternSample sample(const TreeModel& model, const GammaSchedule& schedule,
                     bool constrain_root_zero, Rng& rng) {
  if (schedule.depth() != model.depth()) {
    throw ContractViolation("sample: schedule depth does not match the tree");
  }
  const std::size_t depth = model.depth();
  const std::size_t d = model.degree();
  PatternSample out;
  out.z.assign(model.vertex_count(), 0);
  out.flips.assign(depth + 1, 0);
  out.active.assign(depth + 1, 0);
  out.root_value = constrain_root_zero ? 0 : (uniform01(rng) < 0.5 ? 1 : 0);
  out.z[0] = out.root_value;
  out.active[0] = out.root_value;
  for (std::size_t level = 1; level <= depth; ++level) {
    const double q = schedule.flip(level);
    const std::size_t begin = model.level_offset(level);
    const std::size_t parent_begin = model.level_offset(level - 1);
    const std::size_t count = model.level_size(level);
    std::size_t flips = 0;
    std::size_t active = 0;
    for (std::size_t pos = 0; pos < count; ++pos) {
      const std::uint8_t parent = out.z[parent_begin + pos / d];
      const bool flip = q > 0 && uniform01(rng) < q;
      const std::uint8_t value = flip ? static_cast<std::uint8_t>(1 - parent) : parent;
      out.z[begin + pos] = value;
      flips += flip;
      active += value;
    }
    out.flips[level] = flips;
    out.active[level] = active;
  }
  const std::size_t leaf_begin = model.level_offset(depth);
  out.x.assign(out.z.begin() + static_cast<std::ptrdiff_t>(leaf_begin), out.z.end());
  return out;
}

LeafDistribution::LeafDistribution(std::size_t leaf_count,
                                   std::vector<double> probabilities)
    : leaf_count_(leaf_count), prob_(std::move(probabilities)) {
  if (leaf_count_ >= 63 || prob_.size() != (std::uint64_t{1} << leaf_count_)) {
    throw ValidationError("leaf distribution: table size does not match 2^p");
  }
}

SimilarityMatrix LeafDistribution::covariance() const {
  const std::size_t p = leaf_count_;
  std::vector<double> mean(p, 0.0);
  std::vector<double> second(p * p, 0.0);
  std::vector<std::size_t> on;
  on.reserve(p);
  for (std::uint64_t pattern = 0; pattern < prob_.size(); ++pattern) {
    const double w = prob_[pattern];
    if (w == 0.0) continue;
    on.clear();
    for (std::size_t i = 0; i < p; ++i) {
      if ((pattern >> i) & 1U) on.push_back(i);
    }
    for (auto i : on) {
      mean[i] += w;
      for (auto j : on) second[i * p + j] += w;
    }
  }
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) second[i * p + j] -= mean[i] * mean[j];
  }
  return SimilarityMatrix(p, std::move(second));
}

namespace {

void require_enumerable(const TreeModel& model, const GammaSchedule& schedule) {
  if (model.vertex_count() > kMaxEnumerationVertices) {
    throw SizeError("enumeration: tree has " + std::to_string(model.vertex_count()) +
                    " vertices, limit is " + std::to_string(kMaxEnumerationVertices));
  }
  if (schedule.depth() != model.depth()) {
    throw ContractViolation("enumeration: schedule depth does not match the tree");
  }
}

struct VertexTables {
  std::vector<std::size_t> parent; // per vertex, root unused
  std::vector<std::size_t> level;
};

VertexTables vertex_tables(const TreeModel& model) {
  VertexTables t;
  t.parent.assign(model.vertex_count(), 0);
  t.level.assign(model.vertex_count(), 0);
  for (std::size_t v = 1; v < model.vertex_count(); ++v) {
    t.parent[v] = model.parent(v);
    t.level[v] = model.level_of(v);
  }
  return t;
}

std::uint64_t leaf_pattern(const TreeModel& model, std::uint64_t config) {
  return config >> model.level_offset(model.depth());
}

} // namespace

LeafDistribution enumerate_distribution(const TreeModel& model,
                                        const GammaSchedule& schedule,
                                        bool constrain_root_zero) {
  require_enumerable(model, schedule);
  const auto t = vertex_tables(model);
  const std::size_t vertices = model.vertex_count();

  // Hamiltonian sum_l gamma_l * #agreeing edges at level l; infinite levels
  // act as hard agreement constraints. Shift by the all-agree energy.
  double shift = 0.0;
  for (std::size_t level = 1; level <= model.depth(); ++level) {
    const double g = schedule.gamma(level);
    if (std::isfinite(g)) shift += g * static_cast<double>(model.edge_count(level));
  }

  std::vector<double> table(std::uint64_t{1} << model.leaf_count(), 0.0);
  double total = 0.0;
  const std::uint64_t configs = std::uint64_t{1} << vertices;
  for (std::uint64_t z = 0; z < configs; ++z) {
    if (constrain_root_zero && (z & 1U)) continue;
    double energy = 0.0;
    bool allowed = true;
    for (std::size_t v = 1; v < vertices; ++v) {
      const bool agree = ((z >> v) & 1U) == ((z >> t.parent[v]) & 1U);
      const double g = schedule.gamma(t.level[v]);
      if (std::isinf(g)) {
        if (!agree) { allowed = false; break; }
      } else if (agree) {
        energy += g;
      }
    }
    if (!allowed) continue;
    const double w = std::exp(energy - shift);
    table[leaf_pattern(model, z)] += w;
    total += w;
  }
  for (auto& w : table) w /= total;
  return LeafDistribution(model.leaf_count(), std::move(table));
}

LeafDistribution flip_factorized_distribution(const TreeModel& model,
                                              const GammaSchedule& schedule,
                                              bool constrain_root_zero) {
  require_enumerable(model, schedule);
  const auto t = vertex_tables(model);
  const std::size_t vertices = model.vertex_count();
  std::vector<double> table(std::uint64_t{1} << model.leaf_count(), 0.0);
  const std::uint64_t configs = std::uint64_t{1} << vertices;
  for (std::uint64_t z = 0; z < configs; ++z) {
    double w = constrain_root_zero ? ((z & 1U) ? 0.0 : 1.0) : 0.5;
    for (std::size_t v = 1; v < vertices && w != 0.0; ++v) {
      const bool agree = ((z >> v) & 1U) == ((z >> t.parent[v]) & 1U);
      const double q = schedule.flip(t.level[v]);
      w *= agree ? 1.0 - q : q;
    }
    if (w != 0.0) table[leaf_pattern(model, z)] += w;
  }
  return LeafDistribution(model.leaf_count(), std::move(table));
}

SimilarityMatrix exact_leaf_covariance(const TreeModel& model,
                                       const GammaSchedule& schedule) {
  if (schedule.is_constrained()) {
    throw ValidationError(
        "exact_leaf_covariance: needs the unconstrained model (uniform root)");
  }
  if (schedule.depth() != model.depth()) {
    throw ContractViolation("exact_leaf_covariance: schedule depth mismatch");
  }
  const std::size_t depth = model.depth();
  // by_meeting[m]: covariance of two leaves whose subtrees meet at level m.
  // Each path edge at level l contributes corr(child, parent) = 1 - 2 q_l,
  // and the path crosses every level below m twice.
  std::vector<double> by_meeting(depth + 1);
  by_meeting[depth] = 0.25;
  for (std::size_t m = depth; m-- > 0;) {
    const double edge = 1.0 - 2.0 * schedule.flip(m + 1);
    by_meeting[m] = by_meeting[m + 1] * edge * edge;
  }
  const std::size_t p = model.leaf_count();
  std::vector<double> cov(p * p);
  for (std::size_t i = 0; i < p; ++i) {
    cov[i * p + i] = 0.25;
    for (std::size_t j = i + 1; j < p; ++j) {
      const double v = by_meeting[model.meeting_level(i, j)];
      cov[i * p + j] = v;
      cov[j * p + i] = v;
    }
  }
  return SimilarityMatrix(p, std::move(cov));
}

double thm1_transform_bound(const TreeModel& model, const GammaSchedule& schedule) {
  if (!schedule.beta()) throw ValidationError("transform bound: schedule has no beta");
  const double d = static_cast<double>(model.degree());
  const double depth = static_cast<double>(model.depth());
  const double p = static_cast<double>(model.leaf_count());
  return 3.0 * d * depth * depth * std::pow(p, 1.0 - *schedule.beta());
}

CanonicalBounds thm2_canonical_bounds(const TreeModel& model,
                                      const GammaSchedule& schedule, double c_low,
                                      double c_high) {
  if (!schedule.alpha()) {
    throw ValidationError("canonical bounds: needs a constrained schedule");
  }
  const double p = static_cast<double>(model.leaf_count());
  const double scale = std::pow(p, 1.0 - *schedule.alpha());
  return {c_low * scale, c_high * static_cast<double>(model.depth()) * scale};
}

Dendrogram true_tree_dendrogram(const TreeModel& model, double beta) {
  return agglomerate(exact_leaf_covariance(model, GammaSchedule::scaling(model, beta)));
}

} // namespace hiertect
