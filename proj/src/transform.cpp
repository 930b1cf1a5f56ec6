#include "hiertect/transform.hpp"

#include <algorithm>
#include <cmath>

#include "hiertect/error.hpp"

namespace hiertect {

namespace {

void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ContractViolation(std::string(what) + ": expected length " +
                            std::to_string(want) + ", got " + std::to_string(got));
  }
}

} // namespace

HaarBasis::HaarBasis(Dendrogram dendrogram)
    : size_(dendrogram.leaf_count()), dendrogram_(std::move(dendrogram)) {
  const std::size_t p = size_;
  columns_.reserve(p - 1);
  dense_.assign(p * p, 0.0);
  for (std::size_t k = 0; k + 1 < p; ++k) {
    const Merge& m = dendrogram_.merges()[k];
    const auto& c1 = dendrogram_.cluster(m.left);
    const auto& c2 = dendrogram_.cluster(m.right);
    const double n1 = static_cast<double>(c1.size());
    const double n2 = static_cast<double>(c2.size());
    const double scale = std::sqrt(n1 * n2 / (n1 + n2));
    HaarColumn col{m.left, m.right, -scale / n1, scale / n2};
    double* dst = dense_.data() + k * p;
    for (auto i : c1.members) dst[i] = col.left_weight;
    for (auto i : c2.members) dst[i] = col.right_weight;
    columns_.push_back(col);
  }
  const double constant = 1.0 / std::sqrt(static_cast<double>(p));
  std::fill(dense_.begin() + static_cast<std::ptrdiff_t>((p - 1) * p), dense_.end(),
            constant);
}

std::optional<HaarColumn> HaarBasis::provenance(std::size_t k) const {
  if (k >= size_) throw ContractViolation("provenance: column out of range");
  if (k + 1 == size_) return std::nullopt;
  return columns_[k];
}

CoefficientVector HaarBasis::analyze(std::span<const double> v) const {
  require_length(v.size(), size_, "analyze");
  const std::size_t p = size_;
  std::vector<double> sums(2 * p - 1);
  std::copy(v.begin(), v.end(), sums.begin());
  CoefficientVector out(p);
  for (std::size_t k = 0; k + 1 < p; ++k) {
    const HaarColumn& c = columns_[k];
    out[k] = c.right_weight * sums[c.right] + c.left_weight * sums[c.left];
    sums[p + k] = sums[c.left] + sums[c.right];
  }
  out[p - 1] = sums[2 * p - 2] / std::sqrt(static_cast<double>(p));
  return out;
}

std::vector<double> HaarBasis::synthesize(std::span<const double> coefficients) const {
  require_length(coefficients.size(), size_, "synthesize");
  const std::size_t p = size_;
  std::vector<double> acc(2 * p - 1, 0.0);
  acc[2 * p - 2] = coefficients[p - 1] / std::sqrt(static_cast<double>(p));
  for (std::size_t k = p - 1; k-- > 0;) {
    const HaarColumn& c = columns_[k];
    const double parent = acc[p + k];
    acc[c.left] = parent + coefficients[k] * c.left_weight;
    acc[c.right] = parent + coefficients[k] * c.right_weight;
  }
  acc.resize(p);
  return acc;
}

CoefficientVector HaarBasis::analyze_dense(std::span<const double> v) const {
  require_length(v.size(), size_, "analyze_dense");
  CoefficientVector out(size_);
  for (std::size_t k = 0; k < size_; ++k) {
    const auto col = column(k);
    double dot = 0.0;
    for (std::size_t i = 0; i < size_; ++i) dot += col[i] * v[i];
    out[k] = dot;
  }
  return out;
}

std::vector<double> HaarBasis::synthesize_dense(
    std::span<const double> coefficients) const {
  require_length(coefficients.size(), size_, "synthesize_dense");
  std::vector<double> out(size_, 0.0);
  for (std::size_t k = 0; k < size_; ++k) {
    const auto col = column(k);
    for (std::size_t i = 0; i < size_; ++i) out[i] += coefficients[k] * col[i];
  }
  return out;
}

HaarBasis build_basis(const Dendrogram& d) { return HaarBasis(d); }

CoefficientVector analyze(const HaarBasis& b, std::span<const double> v) {
  return b.analyze(v);
}

std::vector<double> synthesize(const HaarBasis& b, std::span<const double> c) {
  return b.synthesize(c);
}

std::size_t sparsity(std::span<const double> coefficients, double tol) {
  if (tol < 0) throw ContractViolation("sparsity: negative tolerance");
  return static_cast<std::size_t>(std::count_if(
      coefficients.begin(), coefficients.end(),
      [tol](double c) { return std::abs(c) > tol; }));
}

double sparsity_tolerance(std::span<const double> signal) {
  double peak = 0.0;
  for (double v : signal) peak = std::max(peak, std::abs(v));
  return 1e-9 * std::sqrt(static_cast<double>(signal.size())) * peak;
}

} // namespace hiertect
