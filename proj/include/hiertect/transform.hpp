#pragma once

// Orthonormal unbalanced Haar basis adapted to a dendrogram.
//
// Column k < p-1 comes from merge k of (c1, c2):
//   b = sqrt(|c1||c2| / (|c1|+|c2|)) * (1_{c2}/|c2| - 1_{c1}/|c1|)
// and the last column is the constant vector 1/sqrt(p).

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hiertect/hierarchy.hpp"

namespace hiertect {

using CoefficientVector = std::vector<double>;

/// Sparse description of one difference column.
struct HaarColumn {
  std::size_t left = 0;    // c1 cluster id
  std::size_t right = 0;   // c2 cluster id
  double left_weight = 0;  // value on c1 members (negative)
  double right_weight = 0; // value on c2 members (positive)
};

class HaarBasis {
public:
  explicit HaarBasis(Dendrogram dendrogram);

  std::size_t size() const noexcept { return size_; }
  const Dendrogram& dendrogram() const noexcept { return dendrogram_; }

  /// Dense column k (length p).
  std::span<const double> column(std::size_t k) const {
    return {dense_.data() + k * size_, size_};
  }

  /// Merge that produced column k; empty for the constant column.
  std::optional<HaarColumn> provenance(std::size_t k) const;

  /// B^T v through the merge tree, O(p).
  CoefficientVector analyze(std::span<const double> v) const;
  /// B c through the merge tree, O(p).
  std::vector<double> synthesize(std::span<const double> coefficients) const;

  /// Same products by dense column dot products, O(p^2).
  CoefficientVector analyze_dense(std::span<const double> v) const;
  std::vector<double> synthesize_dense(std::span<const double> coefficients) const;

private:
  std::size_t size_ = 0;
  Dendrogram dendrogram_;
  std::vector<HaarColumn> columns_; // p-1 difference columns
  std::vector<double> dense_;       // column-major p*p
};

/// Convenience: build_basis(agglomerate-output).
HaarBasis build_basis(const Dendrogram& d);

CoefficientVector analyze(const HaarBasis& b, std::span<const double> v);
std::vector<double> synthesize(const HaarBasis& b, std::span<const double> c);

/// Number of entries with |value| > tol.
std::size_t sparsity(std::span<const double> coefficients, double tol);

/// Numerical-zero tolerance for coefficients of `signal`:
/// 1e-9 * sqrt(p) * max|signal|.
double sparsity_tolerance(std::span<const double> signal);

} // namespace hiertect
