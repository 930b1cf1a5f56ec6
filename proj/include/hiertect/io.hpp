#pragma once

// File formats: CSV for matrices, vectors and result tables; JSON for
// dendrograms, sparse bases and model specs. Numbers are written in the
// shortest decimal form that round-trips.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hiertect/covlearn.hpp"
#include "hiertect/detect.hpp"
#include "hiertect/hierarchy.hpp"
#include "hiertect/ising.hpp"
#include "hiertect/transform.hpp"

namespace hiertect::io {

/// Shortest round-trip decimal representation.
std::string format_number(double v);

/// Numeric CSV rows. Blank lines and lines starting with '#' are skipped;
/// a first row containing a non-numeric field is treated as a header.
/// Throws ValidationError naming the row/column of a bad field.
std::vector<std::vector<double>> read_numeric_csv(std::istream& in);

/// Square similarity matrix. An optional first row holding the single
/// value p is accepted. Non-square input is rejected with the row number.
SimilarityMatrix read_similarity_csv(std::istream& in);
void write_similarity_csv(std::ostream& out, const SimilarityMatrix& s);

std::vector<double> read_vector_csv(std::istream& in);

/// One snapshot per row, one node per column.
SnapshotSet read_snapshot_csv(std::istream& in);

nlohmann::json dendrogram_to_json(const Dendrogram& d);
Dendrogram dendrogram_from_json(const nlohmann::json& j);

/// Dense basis, one row per node, one column per basis vector.
void write_basis_csv(std::ostream& out, const HaarBasis& b);
/// Sparse per-column support and weights.
nlohmann::json basis_to_json(const HaarBasis& b);

struct ModelSpec {
  std::size_t degree = 6;
  std::size_t depth = 4;
  double beta = 0.75;
  std::optional<double> alpha; // present -> constrained schedule
  std::vector<double> gamma_overrides; // explicit gamma_l for l = 1..L
  bool constrain_root_zero = false;

  TreeModel tree() const;
  GammaSchedule schedule() const;
};

ModelSpec model_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const ModelSpec& m);

void write_patterns_csv(std::ostream& out, const std::vector<PatternSample>& samples);

void write_power_csv(std::ostream& out, const PowerCurve& curve);
void write_recovery_csv(std::ostream& out, const std::vector<RecoveryRow>& rows);

/// Writes to `path` through a temporary sibling and a rename, so a failed
/// writer leaves no partial file behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

} // namespace hiertect::io
