#include "hiertect/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string_view>
#include <system_error>

#include <unistd.h>

#include "hiertect/error.hpp"

namespace hiertect::io {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) return "0"; // folds -0 as well
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct Row {
  std::size_t line;
  std::vector<double> values;
};

std::vector<Row> read_rows(std::istream& in) {
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      fields.push_back(body.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    Row row{line_no, {}};
    bool header = false;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = parse_number(fields[c]);
      if (!v) {
        if (first) {
          header = true;
          break;
        }
        throw ValidationError("csv: row " + std::to_string(line_no) + ", column " +
                              std::to_string(c + 1) + ": '" + std::string(trim(fields[c])) +
                              "' is not a number");
      }
      row.values.push_back(*v);
    }
    first = false;
    if (!header) rows.push_back(std::move(row));
  }
  if (in.bad()) throw std::runtime_error("csv: read failure");
  return rows;
}

} // namespace

std::vector<std::vector<double>> read_numeric_csv(std::istream& in) {
  auto rows = read_rows(in);
  std::vector<std::vector<double>> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(r.values));
  return out;
}

SimilarityMatrix read_similarity_csv(std::istream& in) {
  auto rows = read_rows(in);
  if (rows.empty()) throw ValidationError("similarity csv: no data rows");
  if (rows.size() > 1 && rows.front().values.size() == 1) {
    const double declared = rows.front().values.front();
    if (declared == static_cast<double>(rows.size() - 1)) rows.erase(rows.begin());
  }
  const std::size_t p = rows.size();
  std::vector<double> entries;
  entries.reserve(p * p);
  for (const auto& r : rows) {
    if (r.values.size() != p) {
      throw ValidationError("similarity csv: row " + std::to_string(r.line) + " has " +
                            std::to_string(r.values.size()) + " fields, expected " +
                            std::to_string(p) + " (matrix must be square)");
    }
    for (double v : r.values) {
      if (!std::isfinite(v)) {
        throw ValidationError("similarity csv: row " + std::to_string(r.line) +
                              " holds a non-finite value");
      }
    }
    entries.insert(entries.end(), r.values.begin(), r.values.end());
  }
  return SimilarityMatrix(p, std::move(entries));
}

void write_similarity_csv(std::ostream& out, const SimilarityMatrix& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j) out << ',';
      out << format_number(s(i, j));
    }
    out << '\n';
  }
}

std::vector<double> read_vector_csv(std::istream& in) {
  const auto rows = read_rows(in);
  if (rows.empty()) throw ValidationError("vector csv: no data");
  std::vector<double> out;
  if (rows.size() == 1) return rows.front().values;
  for (const auto& r : rows) {
    if (r.values.size() != 1) {
      throw ValidationError("vector csv: row " + std::to_string(r.line) +
                            " must hold a single value");
    }
    out.push_back(r.values.front());
  }
  return out;
}

SnapshotSet read_snapshot_csv(std::istream& in) {
  const auto rows = read_rows(in);
  if (rows.empty()) throw ValidationError("snapshot csv: no data rows");
  const std::size_t p = rows.front().values.size();
  std::vector<double> data;
  data.reserve(rows.size() * p);
  for (const auto& r : rows) {
    if (r.values.size() != p) {
      throw ValidationError("snapshot csv: row " + std::to_string(r.line) + " has " +
                            std::to_string(r.values.size()) + " fields, expected " +
                            std::to_string(p));
    }
    data.insert(data.end(), r.values.begin(), r.values.end());
  }
  return SnapshotSet(rows.size(), p, std::move(data));
}

nlohmann::json dendrogram_to_json(const Dendrogram& d) {
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& m : d.merges()) {
    merges.push_back({{"left", m.left},
                      {"right", m.right},
                      {"parent", m.parent},
                      {"linkage", m.linkage},
                      {"members", d.cluster(m.parent).members}});
  }
  return {{"schema_version", 1}, {"leaf_count", d.leaf_count()}, {"merges", merges}};
}

Dendrogram dendrogram_from_json(const nlohmann::json& j) {
  try {
    const auto p = j.at("leaf_count").get<std::size_t>();
    std::vector<Merge> merges;
    for (const auto& m : j.at("merges")) {
      merges.push_back({m.at("left").get<std::size_t>(), m.at("right").get<std::size_t>(),
                        m.at("parent").get<std::size_t>(),
                        m.value("linkage", 0.0)});
    }
    return Dendrogram(p, std::move(merges));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("dendrogram json: ") + e.what());
  }
}

void write_basis_csv(std::ostream& out, const HaarBasis& b) {
  const std::size_t p = b.size();
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      if (k) out << ',';
      out << format_number(b.column(k)[i]);
    }
    out << '\n';
  }
}

nlohmann::json basis_to_json(const HaarBasis& b) {
  const std::size_t p = b.size();
  nlohmann::json columns = nlohmann::json::array();
  for (std::size_t k = 0; k < p; ++k) {
    const auto col = b.column(k);
    std::vector<std::size_t> support;
    std::vector<double> weights;
    for (std::size_t i = 0; i < p; ++i) {
      if (col[i] != 0) {
        support.push_back(i);
        weights.push_back(col[i]);
      }
    }
    nlohmann::json entry = {{"index", k}, {"support", support}, {"weights", weights}};
    if (const auto prov = b.provenance(k)) {
      entry["left"] = prov->left;
      entry["right"] = prov->right;
    } else {
      entry["constant"] = true;
    }
    columns.push_back(std::move(entry));
  }
  return {{"schema_version", 1}, {"size", p}, {"columns", columns}};
}

TreeModel ModelSpec::tree() const { return TreeModel(degree, depth); }

GammaSchedule ModelSpec::schedule() const {
  const TreeModel model = tree();
  if (!gamma_overrides.empty()) {
    if (alpha) throw ValidationError("model: give either alpha or explicit gammas, not both");
    return GammaSchedule::explicit_levels(model, gamma_overrides);
  }
  if (alpha) return GammaSchedule::constrained(model, beta, *alpha);
  return GammaSchedule::scaling(model, beta);
}

namespace {

double json_gamma(const nlohmann::json& g) {
  if (g.is_string()) {
    const auto s = g.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw ValidationError("model: gamma entry '" + s + "' is not a number");
  }
  return g.get<double>();
}

} // namespace

ModelSpec model_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("model: expected a JSON object");
  static const std::vector<std::string> known = {"degree", "depth", "beta", "alpha",
                                                 "gamma", "constrain_root_zero"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError("model: unknown field '" + key + "'");
    }
  }
  ModelSpec m;
  try {
    m.degree = j.value("degree", m.degree);
    m.depth = j.value("depth", m.depth);
    m.beta = j.value("beta", m.beta);
    if (j.contains("alpha") && !j.at("alpha").is_null()) m.alpha = j.at("alpha").get<double>();
    if (j.contains("gamma")) {
      for (const auto& g : j.at("gamma")) m.gamma_overrides.push_back(json_gamma(g));
    }
    m.constrain_root_zero = j.value("constrain_root_zero", m.alpha.has_value());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
  // Surface schedule errors now rather than mid-run.
  (void)m.schedule();
  return m;
}

nlohmann::json model_to_json(const ModelSpec& m) {
  nlohmann::json j = {{"degree", m.degree},
                      {"depth", m.depth},
                      {"beta", m.beta},
                      {"constrain_root_zero", m.constrain_root_zero}};
  if (m.alpha) j["alpha"] = *m.alpha;
  if (!m.gamma_overrides.empty()) {
    nlohmann::json g = nlohmann::json::array();
    for (double v : m.gamma_overrides) {
      if (std::isinf(v)) g.push_back("inf"); else g.push_back(v);
    }
    j["gamma"] = g;
  }
  return j;
}

void write_patterns_csv(std::ostream& out, const std::vector<PatternSample>& samples) {
  if (samples.empty()) return;
  const std::size_t p = samples.front().x.size();
  out << "sample,active";
  for (std::size_t i = 0; i < p; ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const auto& x = samples[s].x;
    out << s << ',' << samples[s].active_leaves();
    for (auto v : x) out << ',' << static_cast<int>(v);
    out << '\n';
  }
}

void write_power_csv(std::ostream& out, const PowerCurve& curve) {
  out << "detector,mu,power,stderr,trials,threshold\n";
  for (const auto& r : curve.rows) {
    out << to_string(r.kind) << ',' << format_number(r.mu) << ','
        << format_number(r.power) << ',' << format_number(r.std_error) << ','
        << r.trials << ',' << format_number(r.threshold) << '\n';
  }
}

void write_recovery_csv(std::ostream& out, const std::vector<RecoveryRow>& rows) {
  out << "p,n,trials,successes,recovery_prob,stderr\n";
  for (const auto& r : rows) {
    out << r.p << ',' << r.n << ',' << r.trials << ',' << r.successes << ','
        << format_number(r.probability) << ',' << format_number(r.std_error) << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const fs::path tmp =
      dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
      writer(out);
      out.flush();
      if (!out) throw std::runtime_error("write failed for " + path.string());
    }
    fs::rename(tmp, path);
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
}

} // namespace hiertect::io
