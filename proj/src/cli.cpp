#include "hiertect/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include "hiertect/covlearn.hpp"
#include "hiertect/error.hpp"
#include "hiertect/parallel.hpp"
#include "hiertect/random.hpp"

namespace hiertect::cli {

namespace {

// Stream tags for draws made directly by the tool.
enum : std::uint64_t { kSampleStream = 6, kOracleStream = 7, kBasisStream = 8 };

std::vector<double> default_mu_grid() {
  std::vector<double> grid;
  for (int k = 6; k <= 20; k += 2) grid.push_back(k / 100.0);
  return grid;
}

} // namespace

void ExperimentConfig::validate() const {
  (void)model.schedule();
  if (!(sigma > 0) || !std::isfinite(sigma)) throw ValidationError("config: sigma must be > 0");
  for (double mu : mu_grid) {
    if (!(mu >= 0) || !std::isfinite(mu)) throw ValidationError("config: mu_grid entries must be >= 0");
  }
  if (!(target_far > 0 && target_far < 1)) {
    throw ValidationError("config: target_far must lie in (0, 1)");
  }
  if (trials < 1) throw ValidationError("config: trials must be >= 1");
  if (calibration_trials < kMinCalibrationTrials) {
    throw ValidationError("config: calibration_trials must be >= " +
                          std::to_string(kMinCalibrationTrials));
  }
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    if (n_grid[k] < 1 || (k > 0 && n_grid[k] <= n_grid[k - 1])) {
      throw ValidationError("config: n_grid must be strictly increasing and >= 1");
    }
  }
  if (detectors.empty()) throw ValidationError("config: detector list is empty");
  for (std::size_t a = 0; a < detectors.size(); ++a) {
    for (std::size_t b = a + 1; b < detectors.size(); ++b) {
      if (detectors[a] == detectors[b]) {
        throw ValidationError("config: detector '" + std::string(to_string(detectors[a])) +
                              "' listed twice");
      }
    }
  }
  if (samples < 1) throw ValidationError("config: samples must be >= 1");
  if (!(tv_tolerance >= 0) || !(cov_tolerance >= 0)) {
    throw ValidationError("config: tolerances must be >= 0");
  }
  if (!std::isfinite(flip_offset)) throw ValidationError("config: flip_offset must be finite");
  if (basis != "true_tree" && basis != "learned") {
    throw ValidationError("config: basis must be 'true_tree' or 'learned'");
  }
  if (basis_snapshots < 2) throw ValidationError("config: basis_snapshots must be >= 2");
}

ExperimentConfig defaults_for(const std::string& command) {
  ExperimentConfig c;
  if (command == "reproduce-fig2" || command == "power" || command == "detect") {
    c.model.degree = 6;
    c.model.depth = 4;
    c.model.beta = 0.75;
    c.model.alpha = 0.5;
    c.model.constrain_root_zero = true;
    c.mu_grid = default_mu_grid();
  } else if (command == "oracle-check") {
    c.model.degree = 2;
    c.model.depth = 2;
    c.samples = 100000;
  } else if (command == "learn") {
    c.model.degree = 4;
    c.model.depth = 2;
    c.n_grid = {25, 50, 100, 200, 400, 800};
  }
  return c;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  if (!j.contains("schema_version")) throw ValidationError("config: missing schema_version");
  static const std::vector<std::string> known = {
      "schema_version", "seed", "model", "sigma", "mu_grid", "target_far",
      "trials", "calibration_trials", "n_grid", "detectors", "samples", "recenter",
      "tv_tolerance", "cov_tolerance", "flip_offset", "basis", "basis_snapshots",
      "output"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError("config: unknown field '" + key + "'");
    }
  }
  try {
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
      throw ValidationError("config: unsupported schema_version " +
                            j.at("schema_version").dump());
    }
    if (j.contains("model")) {
      // Fields absent from the model object keep the command defaults.
      nlohmann::json merged = io::model_to_json(c.model);
      if (j.at("model").contains("alpha") || j.at("model").contains("gamma")) {
        merged.erase("alpha");
        merged.erase("gamma");
        if (!j.at("model").contains("constrain_root_zero")) merged.erase("constrain_root_zero");
      }
      merged.update(j.at("model"));
      c.model = io::model_from_json(merged);
    }
    c.seed = j.value("seed", c.seed);
    c.sigma = j.value("sigma", c.sigma);
    c.mu_grid = j.value("mu_grid", c.mu_grid);
    c.target_far = j.value("target_far", c.target_far);
    c.trials = j.value("trials", c.trials);
    c.calibration_trials = j.value("calibration_trials", c.calibration_trials);
    c.n_grid = j.value("n_grid", c.n_grid);
    if (j.contains("detectors")) {
      c.detectors.clear();
      for (const auto& d : j.at("detectors")) {
        c.detectors.push_back(parse_detector_kind(d.get<std::string>()));
      }
    }
    c.samples = j.value("samples", c.samples);
    c.recenter = j.value("recenter", c.recenter);
    c.tv_tolerance = j.value("tv_tolerance", c.tv_tolerance);
    c.cov_tolerance = j.value("cov_tolerance", c.cov_tolerance);
    c.flip_offset = j.value("flip_offset", c.flip_offset);
    c.basis = j.value("basis", c.basis);
    c.basis_snapshots = j.value("basis_snapshots", c.basis_snapshots);
    c.output = j.value("output", c.output);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json dets = nlohmann::json::array();
  for (auto d : c.detectors) dets.push_back(std::string(to_string(d)));
  return {{"schema_version", kSchemaVersion},
          {"seed", c.seed},
          {"model", io::model_to_json(c.model)},
          {"sigma", c.sigma},
          {"mu_grid", c.mu_grid},
          {"target_far", c.target_far},
          {"trials", c.trials},
          {"calibration_trials", c.calibration_trials},
          {"n_grid", c.n_grid},
          {"detectors", dets},
          {"samples", c.samples},
          {"recenter", c.recenter},
          {"tv_tolerance", c.tv_tolerance},
          {"cov_tolerance", c.cov_tolerance},
          {"flip_offset", c.flip_offset},
          {"basis", c.basis},
          {"basis_snapshots", c.basis_snapshots},
          {"output", c.output}};
}

namespace {

double max_abs_diff(const SimilarityMatrix& a, const SimilarityMatrix& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
  }
  return worst;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) tv += std::abs(a[k] - b[k]);
  return tv / 2;
}

} // namespace

nlohmann::json oracle_report(const ExperimentConfig& c, std::size_t threads) {
  const TreeModel model = c.model.tree();
  if (model.vertex_count() > kMaxEnumerationVertices) {
    throw SizeError("oracle-check: model has " + std::to_string(model.vertex_count()) +
                    " vertices, limit is " + std::to_string(kMaxEnumerationVertices));
  }
  const GammaSchedule schedule = c.model.schedule();
  const bool root0 = c.model.constrain_root_zero;
  const auto enumerated = enumerate_distribution(model, schedule, root0);
  const auto factorized = flip_factorized_distribution(model, schedule, root0);
  const GammaSchedule sampler_schedule =
      c.flip_offset != 0 ? schedule.with_flip_offset(c.flip_offset) : schedule;

  const std::size_t p = model.leaf_count();
  std::vector<std::uint64_t> codes(c.samples);
  parallel_for(c.samples, threads, [&](std::size_t s) {
    Rng rng = derive_stream(c.seed, {kOracleStream, s});
    const auto draw = sample(model, sampler_schedule, root0, rng);
    std::uint64_t code = 0;
    for (std::size_t i = 0; i < p; ++i) code |= static_cast<std::uint64_t>(draw.x[i]) << i;
    codes[s] = code;
  });
  std::vector<double> empirical(enumerated.pattern_count(), 0.0);
  const double n = static_cast<double>(c.samples);
  for (auto code : codes) empirical[code] += 1.0 / n;

  // Plug-in TV of an exact sampler is biased upward by about this much.
  double expected = 0.0;
  for (double q : enumerated.probabilities()) {
    expected += std::sqrt(2 * q * (1 - q) / (M_PI * n));
  }
  expected /= 2;

  const double tv_sampler = total_variation(empirical, enumerated.probabilities());
  const double tv_tables =
      total_variation(factorized.probabilities(), enumerated.probabilities());
  const auto enum_cov = enumerated.covariance();
  double cov_err = max_abs_diff(enum_cov, factorized.covariance());
  nlohmann::json closed_form = nullptr;
  if (!root0 && !schedule.is_constrained()) {
    const double err = max_abs_diff(enum_cov, exact_leaf_covariance(model, schedule));
    closed_form = err;
    cov_err = std::max(cov_err, err);
  }
  const bool pass =
      tv_sampler <= c.tv_tolerance && tv_tables <= 1e-12 && cov_err <= c.cov_tolerance;
  return {{"model", io::model_to_json(c.model)},
          {"vertices", model.vertex_count()},
          {"samples", c.samples},
          {"seed", c.seed},
          {"flip_offset", c.flip_offset},
          {"tv_sampler_vs_enumeration", tv_sampler},
          {"tv_expected_exact_sampler", expected},
          {"tv_tolerance", c.tv_tolerance},
          {"tv_factorization_vs_enumeration", tv_tables},
          {"max_cov_error_closed_form", closed_form},
          {"max_cov_error", cov_err},
          {"cov_tolerance", c.cov_tolerance},
          {"pass", pass}};
}

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::size_t threads = 0;
  std::string in;
  std::string dendrogram;
  std::string format = "csv";
};

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("'" + path + "': " + e.what());
  }
}

std::ifstream open_input(const std::string& path) {
  if (path.empty()) throw ValidationError("--in is required");
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  return in;
}

ExperimentConfig load_config(const std::string& command, const Options& o) {
  ExperimentConfig c = defaults_for(command);
  if (!o.config.empty()) c = config_from_json(read_json_file(o.config), c);
  if (o.seed) c.seed = *o.seed;
  if (!o.out.empty()) c.output = o.out;
  c.validate();
  return c;
}

void emit(const ExperimentConfig& c, std::ostream& out,
          const std::function<void(std::ostream&)>& writer) {
  if (c.output.empty() || c.output == "-") {
    writer(out);
  } else {
    io::write_file_atomic(c.output, writer);
  }
}

void emit_json(const ExperimentConfig& c, std::ostream& out, const nlohmann::json& j) {
  emit(c, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

std::shared_ptr<const HaarBasis> model_basis(const ExperimentConfig& c) {
  const TreeModel model = c.model.tree();
  if (c.basis == "true_tree") {
    return std::make_shared<const HaarBasis>(true_tree_dendrogram(model, c.model.beta));
  }
  // Learned: cluster the recentred empirical covariance of noisy snapshots
  // drawn from the symmetric scaling model.
  const auto schedule = GammaSchedule::scaling(model, c.model.beta);
  const std::size_t p = model.leaf_count();
  const std::size_t n = c.basis_snapshots;
  std::vector<double> data(n * p);
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng = derive_stream(c.seed, {kBasisStream, k});
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto draw = sample(model, schedule, false, rng);
    for (std::size_t i = 0; i < p; ++i) {
      data[k * p + i] = static_cast<double>(draw.x[i]) + c.sigma * gauss(rng);
    }
  }
  const SnapshotSet snapshots(n, p, std::move(data));
  return std::make_shared<const HaarBasis>(agglomerate(empirical_cov(snapshots, 0.5)));
}

std::vector<CalibratedDetector> calibrated_detectors(const ExperimentConfig& c,
                                                     std::size_t p,
                                                     std::shared_ptr<const HaarBasis> basis,
                                                     std::size_t threads) {
  std::vector<CalibratedDetector> out;
  for (auto kind : c.detectors) {
    DetectorSpec spec{kind, kind == DetectorKind::max_transform ? basis : nullptr,
                      c.target_far};
    auto cal = calibrate(spec, p, c.sigma, c.calibration_trials, c.seed, threads);
    out.push_back({std::move(spec), cal});
  }
  return out;
}

void require_mu_grid(const ExperimentConfig& c) {
  if (c.mu_grid.empty()) throw ValidationError("config: mu_grid is empty");
}

void power_header(std::ostream& os, const std::string& title, const ExperimentConfig& c) {
  const TreeModel model = c.model.tree();
  os << "# hiertect " << title << '\n';
  os << "# p=" << model.leaf_count() << " d=" << model.degree() << " L=" << model.depth()
     << " sigma=" << io::format_number(c.sigma)
     << " target_far=" << io::format_number(c.target_far) << " trials=" << c.trials
     << " calibration_trials=" << c.calibration_trials << " seed=" << c.seed << '\n';
}

std::string model_line(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "beta=" << io::format_number(c.model.beta);
  if (c.model.alpha) os << " alpha=" << io::format_number(*c.model.alpha);
  if (!c.model.gamma_overrides.empty()) os << " explicit gamma";
  if (c.basis == "learned") os << " basis=learned(" << c.basis_snapshots << ")";
  os << " root_zero=" << (c.model.constrain_root_zero ? 1 : 0);
  return os.str();
}

int cmd_power(const std::string& command, const Options& o, std::ostream& out) {
  const auto c = load_config(command, o);
  require_mu_grid(c);
  const std::size_t threads = resolve_threads(o.threads);
  const TreeModel model = c.model.tree();
  const GammaSchedule schedule = c.model.schedule();
  const auto dets = calibrated_detectors(c, model.leaf_count(), model_basis(c), threads);
  const auto curve = power_curve(model, schedule, c.model.constrain_root_zero, c.mu_grid,
                                 c.sigma, dets, c.trials, c.seed, threads);
  emit(c, out, [&](std::ostream& os) {
    power_header(os, command, c);
    if (command == "reproduce-fig2") {
      os << "# " << model_line(c)
         << " (beta and alpha are assumed defaults, not published values)\n";
    } else {
      os << "# " << model_line(c) << '\n';
    }
    io::write_power_csv(os, curve);
  });
  return kOk;
}

int cmd_cluster(const Options& o, std::ostream& out) {
  ExperimentConfig c;
  c.output = o.out;
  auto in = open_input(o.in);
  const auto s = io::read_similarity_csv(in);
  emit_json(c, out, io::dendrogram_to_json(agglomerate(s)));
  return kOk;
}

Dendrogram dendrogram_input(const std::string& path) {
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    return io::dendrogram_from_json(read_json_file(path));
  }
  auto in = open_input(path);
  return agglomerate(io::read_similarity_csv(in));
}

int cmd_basis(const Options& o, std::ostream& out) {
  if (o.format != "csv" && o.format != "json") {
    throw ValidationError("--format must be csv or json");
  }
  const auto c = load_config("basis", o);
  const HaarBasis basis = o.in.empty()
                              ? HaarBasis(true_tree_dendrogram(c.model.tree(), c.model.beta))
                              : HaarBasis(dendrogram_input(o.in));
  if (o.format == "json") {
    emit_json(c, out, io::basis_to_json(basis));
  } else {
    emit(c, out, [&](std::ostream& os) { io::write_basis_csv(os, basis); });
  }
  return kOk;
}

int cmd_sample(const Options& o, std::ostream& out) {
  const auto c = load_config("sample", o);
  const std::size_t threads = resolve_threads(o.threads);
  const TreeModel model = c.model.tree();
  const GammaSchedule schedule = c.model.schedule();
  std::vector<PatternSample> draws(c.samples);
  parallel_for(c.samples, threads, [&](std::size_t s) {
    Rng rng = derive_stream(c.seed, {kSampleStream, s});
    draws[s] = sample(model, schedule, c.model.constrain_root_zero, rng);
  });
  emit(c, out, [&](std::ostream& os) { io::write_patterns_csv(os, draws); });
  return kOk;
}

int cmd_detect(const Options& o, std::ostream& out) {
  const auto c = load_config("detect", o);
  const std::size_t threads = resolve_threads(o.threads);
  auto in = open_input(o.in);
  const auto y = io::read_vector_csv(in);
  std::shared_ptr<const HaarBasis> basis;
  if (!o.dendrogram.empty()) {
    basis = std::make_shared<const HaarBasis>(dendrogram_input(o.dendrogram));
  } else if (std::find(c.detectors.begin(), c.detectors.end(), DetectorKind::max_transform) !=
             c.detectors.end()) {
    basis = model_basis(c);
  }
  if (basis && basis->size() != y.size()) {
    throw ValidationError("detect: observation has " + std::to_string(y.size()) +
                          " entries, basis has " + std::to_string(basis->size()));
  }
  const auto dets = calibrated_detectors(c, y.size(), basis, threads);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& d : dets) {
    const double stat = detector_statistic(d.spec, y, c.sigma);
    rows.push_back({{"detector", std::string(to_string(d.spec.kind))},
                    {"statistic", stat},
                    {"threshold", d.calibration.threshold},
                    {"achieved_far", d.calibration.achieved_far},
                    {"detected", stat > d.calibration.threshold}});
  }
  const auto bh = bh_fdr_detect(y, c.sigma, c.target_far);
  emit_json(c, out,
            {{"nodes", y.size()}, {"detectors", rows}, {"bh_rejections", bh.rejections}});
  return kOk;
}

int cmd_learn(const Options& o, std::ostream& out) {
  const auto c = load_config("learn", o);
  if (c.n_grid.empty()) throw ValidationError("config: n_grid is empty");
  const std::size_t threads = resolve_threads(o.threads);
  const TreeModel model = c.model.tree();
  const GammaSchedule schedule = c.model.schedule();
  if (schedule.is_constrained() || c.model.constrain_root_zero) {
    throw ValidationError("learn: needs an unconstrained model");
  }
  const auto tau = similarity_gap(exact_leaf_covariance(model, schedule),
                                  model.subtree_hierarchy()).tau;
  RecoveryOptions opts{c.sigma, c.recenter, c.trials, c.seed, threads};
  const auto rows = recovery_experiment(model, schedule, c.n_grid, opts);
  emit(c, out, [&](std::ostream& os) {
    os << "# hiertect learn p=" << model.leaf_count() << " d=" << model.degree()
       << " L=" << model.depth() << " sigma=" << io::format_number(c.sigma)
       << " recenter=" << (c.recenter ? 1 : 0) << " seed=" << c.seed << '\n';
    os << "# " << model_line(c) << " gap=" << io::format_number(tau) << '\n';
    io::write_recovery_csv(os, rows);
  });
  return kOk;
}

int cmd_oracle(const Options& o, std::ostream& out) {
  const auto c = load_config("oracle-check", o);
  const auto report = oracle_report(c, resolve_threads(o.threads));
  emit_json(c, out, report);
  return report.at("pass").get<bool>() ? kOk : kRuntimeError;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical sparse-pattern detection experiments"};
  app.require_subcommand(1);
  Options o;
  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"cluster", "Average-linkage dendrogram (JSON) from a similarity CSV"},
      {"basis", "Haar basis from a dendrogram JSON, a similarity CSV or the model tree"},
      {"sample", "Draw activation patterns from the tree model"},
      {"detect", "Calibrated detector decisions for one observation vector"},
      {"power", "Power curves over a mu grid"},
      {"learn", "Hierarchy recovery probability over a snapshot-count grid"},
      {"oracle-check", "Compare sampler and closed forms against exhaustive enumeration"},
      {"reproduce-fig2", "Power curves for the p=1296 detection experiment"},
  };
  for (const auto& cmd : commands) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", o.config, "JSON experiment config");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Output path (default stdout)");
    sub->add_option("--threads", o.threads, "Worker threads (default $HIERTECT_THREADS or 1)");
    const std::string name = cmd.name;
    if (name == "cluster" || name == "basis" || name == "detect") {
      sub->add_option("--in", o.in, "Input file");
    }
    if (name == "detect") sub->add_option("--dendrogram", o.dendrogram, "Dendrogram JSON or similarity CSV");
    if (name == "basis") sub->add_option("--format", o.format, "csv or json");
  }

  try {
    // CLI11 consumes arguments from the back; drop the program name.
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  const auto* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    if (name == "cluster") return cmd_cluster(o, out);
    if (name == "basis") return cmd_basis(o, out);
    if (name == "sample") return cmd_sample(o, out);
    if (name == "detect") return cmd_detect(o, out);
    if (name == "power" || name == "reproduce-fig2") return cmd_power(name, o, out);
    if (name == "learn") return cmd_learn(o, out);
    if (name == "oracle-check") return cmd_oracle(o, out);
    err << "error: unknown command '" << name << "'\n";
    return kValidationError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const SizeError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

} // namespace hiertect::cli
