#include "hiertect/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hiertect/error.hpp"
#include "hiertect/parallel.hpp"

namespace hiertect {

void NoiseModel::validate() const {
  if (!(mu >= 0) || !std::isfinite(mu)) throw ValidationError("noise model: mu must be >= 0");
  if (!(sigma > 0) || !std::isfinite(sigma)) throw ValidationError("noise model: sigma must be > 0");
}

std::vector<double> observe(std::span<const std::uint8_t> x, const NoiseModel& noise,
                            Rng& rng) {
  noise.validate();
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = noise.mu * static_cast<double>(x[i]) + noise.sigma * gauss(rng);
  }
  return y;
}

double stat_max_transform(std::span<const double> y, const HaarBasis& basis) {
  const auto coefficients = basis.analyze(y);
  double best = 0.0;
  for (double c : coefficients) best = std::max(best, std::abs(c));
  return best;
}

double stat_max_canonical(std::span<const double> y) {
  double best = 0.0;
  for (double v : y) best = std::max(best, std::abs(v));
  return best;
}

double stat_global_aggregate(std::span<const double> y) {
  if (y.empty()) throw ContractViolation("global aggregate: empty observation");
  const double total = std::accumulate(y.begin(), y.end(), 0.0);
  return total / std::sqrt(static_cast<double>(y.size()));
}

namespace {

std::vector<double> two_sided_p_values(std::span<const double> y, double sigma) {
  if (!(sigma > 0)) throw ValidationError("p-values: sigma must be > 0");
  std::vector<double> pv(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    pv[i] = std::erfc(std::abs(y[i]) / (sigma * std::sqrt(2.0)));
  }
  return pv;
}

} // namespace

BhResult bh_fdr_detect(std::span<const double> y, double sigma, double level) {
  if (!(level > 0 && level < 1)) throw ValidationError("BH: level must lie in (0, 1)");
  const auto pv = two_sided_p_values(y, sigma);
  std::vector<std::size_t> order(pv.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pv[a] < pv[b]; });
  const double m = static_cast<double>(pv.size());
  std::size_t k = 0;
  for (std::size_t r = pv.size(); r > 0; --r) {
    if (pv[order[r - 1]] <= static_cast<double>(r) * level / m) {
      k = r;
      break;
    }
  }
  BhResult out;
  out.reject_global = k >= 1;
  out.rejections.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(out.rejections.begin(), out.rejections.end());
  return out;
}

double simes_statistic(std::span<const double> y, double sigma) {
  auto pv = two_sided_p_values(y, sigma);
  std::sort(pv.begin(), pv.end());
  const double m = static_cast<double>(pv.size());
  double best = 1.0;
  for (std::size_t r = 0; r < pv.size(); ++r) {
    best = std::min(best, pv[r] * m / static_cast<double>(r + 1));
  }
  return best;
}

double analytic_threshold(double p, double sigma, double c) {
  if (!(p >= 2)) throw ValidationError("analytic threshold: p must be >= 2");
  if (!(c >= 0)) throw ValidationError("analytic threshold: c must be >= 0");
  return std::sqrt(2.0 * sigma * sigma * (1.0 + c) * std::log(p));
}

double thm3_mu_bound(double p, double alpha, double beta, double sigma, double c) {
  if (!(alpha < beta)) throw ValidationError("mu bound: requires alpha < beta");
  const double kappa = (beta - alpha) / 2.0;
  return c * std::pow(p, -kappa) * std::sqrt(2.0 * sigma * sigma * std::log(p));
}

std::string_view to_string(DetectorKind kind) {
  switch (kind) {
  case DetectorKind::max_transform: return "max_transform";
  case DetectorKind::max_canonical: return "max_canonical";
  case DetectorKind::global_aggregate: return "global_aggregate";
  case DetectorKind::fdr: return "fdr";
  }
  return "unknown";
}

DetectorKind parse_detector_kind(std::string_view name) {
  for (auto kind : kAllDetectors) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError("unknown detector '" + std::string(name) + "'");
}

void DetectorSpec::validate(std::size_t p) const {
  if (!(target_far > 0 && target_far < 1)) {
    throw ValidationError("detector: target false-alarm rate must lie in (0, 1)");
  }
  if (kind == DetectorKind::max_transform) {
    if (!basis) throw ValidationError("detector: max_transform needs a basis");
    if (basis->size() != p) throw ValidationError("detector: basis size mismatch");
  }
}

double detector_statistic(const DetectorSpec& spec, std::span<const double> y,
                          double sigma) {
  switch (spec.kind) {
  case DetectorKind::max_transform:
    if (!spec.basis) throw ContractViolation("max_transform without a basis");
    return stat_max_transform(y, *spec.basis);
  case DetectorKind::max_canonical: return stat_max_canonical(y);
  case DetectorKind::global_aggregate: return stat_global_aggregate(y);
  case DetectorKind::fdr: {
    const double s = simes_statistic(y, sigma);
    return s > 0 ? -std::log(s) : std::numeric_limits<double>::infinity();
  }
  }
  throw ContractViolation("unknown detector kind");
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (phat + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

// Stream tags keep calibration, re-measurement and power draws disjoint.
enum : std::uint64_t { kCalibrationStream = 1, kRemeasureStream = 2, kPowerStream = 3 };

std::vector<double> null_statistics(const DetectorSpec& spec, std::size_t p,
                                    double sigma, std::size_t trials,
                                    std::uint64_t seed, std::uint64_t tag,
                                    std::size_t threads) {
  std::vector<double> stats(trials);
  const auto kind = static_cast<std::uint64_t>(spec.kind);
  parallel_for(trials, threads, [&](std::size_t t) {
    Rng rng = derive_stream(seed, {tag, kind, t});
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> y(p);
    for (auto& v : y) v = sigma * gauss(rng);
    stats[t] = detector_statistic(spec, y, sigma);
  });
  return stats;
}

} // namespace

CalibrationResult calibrate(const DetectorSpec& spec, std::size_t p, double sigma,
                            std::size_t n_trials, std::uint64_t seed,
                            std::size_t threads) {
  spec.validate(p);
  if (n_trials < kMinCalibrationTrials) {
    throw ValidationError("calibrate: needs at least " +
                          std::to_string(kMinCalibrationTrials) + " trials");
  }
  if (!(sigma > 0)) throw ValidationError("calibrate: sigma must be > 0");

  auto stats = null_statistics(spec, p, sigma, n_trials, seed, kCalibrationStream, threads);
  std::sort(stats.begin(), stats.end());
  // Order statistic k = ceil((1 - far) n): at most far * n draws exceed it.
  const double target = (1.0 - spec.target_far) * static_cast<double>(n_trials);
  auto k = static_cast<std::size_t>(std::ceil(target - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n_trials);

  CalibrationResult out;
  out.threshold = stats[k - 1];
  out.target_far = spec.target_far;
  out.trials = n_trials;
  if (!std::isfinite(out.threshold)) {
    throw std::runtime_error("calibrate: null quantile is not finite");
  }

  const auto fresh =
      null_statistics(spec, p, sigma, n_trials, seed, kRemeasureStream, threads);
  const auto alarms = static_cast<std::size_t>(std::count_if(
      fresh.begin(), fresh.end(), [&](double s) { return s > out.threshold; }));
  out.achieved_far = static_cast<double>(alarms) / static_cast<double>(n_trials);
  out.achieved_far_ci = wilson_interval(alarms, n_trials);
  return out;
}

const PowerPoint& PowerCurve::at(double mu, DetectorKind kind) const {
  for (const auto& r : rows) {
    if (r.kind == kind && std::abs(r.mu - mu) < 1e-12) return r;
  }
  throw ContractViolation("power curve: no row for mu=" + std::to_string(mu) + " " +
                          std::string(to_string(kind)));
}

PowerCurve power_curve(const TreeModel& model, const GammaSchedule& schedule,
                       bool constrain_root_zero, std::span<const double> mu_grid,
                       double sigma, std::span<const CalibratedDetector> detectors,
                       std::size_t trials, std::uint64_t seed, std::size_t threads) {
  if (trials == 0) throw ValidationError("power curve: trials must be >= 1");
  const std::size_t p = model.leaf_count();
  for (const auto& det : detectors) det.spec.validate(p);
  for (double mu : mu_grid) NoiseModel{mu, sigma}.validate();

  PowerCurve curve;
  for (std::size_t m = 0; m < mu_grid.size(); ++m) {
    for (const auto& det : detectors) {
      const auto kind = static_cast<std::uint64_t>(det.spec.kind);
      std::vector<std::uint8_t> hit(trials, 0);
      const NoiseModel noise{mu_grid[m], sigma};
      parallel_for(trials, threads, [&](std::size_t t) {
        Rng rng = derive_stream(seed, {kPowerStream, kind, m, t});
        const auto pattern = sample(model, schedule, constrain_root_zero, rng);
        const auto y = observe(pattern.x, noise, rng);
        hit[t] = detector_statistic(det.spec, y, sigma) > det.calibration.threshold;
      });
      const auto hits = std::accumulate(hit.begin(), hit.end(), std::size_t{0});
      const double n = static_cast<double>(trials);
      const double power = static_cast<double>(hits) / n;
      curve.rows.push_back({mu_grid[m], det.spec.kind, power, trials,
                            std::sqrt(power * (1 - power) / n),
                            det.calibration.threshold});
    }
  }
  return curve;
}

} // namespace hiertect
