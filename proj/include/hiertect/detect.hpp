#pragma once

// Observation model y = mu x + N(0, sigma^2), the four detection statistics,
// Monte-Carlo threshold calibration and power estimation.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "hiertect/ising.hpp"
#include "hiertect/random.hpp"
#include "hiertect/transform.hpp"

namespace hiertect {

struct NoiseModel {
  double mu = 0.0;
  double sigma = 1.0;

  /// Throws ValidationError unless mu >= 0 and sigma > 0.
  void validate() const;
};

std::vector<double> observe(std::span<const std::uint8_t> x,
                            const NoiseModel& noise, Rng& rng);

/// max_i |b_i^T y| over every basis column.
double stat_max_transform(std::span<const double> y, const HaarBasis& basis);
/// max_i |y_i|.
double stat_max_canonical(std::span<const double> y);
/// (1/sqrt(p)) sum_i y_i.
double stat_global_aggregate(std::span<const double> y);

struct BhResult {
  bool reject_global = false;
  std::vector<std::size_t> rejections; // node indices, ascending
};

/// Benjamini-Hochberg step-up on two-sided p-values 2(1 - Phi(|y_i|/sigma)).
BhResult bh_fdr_detect(std::span<const double> y, double sigma, double level);

/// Simes combination min_k p * p_(k) / k. BH rejects at least one node at
/// `level` exactly when this is <= level.
double simes_statistic(std::span<const double> y, double sigma);

/// sqrt(2 sigma^2 (1+c) ln p); p >= 2.
double analytic_threshold(double p, double sigma, double c);

/// c p^(-(beta-alpha)/2) sqrt(2 sigma^2 ln p); requires alpha < beta.
double thm3_mu_bound(double p, double alpha, double beta, double sigma, double c);

enum class DetectorKind { max_transform, max_canonical, global_aggregate, fdr };

std::string_view to_string(DetectorKind kind);
/// Throws ValidationError for unknown names.
DetectorKind parse_detector_kind(std::string_view name);

inline constexpr DetectorKind kAllDetectors[] = {
    DetectorKind::max_transform, DetectorKind::max_canonical,
    DetectorKind::global_aggregate, DetectorKind::fdr};

struct DetectorSpec {
  DetectorKind kind = DetectorKind::max_canonical;
  std::shared_ptr<const HaarBasis> basis; // required for max_transform
  double target_far = 0.05;

  /// Throws ValidationError on a missing/mismatched basis or bad target.
  void validate(std::size_t p) const;
};

/// Detection statistic, larger meaning more evidence. The FDR detector
/// reports -ln(Simes) so that "statistic > threshold" is its decision rule.
double detector_statistic(const DetectorSpec& spec, std::span<const double> y,
                          double sigma);

struct Interval {
  double low = 0.0;
  double high = 0.0;
  bool contains(double v) const noexcept { return low <= v && v <= high; }
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials,
                         double z = 1.959963984540054);

struct CalibrationResult {
  double threshold = 0.0;
  double target_far = 0.0;
  std::size_t trials = 0;
  double achieved_far = 0.0;
  Interval achieved_far_ci;
};

inline constexpr std::size_t kMinCalibrationTrials = 1000;

/// Threshold = empirical (1 - target_far) quantile of the statistic under
/// mu = 0; the false-alarm rate is then re-measured on fresh null trials.
CalibrationResult calibrate(const DetectorSpec& spec, std::size_t p, double sigma,
                            std::size_t n_trials, std::uint64_t seed,
                            std::size_t threads = 1);

struct CalibratedDetector {
  DetectorSpec spec;
  CalibrationResult calibration;
};

struct PowerPoint {
  double mu = 0.0;
  DetectorKind kind = DetectorKind::max_canonical;
  double power = 0.0;
  std::size_t trials = 0;
  double std_error = 0.0;
  double threshold = 0.0;
};

struct PowerCurve {
  std::vector<PowerPoint> rows; // mu-major, detectors in input order

  const PowerPoint& at(double mu, DetectorKind kind) const;
};

/// For each (mu, detector): fraction of trials, each with a fresh Ising
/// pattern and fresh noise, whose statistic exceeds the calibrated threshold.
PowerCurve power_curve(const TreeModel& model, const GammaSchedule& schedule,
                       bool constrain_root_zero, std::span<const double> mu_grid,
                       double sigma, std::span<const CalibratedDetector> detectors,
                       std::size_t trials, std::uint64_t seed,
                       std::size_t threads = 1);

} // namespace hiertect
