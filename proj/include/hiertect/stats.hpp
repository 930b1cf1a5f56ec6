#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace hiertect::stats {

double normal_cdf(double z);
double normal_quantile(double probability);

/// P(chi^2_dof > x).
double chi_square_survival(double x, double dof);

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^(k-1) e^(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample KS against a continuous CDF (Stephens' small-n correction).
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
double variance(std::span<const double> v); // unbiased

/// Total variation 1/2 sum |a_i - b_i|.
double total_variation(std::span<const double> a, std::span<const double> b);

} // namespace hiertect::stats
