#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace thermocap {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares y = intercept + slope * x. Needs >= 2 points.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Asymptotic Kolmogorov survival function P(K > lambda).
double kolmogorov_q(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Clopper-Pearson interval for k successes in n trials.
std::pair<double, double> binomial_ci(long k, long n, double level = 0.99);

double quantile(std::vector<double> v, double q);
double mean(const std::vector<double>& v);
// Standard error of the mean.
double std_error(const std::vector<double>& v);

}  // namespace thermocap
