#pragma once
#include <cstdint>
#include <vector>

namespace specstat {

// Shared statistical plumbing: binomial confidence intervals, chi-square
// tails, and (log-log) weighted least squares.

// 95% two-sided normal quantile, frozen for reproducibility.
inline constexpr double kWilsonZ = 1.959963984540054;

struct WilsonInterval {
  double point = 0.0;  // k / n
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval for k successes in n trials at 95% confidence.
WilsonInterval wilson_interval(long long successes, long long trials);

// Survival function P(chi2_dof > stat).
double chi2_sf(double stat, int dof);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r_squared = 1.0;
  std::size_t points = 0;
};

// Weighted least squares y ~ intercept + slope x.  Empty weights mean unit
// weights; with unit (or otherwise relative) weights the standard errors are
// scaled by the residual variance, while caller-supplied weights are taken
// as inverse variances.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& weights = {});

struct FreqPoint {
  double x = 0.0;
  double freq = 0.0;
  long long trials = 0;  // 0: treat the point as exact (unit weight)
};

struct ExponentFit {
  double exponent = 0.0;   // slope of log freq vs log x
  double stderr_ = 0.0;
  double log_amplitude = 0.0;
  std::size_t used_points = 0;  // points with freq > 0
};

// Log-log weighted least squares; weights from the binomial variance of each
// frequency when trials are given.  Points with freq <= 0 are dropped;
// fewer than 3 usable points is an error.
ExponentFit exponent_fit(const std::vector<FreqPoint>& pts);

}  // namespace specstat
