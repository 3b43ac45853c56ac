#include "specstat/fits.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include <boost/math/special_functions/gamma.hpp>

#include "specstat/errors.hpp"

namespace specstat {

WilsonInterval wilson_interval(long long successes, long long trials) {
  if (trials <= 0) throw ConfigError("wilson_interval: trials must be positive");
  if (successes < 0 || successes > trials)
    throw ConfigError("wilson_interval: successes out of range");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      (kWilsonZ / denom) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  WilsonInterval w;
  w.point = p;
  // At the boundary counts the algebraic bound is exactly the endpoint;
  // snap it so rounding cannot push the interval off the point estimate.
  w.lo = successes == 0 ? 0.0 : std::max(0.0, center - half);
  w.hi = successes == trials ? 1.0 : std::min(1.0, center + half);
  return w;
}

double chi2_sf(double stat, int dof) {
  if (!(stat >= 0.0) || !std::isfinite(stat))
    throw ConfigError("chi2_sf: statistic must be finite and nonnegative");
  if (dof <= 0) throw ConfigError("chi2_sf: degrees of freedom must be positive");
  return boost::math::gamma_q(0.5 * static_cast<double>(dof), 0.5 * stat);
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& weights) {
  const std::size_t n = x.size();
  if (y.size() != n)
    throw ConfigError("linear_fit: abscissa/ordinate length mismatch");
  if (n < 2) throw ConfigError("linear_fit: need at least two points");
  const bool relative = weights.empty();
  if (!relative && weights.size() != n)
    throw ConfigError("linear_fit: weight length mismatch");

  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = relative ? 1.0 : weights[i];
    if (!(w > 0.0) || !std::isfinite(w))
      throw ConfigError("linear_fit: weights must be positive and finite");
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw ConfigError("linear_fit: data must be finite");
    sw += w;
    sx += w * x[i];
    sy += w * y[i];
  }
  const double xbar = sx / sw;
  const double ybar = sy / sw;

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = relative ? 1.0 : weights[i];
    const double dx = x[i] - xbar;
    const double dy = y[i] - ybar;
    sxx += w * dx * dx;
    sxy += w * dx * dy;
    syy += w * dy * dy;
  }
  if (!(sxx > 0.0))
    throw ConfigError("linear_fit: abscissae are all identical");

  LinearFit fit;
  fit.points = n;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;

  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = relative ? 1.0 : weights[i];
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    chi2 += w * r * r;
  }
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - chi2 / syy) : 1.0;

  // With true inverse-variance weights the parameter covariance is fixed;
  // with unit/relative weights it is scaled by the residual variance.
  double scale = 1.0;
  if (relative) scale = n > 2 ? chi2 / static_cast<double>(n - 2) : 0.0;
  fit.slope_stderr = std::sqrt(scale / sxx);
  fit.intercept_stderr = std::sqrt(scale * (1.0 / sw + xbar * xbar / sxx));
  return fit;
}

ExponentFit exponent_fit(const std::vector<FreqPoint>& pts) {
  std::vector<double> lx, ly, var;
  lx.reserve(pts.size());
  ly.reserve(pts.size());
  var.reserve(pts.size());
  bool any_exact = false;
  for (const FreqPoint& p : pts) {
    if (!(p.freq > 0.0)) continue;  // zero-frequency points carry no log data
    if (!(p.x > 0.0))
      throw ConfigError("exponent_fit: abscissa must be positive");
    lx.push_back(std::log(p.x));
    ly.push_back(std::log(p.freq));
    double v = 0.0;
    if (p.trials > 0) {
      // Delta method: var(log f) ~ (1 - f) / (f * trials).
      v = (1.0 - p.freq) / (p.freq * static_cast<double>(p.trials));
    }
    if (!(v > 0.0)) any_exact = true;
    var.push_back(v);
  }
  if (lx.size() < 3)
    throw ConfigError("exponent_fit: insufficient data (need 3 points with freq > 0)");

  std::vector<double> weights;
  if (!any_exact) {
    weights.resize(var.size());
    for (std::size_t i = 0; i < var.size(); ++i) weights[i] = 1.0 / var[i];
  }
  const LinearFit fit = linear_fit(lx, ly, weights);

  ExponentFit out;
  out.exponent = fit.slope;
  out.stderr_ = fit.slope_stderr;
  out.log_amplitude = fit.intercept;
  out.used_points = lx.size();
  return out;
}

}  // namespace specstat
