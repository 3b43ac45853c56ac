#include "specstat/sublevel.hpp"

#include <cmath>
#include <cstddef>

#include "specstat/errors.hpp"
#include "specstat/rng.hpp"

namespace specstat {

namespace {

double box_volume(const BoxDomain& box) {
  if (box.empty()) throw ConfigError("sublevel: box must have at least one axis");
  double vol = 1.0;
  for (const auto& [lo, hi] : box) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw ConfigError("sublevel: each box axis needs finite lo < hi");
    vol *= hi - lo;
  }
  return vol;
}

}  // namespace

SublevelEstimate sublevel_measure(
    const std::function<double(const std::vector<double>&)>& f,
    const BoxDomain& box, double eps, long long samples, std::uint64_t seed) {
  const double volume = box_volume(box);
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw ConfigError("sublevel_measure: eps must be positive and finite");
  if (samples <= 0)
    throw ConfigError("sublevel_measure: samples must be positive");
  if (!f) throw ConfigError("sublevel_measure: function is empty");

  Rng gen(seed);
  std::vector<double> x(box.size());
  long long hits = 0;
  for (long long s = 0; s < samples; ++s) {
    for (std::size_t d = 0; d < box.size(); ++d)
      x[d] = box[d].first + uniform01(gen) * (box[d].second - box[d].first);
    const double v = f(x);
    if (!std::isfinite(v))
      throw NumericError("sublevel_measure: function returned a non-finite value");
    if (std::abs(v) < eps) ++hits;
  }

  SublevelEstimate est;
  est.eps = eps;
  est.samples = samples;
  est.hits = hits;
  est.volume = volume;
  est.fraction = wilson_interval(hits, samples);
  est.measure = est.fraction.point * volume;
  est.measure_lo = est.fraction.lo * volume;
  est.measure_hi = est.fraction.hi * volume;
  return est;
}

SublevelExponent sublevel_exponent(
    const std::function<double(const std::vector<double>&)>& f,
    const BoxDomain& box, const std::vector<double>& eps_grid,
    long long samples_per_eps, std::uint64_t seed) {
  SublevelExponent out;
  std::vector<FreqPoint> pts;
  pts.reserve(eps_grid.size());
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    out.points.push_back(
        sublevel_measure(f, box, eps_grid[i], samples_per_eps, trial_seed(seed, i)));
    // The fraction is the honest binomial frequency; the volume factor only
    // shifts the log-log intercept, never the slope.
    pts.push_back({eps_grid[i], out.points.back().fraction.point, samples_per_eps});
  }
  out.fit = exponent_fit(pts);
  return out;
}

}  // namespace specstat
