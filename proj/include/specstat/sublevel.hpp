#pragma once
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "specstat/fits.hpp"

namespace specstat {

// Monte Carlo estimation of sublevel-set measures |{x in G : |f(x)| < eps}|
// for a black-box function f on an axis-aligned box G, together with a
// power-law fit of the measure against eps.  For f vanishing to finite order
// m the measure decays like eps^(1/m), so the fitted exponent estimates 1/m.

using BoxDomain = std::vector<std::pair<double, double>>;  // per-axis (lo, hi)

struct SublevelEstimate {
  double eps = 0.0;
  long long samples = 0;
  long long hits = 0;
  double volume = 0.0;       // Lebesgue volume of the box
  WilsonInterval fraction;   // hits / samples with 95% CI
  double measure = 0.0;      // fraction.point * volume
  double measure_lo = 0.0;   // fraction CI scaled to measure units
  double measure_hi = 0.0;
};

SublevelEstimate sublevel_measure(
    const std::function<double(const std::vector<double>&)>& f,
    const BoxDomain& box, double eps, long long samples, std::uint64_t seed);

struct SublevelExponent {
  ExponentFit fit;                       // slope of log measure vs log eps
  std::vector<SublevelEstimate> points;  // one estimate per grid value
};

// Runs sublevel_measure on each eps in the grid (independent sample streams
// derived from the seed) and fits the exponent with binomial weights.
SublevelExponent sublevel_exponent(
    const std::function<double(const std::vector<double>&)>& f,
    const BoxDomain& box, const std::vector<double>& eps_grid,
    long long samples_per_eps, std::uint64_t seed);

}  // namespace specstat
