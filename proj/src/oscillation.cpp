#include "specstat/oscillation.hpp"

#include <cmath>
#include <cstddef>

#include "specstat/errors.hpp"
#include "specstat/rng.hpp"

namespace specstat {

namespace {

constexpr int kProfileNodes = 33;
constexpr double kWindowLength = 6.0;
constexpr int kLatticeLength = 50;

double periodic_q(const SampledProfile& q_cell, double x) {
  double frac = x - std::floor(x);
  return q_cell(frac);
}

SampledProfile random_positive_profile(Rng& gen) {
  SampledProfile q;
  q.lo = 0.0;
  q.hi = 1.0;
  q.val.resize(kProfileNodes);
  for (double& v : q.val) v = 0.4 + 1.2 * uniform01(gen);
  return q;
}

void random_initial(Rng& gen, double& y0, double& yp0) {
  do {
    y0 = uniform_sym(gen, 1.0);
    yp0 = uniform_sym(gen, 1.0);
  } while (std::abs(y0) < 1e-3 && std::abs(yp0) < 1e-3);
}

// Flip so the sample is positive at the right end (the window stand-in for
// "positive near +infinity").
void orient_right_positive(std::vector<double>& y) {
  if (!y.empty() && y.back() < 0.0)
    for (double& v : y) v = -v;
}

std::vector<double> lattice_solution(const std::vector<double>& a,
                                     double lambda, double energy, double u0,
                                     double u1) {
  std::vector<double> u(kLatticeLength + 1);
  u[0] = u0;
  u[1] = u1;
  for (int n = 1; n < kLatticeLength; ++n) {
    double coeff = energy - lambda * a[static_cast<std::size_t>(n) % a.size()];
    u[static_cast<std::size_t>(n) + 1] =
        coeff * u[static_cast<std::size_t>(n)] -
        u[static_cast<std::size_t>(n) - 1];
  }
  return u;
}

std::vector<double> random_lattice_weights(Rng& gen) {
  std::size_t k = 1 + static_cast<std::size_t>(gen() % 4);
  std::vector<double> a(k);
  for (double& v : a) v = 0.5 + 1.5 * uniform01(gen);
  return a;
}

double min_of(const std::vector<double>& a) {
  double m = a[0];
  for (double v : a) m = std::min(m, v);
  return m;
}

}  // namespace

int oscillation_sign_changes(const std::vector<double>& y) {
  int changes = 0;
  int last = 0;
  bool any = false;
  for (double v : y) {
    int s = (v > 0.0) - (v < 0.0);
    if (s == 0) continue;
    any = true;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  if (!any)
    throw NumericError(
        "oscillation_sign_changes: all samples are zero (sign undefined)");
  return changes;
}

SturmSolution integrate_sturm(const SampledProfile& q_cell, double lambda,
                              double energy, double y0, double yp0,
                              double length, int steps_per_unit) {
  if (!(length > 0.0) || steps_per_unit < 2)
    throw ConfigError("integrate_sturm: need positive length and >= 2 steps");
  const auto nsteps =
      static_cast<std::size_t>(std::ceil(length * steps_per_unit - 1e-9));
  const double h = length / static_cast<double>(nsteps);
  SturmSolution out;
  out.x.reserve(nsteps + 1);
  out.y.reserve(nsteps + 1);
  double y = y0, p = yp0;
  out.x.push_back(0.0);
  out.y.push_back(y);
  auto w = [&](double x) { return lambda * periodic_q(q_cell, x) - energy; };
  for (std::size_t i = 0; i < nsteps; ++i) {
    const double x = static_cast<double>(i) * h;
    const double w1 = w(x), w2 = w(x + 0.5 * h), w3 = w(x + h);
    const double k1y = p, k1p = w1 * y;
    const double k2y = p + 0.5 * h * k1p, k2p = w2 * (y + 0.5 * h * k1y);
    const double k3y = p + 0.5 * h * k2p, k3p = w2 * (y + 0.5 * h * k2y);
    const double k4y = p + h * k3p, k4p = w3 * (y + h * k3y);
    y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    out.x.push_back(static_cast<double>(i + 1) * h);
    out.y.push_back(y);
  }
  return out;
}

OscillationCheck continuum_single_zero_case(std::uint64_t seed) {
  Rng gen(seed);
  SampledProfile q = random_positive_profile(gen);
  const double m = q.min_on(0.0, 1.0);
  OscillationCheck chk;
  chk.lambda = 1.5 + 4.0 * uniform01(gen);
  chk.energy1 = chk.lambda * m * (0.15 + 0.75 * uniform01(gen));
  double y0, yp0;
  random_initial(gen, y0, yp0);
  auto sol =
      integrate_sturm(q, chk.lambda, chk.energy1, y0, yp0, kWindowLength);
  chk.sign_changes = oscillation_sign_changes(sol.y);
  chk.bound = 1;
  chk.holds = chk.sign_changes <= chk.bound;
  return chk;
}

OscillationCheck continuum_difference_case(std::uint64_t seed) {
  Rng gen(seed);
  SampledProfile q = random_positive_profile(gen);
  const double m = q.min_on(0.0, 1.0);
  OscillationCheck chk;
  chk.lambda = 1.5 + 4.0 * uniform01(gen);
  chk.energy1 = chk.lambda * m * (0.4 + 0.5 * uniform01(gen));
  chk.energy2 = chk.energy1 - (0.1 + 2.0 * uniform01(gen));
  double y0, yp0;
  random_initial(gen, y0, yp0);
  auto u = integrate_sturm(q, chk.lambda, chk.energy1, y0, yp0, kWindowLength);
  random_initial(gen, y0, yp0);
  auto v = integrate_sturm(q, chk.lambda, chk.energy2, y0, yp0, kWindowLength);
  orient_right_positive(u.y);
  orient_right_positive(v.y);
  std::vector<double> w(u.y.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = v.y[i] - u.y[i];
  chk.sign_changes = oscillation_sign_changes(w);
  chk.bound = 3;
  chk.holds = chk.sign_changes <= chk.bound;
  return chk;
}

OscillationCheck discrete_single_flip_case(std::uint64_t seed) {
  Rng gen(seed);
  std::vector<double> a = random_lattice_weights(gen);
  const double m = min_of(a);
  OscillationCheck chk;
  chk.lambda = -(0.2 + 2.8 * uniform01(gen));
  chk.energy1 = 2.0 + chk.lambda * m + 0.01 + 3.0 * uniform01(gen);
  double u0, u1;
  random_initial(gen, u0, u1);
  auto u = lattice_solution(a, chk.lambda, chk.energy1, u0, u1);
  chk.sign_changes = oscillation_sign_changes(u);
  chk.bound = 1;
  chk.holds = chk.sign_changes <= chk.bound;
  return chk;
}

OscillationCheck discrete_difference_case(std::uint64_t seed) {
  Rng gen(seed);
  std::vector<double> a = random_lattice_weights(gen);
  const double m = min_of(a);
  OscillationCheck chk;
  chk.lambda = -(0.2 + 2.8 * uniform01(gen));
  chk.energy1 = 2.0 + chk.lambda * m + 0.01 + 2.0 * uniform01(gen);
  chk.energy2 = chk.energy1 + 0.05 + 2.0 * uniform01(gen);
  double u0, u1;
  random_initial(gen, u0, u1);
  auto u = lattice_solution(a, chk.lambda, chk.energy1, u0, u1);
  random_initial(gen, u0, u1);
  auto v = lattice_solution(a, chk.lambda, chk.energy2, u0, u1);
  std::vector<double> w(u.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = v[i] - u[i];
  chk.sign_changes = oscillation_sign_changes(w);
  chk.bound = 3;
  chk.holds = chk.sign_changes <= chk.bound;
  return chk;
}

}  // namespace specstat
