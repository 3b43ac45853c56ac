#include "specstat/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "specstat/errors.hpp"
#include "specstat/rng.hpp"

namespace specstat {

std::string family_name(Family f) {
  switch (f) {
    case Family::SimpleContinuum: return "simple_continuum";
    case Family::ContinuumAlloy: return "continuum_alloy";
    case Family::DiscreteAlloy: return "discrete_alloy";
    case Family::Multimer: return "multimer";
  }
  return "?";
}

std::string density_name(Density d) {
  return d == Density::Uniform01 ? "uniform01" : "uniform_symmetric";
}

double SampledProfile::operator()(double t) const {
  if (val.size() < 2 || t < lo || t > hi) return 0.0;
  const double s = step();
  const double u = (t - lo) / s;
  auto i = static_cast<std::size_t>(u);
  if (i >= val.size() - 1) return val.back();
  const double frac = u - static_cast<double>(i);
  return val[i] * (1.0 - frac) + val[i + 1] * frac;
}

double SampledProfile::min_on(double a, double b) const {
  double m = operator()(a);
  m = std::min(m, operator()(b));
  const double s = step();
  for (std::size_t i = 0; i < val.size(); ++i) {
    const double t = lo + static_cast<double>(i) * s;
    if (t >= a && t <= b) m = std::min(m, val[i]);
  }
  return m;
}

double SampledProfile::max_abs() const {
  double m = 0.0;
  for (double v : val) m = std::max(m, std::abs(v));
  return m;
}

SampledProfile triangular_bump(int N, int samples_per_unit) {
  SampledProfile p;
  p.lo = -static_cast<double>(N);
  p.hi = static_cast<double>(N);
  const int count = 2 * N * samples_per_unit + 1;
  p.val.resize(count);
  for (int i = 0; i < count; ++i) {
    const double t = p.lo + (p.hi - p.lo) * static_cast<double>(i) /
                               static_cast<double>(count - 1);
    p.val[i] = std::max(0.0, 1.0 - std::abs(t) / static_cast<double>(N));
  }
  return p;
}

ModelSpec ModelSpec::simple_continuum(Density den, double M, double h) {
  ModelSpec m;
  m.family = Family::SimpleContinuum;
  m.density = den;
  m.bound_M = M;
  m.support_radius_N = 1;
  m.grid_step_h = h;
  m.validate();
  return m;
}

ModelSpec ModelSpec::continuum_alloy(SampledProfile q, int N, Density den,
                                     double M, double h) {
  ModelSpec m;
  m.family = Family::ContinuumAlloy;
  m.density = den;
  m.bound_M = M;
  m.support_radius_N = N;
  m.q = std::move(q);
  m.grid_step_h = h;
  const double lo_min = m.q.min_on(-0.5, 0.5);
  const double hi_max = m.q.max_abs();
  m.eta = (lo_min > 0.0 && hi_max > 0.0) ? std::min(lo_min, 1.0 / hi_max) : 0.0;
  m.validate();
  return m;
}

ModelSpec ModelSpec::discrete_alloy(std::vector<double> d_centered, int N,
                                    Density den, double M) {
  ModelSpec m;
  m.family = Family::DiscreteAlloy;
  m.density = den;
  m.bound_M = M;
  m.support_radius_N = N;
  m.discrete_site_profile_d = std::move(d_centered);
  m.validate();
  return m;
}

ModelSpec ModelSpec::anderson(double coupling, Density den, double M) {
  return discrete_alloy({coupling}, 0, den, M);
}

ModelSpec ModelSpec::multimer(std::vector<double> a, std::vector<double> b,
                              Density den, double M) {
  ModelSpec m;
  m.family = Family::Multimer;
  m.density = den;
  m.bound_M = M;
  m.support_radius_N = static_cast<int>(a.size());
  m.multimer_weights_a = std::move(a);
  m.hopping_b = std::move(b);
  m.validate();
  return m;
}

void ModelSpec::validate() const {
  std::vector<std::string> errs;
  if (density == Density::UniformSymmetricM && !(bound_M > 0.0))
    errs.push_back("bound_M must be > 0 for uniform_symmetric density");
  switch (family) {
    case Family::SimpleContinuum:
      if (support_radius_N != 1)
        errs.push_back("support_radius_N must be 1 for simple_continuum");
      if (!(grid_step_h > 0.0)) errs.push_back("grid_step_h must be > 0");
      break;
    case Family::ContinuumAlloy: {
      if (support_radius_N < 1)
        errs.push_back("support_radius_N must be >= 1 for continuum_alloy");
      if (!(grid_step_h > 0.0)) errs.push_back("grid_step_h must be > 0");
      if (q.val.size() < 2) {
        errs.push_back("single_site_q table missing");
      } else {
        const std::size_t needed =
            static_cast<std::size_t>(2 * support_radius_N) * 64 + 1;
        if (q.val.size() < needed)
          errs.push_back("single_site_q needs >= 64 samples per unit interval");
        if (q.lo > -support_radius_N + 1e-12 || q.hi < support_radius_N - 1e-12)
          errs.push_back("single_site_q table must span [-N, N]");
        for (double v : q.val)
          if (v < 0.0) {
            errs.push_back("single_site_q must be nonnegative");
            break;
          }
        if (!(eta > 0.0))
          errs.push_back(
              "covering condition fails: q must be bounded below on [-1/2, 1/2]");
      }
      break;
    }
    case Family::DiscreteAlloy: {
      if (support_radius_N < 0) errs.push_back("support_radius_N must be >= 0");
      const auto& d = discrete_site_profile_d;
      if (d.size() != static_cast<std::size_t>(2 * support_radius_N + 1))
        errs.push_back("discrete_site_profile_d must have length 2N+1");
      bool any = false, pos = false, neg = false;
      for (double v : d) {
        if (v != 0.0) any = true;
        if (v > 0.0) pos = true;
        if (v < 0.0) neg = true;
      }
      if (!any) errs.push_back("discrete_site_profile_d must not be identically zero");
      if (pos && neg)
        errs.push_back("discrete_site_profile_d entries must share one sign");
      break;
    }
    case Family::Multimer: {
      const int N = static_cast<int>(multimer_weights_a.size());
      if (N < 2) errs.push_back("multimer_weights_a needs length N >= 2");
      if (support_radius_N != N)
        errs.push_back("support_radius_N must equal len(multimer_weights_a)");
      for (double a : multimer_weights_a)
        if (!(a > 0.0)) {
          errs.push_back("multimer_weights_a entries must be > 0");
          break;
        }
      if (hopping_b.empty()) {
        errs.push_back("hopping_b must be nonempty");
      } else {
        double mn = std::abs(hopping_b[0]);
        for (double b : hopping_b) mn = std::min(mn, std::abs(b));
        if (!(mn > 0.0)) errs.push_back("hopping_b requires min |b_n| > 0");
      }
      break;
    }
  }
  if (!errs.empty()) {
    std::ostringstream os;
    os << "invalid model:";
    for (const auto& e : errs) os << "\n  - " << e;
    throw ConfigError(os.str());
  }
}

double ModelSpec::b_at(long long site) const {
  if (family != Family::Multimer || hopping_b.empty()) return 1.0;
  const auto nb = static_cast<long long>(hopping_b.size());
  long long r = site % nb;
  if (r < 0) r += nb;
  return hopping_b[static_cast<std::size_t>(r)];
}

double DisorderSample::at(long long n) const {
  if (n < first || n > last())
    throw std::out_of_range("disorder index " + std::to_string(n) +
                            " outside sampled range [" + std::to_string(first) +
                            ", " + std::to_string(last()) + "]");
  return omegas[static_cast<std::size_t>(n - first)];
}

DisorderSample DisorderSample::with_bump(long long n, double delta) const {
  DisorderSample out = *this;
  out.omegas.at(static_cast<std::size_t>(n - first)) += delta;
  return out;
}

long long floor_div(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

OmegaRange omega_range(const ModelSpec& model, double l) {
  if (!(l >= 0.0)) throw ConfigError("box halfwidth must be >= 0");
  OmegaRange r;
  switch (model.family) {
    case Family::SimpleContinuum:
    case Family::ContinuumAlloy: {
      const auto N = static_cast<long long>(model.support_radius_N);
      r.first = static_cast<long long>(std::floor(-l)) - N;
      r.last = static_cast<long long>(std::ceil(l)) + N;
      break;
    }
    case Family::DiscreteAlloy: {
      const auto L = static_cast<long long>(std::llround(l));
      const auto N = static_cast<long long>(model.support_radius_N);
      r.first = -L - N;
      r.last = L + N;
      break;
    }
    case Family::Multimer: {
      const auto L = static_cast<long long>(std::llround(l));
      const auto N = static_cast<long long>(model.period_N());
      r.first = floor_div(-L, N) - 1;
      r.last = floor_div(L, N) + 1;
      break;
    }
  }
  return r;
}

DisorderSample sample_disorder(const ModelSpec& model, double l,
                               std::uint64_t seed) {
  const OmegaRange r = omega_range(model, l);
  DisorderSample s;
  s.seed = seed;
  s.first = r.first;
  s.bound_M = model.omega_bound();
  const auto count = static_cast<std::size_t>(r.last - r.first + 1);
  s.omegas.resize(count);
  Rng g(seed);
  for (auto& w : s.omegas)
    w = model.density == Density::Uniform01 ? uniform01(g)
                                            : uniform_sym(g, model.bound_M);
  return s;
}

namespace {

long long nearest_site(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9)
    throw std::out_of_range("discrete potential requested at non-integer x");
  return static_cast<long long>(r);
}

}  // namespace

double evaluate_potential(const ModelSpec& model, const DisorderSample& sample,
                          double x) {
  switch (model.family) {
    case Family::SimpleContinuum:
      // V = omega_n on [n, n+1); right-continuous at the jumps.
      return sample.at(static_cast<long long>(std::floor(x)));
    case Family::ContinuumAlloy: {
      const int N = model.support_radius_N;
      const auto n_lo = static_cast<long long>(std::ceil(x - N));
      const auto n_hi = static_cast<long long>(std::floor(x + N));
      double v = 0.0;
      for (long long n = n_lo; n <= n_hi; ++n)
        v += sample.at(n) * model.q(x - static_cast<double>(n));
      return v;
    }
    case Family::DiscreteAlloy: {
      const long long m = nearest_site(x);
      const int N = model.support_radius_N;
      double v = 0.0;
      for (int k = -N; k <= N; ++k)
        v += model.discrete_site_profile_d[static_cast<std::size_t>(k + N)] *
             sample.at(m - k);
      return v;
    }
    case Family::Multimer: {
      const long long s = nearest_site(x);
      const auto N = static_cast<long long>(model.period_N());
      const long long j = floor_div(s, N);
      const long long m = s - N * j;
      return model.multimer_weights_a[static_cast<std::size_t>(m)] *
             sample.at(j);
    }
  }
  return 0.0;
}

double BoxOperator::norm1() const {
  double best = 0.0;
  const std::size_t n = dim();
  for (std::size_t i = 0; i < n; ++i) {
    double c = std::abs(diag[i]);
    if (i > 0) c += std::abs(off[i - 1]);
    if (i + 1 < n) c += std::abs(off[i]);
    best = std::max(best, c);
  }
  return best;
}

BoxOperator build_box_operator_sites(const ModelSpec& model,
                                     const DisorderSample& sample,
                                     long long s_lo, long long s_hi) {
  if (!model.is_discrete())
    throw ConfigError("site-range boxes are for discrete families");
  if (s_hi < s_lo) throw ConfigError("empty site range");
  BoxOperator op;
  op.discrete = true;
  op.l = static_cast<double>(std::max(std::llabs(s_lo), std::llabs(s_hi)));
  op.h = 1.0;
  op.first_site = s_lo;
  op.model = model;
  op.sample = sample;
  const auto n = static_cast<std::size_t>(s_hi - s_lo + 1);
  op.diag.resize(n);
  op.off.assign(n > 0 ? n - 1 : 0, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const long long s = s_lo + static_cast<long long>(i);
    op.diag[i] = evaluate_potential(model, sample, static_cast<double>(s));
    if (i + 1 < n) op.off[i] = -model.b_at(s + 1);
  }
  return op;
}

BoxOperator build_box_operator(const ModelSpec& model,
                               const DisorderSample& sample, double l) {
  const OmegaRange need = omega_range(model, l);
  if (need.first < sample.first || need.last > sample.last())
    throw ConfigError("disorder sample does not cover the box plus margin");
  if (model.is_discrete()) {
    const auto L = static_cast<long long>(std::llround(l));
    if (std::abs(l - static_cast<double>(L)) > 1e-9)
      throw ConfigError("discrete box halfwidth must be an integer");
    return build_box_operator_sites(model, sample, -L, L);
  }
  if (!(l > 0.0)) throw ConfigError("continuum box needs l > 0");
  BoxOperator op;
  op.discrete = false;
  op.l = l;
  op.model = model;
  op.sample = sample;
  const auto n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(2.0 * l / model.grid_step_h)) - 1);
  op.h = 2.0 * l / static_cast<double>(n + 1);
  op.diag.resize(n);
  op.off.assign(n - 1, -1.0 / (op.h * op.h));
  const double inv_h2 = 1.0 / (op.h * op.h);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = op.x_of(i);
    op.diag[i] = 2.0 * inv_h2 + evaluate_potential(model, sample, x);
  }
  return op;
}

}  // namespace specstat
