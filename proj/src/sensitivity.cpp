#include "specstat/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "specstat/errors.hpp"

namespace specstat {

namespace {

double spectral_scale(const std::vector<double>& values) {
  double scale = 1.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  return scale;
}

double neighbor_gap(const std::vector<double>& values, int which) {
  double gap = std::numeric_limits<double>::infinity();
  if (which > 0) gap = std::min(gap, values[which] - values[which - 1]);
  if (which + 1 < static_cast<int>(values.size()))
    gap = std::min(gap, values[which + 1] - values[which]);
  return gap;
}

void require_simple(const std::vector<double>& values, int which,
                    const char* caller) {
  if (which < 0 || which >= static_cast<int>(values.size()))
    throw std::out_of_range(std::string(caller) + ": eigenvalue index " +
                            std::to_string(which) + " outside spectrum of size " +
                            std::to_string(values.size()));
  if (neighbor_gap(values, which) <= 1e-10 * spectral_scale(values))
    throw NumericError(std::string(caller) + ": eigenvalue " +
                       std::to_string(which) +
                       " is nearly degenerate; sensitivity undefined");
}

// Rebuilds the identical box (same site range / grid) from a different
// disorder realization.
BoxOperator rebuild(const BoxOperator& op, const DisorderSample& s) {
  if (op.discrete)
    return build_box_operator_sites(
        op.model, s, op.first_site,
        op.first_site + static_cast<long long>(op.dim()) - 1);
  return build_box_operator(op.model, s, op.l);
}

double eigenvalue_at(const BoxOperator& op, int which) {
  return eigen_all(op).values[static_cast<std::size_t>(which)];
}

}  // namespace

double GradientVector::at(long long n) const {
  if (n < first || n > last())
    throw std::out_of_range("GradientVector: omega index " + std::to_string(n) +
                            " outside [" + std::to_string(first) + ", " +
                            std::to_string(last()) + "]");
  return partials[static_cast<std::size_t>(n - first)];
}

GradientVector hf_gradient(const Spectrum& spec, int which,
                           const ModelSpec& model,
                           const DisorderSample& sample) {
  require_simple(spec.values, which, "hf_gradient");
  const int col = spec.column_of(which);
  if (col < 0)
    throw ConfigError("hf_gradient: no eigenvector stored for eigenvalue " +
                      std::to_string(which));
  model.validate();

  GradientVector g;
  g.first = sample.first;
  g.partials.assign(sample.omegas.size(), 0.0);
  g.which = which;
  g.energy = spec.values[static_cast<std::size_t>(which)];

  const long long glast = g.last();
  auto bump_into = [&](long long n, double weight) {
    if (n < g.first || n > glast)
      throw std::out_of_range("hf_gradient: site " + std::to_string(n) +
                              " outside the sampled disorder range");
    g.partials[static_cast<std::size_t>(n - g.first)] += weight;
  };

  const BoxInfo& box = spec.box;
  const int N = model.support_radius_N;
  for (std::size_t i = 0; i < box.dim; ++i) {
    const double x =
        box.discrete
            ? static_cast<double>(box.first_site + static_cast<long long>(i))
            : -box.l + (static_cast<double>(i) + 1.0) * box.h;
    const double w2 = spec.vectors(static_cast<Eigen::Index>(i), col) *
                      spec.vectors(static_cast<Eigen::Index>(i), col);
    switch (model.family) {
      case Family::SimpleContinuum:
        bump_into(static_cast<long long>(std::floor(x)), w2);
        break;
      case Family::ContinuumAlloy: {
        const auto n_lo = static_cast<long long>(std::ceil(x - N));
        const auto n_hi = static_cast<long long>(std::floor(x + N));
        for (long long n = n_lo; n <= n_hi; ++n)
          bump_into(n, model.q(x - static_cast<double>(n)) * w2);
        break;
      }
      case Family::DiscreteAlloy: {
        const long long m = box.first_site + static_cast<long long>(i);
        for (long long n = m - N; n <= m + N; ++n)
          bump_into(n, model.discrete_site_profile_d[static_cast<std::size_t>(
                           m - n + N)] *
                           w2);
        break;
      }
      case Family::Multimer: {
        const long long m = box.first_site + static_cast<long long>(i);
        const long long j = floor_div(m, N);
        const long long r = m - static_cast<long long>(N) * j;
        bump_into(j, model.multimer_weights_a[static_cast<std::size_t>(r)] * w2);
        break;
      }
    }
  }
  for (double p : g.partials) g.l1_norm += std::abs(p);
  return g;
}

JacobianPair jacobian_pair(const GradientVector& gE, const GradientVector& gEp,
                           long long gamma, long long gamma_prime) {
  JacobianPair jp;
  jp.gamma = gamma;
  jp.gamma_prime = gamma_prime;
  jp.det_value =
      gE.at(gamma) * gEp.at(gamma_prime) - gE.at(gamma_prime) * gEp.at(gamma);
  return jp;
}

GradJacResult gradjac_bound_check(std::vector<double> u, std::vector<double> v) {
  if (u.empty() || u.size() != v.size())
    throw ConfigError("gradjac_bound_check: vectors must share a nonzero length");
  for (double x : u)
    if (x < 0.0)
      throw ConfigError("gradjac_bound_check: negative component in u");
  for (double x : v)
    if (x < 0.0)
      throw ConfigError("gradjac_bound_check: negative component in v");
  double su = 0.0, sv = 0.0;
  for (double x : u) su += x;
  for (double x : v) sv += x;
  if (su <= 0.0 || sv <= 0.0)
    throw NumericError("gradjac_bound_check: zero vector cannot be normalized");
  for (double& x : u) x /= su;
  for (double& x : v) x /= sv;

  GradJacResult r;
  const std::size_t n = u.size();
  for (std::size_t j = 0; j + 1 < n; ++j)
    for (std::size_t k = j + 1; k < n; ++k) {
      const double det = u[j] * v[k] - u[k] * v[j];
      if (det * det > r.lhs) {
        r.lhs = det * det;
        r.best_j = j;
        r.best_k = k;
      }
    }
  double dist = 0.0;
  for (std::size_t i = 0; i < n; ++i) dist += std::abs(u[i] - v[i]);
  const double n5 = std::pow(static_cast<double>(n), 5.0);
  r.rhs = dist * dist / (4.0 * n5);
  r.holds = r.lhs >= r.rhs - 1e-14;
  return r;
}

double colinearity_gap(const GradientVector& gE, const GradientVector& gEp) {
  if (gE.first != gEp.first || gE.size() != gEp.size())
    throw ConfigError("colinearity_gap: gradients index different ranges");
  if (gE.l1_norm <= 0.0 || gEp.l1_norm <= 0.0)
    throw NumericError("colinearity_gap: zero gradient cannot be normalized");
  double dist = 0.0;
  for (std::size_t i = 0; i < gE.size(); ++i)
    dist += std::abs(gE.partials[i] / gE.l1_norm -
                     gEp.partials[i] / gEp.l1_norm);
  return dist;
}

GradientVector fd_gradient(const BoxOperator& op, int which, double step) {
  const Spectrum base = eigen_all(op);
  require_simple(base.values, which, "fd_gradient");
  GradientVector g;
  g.first = op.sample.first;
  g.partials.assign(op.sample.omegas.size(), 0.0);
  g.which = which;
  g.energy = base.values[static_cast<std::size_t>(which)];
  for (std::size_t i = 0; i < g.partials.size(); ++i) {
    const long long n = g.first + static_cast<long long>(i);
    const double ep = eigenvalue_at(rebuild(op, op.sample.with_bump(n, step)),
                                    which);
    const double em = eigenvalue_at(rebuild(op, op.sample.with_bump(n, -step)),
                                    which);
    g.partials[i] = (ep - em) / (2.0 * step);
  }
  for (double p : g.partials) g.l1_norm += std::abs(p);
  return g;
}

HessianEstimate hessian_norm_estimate(const BoxOperator& op, int which) {
  const Spectrum sp = eigen_all(op, true);
  require_simple(sp.values, which, "hessian_norm_estimate");
  const GradientVector g = hf_gradient(sp, which, op.model, op.sample);

  // Rank sites by sensitivity; keep at most kMaxHessianSites of them.
  std::vector<std::pair<double, long long>> mag;
  for (std::size_t i = 0; i < g.size(); ++i)
    mag.emplace_back(std::abs(g.partials[i]),
                     g.first + static_cast<long long>(i));
  std::sort(mag.begin(), mag.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  const double gmax = mag.front().first;
  if (gmax <= 0.0)
    throw NumericError("hessian_norm_estimate: zero gradient");
  HessianEstimate est;
  const double keep_threshold = 1e-10 * gmax;
  for (const auto& [m, site] : mag) {
    if (m < keep_threshold) break;
    if (static_cast<int>(est.active_sites.size()) == kMaxHessianSites) {
      est.truncated = true;
      break;
    }
    est.active_sites.push_back(site);
  }
  const auto k = static_cast<int>(est.active_sites.size());
  est.cutoff = mag[static_cast<std::size_t>(k - 1)].first;

  // Central-of-central finite differences on the active block.
  const double d = kHessianFdStep;
  const double e0 = sp.values[static_cast<std::size_t>(which)];
  auto shifted = [&](long long a, double da, long long b, double db) {
    DisorderSample s = op.sample.with_bump(a, da);
    if (b != a || db != 0.0) s = s.with_bump(b, db);
    return eigenvalue_at(rebuild(op, s), which);
  };
  est.hessian = Eigen::MatrixXd::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    const long long sa = est.active_sites[static_cast<std::size_t>(a)];
    est.hessian(a, a) =
        (shifted(sa, d, sa, 0.0) - 2.0 * e0 + shifted(sa, -d, sa, 0.0)) /
        (d * d);
    for (int b = a + 1; b < k; ++b) {
      const long long sb = est.active_sites[static_cast<std::size_t>(b)];
      const double v = (shifted(sa, d, sb, d) - shifted(sa, d, sb, -d) -
                        shifted(sa, -d, sb, d) + shifted(sa, -d, sb, -d)) /
                       (4.0 * d * d);
      est.hessian(a, b) = v;
      est.hessian(b, a) = v;
    }
  }

  // Exact l-infinity -> l1 norm by sign-vector enumeration; s and -s give
  // the same value, so the leading sign is pinned.
  for (std::uint32_t bits = 0; bits < (1u << (k - 1)); ++bits) {
    double total = 0.0;
    for (int row = 0; row < k; ++row) {
      double acc = est.hessian(row, 0);
      for (int c = 1; c < k; ++c) {
        const double s = (bits >> (c - 1)) & 1u ? -1.0 : 1.0;
        acc += s * est.hessian(row, c);
      }
      total += std::abs(acc);
    }
    est.norm_estimate = std::max(est.norm_estimate, total);
  }
  est.gap = neighbor_gap(sp.values, which);
  return est;
}

HessianEstimate hessian_norm_estimate(const ModelSpec& model,
                                      const DisorderSample& sample, double l,
                                      int which) {
  return hessian_norm_estimate(build_box_operator(model, sample, l), which);
}

}  // namespace specstat
