#include "specstat/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "specstat/errors.hpp"

namespace specstat {

namespace {

// Keep the BLAS runtime single-threaded: trial-level parallelism owns all
// cores, and nested threading could perturb reduction order.
const bool kBlasPinned = [] {
  ::setenv("OPENBLAS_NUM_THREADS", "1", 0);
  return true;
}();

void check_finite(const BoxOperator& op) {
  for (double v : op.diag)
    if (!std::isfinite(v)) throw NumericError("non-finite diagonal entry");
  for (double v : op.off)
    if (!std::isfinite(v)) throw NumericError("non-finite off-diagonal entry");
}

BoxInfo box_info(const BoxOperator& op) {
  return BoxInfo{op.discrete, op.l, op.h, op.first_site, op.dim()};
}

void flag_degeneracy(Spectrum& s) {
  double scale = 1.0;
  for (double v : s.values) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 1; i < s.values.size(); ++i)
    if (s.values[i] - s.values[i - 1] < 1e-12 * scale) {
      s.near_degenerate = true;
      break;
    }
}

}  // namespace

int Spectrum::column_of(int j) const {
  for (std::size_t k = 0; k < vector_index.size(); ++k)
    if (vector_index[k] == j) return static_cast<int>(k);
  return -1;
}

Spectrum eigen_all(const BoxOperator& op, bool want_vectors,
                   std::optional<std::pair<double, double>> window) {
  check_finite(op);
  const auto n = static_cast<lapack_int>(op.dim());
  Spectrum s;
  s.box = box_info(op);
  std::vector<double> d = op.diag;
  std::vector<double> e = op.off;
  e.resize(op.dim());  // slack so LAPACK may clobber n-1 entries

  if (want_vectors && !window) {
    s.vectors.resize(n, n);
    const lapack_int info = LAPACKE_dstev(LAPACK_COL_MAJOR, 'V', n, d.data(),
                                          e.data(), s.vectors.data(), n);
    if (info != 0) throw NumericError("dstev failed, info=" + std::to_string(info));
    s.values = std::move(d);
    s.values.resize(static_cast<std::size_t>(n));
    s.vector_index.resize(static_cast<std::size_t>(n));
    for (lapack_int j = 0; j < n; ++j) s.vector_index[j] = j;
    flag_degeneracy(s);
    return s;
  }

  {
    double z = 0.0;
    const lapack_int info =
        LAPACKE_dstev(LAPACK_COL_MAJOR, 'N', n, d.data(), e.data(), &z, 1);
    if (info != 0) throw NumericError("dstev failed, info=" + std::to_string(info));
    s.values = d;
    s.values.resize(static_cast<std::size_t>(n));
  }

  if (want_vectors && window) {
    const double lo = window->first, hi = window->second;
    // Closed-interval semantics on top of LAPACK's half-open (vl, vu].
    const double vl = std::nextafter(lo, -std::numeric_limits<double>::infinity());
    const long long expect = count_in_interval(op, lo, hi);
    if (expect > 0) {
      std::vector<double> dd = op.diag, ee = op.off;
      ee.resize(op.dim());
      std::vector<double> w(op.dim());
      std::vector<lapack_int> ifail(op.dim());
      const auto cols = static_cast<lapack_int>(expect);
      s.vectors.resize(n, cols);
      lapack_int m = 0;
      const double abstol = 2.0 * LAPACKE_dlamch('S');
      const lapack_int info = LAPACKE_dstevx(
          LAPACK_COL_MAJOR, 'V', 'V', n, dd.data(), ee.data(), vl, hi, 0, 0,
          abstol, &m, w.data(), s.vectors.data(), n, ifail.data());
      if (info != 0)
        throw NumericError("dstevx failed, info=" + std::to_string(info));
      if (m != cols) throw NumericError("windowed eigencount mismatch");
      const long long below = sturm_count_below(op, vl);
      s.vector_index.resize(static_cast<std::size_t>(m));
      for (lapack_int k = 0; k < m; ++k)
        s.vector_index[k] = static_cast<int>(below + k);
    }
  }
  flag_degeneracy(s);
  return s;
}

long long sturm_count_below(const BoxOperator& op, double x) {
  // Sign count of the LDL^T pivots of T - xI; pivots are guarded exactly as
  // in classical bisection codes so the count is deterministic at ties.
  const std::size_t n = op.dim();
  double max_off2 = 1.0;
  for (double b : op.off) max_off2 = std::max(max_off2, b * b);
  const double pivmin = std::numeric_limits<double>::min() * max_off2;
  long long count = 0;
  double d = op.diag[0] - x;
  if (std::abs(d) < pivmin) d = d < 0.0 ? -pivmin : pivmin;
  if (d < 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    d = (op.diag[i] - x) - op.off[i - 1] * op.off[i - 1] / d;
    if (std::abs(d) < pivmin) d = d < 0.0 ? -pivmin : pivmin;
    if (d < 0.0) ++count;
  }
  return count;
}

long long count_in_interval(const BoxOperator& op, double lo, double hi) {
  if (lo > hi) throw ConfigError("count_in_interval: lo > hi");
  check_finite(op);
  const double hi_plus =
      std::nextafter(hi, std::numeric_limits<double>::infinity());
  return sturm_count_below(op, hi_plus) - sturm_count_below(op, lo);
}

std::vector<double> eigen_values_window(const BoxOperator& op, double lo,
                                        double hi) {
  check_finite(op);
  const auto n = static_cast<lapack_int>(op.dim());
  std::vector<double> d = op.diag, e = op.off;
  e.resize(op.dim());
  std::vector<double> w(op.dim());
  std::vector<lapack_int> ifail(op.dim());
  lapack_int m = 0;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  double zdummy = 0.0;
  const lapack_int info =
      LAPACKE_dstevx(LAPACK_COL_MAJOR, 'N', 'V', n, d.data(), e.data(), lo, hi,
                     0, 0, abstol, &m, w.data(), &zdummy, 1, ifail.data());
  if (info != 0) throw NumericError("dstevx failed, info=" + std::to_string(info));
  w.resize(static_cast<std::size_t>(m));
  return w;
}

namespace {

// Phase derivative for -y'' + (V - E) y = 0 written as y = r sin(psi),
// y' = r cos(psi).
inline double phase_rhs(double psi, double E, double V) {
  const double sn = std::sin(psi), cs = std::cos(psi);
  return cs * cs + (E - V) * sn * sn;
}

}  // namespace

long long shooting_count_below(const ModelSpec& model,
                               const DisorderSample& sample, double l, double E,
                               int steps_per_unit) {
  if (model.is_discrete())
    throw ConfigError("shooting count applies to continuum families");
  if (steps_per_unit < 1) throw ConfigError("steps_per_unit must be >= 1");
  // Integrate unit cell by unit cell so RK4 never straddles a potential jump.
  double psi = 0.0;
  double x = -l;
  const double end = l;
  while (x < end - 1e-12) {
    const double cell_end = std::min(end, std::floor(x + 1.0 + 1e-12));
    const double span = cell_end - x;
    const int steps = std::max(
        1, static_cast<int>(std::ceil(span * steps_per_unit - 1e-9)));
    const double dt = span / steps;
    for (int s = 0; s < steps; ++s) {
      const double x0 = x + s * dt;
      const double v0 = evaluate_potential(model, sample, x0);
      const double vm = evaluate_potential(model, sample, x0 + 0.5 * dt);
      const double v1 = evaluate_potential(
          model, sample, std::min(x0 + dt, end) - 1e-12);
      const double k1 = phase_rhs(psi, E, v0);
      const double k2 = phase_rhs(psi + 0.5 * dt * k1, E, vm);
      const double k3 = phase_rhs(psi + 0.5 * dt * k2, E, vm);
      const double k4 = phase_rhs(psi + dt * k3, E, v1);
      psi += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x = cell_end;
  }
  return static_cast<long long>(std::floor(psi / M_PI));
}

long long shooting_count_in_interval(const ModelSpec& model,
                                     const DisorderSample& sample, double l,
                                     double lo, double hi, int steps_per_unit) {
  if (lo > hi) throw ConfigError("shooting count: lo > hi");
  return shooting_count_below(model, sample, l, hi, steps_per_unit) -
         shooting_count_below(model, sample, l, lo, steps_per_unit);
}

DecayProfile localization_profile(const Spectrum& spec, int which) {
  const int col = spec.column_of(which);
  if (col < 0) throw ConfigError("eigenvector not available for that index");
  const Eigen::VectorXd phi = spec.vectors.col(col);
  const auto n = static_cast<std::size_t>(phi.size());
  if (n < 2) throw ConfigError("localization profile needs >= 2 sites");

  DecayProfile p;
  std::size_t peak = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(phi[static_cast<Eigen::Index>(i)]) >
        std::abs(phi[static_cast<Eigen::Index>(peak)]))
      peak = i;
  p.center_x0 = static_cast<long long>(peak);
  p.center_coord = spec.box.discrete
                       ? static_cast<double>(spec.box.first_site +
                                             static_cast<long long>(peak))
                       : -spec.box.l + (static_cast<double>(peak) + 1.0) * spec.box.h;

  const double amax = std::abs(phi[static_cast<Eigen::Index>(peak)]);
  if (!(amax > 0.0)) {
    p.degenerate = true;
    return p;
  }
  const std::size_t dmax = std::max(peak, n - 1 - peak);
  std::vector<double> raw(dmax + 1, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t d =
        i >= peak ? i - peak : peak - i;
    const double a = std::abs(phi[static_cast<Eigen::Index>(i)]);
    const double lg = a > 0.0 ? std::log(a / amax)
                              : -std::numeric_limits<double>::infinity();
    raw[d] = std::max(raw[d], lg);
  }
  // Monotone-envelope reduction: e(d) := max over d' >= d.
  p.log_envelope.assign(dmax + 1, 0.0);
  double run = -std::numeric_limits<double>::infinity();
  for (std::size_t d = dmax + 1; d-- > 0;) {
    run = std::max(run, raw[d]);
    p.log_envelope[d] = run;
  }

  // Fit log(-e) = log(rate) + xi * log(dist) over the decayed region.
  const double floor_log = std::log(1e-12 / amax);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  const double unit = spec.box.discrete ? 1.0 : spec.box.h;
  for (std::size_t d = 1; d <= dmax; ++d) {
    const double e = p.log_envelope[d];
    if (!(e < -0.5) || !(e > floor_log)) continue;
    const double X = std::log(static_cast<double>(d) * unit);
    const double Y = std::log(-e);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
    ++m;
  }
  if (m < 3) {
    p.degenerate = true;
    return p;
  }
  const double det = m * sxx - sx * sx;
  if (std::abs(det) < 1e-14) {
    p.degenerate = true;
    return p;
  }
  p.fitted_xi = (m * sxy - sx * sy) / det;
  p.fitted_rate = std::exp((sy * sxx - sx * sxy) / det);
  return p;
}

}  // namespace specstat
