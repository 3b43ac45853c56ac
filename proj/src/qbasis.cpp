#include "specstat/qbasis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "specstat/errors.hpp"

namespace specstat {
namespace {

constexpr double kDegenerateNorm = 1e-13;
constexpr double kOrthoTol = 1e-10;
constexpr double kEndpointCauchy = 1e-11;
constexpr int kStepsPerUnit = 1000;
constexpr int kMaxStepsPerUnit = 16000;
constexpr double kNudge = 1e-12;

double node_coord(long long i, long long K, double radius) {
  // (i - K) * radius / K lands exactly on +-radius at the ends.
  return (static_cast<double>(i - K) * radius) / static_cast<double>(K);
}

std::vector<double> quad_weights(QuadRule rule, std::size_t n, double h) {
  std::vector<double> w(n, 0.0);
  if (rule == QuadRule::Trapezoid) {
    for (std::size_t i = 0; i < n; ++i) w[i] = h;
    w.front() = 0.5 * h;
    w.back() = 0.5 * h;
    return w;
  }
  if (n % 2 == 0)
    throw ConfigError("q_inner: Simpson rule needs an odd node count, got " +
                      std::to_string(n));
  for (std::size_t i = 0; i < n; ++i)
    w[i] = (i == 0 || i + 1 == n) ? h / 3.0 : (i % 2 == 1 ? 4.0 * h / 3.0 : 2.0 * h / 3.0);
  return w;
}

// One RK4 step of (y, y') for y'' = (V - E) y, both fundamental columns at
// once.  Stage potentials are nudged into the open step so one-sided limits
// of a discontinuous V are read from the correct side.
struct PairState {
  double y1, p1, y2, p2;
};

template <typename VFn>
void rk4_step(PairState& s, double x0, double dt, double energy, VFn&& V) {
  const double in = dt > 0.0 ? kNudge : -kNudge;
  const double wa = V(x0 + in) - energy;
  const double wm = V(x0 + 0.5 * dt) - energy;
  const double wb = V(x0 + dt - in) - energy;
  auto advance = [&](double y, double p) {
    const double k1y = p, k1p = wa * y;
    const double k2y = p + 0.5 * dt * k1p, k2p = wm * (y + 0.5 * dt * k1y);
    const double k3y = p + 0.5 * dt * k2p, k3p = wm * (y + 0.5 * dt * k2y);
    const double k4y = p + dt * k3p, k4p = wb * (y + dt * k3y);
    return std::pair<double, double>{
        y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)};
  };
  auto [y1, p1] = advance(s.y1, s.p1);
  auto [y2, p2] = advance(s.y2, s.p2);
  s = {y1, p1, y2, p2};
}

struct FundamentalRun {
  long long K = 0;
  double h = 0.0;
  // Node i = 0..2K holds x = (i - K) h; psi has psi(0) = 1, psi'(0) = 0 and
  // phi has phi(0) = 0, phi'(0) = 1 at the anchor node i = K.
  std::vector<double> psi, psip, phi, phip;
};

template <typename VFn>
FundamentalRun integrate_fundamental(double radius, int steps_per_unit,
                                     double energy, VFn&& V) {
  FundamentalRun run;
  run.K = std::llround(radius * steps_per_unit);
  if (run.K < 1 || std::abs(radius * steps_per_unit - static_cast<double>(run.K)) > 1e-9)
    throw ConfigError("cell radius is not resolved by the integration step");
  const long long n = 2 * run.K + 1;
  run.h = radius / static_cast<double>(run.K);
  run.psi.assign(n, 0.0);
  run.psip.assign(n, 0.0);
  run.phi.assign(n, 0.0);
  run.phip.assign(n, 0.0);
  auto put = [&](long long i, const PairState& s) {
    run.psi[i] = s.y1;
    run.psip[i] = s.p1;
    run.phi[i] = s.y2;
    run.phip[i] = s.p2;
  };
  PairState s{1.0, 0.0, 0.0, 1.0};
  put(run.K, s);
  for (long long i = run.K; i < 2 * run.K; ++i) {
    const double x0 = node_coord(i, run.K, radius);
    const double x1 = node_coord(i + 1, run.K, radius);
    rk4_step(s, x0, x1 - x0, energy, V);
    put(i + 1, s);
  }
  s = {1.0, 0.0, 0.0, 1.0};
  for (long long i = run.K; i > 0; --i) {
    const double x0 = node_coord(i, run.K, radius);
    const double x1 = node_coord(i - 1, run.K, radius);
    rk4_step(s, x0, x1 - x0, energy, V);
    put(i - 1, s);
  }
  return run;
}

double endpoint_gap(const FundamentalRun& a, const FundamentalRun& b) {
  double m = 0.0;
  for (long long i : {0LL, 2 * a.K}) {
    const long long j = (i == 0) ? 0 : 2 * b.K;
    m = std::max(m, std::abs(a.psi[i] - b.psi[j]));
    m = std::max(m, std::abs(a.psip[i] - b.psip[j]));
    m = std::max(m, std::abs(a.phi[i] - b.phi[j]));
    m = std::max(m, std::abs(a.phip[i] - b.phip[j]));
  }
  return m;
}

// Base resolution, rounded up so the alloy bump's table nodes (where V has
// kinks) land exactly on integration nodes; each step then sees a smooth
// right-hand side and the integrator keeps its full order.
int base_steps_per_unit(const ModelSpec& model) {
  int align = 1;
  if (model.family == Family::ContinuumAlloy && model.q.val.size() >= 2) {
    const double per_unit = 1.0 / model.q.step();
    const auto r = static_cast<int>(std::llround(per_unit));
    if (r >= 1 && r <= 4000 && std::abs(per_unit - r) < 1e-6 * per_unit)
      align = r;
  }
  return ((kStepsPerUnit + align - 1) / align) * align;
}

}  // namespace

QForm continuum_form(SampledProfile weight, QuadRule rule) {
  QForm f;
  f.discrete = false;
  f.rule = rule;
  f.weight = std::move(weight);
  return f;
}

QForm discrete_form(std::vector<double> a) {
  QForm f;
  f.discrete = true;
  f.a = std::move(a);
  return f;
}

QForm model_form(const ModelSpec& model, QuadRule rule) {
  switch (model.family) {
    case Family::SimpleContinuum: {
      SampledProfile unit;
      unit.lo = -0.5;
      unit.hi = 0.5;
      unit.val = {1.0, 1.0};
      return continuum_form(unit, rule);
    }
    case Family::ContinuumAlloy:
      return continuum_form(model.q, rule);
    case Family::Multimer:
      return discrete_form(model.multimer_weights_a);
    case Family::DiscreteAlloy:
      break;
  }
  throw ConfigError("model_form: the single-site discrete family has no cell form");
}

double q_inner(const QForm& form, const SampledProfile& f,
               const SampledProfile& g) {
  if (form.discrete)
    throw ConfigError("q_inner: discrete form applied to sampled functions");
  if (f.val.size() < 2)
    throw ConfigError("q_inner: sampled function needs at least two nodes");
  if (f.val.size() != g.val.size() || f.lo != g.lo || f.hi != g.hi)
    throw ConfigError("q_inner: sampled grids differ (shape mismatch)");
  const std::size_t n = f.val.size();
  const double h = (f.hi - f.lo) / static_cast<double>(n - 1);
  const std::vector<double> w = quad_weights(form.rule, n, h);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x =
        f.lo + (static_cast<double>(i) * (f.hi - f.lo)) / static_cast<double>(n - 1);
    acc += w[i] * f.val[i] * g.val[i] * form.weight(x);
  }
  return acc;
}

double q_inner(const QForm& form, const std::vector<double>& f,
               const std::vector<double>& g) {
  if (!form.discrete)
    throw ConfigError("q_inner: continuum form applied to site vectors");
  if (f.size() != form.a.size() || g.size() != form.a.size())
    throw ConfigError("q_inner: vector length " + std::to_string(f.size()) +
                      "/" + std::to_string(g.size()) +
                      " does not match the weight length " +
                      std::to_string(form.a.size()));
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) acc += form.a[i] * f[i] * g[i];
  return acc;
}

double CellBasis::eval(const std::vector<double>& comp, double x_local) const {
  if (comp.size() != x.size() || x.size() < 2)
    throw ConfigError("CellBasis::eval: component does not match the grid");
  if (x_local <= x.front()) return comp.front();
  if (x_local >= x.back()) return comp.back();
  const double u = (x_local - x.front()) / step;
  auto i = static_cast<std::size_t>(u);
  if (i >= comp.size() - 1) return comp.back();
  const double frac = u - static_cast<double>(i);
  return comp[i] * (1.0 - frac) + comp[i + 1] * frac;
}

double cell_radius(const ModelSpec& model) {
  switch (model.family) {
    case Family::SimpleContinuum:
      return 0.5;
    case Family::ContinuumAlloy:
      return static_cast<double>(model.support_radius_N);
    default:
      throw ConfigError("cell_radius: continuum families only");
  }
}

double cell_anchor(const ModelSpec& model, long long cell) {
  // The piecewise-constant family has its site bump on [n, n+1), so the cell
  // of omega_n is centered at n + 1/2; the alloy bump is centered at n.
  const double off = model.family == Family::SimpleContinuum ? 0.5 : 0.0;
  return static_cast<double>(cell) + off;
}

CellBasis continuum_cell_basis(const ModelSpec& model,
                               const DisorderSample& sample, double energy,
                               long long cell) {
  if (!model.is_continuum())
    throw ConfigError("continuum_cell_basis: discrete family " +
                      family_name(model.family));
  CellBasis out;
  out.cell = cell;
  out.radius = cell_radius(model);
  out.anchor = cell_anchor(model, cell);
  out.energy = energy;
  auto V = [&](double x_local) {
    return evaluate_potential(model, sample, out.anchor + x_local);
  };

  const int base_spu = base_steps_per_unit(model);
  FundamentalRun prev = integrate_fundamental(out.radius, base_spu, energy, V);
  FundamentalRun fine;
  int spu = base_spu;
  const int max_spu = (kMaxStepsPerUnit / kStepsPerUnit) * base_spu;
  bool converged = false;
  while (spu < max_spu) {
    spu *= 2;
    fine = integrate_fundamental(out.radius, spu, energy, V);
    if (endpoint_gap(prev, fine) < kEndpointCauchy) {
      converged = true;
      break;
    }
    prev = std::move(fine);
  }
  if (!converged)
    throw NumericError(
        "continuum_cell_basis: endpoint data did not settle below " +
        std::to_string(kEndpointCauchy) + " down to step " +
        std::to_string(1.0 / spu));
  const FundamentalRun& run = fine;
  const long long K = run.K;
  const std::size_t n = run.psi.size();
  out.step = run.h;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.x[i] = node_coord(static_cast<long long>(i), K, out.radius);

  out.form = model_form(model, QuadRule::Simpson);
  const std::vector<double> w = quad_weights(QuadRule::Simpson, n, run.h);
  double s11 = 0.0, s12 = 0.0, s22 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wq = w[i] * out.form.weight(out.x[i]);
    s11 += wq * run.psi[i] * run.psi[i];
    s12 += wq * run.psi[i] * run.phi[i];
    s22 += wq * run.phi[i] * run.phi[i];
  }
  const double norm1 = std::sqrt(std::max(s11, 0.0));
  if (!(norm1 >= kDegenerateNorm))
    throw NumericError("continuum_cell_basis: degenerate basis, |Psi|_q = " +
                       std::to_string(norm1));
  const double c = s12 / norm1;  // <Phi, e1>_q
  const double rem2 = s22 - c * c;
  if (!(rem2 >= kDegenerateNorm * kDegenerateNorm))
    throw NumericError(
        "continuum_cell_basis: degenerate basis, residual norm^2 = " +
        std::to_string(rem2));
  const double norm2 = std::sqrt(rem2);
  const double alpha = s12 / s11;  // Phi - alpha Psi is q-orthogonal to Psi
  out.e1.resize(n);
  out.e1p.resize(n);
  out.e2.resize(n);
  out.e2p.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.e1[i] = run.psi[i] / norm1;
    out.e1p[i] = run.psip[i] / norm1;
    out.e2[i] = (run.phi[i] - alpha * run.psi[i]) / norm2;
    out.e2p[i] = (run.phip[i] - alpha * run.psip[i]) / norm2;
  }

  double r11 = 0.0, r12 = 0.0, r22 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wq = w[i] * out.form.weight(out.x[i]);
    r11 += wq * out.e1[i] * out.e1[i];
    r12 += wq * out.e1[i] * out.e2[i];
    r22 += wq * out.e2[i] * out.e2[i];
  }
  out.ortho_residual =
      std::abs(r12) + std::abs(r11 - 1.0) + std::abs(r22 - 1.0);
  if (out.ortho_residual > kOrthoTol)
    throw NumericError("continuum_cell_basis: orthonormality residual " +
                       std::to_string(out.ortho_residual));

  auto edge = [&](std::size_t i) {
    Eigen::Matrix2d m;
    m << out.e1[i], out.e2[i], out.e1p[i], out.e2p[i];
    return m;
  };
  out.edge_minus = edge(0);
  out.edge_plus = edge(n - 1);
  out.anchor_mat = edge(static_cast<std::size_t>(K));
  return out;
}

DiscreteCellBasis discrete_cell_basis(const ModelSpec& model,
                                      const DisorderSample& sample,
                                      double energy, long long cell) {
  if (model.family != Family::Multimer)
    throw ConfigError("discrete_cell_basis: Multimer family only, got " +
                      family_name(model.family));
  const int N = model.period_N();
  const double omega = sample.at(cell);
  auto b = [&](int m) {
    return model.b_at(static_cast<long long>(N) * cell + m);
  };
  const auto& a = model.multimer_weights_a;

  // Solution of the interior recursion with prescribed end values; the
  // unknowns are the N-2 interior entries.
  auto plan_solution = [&](double y_left, double y_right) {
    std::vector<double> y(static_cast<std::size_t>(N), 0.0);
    y.front() = y_left;
    y.back() = y_right;
    const int k = N - 2;
    if (k > 0) {
      Eigen::MatrixXd sys = Eigen::MatrixXd::Zero(k, k);
      Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
      for (int m = 1; m <= N - 2; ++m) {
        const int row = m - 1;
        sys(row, row) = a[static_cast<std::size_t>(m)] * omega - energy;
        if (m - 1 >= 1)
          sys(row, row - 1) = b(m);
        else
          rhs(row) -= b(m) * y_left;
        if (m + 1 <= N - 2)
          sys(row, row + 1) = b(m + 1);
        else
          rhs(row) -= b(m + 1) * y_right;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
      const Eigen::VectorXd sol = lu.solve(rhs);
      const double scale = sys.cwiseAbs().maxCoeff() * sol.cwiseAbs().maxCoeff() +
                           rhs.cwiseAbs().maxCoeff();
      if (!sol.allFinite() ||
          (sys * sol - rhs).cwiseAbs().maxCoeff() > 1e-9 * std::max(scale, 1.0))
        throw NumericError(
            "discrete_cell_basis: singular interior system for cell " +
            std::to_string(cell));
      for (int m = 1; m <= N - 2; ++m) y[static_cast<std::size_t>(m)] = sol(m - 1);
    }
    return y;
  };

  const std::vector<double> s1 = plan_solution(0.0, 1.0);
  const std::vector<double> s2 = plan_solution(1.0, 0.0);
  const QForm form = discrete_form(a);
  DiscreteCellBasis out;
  out.cell = cell;
  out.energy = energy;
  const double n1 = std::sqrt(q_inner(form, s1, s1));
  if (!(n1 >= kDegenerateNorm))
    throw NumericError("discrete_cell_basis: degenerate basis, |s1|_a = " +
                       std::to_string(n1));
  out.e1.resize(s1.size());
  for (std::size_t i = 0; i < s1.size(); ++i) out.e1[i] = s1[i] / n1;
  const double c = q_inner(form, s2, out.e1);
  std::vector<double> t2(s2.size());
  for (std::size_t i = 0; i < s2.size(); ++i) t2[i] = s2[i] - c * out.e1[i];
  const double n2 = std::sqrt(q_inner(form, t2, t2));
  if (!(n2 >= kDegenerateNorm))
    throw NumericError("discrete_cell_basis: degenerate basis, residual norm " +
                       std::to_string(n2));
  out.e2.resize(t2.size());
  for (std::size_t i = 0; i < t2.size(); ++i) out.e2[i] = t2[i] / n2;

  out.ortho_residual = std::abs(q_inner(form, out.e1, out.e2)) +
                       std::abs(q_inner(form, out.e1, out.e1) - 1.0) +
                       std::abs(q_inner(form, out.e2, out.e2) - 1.0);
  if (out.ortho_residual > kOrthoTol)
    throw NumericError("discrete_cell_basis: orthonormality residual " +
                       std::to_string(out.ortho_residual));

  const auto at = [&](int m) {
    return std::pair<double, double>{out.e1[static_cast<std::size_t>(m)],
                                     out.e2[static_cast<std::size_t>(m)]};
  };
  const auto [e1_1, e2_1] = at(1);
  const auto [e1_0, e2_0] = at(0);
  const auto [e1_t, e2_t] = at(N - 1);
  const auto [e1_s, e2_s] = at(N - 2);
  out.m_mat << e1_1, e2_1, e1_0, e2_0;
  out.n_mat << e1_t, e2_t, e1_s, e2_s;
  return out;
}

CellBasisSet make_cell_bases(const ModelSpec& model,
                             const DisorderSample& sample, double energy,
                             long long first_cell, long long last_cell) {
  if (last_cell < first_cell)
    throw ConfigError("make_cell_bases: empty cell range");
  CellBasisSet set;
  set.model = model;
  set.sample = sample;
  set.energy = energy;
  set.first_cell = first_cell;
  set.discrete = model.is_discrete();
  for (long long c = first_cell; c <= last_cell; ++c) {
    if (set.discrete)
      set.dcells.push_back(discrete_cell_basis(model, sample, energy, c));
    else
      set.cells.push_back(continuum_cell_basis(model, sample, energy, c));
  }
  return set;
}

}  // namespace specstat
