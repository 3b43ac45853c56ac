#include "specstat/transfer.hpp"

#include <cmath>
#include <string>

#include "specstat/errors.hpp"

namespace specstat {
namespace {

Eigen::Matrix2d invert2(const Eigen::Matrix2d& m, const char* what) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double scale = m.cwiseAbs().maxCoeff();
  if (!std::isfinite(det) || std::abs(det) <= 1e-14 * std::max(1.0, scale * scale))
    throw NumericError(std::string(what) + ": singular 2x2 matrix, det = " +
                       std::to_string(det));
  Eigen::Matrix2d inv;
  inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return inv / det;
}

const CellBasis& continuum_cell(const CellBasisSet& bases, long long j,
                                const char* what) {
  const long long idx = j - bases.first_cell;
  if (idx < 0 || idx >= static_cast<long long>(bases.cells.size()))
    throw ConfigError(std::string(what) + ": cell " + std::to_string(j) +
                      " outside the basis range [" +
                      std::to_string(bases.first_cell) + ", " +
                      std::to_string(bases.last_cell()) + "]");
  return bases.cells[static_cast<std::size_t>(idx)];
}

const DiscreteCellBasis& discrete_cell(const CellBasisSet& bases, long long j,
                                       const char* what) {
  const long long idx = j - bases.first_cell;
  if (idx < 0 || idx >= static_cast<long long>(bases.dcells.size()))
    throw ConfigError(std::string(what) + ": cell " + std::to_string(j) +
                      " outside the basis range [" +
                      std::to_string(bases.first_cell) + ", " +
                      std::to_string(bases.last_cell()) + "]");
  return bases.dcells[static_cast<std::size_t>(idx)];
}

}  // namespace

TransferMatrix one_step_transfer(const ModelSpec& model,
                                 const DisorderSample& sample, double energy,
                                 long long n, int m) {
  if (model.family != Family::Multimer)
    throw ConfigError("one_step_transfer: Multimer family only, got " +
                      family_name(model.family));
  const int N = model.period_N();
  if (m < 0 || m >= N)
    throw ConfigError("one_step_transfer: local index " + std::to_string(m) +
                      " outside [0, " + std::to_string(N) + ")");
  const long long site = static_cast<long long>(N) * n + m;
  const double b_lo = model.b_at(site);
  const double b_hi = model.b_at(site + 1);
  const double omega = sample.at(n);
  TransferMatrix out;
  out.provenance = Provenance::OneStep;
  out.energy = energy;
  out.cell = n;
  out.m << (energy - model.multimer_weights_a[static_cast<std::size_t>(m)] * omega) / b_hi,
      -b_lo / b_hi, 1.0, 0.0;
  return out;
}

TransferMatrix n_step_transfer(const ModelSpec& model,
                               const DisorderSample& sample, double energy,
                               long long n) {
  const int N = model.period_N();
  if (model.family != Family::Multimer)
    throw ConfigError("n_step_transfer: Multimer family only, got " +
                      family_name(model.family));
  TransferMatrix out;
  out.provenance = Provenance::NStep;
  out.energy = energy;
  out.cell = n;
  Eigen::Matrix2d acc = Eigen::Matrix2d::Identity();
  for (int m = 0; m < N; ++m)
    acc = one_step_transfer(model, sample, energy, n, m).m * acc;
  out.m = acc;
  return out;
}

TransferMatrix cell_connector(const CellBasisSet& bases, long long j) {
  if (!bases.discrete)
    throw ConfigError("cell_connector: discrete chains only");
  const int N = bases.model.period_N();
  TransferMatrix out;
  out.provenance = Provenance::NStep;
  out.energy = bases.energy;
  out.cell = j;
  out.m = one_step_transfer(bases.model, bases.sample, bases.energy, j + 1, 0).m *
          one_step_transfer(bases.model, bases.sample, bases.energy, j, N - 1).m;
  return out;
}

long long cell_stride(const ModelSpec& model) {
  switch (model.family) {
    case Family::Multimer:
    case Family::SimpleContinuum:
      return 1;
    case Family::ContinuumAlloy:
      return 2ll * model.support_radius_N;
    case Family::DiscreteAlloy:
      break;
  }
  throw ConfigError("cell_stride: the single-site discrete family has no cell chain");
}

TransferMatrix forward_cell_transfer(const CellBasisSet& bases, long long j) {
  TransferMatrix out;
  out.energy = bases.energy;
  out.cell = j;
  if (bases.discrete) {
    const DiscreteCellBasis& here = discrete_cell(bases, j, "forward_cell_transfer");
    const DiscreteCellBasis& next = discrete_cell(bases, j + 1, "forward_cell_transfer");
    out.provenance = Provenance::NStep;
    out.m = invert2(next.m_mat, "forward_cell_transfer") *
            cell_connector(bases, j).m * here.n_mat;
    return out;
  }
  const long long s = cell_stride(bases.model);
  const CellBasis& here = continuum_cell(bases, j, "forward_cell_transfer");
  const CellBasis& next = continuum_cell(bases, j + s, "forward_cell_transfer");
  out.provenance = Provenance::ContinuumInterval;
  out.m = invert2(next.edge_minus, "forward_cell_transfer") * here.edge_plus;
  return out;
}

TransferMatrix backward_cell_transfer(const CellBasisSet& bases, long long j) {
  TransferMatrix out;
  out.energy = bases.energy;
  out.cell = j;
  if (bases.discrete) {
    const DiscreteCellBasis& here = discrete_cell(bases, j, "backward_cell_transfer");
    const DiscreteCellBasis& prev = discrete_cell(bases, j - 1, "backward_cell_transfer");
    out.provenance = Provenance::NStep;
    out.m = invert2(prev.n_mat, "backward_cell_transfer") *
            invert2(cell_connector(bases, j - 1).m, "backward_cell_transfer") *
            here.m_mat;
    return out;
  }
  const long long s = cell_stride(bases.model);
  const CellBasis& here = continuum_cell(bases, j, "backward_cell_transfer");
  const CellBasis& prev = continuum_cell(bases, j - s, "backward_cell_transfer");
  out.provenance = Provenance::ContinuumInterval;
  out.m = invert2(prev.edge_plus, "backward_cell_transfer") * here.edge_minus;
  return out;
}

ProjectiveAngle projective_angle(double raw) {
  if (!std::isfinite(raw))
    throw NumericError("projective_angle: non-finite input");
  const double pi = std::acos(-1.0);
  double t = std::fmod(raw, pi);
  if (t < 0.0) t += pi;
  if (t >= pi) t = 0.0;
  return {t};
}

double torus_distance(ProjectiveAngle a, ProjectiveAngle b) {
  const double pi = std::acos(-1.0);
  const double d = std::abs(projective_angle(a.theta).theta -
                            projective_angle(b.theta).theta);
  return std::min(d, pi - d);
}

ProjectiveAngle direction_map(const Eigen::Matrix2d& t, ProjectiveAngle theta) {
  const double th = projective_angle(theta.theta).theta;
  double y0 = t(0, 0) * std::sin(th) + t(0, 1) * std::cos(th);
  double y1 = t(1, 0) * std::sin(th) + t(1, 1) * std::cos(th);
  const double mag = std::max(std::abs(y0), std::abs(y1));
  if (!(mag > 0.0) || !std::isfinite(mag))
    throw NumericError("direction_map: image vector vanished");
  // Exact power-of-two normalization keeps the map invariant under scaling
  // of t and guards against overflow of long products.
  const double s = std::ldexp(1.0, -std::ilogb(mag));
  y0 *= s;
  y1 *= s;
  if (y1 < 0.0 || (y1 == 0.0 && y0 < 0.0)) {
    y0 = -y0;
    y1 = -y1;
  }
  double phi = std::atan2(y0, y1);
  if (phi < 0.0) phi += std::acos(-1.0);
  return projective_angle(phi);
}

ProjectiveAngle direction_map(const TransferMatrix& t, ProjectiveAngle theta) {
  return direction_map(t.m, theta);
}

ProjectiveAngle angle_coordinate_change(ProjectiveAngle theta,
                                        const Eigen::Matrix2d& frame) {
  (void)invert2(frame, "angle_coordinate_change");
  return direction_map(frame, theta);
}

TransferMatrix direction_transport(const SampledProfile& w, double x1,
                                   double x2) {
  if (!(x2 > x1))
    throw ConfigError("direction_transport: need x1 < x2");
  if (w.val.size() < 2)
    throw ConfigError("direction_transport: potential table needs >= 2 nodes");
  if (x1 < w.lo - 1e-9 || x2 > w.hi + 1e-9)
    throw ConfigError("direction_transport: potential table does not cover [" +
                      std::to_string(x1) + ", " + std::to_string(x2) + "]");
  // Node arithmetic can drift past the table edge by an ulp, where the
  // profile would read as zero; clamp stage points into the table.
  auto weight = [&](double x) {
    return w(std::min(std::max(x, w.lo), w.hi));
  };

  auto run = [&](long long nsteps) {
    // Columns (y, y') of y'' = W y with initial frames (1,0) and (0,1).
    double a0 = 1.0, a1 = 0.0, b0 = 0.0, b1 = 1.0;
    for (long long i = 0; i < nsteps; ++i) {
      const double xa = x1 + static_cast<double>(i) * (x2 - x1) / static_cast<double>(nsteps);
      const double xb = (i + 1 == nsteps)
                            ? x2
                            : x1 + static_cast<double>(i + 1) * (x2 - x1) /
                                       static_cast<double>(nsteps);
      const double dt = xb - xa;
      const double wa = weight(xa);
      const double wm = weight(xa + 0.5 * dt);
      const double wb = weight(xb);
      auto advance = [&](double y, double p) {
        const double k1y = p, k1p = wa * y;
        const double k2y = p + 0.5 * dt * k1p, k2p = wm * (y + 0.5 * dt * k1y);
        const double k3y = p + 0.5 * dt * k2p, k3p = wm * (y + 0.5 * dt * k2y);
        const double k4y = p + dt * k3p, k4p = wb * (y + dt * k3y);
        return std::pair<double, double>{
            y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
            p + dt / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)};
      };
      std::tie(a0, a1) = advance(a0, a1);
      std::tie(b0, b1) = advance(b0, b1);
    }
    Eigen::Matrix2d h2;
    h2 << a0, b0, a1, b1;
    return h2;
  };

  const auto base = static_cast<long long>(
      std::ceil((x2 - x1) / 1e-3 - 1e-9));
  Eigen::Matrix2d prev = run(std::max(base, 1ll));
  long long n = std::max(base, 1ll);
  const long long cap = 16 * std::max(base, 1ll);
  while (n < cap) {
    n *= 2;
    const Eigen::Matrix2d cur = run(n);
    const double scale = std::max(1.0, cur.cwiseAbs().maxCoeff());
    const double det = cur(0, 0) * cur(1, 1) - cur(0, 1) * cur(1, 0);
    if ((cur - prev).cwiseAbs().maxCoeff() < 1e-9 * scale &&
        std::abs(det - 1.0) < 1e-10) {
      TransferMatrix out;
      out.m = cur;
      out.provenance = Provenance::ContinuumInterval;
      out.energy = 0.0;
      out.cell = 0;
      return out;
    }
    prev = cur;
  }
  throw NumericError(
      "direction_transport: fundamental matrix did not settle; last step " +
      std::to_string((x2 - x1) / static_cast<double>(n)));
}

}  // namespace specstat
