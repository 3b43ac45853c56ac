#include "specstat/pruefer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <string>

#include "specstat/errors.hpp"
#include "specstat/sensitivity.hpp"

namespace specstat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSingularTol = 1e-13;
constexpr double kAnchorSnapTol = 1e-6;  // in grid-step units

Eigen::Vector2d solve_anchor(const Eigen::Matrix2d& m, const Eigen::Vector2d& rhs,
                             long long cell) {
  double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  double scale = m.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > kSingularTol * std::max(1.0, scale * scale))) {
    throw NumericError("pruefer_extract: degenerate cell " +
                       std::to_string(cell) + " (singular anchor matrix)");
  }
  return Eigen::Vector2d(m(1, 1) * rhs(0) - m(0, 1) * rhs(1),
                         m(0, 0) * rhs(1) - m(1, 0) * rhs(0)) /
         det;
}

PrueferCell polar_fill(long long cell, double a, double b, double sqrt_norm,
                       double residual) {
  PrueferCell out;
  out.cell = cell;
  out.a_coeff = a;
  out.b_coeff = b;
  out.c_norm = a / sqrt_norm;
  out.d_norm = b / sqrt_norm;
  out.r = std::hypot(out.c_norm, out.d_norm);
  double theta = std::atan2(out.c_norm, out.d_norm);
  if (theta < 0.0) theta += kTwoPi;
  if (theta >= kTwoPi) theta = 0.0;
  out.theta = theta;
  if (out.r == 0.0) {
    out.t = 0.0;
  } else if (std::abs(out.c_norm) <= std::abs(out.d_norm)) {
    out.t = out.c_norm / out.d_norm;
  } else {
    out.t = out.d_norm / out.c_norm;
  }
  out.residual = residual;
  return out;
}

}  // namespace

ProjectiveAngle pruefer_direction(const PrueferCell& cell) {
  return projective_angle(cell.theta);
}

PrueferTrace pruefer_extract(const Spectrum& spec, int which,
                             const CellBasisSet& bases) {
  const ModelSpec& model = bases.model;
  if (spec.box.discrete != model.is_discrete()) {
    throw ConfigError(
        "pruefer_extract: basis family and spectrum box disagree on "
        "discreteness");
  }
  if (which < 0 || which >= static_cast<int>(spec.values.size())) {
    throw std::out_of_range("pruefer_extract: eigenvalue index " +
                            std::to_string(which) + " outside spectrum of " +
                            std::to_string(spec.values.size()));
  }
  int col = spec.column_of(which);
  if (col < 0) {
    throw ConfigError("pruefer_extract: eigenvector " + std::to_string(which) +
                      " is not stored in the spectrum");
  }

  GradientVector grad = hf_gradient(spec, which, model, bases.sample);
  if (!(grad.l1_norm > 0.0)) {
    throw NumericError("pruefer_extract: gradient mass vanished");
  }
  double sqrt_norm = std::sqrt(grad.l1_norm);

  PrueferTrace trace;
  trace.normalization = grad.l1_norm;
  trace.which = which;
  trace.energy = spec.values[static_cast<std::size_t>(which)];
  trace.discrete = spec.box.discrete;
  double coeff_mass = 0.0;

  const auto& v = spec.vectors;
  long long dim = static_cast<long long>(spec.box.dim);

  if (spec.box.discrete) {
    int period = model.period_N();
    long long first_site = spec.box.first_site;
    long long last_site = first_site + dim - 1;
    for (const DiscreteCellBasis& basis : bases.dcells) {
      long long s_lo = basis.cell * period;
      long long s_hi = s_lo + period - 1;
      if (s_lo < first_site || s_hi > last_site) {
        throw ConfigError("pruefer_extract: cell " + std::to_string(basis.cell) +
                          " spans sites outside the box");
      }
      // Conjugated eigenvector w(s) = (-1)^s u(s) obeys the cell recursion.
      auto w_at = [&](long long site) {
        double u = v(static_cast<Eigen::Index>(site - first_site), col);
        return (std::llabs(site) % 2 != 0) ? -u : u;
      };
      Eigen::Vector2d rhs(w_at(s_lo + 1), w_at(s_lo));
      Eigen::Vector2d ab = solve_anchor(basis.m_mat, rhs, basis.cell);
      double residual = 0.0;
      for (int m = 0; m < period; ++m) {
        double fit = ab(0) * basis.e1[static_cast<std::size_t>(m)] +
                     ab(1) * basis.e2[static_cast<std::size_t>(m)];
        residual = std::max(residual, std::abs(w_at(s_lo + m) - fit));
      }
      trace.cells.push_back(
          polar_fill(basis.cell, ab(0), ab(1), sqrt_norm, residual));
      coeff_mass += ab(0) * ab(0) + ab(1) * ab(1);
    }
  } else {
    double h = spec.box.h;
    double l = spec.box.l;
    double inv_scale = 1.0 / std::sqrt(h);  // grid l2 -> L2 normalization
    for (const CellBasis& basis : bases.cells) {
      // Anchor must sit on a grid node with two stencil neighbors inside.
      double node_pos = (basis.anchor + l) / h;
      long long k = std::llround(node_pos) - 1;
      if (std::abs(node_pos - std::llround(node_pos)) > kAnchorSnapTol) {
        throw ConfigError("pruefer_extract: cell " + std::to_string(basis.cell) +
                          " anchor is not a grid node");
      }
      if (k - 2 < 0 || k + 2 >= dim) {
        throw ConfigError("pruefer_extract: cell " + std::to_string(basis.cell) +
                          " anchor too close to the box boundary");
      }
      auto u_at = [&](long long i) {
        return v(static_cast<Eigen::Index>(i), col) * inv_scale;
      };
      double u0 = u_at(k);
      double u1 = (-u_at(k + 2) + 8.0 * u_at(k + 1) - 8.0 * u_at(k - 1) +
                   u_at(k - 2)) /
                  (12.0 * h);
      Eigen::Vector2d ab =
          solve_anchor(basis.anchor_mat, Eigen::Vector2d(u0, u1), basis.cell);
      double residual = 0.0;
      long long i_lo = static_cast<long long>(
          std::ceil((basis.anchor - basis.radius + l) / h - 1.0 - 1e-9));
      long long i_hi = static_cast<long long>(
          std::floor((basis.anchor + basis.radius + l) / h - 1.0 + 1e-9));
      i_lo = std::max<long long>(i_lo, 0);
      i_hi = std::min<long long>(i_hi, dim - 1);
      for (long long i = i_lo; i <= i_hi; ++i) {
        double x_local = -l + (static_cast<double>(i) + 1.0) * h - basis.anchor;
        double fit = ab(0) * basis.eval(basis.e1, x_local) +
                     ab(1) * basis.eval(basis.e2, x_local);
        residual = std::max(residual, std::abs(u_at(i) - fit));
      }
      trace.cells.push_back(
          polar_fill(basis.cell, ab(0), ab(1), sqrt_norm, residual));
      coeff_mass += ab(0) * ab(0) + ab(1) * ab(1);
    }
  }

  trace.xi = trace.normalization - coeff_mass;
  return trace;
}

}  // namespace specstat
