#include "specstat/resultant.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "specstat/errors.hpp"

namespace specstat {

namespace {

constexpr double kDegenerateRel = 1e-13;

Poly padded(const Poly& a, std::size_t n) {
  Poly out = a;
  if (out.size() < n) out.resize(n, 0.0);
  return out;
}

// det of a 3x3 polynomial matrix by the diagonal rule.
Poly det3(const std::array<std::array<Poly, 3>, 3>& m) {
  Poly pos = poly_add(
      poly_add(poly_mul(m[0][0], poly_mul(m[1][1], m[2][2])),
               poly_mul(m[0][1], poly_mul(m[1][2], m[2][0]))),
      poly_mul(m[0][2], poly_mul(m[1][0], m[2][1])));
  Poly neg = poly_add(
      poly_add(poly_mul(m[0][2], poly_mul(m[1][1], m[2][0])),
               poly_mul(m[0][1], poly_mul(m[1][0], m[2][2]))),
      poly_mul(m[0][0], poly_mul(m[1][2], m[2][1])));
  return poly_sub(pos, neg);
}

struct QuadTriple {
  Poly c2, c1, c0;  // quadratic-in-t coefficient polynomials
  double max_abs() const {
    double m = 0.0;
    for (const Poly* p : {&c2, &c1, &c0})
      for (double v : *p) m = std::max(m, std::abs(v));
    return m;
  }
};

// Coefficient quadratics of || T (t_u, 1) ||^2 (1 + t_v^2) =
// || S (t_v, 1) ||^2 (1 + t_u^2), collected in powers of t_u.
QuadTriple stretch_triple(const Eigen::Matrix2d& t, const Eigen::Matrix2d& s) {
  const double n1 = t.col(0).squaredNorm();
  const double n2 = t.col(1).squaredNorm();
  const double cross = t.col(0).dot(t.col(1));
  // || S (x, 1) ||^2 as a polynomial in x.
  const Poly gauge = {s.col(1).squaredNorm(), 2.0 * s.col(0).dot(s.col(1)),
                      s.col(0).squaredNorm()};
  QuadTriple out;
  out.c2 = {n1 - gauge[0], -gauge[1], n1 - gauge[2]};
  out.c1 = {2.0 * cross, 0.0, 2.0 * cross};
  out.c0 = {n2 - gauge[0], -gauge[1], n2 - gauge[2]};
  return out;
}

}  // namespace

Poly poly_add(const Poly& a, const Poly& b) {
  Poly out = padded(a, b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Poly poly_sub(const Poly& a, const Poly& b) {
  Poly out = padded(a, b.size());
  for (std::size_t i = 0; i < b.size(); ++i) out[i] -= b[i];
  return out;
}

Poly poly_mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Poly poly_scale(const Poly& a, double s) {
  Poly out = a;
  for (double& v : out) v *= s;
  return out;
}

double poly_eval(const Poly& a, double t) {
  double acc = 0.0;
  for (std::size_t i = a.size(); i-- > 0;) acc = acc * t + a[i];
  return acc;
}

Poly poly_trim(const Poly& a, double tol) {
  Poly out = a;
  while (!out.empty() && std::abs(out.back()) <= tol) out.pop_back();
  return out;
}

Poly sylvester_resultant(const Poly& p2, const Poly& p1, const Poly& p0,
                         const Poly& q2, const Poly& q1, const Poly& q0) {
  const Poly zero;
  // Expansion along the first row (p2, p1, p0, 0).
  std::array<std::array<Poly, 3>, 3> m00 = {
      {{p2, p1, p0}, {q1, q0, zero}, {q2, q1, q0}}};
  std::array<std::array<Poly, 3>, 3> m01 = {
      {{zero, p1, p0}, {q2, q0, zero}, {zero, q1, q0}}};
  std::array<std::array<Poly, 3>, 3> m02 = {
      {{zero, p2, p0}, {q2, q1, zero}, {zero, q2, q0}}};
  Poly det = poly_sub(poly_mul(p2, det3(m00)), poly_mul(p1, det3(m01)));
  det = poly_add(det, poly_mul(p0, det3(m02)));
  return det;
}

double ResultantCoeffs::eval(double t) const {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * t + c[i];
  return acc;
}

ResultantCoeffs mirror(const ResultantCoeffs& r) {
  ResultantCoeffs out = r;
  std::reverse(out.c.begin(), out.c.end());
  out.mirrored = !r.mirrored;
  return out;
}

ResultantCoeffs resultant_pair(const Eigen::Matrix2d& plus_f,
                               const Eigen::Matrix2d& minus_f,
                               const Eigen::Matrix2d& plus_g,
                               const Eigen::Matrix2d& minus_g) {
  double scale = 0.0;
  for (const Eigen::Matrix2d* m : {&plus_f, &minus_f, &plus_g, &minus_g}) {
    if (!m->allFinite())
      throw NumericError("resultant_pair: non-finite frame entries");
    scale = std::max(scale, m->cwiseAbs().maxCoeff());
  }

  QuadTriple p = stretch_triple(plus_f, plus_g);
  QuadTriple q = stretch_triple(minus_f, minus_g);
  Poly res = sylvester_resultant(p.c2, p.c1, p.c0, q.c2, q.c1, q.c0);

  ResultantCoeffs out;
  out.scale = scale;
  const double coeff_scale = std::max(1.0, scale * scale);
  out.degenerate = p.max_abs() <= kDegenerateRel * coeff_scale &&
                   q.max_abs() <= kDegenerateRel * coeff_scale;
  for (std::size_t i = 0; i < res.size() && i < out.c.size(); ++i)
    out.c[i] = res[i];
  return out;
}

ResultantCoeffs resultant_pair(const TransferMatrix& plus_f,
                               const TransferMatrix& minus_f,
                               const TransferMatrix& plus_g,
                               const TransferMatrix& minus_g) {
  return resultant_pair(plus_f.m, minus_f.m, plus_g.m, minus_g.m);
}

Eigen::Matrix4d LeadingBlock::interleaved() const {
  Eigen::Matrix4d a;
  a << delta1, 0.0, delta3, 0.0,            //
      pi_plus, delta1, pi_minus, delta3,    //
      delta2, pi_plus, delta4, pi_minus,    //
      0.0, delta2, 0.0, delta4;
  return a;
}

LeadingBlock leading_block(const Eigen::Matrix2d& plus_f,
                           const Eigen::Matrix2d& minus_f,
                           const Eigen::Matrix2d& plus_g,
                           const Eigen::Matrix2d& minus_g) {
  LeadingBlock blk;
  blk.delta1 = plus_f.col(0).squaredNorm() - plus_g.col(0).squaredNorm();
  blk.delta2 = plus_f.col(1).squaredNorm() - plus_g.col(0).squaredNorm();
  blk.delta3 = minus_f.col(0).squaredNorm() - minus_g.col(0).squaredNorm();
  blk.delta4 = minus_f.col(1).squaredNorm() - minus_g.col(0).squaredNorm();
  blk.pi_plus = plus_f.col(0).dot(plus_f.col(1));
  blk.pi_minus = minus_f.col(0).dot(minus_f.col(1));
  return blk;
}

double det_a_generic(const LeadingBlock& blk) {
  return blk.interleaved().determinant();
}

double det_a_closed_form(const LeadingBlock& blk) {
  const double cross1 = blk.pi_plus * blk.delta3 - blk.pi_minus * blk.delta1;
  const double cross2 = blk.pi_plus * blk.delta4 - blk.pi_minus * blk.delta2;
  const double diag = blk.delta1 * blk.delta4 - blk.delta2 * blk.delta3;
  return cross1 * cross2 + diag * diag;
}

RootProximity root_proximity(const ResultantCoeffs& coeffs, double t,
                             double delta, double eps) {
  if (!(delta > 0.0))
    throw ConfigError("root_proximity: coefficient floor must be positive");
  int degree = -1;
  for (int i = static_cast<int>(coeffs.c.size()) - 1; i >= 0; --i) {
    if (std::abs(coeffs.c[static_cast<std::size_t>(i)]) >= delta) {
      degree = i;
      break;
    }
  }
  if (degree < 0)
    throw ConfigError(
        "root_proximity: not applicable (no coefficient reaches the floor)");
  if (degree == 0)
    throw ConfigError(
        "root_proximity: not applicable (effectively constant, no roots)");
  const double value = std::abs(coeffs.eval(t));
  if (!(value <= eps))
    throw ConfigError("root_proximity: |R(t)| = " + std::to_string(value) +
                      " exceeds the value bound " + std::to_string(eps));

  const double lead = coeffs.c[static_cast<std::size_t>(degree)];
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < degree; ++i)
    companion(i, degree - 1) = -coeffs.c[static_cast<std::size_t>(i)] / lead;

  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion);
  if (solver.info() != Eigen::Success)
    throw NumericError("root_proximity: companion eigensolver failed");

  RootProximity out;
  out.degree = degree;
  out.bound = std::pow(eps / delta, 1.0 / static_cast<double>(degree));
  out.distance = std::numeric_limits<double>::infinity();
  for (int i = 0; i < degree; ++i) {
    std::complex<double> z = solver.eigenvalues()(i);
    out.roots.push_back(z);
    out.root_angles.push_back(std::atan(z.real()));
    out.distance = std::min(out.distance, std::abs(t - z.real()));
  }
  return out;
}

}  // namespace specstat
