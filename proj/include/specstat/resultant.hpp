#pragma once
#include <array>
#include <complex>
#include <vector>

#include "specstat/transfer.hpp"

namespace specstat {

// Resultant elimination for the two-energy direction-matching conditions.
//
// For frames T_F^+/T_F^- and T_G^+/T_G^-, requiring equal stretch of the
// direction vectors (t_u, 1) and (t_v, 1),
//   || T_F^pm (t_u, 1) ||^2 (1 + t_v^2)  =  || T_G^pm (t_v, 1) ||^2 (1 + t_u^2),
// gives two quadratics in t_u whose coefficients are quadratics in t_v:
//   R1 = t_u^2 p2(t_v) + t_u p1(t_v) + p0(t_v)   (plus frames)
//   R2 = t_u^2 q2(t_v) + t_u q1(t_v) + q0(t_v)   (minus frames).
// Eliminating t_u through the 4x4 Sylvester determinant yields a single
// polynomial of degree at most 8 in t_v whose vanishing is necessary for a
// simultaneous solution.

// Dense univariate polynomials, coefficients by ascending power.
using Poly = std::vector<double>;

Poly poly_add(const Poly& a, const Poly& b);
Poly poly_sub(const Poly& a, const Poly& b);
Poly poly_mul(const Poly& a, const Poly& b);
Poly poly_scale(const Poly& a, double s);
double poly_eval(const Poly& a, double t);      // Horner
Poly poly_trim(const Poly& a, double tol = 0.0);

// Resultant of two quadratics-with-polynomial-coefficients, computed by
// cofactor expansion of the 4x4 Sylvester matrix
//   [ p2 p1 p0  0 ]
//   [  0 p2 p1 p0 ]
//   [ q2 q1 q0  0 ]
//   [  0 q2 q1 q0 ].
Poly sylvester_resultant(const Poly& p2, const Poly& p1, const Poly& p0,
                         const Poly& q2, const Poly& q1, const Poly& q0);

struct ResultantCoeffs {
  std::array<double, 9> c{};  // c[k] multiplies t^k
  bool mirrored = false;      // true after an odd number of mirror() calls
  bool degenerate = false;    // both quadratic families vanished identically
  double scale = 0.0;         // magnitude reference from the input frames

  double eval(double t) const;
};

// Exact coefficient reversal: mirror(R).eval(t) == t^8 R.eval(1/t).
ResultantCoeffs mirror(const ResultantCoeffs& r);

ResultantCoeffs resultant_pair(const TransferMatrix& plus_f,
                               const TransferMatrix& minus_f,
                               const TransferMatrix& plus_g,
                               const TransferMatrix& minus_g);
ResultantCoeffs resultant_pair(const Eigen::Matrix2d& plus_f,
                               const Eigen::Matrix2d& minus_f,
                               const Eigen::Matrix2d& plus_g,
                               const Eigen::Matrix2d& minus_g);

// Leading (t_v^2) data of the six coefficient quadratics.  With
//   delta1 = ||T_F^+ (1,0)||^2 - ||T_G^+ (1,0)||^2
//   delta2 = ||T_F^+ (0,1)||^2 - ||T_G^+ (1,0)||^2
//   pi_plus = < T_F^+ (1,0), T_F^+ (0,1) >
// and delta3, delta4, pi_minus the analogues built from the minus frames,
// the interleaved layout
//   A = [ d1  0   d3  0  ]
//       [ pi+ d1  pi- d3 ]
//       [ d2  pi+ d4  pi- ]
//       [ 0   d2  0   d4 ]
// satisfies det A = (pi+ d3 - pi- d1)(pi+ d4 - pi- d2) + (d1 d4 - d2 d3)^2.
struct LeadingBlock {
  double delta1 = 0.0, delta2 = 0.0, delta3 = 0.0, delta4 = 0.0;
  double pi_plus = 0.0, pi_minus = 0.0;

  Eigen::Matrix4d interleaved() const;
};

LeadingBlock leading_block(const Eigen::Matrix2d& plus_f,
                           const Eigen::Matrix2d& minus_f,
                           const Eigen::Matrix2d& plus_g,
                           const Eigen::Matrix2d& minus_g);

double det_a_generic(const LeadingBlock& blk);      // direct 4x4 determinant
double det_a_closed_form(const LeadingBlock& blk);  // product-plus-square identity

struct RootProximity {
  double distance = 0.0;  // min over roots z of |t - Re z|
  double bound = 0.0;     // (eps / delta)^(1 / degree)
  int degree = 0;         // effective degree used for the companion matrix
  std::vector<std::complex<double>> roots;
  std::vector<double> root_angles;  // atan(Re z) per root
};

// Effective degree: the largest k with |c_k| >= delta (coefficients above it
// are below the floor and dropped).  Preconditions: effective degree >= 1 and
// |R(t)| <= eps; then distance <= bound is guaranteed.
RootProximity root_proximity(const ResultantCoeffs& coeffs, double t,
                             double delta, double eps);

}  // namespace specstat
