#pragma once
#include <Eigen/Dense>

#include "specstat/models.hpp"
#include "specstat/qbasis.hpp"

namespace specstat {

// Transfer matrices and projective direction dynamics.
//
// Discrete (Multimer) convention: the box kernel carries couplings -b; the
// recursion propagated here,
//   b_{s+1} y(s+1) + b_s y(s-1) + (V(s) - E) y(s) = 0,
// carries +b.  The two are conjugate under flipping the sign of every other
// component, y(s) = (-1)^s u(s), which maps box eigenvectors to recursion
// solutions at the same eigenvalue.  The one-step matrix at site s = N n + m,
//   P = (1 / b_{s+1}) [[E - a_m omega_n, -b_s], [b_{s+1}, 0]],
// sends (y(s), y(s-1)) to (y(s+1), y(s)); its determinant is b_s / b_{s+1}.
//
// Cell transfer: with the per-cell orthonormal bases of qbasis.hpp, a
// solution restricted to cell j has coordinates U(j), read off at the cell's
// anchor pair; T+ maps U(j) to the coordinates in the next cell along the
// chain, T- to the previous one, and T- is the exact matrix inverse of T+.

enum class Provenance { OneStep, NStep, ContinuumInterval };

struct TransferMatrix {
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  Provenance provenance = Provenance::OneStep;
  double energy = 0.0;
  long long cell = 0;
};

TransferMatrix one_step_transfer(const ModelSpec& model,
                                 const DisorderSample& sample, double energy,
                                 long long n, int m);
// Ordered product of the N one-step matrices of cell n; maps
// (y(Nn), y(Nn-1)) to (y(Nn+N), y(Nn+N-1)).
TransferMatrix n_step_transfer(const ModelSpec& model,
                               const DisorderSample& sample, double energy,
                               long long n);

// Connector across the seam between cells j and j+1 (discrete chains):
// the one-step matrices at local indices N-1 of cell j and 0 of cell j+1.
TransferMatrix cell_connector(const CellBasisSet& bases, long long j);

// Index distance between consecutive cells of the transfer chain.
long long cell_stride(const ModelSpec& model);

// U(j) -> U(j + stride) and U(j) -> U(j - stride) in basis coordinates.
TransferMatrix forward_cell_transfer(const CellBasisSet& bases, long long j);
TransferMatrix backward_cell_transfer(const CellBasisSet& bases, long long j);

// Direction of a nonzero plane vector (p, q), as the angle of
// (sin theta, cos theta) parallel to it; lives on the half-turn circle.
struct ProjectiveAngle {
  double theta = 0.0;  // representative in [0, pi)
};

ProjectiveAngle projective_angle(double raw);
double torus_distance(ProjectiveAngle a, ProjectiveAngle b);

// Angle of T (sin theta, cos theta); scale-invariant in T by construction.
ProjectiveAngle direction_map(const Eigen::Matrix2d& t, ProjectiveAngle theta);
ProjectiveAngle direction_map(const TransferMatrix& t, ProjectiveAngle theta);

// Direction in a new frame: the angle of frame * (sin theta, cos theta).
// The frame must be invertible.
ProjectiveAngle angle_coordinate_change(ProjectiveAngle theta,
                                        const Eigen::Matrix2d& frame);

// Fundamental matrix of -y'' + W y = 0 across [x1, x2]: columns are the
// solutions with (value, derivative) = (1, 0) and (0, 1) at x1, rows are
// (value, derivative) at x2.  Unimodular; the induced map on directions is
// direction_map of the result.
TransferMatrix direction_transport(const SampledProfile& w, double x1,
                                   double x2);

}  // namespace specstat
