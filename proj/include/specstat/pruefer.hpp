#pragma once
#include <vector>

#include "specstat/qbasis.hpp"
#include "specstat/spectral.hpp"
#include "specstat/transfer.hpp"

namespace specstat {

// Polar bookkeeping of an eigenvector across the cell decomposition.
//
// On each cell the eigenvector splits as A e1 + B e2 + eps, with (A, B) read
// off at the cell's anchor pair, so eps vanishes there and stays small when
// the basis energy matches the eigenvalue.  With the gradient mass
//   script-N = |grad E|_1 = sum over cells of (A^2 + B^2) + xi,
// the normalized coefficients (C, D) = (A, B) / sqrt(script-N) satisfy
// sum (C^2 + D^2) = 1 - xi / script-N, and each cell gets polar data
// (r, theta) with (C, D) = r (sin theta, cos theta) plus the reduced
// tangent t = sgn(tan theta) min(|tan theta|, |cot theta|), |t| <= 1.

struct PrueferCell {
  long long cell = 0;
  double a_coeff = 0.0;
  double b_coeff = 0.0;
  double c_norm = 0.0;   // a_coeff / sqrt(script-N)
  double d_norm = 0.0;   // b_coeff / sqrt(script-N)
  double r = 0.0;        // hypot(c_norm, d_norm)
  double theta = 0.0;    // full angle of (C, D) in [0, 2 pi)
  double t = 0.0;        // reduced tangent, |t| <= 1
  double residual = 0.0; // max |eps| over the cell
};

struct PrueferTrace {
  std::vector<PrueferCell> cells;
  double normalization = 0.0;  // script-N
  double xi = 0.0;             // script-N - sum (A^2 + B^2)
  int which = 0;
  double energy = 0.0;
  bool discrete = true;
};

// Direction class of a cell's angle on the half-turn circle.
ProjectiveAngle pruefer_direction(const PrueferCell& cell);

// Requires the eigenvector of `which` to be stored in `spec`; bases must be
// built for the same model/sample and every basis cell must lie inside the
// box (continuum anchors on grid nodes, two nodes of stencil margin).
PrueferTrace pruefer_extract(const Spectrum& spec, int which,
                             const CellBasisSet& bases);

}  // namespace specstat
