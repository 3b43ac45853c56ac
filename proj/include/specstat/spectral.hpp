#pragma once
#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "specstat/models.hpp"

namespace specstat {

// Spectra, eigenvalue counts and localization diagnostics for BoxOperator.
//
// Backends: LAPACK symmetric-tridiagonal routines (full QL/QR sweep for the
// complete spectrum, bisection + inverse iteration for windowed queries) and
// a hand-rolled Sturm sign count for interval counting without
// diagonalization.

struct BoxInfo {
  bool discrete = true;
  double l = 0.0;
  double h = 1.0;
  long long first_site = 0;
  std::size_t dim = 0;
};

struct Spectrum {
  std::vector<double> values;      // all eigenvalues, nondecreasing
  Eigen::MatrixXd vectors;         // columns, unit l2 norm (may be empty)
  std::vector<int> vector_index;   // vectors.col(k) pairs with values[vector_index[k]]
  bool near_degenerate = false;    // some gap < 1e-12 * spectral scale
  BoxInfo box;

  // Column of `vectors` holding eigenvector j, or -1.
  int column_of(int j) const;
};

// All eigenvalues; eigenvectors for the requested window (whole spectrum if
// no window is given) when want_vectors is set.
Spectrum eigen_all(const BoxOperator& op, bool want_vectors = false,
                   std::optional<std::pair<double, double>> window = std::nullopt);

// Number of eigenvalues strictly below x (Sturm/LDL^T sign count).
long long sturm_count_below(const BoxOperator& op, double x);

// Exact count in the closed interval [lo, hi], no diagonalization.
// Determinism at ties: an eigenvalue representable exactly as lo or hi is
// included; endpoints within one ulp follow the sign-count pivots, which are
// a deterministic function of the matrix bytes.
long long count_in_interval(const BoxOperator& op, double lo, double hi);

// Eigenvalues in (lo, hi] via bisection, values only.
std::vector<double> eigen_values_window(const BoxOperator& op, double lo,
                                        double hi);

// Continuum-only shooting count: integrates the phase ODE
//   psi' = cos^2 psi + (E - V(x)) sin^2 psi
// across the box and reads off floor(psi(l)/pi) = #{eigenvalues < E} of the
// underlying differential operator (not of the grid matrix).
long long shooting_count_below(const ModelSpec& model,
                               const DisorderSample& sample, double l, double E,
                               int steps_per_unit = 100);
long long shooting_count_in_interval(const ModelSpec& model,
                                     const DisorderSample& sample, double l,
                                     double lo, double hi,
                                     int steps_per_unit = 100);

// Decay diagnostics of one eigenvector: peak site, monotone log-envelope per
// distance, and a least-squares fit log|phi| ~ -rate * dist^xi over the
// region where |phi| > 1e-12.
struct DecayProfile {
  long long center_x0 = 0;            // matrix index of max |phi|
  double center_coord = 0.0;          // site or grid coordinate
  std::vector<double> log_envelope;   // index d: distance d (grid units)
  double fitted_xi = 0.0;
  double fitted_rate = 0.0;
  bool degenerate = false;            // no usable decay region
};

DecayProfile localization_profile(const Spectrum& spec, int which);

}  // namespace specstat
