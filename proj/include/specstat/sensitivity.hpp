#pragma once
#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "specstat/models.hpp"
#include "specstat/spectral.hpp"

namespace specstat {

// Eigenvalue sensitivity with respect to the disorder variables.
//
// Every family's potential depends linearly on each omega_n, so for a simple
// eigenvalue E with unit eigenvector v first-order perturbation theory gives
//   dE/domega_n = sum_i (dV(x_i)/domega_n) v_i^2,
// the profile-weighted squared eigenvector mass near site n.  For
// SimpleContinuum the weights partition unity, hence the components sum to
// ||v||^2 = 1.

struct GradientVector {
  long long first = 0;           // omega index of partials[0]
  std::vector<double> partials;  // indexed like DisorderSample::omegas
  double l1_norm = 0.0;
  int which = 0;   // eigenvalue index in the source spectrum
  double energy = 0.0;

  std::size_t size() const { return partials.size(); }
  long long last() const {
    return first + static_cast<long long>(partials.size()) - 1;
  }
  double at(long long n) const;  // range-checked partial at omega index n
};

// Requires: eigenvalue `which` simple (distance to its neighbors greater
// than 1e-10 times the spectral scale) and its eigenvector stored in `spec`.
GradientVector hf_gradient(const Spectrum& spec, int which,
                           const ModelSpec& model,
                           const DisorderSample& sample);

// 2x2 minor of the Jacobian of (E, E') with respect to
// (omega_gamma, omega_gamma').  Antisymmetric under swapping the pair.
struct JacobianPair {
  long long gamma = 0;
  long long gamma_prime = 0;
  double det_value = 0.0;
};

JacobianPair jacobian_pair(const GradientVector& gE, const GradientVector& gEp,
                           long long gamma, long long gamma_prime);

// Evaluates both sides of the minor lower bound
//   max_{j != k} (u_j v_k - u_k v_j)^2  >=  ||u - v||_1^2 / (4 n^5)
// for nonnegative vectors u, v normalized internally to unit l1 norm.
struct GradJacResult {
  double lhs = 0.0;         // maximal squared 2x2 minor
  double rhs = 0.0;         // ||u - v||_1^2 / (4 n^5)
  bool holds = false;       // lhs >= rhs - 1e-14
  std::size_t best_j = 0;   // maximizing pair, j < k
  std::size_t best_k = 1;
};

GradJacResult gradjac_bound_check(std::vector<double> u, std::vector<double> v);

// l1 distance of the l1-normalized gradients; 0 iff they are positively
// colinear, 2 for disjointly supported ones.
double colinearity_gap(const GradientVector& gE, const GradientVector& gEp);

// Finite-difference Hessian of eigenvalue `which` in the disorder variables,
// restricted to the most sensitive sites (at most 16; more get truncated by
// decreasing |gradient| and flagged).  The reported operator norm is
// l-infinity -> l1, computed exactly as max_{s in {-1,1}^k} ||H s||_1, and
// `gap` is the distance of the eigenvalue to the rest of the spectrum.
struct HessianEstimate {
  Eigen::MatrixXd hessian;              // active x active, symmetric
  std::vector<long long> active_sites;  // omega indices, |gradient| descending
  double norm_estimate = 0.0;
  double gap = 0.0;
  bool truncated = false;
  double cutoff = 0.0;  // smallest |gradient| among the kept sites
};

inline constexpr int kMaxHessianSites = 16;
inline constexpr double kGradientFdStep = 1e-6;  // central differences
inline constexpr double kHessianFdStep = 1e-4;   // central-of-central

HessianEstimate hessian_norm_estimate(const BoxOperator& op, int which);
HessianEstimate hessian_norm_estimate(const ModelSpec& model,
                                      const DisorderSample& sample, double l,
                                      int which);

// Central finite-difference gradient (the independent cross-check for
// hf_gradient); solves two eigenproblems per disorder site.
GradientVector fd_gradient(const BoxOperator& op, int which,
                           double step = kGradientFdStep);

}  // namespace specstat
