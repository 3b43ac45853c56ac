#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace specstat {

// One-dimensional random Schrodinger operator families on finite boxes
// [-l, l] with Dirichlet boundary conditions.
//
// Families:
//   SimpleContinuum  -(d/dx)^2 + V,  V(x) = omega_n on [n, n+1)
//   ContinuumAlloy   -(d/dx)^2 + V,  V(x) = sum_n omega_n q(x - n),
//                    q >= eta on [-1/2, 1/2] and 0 <= q <= 1/eta supported
//                    in [-N, N] (covering condition)
//   DiscreteAlloy    (Hu)(m) = -u(m+1) - u(m-1) + V(m)u(m),
//                    V(m) = sum_n omega_n d_{m-n}, d finitely supported and
//                    single-signed
//   Multimer         (Hu)(n) = -b_{n+1}u(n+1) - b_n u(n-1) + V(n)u(n),
//                    V(Nj + m) = a_m omega_j for m in [0, N)
//
// Sign convention: the discrete kernel carries couplings -b (b == 1 for the
// non-Jacobi families) and no +2 diagonal shift; the continuum kernel is the
// standard central second difference with diagonal 2/h^2 + V(x_i).

enum class Family { SimpleContinuum, ContinuumAlloy, DiscreteAlloy, Multimer };
enum class Density { Uniform01, UniformSymmetricM };

std::string family_name(Family f);
std::string density_name(Density d);

// Piecewise-linear sampled profile on a uniform grid over [lo, hi];
// evaluates to 0 outside.  Used for the alloy single-site bump q.
struct SampledProfile {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> val;  // size >= 2, uniform spacing

  double step() const { return (hi - lo) / static_cast<double>(val.size() - 1); }
  double operator()(double t) const;
  double min_on(double a, double b) const;  // min over table nodes in [a, b]
  double max_abs() const;
};

// Triangular bump of height 1 supported on [-N, N], sampled at
// `samples_per_unit` nodes per unit length (>= 64 to keep the covering
// constant faithful to the table).
SampledProfile triangular_bump(int N, int samples_per_unit = 64);

struct ModelSpec {
  Family family = Family::SimpleContinuum;
  Density density = Density::Uniform01;
  double bound_M = 1.0;                       // |omega| <= M for UniformSymmetricM
  int support_radius_N = 1;                   // q/d support radius; Multimer period
  std::vector<double> multimer_weights_a;     // length N, all > 0
  std::vector<double> hopping_b;              // periodic extension; min |b| > 0
  std::vector<double> discrete_site_profile_d;  // centered, length 2N+1
  SampledProfile q;                           // ContinuumAlloy only
  double eta = 1.0;                           // covering constant, recomputed
  double grid_step_h = 0.01;                  // continuum discretization step

  static ModelSpec simple_continuum(Density den = Density::Uniform01,
                                    double M = 1.0, double h = 0.01);
  static ModelSpec continuum_alloy(SampledProfile q, int N,
                                   Density den = Density::Uniform01,
                                   double M = 1.0, double h = 0.01);
  static ModelSpec discrete_alloy(std::vector<double> d_centered, int N,
                                  Density den = Density::Uniform01, double M = 1.0);
  // Single-site alloy: d = {coupling} with radius 0.
  static ModelSpec anderson(double coupling, Density den = Density::Uniform01,
                            double M = 1.0);
  static ModelSpec multimer(std::vector<double> a, std::vector<double> b,
                            Density den = Density::Uniform01, double M = 1.0);

  void validate() const;  // throws ConfigError listing every violation
  bool is_discrete() const {
    return family == Family::DiscreteAlloy || family == Family::Multimer;
  }
  bool is_continuum() const { return !is_discrete(); }
  int period_N() const {
    return family == Family::Multimer
               ? static_cast<int>(multimer_weights_a.size())
               : 1;
  }
  double b_at(long long site) const;  // periodic extension of hopping_b
  double omega_bound() const {
    return density == Density::Uniform01 ? 1.0 : bound_M;
  }
};

// One disorder realization.  omegas[i] is the variable at index first + i;
// the index range covers the requested box enlarged by the family's support
// margin, so potential evaluation never truncates.
struct DisorderSample {
  std::uint64_t seed = 0;
  long long first = 0;
  std::vector<double> omegas;
  double bound_M = 1.0;

  long long last() const {
    return first + static_cast<long long>(omegas.size()) - 1;
  }
  double at(long long n) const;  // range-checked
  DisorderSample with_bump(long long n, double delta) const;  // omega_n += delta
};

// Index range of disorder variables needed for box [-l, l].
struct OmegaRange {
  long long first = 0;
  long long last = 0;
};
OmegaRange omega_range(const ModelSpec& model, double l);

DisorderSample sample_disorder(const ModelSpec& model, double l,
                               std::uint64_t seed);

// Potential evaluation.  Continuum families accept any x in the sampled
// margin; discrete families require x within 1e-9 of an integer site.
double evaluate_potential(const ModelSpec& model, const DisorderSample& sample,
                          double x);

// Symmetric tridiagonal Dirichlet restriction.
//   discrete:  sites first_site .. first_site + dim - 1 (box [-l, l] gives
//              first_site = -l, dim = 2l + 1)
//   continuum: interior grid nodes x_i = -l + (i + 1) h with
//              h = 2l / (n + 1) chosen so the box is an exact multiple.
struct BoxOperator {
  bool discrete = true;
  double l = 0.0;
  double h = 1.0;            // effective grid step; 1 for discrete
  long long first_site = 0;  // discrete only
  std::vector<double> diag;
  std::vector<double> off;   // off[i] couples i and i+1; size dim-1
  ModelSpec model;
  DisorderSample sample;

  std::size_t dim() const { return diag.size(); }
  // Physical coordinate of matrix index i (site index or grid position).
  double x_of(std::size_t i) const {
    return discrete ? static_cast<double>(first_site + static_cast<long long>(i))
                    : -l + (static_cast<double>(i) + 1.0) * h;
  }
  double norm1() const;  // max column abs sum
};

BoxOperator build_box_operator(const ModelSpec& model,
                               const DisorderSample& sample, double l);
// Explicit site range [s_lo, s_hi] (discrete families); supports the
// asymmetric micro-boxes used by analytic oracles.
BoxOperator build_box_operator_sites(const ModelSpec& model,
                                     const DisorderSample& sample,
                                     long long s_lo, long long s_hi);

long long floor_div(long long a, long long b);

}  // namespace specstat
