#pragma once
#include <Eigen/Dense>
#include <vector>

#include "specstat/models.hpp"

namespace specstat {

// Weighted semi-inner products and the per-cell orthonormal solution bases
// they induce.
//
// Continuum cells: the single-site bump q (or the unit weight for the
// piecewise-constant family) defines <f, g>_q = integral of f g q over the
// cell; the basis (e1, e2) orthonormalizes the fundamental solutions
// Psi, Phi of  y'' = (V - E) y  with Psi(0) = Phi'(0) = 1 and
// Psi'(0) = Phi(0) = 0 at the cell anchor.
//
// Discrete cells (Multimer, period N): the weights a_m define
// <f, g>_a = sum a_m f(m) g(m) on [0, N); the basis spans the plane of
// sequences satisfying the interior recursion
//   b_{m+1} y(m+1) + b_m y(m-1) + (a_m omega - E) y(m) = 0
// and is chosen so that, as omega grows, it approaches
// (delta_{N-1}/sqrt(a_{N-1}), delta_0/sqrt(a_0)).

enum class QuadRule { Trapezoid, Simpson };

struct QForm {
  bool discrete = false;
  QuadRule rule = QuadRule::Trapezoid;
  SampledProfile weight;  // continuum weight, evaluated by interpolation
  std::vector<double> a;  // discrete weights
};

QForm continuum_form(SampledProfile weight, QuadRule rule = QuadRule::Trapezoid);
QForm discrete_form(std::vector<double> a);
// The form attached to a model family (unit weight on [-1/2, 1/2] for
// SimpleContinuum, the alloy bump, or the Multimer weights).
QForm model_form(const ModelSpec& model, QuadRule rule = QuadRule::Trapezoid);

// Sampled functions ride in SampledProfile; both arguments must share the
// grid of the first.
double q_inner(const QForm& form, const SampledProfile& f,
               const SampledProfile& g);
double q_inner(const QForm& form, const std::vector<double>& f,
               const std::vector<double>& g);

struct CellBasis {
  long long cell = 0;    // disorder index the cell belongs to
  double anchor = 0.0;   // absolute coordinate of the local origin
  double radius = 0.0;   // local domain [-radius, radius]
  double step = 0.0;     // final integration step
  double energy = 0.0;
  std::vector<double> x;  // local grid, odd node count
  std::vector<double> e1, e1p, e2, e2p;
  Eigen::Matrix2d edge_minus;  // rows (value, derivative) at -radius
  Eigen::Matrix2d edge_plus;   // at +radius
  Eigen::Matrix2d anchor_mat;  // at 0; maps (A, B) to (u, u') there
  double ortho_residual = 0.0;
  QForm form;  // the quadrature the construction used (Simpson)

  // Linear interpolation on the stored grid.
  double eval(const std::vector<double>& comp, double x_local) const;
};

double cell_radius(const ModelSpec& model);
double cell_anchor(const ModelSpec& model, long long cell);

CellBasis continuum_cell_basis(const ModelSpec& model,
                               const DisorderSample& sample, double energy,
                               long long cell);

struct DiscreteCellBasis {
  long long cell = 0;
  double energy = 0.0;
  std::vector<double> e1, e2;  // length N
  Eigen::Matrix2d m_mat;       // [[e1(1), e2(1)], [e1(0), e2(0)]]
  Eigen::Matrix2d n_mat;       // [[e1(N-1), e2(N-1)], [e1(N-2), e2(N-2)]]
  double ortho_residual = 0.0;
};

DiscreteCellBasis discrete_cell_basis(const ModelSpec& model,
                                      const DisorderSample& sample,
                                      double energy, long long cell);

// Bases for every cell in [first_cell, last_cell], with the model context
// they were built from.
struct CellBasisSet {
  ModelSpec model;
  DisorderSample sample;
  double energy = 0.0;
  long long first_cell = 0;
  bool discrete = false;
  std::vector<CellBasis> cells;
  std::vector<DiscreteCellBasis> dcells;

  long long last_cell() const {
    return first_cell +
           static_cast<long long>(discrete ? dcells.size() : cells.size()) - 1;
  }
};

CellBasisSet make_cell_bases(const ModelSpec& model,
                             const DisorderSample& sample, double energy,
                             long long first_cell, long long last_cell);

}  // namespace specstat
