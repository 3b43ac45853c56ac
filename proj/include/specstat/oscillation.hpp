#pragma once
#include <cstdint>
#include <vector>

#include "specstat/models.hpp"

namespace specstat {

// Strict sign-change counting and disconjugacy property instances.
//
// A sign change is a transition between consecutive nonzero samples of
// opposite sign; zeros in between add nothing, so (+, 0, -) counts one
// change and (+, 0, +) none.
//
// The property suites draw random admissible instances of the coefficient
// equations
//   continuum:  y'' = (lambda qtilde - E) y,  qtilde 1-periodic with
//               inf qtilde = m > 0 and lambda m > E,
//   discrete:   u(n+1) + u(n-1) = (E - lambda atilde_n) u(n),  atilde
//               k-periodic with min = m and lambda < 0, E - lambda m > 2,
// where solutions cannot oscillate: a single solution has at most one zero
// (continuum) or one sign change (discrete), and the difference of two
// solutions at admissible energy pairs changes sign at most three times
// (continuum requires both solutions positive at the right end).

int oscillation_sign_changes(const std::vector<double>& y);

struct OscillationCheck {
  int sign_changes = 0;
  int bound = 0;        // 1 for single solutions, 3 for differences
  bool holds = false;   // sign_changes <= bound
  double lambda = 0.0;
  double energy1 = 0.0;
  double energy2 = 0.0;  // difference cases only
};

OscillationCheck continuum_single_zero_case(std::uint64_t seed);
OscillationCheck continuum_difference_case(std::uint64_t seed);
OscillationCheck discrete_single_flip_case(std::uint64_t seed);
OscillationCheck discrete_difference_case(std::uint64_t seed);

// Fixed-step RK4 samples of y'' = (lambda qtilde - E) y on [0, length],
// qtilde the 1-periodic extension of q_cell given on [0, 1].
struct SturmSolution {
  std::vector<double> x;
  std::vector<double> y;
};

SturmSolution integrate_sturm(const SampledProfile& q_cell, double lambda,
                              double energy, double y0, double yp0,
                              double length, int steps_per_unit = 1000);

}  // namespace specstat
