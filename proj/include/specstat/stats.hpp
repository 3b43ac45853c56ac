#pragma once
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "specstat/fits.hpp"
#include "specstat/models.hpp"
#include "specstat/spectral.hpp"

namespace specstat {

// Ensemble-level spectral statistics: integrated density of states,
// unfolded local level statistics, Poisson and two-energy independence
// diagnostics, Wegner / Minami occupation estimates, and the two-energy
// decorrelation scaling probe.
//
// Box convention: `box_size` is the observable volume |Λ| — the number of
// lattice sites for discrete families (the box is centered at the origin)
// and the interval length for continuum families.  All spectral-count
// intervals are closed.
//
// Seeding: each estimator takes one master seed.  Sub-ensembles (one per
// box size, plus a dedicated stream for any internal reference run) use
// sub-masters trial_seed(master, stream_index); individual trials then use
// trial_seed(sub_master, trial_index).  Merging is index-ordered, so
// results do not depend on the worker count.

// ---------------------------------------------------------------------------
// Integrated density of states

struct IdsTable {
  std::vector<double> grid;     // strictly increasing energies
  std::vector<double> n_of_e;   // N(E): mean eigenvalue count below E per |Λ|
  std::vector<double> density;  // smoothed derivative, clipped at 0
  long long clip_events = 0;    // density values clipped to 0
  long long trials = 0;
  double box_size = 0.0;
  bool range_warning = false;   // grid entirely off the spectral range

  double n_at(double e) const;        // linear interpolation, clamped
  double density_at(double e) const;  // nearest grid node
};

// N̂(E) = mean over trials of #{eigenvalues < E} / |Λ|, nondecreasing by
// construction; the density uses centered differencing with a bandwidth of
// 5 grid steps (one-sided near the edges).
IdsTable estimate_ids(const ModelSpec& model, const std::vector<double>& grid,
                      double box_size, long long trials, std::uint64_t seed,
                      int workers = 1);

// ---------------------------------------------------------------------------
// Unfolded local level statistics

struct UnfoldedProcess {
  double e0 = 0.0;        // reference energy
  double box_size = 0.0;  // |Λ| of the spectrum's box
  std::vector<double> points;  // xi_j = |Λ|(N(E_j) - N(E0)), sorted
};

// Maps a box spectrum through the (frozen) IDS table.  E0 must lie inside
// the table's grid; eigenvalues beyond the grid clamp to its end values.
// Only eigenvalues with |E - e0| <= window contribute (the local process is
// built from levels near the reference; the default keeps every level).
// Levels outside the window would land at |xi| >> 1 whenever the density
// between them and e0 is positive, so fixed-interval statistics near xi = 0
// are unaffected by any window wide enough to contain the interval preimage.
UnfoldedProcess unfold_levels(
    const Spectrum& spec, const IdsTable& ids, double e0,
    double window = std::numeric_limits<double>::infinity());

// Number of points in the closed interval [lo, hi].
long long count_in_process(const UnfoldedProcess& process, double lo, double hi);

// ---------------------------------------------------------------------------
// Reports

struct ReportRow {
  std::vector<std::pair<std::string, double>> params;  // ordered key tuple
  long long hits = 0;
  long long trials = 0;
  double freq = 0.0;
  WilsonInterval ci;
  std::vector<std::pair<std::string, double>> extras;
};

struct EstimateReport {
  std::string kind;
  std::vector<std::pair<std::string, double>> params;  // global parameters
  std::vector<ReportRow> rows;
  std::vector<std::pair<std::string, double>> fits;    // fitted quantities
  std::vector<std::string> notes;
  std::uint64_t master_seed = 0;
  long long trials = 0;

  bool has_fit(const std::string& name) const;
  double fit_value(const std::string& name) const;  // throws if absent
};

// ---------------------------------------------------------------------------
// Estimators

// Chi-square goodness of fit of interval counts against Poisson(|I|) plus
// pairwise count covariances.  Requires >= 200 processes and pairwise
// disjoint closed intervals.  Two statistics are reported: the per-interval
// histogram tests (chi2_i / p_i, pooled into chi2_pooled / p_pooled), which
// are sensitive to any departure from the Poisson shape, and the
// aggregate-totals test (chi2_totals / p_totals) on the summed counts per
// interval, which checks the intensity calibration only.  Localized-regime
// spectra at moderate box sizes show a genuine count-variance deficit that
// fails the histogram tests long after the totals test has converged.
EstimateReport poisson_gof(
    const std::vector<UnfoldedProcess>& processes,
    const std::vector<std::pair<double, double>>& intervals);

struct LevelStatsOptions {
  long long ids_trials = 200;  // reference ensemble size
  double ids_margin = 3.0;     // grid spans e0 +/- margin
  double ids_step = 0.01;      // grid spacing
  int workers = 1;
};

// End-to-end unfolded level statistics: freezes an IDS reference on a box
// 4x `box_size`, unfolds `trials` spectra around e0, and runs poisson_gof.
EstimateReport level_statistics(
    const ModelSpec& model, double e0,
    const std::vector<std::pair<double, double>>& intervals, double box_size,
    long long trials, std::uint64_t seed, const LevelStatsOptions& opts = {});

struct JointOptions {
  long long ids_trials = 200;
  double ids_margin = 3.0;
  double ids_step = 0.01;
  bool allow_zero_density = false;  // permit a reference with ν̂ = 0
  int workers = 1;
};

// Joint histogram of interval counts for the two unfolded processes at e0
// and e0p, with an independence diagnostic (joint vs product of marginals)
// and the count covariance with CI.
EstimateReport joint_counts_two_energies(
    const ModelSpec& model, double e0, double e0p, double box_size,
    long long trials, std::pair<double, double> interval_plus,
    std::pair<double, double> interval_minus, std::uint64_t seed,
    const JointOptions& opts = {});

// Frequency of >= 1 eigenvalue in the centered interval of each width, per
// box size, with a linear fit of frequency against width * |Λ| over the
// small-probability regime and a saturation report.
EstimateReport wegner_estimate(const ModelSpec& model, double center,
                               const std::vector<double>& widths,
                               const std::vector<double>& box_sizes,
                               long long trials, std::uint64_t seed,
                               int workers = 1);

// Multiple-occupancy statistics of [E - eps, E + eps]: per (eps, L) the
// mean of (count - 1)+ (equivalently sum over k >= 2 of freq(count >= k)),
// fitted against eps * |Λ| on the log-log scale; rho_hat = exponent - 1.
// With no multiple-occupancy events anywhere the report carries upper
// confidence bounds only and no fit.
EstimateReport minami_estimate(const ModelSpec& model, double energy,
                               const std::vector<double>& eps_list,
                               const std::vector<double>& box_sizes,
                               long long trials, std::uint64_t seed,
                               int workers = 1);

struct DecorrelationOptions {
  // Scale constant of the admissible micro-box window: l = round(k * L^alpha).
  // k trades finite-size bias against statistics: at k = 1 the smallest
  // micro-boxes sit in a spectrally rigid regime that biases the fitted
  // exponent downward.
  double k_const = 1.0;
  bool decoupled_oracle = false;  // drive the two events by independent samples
  int workers = 1;
};

// Joint occupation of [F +/- 1/L] and [G +/- 1/L] on the small box of
// l = round(L^alpha) sites (length, for continuum), per L.  Fits
// freq ~ C l^2 / L^(1+gamma) and reports the factorization ratio
// P(joint) / (P(F) P(G)) with a delta-method CI.
EstimateReport decorrelation_probe(const ModelSpec& model, double f_energy,
                                   double g_energy, double alpha,
                                   const std::vector<double>& big_sizes,
                                   long long trials, std::uint64_t seed,
                                   const DecorrelationOptions& opts = {});

}  // namespace specstat
