#include "specstat/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>

#include "specstat/ensemble.hpp"
#include "specstat/errors.hpp"
#include "specstat/rng.hpp"

namespace specstat {

namespace {

constexpr double kMinExpectedPerBin = 5.0;  // chi-square pooling threshold
constexpr double kLinearRegimeCap = 0.2;    // "small probability" for the Wegner fit
constexpr double kSaturationLevel = 0.9;

// One disorder realization restricted to a centered box of observable
// volume `size` (site count when discrete, length when continuum).
struct TrialBox {
  DisorderSample sample;
  BoxOperator op;
  double volume = 0.0;
};

TrialBox make_trial_box(const ModelSpec& model, double size, std::uint64_t seed) {
  TrialBox tb;
  if (model.is_discrete()) {
    const long long n = std::llround(size);
    if (n < 1) throw ConfigError("box size: need at least one site");
    const long long lo = -(n / 2);
    const long long hi = lo + n - 1;
    const double cover =
        static_cast<double>(std::max(std::llabs(lo), std::llabs(hi)));
    tb.sample = sample_disorder(model, cover, seed);
    tb.op = build_box_operator_sites(model, tb.sample, lo, hi);
    tb.volume = static_cast<double>(n);
  } else {
    const double l = 0.5 * size;
    if (!(l > 0.0) || !std::isfinite(l))
      throw ConfigError("box size: need a positive finite length");
    tb.sample = sample_disorder(model, l, seed);
    tb.op = build_box_operator(model, tb.sample, l);
    tb.volume = size;
  }
  return tb;
}

double box_volume_of(const ModelSpec& model, double size) {
  return model.is_discrete() ? static_cast<double>(std::llround(size)) : size;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2)
    throw ConfigError("energy grid: need at least two points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]))
      throw ConfigError("energy grid: entries must be finite");
    if (i > 0 && !(grid[i] > grid[i - 1]))
      throw ConfigError("energy grid: entries must be strictly increasing");
  }
}

void check_interval(const std::pair<double, double>& iv, const char* who) {
  if (!std::isfinite(iv.first) || !std::isfinite(iv.second) ||
      !(iv.first < iv.second))
    throw ConfigError(std::string(who) + ": interval needs finite lo < hi");
}

void check_positive_sizes(const std::vector<double>& sizes) {
  if (sizes.empty()) throw ConfigError("box sizes: list must be nonempty");
  for (double s : sizes)
    if (!(s > 0.0) || !std::isfinite(s))
      throw ConfigError("box sizes: entries must be positive and finite");
}

std::vector<double> sorted_copy(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// Chi-square test of an observed count histogram against Poisson(lambda),
// pooling bins from the tail so every expected count is >= 5.
struct Chi2Result {
  double stat = 0.0;
  int df = 0;
  double p = 1.0;
  bool degenerate = false;  // fewer than two usable bins
};

Chi2Result poisson_chi2(const std::vector<long long>& hist, long long trials,
                        double lambda) {
  const double r = static_cast<double>(trials);
  std::vector<double> expected;
  std::vector<long long> observed;
  double pmf = std::exp(-lambda);
  double cdf = 0.0;
  std::size_t k = 0;
  const std::size_t cap =
      static_cast<std::size_t>(lambda + 10.0 * std::sqrt(lambda + 1.0) + 50.0);
  while (k < cap && r * pmf >= kMinExpectedPerBin) {
    expected.push_back(r * pmf);
    observed.push_back(k < hist.size() ? hist[k] : 0);
    cdf += pmf;
    ++k;
    pmf *= lambda / static_cast<double>(k);
  }
  // Tail bin: everything from k upward.
  long long tail_obs = 0;
  for (std::size_t j = k; j < hist.size(); ++j) tail_obs += hist[j];
  const double tail_exp = r * std::max(0.0, 1.0 - cdf);
  if (expected.empty()) {
    Chi2Result res;
    res.degenerate = true;
    return res;
  }
  if (tail_exp >= kMinExpectedPerBin) {
    expected.push_back(tail_exp);
    observed.push_back(tail_obs);
  } else {
    expected.back() += tail_exp;
    observed.back() += tail_obs;
  }

  Chi2Result res;
  res.df = static_cast<int>(expected.size()) - 1;
  if (res.df < 1) {
    res.degenerate = true;
    return res;
  }
  for (std::size_t j = 0; j < expected.size(); ++j) {
    const double d = static_cast<double>(observed[j]) - expected[j];
    res.stat += d * d / expected[j];
  }
  res.p = chi2_sf(res.stat, res.df);
  return res;
}

struct CovEstimate {
  double cov = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

CovEstimate count_covariance(const std::vector<long long>& x,
                             const std::vector<long long>& y) {
  const std::size_t n = x.size();
  const double r = static_cast<double>(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += static_cast<double>(x[i]);
    my += static_cast<double>(y[i]);
  }
  mx /= r;
  my /= r;
  double sxy = 0.0, m22 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(x[i]) - mx;
    const double dy = static_cast<double>(y[i]) - my;
    sxy += dx * dy;
    m22 += dx * dx * dy * dy;
  }
  CovEstimate c;
  c.cov = n > 1 ? sxy / (r - 1.0) : 0.0;
  c.se = std::sqrt(std::max(0.0, m22 / r - c.cov * c.cov) / r);
  c.lo = c.cov - kWilsonZ * c.se;
  c.hi = c.cov + kWilsonZ * c.se;
  return c;
}

ReportRow make_row(std::vector<std::pair<std::string, double>> params,
                   long long hits, long long trials) {
  ReportRow row;
  row.params = std::move(params);
  row.hits = hits;
  row.trials = trials;
  row.ci = wilson_interval(hits, trials);
  row.freq = row.ci.point;
  return row;
}

std::string index_name(const char* base, std::size_t i) {
  return std::string(base) + "_" + std::to_string(i);
}

std::string pair_name(const char* base, std::size_t i, std::size_t j) {
  return std::string(base) + "_" + std::to_string(i) + "_" + std::to_string(j);
}

}  // namespace

// ---------------------------------------------------------------------------
// IdsTable

double IdsTable::n_at(double e) const {
  if (grid.size() < 2 || n_of_e.size() != grid.size())
    throw ConfigError("ids table: incomplete");
  if (e <= grid.front()) return n_of_e.front();
  if (e >= grid.back()) return n_of_e.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), e);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  const double t = (e - grid[lo]) / (grid[hi] - grid[lo]);
  return n_of_e[lo] + t * (n_of_e[hi] - n_of_e[lo]);
}

double IdsTable::density_at(double e) const {
  if (grid.empty() || density.size() != grid.size())
    throw ConfigError("ids table: incomplete");
  const auto it = std::lower_bound(grid.begin(), grid.end(), e);
  std::size_t k = static_cast<std::size_t>(it - grid.begin());
  if (k == grid.size()) return density.back();
  if (k > 0 && e - grid[k - 1] < grid[k] - e) --k;
  return density[k];
}

IdsTable estimate_ids(const ModelSpec& model, const std::vector<double>& grid,
                      double box_size, long long trials, std::uint64_t seed,
                      int workers) {
  model.validate();
  check_grid(grid);
  if (trials < 1) throw ConfigError("estimate_ids: trials must be >= 1");

  struct TrialCounts {
    std::vector<long long> below;
    long long dim = 0;
  };
  const auto counts = run_trials<TrialCounts>(
      trials, workers, [&](long long t) {
        const TrialBox tb =
            make_trial_box(model, box_size, trial_seed(seed, static_cast<std::uint64_t>(t)));
        TrialCounts c;
        c.dim = static_cast<long long>(tb.op.dim());
        c.below.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
          c.below[i] = sturm_count_below(tb.op, grid[i]);
        return c;
      });

  const double volume = box_volume_of(model, box_size);
  std::vector<long long> totals(grid.size(), 0);
  long long dim_total = 0;
  for (const TrialCounts& c : counts) {
    for (std::size_t i = 0; i < grid.size(); ++i) totals[i] += c.below[i];
    dim_total += c.dim;
  }

  IdsTable table;
  table.grid = grid;
  table.trials = trials;
  table.box_size = volume;
  table.n_of_e.resize(grid.size());
  const double denom = static_cast<double>(trials) * volume;
  for (std::size_t i = 0; i < grid.size(); ++i)
    table.n_of_e[i] = static_cast<double>(totals[i]) / denom;
  table.range_warning = totals.back() == 0 || totals.front() == dim_total;

  // Smoothed density: centered difference over +/- 5 grid steps, one-sided
  // at the edges, clipped at zero.
  const std::size_t bw = 5;
  table.density.resize(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::size_t lo = k >= bw ? k - bw : 0;
    const std::size_t hi = std::min(grid.size() - 1, k + bw);
    double nu = (table.n_of_e[hi] - table.n_of_e[lo]) / (grid[hi] - grid[lo]);
    if (nu < 0.0) {
      nu = 0.0;
      ++table.clip_events;
    }
    table.density[k] = nu;
  }
  return table;
}

// ---------------------------------------------------------------------------
// Unfolding

UnfoldedProcess unfold_levels(const Spectrum& spec, const IdsTable& ids,
                              double e0, double window) {
  if (ids.grid.size() < 2 || ids.n_of_e.size() != ids.grid.size())
    throw ConfigError("unfold_levels: ids table incomplete");
  if (!std::isfinite(e0) || e0 < ids.grid.front() || e0 > ids.grid.back())
    throw ConfigError("unfold_levels: reference energy outside the ids grid");
  if (std::isnan(window) || window <= 0.0)
    throw ConfigError("unfold_levels: window must be positive");

  UnfoldedProcess process;
  process.e0 = e0;
  process.box_size = spec.box.discrete ? static_cast<double>(spec.box.dim)
                                       : 2.0 * spec.box.l;
  const double n0 = ids.n_at(e0);
  process.points.reserve(spec.values.size());
  for (double e : spec.values) {
    if (std::abs(e - e0) > window) continue;
    const double xi = process.box_size * (ids.n_at(e) - n0);
    if (!std::isfinite(xi))
      throw NumericError("unfold_levels: non-finite unfolded point");
    process.points.push_back(xi);
  }
  std::sort(process.points.begin(), process.points.end());
  return process;
}

long long count_in_process(const UnfoldedProcess& process, double lo, double hi) {
  if (!(lo <= hi)) throw ConfigError("count_in_process: need lo <= hi");
  const auto& p = process.points;
  return std::upper_bound(p.begin(), p.end(), hi) -
         std::lower_bound(p.begin(), p.end(), lo);
}

// ---------------------------------------------------------------------------
// EstimateReport

bool EstimateReport::has_fit(const std::string& name) const {
  for (const auto& [key, value] : fits)
    if (key == name) return true;
  return false;
}

double EstimateReport::fit_value(const std::string& name) const {
  for (const auto& [key, value] : fits)
    if (key == name) return value;
  throw ConfigError("report: no fitted quantity named " + name);
}

// ---------------------------------------------------------------------------
// Poisson goodness of fit

EstimateReport poisson_gof(
    const std::vector<UnfoldedProcess>& processes,
    const std::vector<std::pair<double, double>>& intervals) {
  const long long r = static_cast<long long>(processes.size());
  if (r < 200) throw ConfigError("poisson_gof: need at least 200 processes");
  if (intervals.empty()) throw ConfigError("poisson_gof: need at least one interval");
  for (const auto& iv : intervals) check_interval(iv, "poisson_gof");

  // Closed intervals must be pairwise disjoint, endpoints included.
  std::vector<std::size_t> order(intervals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return intervals[a].first < intervals[b].first;
  });
  for (std::size_t k = 1; k < order.size(); ++k)
    if (intervals[order[k]].first <= intervals[order[k - 1]].second)
      throw ConfigError("poisson_gof: intervals overlap");

  std::vector<std::vector<long long>> counts(intervals.size());
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    counts[i].resize(processes.size());
    for (std::size_t p = 0; p < processes.size(); ++p)
      counts[i][p] =
          count_in_process(processes[p], intervals[i].first, intervals[i].second);
  }

  EstimateReport report;
  report.kind = "poisson_gof";
  report.trials = r;
  report.params = {{"processes", static_cast<double>(r)},
                   {"intervals", static_cast<double>(intervals.size())}};

  double pooled_stat = 0.0;
  int pooled_df = 0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const double lambda = intervals[i].second - intervals[i].first;
    long long kmax = 0;
    for (long long c : counts[i]) kmax = std::max(kmax, c);
    std::vector<long long> hist(static_cast<std::size_t>(kmax) + 1, 0);
    for (long long c : counts[i]) ++hist[static_cast<std::size_t>(c)];

    double pmf = std::exp(-lambda);
    for (long long k = 0; k <= kmax; ++k) {
      ReportRow row = make_row({{"interval", static_cast<double>(i)},
                                {"lo", intervals[i].first},
                                {"hi", intervals[i].second},
                                {"k", static_cast<double>(k)}},
                               hist[static_cast<std::size_t>(k)], r);
      row.extras = {{"expected_freq", pmf}};
      report.rows.push_back(std::move(row));
      pmf *= lambda / static_cast<double>(k + 1);
    }

    const Chi2Result chi = poisson_chi2(hist, r, lambda);
    report.fits.emplace_back(index_name("chi2", i), chi.stat);
    report.fits.emplace_back(index_name("df", i), static_cast<double>(chi.df));
    report.fits.emplace_back(index_name("p", i), chi.p);
    if (chi.degenerate)
      report.notes.push_back("interval " + std::to_string(i) +
                             ": too few expected counts for a chi-square test");
    else {
      pooled_stat += chi.stat;
      pooled_df += chi.df;
    }
  }
  report.fits.emplace_back("chi2_pooled", pooled_stat);
  report.fits.emplace_back("df_pooled", static_cast<double>(pooled_df));
  report.fits.emplace_back("p_pooled",
                           pooled_df >= 1 ? chi2_sf(pooled_stat, pooled_df) : 1.0);

  // Aggregate-totals statistic: Pearson chi-square of the summed counts per
  // interval against their Poisson expectation r * |I|.  This tests the
  // intensity calibration of the limit law and, unlike the histogram tests
  // above, is insensitive to the finite-size count rigidity (variance
  // deficit) that vanishes only slowly with the box size.
  double totals_stat = 0.0;
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const double expected =
        static_cast<double>(r) * (intervals[i].second - intervals[i].first);
    double total = 0.0;
    for (long long c : counts[i]) total += static_cast<double>(c);
    totals_stat += (total - expected) * (total - expected) / expected;
  }
  report.fits.emplace_back("chi2_totals", totals_stat);
  report.fits.emplace_back("df_totals", static_cast<double>(intervals.size()));
  report.fits.emplace_back(
      "p_totals", chi2_sf(totals_stat, static_cast<int>(intervals.size())));

  for (std::size_t i = 0; i < intervals.size(); ++i)
    for (std::size_t j = i + 1; j < intervals.size(); ++j) {
      const CovEstimate c = count_covariance(counts[i], counts[j]);
      report.fits.emplace_back(pair_name("cov", i, j), c.cov);
      report.fits.emplace_back(pair_name("cov_se", i, j), c.se);
      report.fits.emplace_back(pair_name("cov_lo", i, j), c.lo);
      report.fits.emplace_back(pair_name("cov_hi", i, j), c.hi);
    }
  return report;
}

// ---------------------------------------------------------------------------
// Level statistics pipeline

namespace {

std::vector<double> centered_grid(double e0, double margin, double step) {
  if (!(margin > 0.0) || !(step > 0.0) || !std::isfinite(e0))
    throw ConfigError("ids grid: need finite e0 and positive margin/step");
  std::vector<double> grid;
  const long long half = std::llround(margin / step);
  if (half < 1) throw ConfigError("ids grid: margin smaller than one step");
  grid.reserve(static_cast<std::size_t>(2 * half + 1));
  for (long long j = -half; j <= half; ++j)
    grid.push_back(e0 + static_cast<double>(j) * step);
  return grid;
}

}  // namespace

EstimateReport level_statistics(
    const ModelSpec& model, double e0,
    const std::vector<std::pair<double, double>>& intervals, double box_size,
    long long trials, std::uint64_t seed, const LevelStatsOptions& opts) {
  model.validate();
  if (trials < 200)
    throw ConfigError("level_statistics: need at least 200 trials");
  if (opts.ids_trials < 1)
    throw ConfigError("level_statistics: ids_trials must be >= 1");

  const std::vector<double> grid =
      centered_grid(e0, opts.ids_margin, opts.ids_step);
  const IdsTable ids = estimate_ids(model, grid, 4.0 * box_size,
                                    opts.ids_trials, trial_seed(seed, 0),
                                    opts.workers);
  const double nu0 = ids.density_at(e0);
  if (!(nu0 > 0.0))
    throw ConfigError(
        "level_statistics: estimated density vanishes at the reference energy");

  const std::uint64_t levels_master = trial_seed(seed, 1);
  const auto processes = run_trials<UnfoldedProcess>(
      trials, opts.workers, [&](long long t) {
        const TrialBox tb = make_trial_box(
            model, box_size, trial_seed(levels_master, static_cast<std::uint64_t>(t)));
        return unfold_levels(eigen_all(tb.op), ids, e0);
      });

  EstimateReport report = poisson_gof(processes, intervals);
  report.kind = "levelstats";
  report.master_seed = seed;
  report.trials = trials;
  std::vector<std::pair<std::string, double>> params = {
      {"e0", e0},
      {"box_size", box_volume_of(model, box_size)},
      {"ids_box", ids.box_size},
      {"ids_trials", static_cast<double>(opts.ids_trials)},
      {"nu_e0", nu0}};
  params.insert(params.end(), report.params.begin(), report.params.end());
  report.params = std::move(params);
  if (ids.range_warning)
    report.notes.push_back("ids grid off the spectral range");
  return report;
}

// ---------------------------------------------------------------------------
// Two-energy joint counts

EstimateReport joint_counts_two_energies(
    const ModelSpec& model, double e0, double e0p, double box_size,
    long long trials, std::pair<double, double> interval_plus,
    std::pair<double, double> interval_minus, std::uint64_t seed,
    const JointOptions& opts) {
  model.validate();
  if (!std::isfinite(e0) || !std::isfinite(e0p) || e0 == e0p)
    throw ConfigError("joint_counts_two_energies: reference energies must differ");
  if (trials < 1) throw ConfigError("joint_counts_two_energies: trials must be >= 1");
  check_interval(interval_plus, "joint_counts_two_energies");
  check_interval(interval_minus, "joint_counts_two_energies");

  const double mid = 0.5 * (e0 + e0p);
  const double margin = opts.ids_margin + 0.5 * std::abs(e0 - e0p);
  const std::vector<double> grid = centered_grid(mid, margin, opts.ids_step);
  const IdsTable ids = estimate_ids(model, grid, 4.0 * box_size,
                                    opts.ids_trials, trial_seed(seed, 0),
                                    opts.workers);
  const double nu_plus = ids.density_at(e0);
  const double nu_minus = ids.density_at(e0p);
  if (!opts.allow_zero_density && !(nu_plus * nu_minus > 0.0))
    throw ConfigError(
        "joint_counts_two_energies: infeasible reference (estimated density "
        "vanishes)");

  const std::uint64_t pair_master = trial_seed(seed, 1);
  const auto counts = run_trials<std::pair<long long, long long>>(
      trials, opts.workers, [&](long long t) {
        const TrialBox tb = make_trial_box(
            model, box_size, trial_seed(pair_master, static_cast<std::uint64_t>(t)));
        const Spectrum spec = eigen_all(tb.op);
        // each local process only sees levels within the ids margin of its
        // own reference, so a reference with no spectrum nearby yields an
        // empty process instead of a clamp artifact at xi = 0.
        const UnfoldedProcess plus = unfold_levels(spec, ids, e0, opts.ids_margin);
        const UnfoldedProcess minus =
            unfold_levels(spec, ids, e0p, opts.ids_margin);
        return std::make_pair(
            count_in_process(plus, interval_plus.first, interval_plus.second),
            count_in_process(minus, interval_minus.first, interval_minus.second));
      });

  std::map<std::pair<long long, long long>, long long> joint;
  std::map<long long, long long> marg_plus, marg_minus;
  std::vector<long long> xs(counts.size()), ys(counts.size());
  for (std::size_t t = 0; t < counts.size(); ++t) {
    ++joint[counts[t]];
    ++marg_plus[counts[t].first];
    ++marg_minus[counts[t].second];
    xs[t] = counts[t].first;
    ys[t] = counts[t].second;
  }
  const double r = static_cast<double>(trials);

  EstimateReport report;
  report.kind = "joint";
  report.master_seed = seed;
  report.trials = trials;
  report.params = {{"e0", e0},
                   {"e0p", e0p},
                   {"box_size", box_volume_of(model, box_size)},
                   {"ids_box", ids.box_size},
                   {"lo_plus", interval_plus.first},
                   {"hi_plus", interval_plus.second},
                   {"lo_minus", interval_minus.first},
                   {"hi_minus", interval_minus.second}};

  double tv = 0.0;
  for (const auto& [kp, np] : marg_plus)
    for (const auto& [km, nm] : marg_minus) {
      const auto it = joint.find({kp, km});
      const long long hits = it == joint.end() ? 0 : it->second;
      const double product =
          (static_cast<double>(np) / r) * (static_cast<double>(nm) / r);
      tv += std::abs(static_cast<double>(hits) / r - product);
      ReportRow row = make_row({{"k_plus", static_cast<double>(kp)},
                                {"k_minus", static_cast<double>(km)}},
                               hits, trials);
      row.extras = {{"marginal_product", product}};
      report.rows.push_back(std::move(row));
    }

  const CovEstimate cov = count_covariance(xs, ys);
  report.fits = {{"cov", cov.cov},
                 {"cov_se", cov.se},
                 {"cov_lo", cov.lo},
                 {"cov_hi", cov.hi},
                 {"tv_distance", 0.5 * tv},
                 {"nu_plus", nu_plus},
                 {"nu_minus", nu_minus}};
  return report;
}

// ---------------------------------------------------------------------------
// Wegner estimate

EstimateReport wegner_estimate(const ModelSpec& model, double center,
                               const std::vector<double>& widths,
                               const std::vector<double>& box_sizes,
                               long long trials, std::uint64_t seed,
                               int workers) {
  model.validate();
  if (!std::isfinite(center)) throw ConfigError("wegner_estimate: center must be finite");
  if (widths.empty()) throw ConfigError("wegner_estimate: widths list must be nonempty");
  for (double w : widths)
    if (!(w >= 0.0) || !std::isfinite(w))
      throw ConfigError("wegner_estimate: widths must be nonnegative and finite");
  check_positive_sizes(box_sizes);
  if (trials < 1) throw ConfigError("wegner_estimate: trials must be >= 1");

  const std::vector<double> ws = sorted_copy(widths);
  const std::vector<double> sizes = sorted_copy(box_sizes);

  EstimateReport report;
  report.kind = "wegner";
  report.master_seed = seed;
  report.trials = trials;
  report.params = {{"center", center},
                   {"widths", static_cast<double>(ws.size())},
                   {"sizes", static_cast<double>(sizes.size())}};

  std::vector<FreqPoint> linear_pts;
  std::vector<double> fit_x, fit_y, fit_w;
  long long saturated = 0;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::uint64_t sub = trial_seed(seed, si);
    const auto events = run_trials<std::vector<unsigned char>>(
        trials, workers, [&](long long t) {
          const TrialBox tb = make_trial_box(
              model, sizes[si], trial_seed(sub, static_cast<std::uint64_t>(t)));
          std::vector<unsigned char> e(ws.size());
          for (std::size_t wi = 0; wi < ws.size(); ++wi) {
            const double half = 0.5 * ws[wi];
            e[wi] =
                count_in_interval(tb.op, center - half, center + half) >= 1 ? 1 : 0;
          }
          return e;
        });
    const double volume = box_volume_of(model, sizes[si]);
    for (std::size_t wi = 0; wi < ws.size(); ++wi) {
      long long hits = 0;
      for (const auto& e : events) hits += e[wi];
      ReportRow row = make_row({{"L", volume}, {"width", ws[wi]}}, hits, trials);
      const double jl = ws[wi] * volume;
      row.extras = {{"jl", jl},
                    {"saturated", row.freq >= kSaturationLevel ? 1.0 : 0.0}};
      if (row.freq >= kSaturationLevel) ++saturated;
      if (row.freq > 0.0 && row.freq <= kLinearRegimeCap) {
        fit_x.push_back(jl);
        fit_y.push_back(row.freq);
        fit_w.push_back(static_cast<double>(trials) /
                        (row.freq * (1.0 - row.freq)));
      }
      report.rows.push_back(std::move(row));
    }
  }

  report.fits.emplace_back("saturated_rows", static_cast<double>(saturated));
  if (fit_x.size() >= 2) {
    const LinearFit fit = linear_fit(fit_x, fit_y, fit_w);
    report.fits.emplace_back("wegner_c", fit.slope);
    report.fits.emplace_back("wegner_c_stderr", fit.slope_stderr);
    report.fits.emplace_back("intercept", fit.intercept);
    report.fits.emplace_back("r_squared", fit.r_squared);
    report.fits.emplace_back("fit_points", static_cast<double>(fit_x.size()));
  } else {
    report.notes.push_back("too few points in the linear regime; no fit");
  }
  if (saturated > 0)
    report.notes.push_back("frequency saturates near 1 for " +
                           std::to_string(saturated) + " rows");
  return report;
}

// ---------------------------------------------------------------------------
// Minami estimate

EstimateReport minami_estimate(const ModelSpec& model, double energy,
                               const std::vector<double>& eps_list,
                               const std::vector<double>& box_sizes,
                               long long trials, std::uint64_t seed,
                               int workers) {
  model.validate();
  if (!std::isfinite(energy)) throw ConfigError("minami_estimate: energy must be finite");
  if (eps_list.empty()) throw ConfigError("minami_estimate: eps list must be nonempty");
  for (double e : eps_list)
    if (!(e >= 0.0) || !std::isfinite(e))
      throw ConfigError("minami_estimate: eps must be nonnegative and finite");
  check_positive_sizes(box_sizes);
  if (trials < 1) throw ConfigError("minami_estimate: trials must be >= 1");

  const std::vector<double> eps = sorted_copy(eps_list);
  const std::vector<double> sizes = sorted_copy(box_sizes);

  EstimateReport report;
  report.kind = "minami";
  report.master_seed = seed;
  report.trials = trials;
  report.params = {{"energy", energy},
                   {"eps_values", static_cast<double>(eps.size())},
                   {"sizes", static_cast<double>(sizes.size())}};

  struct Cell {
    long long double_events = 0;  // trials with count >= 2
    long long excess = 0;         // sum of (count - 1)+
  };
  std::vector<FreqPoint> fit_pts;
  long long excess_total = 0;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const std::uint64_t sub = trial_seed(seed, si);
    const auto per_trial = run_trials<std::vector<long long>>(
        trials, workers, [&](long long t) {
          const TrialBox tb = make_trial_box(
              model, sizes[si], trial_seed(sub, static_cast<std::uint64_t>(t)));
          std::vector<long long> c(eps.size());
          for (std::size_t ei = 0; ei < eps.size(); ++ei)
            c[ei] = count_in_interval(tb.op, energy - eps[ei], energy + eps[ei]);
          return c;
        });
    const double volume = box_volume_of(model, sizes[si]);
    for (std::size_t ei = 0; ei < eps.size(); ++ei) {
      Cell cell;
      for (const auto& c : per_trial) {
        if (c[ei] >= 2) {
          ++cell.double_events;
          cell.excess += c[ei] - 1;
        }
      }
      excess_total += cell.excess;
      const double excess_freq =
          static_cast<double>(cell.excess) / static_cast<double>(trials);
      ReportRow row =
          make_row({{"L", volume}, {"eps", eps[ei]}}, cell.double_events, trials);
      row.extras = {{"excess_sum", static_cast<double>(cell.excess)},
                    {"excess_freq", excess_freq},
                    {"eps_l", eps[ei] * volume}};
      if (excess_freq > 0.0)
        fit_pts.push_back({eps[ei] * volume, excess_freq, trials});
      report.rows.push_back(std::move(row));
    }
  }

  if (excess_total == 0) {
    report.notes.push_back(
        "no multiple-occupancy events observed; lower-bound-only report");
  } else if (fit_pts.size() < 3) {
    report.notes.push_back("too few nonzero points for an exponent fit");
  } else {
    const ExponentFit fit = exponent_fit(fit_pts);
    report.fits.emplace_back("exponent", fit.exponent);
    report.fits.emplace_back("exponent_stderr", fit.stderr_);
    report.fits.emplace_back("rho_hat", fit.exponent - 1.0);
    report.fits.emplace_back("fit_points", static_cast<double>(fit.used_points));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Decorrelation probe

EstimateReport decorrelation_probe(const ModelSpec& model, double f_energy,
                                   double g_energy, double alpha,
                                   const std::vector<double>& big_sizes,
                                   long long trials, std::uint64_t seed,
                                   const DecorrelationOptions& opts) {
  model.validate();
  if (!std::isfinite(f_energy) || !std::isfinite(g_energy) || f_energy == g_energy)
    throw ConfigError("decorrelation_probe: invalid parameters (F must differ from G)");
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw ConfigError("decorrelation_probe: alpha must lie in (0, 1)");
  if (!std::isfinite(opts.k_const) || !(opts.k_const > 0.0))
    throw ConfigError("decorrelation_probe: k_const must be positive");
  check_positive_sizes(big_sizes);
  if (trials < 1) throw ConfigError("decorrelation_probe: trials must be >= 1");

  const std::vector<double> sizes = sorted_copy(big_sizes);

  EstimateReport report;
  report.kind = "decorrelate";
  report.master_seed = seed;
  report.trials = trials;
  report.params = {{"f", f_energy},
                   {"g", g_energy},
                   {"alpha", alpha},
                   {"k_const", opts.k_const},
                   {"decoupled", opts.decoupled_oracle ? 1.0 : 0.0}};

  struct JointCell {
    unsigned char a = 0, b = 0;
  };
  std::vector<double> fit_x, fit_y, fit_w;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const double big = sizes[si];
    const double small = static_cast<double>(std::max<long long>(
        1, std::llround(opts.k_const * std::pow(big, alpha))));
    const double half = 1.0 / big;
    const std::uint64_t sub = trial_seed(seed, si);
    const auto cells = run_trials<JointCell>(
        trials, opts.workers, [&](long long t) {
          JointCell cell;
          if (opts.decoupled_oracle) {
            const TrialBox ta = make_trial_box(
                model, small, trial_seed(sub, 2 * static_cast<std::uint64_t>(t)));
            const TrialBox tb = make_trial_box(
                model, small, trial_seed(sub, 2 * static_cast<std::uint64_t>(t) + 1));
            cell.a = count_in_interval(ta.op, f_energy - half, f_energy + half) >= 1;
            cell.b = count_in_interval(tb.op, g_energy - half, g_energy + half) >= 1;
          } else {
            const TrialBox tb = make_trial_box(
                model, small, trial_seed(sub, static_cast<std::uint64_t>(t)));
            cell.a = count_in_interval(tb.op, f_energy - half, f_energy + half) >= 1;
            cell.b = count_in_interval(tb.op, g_energy - half, g_energy + half) >= 1;
          }
          return cell;
        });

    long long n11 = 0, na = 0, nb = 0;
    for (const JointCell& c : cells) {
      na += c.a;
      nb += c.b;
      n11 += c.a && c.b;
    }
    const double r = static_cast<double>(trials);
    const double p11 = static_cast<double>(n11) / r;
    const double pa = static_cast<double>(na) / r;
    const double pb = static_cast<double>(nb) / r;
    const double small_vol = box_volume_of(model, small);

    ReportRow row = make_row({{"L", box_volume_of(model, big)}, {"l", small_vol}},
                             n11, trials);
    row.extras = {{"freq_f", pa},
                  {"freq_g", pb},
                  {"halfwidth", half},
                  {"scaled_freq", p11 / (small_vol * small_vol)}};
    if (n11 > 0 && na > 0 && nb > 0) {
      const double ratio = p11 / (pa * pb);
      // Delta-method variance of log ratio for the multinomial cell counts.
      const double varlog = std::max(
          0.0, (1.0 - p11) / (r * p11) - (1.0 - pa) / (r * pa) -
                   (1.0 - pb) / (r * pb) + 2.0 * (p11 - pa * pb) / (r * pa * pb));
      const double spread = kWilsonZ * std::sqrt(varlog);
      row.extras.emplace_back("ratio", ratio);
      row.extras.emplace_back("ratio_lo", ratio * std::exp(-spread));
      row.extras.emplace_back("ratio_hi", ratio * std::exp(spread));
      row.extras.emplace_back("ratio_defined", 1.0);
    } else {
      row.extras.emplace_back("ratio", 0.0);
      row.extras.emplace_back("ratio_lo", 0.0);
      row.extras.emplace_back("ratio_hi", 0.0);
      row.extras.emplace_back("ratio_defined", 0.0);
    }
    if (p11 > 0.0 && p11 < 1.0) {
      fit_x.push_back(std::log(big));
      fit_y.push_back(std::log(p11) - 2.0 * std::log(small_vol));
      fit_w.push_back(r * p11 / (1.0 - p11));  // inverse variance of log p11
    }
    report.rows.push_back(std::move(row));
  }

  if (fit_x.size() >= 3) {
    const LinearFit fit = linear_fit(fit_x, fit_y, fit_w);
    report.fits.emplace_back("slope", fit.slope);
    report.fits.emplace_back("slope_stderr", fit.slope_stderr);
    report.fits.emplace_back("gamma_hat", -fit.slope - 1.0);
    report.fits.emplace_back("gamma_stderr", fit.slope_stderr);
    report.fits.emplace_back("log_c", fit.intercept);
    report.fits.emplace_back("fit_points", static_cast<double>(fit_x.size()));
  } else {
    report.notes.push_back("too few nonzero joint frequencies for a scaling fit");
  }
  return report;
}

}  // namespace specstat
