#include "specstat/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "specstat/ensemble.hpp"
#include "specstat/errors.hpp"
#include "specstat/oscillation.hpp"
#include "specstat/report_io.hpp"
#include "specstat/resultant.hpp"
#include "specstat/rng.hpp"
#include "specstat/sensitivity.hpp"
#include "specstat/spectral.hpp"
#include "specstat/sublevel.hpp"

namespace specstat {
namespace {

std::vector<double> linspace(double lo, double hi, long long points) {
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (long long i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] =
        lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
  return grid;
}

ReportRow plain_row(std::vector<std::pair<std::string, double>> params,
                    double value) {
  ReportRow row;
  row.params = std::move(params);
  row.freq = value;
  row.ci.point = value;
  row.ci.lo = value;
  row.ci.hi = value;
  return row;
}

ReportRow counted_row(std::vector<std::pair<std::string, double>> params,
                      long long hits, long long trials) {
  ReportRow row;
  row.params = std::move(params);
  row.hits = hits;
  row.trials = trials;
  row.ci = wilson_interval(hits, trials);
  row.freq = row.ci.point;
  return row;
}

// --- props suites ----------------------------------------------------------

ReportRow gradjac_suite(const ModelSpec& model, long long samples,
                        std::uint64_t master) {
  const double l = model.is_discrete() ? 6.0 : 2.0;
  long long holds = 0;
  double worst = 0.0;  // most negative lhs - rhs margin seen
  for (long long i = 0; i < samples; ++i) {
    const DisorderSample sample =
        sample_disorder(model, l, trial_seed(master, static_cast<std::uint64_t>(i)));
    const BoxOperator op = build_box_operator(model, sample, l);
    const Spectrum spec = eigen_all(op, true);
    const int dim = static_cast<int>(spec.values.size());
    const int a = dim / 3;
    const int b = (2 * dim) / 3;
    const GradientVector ga = hf_gradient(spec, a, model, sample);
    const GradientVector gb = hf_gradient(spec, b, model, sample);
    const GradJacResult res = gradjac_bound_check(ga.partials, gb.partials);
    holds += res.holds;
    worst = std::min(worst, res.lhs - res.rhs);
  }
  ReportRow row = counted_row({{"suite", 0.0}}, holds, samples);
  row.extras = {{"worst", worst}};
  return row;
}

ReportRow oscillation_suite(long long samples, std::uint64_t master) {
  long long holds = 0;
  int worst_excess = 0;
  for (long long i = 0; i < samples; ++i) {
    const std::uint64_t seed = trial_seed(master, static_cast<std::uint64_t>(i));
    OscillationCheck check;
    switch (i % 4) {
      case 0: check = continuum_single_zero_case(seed); break;
      case 1: check = continuum_difference_case(seed); break;
      case 2: check = discrete_single_flip_case(seed); break;
      default: check = discrete_difference_case(seed); break;
    }
    holds += check.holds;
    worst_excess = std::max(worst_excess, check.sign_changes - check.bound);
  }
  ReportRow row = counted_row({{"suite", 1.0}}, holds, samples);
  row.extras = {{"worst", static_cast<double>(worst_excess)}};
  return row;
}

ReportRow resultant_suite(long long samples, std::uint64_t master) {
  long long holds = 0;
  double worst = 0.0;
  for (long long i = 0; i < samples; ++i) {
    Rng gen(trial_seed(master, static_cast<std::uint64_t>(i)));
    const auto draw = [&gen] {
      Eigen::Matrix2d m;
      m << uniform_sym(gen, 2.0), uniform_sym(gen, 2.0),
          uniform_sym(gen, 2.0), uniform_sym(gen, 2.0);
      return m;
    };
    const LeadingBlock blk = leading_block(draw(), draw(), draw(), draw());
    const double direct = det_a_generic(blk);
    const double closed = det_a_closed_form(blk);
    const double scale = std::max(1.0, std::max(std::abs(direct), std::abs(closed)));
    const double residual = std::abs(direct - closed) / scale;
    holds += residual <= 1e-10;
    worst = std::max(worst, residual);
  }
  ReportRow row = counted_row({{"suite", 2.0}}, holds, samples);
  row.extras = {{"worst", worst}};
  return row;
}

ReportRow sublevel_suite(std::uint64_t master) {
  const BoxDomain box = {{-1.0, 1.0}};
  const std::vector<double> eps_grid = {0.1, 0.05, 0.025};
  const std::vector<double> powers = {1.0, 2.0, 4.0};
  long long holds = 0, checks = 0;
  double worst = 0.0;
  std::uint64_t stream = 0;
  for (double p : powers) {
    const auto f = [p](const std::vector<double>& x) {
      return std::pow(std::abs(x[0]), p);
    };
    for (double eps : eps_grid) {
      const SublevelEstimate est = sublevel_measure(
          f, box, eps, 200000, trial_seed(master, stream++));
      const double exact = 2.0 * std::min(1.0, std::pow(eps, 1.0 / p));
      const double rel = std::abs(est.measure - exact) / exact;
      holds += rel <= 0.05;
      ++checks;
      worst = std::max(worst, rel);
    }
  }
  ReportRow row = counted_row({{"suite", 3.0}}, holds, checks);
  row.extras = {{"worst", worst}};
  return row;
}

}  // namespace

EstimateReport ids_report(const IdsTable& table, std::uint64_t master_seed) {
  EstimateReport report;
  report.kind = "ids";
  report.master_seed = master_seed;
  report.trials = table.trials;
  report.params = {{"box_size", table.box_size},
                   {"grid_points", static_cast<double>(table.grid.size())},
                   {"clip_events", static_cast<double>(table.clip_events)},
                   {"range_warning", table.range_warning ? 1.0 : 0.0}};
  for (std::size_t i = 0; i < table.grid.size(); ++i) {
    ReportRow row = plain_row({{"e", table.grid[i]}}, table.n_of_e[i]);
    row.extras = {{"density", table.density[i]}};
    report.rows.push_back(std::move(row));
  }
  if (table.range_warning)
    report.notes.push_back(
        "grid does not straddle the sampled spectrum; counts are one-sided");
  return report;
}

EstimateReport props_report(const ModelSpec& model, long long samples,
                            std::uint64_t master_seed) {
  model.validate();
  if (samples < 1) throw ConfigError("props: samples must be >= 1");
  EstimateReport report;
  report.kind = "props";
  report.master_seed = master_seed;
  report.trials = samples;
  report.params = {{"samples", static_cast<double>(samples)}};
  report.rows.push_back(gradjac_suite(model, samples, trial_seed(master_seed, 101)));
  report.rows.push_back(oscillation_suite(samples, trial_seed(master_seed, 102)));
  report.rows.push_back(resultant_suite(samples, trial_seed(master_seed, 103)));
  report.rows.push_back(sublevel_suite(trial_seed(master_seed, 104)));
  report.notes.push_back(
      "suite 0: gradient minor lower bound on model samples; suite 1: "
      "non-oscillation cases; suite 2: determinant identity on random "
      "frames; suite 3: sublevel measures of |x|^p vs closed form");
  report.notes.push_back(
      "worst column: suite 0 the most negative bound margin, suite 1 the "
      "largest sign-change excess, suite 2 the largest relative residual, "
      "suite 3 the largest relative error");
  return report;
}

EstimateReport gradients_report(const ModelSpec& model, double box_size,
                                int eigenvalue_index,
                                std::uint64_t master_seed) {
  model.validate();
  if (!(box_size > 0.0) || !std::isfinite(box_size))
    throw ConfigError("gradients: box_size must be > 0");
  // Same box convention as the ensemble estimators: site count when
  // discrete, length when continuum, both centered at the origin.
  DisorderSample sample;
  BoxOperator op;
  if (model.is_discrete()) {
    const long long n = std::llround(box_size);
    if (n < 1) throw ConfigError("gradients: box_size needs at least one site");
    const long long lo = -(n / 2);
    const long long hi = lo + n - 1;
    const double cover =
        static_cast<double>(std::max(std::llabs(lo), std::llabs(hi)));
    sample = sample_disorder(model, cover, trial_seed(master_seed, 0));
    op = build_box_operator_sites(model, sample, lo, hi);
  } else {
    sample = sample_disorder(model, box_size / 2.0, trial_seed(master_seed, 0));
    op = build_box_operator(model, sample, box_size / 2.0);
  }
  const Spectrum spec = eigen_all(op, true);
  const int dim = static_cast<int>(spec.values.size());

  EstimateReport report;
  report.kind = "gradients";
  report.master_seed = master_seed;
  report.trials = 1;
  report.params = {{"box_size", box_size},
                   {"dim", static_cast<double>(dim)},
                   {"eigenvalue_index", static_cast<double>(eigenvalue_index)}};

  int lo = 0, hi = dim;
  if (eigenvalue_index >= 0) {
    if (eigenvalue_index >= dim)
      throw ConfigError("gradients: eigenvalue_index out of range");
    lo = eigenvalue_index;
    hi = eigenvalue_index + 1;
  }
  for (int which = lo; which < hi; ++which) {
    const GradientVector g = hf_gradient(spec, which, model, sample);
    for (std::size_t i = 0; i < g.partials.size(); ++i) {
      ReportRow row = plain_row(
          {{"eigenvalue", static_cast<double>(which)},
           {"omega_index", static_cast<double>(g.first + static_cast<long long>(i))}},
          g.partials[i]);
      row.extras = {{"energy", g.energy}, {"l1_norm", g.l1_norm}};
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

EstimateReport run_experiment(const RunConfig& config) {
  const int workers = resolve_workers(config.workers);
  const ModelSpec& model = config.model;
  const std::uint64_t seed = config.master_seed;

  if (config.kind == "ids") {
    const long long points = static_cast<long long>(config.scalar("grid_points"));
    if (points < 2) throw ConfigError("ids: grid_points must be >= 2");
    const IdsTable table = estimate_ids(
        model, linspace(config.scalar("grid_lo"), config.scalar("grid_hi"), points),
        config.scalar("box_size"), config.trials, seed, workers);
    return ids_report(table, seed);
  }
  if (config.kind == "levelstats") {
    LevelStatsOptions opts;
    opts.ids_trials = static_cast<long long>(config.scalar_or("ids_trials", 200));
    opts.ids_margin = config.scalar_or("ids_margin", opts.ids_margin);
    opts.ids_step = config.scalar_or("ids_step", opts.ids_step);
    opts.workers = workers;
    return level_statistics(model, config.scalar("e0"),
                            config.intervals("intervals"),
                            config.scalar("box_size"), config.trials, seed,
                            opts);
  }
  if (config.kind == "joint") {
    JointOptions opts;
    opts.ids_trials = static_cast<long long>(config.scalar_or("ids_trials", 200));
    opts.ids_margin = config.scalar_or("ids_margin", opts.ids_margin);
    opts.ids_step = config.scalar_or("ids_step", opts.ids_step);
    opts.allow_zero_density = config.scalar_or("allow_zero_density", 0.0) != 0.0;
    opts.workers = workers;
    return joint_counts_two_energies(
        model, config.scalar("e0"), config.scalar("e0p"),
        config.scalar("box_size"), config.trials,
        config.intervals("interval_plus").front(),
        config.intervals("interval_minus").front(), seed, opts);
  }
  if (config.kind == "wegner")
    return wegner_estimate(model, config.scalar("center"),
                           config.list("widths"), config.list("box_sizes"),
                           config.trials, seed, workers);
  if (config.kind == "minami")
    return minami_estimate(model, config.scalar("energy"),
                           config.list("eps_list"), config.list("box_sizes"),
                           config.trials, seed, workers);
  if (config.kind == "decorrelate") {
    DecorrelationOptions opts;
    opts.k_const = config.scalar_or("k", 1.0);
    opts.decoupled_oracle = config.scalar_or("decoupled", 0.0) != 0.0;
    opts.workers = workers;
    return decorrelation_probe(model, config.scalar("f"), config.scalar("g"),
                               config.scalar("alpha"), config.list("sizes"),
                               config.trials, seed, opts);
  }
  if (config.kind == "props")
    return props_report(model,
                        static_cast<long long>(config.scalar_or("samples", 200)),
                        seed);
  if (config.kind == "gradients")
    return gradients_report(
        model, config.scalar("box_size"),
        static_cast<int>(config.scalar_or("eigenvalue_index", -1.0)), seed);
  throw ConfigError("unknown experiment kind '" + config.kind + "'");
}

std::string manifest_to_json(const RunManifest& manifest) {
  std::string out = "{\"config\":\"" + manifest.config_hash +
                    "\",\"tool_version\":\"" + manifest.tool_version +
                    "\",\"master_seed\":" + std::to_string(manifest.master_seed) +
                    ",\"wall_seconds\":" + format_double(manifest.wall_seconds) +
                    ",\"checksums\":{";
  for (std::size_t i = 0; i < manifest.checksums.size(); ++i) {
    if (i) out += ',';
    out += '"' + manifest.checksums[i].first + "\":\"" +
           manifest.checksums[i].second + '"';
  }
  out += "}}\n";
  return out;
}

RunManifest run_ensemble(const RunConfig& config) {
  namespace fs = std::filesystem;
  const auto start = std::chrono::steady_clock::now();

  const EstimateReport report = run_experiment(config);
  const std::string hash = config_hash(config);

  std::error_code ec;
  fs::create_directories(config.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" +
                  config.out_dir.string() + "': " + ec.message());

  RunManifest manifest;
  manifest.config_hash = hash;
  manifest.tool_version = kToolVersion;
  manifest.master_seed = config.master_seed;

  std::vector<fs::path> written;
  try {
    if (config.write_jsonl) {
      const fs::path path = config.out_dir / (report.kind + ".jsonl");
      write_text_file(path, to_jsonl(report, hash));
      written.push_back(path);
    }
    if (config.write_csv) {
      const fs::path path = config.out_dir / (report.kind + ".csv");
      write_text_file(path, to_csv(report, hash));
      written.push_back(path);
    }
    for (const fs::path& path : written)
      manifest.checksums.emplace_back(path.filename().string(),
                                      hex64(checksum_file(path)));
    std::sort(manifest.checksums.begin(), manifest.checksums.end());

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    // Written last: its presence certifies a completed run.
    write_text_file(config.out_dir / (report.kind + ".manifest.json"),
                    manifest_to_json(manifest));
  } catch (...) {
    for (const fs::path& path : written) fs::remove(path, ec);
    throw;
  }
  return manifest;
}

}  // namespace specstat
