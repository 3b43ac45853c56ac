// specstat — ensemble experiments on random Schrödinger operators.
//
// Each subcommand reads a JSON config (sections: model, experiment,
// ensemble, output), runs the named experiment, and writes the report files
// plus a manifest into the output directory.  The experiment kind in the
// config must match the subcommand.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 I/O error, 1 anything else.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "specstat/errors.hpp"
#include "specstat/experiments.hpp"
#include "specstat/report_io.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = -1;      // -1: keep config value
  std::string out_dir;   // empty: keep config value
  std::string format;    // empty: keep config value
};

void add_common_options(CLI::App* cmd, CliOverrides& opts) {
  cmd->add_option("--config", opts.config_path, "JSON experiment config")
      ->required();
  cmd->add_option("--seed", opts.seed, "override ensemble.master_seed")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--workers", opts.workers, "override ensemble.workers")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", opts.out_dir, "override output.directory");
  cmd->add_option("--format", opts.format, "override output.format")
      ->check(CLI::IsMember({"csv", "jsonl", "both"}));
}

int run_subcommand(const std::string& kind, const CliOverrides& opts) {
  specstat::RunConfig config = specstat::parse_config(opts.config_path);
  if (config.kind != kind)
    throw specstat::ConfigError("config names experiment kind '" + config.kind +
                                "' but the subcommand is '" + kind + "'");
  if (opts.seed_set) config.master_seed = opts.seed;
  if (opts.workers >= 0) config.workers = opts.workers;
  if (!opts.out_dir.empty()) config.out_dir = opts.out_dir;
  if (!opts.format.empty()) {
    config.write_csv = opts.format != "jsonl";
    config.write_jsonl = opts.format != "csv";
  }

  const specstat::RunManifest manifest = specstat::run_ensemble(config);
  for (const auto& [name, hex] : manifest.checksums)
    std::printf("wrote %s  (fnv1a %s)\n",
                (config.out_dir / name).string().c_str(), hex.c_str());
  std::printf("wrote %s\n",
              (config.out_dir / (kind + ".manifest.json")).string().c_str());
  std::printf("config %s  seed %llu  wall %.2fs\n", manifest.config_hash.c_str(),
              static_cast<unsigned long long>(manifest.master_seed),
              manifest.wall_seconds);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for 1D random Schrödinger operators"};
  app.require_subcommand(1);

  const char* subcommands[] = {"ids",    "levelstats",  "joint", "wegner",
                               "minami", "decorrelate", "props", "gradients"};
  const char* blurbs[] = {
      "integrated density of states on an energy grid",
      "unfolded level statistics against the Poisson law",
      "joint interval counts of two unfolded processes",
      "eigenvalue-in-interval frequency versus interval width",
      "multiple-occupancy statistics of shrinking intervals",
      "joint micro-box occupation at two separated energies",
      "property suites: gradient minors, oscillation, determinant "
      "identity, sublevel measures",
      "eigenvalue gradient table for one disorder sample"};

  CliOverrides opts;
  for (std::size_t i = 0; i < std::size(subcommands); ++i)
    add_common_options(app.add_subcommand(subcommands[i], blurbs[i]), opts);

  CLI11_PARSE(app, argc, argv);

  try {
    return run_subcommand(app.get_subcommands().front()->get_name(), opts);
  } catch (const specstat::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const specstat::NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 3;
  } catch (const specstat::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
