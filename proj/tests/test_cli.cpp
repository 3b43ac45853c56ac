#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "specstat/experiments.hpp"
#include "specstat/report_io.hpp"

using namespace specstat;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
  static const fs::path root = [] {
    fs::path p = fs::temp_directory_path() /
                 ("specstat_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = scratch_root() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch_root() / name;
  std::ofstream out(p);
  out << text;
  return p;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const char* bin = std::getenv("SPECSTAT_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "SPECSTAT_BIN must point at the CLI binary");
  const fs::path out_file =
      scratch_root() / ("stdout." + std::to_string(counter));
  const fs::path err_file =
      scratch_root() / ("stderr." + std::to_string(counter));
  ++counter;
  const std::string cmd = std::string(bin) + " " + args + " >" +
                          out_file.string() + " 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = read_text_file(out_file);
  result.err = read_text_file(err_file);
  return result;
}

const char* kWegner = R"({
  "model": {"family": "anderson", "coupling": 2.0},
  "experiment": {"kind": "wegner", "center": 0.3,
                 "widths": [0.05, 0.1], "box_sizes": [40, 80]},
  "ensemble": {"trials": 200, "master_seed": 7}
})";

const char* kProps = R"({
  "model": {"family": "anderson", "coupling": 2.0},
  "experiment": {"kind": "props", "samples": 12},
  "ensemble": {"master_seed": 5}
})";

const char* kGradients = R"({
  "model": {"family": "anderson", "coupling": 2.0},
  "experiment": {"kind": "gradients", "box_size": 11, "eigenvalue_index": 5},
  "ensemble": {"master_seed": 3}
})";

const char* kIds = R"({
  "model": {"family": "anderson", "coupling": 2.0},
  "experiment": {"kind": "ids", "grid_lo": -3.0, "grid_hi": 3.0,
                 "grid_points": 25, "box_size": 60},
  "ensemble": {"trials": 60, "master_seed": 2}
})";

}  // namespace

TEST_CASE("successful run writes data files, checksums, and manifest") {
  const fs::path cfg = write_config("wegner.json", kWegner);
  const fs::path out = scratch_dir("run_ok");
  const CliResult res =
      run_cli("wegner --config " + cfg.string() + " --out " + out.string());
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(out / "wegner.jsonl"));
  CHECK(fs::exists(out / "wegner.csv"));
  CHECK(fs::exists(out / "wegner.manifest.json"));
  CHECK(res.out.find("wegner.manifest.json") != std::string::npos);

  const auto manifest =
      nlohmann::json::parse(read_text_file(out / "wegner.manifest.json"));
  CHECK(manifest.at("tool_version").get<std::string>() == kToolVersion);
  CHECK(manifest.at("master_seed").get<std::uint64_t>() == 7);
  CHECK(manifest.at("wall_seconds").get<double>() >= 0.0);
  const auto& sums = manifest.at("checksums");
  REQUIRE(sums.size() == 2);
  for (const auto& [name, hex] : sums.items())
    CHECK(hex.get<std::string>() == hex64(checksum_file(out / name)));

  // The embedded config hash matches what the library derives.
  RunConfig config = parse_config(cfg);
  CHECK(manifest.at("config").get<std::string>() == config_hash(config));

  // Data files embed the same hash.
  std::string embedded;
  const EstimateReport report =
      from_jsonl(read_text_file(out / "wegner.jsonl"), &embedded);
  CHECK(embedded == config_hash(config));
  CHECK(report.kind == "wegner");
  CHECK(report.master_seed == 7);
  CHECK(report.rows.size() == 4);
}

TEST_CASE("worker count never changes the data bytes") {
  const fs::path cfg = write_config("wegner_w.json", kWegner);
  const fs::path out1 = scratch_dir("w1");
  const fs::path out8 = scratch_dir("w8");
  CHECK(run_cli("wegner --config " + cfg.string() + " --workers 1 --out " +
                out1.string())
            .exit_code == 0);
  CHECK(run_cli("wegner --config " + cfg.string() + " --workers 8 --out " +
                out8.string())
            .exit_code == 0);
  CHECK(read_text_file(out1 / "wegner.jsonl") ==
        read_text_file(out8 / "wegner.jsonl"));
  CHECK(read_text_file(out1 / "wegner.csv") ==
        read_text_file(out8 / "wegner.csv"));

  // The config hash is also invariant: parallelism is not part of identity.
  const auto m1 = nlohmann::json::parse(read_text_file(out1 / "wegner.manifest.json"));
  const auto m8 = nlohmann::json::parse(read_text_file(out8 / "wegner.manifest.json"));
  CHECK(m1.at("config") == m8.at("config"));
  CHECK(m1.at("checksums") == m8.at("checksums"));
}

TEST_CASE("seed and format overrides are honored") {
  const fs::path cfg = write_config("wegner_s.json", kWegner);
  const fs::path out = scratch_dir("seeded");
  const CliResult res =
      run_cli("wegner --config " + cfg.string() + " --seed 99 --format jsonl" +
              " --out " + out.string());
  CHECK(res.exit_code == 0);
  CHECK(fs::exists(out / "wegner.jsonl"));
  CHECK(!fs::exists(out / "wegner.csv"));
  const auto manifest =
      nlohmann::json::parse(read_text_file(out / "wegner.manifest.json"));
  CHECK(manifest.at("master_seed").get<std::uint64_t>() == 99);
  const EstimateReport report =
      from_jsonl(read_text_file(out / "wegner.jsonl"), nullptr);
  CHECK(report.master_seed == 99);
}

TEST_CASE("props, gradients, and ids subcommands run end to end") {
  const fs::path out = scratch_dir("kinds");

  const fs::path props = write_config("props.json", kProps);
  CHECK(run_cli("props --config " + props.string() + " --out " + out.string() +
                " --format jsonl")
            .exit_code == 0);
  const EstimateReport props_rep =
      from_jsonl(read_text_file(out / "props.jsonl"), nullptr);
  REQUIRE(props_rep.rows.size() == 4);
  for (const ReportRow& row : props_rep.rows)
    CHECK(row.hits == row.trials);  // every suite passes at this seed

  const fs::path grads = write_config("grads.json", kGradients);
  CHECK(run_cli("gradients --config " + grads.string() + " --out " +
                out.string() + " --format jsonl")
            .exit_code == 0);
  const EstimateReport grad_rep =
      from_jsonl(read_text_file(out / "gradients.jsonl"), nullptr);
  CHECK(grad_rep.rows.size() == 11);  // one row per disorder site
  double l1 = 0.0;
  for (const ReportRow& row : grad_rep.rows) {
    CHECK(row.freq >= 0.0);
    l1 += row.freq;
  }
  // Full-box gradient sums to the coupling constant.
  CHECK(l1 == doctest::Approx(2.0).epsilon(1e-9));

  const fs::path ids = write_config("ids.json", kIds);
  CHECK(run_cli("ids --config " + ids.string() + " --out " + out.string() +
                " --format jsonl")
            .exit_code == 0);
  const EstimateReport ids_rep =
      from_jsonl(read_text_file(out / "ids.jsonl"), nullptr);
  REQUIRE(ids_rep.rows.size() == 25);
  for (std::size_t i = 1; i < ids_rep.rows.size(); ++i)
    CHECK(ids_rep.rows[i].freq >= ids_rep.rows[i - 1].freq);  // N is monotone
}

TEST_CASE("config errors exit with code 2") {
  const fs::path cfg = write_config("wegner_m.json", kWegner);
  // Kind mismatch between config and subcommand.
  CliResult res = run_cli("minami --config " + cfg.string());
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("wegner") != std::string::npos);

  // Invalid config content.
  const fs::path bad = write_config(
      "bad.json", R"({"model": {"family": "anderson"}, "experiment": {"kind": "wegner"}})");
  res = run_cli("wegner --config " + bad.string());
  CHECK(res.exit_code == 2);
  CHECK(res.err.find("config error") != std::string::npos);
}

TEST_CASE("io errors exit with code 4") {
  // Missing config file.
  CliResult res = run_cli("wegner --config " +
                          (scratch_root() / "absent.json").string());
  CHECK(res.exit_code == 4);

  // Unwritable output directory.
  const fs::path cfg = write_config("wegner_io.json", kWegner);
  res = run_cli("wegner --config " + cfg.string() + " --out /proc/specstat_x");
  CHECK(res.exit_code == 4);
  CHECK(!fs::exists("/proc/specstat_x"));
}

TEST_CASE("failed runs leave no manifest and no partial data files") {
  const fs::path cfg = write_config("wegner_p.json", kWegner);
  const fs::path out = scratch_dir("partial");
  // A directory squatting on the CSV path makes the second write fail after
  // the JSONL file has already been written.
  fs::create_directories(out / "wegner.csv");
  const CliResult res =
      run_cli("wegner --config " + cfg.string() + " --out " + out.string());
  CHECK(res.exit_code == 4);
  CHECK(!fs::exists(out / "wegner.jsonl"));  // partial output was removed
  CHECK(!fs::exists(out / "wegner.manifest.json"));
}

TEST_CASE("reruns with identical config and seed are byte-identical") {
  const fs::path cfg = write_config("wegner_r.json", kWegner);
  const fs::path a = scratch_dir("rerun_a");
  const fs::path b = scratch_dir("rerun_b");
  CHECK(run_cli("wegner --config " + cfg.string() + " --out " + a.string())
            .exit_code == 0);
  CHECK(run_cli("wegner --config " + cfg.string() + " --out " + b.string())
            .exit_code == 0);
  CHECK(read_text_file(a / "wegner.jsonl") == read_text_file(b / "wegner.jsonl"));
  CHECK(read_text_file(a / "wegner.csv") == read_text_file(b / "wegner.csv"));
}
