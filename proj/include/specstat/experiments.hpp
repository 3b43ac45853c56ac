#pragma once
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "specstat/config.hpp"
#include "specstat/stats.hpp"

namespace specstat {

inline constexpr const char* kToolVersion = "specstat 1.0.0";

// Dispatches a validated config to its estimator and returns the report.
// Worker counts are resolved here (0 -> SPECSTAT_WORKERS env or 1).
EstimateReport run_experiment(const RunConfig& config);

// Conversions used by `run_experiment` for the non-ensemble kinds; exposed
// for direct use and testing.
EstimateReport ids_report(const IdsTable& table, std::uint64_t master_seed);
EstimateReport props_report(const ModelSpec& model, long long samples,
                            std::uint64_t master_seed);
EstimateReport gradients_report(const ModelSpec& model, double box_size,
                                int eigenvalue_index, std::uint64_t master_seed);

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::uint64_t master_seed = 0;
  // (file name, 16-hex-digit FNV-1a) per written data file, sorted by name.
  std::vector<std::pair<std::string, std::string>> checksums;
  double wall_seconds = 0.0;
};

std::string manifest_to_json(const RunManifest& manifest);

// Full pipeline: compute, write the configured data files into
// config.out_dir, verify their checksums, then write the manifest
// ("<kind>.manifest.json") last.  The manifest exists if and only if
// everything before it succeeded; on any failure the files written by this
// call are removed before the exception propagates.  Data files are
// byte-identical across worker counts; the manifest embeds the wall time
// and is therefore excluded from that guarantee.
RunManifest run_ensemble(const RunConfig& config);

}  // namespace specstat
