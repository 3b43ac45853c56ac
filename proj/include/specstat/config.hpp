#pragma once
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "specstat/models.hpp"

namespace specstat {

// Run configuration: one JSON file with four flat sections
// (model / experiment / ensemble / output).  Parsing validates everything
// before any computation and reports every problem at once, each prefixed
// with its key path; unknown keys anywhere are rejected by name.  The exact
// key set per experiment kind is the documented contract (see README).
struct RunConfig {
  ModelSpec model;

  std::string kind;  // ids | levelstats | joint | wegner | minami |
                     // decorrelate | props | gradients
  std::map<std::string, double> scalars;  // per-kind scalar parameters
  std::map<std::string, std::vector<double>> lists;
  std::map<std::string, std::vector<std::pair<double, double>>> interval_lists;

  long long trials = 2000;
  std::uint64_t master_seed = 1;
  int workers = 0;  // 0 -> SPECSTAT_WORKERS env or 1 (resolve_workers)

  std::filesystem::path out_dir = ".";
  bool write_csv = true;
  bool write_jsonl = true;

  // Accessors for validated experiment parameters.
  bool has(const std::string& key) const;
  double scalar(const std::string& key) const;  // throws ConfigError if absent
  double scalar_or(const std::string& key, double fallback) const;
  const std::vector<double>& list(const std::string& key) const;
  const std::vector<std::pair<double, double>>& intervals(
      const std::string& key) const;
};

RunConfig parse_config_text(const std::string& json_text);
RunConfig parse_config(const std::filesystem::path& path);  // IoError if absent

// Canonical serialization of the result-determining part of a config
// (model, experiment, trials, master seed; sorted keys, 17-digit numbers).
// Worker count and output destination are deliberately excluded so that the
// same experiment run with different parallelism or target directory carries
// the same hash.
std::string canonical_config_text(const RunConfig& config);

// 16-hex-digit FNV-1a of canonical_config_text.
std::string config_hash(const RunConfig& config);

}  // namespace specstat
