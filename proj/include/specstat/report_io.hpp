#pragma once
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "specstat/stats.hpp"

namespace specstat {

// Canonical serialization of estimate reports.
//
// Contracts:
//  * Doubles render with 17 significant digits, enough to round-trip any
//    finite value exactly; non-finite values are refused (NumericError).
//  * Row order in a file is canonical: rows sort by their parameter tuple
//    (names, then values), independent of in-memory order, so identical
//    report content always produces identical bytes.
//  * Every file embeds the config hash and the master seed.
//  * JSONL carries the full report (header line + one line per row) and
//    parses back to an equal report; CSV is the flat summary table.

// Fixed-width decimal rendering of a finite double (17 significant digits,
// "%.17g"); throws NumericError on NaN or infinity.
std::string format_double(double value);

// 64-bit FNV-1a over a byte string, and its 16-digit lowercase hex form.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

// Copy of the report with rows in canonical order (sorted by parameter
// tuple, stable on ties).  Serializers apply this internally.
EstimateReport canonicalized(const EstimateReport& report);

// Exact structural equality (used by round-trip and determinism checks).
bool reports_equal(const EstimateReport& a, const EstimateReport& b);

// JSONL: first line is a header record (kind, config hash, master seed,
// trial count, report parameters, fitted quantities, notes); each
// subsequent line is one row record.  Ends with a newline.
std::string to_jsonl(const EstimateReport& report, std::string_view config_hash);

// Inverse of to_jsonl; throws ConfigError on malformed input.  The config
// hash read from the header is returned through config_hash_out when the
// pointer is non-null.
EstimateReport from_jsonl(const std::string& text,
                          std::string* config_hash_out = nullptr);

// CSV summary: "# key=value" preamble (kind, config, master_seed, trials,
// report parameters, fits, notes), then a column-header line, then one line
// per row.  An empty report still carries the preamble and the header line.
std::string to_csv(const EstimateReport& report, std::string_view config_hash);

// Whole-file helpers; failures surface as IoError.
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);
std::uint64_t checksum_file(const std::filesystem::path& path);

}  // namespace specstat
