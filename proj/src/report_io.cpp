#include "specstat/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "specstat/errors.hpp"

namespace specstat {
namespace {

using nlohmann::json;
using KvList = std::vector<std::pair<std::string, double>>;

// Minimal JSON string escaping; keys and notes are plain text but notes may
// contain quotes or backslashes in principle.
void append_json_string(std::string& out, std::string_view s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void append_kv_list(std::string& out, const KvList& kvs) {
  out += '[';
  bool first = true;
  for (const auto& [key, value] : kvs) {
    if (!first) out += ',';
    first = false;
    out += '[';
    append_json_string(out, key);
    out += ',';
    out += format_double(value);
    out += ']';
  }
  out += ']';
}

KvList parse_kv_list(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + ": expected an array");
  KvList kvs;
  kvs.reserve(j.size());
  for (const json& item : j) {
    if (!item.is_array() || item.size() != 2 || !item[0].is_string() ||
        !item[1].is_number())
      throw ConfigError(std::string(what) + ": expected [name, value] pairs");
    kvs.emplace_back(item[0].get<std::string>(), item[1].get<double>());
  }
  return kvs;
}

bool row_param_less(const ReportRow& a, const ReportRow& b) {
  const std::size_t n = std::min(a.params.size(), b.params.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a.params[i].first != b.params[i].first)
      return a.params[i].first < b.params[i].first;
    if (a.params[i].second != b.params[i].second)
      return a.params[i].second < b.params[i].second;
  }
  return a.params.size() < b.params.size();
}

const json& field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end())
    throw ConfigError(std::string("report record missing field '") + name + "'");
  return *it;
}

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value))
    throw NumericError("format_double: non-finite value in report");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

EstimateReport canonicalized(const EstimateReport& report) {
  EstimateReport out = report;
  std::stable_sort(out.rows.begin(), out.rows.end(), row_param_less);
  return out;
}

bool reports_equal(const EstimateReport& a, const EstimateReport& b) {
  if (a.kind != b.kind || a.master_seed != b.master_seed ||
      a.trials != b.trials || a.params != b.params || a.fits != b.fits ||
      a.notes != b.notes || a.rows.size() != b.rows.size())
    return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const ReportRow& x = a.rows[i];
    const ReportRow& y = b.rows[i];
    if (x.params != y.params || x.hits != y.hits || x.trials != y.trials ||
        x.freq != y.freq || x.ci.point != y.ci.point || x.ci.lo != y.ci.lo ||
        x.ci.hi != y.ci.hi || x.extras != y.extras)
      return false;
  }
  return true;
}

std::string to_jsonl(const EstimateReport& report,
                     std::string_view config_hash) {
  const EstimateReport canon = canonicalized(report);
  std::string out;
  out.reserve(256 + 160 * canon.rows.size());

  out += "{\"record\":\"header\",\"kind\":";
  append_json_string(out, canon.kind);
  out += ",\"config\":";
  append_json_string(out, config_hash);
  out += ",\"master_seed\":";
  out += std::to_string(canon.master_seed);
  out += ",\"trials\":";
  out += std::to_string(canon.trials);
  out += ",\"params\":";
  append_kv_list(out, canon.params);
  out += ",\"fits\":";
  append_kv_list(out, canon.fits);
  out += ",\"notes\":[";
  for (std::size_t i = 0; i < canon.notes.size(); ++i) {
    if (i) out += ',';
    append_json_string(out, canon.notes[i]);
  }
  out += "]}\n";

  for (const ReportRow& row : canon.rows) {
    out += "{\"record\":\"row\",\"params\":";
    append_kv_list(out, row.params);
    out += ",\"hits\":";
    out += std::to_string(row.hits);
    out += ",\"trials\":";
    out += std::to_string(row.trials);
    out += ",\"freq\":";
    out += format_double(row.freq);
    out += ",\"ci\":[";
    out += format_double(row.ci.lo);
    out += ',';
    out += format_double(row.ci.hi);
    out += "],\"extras\":";
    append_kv_list(out, row.extras);
    out += "}\n";
  }
  return out;
}

EstimateReport from_jsonl(const std::string& text,
                          std::string* config_hash_out) {
  EstimateReport report;
  std::istringstream in(text);
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("report line is not valid JSON: ") +
                        e.what());
    }
    const std::string record = field(j, "record").get<std::string>();
    if (record == "header") {
      if (have_header)
        throw ConfigError("report has more than one header record");
      have_header = true;
      report.kind = field(j, "kind").get<std::string>();
      report.master_seed = field(j, "master_seed").get<std::uint64_t>();
      report.trials = field(j, "trials").get<long long>();
      report.params = parse_kv_list(field(j, "params"), "header params");
      report.fits = parse_kv_list(field(j, "fits"), "header fits");
      for (const json& note : field(j, "notes"))
        report.notes.push_back(note.get<std::string>());
      if (config_hash_out != nullptr)
        *config_hash_out = field(j, "config").get<std::string>();
    } else if (record == "row") {
      if (!have_header)
        throw ConfigError("report row appears before the header record");
      ReportRow row;
      row.params = parse_kv_list(field(j, "params"), "row params");
      row.hits = field(j, "hits").get<long long>();
      row.trials = field(j, "trials").get<long long>();
      row.freq = field(j, "freq").get<double>();
      const json& ci = field(j, "ci");
      if (!ci.is_array() || ci.size() != 2)
        throw ConfigError("row ci: expected [lo, hi]");
      row.ci.point = row.freq;
      row.ci.lo = ci[0].get<double>();
      row.ci.hi = ci[1].get<double>();
      row.extras = parse_kv_list(field(j, "extras"), "row extras");
      report.rows.push_back(std::move(row));
    } else {
      throw ConfigError("unknown report record type '" + record + "'");
    }
  }
  if (!have_header) throw ConfigError("report text has no header record");
  return report;
}

std::string to_csv(const EstimateReport& report, std::string_view config_hash) {
  const EstimateReport canon = canonicalized(report);
  std::string out;
  out += "# kind=" + canon.kind + "\n";
  out += "# config=" + std::string(config_hash) + "\n";
  out += "# master_seed=" + std::to_string(canon.master_seed) + "\n";
  out += "# trials=" + std::to_string(canon.trials) + "\n";
  for (const auto& [key, value] : canon.params)
    out += "# param " + key + "=" + format_double(value) + "\n";
  for (const auto& [key, value] : canon.fits)
    out += "# fit " + key + "=" + format_double(value) + "\n";
  for (const std::string& note : canon.notes) out += "# note " + note + "\n";

  // Column layout comes from the first row; all estimators emit a uniform
  // name tuple per report, which is asserted here rather than assumed.
  std::string header;
  if (!canon.rows.empty()) {
    for (const auto& [key, value] : canon.rows.front().params)
      header += key + ",";
  }
  header += "hits,trials,freq,ci_lo,ci_hi";
  if (!canon.rows.empty())
    for (const auto& [key, value] : canon.rows.front().extras)
      header += "," + key;
  out += header + "\n";

  for (const ReportRow& row : canon.rows) {
    if (row.params.size() != canon.rows.front().params.size() ||
        row.extras.size() != canon.rows.front().extras.size())
      throw ConfigError("to_csv: rows have inconsistent column sets");
    std::string line;
    for (std::size_t i = 0; i < row.params.size(); ++i) {
      if (row.params[i].first != canon.rows.front().params[i].first)
        throw ConfigError("to_csv: rows have inconsistent column sets");
      line += format_double(row.params[i].second) + ",";
    }
    line += std::to_string(row.hits) + "," + std::to_string(row.trials) + "," +
            format_double(row.freq) + "," + format_double(row.ci.lo) + "," +
            format_double(row.ci.hi);
    for (std::size_t i = 0; i < row.extras.size(); ++i) {
      if (row.extras[i].first != canon.rows.front().extras[i].first)
        throw ConfigError("to_csv: rows have inconsistent column sets");
      line += "," + format_double(row.extras[i].second);
    }
    out += line + "\n";
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return buf.str();
}

std::uint64_t checksum_file(const std::filesystem::path& path) {
  return fnv1a64(read_text_file(path));
}

}  // namespace specstat
