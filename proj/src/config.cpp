#include "specstat/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "json.hpp"
#include "specstat/errors.hpp"
#include "specstat/report_io.hpp"

namespace specstat {
namespace {

using nlohmann::json;

enum class ValKind { Number, Integer, Flag, NumberList, Interval, IntervalList };

struct KeyRule {
  const char* key;
  ValKind kind;
  bool required;
};

// The experiment-section contract, one rule set per kind.
const std::map<std::string, std::vector<KeyRule>>& experiment_rules() {
  static const std::map<std::string, std::vector<KeyRule>> rules = {
      {"ids",
       {{"grid_lo", ValKind::Number, true},
        {"grid_hi", ValKind::Number, true},
        {"grid_points", ValKind::Integer, true},
        {"box_size", ValKind::Number, true}}},
      {"levelstats",
       {{"e0", ValKind::Number, true},
        {"box_size", ValKind::Number, true},
        {"intervals", ValKind::IntervalList, true},
        {"ids_trials", ValKind::Integer, false},
        {"ids_margin", ValKind::Number, false},
        {"ids_step", ValKind::Number, false}}},
      {"joint",
       {{"e0", ValKind::Number, true},
        {"e0p", ValKind::Number, true},
        {"box_size", ValKind::Number, true},
        {"interval_plus", ValKind::Interval, true},
        {"interval_minus", ValKind::Interval, true},
        {"ids_trials", ValKind::Integer, false},
        {"ids_margin", ValKind::Number, false},
        {"ids_step", ValKind::Number, false},
        {"allow_zero_density", ValKind::Flag, false}}},
      {"wegner",
       {{"center", ValKind::Number, true},
        {"widths", ValKind::NumberList, true},
        {"box_sizes", ValKind::NumberList, true}}},
      {"minami",
       {{"energy", ValKind::Number, true},
        {"eps_list", ValKind::NumberList, true},
        {"box_sizes", ValKind::NumberList, true}}},
      {"decorrelate",
       {{"f", ValKind::Number, true},
        {"g", ValKind::Number, true},
        {"alpha", ValKind::Number, true},
        {"k", ValKind::Number, false},
        {"sizes", ValKind::NumberList, true},
        {"decoupled", ValKind::Flag, false}}},
      {"props", {{"samples", ValKind::Integer, false}}},
      {"gradients",
       {{"box_size", ValKind::Number, true},
        {"eigenvalue_index", ValKind::Integer, false}}},
  };
  return rules;
}

class Collector {
 public:
  void add(const std::string& path, const std::string& what) {
    problems_.push_back(path + ": " + what);
  }
  bool empty() const { return problems_.empty(); }
  [[noreturn]] void raise() const {
    std::string msg = "config invalid (" +
                      std::to_string(problems_.size()) + " problem" +
                      (problems_.size() == 1 ? "" : "s") + "): ";
    for (std::size_t i = 0; i < problems_.size(); ++i) {
      if (i) msg += "; ";
      msg += problems_[i];
    }
    throw ConfigError(msg);
  }

 private:
  std::vector<std::string> problems_;
};

bool get_number(const json& v, double& out) {
  if (!v.is_number()) return false;
  out = v.get<double>();
  return std::isfinite(out);
}

bool get_integer(const json& v, double& out) {
  if (!get_number(v, out)) return false;
  return out == std::floor(out);
}

bool get_interval(const json& v, std::pair<double, double>& out) {
  if (!v.is_array() || v.size() != 2) return false;
  return get_number(v[0], out.first) && get_number(v[1], out.second);
}

// Reject keys not present in `allowed`, naming each offender.
void check_unknown(const json& section, const std::string& path,
                   const std::set<std::string>& allowed, Collector& errs) {
  for (const auto& [key, value] : section.items())
    if (allowed.find(key) == allowed.end())
      errs.add(path + "." + key, "unknown key '" + key + "'");
}

std::vector<double> number_list(const json& v, const std::string& path,
                                Collector& errs) {
  std::vector<double> out;
  if (!v.is_array()) {
    errs.add(path, "expected an array of numbers");
    return out;
  }
  for (const json& item : v) {
    double x = 0.0;
    if (!get_number(item, x)) {
      errs.add(path, "expected an array of finite numbers");
      return {};
    }
    out.push_back(x);
  }
  return out;
}

void parse_model_section(const json& sec, RunConfig& cfg, Collector& errs) {
  if (!sec.is_object()) {
    errs.add("model", "expected an object");
    return;
  }
  const std::string family =
      sec.contains("family") && sec["family"].is_string()
          ? sec["family"].get<std::string>()
          : std::string();
  if (family.empty()) {
    errs.add("model.family", "missing or non-string family name");
    return;
  }

  Density den = Density::Uniform01;
  double bound_m = 1.0;
  if (sec.contains("density")) {
    const std::string d =
        sec["density"].is_string() ? sec["density"].get<std::string>() : "";
    if (d == "uniform01") {
      den = Density::Uniform01;
    } else if (d == "uniform_sym") {
      den = Density::UniformSymmetricM;
    } else {
      errs.add("model.density", "expected 'uniform01' or 'uniform_sym'");
    }
  }
  if (sec.contains("bound_m") && !get_number(sec["bound_m"], bound_m))
    errs.add("model.bound_m", "expected a finite number");

  std::set<std::string> allowed = {"family", "density", "bound_m"};
  const auto number_key = [&](const char* key, bool required,
                              double fallback) {
    allowed.insert(key);
    double out = fallback;
    if (sec.contains(key)) {
      if (!get_number(sec[key], out))
        errs.add(std::string("model.") + key, "expected a finite number");
    } else if (required) {
      errs.add(std::string("model.") + key, "missing required key");
    }
    return out;
  };
  const auto list_key = [&](const char* key) {
    allowed.insert(key);
    if (!sec.contains(key)) {
      errs.add(std::string("model.") + key, "missing required key");
      return std::vector<double>{};
    }
    return number_list(sec[key], std::string("model.") + key, errs);
  };

  if (family == "anderson") {
    const double coupling = number_key("coupling", true, 0.0);
    if (errs.empty()) cfg.model = ModelSpec::anderson(coupling, den, bound_m);
  } else if (family == "simple_continuum") {
    const double h = number_key("grid_step_h", false, 0.01);
    if (errs.empty()) cfg.model = ModelSpec::simple_continuum(den, bound_m, h);
  } else if (family == "continuum_alloy") {
    const double h = number_key("grid_step_h", false, 0.01);
    const double radius = number_key("bump_radius_n", true, 1.0);
    const double spu = number_key("samples_per_unit", false, 64.0);
    if (radius < 1.0 || radius != std::floor(radius))
      errs.add("model.bump_radius_n", "expected an integer >= 1");
    if (spu < 2.0 || spu != std::floor(spu))
      errs.add("model.samples_per_unit", "expected an integer >= 2");
    if (errs.empty())
      cfg.model = ModelSpec::continuum_alloy(
          triangular_bump(static_cast<int>(radius), static_cast<int>(spu)),
          static_cast<int>(radius), den, bound_m, h);
  } else if (family == "discrete_alloy") {
    const double radius = number_key("support_radius_n", true, 0.0);
    const std::vector<double> d = list_key("site_profile_d");
    if (radius < 0.0 || radius != std::floor(radius))
      errs.add("model.support_radius_n", "expected an integer >= 0");
    if (errs.empty())
      cfg.model = ModelSpec::discrete_alloy(d, static_cast<int>(radius), den,
                                            bound_m);
  } else if (family == "multimer") {
    const std::vector<double> a = list_key("multimer_weights_a");
    const std::vector<double> b = list_key("hopping_b");
    if (errs.empty()) cfg.model = ModelSpec::multimer(a, b, den, bound_m);
  } else {
    errs.add("model.family", "unknown family '" + family + "'");
    return;
  }
  check_unknown(sec, "model", allowed, errs);

  if (errs.empty()) {
    try {
      cfg.model.validate();
    } catch (const ConfigError& e) {
      errs.add("model", e.what());
    }
  }
}

void parse_experiment_section(const json& sec, RunConfig& cfg,
                              Collector& errs) {
  if (!sec.is_object()) {
    errs.add("experiment", "expected an object");
    return;
  }
  if (!sec.contains("kind") || !sec["kind"].is_string()) {
    errs.add("experiment.kind", "missing or non-string experiment kind");
    return;
  }
  cfg.kind = sec["kind"].get<std::string>();
  const auto rules_it = experiment_rules().find(cfg.kind);
  if (rules_it == experiment_rules().end()) {
    errs.add("experiment.kind", "unknown kind '" + cfg.kind + "'");
    return;
  }

  std::set<std::string> allowed = {"kind"};
  for (const KeyRule& rule : rules_it->second) {
    allowed.insert(rule.key);
    const std::string path = std::string("experiment.") + rule.key;
    if (!sec.contains(rule.key)) {
      if (rule.required) errs.add(path, "missing required key");
      continue;
    }
    const json& v = sec[rule.key];
    double x = 0.0;
    std::pair<double, double> iv;
    switch (rule.kind) {
      case ValKind::Number:
        if (get_number(v, x))
          cfg.scalars[rule.key] = x;
        else
          errs.add(path, "expected a finite number");
        break;
      case ValKind::Integer:
        if (get_integer(v, x))
          cfg.scalars[rule.key] = x;
        else
          errs.add(path, "expected an integer");
        break;
      case ValKind::Flag:
        if (v.is_boolean())
          cfg.scalars[rule.key] = v.get<bool>() ? 1.0 : 0.0;
        else
          errs.add(path, "expected true or false");
        break;
      case ValKind::NumberList:
        cfg.lists[rule.key] = number_list(v, path, errs);
        break;
      case ValKind::Interval:
        if (get_interval(v, iv))
          cfg.interval_lists[rule.key] = {iv};
        else
          errs.add(path, "expected [lo, hi]");
        break;
      case ValKind::IntervalList: {
        if (!v.is_array() || v.empty()) {
          errs.add(path, "expected a non-empty array of [lo, hi] pairs");
          break;
        }
        std::vector<std::pair<double, double>> ivs;
        bool ok = true;
        for (const json& item : v) {
          if (!get_interval(item, iv)) {
            errs.add(path, "expected a non-empty array of [lo, hi] pairs");
            ok = false;
            break;
          }
          ivs.push_back(iv);
        }
        if (ok) cfg.interval_lists[rule.key] = std::move(ivs);
        break;
      }
    }
  }
  check_unknown(sec, "experiment", allowed, errs);
}

void parse_ensemble_section(const json& sec, RunConfig& cfg, Collector& errs) {
  if (!sec.is_object()) {
    errs.add("ensemble", "expected an object");
    return;
  }
  check_unknown(sec, "ensemble", {"trials", "master_seed", "workers"}, errs);
  double x = 0.0;
  if (sec.contains("trials")) {
    if (get_integer(sec["trials"], x) && x >= 1.0)
      cfg.trials = static_cast<long long>(x);
    else
      errs.add("ensemble.trials", "expected an integer >= 1");
  }
  if (sec.contains("master_seed")) {
    const json& v = sec["master_seed"];
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0))
      cfg.master_seed = v.get<std::uint64_t>();
    else
      errs.add("ensemble.master_seed", "expected a nonnegative integer");
  }
  if (sec.contains("workers")) {
    if (get_integer(sec["workers"], x) && x >= 0.0)
      cfg.workers = static_cast<int>(x);
    else
      errs.add("ensemble.workers", "expected an integer >= 0");
  }
}

void parse_output_section(const json& sec, RunConfig& cfg, Collector& errs) {
  if (!sec.is_object()) {
    errs.add("output", "expected an object");
    return;
  }
  check_unknown(sec, "output", {"directory", "format"}, errs);
  if (sec.contains("directory")) {
    if (sec["directory"].is_string())
      cfg.out_dir = sec["directory"].get<std::string>();
    else
      errs.add("output.directory", "expected a string");
  }
  if (sec.contains("format")) {
    const std::string f =
        sec["format"].is_string() ? sec["format"].get<std::string>() : "";
    if (f == "csv") {
      cfg.write_csv = true;
      cfg.write_jsonl = false;
    } else if (f == "jsonl") {
      cfg.write_csv = false;
      cfg.write_jsonl = true;
    } else if (f == "both") {
      cfg.write_csv = true;
      cfg.write_jsonl = true;
    } else {
      errs.add("output.format", "expected 'csv', 'jsonl', or 'both'");
    }
  }
}

void append_model_canonical(std::string& out, const ModelSpec& m) {
  out += "\"model\":{\"bound_m\":" + format_double(m.bound_M) +
         ",\"density\":\"" + density_name(m.density) + "\",\"family\":\"" +
         family_name(m.family) + "\"";
  switch (m.family) {
    case Family::SimpleContinuum:
      out += ",\"grid_step_h\":" + format_double(m.grid_step_h);
      break;
    case Family::ContinuumAlloy: {
      out += ",\"grid_step_h\":" + format_double(m.grid_step_h) +
             ",\"q\":[";
      for (std::size_t i = 0; i < m.q.val.size(); ++i) {
        if (i) out += ',';
        out += format_double(m.q.val[i]);
      }
      out += "],\"q_lo\":" + format_double(m.q.lo) +
             ",\"q_hi\":" + format_double(m.q.hi) +
             ",\"support_radius_n\":" + std::to_string(m.support_radius_N);
      break;
    }
    case Family::DiscreteAlloy: {
      out += ",\"site_profile_d\":[";
      for (std::size_t i = 0; i < m.discrete_site_profile_d.size(); ++i) {
        if (i) out += ',';
        out += format_double(m.discrete_site_profile_d[i]);
      }
      out += "],\"support_radius_n\":" + std::to_string(m.support_radius_N);
      break;
    }
    case Family::Multimer: {
      out += ",\"hopping_b\":[";
      for (std::size_t i = 0; i < m.hopping_b.size(); ++i) {
        if (i) out += ',';
        out += format_double(m.hopping_b[i]);
      }
      out += "],\"multimer_weights_a\":[";
      for (std::size_t i = 0; i < m.multimer_weights_a.size(); ++i) {
        if (i) out += ',';
        out += format_double(m.multimer_weights_a[i]);
      }
      out += ']';
      break;
    }
  }
  out += '}';
}

}  // namespace

bool RunConfig::has(const std::string& key) const {
  return scalars.count(key) > 0 || lists.count(key) > 0 ||
         interval_lists.count(key) > 0;
}

double RunConfig::scalar(const std::string& key) const {
  const auto it = scalars.find(key);
  if (it == scalars.end())
    throw ConfigError("config has no scalar parameter '" + key + "'");
  return it->second;
}

double RunConfig::scalar_or(const std::string& key, double fallback) const {
  const auto it = scalars.find(key);
  return it == scalars.end() ? fallback : it->second;
}

const std::vector<double>& RunConfig::list(const std::string& key) const {
  const auto it = lists.find(key);
  if (it == lists.end())
    throw ConfigError("config has no list parameter '" + key + "'");
  return it->second;
}

const std::vector<std::pair<double, double>>& RunConfig::intervals(
    const std::string& key) const {
  const auto it = interval_lists.find(key);
  if (it == interval_lists.end())
    throw ConfigError("config has no interval parameter '" + key + "'");
  return it->second;
}

RunConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object())
    throw ConfigError("config root must be a JSON object");

  RunConfig cfg;
  Collector errs;
  check_unknown(root, "config",
                {"model", "experiment", "ensemble", "output"}, errs);
  if (root.contains("model"))
    parse_model_section(root["model"], cfg, errs);
  else
    errs.add("model", "missing section");
  if (root.contains("experiment"))
    parse_experiment_section(root["experiment"], cfg, errs);
  else
    errs.add("experiment", "missing section");
  if (root.contains("ensemble"))
    parse_ensemble_section(root["ensemble"], cfg, errs);
  if (root.contains("output"))
    parse_output_section(root["output"], cfg, errs);

  if (!errs.empty()) errs.raise();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  return parse_config_text(read_text_file(path));
}

std::string canonical_config_text(const RunConfig& config) {
  std::string out = "{";
  out += "\"ensemble\":{\"master_seed\":" + std::to_string(config.master_seed) +
         ",\"trials\":" + std::to_string(config.trials) + "},";
  out += "\"experiment\":{\"kind\":\"" + config.kind + "\"";
  // std::map iteration gives sorted keys; the three value groups cannot
  // share a name, so a merged sorted view is not required for stability.
  for (const auto& [key, value] : config.scalars)
    out += ",\"" + key + "\":" + format_double(value);
  for (const auto& [key, values] : config.lists) {
    out += ",\"" + key + "\":[";
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out += ',';
      out += format_double(values[i]);
    }
    out += ']';
  }
  for (const auto& [key, ivs] : config.interval_lists) {
    out += ",\"" + key + "\":[";
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      if (i) out += ',';
      out += '[' + format_double(ivs[i].first) + ',' +
             format_double(ivs[i].second) + ']';
    }
    out += ']';
  }
  out += "},";
  append_model_canonical(out, config.model);
  out += '}';
  return out;
}

std::string config_hash(const RunConfig& config) {
  return hex64(fnv1a64(canonical_config_text(config)));
}

}  // namespace specstat
