#include "specstat/ensemble.hpp"

#include <cstdlib>
#include <string>

namespace specstat {

int resolve_workers(int requested) {
  if (requested < 0) throw ConfigError("workers: must be nonnegative");
  if (requested > 0) return requested;
  const char* env = std::getenv("SPECSTAT_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  try {
    std::size_t used = 0;
    const int parsed = std::stoi(env, &used);
    if (used != std::string(env).size() || parsed <= 0)
      throw ConfigError("SPECSTAT_WORKERS: expected a positive integer");
    return parsed;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("SPECSTAT_WORKERS: expected a positive integer");
  }
}

}  // namespace specstat
