#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "ppsim/design.hpp"

namespace ppsim {

// Invalid or unknown configuration input; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExecutionSpec {
  long n_sims = 0;
  std::uint64_t master_seed = 0;
  int parallelism = 0;  // 0 = resolve from environment / default 1
};

struct OutputSpec {
  std::string directory = "out";
  bool full_precision = false;
};

struct RunConfig {
  DesignSpec design;
  ScenarioSpec scenario;
  ExecutionSpec execution;
  OutputSpec output;
};

inline constexpr const char* kConfigSchema = "ppsim-run/1";

// Parses and fully validates a run configuration. Unknown keys anywhere in
// the document are hard errors.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// FNV-1a over the canonical (key-sorted, whitespace-free) JSON dump, so the
// hash changes exactly when a semantic field changes.
std::string config_hash_hex(const std::string& json_text);

}  // namespace ppsim
