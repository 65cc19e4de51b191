// Synthetic cluster traces: diurnal online services pinned one per GPU and
// offline training jobs drawn from a small model catalog.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gpushare/core.hpp"

namespace gpushare {

struct GeneratorSpec {
  int gpus = 8;
  std::vector<std::string> gpu_types{"A10"};  // assigned round-robin
  double horizon = 86400.0;                   // seconds
  int offline = 40;
  double duration_min = 600.0;   // exclusive run time, log-uniform
  double duration_max = 14400.0;
  double submit_fraction = 0.6;  // submits fall in [0, fraction * horizon)
  double qps_step = 60.0;        // seconds between qps samples
  double qps_noise = 3.0;        // std-dev of the qps noise

  void validate() const;
};

/// Unknown keys are rejected; missing keys keep their defaults.
GeneratorSpec generator_spec_from_json(const Json& j);
GeneratorSpec load_generator_spec(const std::filesystem::path& path);

/// Deterministic per (spec, seed); the result passes validate_trace.
ClusterTrace generate_trace(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace gpushare
