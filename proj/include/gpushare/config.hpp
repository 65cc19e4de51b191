// Full simulator configuration. Every field has a default; the config file
// may override any subset, and unknown keys are rejected.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gpushare/core.hpp"
#include "gpushare/gpu_state.hpp"
#include "gpushare/interference.hpp"
#include "gpushare/predictor.hpp"
#include "gpushare/scheduler.hpp"
#include "gpushare/throttle.hpp"

namespace gpushare {

struct FaultParams {
  double rate_per_hour = 1.0 / 50.0;  // per running offline workload
  double sigint_fraction = 0.99;      // the rest are MPS crashes and the like
  bool graceful_exit = true;
  double reset_downtime = 30.0;       // seconds the online workload stalls

  void validate() const;
};

struct PredictorParams {
  std::vector<std::string> table_paths;  // empty: build from the model
  TableAxes axes = default_axes();

  void validate() const;
};

struct OutputParams {
  bool timeseries = true;
  double timeseries_interval = 60.0;  // seconds
  double latency_bin_width = 0.001;   // latency multiplier histogram

  void validate() const;
};

struct SimConfig {
  ClockParams clock;
  PidParams pid;
  ThresholdSet thresholds;
  BackoffParams backoff;
  SchedulerConfig scheduler;
  InterferenceParams interference;
  FaultParams faults;
  PredictorParams predictor;
  OutputParams output;

  /// Validates every section plus cross-section constraints (tick
  /// granularity, matching clock maxima).
  void validate() const;
};

/// Missing sections and keys keep their defaults. Throws ParseError on
/// unknown keys or wrong types and ValidationError on bad values.
SimConfig config_from_json(const Json& j);
Json config_to_json(const SimConfig& c);
SimConfig load_config(const std::filesystem::path& path);

}  // namespace gpushare
