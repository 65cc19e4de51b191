// Per-GPU five-state health machine. Offline workloads may only be placed on
// Healthy GPUs; entering Overlimit evicts them, and the Overlimit dwell time
// doubles with every entry inside a trailing window.
#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gpushare {

enum class HealthState { Init, Healthy, Unhealthy, Overlimit, Disabled };

std::string_view to_string(HealthState s);
/// Accepts the names produced by to_string (case-sensitive).
HealthState health_state_from_string(std::string_view name);

struct MetricSample {
  double gpu_util = 0.0;
  double sm_activity = 0.0;
  double sm_clock_mhz = 0.0;
  double mem_usage = 0.0;
  double timestamp = 0.0;
};

/// One band of bounds. gpu_util, sm_activity and mem_usage are upper bounds;
/// sm_clock_frac is a lower bound expressed as a fraction of the max clock.
struct MetricBounds {
  double gpu_util = 0.0;
  double sm_activity = 0.0;
  double mem_usage = 0.0;
  double sm_clock_frac = 0.0;
};

struct ThresholdSet {
  MetricBounds healthy{0.80, 0.75, 0.85, 0.90};
  MetricBounds unhealthy{0.90, 0.85, 0.90, 0.85};
  MetricBounds overlimit{0.97, 0.95, 0.95, 0.70};
  double max_sm_clock_mhz = 1590.0;

  /// Throws ValidationError unless healthy < unhealthy < overlimit in
  /// severity for every metric.
  void validate() const;
};

struct BackoffParams {
  double base_dwell = 60.0;  // seconds
  double window = 7200.0;    // seconds
  double factor = 2.0;

  void validate() const;
};

struct GpuState {
  HealthState state = HealthState::Init;
  std::vector<double> overlimit_entries;  // entry times inside the window
  std::optional<double> overlimit_until;  // set iff state == Overlimit
  std::optional<double> last_observed;
};

enum class HealthAction { none, forbid_scheduling, evict_offline };

std::string_view to_string(HealthAction a);

struct StepResult {
  GpuState state;
  HealthAction action = HealthAction::none;
};

/// Name of the first metric exceeding its Overlimit bound, if any.
std::optional<std::string> overlimit_breach(const MetricSample& m, const ThresholdSet& th);
/// Name of the first metric at or beyond its Unhealthy bound, if any.
std::optional<std::string> unhealthy_breach(const MetricSample& m, const ThresholdSet& th);
bool within_healthy_bounds(const MetricSample& m, const ThresholdSet& th);

/// Dwell time for an Overlimit entry at `now`: base_dwell * factor^(k-1),
/// k counting the entries of the trailing window including this one.
double backoff(const GpuState& s, double now, const BackoffParams& bp);

/// In-place transition. Throws ValidationError when the sample is older than
/// the latest observation or its timestamp differs from `now`.
HealthAction advance(GpuState& s, const MetricSample& m, const ThresholdSet& th,
                     const BackoffParams& bp, double now);

StepResult step(const GpuState& s, const MetricSample& m, const ThresholdSet& th,
                const BackoffParams& bp, double now);

// Administrative transitions; step() never enters or leaves Disabled.
GpuState disable(GpuState s);
GpuState enable(GpuState s);

inline bool accepts_offline(HealthState s) { return s == HealthState::Healthy; }

}  // namespace gpushare
