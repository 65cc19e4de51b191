// Deterministic discrete-event simulation of a GPU cluster in which online
// services share GPUs with offline jobs. Time is an integer millisecond clock;
// offline execution is fluid (rate based) at the control-tick granularity.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpushare/config.hpp"
#include "gpushare/core.hpp"
#include "gpushare/predictor.hpp"

namespace gpushare {

/// Listed in tie-break order: at equal times lower kinds run first.
enum class EventKind {
  offline_completion,
  fault_injection,
  offline_arrival,
  metric_sample,
  eviction,
  scheduling_round,
  control_tick,
};

std::string_view to_string(EventKind k);

/// Optional log of lifecycle events, for invariant checks.
struct EventRecord {
  double time = 0.0;
  std::string kind;  // start, completion, eviction, fault, preempt, migrate, state
  std::string gpu_id;
  std::string offline_id;
  std::string detail;
  HealthState gpu_state = HealthState::Init;  // at the moment of the event
};

struct OnlineStats {
  std::string id;
  std::string gpu_id;
  double avg_latency = 0.0;  // seconds
  double p99_latency = 0.0;
  double avg_multiplier = 1.0;
  double p99_multiplier = 1.0;
  double max_multiplier = 1.0;
  double served_requests = 0.0;
  double dropped_requests = 0.0;  // during post-fault resets
  double stalled_s = 0.0;
};

struct OfflineOutcome {
  std::string id;
  double submit = 0.0;
  double work = 0.0;
  double progress = 0.0;  // exclusive-equivalent seconds done
  std::optional<double> first_start;
  std::optional<double> finish;
  int starts = 0;
  int evictions = 0;
  int faults = 0;
  int preemptions = 0;
  int migrations = 0;
};

struct TimeseriesRow {
  double t = 0.0;
  std::string gpu_id;
  HealthState state = HealthState::Init;
  double gpu_util = 0.0;
  double sm_activity = 0.0;
  double mem_usage = 0.0;
  double sm_clock_mhz = 0.0;
  double throttle = 0.0;
  std::string offline_id;
};

/// One offline workload's contribution to the oversold ratio: completed
/// workloads count their full work, censored ones their progress; elapsed is
/// wall time since first start.
struct OversoldTerm {
  double done_work = 0.0;
  double elapsed = 0.0;
};

/// Sum of exclusive-equivalent work over sum of real execution time; 0 when
/// nothing started.
double oversold_gpu(const std::vector<OversoldTerm>& terms);

struct RunReport {
  std::string policy;
  std::uint64_t seed = 0;
  double horizon = 0.0;

  std::vector<OnlineStats> online;
  std::vector<OfflineOutcome> offline;

  double avg_jct = 0.0;   // over completed offline workloads
  double makespan = 0.0;  // latest completion time
  double oversold = 0.0;
  int completed = 0;
  int started = 0;
  int injected_faults = 0;
  int propagated_errors = 0;
  int graceful_exits = 0;
  int evictions = 0;
  std::map<std::string, int> eviction_causes;
  int preemptions = 0;
  int migrations = 0;
  int rounds = 0;
  int failed_rounds = 0;
  double max_offline_mem = 0.0;
  double mean_gpu_util = 0.0;     // over GPUs and samples
  double mean_sm_activity = 0.0;

  std::vector<TimeseriesRow> timeseries;
  std::vector<EventRecord> events;

  /// Everything except the time series and the event log.
  Json to_json() const;
  std::string timeseries_csv() const;
};

struct RunOptions {
  bool record_events = false;
  Exec exec = Exec::parallel;  // per-GPU control-tick kernel
};

/// Tables from the config, plus model-built tables for any other GPU type.
TablePredictor make_predictor(const ClusterTrace& trace, const SimConfig& cfg);

/// Throws ValidationError for an invalid config or a trace without GPUs.
RunReport run(const ClusterTrace& trace, const SimConfig& cfg, const SpeedPredictor& predictor,
              std::uint64_t seed, const RunOptions& opts = {});
RunReport run(const ClusterTrace& trace, const SimConfig& cfg, std::uint64_t seed,
              const RunOptions& opts = {});

/// Independent runs, one per seed, in seed order. Exec::parallel spreads the
/// runs over threads (each run then ticks serially).
std::vector<RunReport> run_many(const ClusterTrace& trace, const SimConfig& cfg,
                                const std::vector<std::uint64_t>& seeds, Exec exec = Exec::parallel);

}  // namespace gpushare
