// One scheduling round: dynamic SM allocation for every eligible GPU, then a
// placement of pending offline workloads. The default policy builds a
// bipartite graph weighted by predicted offline throughput and takes the
// optimal matching; the others are ablations and time-sharing baselines.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpushare/core.hpp"
#include "gpushare/gpu_state.hpp"
#include "gpushare/matching.hpp"
#include "gpushare/predictor.hpp"

namespace gpushare {

enum class Policy {
  muxflow,
  online_only,
  time_sharing,
  pb_time_sharing,
  muxflow_fixed_sm,
  muxflow_random_match,
};

std::string_view to_string(Policy p);
Policy policy_from_string(std::string_view name);
const std::vector<Policy>& all_policies();

/// Space-sharing policies run with the health machine and the throttle;
/// the time-sharing baselines do not.
inline bool is_space_sharing(Policy p) {
  return p == Policy::muxflow || p == Policy::muxflow_fixed_sm || p == Policy::muxflow_random_match;
}

struct SchedulerConfig {
  Policy policy = Policy::muxflow;
  double interval = 900.0;  // seconds between rounds
  double min_sm = 0.1;
  double max_sm = 1.0;
  double headroom = 0.05;
  double sm_quantum = 0.05;
  double fixed_sm = 0.4;    // muxflow_fixed_sm only
  double mem_quota = 0.4;   // offline memory quota per GPU
  bool rematch_running = false;

  void validate() const;
};

/// Peak online SM activity over the trailing interval (now - interval, now],
/// clipped to [0, now] at the start of the trace.
double predicted_online_demand(const OnlineWorkload& online, double now, double horizon,
                               const SchedulerConfig& cfg);

/// SM share for an offline workload next to an online demand `d`:
/// 1 - d - headroom, capped at max_sm, floored to the quantum, 0 below min_sm.
double sm_for_demand(double d, const SchedulerConfig& cfg);

double dynamic_sm(const OnlineWorkload& online, double now, double horizon,
                  const SchedulerConfig& cfg);

/// What the scheduler sees of one GPU.
struct GpuSlot {
  std::string gpu_id;
  std::string gpu_type;
  const OnlineWorkload* online = nullptr;
  HealthState state = HealthState::Healthy;
  bool occupied = false;  // an offline workload already runs here
};

struct ScheduleInput {
  std::vector<GpuSlot> gpus;
  std::vector<const OfflineWorkload*> pending;
  double now = 0.0;
  double horizon = 0.0;
  std::uint64_t seed = 0;  // random-match ablation only
};

struct Placement {
  std::string gpu_id;
  std::string online_id;  // empty for a GPU without an online workload
  std::string offline_id;
  double sm_pct = 0.0;
  double predicted = 0.0;  // predicted normalized throughput (0 for baselines)

  bool operator==(const Placement&) const = default;
};

struct Assignment {
  std::vector<Placement> pairs;      // sorted by gpu id
  std::vector<std::string> unplaced; // sorted by offline id

  double predicted_total() const;
  Json to_json() const;
};

/// Dense predicted-throughput matrix over (eligible GPU, pending offline)
/// plus the SM share of each GPU; entries are 0 where no edge exists.
struct WeightGrid {
  std::vector<std::size_t> gpu_rows;  // indices into ScheduleInput::gpus
  std::vector<double> sm;             // per row
  WeightMatrix weights;               // rows x pending
};

/// Exec::parallel fills the matrix with OpenMP; both paths agree exactly.
WeightGrid build_weight_grid(const ScheduleInput& in, const SpeedPredictor& predictor,
                             const SchedulerConfig& cfg, Exec exec = Exec::parallel);

/// Throws if the predictor fails; the caller keeps the previous assignment.
Assignment schedule(const ScheduleInput& in, const SpeedPredictor& predictor,
                    const SchedulerConfig& cfg, Exec exec = Exec::parallel);

enum class ActionKind { keep, migrate, start, stop };
std::string_view to_string(ActionKind k);

struct RescheduleAction {
  ActionKind kind = ActionKind::keep;
  std::string offline_id;
  std::string from_gpu;  // keep, migrate, stop
  std::string to_gpu;    // keep, migrate, start

  bool operator==(const RescheduleAction&) const = default;
};

/// Diff of two assignments, sorted by offline id.
std::vector<RescheduleAction> reschedule_actions(const Assignment& prev, const Assignment& next);

}  // namespace gpushare
