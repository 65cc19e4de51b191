// Ground-truth interference model of the simulator: how an online workload
// and a co-located offline workload share SMs, clock and latency.
#pragma once

namespace gpushare {

struct InterferenceParams {
  double load_knee = 0.8;          // total SM load above which the clock drops
  double clock_slope = 0.15;       // clock loss between the knee and full load
  double clock_floor = 0.6;        // lowest clock as a fraction of max
  double contention_penalty = 2.0; // latency penalty per unit of SM overlap
  double checkpoint_restart_cost = 60.0;  // seconds
  double control_tick = 0.1;       // seconds
  double sim_tick = 1.0;           // seconds
  double pb_overhead = 0.02;       // priority time-sharing context-switch cost

  void validate() const;
};

struct InterferenceResult {
  double online_latency_mult = 1.0;
  double offline_rate = 0.0;     // normalized throughput of the offline workload
  double sm_clock_frac = 1.0;
  double total_load = 0.0;
  double offline_sm = 0.0;       // SM fraction actually used by the offline workload
  double overlap = 0.0;
};

/// Clock fraction at total SM load `load`.
double clock_at_load(double load, const InterferenceParams& p);

/// Fluid model of one tick. `online_demand` is the online SM activity,
/// `assigned` the offline SM percentage, `offline_demand` the offline
/// workload's own SM activity (its exclusive-run footprint).
InterferenceResult ground_truth_step(double online_demand, double assigned, double throttle_level,
                                     double offline_demand, const InterferenceParams& p);

/// Offline normalized throughput predicted by the model with no throttling;
/// this is the surface prediction tables are built from.
double model_offline_rate(double online_sm, double offline_sm, double sm_pct,
                          const InterferenceParams& p);

}  // namespace gpushare
