#include "gpushare/interference.hpp"

#include <algorithm>

#include "gpushare/core.hpp"

namespace gpushare {

void InterferenceParams::validate() const {
  if (!(load_knee > 0.0 && load_knee <= 1.0))
    throw ValidationError("interference: load_knee must be in (0,1]");
  if (!(clock_floor > 0.0 && clock_floor <= 1.0))
    throw ValidationError("interference: clock_floor must be in (0,1]");
  if (!(clock_slope >= 0.0 && clock_slope <= 1.0))
    throw ValidationError("interference: clock_slope must be in [0,1]");
  if (!(contention_penalty >= 0.0))
    throw ValidationError("interference: contention_penalty must be >= 0");
  if (!(checkpoint_restart_cost >= 0.0))
    throw ValidationError("interference: checkpoint_restart_cost_s must be >= 0");
  if (!(control_tick > 0.0) || !(sim_tick > 0.0))
    throw ValidationError("interference: ticks must be > 0");
  if (!(pb_overhead >= 0.0 && pb_overhead < 1.0))
    throw ValidationError("interference: pb_overhead must be in [0,1)");
}

double clock_at_load(double load, const InterferenceParams& p) {
  if (load <= p.load_knee) return 1.0;
  return std::max(p.clock_floor,
                  1.0 - p.clock_slope * (load - p.load_knee) / (1.0 - p.load_knee));
}

InterferenceResult ground_truth_step(double online_demand, double assigned, double throttle_level,
                                     double offline_demand, const InterferenceParams& p) {
  const double d = std::clamp(online_demand, 0.0, 1.0);
  const double s = std::clamp(assigned, 0.0, 1.0);
  const double throttle = std::clamp(throttle_level, 0.0, 1.0);
  const double demand = std::clamp(offline_demand, 0.0, 1.0);

  InterferenceResult r;
  // An offline workload never occupies more SMs than it would use alone.
  const double wanted = (1.0 - throttle) * std::min(s, demand);
  r.overlap = std::max(0.0, d + wanted - 1.0);
  r.offline_sm = std::min(wanted, std::max(0.0, 1.0 - d) + r.overlap);
  r.total_load = std::min(1.0, d + r.offline_sm);
  r.sm_clock_frac = clock_at_load(r.total_load, p);
  r.online_latency_mult = (1.0 / r.sm_clock_frac) * (1.0 + p.contention_penalty * r.overlap);
  r.offline_rate =
      demand > 0.0 ? std::min(1.0, r.offline_sm / demand) * r.sm_clock_frac : 0.0;
  return r;
}

double model_offline_rate(double online_sm, double offline_sm, double sm_pct,
                          const InterferenceParams& p) {
  return ground_truth_step(online_sm, sm_pct, 0.0, offline_sm, p).offline_rate;
}

}  // namespace gpushare
