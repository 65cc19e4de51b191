// Workload-level protection: GPU load from SM activity and SM clock, a PID
// controller that scales back offline kernel launches, and the offline
// memory quota check.
#pragma once

namespace gpushare {

struct ClockParams {
  double a_low = 4.0;    // aggressiveness below the clock threshold
  double a_high = 0.5;   // relaxation above the clock threshold
  double threshold_mhz = 0.85 * 1590.0;
  double max_mhz = 1590.0;

  void validate() const;
};

struct PidParams {
  double kp = 0.3;
  double ki = 0.1;
  double kd = 0.005;
  double target_load = 0.9;
  double integral_clamp = 2.0;

  void validate() const;
};

/// Controller memory for one (GPU, offline workload) pair.
struct ThrottleState {
  double integral = 0.0;
  double prev_error = 0.0;
  double level = 0.0;  // fraction of offline kernel launches delayed, [0,1]
};

/// Piecewise-linear factor, continuous with value 1 at the threshold;
/// throws ValidationError for clocks outside [0, max_mhz].
double clock_factor(double clock_mhz, const ClockParams& p);

/// SM activity scaled by the clock factor.
double gpu_load(double sm_activity, double clock_mhz, const ClockParams& p);

/// One control tick. The integral is clamped to +-integral_clamp and frozen
/// while the output is saturated in the direction of the error.
ThrottleState pid_step(const ThrottleState& s, double load, const PidParams& p, double dt);

enum class MemDecision { granted, denied };

/// Granted iff current + request stays within the quota.
MemDecision check_mem_alloc(double current, double request, double quota);

}  // namespace gpushare
