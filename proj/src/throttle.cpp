#include "gpushare/throttle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gpushare/core.hpp"

namespace gpushare {

void ClockParams::validate() const {
  if (!(0.0 < threshold_mhz && threshold_mhz < max_mhz))
    throw ValidationError("throttle: need 0 < T_SM < C_H");
  if (!(a_high > 0.0 && a_high <= 1.0)) throw ValidationError("throttle: a_high must be in (0,1]");
  if (!(a_low > a_high)) throw ValidationError("throttle: a_low must exceed a_high");
}

void PidParams::validate() const {
  if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd))
    throw ValidationError("throttle: PID gains must be finite");
  if (!(target_load > 0.0)) throw ValidationError("throttle: target_load must be > 0");
  if (!(integral_clamp > 0.0)) throw ValidationError("throttle: integral_clamp must be > 0");
}

double clock_factor(double clock_mhz, const ClockParams& p) {
  if (!(clock_mhz >= 0.0 && clock_mhz <= p.max_mhz))
    throw ValidationError("clock_factor: SM clock " + std::to_string(clock_mhz) +
                          " MHz outside [0, " + std::to_string(p.max_mhz) + "]");
  if (clock_mhz < p.threshold_mhz)
    return 1.0 + p.a_low * (p.threshold_mhz - clock_mhz) / p.threshold_mhz;
  return 1.0 - p.a_high * (clock_mhz - p.threshold_mhz) / (p.max_mhz - p.threshold_mhz);
}

double gpu_load(double sm_activity, double clock_mhz, const ClockParams& p) {
  return sm_activity * clock_factor(clock_mhz, p);
}

ThrottleState pid_step(const ThrottleState& s, double load, const PidParams& p, double dt) {
  if (std::isnan(load)) load = p.target_load;
  const double error = std::clamp(load, 0.0, 1e6) - p.target_load;
  ThrottleState next = s;
  const bool saturated = (s.level <= 0.0 && error < 0.0) || (s.level >= 1.0 && error > 0.0);
  if (!saturated)
    next.integral = std::clamp(s.integral + error * dt, -p.integral_clamp, p.integral_clamp);
  const double derivative = (error - s.prev_error) / dt;
  const double raw = p.kp * error + p.ki * next.integral + p.kd * derivative;
  next.prev_error = error;
  next.level = std::clamp(s.level + raw, 0.0, 1.0);
  return next;
}

MemDecision check_mem_alloc(double current, double request, double quota) {
  constexpr double kSlack = 1e-12;
  return current + request <= quota + kSlack ? MemDecision::granted : MemDecision::denied;
}

}  // namespace gpushare
