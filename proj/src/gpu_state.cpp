#include "gpushare/gpu_state.hpp"

#include <algorithm>
#include <cmath>

#include "gpushare/core.hpp"

namespace gpushare {

std::string_view to_string(HealthState s) {
  switch (s) {
    case HealthState::Init: return "Init";
    case HealthState::Healthy: return "Healthy";
    case HealthState::Unhealthy: return "Unhealthy";
    case HealthState::Overlimit: return "Overlimit";
    case HealthState::Disabled: return "Disabled";
  }
  return "?";
}

HealthState health_state_from_string(std::string_view name) {
  for (auto s : {HealthState::Init, HealthState::Healthy, HealthState::Unhealthy,
                 HealthState::Overlimit, HealthState::Disabled})
    if (to_string(s) == name) return s;
  throw ParseError("unknown health state '" + std::string(name) + "'");
}

std::string_view to_string(HealthAction a) {
  switch (a) {
    case HealthAction::none: return "none";
    case HealthAction::forbid_scheduling: return "forbid_scheduling";
    case HealthAction::evict_offline: return "evict_offline";
  }
  return "?";
}

void ThresholdSet::validate() const {
  auto upper = [](double h, double u, double o, const char* name) {
    if (!(0.0 <= h && h < u && u < o && o <= 1.0))
      throw ValidationError(std::string("thresholds: ") + name +
                            " must satisfy 0 <= healthy < unhealthy < overlimit <= 1");
  };
  upper(healthy.gpu_util, unhealthy.gpu_util, overlimit.gpu_util, "gpu_util");
  upper(healthy.sm_activity, unhealthy.sm_activity, overlimit.sm_activity, "sm_activity");
  upper(healthy.mem_usage, unhealthy.mem_usage, overlimit.mem_usage, "mem_usage");
  // Clock is a lower bound: the Healthy-return clock is the highest.
  if (!(1.0 >= healthy.sm_clock_frac && healthy.sm_clock_frac > unhealthy.sm_clock_frac &&
        unhealthy.sm_clock_frac > overlimit.sm_clock_frac && overlimit.sm_clock_frac >= 0.0))
    throw ValidationError(
        "thresholds: sm_clock_frac must satisfy 1 >= healthy > unhealthy > overlimit >= 0");
  if (!(max_sm_clock_mhz > 0.0)) throw ValidationError("thresholds: max_sm_clock_mhz must be > 0");
}

void BackoffParams::validate() const {
  if (!(base_dwell > 0.0)) throw ValidationError("backoff: base_dwell_s must be > 0");
  if (!(window > 0.0)) throw ValidationError("backoff: window_s must be > 0");
  if (!(factor >= 1.0)) throw ValidationError("backoff: factor must be >= 1");
}

std::optional<std::string> overlimit_breach(const MetricSample& m, const ThresholdSet& th) {
  if (m.gpu_util > th.overlimit.gpu_util) return "gpu_util";
  if (m.sm_activity > th.overlimit.sm_activity) return "sm_activity";
  if (m.mem_usage > th.overlimit.mem_usage) return "mem_usage";
  if (m.sm_clock_mhz < th.overlimit.sm_clock_frac * th.max_sm_clock_mhz) return "sm_clock";
  return std::nullopt;
}

std::optional<std::string> unhealthy_breach(const MetricSample& m, const ThresholdSet& th) {
  if (m.gpu_util >= th.unhealthy.gpu_util) return "gpu_util";
  if (m.sm_activity >= th.unhealthy.sm_activity) return "sm_activity";
  if (m.mem_usage >= th.unhealthy.mem_usage) return "mem_usage";
  if (m.sm_clock_mhz < th.unhealthy.sm_clock_frac * th.max_sm_clock_mhz) return "sm_clock";
  return std::nullopt;
}

bool within_healthy_bounds(const MetricSample& m, const ThresholdSet& th) {
  return m.gpu_util <= th.healthy.gpu_util && m.sm_activity <= th.healthy.sm_activity &&
         m.mem_usage <= th.healthy.mem_usage &&
         m.sm_clock_mhz >= th.healthy.sm_clock_frac * th.max_sm_clock_mhz;
}

namespace {

void prune_window(std::vector<double>& entries, double now, double window) {
  std::erase_if(entries, [&](double t) { return now - t >= window; });
}

void enter_overlimit(GpuState& s, double now, const BackoffParams& bp) {
  const double dwell = backoff(s, now, bp);
  s.overlimit_entries.push_back(now);
  s.overlimit_until = now + dwell;
  s.state = HealthState::Overlimit;
}

}  // namespace

double backoff(const GpuState& s, double now, const BackoffParams& bp) {
  const auto earlier = std::count_if(s.overlimit_entries.begin(), s.overlimit_entries.end(),
                                     [&](double t) { return now - t < bp.window && t <= now; });
  return bp.base_dwell * std::pow(bp.factor, static_cast<double>(earlier));
}

HealthAction advance(GpuState& s, const MetricSample& m, const ThresholdSet& th,
                     const BackoffParams& bp, double now) {
  if (m.timestamp != now)
    throw ValidationError("health step: sample timestamp differs from current time");
  if (s.last_observed && now < *s.last_observed)
    throw ValidationError("health step: sample at t=" + std::to_string(now) +
                          " precedes last observation t=" + std::to_string(*s.last_observed));
  s.last_observed = now;
  prune_window(s.overlimit_entries, now, bp.window);

  switch (s.state) {
    case HealthState::Disabled:
      return HealthAction::none;

    case HealthState::Init:
      s.state = HealthState::Healthy;
      return HealthAction::none;

    case HealthState::Healthy:
      if (overlimit_breach(m, th)) {
        enter_overlimit(s, now, bp);
        return HealthAction::evict_offline;
      }
      if (unhealthy_breach(m, th)) {
        s.state = HealthState::Unhealthy;
        return HealthAction::forbid_scheduling;
      }
      return HealthAction::none;

    case HealthState::Unhealthy:
      if (overlimit_breach(m, th)) {
        enter_overlimit(s, now, bp);
        return HealthAction::evict_offline;
      }
      if (within_healthy_bounds(m, th)) s.state = HealthState::Healthy;
      return HealthAction::none;

    case HealthState::Overlimit:
      if (now >= *s.overlimit_until && !overlimit_breach(m, th)) {
        s.state = HealthState::Unhealthy;
        s.overlimit_until.reset();
      }
      return HealthAction::none;
  }
  return HealthAction::none;
}

StepResult step(const GpuState& s, const MetricSample& m, const ThresholdSet& th,
                const BackoffParams& bp, double now) {
  StepResult r{s, HealthAction::none};
  r.action = advance(r.state, m, th, bp, now);
  return r;
}

GpuState disable(GpuState s) {
  s.state = HealthState::Disabled;
  s.overlimit_until.reset();
  return s;
}

GpuState enable(GpuState s) {
  if (s.state == HealthState::Disabled) s.state = HealthState::Init;
  return s;
}

}  // namespace gpushare
