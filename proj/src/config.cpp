#include "gpushare/config.hpp"

#include <cmath>
#include <set>

namespace gpushare {

namespace {

// Reads typed fields from one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const Json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ParseError("config: '" + name_ + "' must be an object");
  }

  void number(const char* key, double& out) {
    if (const Json* v = take(key)) {
      if (!v->is_number()) throw ParseError(where(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void boolean(const char* key, bool& out) {
    if (const Json* v = take(key)) {
      if (!v->is_boolean()) throw ParseError(where(key) + " must be a boolean");
      out = v->get<bool>();
    }
  }
  void text(const char* key, std::string& out) {
    if (const Json* v = take(key)) {
      if (!v->is_string()) throw ParseError(where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  const Json* object(const char* key) {
    const Json* v = take(key);
    if (v && !v->is_object()) throw ParseError(where(key) + " must be an object");
    return v;
  }
  const Json* array(const char* key) {
    const Json* v = take(key);
    if (v && !v->is_array()) throw ParseError(where(key) + " must be an array");
    return v;
  }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ParseError("config: unknown key '" + name_ + "." + it.key() + "'");
  }

  std::string where(const char* key) const { return "config: '" + name_ + "." + key + "'"; }

 private:
  const Json* take(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

void read_bounds(Section& parent, const char* key, const std::string& path, MetricBounds& b) {
  if (const Json* v = parent.object(key)) {
    Section s(*v, path + "." + key);
    s.number("gpu_util", b.gpu_util);
    s.number("sm_activity", b.sm_activity);
    s.number("mem_usage", b.mem_usage);
    s.number("sm_clock_frac", b.sm_clock_frac);
    s.done();
  }
}

Json bounds_json(const MetricBounds& b) {
  return {{"gpu_util", b.gpu_util},
          {"sm_activity", b.sm_activity},
          {"mem_usage", b.mem_usage},
          {"sm_clock_frac", b.sm_clock_frac}};
}

std::vector<double> numbers(const Json& arr, const std::string& what) {
  std::vector<double> out;
  for (const auto& v : arr) {
    if (!v.is_number()) throw ParseError("config: " + what + " must contain numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

bool whole_ms(double seconds) {
  const double ms = seconds * 1000.0;
  return std::isfinite(ms) && std::abs(ms - std::round(ms)) < 1e-6;
}

}  // namespace

void FaultParams::validate() const {
  if (!(rate_per_hour >= 0.0 && std::isfinite(rate_per_hour)))
    throw ValidationError("faults: rate_per_hour must be finite and >= 0");
  if (!(sigint_fraction >= 0.0 && sigint_fraction <= 1.0))
    throw ValidationError("faults: sigint_fraction must be in [0,1]");
  if (!(reset_downtime >= 0.0)) throw ValidationError("faults: reset_downtime_s must be >= 0");
}

void PredictorParams::validate() const { axes.validate(); }

void OutputParams::validate() const {
  if (!(timeseries_interval > 0.0)) throw ValidationError("output: timeseries_interval_s must be > 0");
  if (!(latency_bin_width > 0.0 && latency_bin_width <= 1.0))
    throw ValidationError("output: latency_bin_width must be in (0,1]");
}

void SimConfig::validate() const {
  clock.validate();
  pid.validate();
  thresholds.validate();
  backoff.validate();
  scheduler.validate();
  interference.validate();
  faults.validate();
  predictor.validate();
  output.validate();
  if (thresholds.max_sm_clock_mhz != clock.max_mhz)
    throw ValidationError("config: health thresholds and throttle disagree on the max SM clock");
  for (double s : {interference.control_tick, interference.sim_tick, scheduler.interval,
                   output.timeseries_interval})
    if (!whole_ms(s)) throw ValidationError("config: time steps must be whole milliseconds");
  const auto control_ms = std::llround(interference.control_tick * 1000.0);
  const auto sample_ms = std::llround(interference.sim_tick * 1000.0);
  if (sample_ms % control_ms != 0)
    throw ValidationError("config: sim_tick_s must be a multiple of control_tick_s");
}

SimConfig config_from_json(const Json& j) {
  SimConfig c;
  Section root(j, "config");

  if (const Json* v = root.object("throttle")) {
    Section s(*v, "throttle");
    s.number("a_low", c.clock.a_low);
    s.number("a_high", c.clock.a_high);
    s.number("threshold_mhz", c.clock.threshold_mhz);
    s.number("max_mhz", c.clock.max_mhz);
    s.number("kp", c.pid.kp);
    s.number("ki", c.pid.ki);
    s.number("kd", c.pid.kd);
    s.number("target_load", c.pid.target_load);
    s.number("integral_clamp", c.pid.integral_clamp);
    s.number("mem_quota", c.scheduler.mem_quota);
    s.done();
  }
  c.thresholds.max_sm_clock_mhz = c.clock.max_mhz;

  if (const Json* v = root.object("thresholds")) {
    Section s(*v, "thresholds");
    read_bounds(s, "healthy", "thresholds", c.thresholds.healthy);
    read_bounds(s, "unhealthy", "thresholds", c.thresholds.unhealthy);
    read_bounds(s, "overlimit", "thresholds", c.thresholds.overlimit);
    s.number("base_dwell_s", c.backoff.base_dwell);
    s.number("window_s", c.backoff.window);
    s.number("backoff_factor", c.backoff.factor);
    s.done();
  }

  if (const Json* v = root.object("scheduler")) {
    Section s(*v, "scheduler");
    std::string policy(to_string(c.scheduler.policy));
    s.text("policy", policy);
    c.scheduler.policy = policy_from_string(policy);
    s.number("interval_s", c.scheduler.interval);
    s.number("min_sm", c.scheduler.min_sm);
    s.number("max_sm", c.scheduler.max_sm);
    s.number("headroom", c.scheduler.headroom);
    s.number("sm_quantum", c.scheduler.sm_quantum);
    s.number("fixed_sm", c.scheduler.fixed_sm);
    s.boolean("rematch_running", c.scheduler.rematch_running);
    s.done();
  }

  if (const Json* v = root.object("interference")) {
    Section s(*v, "interference");
    auto& p = c.interference;
    s.number("load_knee", p.load_knee);
    s.number("clock_slope", p.clock_slope);
    s.number("clock_floor", p.clock_floor);
    s.number("contention_penalty", p.contention_penalty);
    s.number("checkpoint_restart_cost_s", p.checkpoint_restart_cost);
    s.number("control_tick_s", p.control_tick);
    s.number("sim_tick_s", p.sim_tick);
    s.number("pb_overhead", p.pb_overhead);
    s.done();
  }

  if (const Json* v = root.object("faults")) {
    Section s(*v, "faults");
    s.number("rate_per_hour", c.faults.rate_per_hour);
    s.number("sigint_fraction", c.faults.sigint_fraction);
    s.boolean("graceful_exit", c.faults.graceful_exit);
    s.number("reset_downtime_s", c.faults.reset_downtime);
    s.done();
  }

  if (const Json* v = root.object("predictor")) {
    Section s(*v, "predictor");
    if (const Json* tables = s.array("tables")) {
      for (const auto& t : *tables) {
        if (!t.is_string()) throw ParseError("config: predictor.tables must contain paths");
        c.predictor.table_paths.push_back(t.get<std::string>());
      }
    }
    if (const Json* axes = s.object("axes")) {
      Section a(*axes, "predictor.axes");
      if (const Json* k = a.array("online_sm")) c.predictor.axes.online_sm = numbers(*k, "online_sm");
      if (const Json* k = a.array("offline_sm")) c.predictor.axes.offline_sm = numbers(*k, "offline_sm");
      if (const Json* k = a.array("sm_pct")) c.predictor.axes.sm_pct = numbers(*k, "sm_pct");
      a.done();
    }
    s.done();
  }

  if (const Json* v = root.object("output")) {
    Section s(*v, "output");
    s.boolean("timeseries", c.output.timeseries);
    s.number("timeseries_interval_s", c.output.timeseries_interval);
    s.number("latency_bin_width", c.output.latency_bin_width);
    s.done();
  }

  root.done();
  c.validate();
  return c;
}

Json config_to_json(const SimConfig& c) {
  Json j;
  j["throttle"] = {{"a_low", c.clock.a_low},
                   {"a_high", c.clock.a_high},
                   {"threshold_mhz", c.clock.threshold_mhz},
                   {"max_mhz", c.clock.max_mhz},
                   {"kp", c.pid.kp},
                   {"ki", c.pid.ki},
                   {"kd", c.pid.kd},
                   {"target_load", c.pid.target_load},
                   {"integral_clamp", c.pid.integral_clamp},
                   {"mem_quota", c.scheduler.mem_quota}};
  j["thresholds"] = {{"healthy", bounds_json(c.thresholds.healthy)},
                     {"unhealthy", bounds_json(c.thresholds.unhealthy)},
                     {"overlimit", bounds_json(c.thresholds.overlimit)},
                     {"base_dwell_s", c.backoff.base_dwell},
                     {"window_s", c.backoff.window},
                     {"backoff_factor", c.backoff.factor}};
  j["scheduler"] = {{"policy", std::string(to_string(c.scheduler.policy))},
                    {"interval_s", c.scheduler.interval},
                    {"min_sm", c.scheduler.min_sm},
                    {"max_sm", c.scheduler.max_sm},
                    {"headroom", c.scheduler.headroom},
                    {"sm_quantum", c.scheduler.sm_quantum},
                    {"fixed_sm", c.scheduler.fixed_sm},
                    {"rematch_running", c.scheduler.rematch_running}};
  const auto& p = c.interference;
  j["interference"] = {{"load_knee", p.load_knee},
                       {"clock_slope", p.clock_slope},
                       {"clock_floor", p.clock_floor},
                       {"contention_penalty", p.contention_penalty},
                       {"checkpoint_restart_cost_s", p.checkpoint_restart_cost},
                       {"control_tick_s", p.control_tick},
                       {"sim_tick_s", p.sim_tick},
                       {"pb_overhead", p.pb_overhead}};
  j["faults"] = {{"rate_per_hour", c.faults.rate_per_hour},
                 {"sigint_fraction", c.faults.sigint_fraction},
                 {"graceful_exit", c.faults.graceful_exit},
                 {"reset_downtime_s", c.faults.reset_downtime}};
  j["predictor"] = {{"tables", c.predictor.table_paths},
                    {"axes",
                     {{"online_sm", c.predictor.axes.online_sm},
                      {"offline_sm", c.predictor.axes.offline_sm},
                      {"sm_pct", c.predictor.axes.sm_pct}}}};
  j["output"] = {{"timeseries", c.output.timeseries},
                 {"timeseries_interval_s", c.output.timeseries_interval},
                 {"latency_bin_width", c.output.latency_bin_width}};
  return j;
}

SimConfig load_config(const std::filesystem::path& path) {
  SimConfig c = config_from_json(read_json_file(path, "config"));
  // Table paths are relative to the config file.
  for (auto& t : c.predictor.table_paths)
    if (std::filesystem::path(t).is_relative()) t = (path.parent_path() / t).string();
  return c;
}

}  // namespace gpushare
