#include "gpushare/tracegen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace gpushare {

namespace {

struct OnlineModel {
  const char* name;
  double sa_idle;    // SM activity at zero load
  double sa_full;    // SM activity at kMaxQps
  double mem;
  double base_latency;
  double slo;
};

struct OfflineModel {
  const char* name;
  double sm_activity;
  double gpu_util;
  double mem;
};

constexpr double kMaxQps = 200.0;
constexpr double kMinQps = 20.0;
constexpr double kPeakQps = 190.0;

constexpr OnlineModel kOnlineModels[] = {
    {"bert", 0.10, 0.55, 0.35, 0.020, 0.100},
    {"resnet", 0.12, 0.62, 0.25, 0.010, 0.050},
    {"gpt", 0.10, 0.50, 0.50, 0.050, 0.300},
};

constexpr OfflineModel kOfflineModels[] = {
    {"resnet50", 0.75, 0.85, 0.30},
    {"vgg16", 0.85, 0.90, 0.35},
    {"densenet201", 0.60, 0.80, 0.38},
    {"inceptionv3", 0.70, 0.82, 0.30},
};

double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

std::string padded(const char* prefix, int i, int count) {
  const int width = static_cast<int>(std::to_string(std::max(1, count - 1)).size());
  std::string n = std::to_string(i);
  return prefix + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(n.size()))), '0') + n;
}

}  // namespace

void GeneratorSpec::validate() const {
  if (gpus < 1) throw ValidationError("generator: gpus must be >= 1");
  if (gpu_types.empty()) throw ValidationError("generator: gpu_types must not be empty");
  for (const auto& t : gpu_types)
    if (t.empty()) throw ValidationError("generator: empty gpu type");
  if (!(horizon > 0.0)) throw ValidationError("generator: horizon_s must be > 0");
  if (offline < 0) throw ValidationError("generator: offline must be >= 0");
  if (!(duration_min > 0.0 && duration_min <= duration_max))
    throw ValidationError("generator: need 0 < duration_min_s <= duration_max_s");
  if (!(submit_fraction >= 0.0 && submit_fraction <= 1.0))
    throw ValidationError("generator: submit_fraction must be in [0,1]");
  if (!(qps_step > 0.0)) throw ValidationError("generator: qps_step_s must be > 0");
  if (!(qps_noise >= 0.0)) throw ValidationError("generator: qps_noise must be >= 0");
}

GeneratorSpec generator_spec_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("generator spec must be an object");
  static const std::set<std::string> kKeys{"gpus",         "gpu_types",       "horizon_s",
                                           "offline",      "duration_min_s",  "duration_max_s",
                                           "submit_fraction", "qps_step_s",   "qps_noise"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!kKeys.count(it.key())) throw ParseError("generator spec: unknown key '" + it.key() + "'");

  GeneratorSpec s;
  auto number = [&](const char* key, double& out) {
    if (j.contains(key)) out = get_number(j, key, "generator spec");
  };
  auto integer = [&](const char* key, int& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer()) throw ParseError(std::string("generator spec: '") + key + "' must be an integer");
    out = j[key].get<int>();
  };
  integer("gpus", s.gpus);
  integer("offline", s.offline);
  number("horizon_s", s.horizon);
  number("duration_min_s", s.duration_min);
  number("duration_max_s", s.duration_max);
  number("submit_fraction", s.submit_fraction);
  number("qps_step_s", s.qps_step);
  number("qps_noise", s.qps_noise);
  if (j.contains("gpu_types")) {
    s.gpu_types.clear();
    for (const auto& t : get_array(j, "gpu_types", "generator spec")) {
      if (!t.is_string()) throw ParseError("generator spec: gpu_types must contain strings");
      s.gpu_types.push_back(t.get<std::string>());
    }
  }
  s.validate();
  return s;
}

GeneratorSpec load_generator_spec(const std::filesystem::path& path) {
  return generator_spec_from_json(read_json_file(path, "generator spec"));
}

ClusterTrace generate_trace(const GeneratorSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::normal_distribution<double> noise(0.0, 1.0);

  ClusterTrace t;
  t.horizon = spec.horizon;
  for (int i = 0; i < spec.gpus; ++i) {
    GpuDescriptor g;
    g.id = padded("gpu-", i, spec.gpus);
    g.gpu_type = spec.gpu_types[static_cast<std::size_t>(i) % spec.gpu_types.size()];
    t.gpus.push_back(g);

    const OnlineModel& m = kOnlineModels[static_cast<std::size_t>(i) % std::size(kOnlineModels)];
    OnlineWorkload w;
    w.id = padded("online-", i, spec.gpus);
    w.gpu_id = g.id;
    w.base_latency = m.base_latency;
    w.latency_slo = m.slo;
    for (double q = 0.0; q <= kMaxQps; q += 10.0) {
      WorkloadProfile p;
      p.sm_activity = m.sa_idle + (m.sa_full - m.sa_idle) * q / kMaxQps;
      p.gpu_utilization = std::min(0.7, 1.3 * p.sm_activity);
      p.sm_occupancy = std::min(1.0, 0.8 * p.sm_activity + 0.05);
      p.iter_time_separate = m.base_latency;
      p.mem_fraction = m.mem;
      w.profiles.push_back({q, p});
    }
    // Diurnal request rate with Gaussian noise.
    const double mid = uniform(60.0, 120.0);
    const double amp = uniform(30.0, std::min(mid - kMinQps, kPeakQps - mid));
    const double phase = uniform(0.0, 2.0 * std::numbers::pi);
    for (double s = 0.0; s < spec.horizon; s += spec.qps_step) {
      const double q = mid + amp * std::sin(2.0 * std::numbers::pi * s / 86400.0 + phase) +
                       spec.qps_noise * noise(rng);
      w.qps_series.push_back({round_ms(s), std::round(std::clamp(q, kMinQps, kPeakQps) * 100.0) / 100.0});
    }
    t.online.push_back(std::move(w));
  }

  const double log_lo = std::log(spec.duration_min), log_hi = std::log(spec.duration_max);
  for (int i = 0; i < spec.offline; ++i) {
    const OfflineModel& m = kOfflineModels[static_cast<std::size_t>(unit(rng) * std::size(kOfflineModels)) %
                                           std::size(kOfflineModels)];
    OfflineWorkload w;
    w.id = padded("offline-", i, spec.offline);
    w.submit_time = round_ms(uniform(0.0, spec.submit_fraction * spec.horizon));
    w.work_separate = std::max(0.001, round_ms(std::exp(uniform(log_lo, log_hi))));
    w.profile.sm_activity = m.sm_activity;
    w.profile.gpu_utilization = m.gpu_util;
    w.profile.sm_occupancy = 0.6;
    w.profile.iter_time_separate = 0.2;
    w.profile.mem_fraction = m.mem;
    t.offline.push_back(std::move(w));
  }
  validate_trace(t);
  return t;
}

}  // namespace gpushare
