#include "gpushare/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace gpushare {

namespace {

bool is_fraction(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

std::string quote_id(std::string_view s) {
  std::string out = "'";
  out += s;
  out += "'";
  return out;
}

}  // namespace

void validate_profile(const WorkloadProfile& p, std::string_view context) {
  auto check = [&](double v, const char* name) {
    if (!is_fraction(v))
      throw ValidationError(std::string(context) + ": " + name + " must be in [0,1], got " +
                            std::to_string(v));
  };
  check(p.sm_activity, "sm_activity");
  check(p.gpu_utilization, "gpu_util");
  check(p.sm_occupancy, "sm_occupancy");
  check(p.mem_fraction, "mem_fraction");
  if (!std::isfinite(p.iter_time_separate) || p.iter_time_separate <= 0.0)
    throw ValidationError(std::string(context) + ": iter_time_s must be > 0");
}

const WorkloadProfile& OnlineWorkload::profile_for_qps(double qps) const {
  if (profiles.empty()) throw ValidationError("online " + quote_id(id) + ": no profiles");
  auto it = std::upper_bound(profiles.begin(), profiles.end(), qps,
                             [](double q, const QpsProfile& p) { return q < p.qps; });
  if (it == profiles.begin()) return profiles.front().profile;
  return std::prev(it)->profile;
}

std::size_t OnlineWorkload::qps_index_at(double t) const {
  auto it = std::upper_bound(qps_series.begin(), qps_series.end(), t,
                             [](double x, const QpsSample& s) { return x < s.t; });
  if (it == qps_series.begin()) return 0;
  return static_cast<std::size_t>(std::distance(qps_series.begin(), it)) - 1;
}

const WorkloadProfile& profile_at(const OnlineWorkload& w, double t, double horizon) {
  if (!(t >= 0.0 && t <= horizon))
    throw ValidationError("profile_at: t=" + std::to_string(t) + " outside [0, " +
                          std::to_string(horizon) + "]");
  if (w.qps_series.empty()) throw ValidationError("online " + quote_id(w.id) + ": empty qps_series");
  return w.profile_for_qps(w.qps_series[w.qps_index_at(t)].qps);
}

void validate_trace(ClusterTrace& trace) {
  if (!std::isfinite(trace.horizon) || trace.horizon <= 0.0)
    throw ValidationError("horizon_s must be > 0");

  std::unordered_map<std::string, std::size_t> gpu_index;
  for (std::size_t i = 0; i < trace.gpus.size(); ++i) {
    auto& g = trace.gpus[i];
    if (g.id.empty()) throw ValidationError("gpu #" + std::to_string(i) + ": empty id");
    if (!gpu_index.emplace(g.id, i).second)
      throw ValidationError("duplicate gpu id " + quote_id(g.id));
    g.online_id.reset();
  }

  std::unordered_set<std::string> workload_ids;
  for (const auto& w : trace.online) {
    const std::string ctx = "online " + quote_id(w.id);
    if (w.id.empty()) throw ValidationError("online workload with empty id");
    if (!workload_ids.insert(w.id).second) throw ValidationError("duplicate online id " + quote_id(w.id));
    auto g = gpu_index.find(w.gpu_id);
    if (g == gpu_index.end())
      throw ValidationError(ctx + ": unknown gpu_id " + quote_id(w.gpu_id));
    auto& gpu = trace.gpus[g->second];
    if (gpu.online_id)
      throw ValidationError(ctx + ": gpu " + quote_id(gpu.id) + " already hosts online " +
                            quote_id(*gpu.online_id));
    gpu.online_id = w.id;

    if (!(w.base_latency > 0.0) || !(w.latency_slo > 0.0))
      throw ValidationError(ctx + ": latencies must be > 0");
    if (w.base_latency > w.latency_slo)
      throw ValidationError(ctx + ": base_latency_s exceeds latency_slo_s");
    if (w.qps_series.empty()) throw ValidationError(ctx + ": empty qps_series");
    for (std::size_t i = 0; i < w.qps_series.size(); ++i) {
      const auto& s = w.qps_series[i];
      if (!std::isfinite(s.t) || s.t < 0.0 || !std::isfinite(s.qps) || s.qps < 0.0)
        throw ValidationError(ctx + ": qps_series[" + std::to_string(i) + "] invalid");
      if (i > 0 && !(s.t > w.qps_series[i - 1].t))
        throw ValidationError(ctx + ": qps_series timestamps not strictly increasing at index " +
                              std::to_string(i));
    }
    if (w.profiles.empty()) throw ValidationError(ctx + ": empty profiles");
    for (std::size_t i = 0; i < w.profiles.size(); ++i) {
      const auto& p = w.profiles[i];
      if (!std::isfinite(p.qps) || p.qps < 0.0)
        throw ValidationError(ctx + ": profiles[" + std::to_string(i) + "].qps invalid");
      if (i > 0 && !(p.qps > w.profiles[i - 1].qps))
        throw ValidationError(ctx + ": profiles not strictly increasing in qps");
      validate_profile(p.profile, ctx + " profiles[" + std::to_string(i) + "]");
    }
  }

  for (const auto& w : trace.offline) {
    const std::string ctx = "offline " + quote_id(w.id);
    if (w.id.empty()) throw ValidationError("offline workload with empty id");
    if (!workload_ids.insert(w.id).second) throw ValidationError("duplicate offline id " + quote_id(w.id));
    if (!std::isfinite(w.submit_time) || w.submit_time < 0.0)
      throw ValidationError(ctx + ": submit_s must be >= 0");
    if (!std::isfinite(w.work_separate) || w.work_separate <= 0.0)
      throw ValidationError(ctx + ": work_s must be > 0");
    validate_profile(w.profile, ctx);
    if (w.profile.sm_activity <= 0.0)
      throw ValidationError(ctx + ": offline sm_activity must be > 0");
  }
}

// ---------------------------------------------------------------------------
// JSON

double get_number(const Json& j, std::string_view key, std::string_view context) {
  auto it = j.find(std::string(key));
  if (it == j.end() || !it->is_number())
    throw ParseError(std::string(context) + ": missing or non-numeric '" + std::string(key) + "'");
  return it->get<double>();
}

std::string get_string(const Json& j, std::string_view key, std::string_view context) {
  auto it = j.find(std::string(key));
  if (it == j.end() || !it->is_string())
    throw ParseError(std::string(context) + ": missing or non-string '" + std::string(key) + "'");
  return it->get<std::string>();
}

const Json& get_array(const Json& j, std::string_view key, std::string_view context) {
  auto it = j.find(std::string(key));
  if (it == j.end() || !it->is_array())
    throw ParseError(std::string(context) + ": missing or non-array '" + std::string(key) + "'");
  return *it;
}

WorkloadProfile profile_from_json(const Json& j, std::string_view context) {
  if (!j.is_object()) throw ParseError(std::string(context) + ": profile must be an object");
  WorkloadProfile p;
  p.sm_activity = get_number(j, "sm_activity", context);
  p.gpu_utilization = get_number(j, "gpu_util", context);
  p.sm_occupancy = get_number(j, "sm_occupancy", context);
  p.iter_time_separate = get_number(j, "iter_time_s", context);
  p.mem_fraction = get_number(j, "mem_fraction", context);
  return p;
}

Json profile_to_json(const WorkloadProfile& p) {
  Json j;
  j["sm_activity"] = p.sm_activity;
  j["gpu_util"] = p.gpu_utilization;
  j["sm_occupancy"] = p.sm_occupancy;
  j["iter_time_s"] = p.iter_time_separate;
  j["mem_fraction"] = p.mem_fraction;
  return j;
}

OnlineWorkload online_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("online entry must be an object");
  OnlineWorkload w;
  w.id = get_string(j, "id", "online entry");
  const std::string ctx = "online " + quote_id(w.id);
  w.gpu_id = get_string(j, "gpu_id", ctx);
  w.base_latency = get_number(j, "base_latency_s", ctx);
  w.latency_slo = get_number(j, "latency_slo_s", ctx);
  for (const auto& s : get_array(j, "qps_series", ctx))
    w.qps_series.push_back({get_number(s, "t_s", ctx), get_number(s, "qps", ctx)});
  for (const auto& p : get_array(j, "profiles", ctx))
    w.profiles.push_back({get_number(p, "qps", ctx), profile_from_json(p, ctx)});
  return w;
}

Json online_to_json(const OnlineWorkload& w) {
  Json j;
  j["id"] = w.id;
  j["gpu_id"] = w.gpu_id;
  j["base_latency_s"] = w.base_latency;
  j["latency_slo_s"] = w.latency_slo;
  auto series = Json::array();
  for (const auto& s : w.qps_series) series.push_back({{"t_s", s.t}, {"qps", s.qps}});
  j["qps_series"] = std::move(series);
  auto profiles = Json::array();
  for (const auto& p : w.profiles) {
    Json e;
    e["qps"] = p.qps;
    const Json prof = profile_to_json(p.profile);
    for (auto it = prof.begin(); it != prof.end(); ++it) e[it.key()] = it.value();
    profiles.push_back(std::move(e));
  }
  j["profiles"] = std::move(profiles);
  return j;
}

OfflineWorkload offline_from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("offline entry must be an object");
  OfflineWorkload w;
  w.id = get_string(j, "id", "offline entry");
  const std::string ctx = "offline " + quote_id(w.id);
  w.submit_time = get_number(j, "submit_s", ctx);
  w.work_separate = get_number(j, "work_s", ctx);
  auto p = j.find("profile");
  if (p == j.end()) throw ParseError(ctx + ": missing 'profile'");
  w.profile = profile_from_json(*p, ctx);
  return w;
}

Json offline_to_json(const OfflineWorkload& w) {
  Json j;
  j["id"] = w.id;
  j["submit_s"] = w.submit_time;
  j["work_s"] = w.work_separate;
  j["profile"] = profile_to_json(w.profile);
  return j;
}

ClusterTrace trace_from_json(const Json& doc) {
  if (!doc.is_object()) throw ParseError("trace: top level must be an object");
  ClusterTrace t;
  t.horizon = get_number(doc, "horizon_s", "trace");
  for (const auto& g : get_array(doc, "gpus", "trace")) {
    GpuDescriptor d;
    d.id = get_string(g, "id", "gpu entry");
    d.gpu_type = get_string(g, "gpu_type", "gpu " + quote_id(d.id));
    t.gpus.push_back(std::move(d));
  }
  for (const auto& o : get_array(doc, "online", "trace")) t.online.push_back(online_from_json(o));
  for (const auto& o : get_array(doc, "offline", "trace")) t.offline.push_back(offline_from_json(o));
  validate_trace(t);
  return t;
}

Json trace_to_json(const ClusterTrace& trace) {
  Json j;
  auto gpus = Json::array();
  for (const auto& g : trace.gpus) gpus.push_back({{"id", g.id}, {"gpu_type", g.gpu_type}});
  j["gpus"] = std::move(gpus);
  auto online = Json::array();
  for (const auto& w : trace.online) online.push_back(online_to_json(w));
  j["online"] = std::move(online);
  auto offline = Json::array();
  for (const auto& w : trace.offline) offline.push_back(offline_to_json(w));
  j["offline"] = std::move(offline);
  j["horizon_s"] = trace.horizon;
  return j;
}

Json read_json_file(const std::filesystem::path& path, std::string_view what) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + std::string(what) + " file '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(what) + " file '" + path.string() + "': " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

ClusterTrace load_trace(const std::filesystem::path& path) {
  auto doc = read_json_file(path, "trace");
  try {
    return trace_from_json(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("trace file '" + path.string() + "': " + e.what());
  }
}

void save_trace(const ClusterTrace& trace, const std::filesystem::path& path) {
  write_text_file(path, trace_to_json(trace).dump(1) + "\n");
}

}  // namespace gpushare
