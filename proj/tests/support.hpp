// Small fixtures shared by the unit tests and the acceptance runner.
#pragma once

#include <string>
#include <vector>

#include "gpushare/core.hpp"
#include "gpushare/predictor.hpp"

namespace fixtures {

inline gpushare::WorkloadProfile profile(double sa, double gu = 0.3, double mem = 0.2) {
  gpushare::WorkloadProfile p;
  p.sm_activity = sa;
  p.gpu_utilization = gu;
  p.sm_occupancy = 0.5;
  p.iter_time_separate = 0.1;
  p.mem_fraction = mem;
  return p;
}

// Online service with a constant request rate and a single profile.
inline gpushare::OnlineWorkload steady_online(const std::string& id, const std::string& gpu, double sa,
                                              double gu = 0.3, double mem = 0.2) {
  gpushare::OnlineWorkload w;
  w.id = id;
  w.gpu_id = gpu;
  w.base_latency = 0.01;
  w.latency_slo = 0.05;
  w.qps_series = {{0.0, 100.0}};
  w.profiles = {{0.0, profile(sa, gu, mem)}};
  return w;
}

inline gpushare::OfflineWorkload offline(const std::string& id, double submit, double work, double sa,
                                         double gu = 0.5, double mem = 0.3) {
  gpushare::OfflineWorkload w;
  w.id = id;
  w.submit_time = submit;
  w.work_separate = work;
  w.profile = profile(sa, gu, mem);
  return w;
}

inline gpushare::GpuDescriptor gpu(const std::string& id, const std::string& type = "A10") {
  gpushare::GpuDescriptor g;
  g.id = id;
  g.gpu_type = type;
  return g;
}

// Two GPUs with online A (0.2) and B (0.4); offline C, D, E (0.6, 0.7, 0.8).
// Table values chosen so that two plans compete:
// at the SM share each GPU can spare, A pairs best with D and B with C.
inline gpushare::PredictionTable two_plan_table(const std::string& type = "A10") {
  gpushare::TableAxes axes{{0.2, 0.4}, {0.6, 0.7, 0.8}, {0.6, 0.8}};
  return gpushare::PredictionTable(type, axes, {0.2, 0.3, 0.6, 0.8, 0.0, 0.0, 0.8, 0.9, 0.0, 0.1, 0.4, 0.5});
}

inline gpushare::ClusterTrace two_plan_trace(double horizon = 3600.0) {
  gpushare::ClusterTrace t;
  t.horizon = horizon;
  t.gpus = {gpu("gpu-a"), gpu("gpu-b")};
  t.online = {steady_online("A", "gpu-a", 0.2), steady_online("B", "gpu-b", 0.4)};
  t.offline = {offline("C", 0.0, 600.0, 0.6), offline("D", 0.0, 600.0, 0.7), offline("E", 0.0, 600.0, 0.8)};
  return t;
}

}  // namespace fixtures
