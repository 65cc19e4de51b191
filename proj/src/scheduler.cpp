#include "gpushare/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <random>

#include "gpushare/throttle.hpp"

namespace gpushare {

std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::muxflow: return "muxflow";
    case Policy::online_only: return "online_only";
    case Policy::time_sharing: return "time_sharing";
    case Policy::pb_time_sharing: return "pb_time_sharing";
    case Policy::muxflow_fixed_sm: return "muxflow_fixed_sm";
    case Policy::muxflow_random_match: return "muxflow_random_match";
  }
  return "?";
}

const std::vector<Policy>& all_policies() {
  static const std::vector<Policy> kAll{Policy::muxflow,         Policy::online_only,
                                        Policy::time_sharing,    Policy::pb_time_sharing,
                                        Policy::muxflow_fixed_sm, Policy::muxflow_random_match};
  return kAll;
}

Policy policy_from_string(std::string_view name) {
  for (Policy p : all_policies())
    if (to_string(p) == name) return p;
  throw ValidationError("unknown policy '" + std::string(name) + "'");
}

void SchedulerConfig::validate() const {
  if (!(interval > 0.0)) throw ValidationError("scheduler: interval_s must be > 0");
  if (!(min_sm > 0.0 && min_sm <= max_sm && max_sm <= 1.0))
    throw ValidationError("scheduler: need 0 < min_sm <= max_sm <= 1");
  if (!(headroom >= 0.0 && headroom < 1.0)) throw ValidationError("scheduler: headroom must be in [0,1)");
  if (!(sm_quantum > 0.0 && sm_quantum <= 1.0))
    throw ValidationError("scheduler: sm_quantum must be in (0,1]");
  if (!(fixed_sm >= min_sm && fixed_sm <= max_sm))
    throw ValidationError("scheduler: fixed_sm must be in [min_sm, max_sm]");
  if (!(mem_quota >= 0.0 && mem_quota <= 1.0)) throw ValidationError("scheduler: mem_quota must be in [0,1]");
}

double predicted_online_demand(const OnlineWorkload& online, double now, double horizon,
                               const SchedulerConfig& cfg) {
  const double from = std::max(0.0, now - cfg.interval);
  double peak = profile_at(online, now, horizon).sm_activity;
  // Every step of the qps series that is in effect somewhere in the window.
  const std::size_t first = online.qps_index_at(from);
  const std::size_t last = online.qps_index_at(now);
  for (std::size_t k = first; k <= last; ++k)
    peak = std::max(peak, online.profile_for_qps(online.qps_series[k].qps).sm_activity);
  return peak;
}

double sm_for_demand(double d, const SchedulerConfig& cfg) {
  const double raw = std::clamp(1.0 - d - cfg.headroom, 0.0, cfg.max_sm);
  // The 1e-9 slack absorbs rounding in 1 - d (1 - 0.8 is just below 0.2).
  const double steps = std::floor(raw / cfg.sm_quantum + 1e-9);
  // k / (1/q) is exact for quanta like 0.05, unlike k * q.
  const double per_unit = std::round(1.0 / cfg.sm_quantum);
  const double sm = std::abs(per_unit * cfg.sm_quantum - 1.0) < 1e-12 ? steps / per_unit
                                                                       : steps * cfg.sm_quantum;
  return sm < cfg.min_sm ? 0.0 : sm;
}

double dynamic_sm(const OnlineWorkload& online, double now, double horizon,
                  const SchedulerConfig& cfg) {
  return sm_for_demand(predicted_online_demand(online, now, horizon, cfg), cfg);
}

double Assignment::predicted_total() const {
  double total = 0.0;
  for (const auto& p : pairs) total += p.predicted;
  return total;
}

Json Assignment::to_json() const {
  Json j;
  j["pairs"] = Json::array();
  for (const auto& p : pairs)
    j["pairs"].push_back({{"gpu_id", p.gpu_id},
                          {"online_id", p.online_id},
                          {"offline_id", p.offline_id},
                          {"sm_pct", p.sm_pct},
                          {"predicted", p.predicted}});
  j["unplaced"] = unplaced;
  j["predicted_total"] = predicted_total();
  return j;
}

namespace {

std::string left_key(const GpuSlot& g) { return g.online ? g.online->id : g.gpu_id; }

bool fits_memory(const OfflineWorkload& w, const SchedulerConfig& cfg) {
  return check_mem_alloc(0.0, w.profile.mem_fraction, cfg.mem_quota) == MemDecision::granted;
}

Assignment finish(Assignment a, const ScheduleInput& in, const std::vector<char>& placed) {
  for (std::size_t k = 0; k < in.pending.size(); ++k)
    if (!placed[k]) a.unplaced.push_back(in.pending[k]->id);
  std::sort(a.pairs.begin(), a.pairs.end(),
            [](const Placement& x, const Placement& y) { return x.gpu_id < y.gpu_id; });
  std::sort(a.unplaced.begin(), a.unplaced.end());
  return a;
}

Placement make_placement(const GpuSlot& g, const OfflineWorkload& w, double sm, double predicted) {
  return Placement{g.gpu_id, g.online ? g.online->id : std::string(), w.id, sm, predicted};
}

Assignment fifo_baseline(const ScheduleInput& in, const SchedulerConfig& cfg) {
  std::vector<std::size_t> order(in.pending.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = *in.pending[a];
    const auto& y = *in.pending[b];
    return x.submit_time != y.submit_time ? x.submit_time < y.submit_time : x.id < y.id;
  });
  std::vector<std::size_t> free_gpus;
  for (std::size_t g = 0; g < in.gpus.size(); ++g)
    if (accepts_offline(in.gpus[g].state) && !in.gpus[g].occupied) free_gpus.push_back(g);
  std::sort(free_gpus.begin(), free_gpus.end(),
            [&](std::size_t a, std::size_t b) { return in.gpus[a].gpu_id < in.gpus[b].gpu_id; });

  Assignment a;
  std::vector<char> placed(in.pending.size(), 0);
  std::size_t next_gpu = 0;
  for (std::size_t k : order) {
    if (next_gpu == free_gpus.size()) break;
    if (!fits_memory(*in.pending[k], cfg)) continue;
    a.pairs.push_back(make_placement(in.gpus[free_gpus[next_gpu++]], *in.pending[k], cfg.max_sm, 0.0));
    placed[k] = 1;
  }
  return finish(std::move(a), in, placed);
}

}  // namespace

WeightGrid build_weight_grid(const ScheduleInput& in, const SpeedPredictor& predictor,
                             const SchedulerConfig& cfg, Exec exec) {
  WeightGrid grid;
  for (std::size_t g = 0; g < in.gpus.size(); ++g)
    if (accepts_offline(in.gpus[g].state) && !in.gpus[g].occupied) grid.gpu_rows.push_back(g);
  std::sort(grid.gpu_rows.begin(), grid.gpu_rows.end(), [&](std::size_t a, std::size_t b) {
    return left_key(in.gpus[a]) < left_key(in.gpus[b]);
  });

  const std::size_t rows = grid.gpu_rows.size();
  const std::size_t cols = in.pending.size();
  grid.weights = WeightMatrix(rows, cols);
  grid.sm.assign(rows, 0.0);

  // Online side of every row, computed once.
  std::vector<WorkloadProfile> online(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const GpuSlot& g = in.gpus[grid.gpu_rows[r]];
    double d = 0.0;
    if (g.online) {
      online[r] = profile_at(*g.online, in.now, in.horizon);
      d = predicted_online_demand(*g.online, in.now, in.horizon, cfg);
    }
    online[r].sm_activity = d;
    grid.sm[r] = cfg.policy == Policy::muxflow_fixed_sm ? cfg.fixed_sm : sm_for_demand(d, cfg);
  }
  std::vector<char> mem_ok(cols);
  for (std::size_t c = 0; c < cols; ++c) mem_ok[c] = fits_memory(*in.pending[c], cfg);

  // Exceptions may not cross the parallel region; keep the first by index.
  const auto total = static_cast<long long>(rows * cols);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(total));
  auto fill = [&](long long flat) {
    const auto r = static_cast<std::size_t>(flat) / cols;
    const auto c = static_cast<std::size_t>(flat) % cols;
    if (grid.sm[r] <= 0.0 || !mem_ok[c]) return;
    try {
      const double w = predictor.predict(in.gpus[grid.gpu_rows[r]].gpu_type, online[r],
                                         in.pending[c]->profile, grid.sm[r]);
      grid.weights.at(r, c) = w >= kMinEdgeWeight ? w : 0.0;
    } catch (...) {
      errors[static_cast<std::size_t>(flat)] = std::current_exception();
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long f = 0; f < total; ++f) fill(f);
  } else {
    for (long long f = 0; f < total; ++f) fill(f);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return grid;
}

Assignment schedule(const ScheduleInput& in, const SpeedPredictor& predictor,
                    const SchedulerConfig& cfg, Exec exec) {
  switch (cfg.policy) {
    case Policy::online_only: {
      Assignment a;
      return finish(std::move(a), in, std::vector<char>(in.pending.size(), 0));
    }
    case Policy::time_sharing:
    case Policy::pb_time_sharing:
      return fifo_baseline(in, cfg);
    default:
      break;
  }

  // Offline side ordered by id for deterministic tie-breaking.
  ScheduleInput sorted = in;
  std::sort(sorted.pending.begin(), sorted.pending.end(),
            [](const OfflineWorkload* a, const OfflineWorkload* b) { return a->id < b->id; });
  const WeightGrid grid = build_weight_grid(sorted, predictor, cfg, exec);
  const WeightMatrix& w = grid.weights;

  std::vector<long> match(w.rows, -1);
  if (cfg.policy == Policy::muxflow_random_match) {
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    for (std::size_t r = 0; r < w.rows; ++r)
      for (std::size_t c = 0; c < w.cols; ++c)
        if (w.at(r, c) >= kMinEdgeWeight) edges.emplace_back(r, c);
    std::mt19937_64 rng(in.seed);
    std::shuffle(edges.begin(), edges.end(), rng);
    std::vector<char> col_used(w.cols, 0);
    for (auto [r, c] : edges) {
      if (match[r] >= 0 || col_used[c]) continue;
      match[r] = static_cast<long>(c);
      col_used[c] = 1;
    }
  } else {
    match = max_weight_assignment(w);
  }

  Assignment a;
  std::vector<char> placed(sorted.pending.size(), 0);
  for (std::size_t r = 0; r < w.rows; ++r) {
    if (match[r] < 0) continue;
    const auto c = static_cast<std::size_t>(match[r]);
    a.pairs.push_back(make_placement(sorted.gpus[grid.gpu_rows[r]], *sorted.pending[c], grid.sm[r],
                                     w.at(r, c)));
    placed[c] = 1;
  }
  return finish(std::move(a), sorted, placed);
}

std::string_view to_string(ActionKind k) {
  switch (k) {
    case ActionKind::keep: return "keep";
    case ActionKind::migrate: return "migrate";
    case ActionKind::start: return "start";
    case ActionKind::stop: return "stop";
  }
  return "?";
}

std::vector<RescheduleAction> reschedule_actions(const Assignment& prev, const Assignment& next) {
  std::map<std::string, std::pair<std::string, std::string>> where;  // offline -> (prev, next)
  for (const auto& p : prev.pairs) where[p.offline_id].first = p.gpu_id;
  for (const auto& p : next.pairs) where[p.offline_id].second = p.gpu_id;

  std::vector<RescheduleAction> out;
  for (const auto& [id, gpus] : where) {
    const auto& [from, to] = gpus;
    if (!from.empty() && !to.empty())
      out.push_back({from == to ? ActionKind::keep : ActionKind::migrate, id, from, to});
    else if (to.empty())
      out.push_back({ActionKind::stop, id, from, ""});
    else
      out.push_back({ActionKind::start, id, "", to});
  }
  return out;
}

}  // namespace gpushare
