#include "gpushare/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iomanip>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

#include "gpushare/interference.hpp"
#include "gpushare/scheduler.hpp"
#include "gpushare/throttle.hpp"

namespace gpushare {

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::offline_completion: return "offline_completion";
    case EventKind::fault_injection: return "fault_injection";
    case EventKind::offline_arrival: return "offline_arrival";
    case EventKind::metric_sample: return "metric_sample";
    case EventKind::eviction: return "eviction";
    case EventKind::scheduling_round: return "scheduling_round";
    case EventKind::control_tick: return "control_tick";
  }
  return "?";
}

double oversold_gpu(const std::vector<OversoldTerm>& terms) {
  double work = 0.0, elapsed = 0.0;
  for (const auto& t : terms) {
    work += t.done_work;
    elapsed += t.elapsed;
  }
  if (terms.empty() || elapsed <= 0.0) return 0.0;
  return work / elapsed;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

long long to_ms(double seconds) { return std::llround(seconds * 1000.0); }

// Request-weighted histogram of the online latency multiplier.
struct LatencyAcc {
  static constexpr std::size_t kMaxBins = 20000;
  double width = 0.001;
  std::vector<double> hist;
  double weight = 0.0;
  double weighted_sum = 0.0;
  double max_mult = 0.0;
  double dropped = 0.0;
  double stalled_s = 0.0;

  void add(double mult, double w) {
    if (w <= 0.0) return;
    auto bin = static_cast<std::size_t>(std::max(0.0, (mult - 1.0) / width));
    bin = std::min(bin, kMaxBins - 1);
    if (bin >= hist.size()) hist.resize(bin + 1, 0.0);
    hist[bin] += w;
    weight += w;
    weighted_sum += w * mult;
    max_mult = std::max(max_mult, mult);
  }

  double mean() const { return weight > 0.0 ? weighted_sum / weight : 1.0; }

  double p99() const {
    if (weight <= 0.0) return 1.0;
    const double target = 0.99 * weight;
    double seen = 0.0;
    for (std::size_t b = 0; b < hist.size(); ++b) {
      seen += hist[b];
      if (seen >= target) return std::min(1.0 + static_cast<double>(b + 1) * width, max_mult);
    }
    return max_mult;
  }
};

enum class Status { waiting, pending, running, done };

struct OfflineRt {
  const OfflineWorkload* w = nullptr;
  Status status = Status::waiting;
  int gpu = -1;
  std::uint64_t epoch = 0;
  OfflineOutcome out;
};

struct GpuRt {
  std::string id;
  std::string type;
  const OnlineWorkload* online = nullptr;
  std::size_t qps_idx = 0;
  const WorkloadProfile* profile = nullptr;
  double qps = 0.0;

  GpuState health;
  int offline = -1;
  double sm = 0.0;
  ThrottleState pid;
  double restart_left = 0.0;
  double stall_until = -1.0;
  bool completed = false;  // set by the tick kernel, consumed serially
  std::string evict_cause;

  double acc_gu = 0.0, acc_sa = 0.0, acc_clock = 0.0, acc_mem = 0.0, acc_throttle = 0.0;
  int acc_n = 0;
  double max_offline_mem = 0.0;
  LatencyAcc latency;
};

struct Event {
  long long t = 0;
  EventKind kind = EventKind::control_tick;
  std::size_t key = 0;
  std::uint64_t epoch = 0;
  std::uint64_t seq = 0;

  bool operator>(const Event& o) const {
    if (t != o.t) return t > o.t;
    if (kind != o.kind) return kind > o.kind;
    if (key != o.key) return key > o.key;
    return seq > o.seq;
  }
};

class Simulation {
 public:
  Simulation(const ClusterTrace& trace, const SimConfig& cfg, const SpeedPredictor& predictor,
             std::uint64_t seed, const RunOptions& opts)
      : trace_(trace), cfg_(cfg), predictor_(predictor), seed_(seed), opts_(opts),
        fault_rng_(splitmix64(seed ^ 0x6661756c74ULL)) {
    horizon_ms_ = to_ms(trace.horizon);
    control_ms_ = to_ms(cfg.interference.control_tick);
    sample_ms_ = to_ms(cfg.interference.sim_tick);
    round_ms_ = to_ms(cfg.scheduler.interval);
    series_ms_ = to_ms(cfg.output.timeseries_interval);
    space_sharing_ = is_space_sharing(cfg.scheduler.policy);

    std::unordered_map<std::string, const OnlineWorkload*> online_by_id;
    for (const auto& w : trace.online) online_by_id[w.id] = &w;
    for (const auto& d : trace.gpus) {
      GpuRt g;
      g.id = d.id;
      g.type = d.gpu_type;
      g.latency.width = cfg.output.latency_bin_width;
      if (d.online_id) {
        g.online = online_by_id.at(*d.online_id);
        g.qps_idx = g.online->qps_index_at(0.0);
        g.qps = g.online->qps_series[g.qps_idx].qps;
        g.profile = &g.online->profile_for_qps(g.qps);
      }
      gpus_.push_back(std::move(g));
    }
    for (const auto& w : trace.offline) {
      OfflineRt o;
      o.w = &w;
      o.out.id = w.id;
      o.out.submit = w.submit_time;
      o.out.work = w.work_separate;
      offline_.push_back(std::move(o));
    }
  }

  RunReport run() {
    for (std::size_t i = 0; i < offline_.size(); ++i) {
      const long long t = to_ms(offline_[i].w->submit_time);
      if (t <= horizon_ms_) push(t, EventKind::offline_arrival, i);
    }
    if (horizon_ms_ > 0) {
      push(0, EventKind::scheduling_round, 0);
      push(0, EventKind::control_tick, 0);
    }
    if (sample_ms_ <= horizon_ms_) push(sample_ms_, EventKind::metric_sample, 0);

    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      if (e.t > horizon_ms_) break;
      switch (e.kind) {
        case EventKind::offline_completion: on_completion(e); break;
        case EventKind::fault_injection: on_fault(e); break;
        case EventKind::offline_arrival: offline_[e.key].status = Status::pending; break;
        case EventKind::metric_sample: on_sample(e); break;
        case EventKind::eviction: on_eviction(e); break;
        case EventKind::scheduling_round: on_round(e); break;
        case EventKind::control_tick: on_tick(e); break;
      }
    }
    return finish();
  }

 private:
  double secs(long long ms) const { return static_cast<double>(ms) / 1000.0; }

  void push(long long t, EventKind kind, std::size_t key, std::uint64_t epoch = 0) {
    queue_.push(Event{t, kind, key, epoch, seq_++});
  }

  void record(double t, std::string kind, const GpuRt* g, const OfflineRt* o, std::string detail = {}) {
    if (!opts_.record_events) return;
    EventRecord r;
    r.time = t;
    r.kind = std::move(kind);
    if (g) {
      r.gpu_id = g->id;
      r.gpu_state = g->health.state;
    }
    if (o) r.offline_id = o->w->id;
    r.detail = std::move(detail);
    report_.events.push_back(std::move(r));
  }

  // ---- control tick: fluid dynamics of one GPU over [t, t + dt) ----

  void tick_gpu(GpuRt& g, double t, double dt) {
    const auto& ip = cfg_.interference;
    double d = 0.0, gu_on = 0.0, mem_on = 0.0, qps = 0.0;
    if (g.online) {
      const auto& series = g.online->qps_series;
      bool moved = false;
      while (g.qps_idx + 1 < series.size() && series[g.qps_idx + 1].t <= t) {
        ++g.qps_idx;
        moved = true;
      }
      if (moved) {
        g.qps = series[g.qps_idx].qps;
        g.profile = &g.online->profile_for_qps(g.qps);
      }
      d = g.profile->sm_activity;
      gu_on = g.profile->gpu_utilization;
      mem_on = g.profile->mem_fraction;
      qps = g.qps;
    }
    const bool stalled = g.online && t < g.stall_until;
    if (stalled) {
      // The context is being reset: nothing runs, requests are dropped.
      g.latency.dropped += qps * dt;
      g.latency.stalled_s += dt;
      d = 0.0;
      gu_on = 0.0;
    }

    OfflineRt* o = g.offline >= 0 ? &offline_[static_cast<std::size_t>(g.offline)] : nullptr;
    bool active = o && !o->out.finish;
    if (active && g.restart_left > 0.0) {
      g.restart_left -= dt;  // restoring the checkpoint, no progress
      active = false;
    }
    const double demand = o ? o->w->profile.sm_activity : 0.0;
    const double gu_off = o ? o->w->profile.gpu_utilization : 0.0;

    double sa = d, clock = clock_at_load(d, ip), mult = 1.0 / clock, rate = 0.0, gu = gu_on;
    switch (cfg_.scheduler.policy) {
      case Policy::time_sharing:
        if (active) {
          rate = 0.5;
          mult = 2.0;
          sa = std::min(1.0, d + rate * demand);
          gu = std::min(1.0, gu_on + rate * gu_off);
          clock = clock_at_load(sa, ip);
        }
        break;
      case Policy::pb_time_sharing:
        if (active) {
          rate = std::max(0.0, 1.0 - gu_on);
          mult = 1.0 + ip.pb_overhead;
          sa = std::min(1.0, d + rate * demand);
          gu = std::min(1.0, gu_on + rate * gu_off);
          clock = clock_at_load(sa, ip);
        }
        break;
      case Policy::online_only:
        break;
      default:
        if (active) {
          const InterferenceResult r = ground_truth_step(d, g.sm, g.pid.level, demand, ip);
          sa = r.total_load;
          clock = r.sm_clock_frac;
          mult = r.online_latency_mult;
          rate = r.offline_rate;
          const double achieved = demand > 0.0 ? std::min(1.0, r.offline_sm / demand) : 0.0;
          gu = std::min(1.0, gu_on + (1.0 - gu_on) * gu_off * achieved);
          const double load = gpu_load(sa, clock * cfg_.clock.max_mhz, cfg_.clock);
          g.pid = pid_step(g.pid, load, cfg_.pid, dt);
        }
        break;
    }

    if (g.online && !stalled) g.latency.add(mult, qps * dt);

    const double mem_off = o && !o->out.finish ? o->w->profile.mem_fraction : 0.0;
    g.max_offline_mem = std::max(g.max_offline_mem, mem_off);

    if (active && rate > 0.0) {
      const double remaining = o->w->work_separate - o->out.progress;
      if (rate * dt >= remaining) {
        o->out.finish = t + remaining / rate;
        o->out.progress = o->w->work_separate;
        g.completed = true;
      } else {
        o->out.progress += rate * dt;
      }
    }

    g.acc_gu += gu;
    g.acc_sa += sa;
    g.acc_clock += clock * cfg_.clock.max_mhz;
    g.acc_mem += mem_on + mem_off;
    g.acc_throttle += g.offline >= 0 ? g.pid.level : 0.0;
    ++g.acc_n;
  }

  void on_tick(const Event& e) {
    const double t = secs(e.t);
    const double dt = secs(control_ms_);
    const auto n = static_cast<long long>(gpus_.size());
    if (opts_.exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
      for (long long i = 0; i < n; ++i) tick_gpu(gpus_[static_cast<std::size_t>(i)], t, dt);
    } else {
      for (long long i = 0; i < n; ++i) tick_gpu(gpus_[static_cast<std::size_t>(i)], t, dt);
    }
    for (auto& g : gpus_) {
      if (!g.completed) continue;
      g.completed = false;
      const auto& o = offline_[static_cast<std::size_t>(g.offline)];
      push(e.t + control_ms_, EventKind::offline_completion, static_cast<std::size_t>(g.offline), o.epoch);
    }
    if (e.t + control_ms_ < horizon_ms_) push(e.t + control_ms_, EventKind::control_tick, 0);
  }

  // ---- lifecycle ----

  void start(OfflineRt& o, std::size_t gi, double sm, double t, long long t_ms) {
    GpuRt& g = gpus_[gi];
    o.status = Status::running;
    o.gpu = static_cast<int>(gi);
    ++o.epoch;
    g.offline = static_cast<int>(&o - offline_.data());
    g.sm = sm;
    g.pid = ThrottleState{};
    if (!o.out.first_start) {
      o.out.first_start = t;
      g.restart_left = 0.0;
    } else {
      g.restart_left = cfg_.interference.checkpoint_restart_cost;
    }
    ++o.out.starts;
    record(t, "start", &g, &o);

    if (cfg_.faults.rate_per_hour > 0.0) {
      std::exponential_distribution<double> gap(cfg_.faults.rate_per_hour / 3600.0);
      const long long at = t_ms + std::max<long long>(1, to_ms(gap(fault_rng_)));
      if (at <= horizon_ms_) push(at, EventKind::fault_injection, static_cast<std::size_t>(g.offline), o.epoch);
    }
  }

  // Takes the offline workload off its GPU and returns it to the queue; the
  // checkpoint keeps its progress.
  void detach(OfflineRt& o) {
    GpuRt& g = gpus_[static_cast<std::size_t>(o.gpu)];
    g.offline = -1;
    g.sm = 0.0;
    g.pid = ThrottleState{};
    g.restart_left = 0.0;
    o.status = Status::pending;
    o.gpu = -1;
    ++o.epoch;
  }

  OfflineRt* live(const Event& e) {
    OfflineRt& o = offline_[e.key];
    if (o.status != Status::running || o.epoch != e.epoch || o.out.finish) return nullptr;
    return &o;
  }

  void on_completion(const Event& e) {
    OfflineRt& o = offline_[e.key];
    if (o.status != Status::running || o.epoch != e.epoch) return;
    GpuRt& g = gpus_[static_cast<std::size_t>(o.gpu)];
    record(*o.out.finish, "completion", &g, &o);
    g.offline = -1;
    g.sm = 0.0;
    g.pid = ThrottleState{};
    o.status = Status::done;
    o.gpu = -1;
  }

  void on_fault(const Event& e) {
    OfflineRt* o = live(e);
    if (!o) return;
    GpuRt& g = gpus_[static_cast<std::size_t>(o->gpu)];
    const double t = secs(e.t);
    ++report_.injected_faults;
    ++o->out.faults;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const bool signal = u(fault_rng_) < cfg_.faults.sigint_fraction;
    if (signal && cfg_.faults.graceful_exit) {
      ++report_.graceful_exits;
      record(t, "fault", &g, o, "graceful_exit");
    } else {
      // The error reaches the shared context; the online service stalls
      // while the context and the sharing daemon are reset.
      ++report_.propagated_errors;
      if (g.online) g.stall_until = std::max(g.stall_until, t + cfg_.faults.reset_downtime);
      record(t, "fault", &g, o, signal ? "propagated_signal" : "propagated_crash");
    }
    detach(*o);
  }

  void on_sample(const Event& e) {
    const double t = secs(e.t);
    const bool series = cfg_.output.timeseries && e.t % series_ms_ == 0;
    for (std::size_t gi = 0; gi < gpus_.size(); ++gi) {
      GpuRt& g = gpus_[gi];
      if (g.acc_n == 0) continue;
      const double n = g.acc_n;
      MetricSample m;
      m.gpu_util = std::clamp(g.acc_gu / n, 0.0, 1.0);
      m.sm_activity = std::clamp(g.acc_sa / n, 0.0, 1.0);
      m.sm_clock_mhz = g.acc_clock / n;
      m.mem_usage = std::clamp(g.acc_mem / n, 0.0, 1.0);
      m.timestamp = t;
      const double throttle = g.acc_throttle / n;
      g.acc_gu = g.acc_sa = g.acc_clock = g.acc_mem = g.acc_throttle = 0.0;
      g.acc_n = 0;

      const HealthState before = g.health.state;
      const HealthAction action = advance(g.health, m, cfg_.thresholds, cfg_.backoff, t);
      if (g.health.state != before)
        record(t, "state", &g, nullptr, std::string(to_string(before)) + "->" +
                                            std::string(to_string(g.health.state)));
      if (action == HealthAction::evict_offline && space_sharing_ && g.offline >= 0) {
        const auto& o = offline_[static_cast<std::size_t>(g.offline)];
        if (!o.out.finish) {
          g.evict_cause = overlimit_breach(m, cfg_.thresholds).value_or("overlimit");
          push(e.t, EventKind::eviction, static_cast<std::size_t>(g.offline), o.epoch);
        }
      }

      sum_gu_ += m.gpu_util;
      sum_sa_ += m.sm_activity;
      ++samples_;
      if (series) {
        TimeseriesRow row{t,           g.id,           g.health.state, m.gpu_util, m.sm_activity,
                          m.mem_usage, m.sm_clock_mhz, throttle,       {}};
        if (g.offline >= 0) row.offline_id = offline_[static_cast<std::size_t>(g.offline)].w->id;
        report_.timeseries.push_back(std::move(row));
      }
    }
    if (e.t + sample_ms_ <= horizon_ms_) push(e.t + sample_ms_, EventKind::metric_sample, 0);
  }

  void on_eviction(const Event& e) {
    OfflineRt* o = live(e);
    if (!o) return;
    GpuRt& g = gpus_[static_cast<std::size_t>(o->gpu)];
    ++report_.evictions;
    ++report_.eviction_causes[g.evict_cause];
    ++o->out.evictions;
    record(secs(e.t), "eviction", &g, o, g.evict_cause);
    detach(*o);
  }

  void on_round(const Event& e) {
    const double t = secs(e.t);
    const auto& sc = cfg_.scheduler;
    ++report_.rounds;
    const double horizon = trace_.horizon;

    // Running pairs follow the online demand between rounds of placement.
    if (space_sharing_ && sc.policy != Policy::muxflow_fixed_sm && !sc.rematch_running) {
      for (auto& g : gpus_) {
        if (g.offline < 0) continue;
        auto& o = offline_[static_cast<std::size_t>(g.offline)];
        if (o.out.finish) continue;
        double sm = g.online ? dynamic_sm(*g.online, t, horizon, sc) : sm_for_demand(0.0, sc);
        if (!accepts_offline(g.health.state)) sm = std::min(sm, g.sm);
        if (sm <= 0.0) {
          ++o.out.preemptions;
          ++report_.preemptions;
          record(t, "preempt", &g, &o);
          detach(o);
        } else {
          g.sm = sm;
        }
      }
    }

    const bool rematch = space_sharing_ && sc.rematch_running;
    ScheduleInput in;
    in.now = t;
    in.horizon = horizon;
    in.seed = splitmix64(seed_ ^ splitmix64(static_cast<std::uint64_t>(report_.rounds)));
    Assignment prev;
    for (auto& g : gpus_) {
      GpuSlot slot{g.id, g.type, g.online, g.health.state, g.offline >= 0};
      if (rematch && g.offline >= 0 && accepts_offline(g.health.state)) {
        const auto& o = offline_[static_cast<std::size_t>(g.offline)];
        if (!o.out.finish) {
          slot.occupied = false;
          prev.pairs.push_back({g.id, g.online ? g.online->id : "", o.w->id, g.sm, 0.0});
          in.pending.push_back(o.w);
        }
      }
      in.gpus.push_back(std::move(slot));
    }
    for (const auto& o : offline_)
      if (o.status == Status::pending) in.pending.push_back(o.w);

    Assignment next;
    try {
      next = schedule(in, predictor_, sc, opts_.exec);
    } catch (const std::exception& ex) {
      ++report_.failed_rounds;
      record(t, "round_failed", nullptr, nullptr, ex.what());
      push_next_round(e);
      return;
    }

    std::unordered_map<std::string, std::size_t> gpu_index, offline_index;
    for (std::size_t i = 0; i < gpus_.size(); ++i) gpu_index[gpus_[i].id] = i;
    for (std::size_t i = 0; i < offline_.size(); ++i) offline_index[offline_[i].w->id] = i;
    std::unordered_map<std::string, double> sm_of;
    for (const auto& p : next.pairs) sm_of[p.offline_id] = p.sm_pct;

    if (rematch) {
      const auto actions = reschedule_actions(prev, next);
      // Detach everything that leaves its GPU before anything starts.
      for (const auto& a : actions) {
        auto& o = offline_[offline_index.at(a.offline_id)];
        if (a.kind == ActionKind::stop || a.kind == ActionKind::migrate) {
          record(t, a.kind == ActionKind::stop ? "preempt" : "migrate", &gpus_[gpu_index.at(a.from_gpu)], &o);
          if (a.kind == ActionKind::stop) {
            ++o.out.preemptions;
            ++report_.preemptions;
          } else {
            ++o.out.migrations;
            ++report_.migrations;
          }
          detach(o);
        } else if (a.kind == ActionKind::keep) {
          gpus_[gpu_index.at(a.to_gpu)].sm = sm_of.at(a.offline_id);
        }
      }
      for (const auto& a : actions)
        if (a.kind == ActionKind::start || a.kind == ActionKind::migrate)
          start(offline_[offline_index.at(a.offline_id)], gpu_index.at(a.to_gpu), sm_of.at(a.offline_id), t, e.t);
    } else {
      for (const auto& p : next.pairs)
        start(offline_[offline_index.at(p.offline_id)], gpu_index.at(p.gpu_id), p.sm_pct, t, e.t);
    }
    push_next_round(e);
  }

  void push_next_round(const Event& e) {
    if (e.t + round_ms_ < horizon_ms_) push(e.t + round_ms_, EventKind::scheduling_round, 0);
  }

  RunReport finish() {
    RunReport& r = report_;
    r.policy = std::string(to_string(cfg_.scheduler.policy));
    r.seed = seed_;
    r.horizon = trace_.horizon;

    std::unordered_map<std::string, const GpuRt*> gpu_of_online;
    for (const auto& g : gpus_)
      if (g.online) gpu_of_online[g.online->id] = &g;
    for (const auto& w : trace_.online) {
      const GpuRt& g = *gpu_of_online.at(w.id);
      OnlineStats s;
      s.id = w.id;
      s.gpu_id = g.id;
      s.avg_multiplier = g.latency.mean();
      s.p99_multiplier = g.latency.p99();
      s.max_multiplier = g.latency.weight > 0.0 ? g.latency.max_mult : 1.0;
      s.avg_latency = w.base_latency * s.avg_multiplier;
      s.p99_latency = w.base_latency * s.p99_multiplier;
      s.served_requests = g.latency.weight;
      s.dropped_requests = g.latency.dropped;
      s.stalled_s = g.latency.stalled_s;
      r.online.push_back(std::move(s));
    }

    std::vector<OversoldTerm> terms;
    double jct_sum = 0.0;
    for (const auto& o : offline_) {
      r.offline.push_back(o.out);
      if (!o.out.first_start) continue;
      ++r.started;
      if (o.out.finish) {
        ++r.completed;
        jct_sum += *o.out.finish - o.out.submit;
        r.makespan = std::max(r.makespan, *o.out.finish);
        terms.push_back({o.out.work, *o.out.finish - *o.out.first_start});
      } else {
        terms.push_back({o.out.progress, trace_.horizon - *o.out.first_start});
      }
    }
    r.avg_jct = r.completed > 0 ? jct_sum / r.completed : 0.0;
    r.oversold = oversold_gpu(terms);
    for (const auto& g : gpus_) r.max_offline_mem = std::max(r.max_offline_mem, g.max_offline_mem);
    if (samples_ > 0) {
      r.mean_gpu_util = sum_gu_ / static_cast<double>(samples_);
      r.mean_sm_activity = sum_sa_ / static_cast<double>(samples_);
    }
    return std::move(report_);
  }

  const ClusterTrace& trace_;
  const SimConfig& cfg_;
  const SpeedPredictor& predictor_;
  std::uint64_t seed_;
  RunOptions opts_;
  std::mt19937_64 fault_rng_;

  long long horizon_ms_ = 0, control_ms_ = 0, sample_ms_ = 0, round_ms_ = 0, series_ms_ = 0;
  bool space_sharing_ = true;

  std::vector<GpuRt> gpus_;
  std::vector<OfflineRt> offline_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  std::uint64_t seq_ = 0;

  double sum_gu_ = 0.0, sum_sa_ = 0.0;
  long long samples_ = 0;
  RunReport report_;
};

Json opt_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(9) << v;
  return os.str();
}

}  // namespace

Json RunReport::to_json() const {
  Json j;
  j["policy"] = policy;
  j["seed"] = seed;
  j["horizon_s"] = horizon;
  Json causes = Json::object();
  for (const auto& [cause, n] : eviction_causes) causes[cause] = n;
  j["summary"] = {{"avg_jct_s", avg_jct},
                  {"makespan_s", makespan},
                  {"oversold_gpu", oversold},
                  {"offline_total", offline.size()},
                  {"started", started},
                  {"completed", completed},
                  {"incomplete", static_cast<int>(offline.size()) - completed},
                  {"injected_faults", injected_faults},
                  {"propagated_errors", propagated_errors},
                  {"graceful_exits", graceful_exits},
                  {"evictions", evictions},
                  {"eviction_causes", causes},
                  {"preemptions", preemptions},
                  {"migrations", migrations},
                  {"rounds", rounds},
                  {"failed_rounds", failed_rounds},
                  {"max_offline_mem", max_offline_mem},
                  {"mean_gpu_util", mean_gpu_util},
                  {"mean_sm_activity", mean_sm_activity}};
  j["online"] = Json::array();
  for (const auto& s : online)
    j["online"].push_back({{"id", s.id},
                           {"gpu_id", s.gpu_id},
                           {"avg_latency_s", s.avg_latency},
                           {"p99_latency_s", s.p99_latency},
                           {"avg_multiplier", s.avg_multiplier},
                           {"p99_multiplier", s.p99_multiplier},
                           {"max_multiplier", s.max_multiplier},
                           {"served_requests", s.served_requests},
                           {"dropped_requests", s.dropped_requests},
                           {"stalled_s", s.stalled_s}});
  j["offline"] = Json::array();
  for (const auto& o : offline) {
    std::optional<double> jct;
    if (o.finish) jct = *o.finish - o.submit;
    j["offline"].push_back({{"id", o.id},
                            {"submit_s", o.submit},
                            {"work_s", o.work},
                            {"progress_s", o.progress},
                            {"first_start_s", opt_number(o.first_start)},
                            {"finish_s", opt_number(o.finish)},
                            {"jct_s", opt_number(jct)},
                            {"starts", o.starts},
                            {"evictions", o.evictions},
                            {"faults", o.faults},
                            {"preemptions", o.preemptions},
                            {"migrations", o.migrations}});
  }
  return j;
}

std::string RunReport::timeseries_csv() const {
  std::ostringstream os;
  os << "t_s,gpu_id,state,gpu_util,sm_activity,mem_usage,sm_clock_mhz,throttle,offline_id\n";
  for (const auto& r : timeseries)
    os << fmt(r.t) << ',' << r.gpu_id << ',' << to_string(r.state) << ',' << fmt(r.gpu_util) << ','
       << fmt(r.sm_activity) << ',' << fmt(r.mem_usage) << ',' << fmt(r.sm_clock_mhz) << ','
       << fmt(r.throttle) << ',' << r.offline_id << '\n';
  return os.str();
}

TablePredictor make_predictor(const ClusterTrace& trace, const SimConfig& cfg) {
  TablePredictor p;
  for (const auto& path : cfg.predictor.table_paths) p.add(PredictionTable::load(path));
  const InterferenceParams ip = cfg.interference;
  for (const auto& g : trace.gpus) {
    if (p.has(g.gpu_type)) continue;
    p.add(build_table_from_model(
        g.gpu_type,
        [ip](double on, double off, double sm) { return model_offline_rate(on, off, sm, ip); },
        cfg.predictor.axes));
  }
  return p;
}

RunReport run(const ClusterTrace& trace, const SimConfig& cfg, const SpeedPredictor& predictor,
              std::uint64_t seed, const RunOptions& opts) {
  cfg.validate();
  ClusterTrace checked = trace;
  validate_trace(checked);
  if (checked.gpus.empty()) throw ValidationError("trace has no GPUs");
  Simulation sim(checked, cfg, predictor, seed, opts);
  return sim.run();
}

RunReport run(const ClusterTrace& trace, const SimConfig& cfg, std::uint64_t seed,
              const RunOptions& opts) {
  cfg.validate();
  const TablePredictor predictor = make_predictor(trace, cfg);
  return run(trace, cfg, predictor, seed, opts);
}

std::vector<RunReport> run_many(const ClusterTrace& trace, const SimConfig& cfg,
                                const std::vector<std::uint64_t>& seeds, Exec exec) {
  cfg.validate();
  const TablePredictor predictor = make_predictor(trace, cfg);
  std::vector<RunReport> out(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  RunOptions opts;
  opts.exec = Exec::serial;
  const auto n = static_cast<long long>(seeds.size());
  auto one = [&](long long i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = run(trace, cfg, predictor, seeds[k], opts);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < n; ++i) one(i);
  } else {
    for (long long i = 0; i < n; ++i) one(i);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace gpushare
