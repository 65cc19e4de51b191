// Acceptance runner: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gpushare/cli.hpp"
#include "gpushare/config.hpp"
#include "gpushare/gpu_state.hpp"
#include "gpushare/interference.hpp"
#include "gpushare/matching.hpp"
#include "gpushare/predictor.hpp"
#include "gpushare/scheduler.hpp"
#include "gpushare/simengine.hpp"
#include "gpushare/throttle.hpp"
#include "gpushare/tracegen.hpp"

using namespace gpushare;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and sizes, fixed here on purpose.
constexpr int kMatchTrials = 1000;
constexpr std::size_t kMatchMaxSide = 6;
constexpr std::size_t kDenseSide = 1000;
constexpr double kDenseBudgetS = 60.0;
constexpr double kClockTol = 1e-12;
constexpr int kLoadSamples = 10000;
constexpr double kLatencyAvgMax = 1.20;
constexpr double kLatencyP99Max = 1.25;
constexpr double kRunBudgetS = 300.0;
constexpr int kStrictMin = 4;
constexpr int kMinFaults = 10000;
constexpr double kPropagatedLo = 0.005, kPropagatedHi = 0.02, kPropagatedNoGraceful = 0.99;
constexpr double kTableMaxErr = 0.05;
constexpr int kTableQueries = 1000;
constexpr double kKnotTol = 1e-12;

int failures = 0;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << id << ": " << what << " | " << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- matching

double brute_force(const WeightMatrix& m) {
  const bool transpose = m.rows > m.cols;
  const std::size_t small = transpose ? m.cols : m.rows, big = transpose ? m.rows : m.cols;
  std::vector<std::size_t> perm(big);
  std::iota(perm.begin(), perm.end(), 0);
  double best = 0.0;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < small; ++i) {
      const double w = transpose ? m.at(perm[i], i) : m.at(i, perm[i]);
      if (w >= kMinEdgeWeight) s += w;
    }
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool assignment_valid(const WeightMatrix& m, const std::vector<long>& a, double& total) {
  total = 0.0;
  std::set<long> used;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0) continue;
    if (static_cast<std::size_t>(a[i]) >= m.cols || !used.insert(a[i]).second) return false;
    total += m.at(i, static_cast<std::size_t>(a[i]));
  }
  return a.size() == m.rows;
}

void criterion_matching() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> side(1, kMatchMaxSide);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int exact = 0;
  double worst = 0.0;
  for (int t = 0; t < kMatchTrials; ++t) {
    WeightMatrix m(side(rng), side(rng));
    // Mix sparse, dense and heavily tied instances.
    const int kind = t % 3;
    for (double& w : m.w) {
      if (kind == 0) w = u(rng) < 0.4 ? 0.0 : u(rng);
      else if (kind == 1) w = u(rng);
      else w = std::floor(u(rng) * 4.0) / 4.0;
    }
    double got = 0.0;
    const bool valid = assignment_valid(m, max_weight_assignment(m), got);
    const double best = brute_force(m);
    const double err = std::abs(got - best);
    worst = std::max(worst, err);
    if (valid && err <= 1e-9 * std::max(1.0, best)) ++exact;
  }

  WeightMatrix dense(kDenseSide, kDenseSide);
  for (double& w : dense.w) w = u(rng);
  const auto t0 = Clock::now();
  const auto big = max_weight_assignment(dense);
  const double elapsed = seconds_since(t0);
  double big_total = 0.0;
  const bool big_valid = assignment_valid(dense, big, big_total);
  const bool big_perfect = std::count(big.begin(), big.end(), -1L) == 0;

  BipartiteGraph g;
  g.left = {"A", "B"};
  g.right = {"C", "D", "E"};
  g.weights = {{{"A", "C"}, 0.3}, {{"A", "D"}, 0.8}, {{"B", "C"}, 0.8}, {{"B", "E"}, 0.4}};
  const Matching two = max_weight_matching(g);
  const bool two_ok = two.pairs == std::vector<std::pair<std::string, std::string>>{{"A", "D"}, {"B", "C"}} &&
                      std::abs(two.total - 1.6) <= 1e-12;

  verdict(1, exact == kMatchTrials && big_valid && big_perfect && elapsed < kDenseBudgetS && two_ok,
          "matching optimality",
          std::to_string(exact) + "/" + std::to_string(kMatchTrials) + " brute-force optimal (max err " +
              fmt(worst) + "), " + std::to_string(kDenseSide) + "x" + std::to_string(kDenseSide) + " in " +
              fmt(elapsed, 3) + " s, two-plan total " + fmt(two.total, 6) + (two_ok ? " (A,D),(B,C)" : " wrong pairs"));
}

// ---------------------------------------------------------------- clock factor

void criterion_clock() {
  const ClockParams p;
  const double e1 = std::abs(clock_factor(p.threshold_mhz, p) - 1.0);
  const double e2 = std::abs(clock_factor(p.max_mhz, p) - (1.0 - p.a_high));
  const double e3 = std::abs(clock_factor(0.0, p) - (1.0 + p.a_low));
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < kLoadSamples; ++n) {
    ClockParams q;
    q.max_mhz = 1000.0 + 1000.0 * u(rng);
    q.threshold_mhz = q.max_mhz * (0.5 + 0.45 * u(rng));
    q.a_high = 0.05 + 0.95 * u(rng);
    q.a_low = q.a_high + 5.0 * u(rng);
    const double sa = u(rng);
    const double c = q.max_mhz * u(rng);
    const double direct = c < q.threshold_mhz
                              ? sa * (1.0 + q.a_low * (q.threshold_mhz - c) / q.threshold_mhz)
                              : sa * (1.0 - q.a_high * (c - q.threshold_mhz) / (q.max_mhz - q.threshold_mhz));
    worst = std::max(worst, std::abs(gpu_load(sa, c, q) - direct));
  }
  const double end_err = std::max({e1, e2, e3});
  verdict(2, end_err <= kClockTol && worst <= kClockTol, "clock factor endpoints and load",
          "endpoint err " + fmt(end_err) + ", max load err over " + std::to_string(kLoadSamples) + " samples " +
              fmt(worst));
}

// ---------------------------------------------------------------- dynamic SM

void criterion_dynamic_sm() {
  SchedulerConfig cfg;
  cfg.headroom = 0.0;
  auto online = [](double sa) {
    OnlineWorkload w;
    w.id = "on";
    w.gpu_id = "g";
    w.base_latency = 0.01;
    w.latency_slo = 0.1;
    w.qps_series = {{0.0, 50.0}};
    WorkloadProfile p;
    p.sm_activity = sa;
    w.profiles = {{0.0, p}};
    return w;
  };
  const double a = dynamic_sm(online(0.20), 600.0, 3600.0, cfg);
  const double b = dynamic_sm(online(0.80), 600.0, 3600.0, cfg);
  verdict(3, a == 0.80 && b == 0.20, "dynamic SM allocation",
          "0.20 -> " + fmt(a, 17) + ", 0.80 -> " + fmt(b, 17));
}

// ---------------------------------------------------------------- state machine

struct ScriptStep {
  char op;     // n nominal, m middling, u unhealthy, o overlimit, c slow clock, D disable, E enable
  double dt;   // seconds since the previous step
};

MetricSample level_sample(char op, double t) {
  MetricSample m{0.3, 0.3, 1590.0, 0.3, t};
  switch (op) {
    case 'm': m.sm_activity = 0.80; break;
    case 'u': m.sm_activity = 0.90; break;
    case 'o': m.sm_activity = 0.99; break;
    case 'c': m.sm_clock_mhz = 0.6 * 1590.0; break;
    default: break;
  }
  return m;
}

// Reference model of the health rules, kept separate from the library.
struct Reference {
  HealthState state = HealthState::Init;
  double until = 0.0;
  std::vector<double> all_entries;  // never pruned; the window is applied on replay

  double dwell(double now, const BackoffParams& bp) const {
    int k = 1;
    for (double t : all_entries)
      if (now - t < bp.window) ++k;
    return bp.base_dwell * std::pow(2.0, k - 1);
  }

  HealthAction observe(char op, double now, const BackoffParams& bp) {
    const bool over = op == 'o' || op == 'c';
    const bool unhealthy = over || op == 'u';
    const bool nominal = op == 'n';
    auto enter = [&] {
      until = now + dwell(now, bp);
      all_entries.push_back(now);
      state = HealthState::Overlimit;
      return HealthAction::evict_offline;
    };
    switch (state) {
      case HealthState::Disabled: return HealthAction::none;
      case HealthState::Init: state = HealthState::Healthy; return HealthAction::none;
      case HealthState::Healthy:
        if (over) return enter();
        if (unhealthy) {
          state = HealthState::Unhealthy;
          return HealthAction::forbid_scheduling;
        }
        return HealthAction::none;
      case HealthState::Unhealthy:
        if (over) return enter();
        if (nominal) state = HealthState::Healthy;
        return HealthAction::none;
      case HealthState::Overlimit:
        if (now >= until && !over) state = HealthState::Unhealthy;
        return HealthAction::none;
    }
    return HealthAction::none;
  }
};

void criterion_state_machine() {
  const std::vector<ScriptStep> script = {
      {'o', 0},    {'n', 10},  {'m', 10},   {'u', 10},  {'u', 10},  {'m', 10},   {'n', 10},  {'o', 10},
      {'n', 30},   {'o', 40},  {'n', 10},   {'o', 10},  {'n', 60},  {'n', 60},   {'c', 10},  {'n', 240},
      {'n', 10},   {'c', 10},  {'n', 480},  {'u', 10},  {'n', 10},  {'D', 0},    {'o', 10},  {'E', 0},
      {'u', 10},   {'n', 7200}, {'o', 10},  {'n', 60},  {'o', 10},  {'n', 120},  {'n', 10},  {'o', 3700},
      {'n', 240},  {'n', 10},  {'n', 3500}, {'u', 10},  {'o', 10},  {'o', 120},  {'m', 10},  {'m', 10},
      {'u', 10},   {'n', 10},  {'m', 10},   {'u', 10},  {'c', 10},  {'c', 240},  {'n', 10},  {'D', 0},
      {'E', 0},    {'n', 10},
  };
  using S = HealthState;
  const std::set<std::pair<S, S>> required = {
      {S::Init, S::Healthy},          {S::Healthy, S::Healthy},       {S::Healthy, S::Unhealthy},
      {S::Healthy, S::Overlimit},     {S::Unhealthy, S::Unhealthy},   {S::Unhealthy, S::Healthy},
      {S::Unhealthy, S::Overlimit},   {S::Overlimit, S::Overlimit},   {S::Overlimit, S::Unhealthy},
      {S::Healthy, S::Disabled},      {S::Unhealthy, S::Disabled},    {S::Disabled, S::Disabled},
      {S::Disabled, S::Init},
  };
  std::set<std::pair<S, S>> legal = required;
  legal.insert({S::Overlimit, S::Disabled});
  legal.insert({S::Init, S::Disabled});
  const std::set<std::pair<S, S>> forbidden = {
      {S::Overlimit, S::Healthy}, {S::Init, S::Unhealthy}, {S::Init, S::Overlimit},
      {S::Healthy, S::Init},      {S::Unhealthy, S::Init}, {S::Overlimit, S::Init},
      {S::Disabled, S::Healthy},  {S::Disabled, S::Unhealthy}, {S::Disabled, S::Overlimit},
  };

  const ThresholdSet th;
  const BackoffParams bp;
  GpuState s;
  Reference ref;
  double now = 0.0;
  std::set<std::pair<S, S>> seen;
  int mismatches = 0, forbidden_hits = 0, illegal = 0, dwell_errors = 0, entries = 0;
  for (const auto& st : script) {
    now += st.dt;
    const S before = s.state;
    if (st.op == 'D') {
      s = disable(s);
      ref.state = S::Disabled;
    } else if (st.op == 'E') {
      s = enable(s);
      ref.state = S::Init;
    } else {
      const HealthAction got = advance(s, level_sample(st.op, now), th, bp, now);
      const HealthAction want = ref.observe(st.op, now, bp);
      if (got != want) ++mismatches;
      if (s.state == S::Overlimit && before != S::Overlimit) {
        ++entries;
        if (!s.overlimit_until || std::abs(*s.overlimit_until - ref.until) > 1e-9) ++dwell_errors;
      }
    }
    if (s.state != ref.state) ++mismatches;
    const std::pair<S, S> tr{before, s.state};
    seen.insert(tr);
    if (forbidden.count(tr)) ++forbidden_hits;
    if (!legal.count(tr)) ++illegal;
  }
  int covered = 0;
  for (const auto& tr : required) covered += static_cast<int>(seen.count(tr));

  // Direct spot checks of the windowed doubling.
  GpuState probe;
  probe.overlimit_entries = {0.0, 100.0};
  const bool spot = backoff(GpuState{}, 0.0, bp) == bp.base_dwell &&
                    backoff(probe, 200.0, bp) == 4.0 * bp.base_dwell &&
                    backoff(probe, 7300.0, bp) == bp.base_dwell;

  const bool ok = script.size() == 50 && mismatches == 0 && forbidden_hits == 0 && illegal == 0 &&
                  dwell_errors == 0 && covered == static_cast<int>(required.size()) && entries >= 6 && spot;
  verdict(4, ok, "health state machine and backoff",
          std::to_string(script.size()) + " steps, " + std::to_string(covered) + "/" +
              std::to_string(required.size()) + " legal transitions covered, " + std::to_string(mismatches) +
              " oracle mismatches, " + std::to_string(forbidden_hits) + " forbidden, " +
              std::to_string(entries) + " overlimit entries with " + std::to_string(dwell_errors) + " dwell errors");
}

// ---------------------------------------------------------------- suite

struct SuiteTrace {
  std::string name;
  ClusterTrace trace;
  std::map<Policy, RunReport> runs;
  double slowest_run_s = 0.0;
};

std::vector<SuiteTrace> run_suite() {
  const fs::path dir = GPUSHARE_SUITE_DIR;
  const Json manifest = read_json_file(dir / "suite.json", "suite manifest");
  const auto run_seed = manifest.at("run_seed").get<std::uint64_t>();
  std::vector<SuiteTrace> suite;
  for (const auto& entry : manifest.at("traces")) {
    SuiteTrace s;
    s.name = entry.at("name").get<std::string>();
    s.trace = generate_trace(load_generator_spec(dir / entry.at("spec").get<std::string>()),
                             entry.at("seed").get<std::uint64_t>());
    SimConfig cfg;
    cfg.output.timeseries = false;
    const TablePredictor predictor = make_predictor(s.trace, cfg);
    for (Policy p : all_policies()) {
      cfg.scheduler.policy = p;
      const auto t0 = Clock::now();
      s.runs.emplace(p, run(s.trace, cfg, predictor, run_seed));
      s.slowest_run_s = std::max(s.slowest_run_s, seconds_since(t0));
    }
    std::cout << "  suite " << s.name << ": " << s.trace.gpus.size() << " GPUs, " << s.trace.offline.size()
              << " offline, slowest policy run " << fmt(s.slowest_run_s, 3) << " s" << std::endl;
    suite.push_back(std::move(s));
  }
  return suite;
}

void criterion_latency(const std::vector<SuiteTrace>& suite) {
  double worst_avg = 0.0, worst_p99 = 0.0, slowest = 0.0;
  int workloads = 0;
  bool shape_ok = suite.size() >= 5;
  for (const auto& s : suite) {
    const auto& mux = s.runs.at(Policy::muxflow);
    const auto& alone = s.runs.at(Policy::online_only);
    shape_ok = shape_ok && s.trace.gpus.size() >= 8 && s.trace.gpus.size() <= 64 && s.trace.horizon >= 86400.0;
    slowest = std::max(slowest, s.slowest_run_s);
    for (std::size_t i = 0; i < mux.online.size(); ++i) {
      worst_avg = std::max(worst_avg, mux.online[i].avg_latency / alone.online[i].avg_latency);
      worst_p99 = std::max(worst_p99, mux.online[i].p99_latency / alone.online[i].p99_latency);
      ++workloads;
    }
  }
  verdict(5, shape_ok && worst_avg <= kLatencyAvgMax && worst_p99 <= kLatencyP99Max && slowest < kRunBudgetS,
          "online latency protection",
          std::to_string(workloads) + " online workloads on " + std::to_string(suite.size()) +
              " traces, worst avg ratio " + fmt(worst_avg) + ", worst p99 ratio " + fmt(worst_p99) +
              ", slowest run " + fmt(slowest, 3) + " s");
}

void criterion_ordering(const std::vector<SuiteTrace>& suite) {
  struct Tally {
    int holds = 0, strict = 0;
  } jct, fixed, random;
  std::ostringstream detail;
  for (const auto& s : suite) {
    const auto& mux = s.runs.at(Policy::muxflow);
    const auto& pb = s.runs.at(Policy::pb_time_sharing);
    const auto& fx = s.runs.at(Policy::muxflow_fixed_sm);
    const auto& rm = s.runs.at(Policy::muxflow_random_match);
    // JCT is only comparable when both policies finish the same work.
    const bool same_done = mux.completed >= pb.completed;
    if (same_done && mux.avg_jct <= pb.avg_jct) ++jct.holds;
    if (same_done && mux.avg_jct < pb.avg_jct) ++jct.strict;
    if (mux.oversold >= fx.oversold) ++fixed.holds;
    if (mux.oversold > fx.oversold) ++fixed.strict;
    if (mux.oversold >= rm.oversold) ++random.holds;
    if (mux.oversold > rm.oversold) ++random.strict;
    detail << s.name << " jct " << fmt(mux.avg_jct, 5) << "/" << fmt(pb.avg_jct, 5) << " (done "
           << mux.completed << "/" << pb.completed << ") oversold " << fmt(mux.oversold) << "/"
           << fmt(fx.oversold) << "/" << fmt(rm.oversold) << "; ";
  }
  const int n = static_cast<int>(suite.size());
  auto good = [&](const Tally& t) { return t.holds == n && t.strict >= kStrictMin; };
  verdict(6, n >= 5 && good(jct) && good(fixed) && good(random), "policy ordering",
          "jct " + std::to_string(jct.holds) + " hold/" + std::to_string(jct.strict) + " strict, fixed-sm " +
              std::to_string(fixed.holds) + "/" + std::to_string(fixed.strict) + ", random-match " +
              std::to_string(random.holds) + "/" + std::to_string(random.strict) + " | " + detail.str());
}

void criterion_oversold(const std::vector<SuiteTrace>& suite) {
  const double a = oversold_gpu({{100.0, 100.0}});
  const double b = oversold_gpu({{100.0, 200.0}});
  const double c = oversold_gpu({{100.0, 100.0}, {100.0, 200.0}});
  double lo = 1.0, hi = 0.0;
  for (const auto& s : suite)
    for (const auto& [p, r] : s.runs) {
      lo = std::min(lo, r.oversold);
      hi = std::max(hi, r.oversold);
    }
  verdict(9, a == 1.0 && b == 0.5 && c == 200.0 / 300.0 && lo >= 0.0 && hi <= 1.0, "oversold accounting",
          "examples " + fmt(a, 17) + ", " + fmt(b, 17) + ", " + fmt(c, 17) + "; suite range [" + fmt(lo) + ", " +
              fmt(hi) + "]");
}

// ---------------------------------------------------------------- faults

void criterion_faults() {
  GeneratorSpec spec;
  spec.gpus = 64;
  spec.offline = 320;
  spec.duration_min = 7200.0;
  spec.duration_max = 28800.0;
  spec.submit_fraction = 0.1;
  const ClusterTrace trace = generate_trace(spec, 4242);
  SimConfig cfg;
  cfg.output.timeseries = false;
  cfg.faults.rate_per_hour = 30.0;
  cfg.scheduler.interval = 60.0;
  const TablePredictor predictor = make_predictor(trace, cfg);

  cfg.faults.graceful_exit = true;
  const RunReport on = run(trace, cfg, predictor, 1);
  cfg.faults.graceful_exit = false;
  const RunReport off = run(trace, cfg, predictor, 1);
  const double f_on = on.injected_faults ? static_cast<double>(on.propagated_errors) / on.injected_faults : 0.0;
  const double f_off = off.injected_faults ? static_cast<double>(off.propagated_errors) / off.injected_faults : 0.0;
  verdict(7,
          on.injected_faults >= kMinFaults && off.injected_faults >= kMinFaults && f_on >= kPropagatedLo &&
              f_on <= kPropagatedHi && f_off >= kPropagatedNoGraceful,
          "fault propagation",
          "graceful: " + std::to_string(on.propagated_errors) + "/" + std::to_string(on.injected_faults) + " = " +
              fmt(f_on) + "; without: " + std::to_string(off.propagated_errors) + "/" +
              std::to_string(off.injected_faults) + " = " + fmt(f_off));
}

// ---------------------------------------------------------------- predictor

void criterion_table() {
  const InterferenceParams ip;
  auto model = [&](double a, double b, double c) { return model_offline_rate(a, b, c, ip); };
  const TableAxes axes = default_axes();
  const PredictionTable t = build_table_from_model("A10", model, axes);
  const bool shape = axes.online_sm.size() == 9 && axes.offline_sm.size() == 9 && axes.sm_pct.size() == 10;

  double knot_err = 0.0;
  for (double a : axes.online_sm)
    for (double b : axes.offline_sm)
      for (double c : axes.sm_pct) knot_err = std::max(knot_err, std::abs(t.interpolate(a, b, c) - model(a, b, c)));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int n = 0; n < kTableQueries; ++n) {
    const double a = u(rng);
    const double b = axes.offline_sm.front() + (1.0 - axes.offline_sm.front()) * u(rng);
    const double c = u(rng);
    worst = std::max(worst, std::abs(t.interpolate(a, b, c) - model(a, b, c)));
  }
  verdict(8, shape && worst <= kTableMaxErr && knot_err <= kKnotTol, "prediction table accuracy",
          "9x9x10 table, max err " + fmt(worst) + " over " + std::to_string(kTableQueries) +
              " queries, knot err " + fmt(knot_err));
}

// ---------------------------------------------------------------- determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() / "gpushare_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  GeneratorSpec spec = load_generator_spec(fs::path(GPUSHARE_SUITE_DIR) / "trace_2.json");
  save_trace(generate_trace(spec, 7), dir / "trace.json");
  std::ofstream(dir / "cfg.json") << R"({"faults": {"rate_per_hour": 0.5}})";

  auto simulate = [&](const std::string& out, const std::vector<std::string>& extra) {
    std::vector<std::string> args = {"gpushare", "simulate", "--trace", (dir / "trace.json").string(), "--config",
                                     (dir / "cfg.json").string(), "--seed", "11", "--out", (dir / out).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    return run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  };
  int identical = 0, compared = 0;
  bool codes_ok = true;
  for (const auto& policy : {"muxflow", "pb_time_sharing", "muxflow_random_match"}) {
    const std::string a = std::string("a-") + policy, b = std::string("b-") + policy;
    codes_ok = codes_ok && simulate(a, {"--policy", policy}) == kExitOk && simulate(b, {"--policy", policy}) == kExitOk;
    for (const char* f : {"report.json", "timeseries.csv"}) {
      ++compared;
      const std::string x = slurp(dir / a / f), y = slurp(dir / b / f);
      if (!x.empty() && x == y) ++identical;
    }
  }
  codes_ok = codes_ok && simulate("sweep-a", {"--sweep-seeds", "3"}) == kExitOk &&
             simulate("sweep-b", {"--sweep-seeds", "3"}) == kExitOk;
  for (int k = 11; k < 14; ++k) {
    ++compared;
    const std::string sub = "seed-" + std::to_string(k);
    const std::string x = slurp(dir / "sweep-a" / sub / "report.json");
    if (!x.empty() && x == slurp(dir / "sweep-b" / sub / "report.json")) ++identical;
  }
  fs::remove_all(dir);
  verdict(10, codes_ok && identical == compared, "byte-identical reports",
          std::to_string(identical) + "/" + std::to_string(compared) + " output files identical across repeat runs");
}

}  // namespace

int main() {
  try {
    criterion_matching();
    criterion_clock();
    criterion_dynamic_sm();
    criterion_state_machine();
    const auto suite = run_suite();
    criterion_latency(suite);
    criterion_ordering(suite);
    criterion_faults();
    criterion_table();
    criterion_oversold(suite);
    criterion_determinism();
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance aborted: " << e.what() << std::endl;
    return 100;
  }
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures;
}
