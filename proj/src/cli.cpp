#include "gpushare/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "gpushare/config.hpp"
#include "gpushare/matching.hpp"
#include "gpushare/predictor.hpp"
#include "gpushare/simengine.hpp"
#include "gpushare/tracegen.hpp"

namespace gpushare {

namespace fs = std::filesystem;

namespace {

void write_report(const RunReport& r, const fs::path& dir, const SimConfig& cfg) {
  fs::create_directories(dir);
  write_text_file(dir / "report.json", r.to_json().dump(2) + "\n");
  if (cfg.output.timeseries) write_text_file(dir / "timeseries.csv", r.timeseries_csv());
}

void print_summary(const RunReport& r, std::ostream& out) {
  double worst_avg = 1.0, worst_p99 = 1.0;
  for (const auto& s : r.online) {
    worst_avg = std::max(worst_avg, s.avg_multiplier);
    worst_p99 = std::max(worst_p99, s.p99_multiplier);
  }
  out << "policy " << r.policy << " seed " << r.seed << ": completed " << r.completed << "/"
      << r.offline.size() << ", avg JCT " << r.avg_jct << " s, oversold " << r.oversold
      << ", worst latency x" << worst_avg << " (p99 x" << worst_p99 << "), evictions " << r.evictions
      << ", faults " << r.injected_faults << " (propagated " << r.propagated_errors << ")\n";
}

struct SimulateArgs {
  std::string trace, config, out, policy;
  std::uint64_t seed = 0;
  int sweep = 0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const ClusterTrace trace = load_trace(a.trace);
  SimConfig cfg = a.config.empty() ? SimConfig{} : load_config(a.config);
  if (!a.policy.empty()) cfg.scheduler.policy = policy_from_string(a.policy);
  cfg.validate();

  if (a.sweep <= 0) {
    const RunReport r = run(trace, cfg, a.seed);
    write_report(r, a.out, cfg);
    print_summary(r, out);
    return kExitOk;
  }
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < a.sweep; ++k) seeds.push_back(a.seed + static_cast<std::uint64_t>(k));
  const auto reports = run_many(trace, cfg, seeds);
  for (const auto& r : reports) {
    write_report(r, fs::path(a.out) / ("seed-" + std::to_string(r.seed)), cfg);
    print_summary(r, out);
  }
  return kExitOk;
}

WeightMatrix weights_from_json(const Json& j, std::vector<std::string>& left,
                               std::vector<std::string>& right) {
  auto ids = [&](const char* key, std::vector<std::string>& dst) {
    for (const auto& v : get_array(j, key, "weights file")) {
      if (!v.is_string()) throw ParseError(std::string("weights file: '") + key + "' must list ids");
      dst.push_back(v.get<std::string>());
    }
  };
  ids("left", left);
  ids("right", right);
  BipartiteGraph g{left, right, {}};
  const Json& rows = get_array(j, "weights", "weights file");
  if (rows.size() != left.size()) throw ParseError("weights file: one weight row per left node expected");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != right.size())
      throw ParseError("weights file: row " + std::to_string(i) + " must have one entry per right node");
    for (std::size_t k = 0; k < right.size(); ++k) {
      const Json& v = rows[i][k];
      if (v.is_null()) continue;
      if (!v.is_number()) throw ParseError("weights file: weights must be numbers or null");
      g.weights[{left[i], right[k]}] = v.get<double>();
    }
  }
  g.validate();
  WeightMatrix m(left.size(), right.size());
  for (const auto& [key, w] : g.weights) {
    const auto i = static_cast<std::size_t>(std::find(left.begin(), left.end(), key.first) - left.begin());
    const auto k = static_cast<std::size_t>(std::find(right.begin(), right.end(), key.second) - right.begin());
    m.at(i, k) = w;
  }
  return m;
}

int cmd_match(const std::string& path, std::ostream& out) {
  const Json j = read_json_file(path, "weights");
  std::vector<std::string> left, right;
  const WeightMatrix m = weights_from_json(j, left, right);
  BipartiteGraph g{left, right, {}};
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t k = 0; k < m.cols; ++k)
      if (m.at(i, k) > 0.0) g.weights[{left[i], right[k]}] = m.at(i, k);
  const Matching result = max_weight_matching(g);
  Json doc;
  doc["pairs"] = Json::array();
  for (const auto& [l, r] : result.pairs) doc["pairs"].push_back({l, r});
  doc["total"] = result.total;
  out << doc.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

Assignment schedule_snapshot(const Json& snap) {
  if (!snap.is_object()) throw ParseError("snapshot must be an object");
  static const std::set<std::string> kKeys{"now_s", "horizon_s", "gpus", "online", "offline", "tables", "config"};
  for (auto it = snap.begin(); it != snap.end(); ++it)
    if (!kKeys.count(it.key())) throw ParseError("snapshot: unknown key '" + it.key() + "'");

  const SimConfig cfg = snap.contains("config") ? config_from_json(snap["config"]) : SimConfig{};
  const double now = get_number(snap, "now_s", "snapshot");
  const double horizon = snap.contains("horizon_s") ? get_number(snap, "horizon_s", "snapshot")
                                                    : now + cfg.scheduler.interval;

  ClusterTrace trace;
  trace.horizon = horizon;
  std::vector<HealthState> states;
  std::vector<bool> occupied;
  for (const auto& g : get_array(snap, "gpus", "snapshot")) {
    GpuDescriptor d;
    d.id = get_string(g, "id", "snapshot gpu");
    d.gpu_type = get_string(g, "gpu_type", "snapshot gpu " + d.id);
    trace.gpus.push_back(d);
    states.push_back(g.contains("state") ? health_state_from_string(get_string(g, "state", "snapshot gpu"))
                                         : HealthState::Healthy);
    occupied.push_back(g.contains("occupied") && g["occupied"].is_boolean() && g["occupied"].get<bool>());
  }
  for (const auto& w : get_array(snap, "online", "snapshot")) trace.online.push_back(online_from_json(w));
  if (snap.contains("offline"))
    for (const auto& w : get_array(snap, "offline", "snapshot")) trace.offline.push_back(offline_from_json(w));
  validate_trace(trace);
  if (!(now >= 0.0 && now <= horizon)) throw ValidationError("snapshot: now_s must be in [0, horizon_s]");

  TablePredictor predictor;
  if (snap.contains("tables"))
    for (const auto& t : get_array(snap, "tables", "snapshot")) predictor.add(PredictionTable::from_json(t));
  const TablePredictor built = make_predictor(trace, cfg);
  for (const auto& g : trace.gpus)
    if (!predictor.has(g.gpu_type)) predictor.add(built.table(g.gpu_type));

  ScheduleInput in;
  in.now = now;
  in.horizon = horizon;
  for (std::size_t i = 0; i < trace.gpus.size(); ++i) {
    const auto& d = trace.gpus[i];
    const OnlineWorkload* online = nullptr;
    for (const auto& w : trace.online)
      if (d.online_id && w.id == *d.online_id) online = &w;
    in.gpus.push_back({d.id, d.gpu_type, online, states[i], occupied[i]});
  }
  for (const auto& w : trace.offline) in.pending.push_back(&w);
  return schedule(in, predictor, cfg.scheduler);
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"GPU space-sharing simulator and scheduler"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run a trace through the simulator");
  simulate->add_option("--trace", sim.trace, "trace file")->required();
  simulate->add_option("--config", sim.config, "config file (defaults apply when omitted)");
  simulate->add_option("--seed", sim.seed, "random seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "output directory")->required();
  simulate->add_option("--policy", sim.policy, "override scheduler.policy")
      ->check(CLI::IsMember({"muxflow", "online_only", "time_sharing", "pb_time_sharing",
                             "muxflow_fixed_sm", "muxflow_random_match"}));
  simulate->add_option("--sweep-seeds", sim.sweep, "run N seeds starting at --seed, one directory each")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  std::string snapshot;
  auto* sched = app.add_subcommand("schedule", "run one scheduling round from a snapshot");
  sched->add_option("--snapshot", snapshot, "snapshot file")->required();

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "check a trace file");
  validate->add_option("--trace", validate_path, "trace file")->required();

  std::string spec_path, gen_out;
  std::uint64_t gen_seed = 0;
  auto* gen = app.add_subcommand("gen-trace", "generate a synthetic trace");
  gen->add_option("--spec", spec_path, "generator spec file")->required();
  gen->add_option("--seed", gen_seed, "random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output trace file")->required();

  auto* predict = app.add_subcommand("predict", "build or query prediction tables");
  predict->require_subcommand(1);
  std::string build_type, build_out, build_config;
  auto* build = predict->add_subcommand("build", "build a table from the interference model");
  build->add_option("--gpu-type", build_type, "GPU type the table is for")->required();
  build->add_option("--out", build_out, "output table file")->required();
  build->add_option("--config", build_config, "config file (interference and predictor axes)");
  std::string table_path;
  double q_online = 0.0, q_offline = 0.0, q_sm = 0.0;
  auto* query = predict->add_subcommand("query", "predict normalized offline throughput");
  query->add_option("--table", table_path, "table file")->required();
  query->add_option("--online", q_online, "online SM activity")->required();
  query->add_option("--offline", q_offline, "offline SM activity")->required();
  query->add_option("--sm", q_sm, "assigned SM percentage as a fraction")->required();

  std::string weights_path;
  auto* match = app.add_subcommand("match", "max-weight matching of a weight-matrix file");
  match->add_option("--weights", weights_path, "weights file")->required();

  app.add_subcommand("defaults", "print the default config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (sched->parsed()) {
      out << schedule_snapshot(read_json_file(snapshot, "snapshot")).to_json().dump(2) << "\n";
      return kExitOk;
    }
    if (validate->parsed()) {
      const ClusterTrace t = load_trace(validate_path);
      out << "ok: " << t.gpus.size() << " gpus, " << t.online.size() << " online, "
          << t.offline.size() << " offline, horizon " << t.horizon << " s\n";
      return kExitOk;
    }
    if (gen->parsed()) {
      save_trace(generate_trace(load_generator_spec(spec_path), gen_seed), gen_out);
      return kExitOk;
    }
    if (build->parsed()) {
      const SimConfig cfg = build_config.empty() ? SimConfig{} : load_config(build_config);
      const InterferenceParams ip = cfg.interference;
      build_table_from_model(
          build_type, [ip](double a, double b, double c) { return model_offline_rate(a, b, c, ip); },
          cfg.predictor.axes)
          .save(build_out);
      return kExitOk;
    }
    if (query->parsed()) {
      const PredictionTable t = PredictionTable::load(table_path);
      WorkloadProfile on, off;
      on.sm_activity = q_online;
      off.sm_activity = q_offline;
      out << gpushare::predict(t, on, off, q_sm) << "\n";
      return kExitOk;
    }
    if (match->parsed()) return cmd_match(weights_path, out);
    out << config_to_json(SimConfig{}).dump(2) << "\n";
    return kExitOk;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ValidationError& e) {
    err << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace gpushare
