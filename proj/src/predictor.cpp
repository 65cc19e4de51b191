#include "gpushare/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace gpushare {

namespace {

void validate_knots(const std::vector<double>& knots, const char* name) {
  if (knots.empty()) throw ValidationError(std::string("prediction table: empty axis ") + name);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i] >= 0.0 && knots[i] <= 1.0))
      throw ValidationError(std::string("prediction table: axis ") + name + " knot out of [0,1]");
    if (i > 0 && !(knots[i] > knots[i - 1]))
      throw ValidationError(std::string("prediction table: axis ") + name +
                            " not strictly increasing");
  }
}

// Lower cell index and weight of the upper knot for a clamped coordinate.
std::pair<std::size_t, double> locate(const std::vector<double>& knots, double x) {
  if (knots.size() == 1) return {0, 0.0};
  if (!(x > knots.front())) return {0, 0.0};  // also maps NaN to the first knot
  if (x >= knots.back()) return {knots.size() - 2, 1.0};
  auto it = std::upper_bound(knots.begin(), knots.end(), x);
  const std::size_t i = static_cast<std::size_t>(std::distance(knots.begin(), it)) - 1;
  return {i, (x - knots[i]) / (knots[i + 1] - knots[i])};
}

std::vector<double> knots_from_json(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || !it->is_array())
    throw ParseError(std::string("prediction table: missing axis '") + name + "'");
  std::vector<double> out;
  for (const auto& v : *it) {
    if (!v.is_number()) throw ParseError(std::string("prediction table: non-numeric knot in ") + name);
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

void TableAxes::validate() const {
  validate_knots(online_sm, "online_sm");
  validate_knots(offline_sm, "offline_sm");
  validate_knots(sm_pct, "sm_pct");
}

TableAxes default_axes() {
  return TableAxes{
      {0.0, 0.034, 0.145, 0.249, 0.432, 0.556, 0.778, 0.892, 1.0},
      {0.5, 0.533, 0.599, 0.683, 0.789, 0.876, 0.92, 0.96, 1.0},
      {0.0, 0.346, 0.431, 0.513, 0.599, 0.687, 0.76, 0.845, 0.926, 1.0},
  };
}

PredictionTable::PredictionTable(std::string gpu_type, TableAxes axes, std::vector<double> values)
    : gpu_type_(std::move(gpu_type)), axes_(std::move(axes)), values_(std::move(values)) {
  if (gpu_type_.empty()) throw ValidationError("prediction table: empty gpu_type");
  axes_.validate();
  if (values_.size() != axes_.size())
    throw ValidationError("prediction table: expected " + std::to_string(axes_.size()) +
                          " values, got " + std::to_string(values_.size()));
  for (double v : values_)
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("prediction table: value outside [0,1]");
  // More SMs never slow the offline workload down.
  constexpr double kTol = 1e-12;
  for (std::size_t i = 0; i < axes_.online_sm.size(); ++i)
    for (std::size_t j = 0; j < axes_.offline_sm.size(); ++j)
      for (std::size_t k = 1; k < axes_.sm_pct.size(); ++k)
        if (at(i, j, k) + kTol < at(i, j, k - 1))
          throw ValidationError("prediction table: values decrease along sm_pct at (" +
                                std::to_string(i) + "," + std::to_string(j) + "," +
                                std::to_string(k) + ")");
}

double PredictionTable::interpolate(double online_sm, double offline_sm, double sm_pct) const {
  const auto [i, ti] = locate(axes_.online_sm, online_sm);
  const auto [j, tj] = locate(axes_.offline_sm, offline_sm);
  const auto [k, tk] = locate(axes_.sm_pct, sm_pct);
  const std::size_t i1 = std::min(i + 1, axes_.online_sm.size() - 1);
  const std::size_t j1 = std::min(j + 1, axes_.offline_sm.size() - 1);
  const std::size_t k1 = std::min(k + 1, axes_.sm_pct.size() - 1);

  auto lerp = [](double a, double b, double t) { return (1.0 - t) * a + t * b; };
  const double c00 = lerp(at(i, j, k), at(i, j, k1), tk);
  const double c01 = lerp(at(i, j1, k), at(i, j1, k1), tk);
  const double c10 = lerp(at(i1, j, k), at(i1, j, k1), tk);
  const double c11 = lerp(at(i1, j1, k), at(i1, j1, k1), tk);
  const double v = lerp(lerp(c00, c01, tj), lerp(c10, c11, tj), ti);
  return std::clamp(v, 0.0, 1.0);
}

Json PredictionTable::to_json() const {
  Json j;
  j["gpu_type"] = gpu_type_;
  j["axes"] = {{"online_sm", axes_.online_sm},
               {"offline_sm", axes_.offline_sm},
               {"sm_pct", axes_.sm_pct}};
  j["values"] = values_;
  return j;
}

PredictionTable PredictionTable::from_json(const Json& j) {
  if (!j.is_object()) throw ParseError("prediction table must be an object");
  auto axes_it = j.find("axes");
  if (axes_it == j.end() || !axes_it->is_object()) throw ParseError("prediction table: missing 'axes'");
  TableAxes axes{knots_from_json(*axes_it, "online_sm"), knots_from_json(*axes_it, "offline_sm"),
                 knots_from_json(*axes_it, "sm_pct")};
  std::vector<double> values;
  for (const auto& v : get_array(j, "values", "prediction table")) {
    if (!v.is_number()) throw ParseError("prediction table: non-numeric value");
    values.push_back(v.get<double>());
  }
  return PredictionTable(get_string(j, "gpu_type", "prediction table"), std::move(axes),
                         std::move(values));
}

PredictionTable PredictionTable::load(const std::filesystem::path& path) {
  return from_json(read_json_file(path, "prediction table"));
}

void PredictionTable::save(const std::filesystem::path& path) const {
  write_text_file(path, to_json().dump(1) + "\n");
}

double predict(const PredictionTable& t, const WorkloadProfile& online,
               const WorkloadProfile& offline, double sm_pct) {
  if (!(sm_pct >= 0.0 && sm_pct <= 1.0))
    throw ValidationError("predict: sm_pct must be in [0,1]");
  return t.interpolate(online.sm_activity, offline.sm_activity, sm_pct);
}

double normalized_throughput(double shared, double separate) {
  if (!(separate > 0.0)) throw ValidationError("normalized_throughput: separate throughput must be > 0");
  return std::clamp(shared / separate, 0.0, 1.05);
}

PredictionTable build_table_from_model(std::string gpu_type, const ThroughputModel& model,
                                       TableAxes axes, Exec exec) {
  axes.validate();
  const std::size_t n_on = axes.online_sm.size();
  const std::size_t n_off = axes.offline_sm.size();
  const std::size_t n_sm = axes.sm_pct.size();
  std::vector<double> values(axes.size());

  auto fill = [&](std::size_t flat) {
    const std::size_t k = flat % n_sm;
    const std::size_t j = (flat / n_sm) % n_off;
    const std::size_t i = flat / (n_sm * n_off);
    values[flat] = std::clamp(model(axes.online_sm[i], axes.offline_sm[j], axes.sm_pct[k]), 0.0, 1.0);
  };

  const auto total = static_cast<long long>(n_on * n_off * n_sm);
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (long long f = 0; f < total; ++f) fill(static_cast<std::size_t>(f));
  } else {
    for (long long f = 0; f < total; ++f) fill(static_cast<std::size_t>(f));
  }
  return PredictionTable(std::move(gpu_type), std::move(axes), std::move(values));
}

void TablePredictor::add(PredictionTable table) {
  std::string key = table.gpu_type();
  tables_.insert_or_assign(std::move(key), std::move(table));
}

bool TablePredictor::has(std::string_view gpu_type) const {
  return tables_.find(gpu_type) != tables_.end();
}

const PredictionTable& TablePredictor::table(std::string_view gpu_type) const {
  auto it = tables_.find(gpu_type);
  if (it == tables_.end())
    throw ValidationError("no prediction table for gpu type '" + std::string(gpu_type) + "'");
  return it->second;
}

double TablePredictor::predict(std::string_view gpu_type, const WorkloadProfile& online,
                               const WorkloadProfile& offline, double sm_pct) const {
  return gpushare::predict(table(gpu_type), online, offline, sm_pct);
}

}  // namespace gpushare
