// Sharing-speed prediction: normalized offline throughput as a function of
// (online SM activity, offline SM demand, assigned SM percentage).
//
// The reference predictor interpolates a dense grid trilinearly. A learned
// regressor exported onto the same grid plugs in unchanged, and anything
// else can implement SpeedPredictor directly.
#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gpushare/core.hpp"

namespace gpushare {

struct TableAxes {
  std::vector<double> online_sm;
  std::vector<double> offline_sm;
  std::vector<double> sm_pct;

  std::size_t size() const { return online_sm.size() * offline_sm.size() * sm_pct.size(); }
  void validate() const;
  bool operator==(const TableAxes&) const = default;
};

/// 9 x 9 x 10 knots. Offline demand spans [0.5, 1] (the training-job range);
/// knot spacing is tightened around the load knee and the demand cap.
TableAxes default_axes();

class PredictionTable {
 public:
  /// Values are row-major with online_sm outermost and sm_pct innermost.
  /// Throws ValidationError on shape, range or monotonicity violations.
  PredictionTable(std::string gpu_type, TableAxes axes, std::vector<double> values);

  const std::string& gpu_type() const { return gpu_type_; }
  const TableAxes& axes() const { return axes_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return values_[(i * axes_.offline_sm.size() + j) * axes_.sm_pct.size() + k];
  }

  /// Trilinear interpolation; coordinates are clamped to the knot hull.
  double interpolate(double online_sm, double offline_sm, double sm_pct) const;

  Json to_json() const;
  static PredictionTable from_json(const Json& j);
  static PredictionTable load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  bool operator==(const PredictionTable&) const = default;

 private:
  std::string gpu_type_;
  TableAxes axes_;
  std::vector<double> values_;
};

/// Normalized throughput of `offline` sharing with `online` at `sm_pct`.
double predict(const PredictionTable& t, const WorkloadProfile& online,
               const WorkloadProfile& offline, double sm_pct);

/// Shared over separate throughput, clamped to [0, 1.05].
double normalized_throughput(double shared, double separate);

using ThroughputModel = std::function<double(double online_sm, double offline_sm, double sm_pct)>;

/// Evaluates `model` at every knot. Exec::parallel spreads the grid over
/// OpenMP threads; both paths produce identical tables.
PredictionTable build_table_from_model(std::string gpu_type, const ThroughputModel& model,
                                       TableAxes axes, Exec exec = Exec::parallel);

class SpeedPredictor {
 public:
  virtual ~SpeedPredictor() = default;
  /// Throws when no model exists for the GPU type.
  virtual double predict(std::string_view gpu_type, const WorkloadProfile& online,
                         const WorkloadProfile& offline, double sm_pct) const = 0;
};

/// One table per GPU type.
class TablePredictor : public SpeedPredictor {
 public:
  void add(PredictionTable table);
  bool has(std::string_view gpu_type) const;
  const PredictionTable& table(std::string_view gpu_type) const;

  double predict(std::string_view gpu_type, const WorkloadProfile& online,
                 const WorkloadProfile& offline, double sm_pct) const override;

 private:
  std::map<std::string, PredictionTable, std::less<>> tables_;
};

}  // namespace gpushare
