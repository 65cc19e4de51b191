// Domain types shared by every module: workload profiles, the two workload
// classes, the cluster trace, and trace (de)serialization.
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace gpushare {

/// Every document this project reads or writes keeps field order.
using Json = nlohmann::ordered_json;

/// Malformed input document (bad JSON, wrong field types, unreadable file).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Exec { serial, parallel };

/// Resource signature of a workload when it runs alone on a GPU.
struct WorkloadProfile {
  double sm_activity = 0.0;
  double gpu_utilization = 0.0;
  double sm_occupancy = 0.0;
  double iter_time_separate = 1.0;  // seconds
  double mem_fraction = 0.0;

  bool operator==(const WorkloadProfile&) const = default;
};

void validate_profile(const WorkloadProfile& p, std::string_view context);

struct QpsProfile {
  double qps = 0.0;
  WorkloadProfile profile;

  bool operator==(const QpsProfile&) const = default;
};

struct QpsSample {
  double t = 0.0;  // seconds since trace start
  double qps = 0.0;

  bool operator==(const QpsSample&) const = default;
};

/// Latency-critical inference service pinned to one GPU.
struct OnlineWorkload {
  std::string id;
  std::string gpu_id;
  double base_latency = 0.0;  // seconds
  double latency_slo = 0.0;   // seconds
  std::vector<QpsSample> qps_series;  // strictly increasing timestamps
  std::vector<QpsProfile> profiles;   // strictly increasing qps

  /// Profile of the knot at or below `qps`; the first knot below the range.
  const WorkloadProfile& profile_for_qps(double qps) const;
  /// Index into qps_series of the sample in effect at `t` (step function).
  std::size_t qps_index_at(double t) const;

  bool operator==(const OnlineWorkload&) const = default;
};

/// Best-effort job (training, batch inference).
struct OfflineWorkload {
  std::string id;
  double submit_time = 0.0;    // seconds
  double work_separate = 0.0;  // exclusive execution time, seconds
  WorkloadProfile profile;

  bool operator==(const OfflineWorkload&) const = default;
};

struct GpuDescriptor {
  std::string id;
  std::string gpu_type;
  std::optional<std::string> online_id;  // derived from OnlineWorkload::gpu_id

  bool operator==(const GpuDescriptor&) const = default;
};

struct ClusterTrace {
  std::vector<GpuDescriptor> gpus;
  std::vector<OnlineWorkload> online;
  std::vector<OfflineWorkload> offline;
  double horizon = 0.0;  // seconds

  bool operator==(const ClusterTrace&) const = default;
};

/// Checks every trace invariant and fills GpuDescriptor::online_id.
/// Throws ValidationError naming the offending record.
void validate_trace(ClusterTrace& trace);

ClusterTrace trace_from_json(const Json& doc);
Json trace_to_json(const ClusterTrace& trace);

WorkloadProfile profile_from_json(const Json& j, std::string_view context);
Json profile_to_json(const WorkloadProfile& p);
OnlineWorkload online_from_json(const Json& j);
Json online_to_json(const OnlineWorkload& w);
OfflineWorkload offline_from_json(const Json& j);
Json offline_to_json(const OfflineWorkload& w);

ClusterTrace load_trace(const std::filesystem::path& path);
void save_trace(const ClusterTrace& trace, const std::filesystem::path& path);

/// Step-interpolated profile in effect at `t`. Throws ValidationError when
/// t lies outside [0, horizon].
const WorkloadProfile& profile_at(const OnlineWorkload& w, double t, double horizon);

// JSON helpers shared by the other modules' parsers.
Json read_json_file(const std::filesystem::path& path, std::string_view what);
void write_text_file(const std::filesystem::path& path, const std::string& text);
double get_number(const Json& j, std::string_view key, std::string_view context);
std::string get_string(const Json& j, std::string_view key, std::string_view context);
const Json& get_array(const Json& j, std::string_view key, std::string_view context);

}  // namespace gpushare
