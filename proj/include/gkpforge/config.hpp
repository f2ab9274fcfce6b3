#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "gkpforge/metrics.hpp"

namespace gkpforge {

using json = nlohmann::json;

inline constexpr const char* kConfigSchema = "gkpforge.protocol/1";
inline constexpr const char* kReportSchema = "gkpforge.report/1";
inline constexpr const char* kSweepSchema = "gkpforge.sweep/1";
inline constexpr const char* kVersion = "0.1.0";

/// A validated configuration document. `document` is the canonical input
/// (defaults filled in, couplings as {"re", "im"}); `protocol` is what runs.
struct RunConfig {
  json document;
  Protocol protocol;
  std::uint64_t seed = 0;
  /// Optional robustness evaluation: {"delta_g", "samples"}.
  json jitter;
};

/// Closed schema: unknown keys anywhere throw ConfigError naming the path.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::string& path);

/// Preset document, e.g. ("table1", {{"row", 5}, {"size", 3}}),
/// ("cat", {{"N", 2}, {"g", 1.2533}, {"k", 0}}), ("bell", {{"residue", 0}}).
json preset_document(const std::string& name, const json& args);

/// "table1-row5", "cat", "bell" plus the size-like CLI arguments.
struct PresetArgs {
  int m = 1;
  int N = 2;
  double g = 0.0;
  bool has_g = false;
  int k = 0;
  double db = 10.0;
};
json preset_from_cli(const std::string& preset, const PresetArgs& args);

struct PresetInfo {
  std::string name;
  std::string description;
};
std::vector<PresetInfo> preset_list();

json protocol_to_json(const Protocol& p);
json physics_defaults(const Protocol& p);
json metrics_to_json(const MetricsBundle& m);

/// Run report without timing; the caller adds "timing" separately so the
/// rest is reproducible byte for byte.
json run_report(const RunConfig& config, const Outcome& outcome, const MetricsBundle& metrics);
json error_report(const std::string& error_class, const std::string& message);

/// Replaces the value at a JSON pointer ("/preset/size") or alias
/// ("size", "r", "sigma", "delta", "cutoff") in a config document.
json with_parameter(const json& doc, const std::string& axis, double value);
/// "1,2,3" or "start:stop:step" (inclusive).
std::vector<double> parse_axis_values(const std::string& spec);

}  // namespace gkpforge
