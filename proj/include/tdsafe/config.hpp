#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "tdsafe/scenarios.hpp"

namespace tdsafe {

/// Line-oriented configuration document: `key = value` entries grouped
/// under `[section]` headers, `#` comments, insertion order preserved.
class ConfigDoc {
 public:
  void set(const std::string& section, const std::string& key, const std::string& value);
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;
  /// All entries as (section, key, value), in order; used to overlay docs.
  std::vector<std::tuple<std::string, std::string, std::string>> flatten() const;

  static ConfigDoc parse(const std::string& text);  // throws with line diagnostics
  static ConfigDoc parse_file(const std::string& path);
  std::string serialize() const;

 private:
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;
  };
  std::vector<Section> sections_;
  Section& section(const std::string& name);
};

/// A fully resolved run request: which scenario plus its parameters.
struct ScenarioConfig {
  std::string scenario;  // ccc | master_slave | custom
  std::variant<CccParams, MasterSlaveParams> params;
  std::string output_directory = "out";
  MetricsConfig metrics_config;

  // Custom benchmark (scalar delayed integrator under the universal
  // controller): xdot = a x(t - tau) + b x + u, V = x^2.
  struct CustomBenchmark {
    double a = 1.0, b = 0.0, tau = 1.0;
    double gamma = 1.0, eta = 0.5, lambda = 1.0;
    double xi = 1.0;
    double dt = 1e-3, tf = 10.0;
  };
  std::optional<CustomBenchmark> custom;
};

/// Parses and validates a configuration document into a run request.
/// Unknown keys, bad numbers, and numerics violations (dt not dividing a
/// delay, tf < dt) are reported with section.key diagnostics.
ScenarioConfig resolve_config(const ConfigDoc& doc);

/// Emits the full effective configuration; parsing it back yields an
/// identical run.
ConfigDoc to_config(const ScenarioConfig& config);

/// Named parameter bundles reproducing the reference experiments
/// (1a/1b, 1c/1d, 2a/2b, 2c/2d, and 3).
ConfigDoc figure_preset(const std::string& fig);

/// Applies a `section.key=value` override string to a document.
void apply_override(ConfigDoc& doc, const std::string& assignment);

}  // namespace tdsafe
