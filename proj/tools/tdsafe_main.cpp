#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tdsafe/config.hpp"
#include "tdsafe/lyapunov.hpp"
#include "tdsafe/selftest.hpp"

namespace fs = std::filesystem;
using namespace tdsafe;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSafety = 2;
constexpr int kExitNumeric = 3;

struct RunRequest {
  std::optional<std::string> config_path;
  std::optional<std::string> scenario;
  std::optional<std::string> fig;
  std::vector<std::string> overrides;
  std::optional<std::string> out_dir;
};

ConfigDoc assemble_doc(const RunRequest& req) {
  ConfigDoc doc;
  if (req.config_path) doc = ConfigDoc::parse_file(*req.config_path);
  if (req.scenario) doc.set("", "scenario", *req.scenario);
  if (req.fig) {
    for (const auto& [section, key, value] : figure_preset(*req.fig).flatten()) {
      doc.set(section, key, value);
    }
  }
  for (const auto& assignment : req.overrides) apply_override(doc, assignment);
  if (req.out_dir) doc.set("output", "directory", *req.out_dir);
  return doc;
}

void write_csv(const fs::path& path, const Trajectory& traj) {
  std::ofstream out(path);
  out.precision(15);
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  const int m = traj.inputs.empty() ? 0 : static_cast<int>(traj.inputs.front().size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  for (int i = 1; i <= m; ++i) out << ",u_" << i;
  for (const auto& name : traj.channel_names) out << "," << name;
  out << "\n";
  for (size_t row = 0; row < traj.size(); ++row) {
    out << traj.times[row];
    for (int i = 0; i < n; ++i) out << "," << traj.states[row](i);
    for (int i = 0; i < m; ++i) out << "," << traj.inputs[row](i);
    for (const auto& series : traj.channels) out << "," << series[row];
    out << "\n";
  }
}

struct RunOutcome {
  int exit_code = kExitOk;
  Trajectory trajectory;
  MetricsSummary summary;
};

BuiltScenario build_from_config(const ScenarioConfig& config) {
  if (config.scenario == "ccc") return build_ccc(std::get<CccParams>(config.params));
  if (config.scenario == "master_slave") {
    return build_master_slave(std::get<MasterSlaveParams>(config.params));
  }
  // Custom scalar benchmark under the universal controller.
  const auto& bench = *config.custom;
  BuiltScenario built;
  built.sys.n = 1;
  built.sys.m = 1;
  built.sys.delay_bound = bench.tau;
  built.sys.drift = [bench](const HistorySegment& seg) {
    return Eigen::VectorXd(bench.a * seg.eval(-bench.tau) + bench.b * seg.current());
  };
  built.sys.input_map = [](const HistorySegment&) { return Eigen::MatrixXd::Ones(1, 1); };
  auto cert = RazumikhinCertificate::steepest_descent(
      [](const Eigen::VectorXd& x) { return x(0) * x(0); },
      [](const Eigen::VectorXd& x) { return Eigen::VectorXd(2.0 * x); },
      ComparisonFunction::power(0.5, 2.0), ComparisonFunction::power(2.0, 2.0),
      ComparisonFunction::linear(bench.gamma), ComparisonFunction::linear(bench.eta));
  built.controller = [cert, sys = built.sys, lambda = bench.lambda](const HistorySegment& seg) {
    return universal_controller(cert, lambda, sys, seg);
  };
  built.initial = HistorySegment(bench.tau, Eigen::VectorXd::Constant(1, bench.xi));
  built.dt = bench.dt;
  built.tf = bench.tf;
  built.diagnostics = std::make_shared<RunDiagnostics>();
  built.channels = {
      {"V", [cert](const HistorySegment& seg, const Eigen::VectorXd&) {
         return cert.value(seg.current());
       }},
  };
  return built;
}

void write_outputs(const ScenarioConfig& config, const RunOutcome& outcome,
                   const BuiltScenario& built) {
  const fs::path dir(config.output_directory);
  fs::create_directories(dir);
  write_csv(dir / "trajectory.csv", outcome.trajectory);

  std::ofstream summary(dir / "summary.txt");
  summary.precision(15);
  summary << "scenario = " << config.scenario << "\n";
  summary << "exit_code = " << outcome.exit_code << "\n";
  summary << "aborted = " << (outcome.trajectory.aborted ? 1 : 0) << "\n";
  if (outcome.trajectory.aborted) summary << "abort_time = " << outcome.trajectory.abort_time << "\n";
  for (const auto& [name, min_h] : outcome.summary.min_h) {
    summary << "min_" << name << " = " << min_h << "\n";
  }
  if (outcome.summary.settle_time) {
    summary << "settle_time = " << *outcome.summary.settle_time << "\n";
  } else {
    summary << "settle_time = none\n";
  }
  summary << "band_residence = " << outcome.summary.band_residence << "\n";
  summary << "chattering_index = " << outcome.summary.chattering_index << "\n";
  summary << "v_initial = " << outcome.summary.v_initial << "\n";
  summary << "v_final = " << outcome.summary.v_final << "\n";
  if (built.diagnostics) {
    summary << "input_clamps = " << built.diagnostics->input_clamps.load() << "\n";
    summary << "barrier_floor_hits = " << built.diagnostics->barrier_floor_hits.load() << "\n";
    summary << "transversality_clamps = " << built.diagnostics->transversality_clamps.load()
            << "\n";
  }

  std::ofstream resolved(dir / "config.resolved");
  resolved << to_config(config).serialize();
}

int run_one(const RunRequest& req, bool quiet = false) {
  ScenarioConfig config;
  try {
    config = resolve_config(assemble_doc(req));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    const BuiltScenario built = build_from_config(config);
    RunOutcome outcome;
    outcome.trajectory = run_scenario(built);
    outcome.summary = metrics(outcome.trajectory, config.metrics_config, built.safety_channels);
    if (outcome.trajectory.aborted) {
      outcome.exit_code = kExitNumeric;
    } else {
      for (const auto& [name, min_h] : outcome.summary.min_h) {
        if (min_h <= 0.0) outcome.exit_code = kExitSafety;
      }
    }
    write_outputs(config, outcome, built);
    if (!quiet) {
      std::cout << "wrote " << config.output_directory << "/trajectory.csv ("
                << outcome.trajectory.size() << " rows)\n";
      if (outcome.exit_code == kExitSafety) std::cout << "safety violation detected\n";
      if (outcome.exit_code == kExitNumeric) std::cout << "integration aborted\n";
    }
    return outcome.exit_code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}

void print_suite(const SuiteResult& suite) {
  for (const auto& check : suite.checks) {
    std::cout << suite.suite << "." << check.name << " "
              << (check.pass ? "PASS" : "FAIL") << " measured=" << check.measured
              << " threshold=" << check.threshold;
    if (!check.detail.empty()) std::cout << " # " << check.detail;
    std::cout << "\n";
  }
  std::cout << suite.suite << ".elapsed_s " << suite.seconds << "\n";
}

int run_selftest(const std::string& which) {
  const std::uint64_t seed = seed_from_env();
  std::vector<SuiteResult> suites;
  if (which == "algebra") {
    suites.push_back(suite_projection_algebra(seed));
  } else if (which == "reaching") {
    suites.push_back(suite_reaching());
  } else if (which == "oracle") {
    suites.push_back(suite_comparison_oracle(seed));
  } else if (which == "scp") {
    suites.push_back(suite_admissibility(seed));
    suites.push_back(suite_scp(seed));
  } else if (which == "all") {
    suites.push_back(suite_projection_algebra(seed));
    suites.push_back(suite_reaching());
    suites.push_back(suite_comparison_oracle(seed));
    suites.push_back(suite_admissibility(seed));
    suites.push_back(suite_scp(seed));
  } else {
    std::cerr << "error: unknown selftest suite '" << which << "'\n";
    return kExitConfig;
  }
  int failed = 0;
  for (const auto& suite : suites) {
    print_suite(suite);
    for (const auto& check : suite.checks) failed += check.pass ? 0 : 1;
  }
  std::cout << (failed == 0 ? "all checks passed" : "checks failed: " + std::to_string(failed))
            << "\n";
  return failed == 0 ? kExitOk : kExitNumeric;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe stabilization toolbox for control-affine time-delay systems"};
  app.require_subcommand(1);

  RunRequest run_req;
  auto* run = app.add_subcommand("run", "Run one scenario and write trajectory/summary files");
  std::string run_config;
  run->add_option("config", run_config, "Configuration file");
  std::string run_scenario_name, run_fig, run_out;
  run->add_option("--scenario", run_scenario_name, "Scenario name (ccc, master_slave, custom)");
  run->add_option("--fig", run_fig, "Figure preset (1a, 1c, 2a, 2c, 3)");
  run->add_option("--set", run_req.overrides, "Override entries as section.key=value");
  run->add_option("--out", run_out, "Output directory");

  auto* validate = app.add_subcommand("validate", "Parse and validate a configuration");
  std::string validate_config;
  validate->add_option("config", validate_config, "Configuration file")->required();

  auto* sweep = app.add_subcommand("sweep", "Run several configurations concurrently");
  std::vector<std::string> sweep_configs;
  sweep->add_option("configs", sweep_configs, "Configuration files")->required();

  auto* selftest = app.add_subcommand("selftest", "Run a property suite");
  std::string suite_name = "all";
  selftest->add_option("suite", suite_name, "algebra | reaching | oracle | scp | all");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    if (!run_config.empty()) run_req.config_path = run_config;
    if (!run_scenario_name.empty()) run_req.scenario = run_scenario_name;
    if (!run_fig.empty()) run_req.fig = run_fig;
    if (!run_out.empty()) run_req.out_dir = run_out;
    return run_one(run_req);
  }
  if (validate->parsed()) {
    try {
      resolve_config(ConfigDoc::parse_file(validate_config));
      std::cout << "ok\n";
      return kExitOk;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitConfig;
    }
  }
  if (sweep->parsed()) {
    std::vector<std::future<int>> jobs;
    for (size_t i = 0; i < sweep_configs.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, [&sweep_configs, i]() {
        RunRequest req;
        req.config_path = sweep_configs[i];
        return run_one(req, /*quiet=*/true);
      }));
    }
    int worst = kExitOk;
    for (size_t i = 0; i < jobs.size(); ++i) {
      const int code = jobs[i].get();
      std::cout << sweep_configs[i] << " -> exit " << code << "\n";
      worst = std::max(worst, code);
    }
    return worst;
  }
  if (selftest->parsed()) return run_selftest(suite_name);
  return kExitConfig;
}
