#pragma once

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mvr/engine.hpp"

namespace mvr {

// Line-oriented `key = value` scenario document. Unknown keys are rejected;
// parse errors carry the offending line number.
//
// Required keys: workspace, density, lambda, agents, horizon, out, and
// policy (unless sweep_policies is given). Optional: support, dt, seed,
// seeds, metric_cadence, integrator_budget, initial_positions, sweep_lambda,
// sweep_policies. `#` starts a comment.
struct Scenario {
  SimConfig base;
  std::vector<std::uint64_t> seeds;  // repeat-seed list; defaults to {base.seed}
  std::string out_dir;
  std::string name;  // stem used for output file names
  std::vector<double> sweep_lambdas;
  std::vector<PolicyKind> sweep_policies;
  bool policy_given = false;

  bool has_sweep() const { return !sweep_lambdas.empty() || !sweep_policies.empty(); }
};

struct ScenarioParseError : std::runtime_error {
  explicit ScenarioParseError(const std::string& what, int line_number = 0)
      : std::runtime_error(what), line(line_number) {}
  int line = 0;
};

// base_dir anchors relative grid-density paths (empty = current directory).
Scenario parse_scenario_text(std::string_view text, const std::string& name = "scenario",
                             const std::string& base_dir = "");
Scenario parse_scenario_file(const std::string& path);

// Command-line overrides; any field left unset keeps the file's value.
struct ScenarioOverrides {
  bool has_seed = false;
  std::uint64_t seed = 0;
  bool has_policy = false;
  PolicyKind policy = PolicyKind::no_comm;
  bool has_lambda = false;
  double lambda = 0.0;
  bool has_agents = false;
  std::size_t agents = 0;
  bool has_horizon = false;
  double horizon = 0.0;
  bool has_dt = false;
  double dt = 0.0;
  bool has_out = false;
  std::string out;
};

void apply_overrides(Scenario& scenario, const ScenarioOverrides& overrides);

// Executes the scenario once per seed (seeds run in parallel), writing
//   <out>/<name>_seed<seed>_targets.csv
//   <out>/<name>_seed<seed>_trails.csv
//   <out>/<name>_seed<seed>_summary.txt
// and printing each summary to `log` in seed order. Returns 0 on success,
// 1 on runtime failure.
int run_scenario(const Scenario& scenario, std::ostream& log);

// Executes the (lambda x policy x seed) grid plus the single-vehicle
// baseline (policy column `single`), writing <out>/sweep.csv with columns
//   lambda,policy,seed,mean_wait,little_ratio,hm_final,mvt_residual
// sorted by (lambda, policy, seed). Returns 0 on success, 1 on runtime
// failure. A scenario without a sweep clause is a usage error: throws
// ScenarioParseError.
int run_sweep(const Scenario& scenario, std::ostream& log);

}  // namespace mvr
