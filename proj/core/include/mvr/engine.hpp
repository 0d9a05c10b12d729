#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <vector>

#include "mvr/geometry.hpp"
#include "mvr/partition.hpp"
#include "mvr/policy.hpp"
#include "mvr/process.hpp"

namespace mvr {

struct SimConfig {
  Polygon workspace = make_rect({0.0, 0.0}, {1.0, 1.0});
  SpatialDensity density = SpatialDensity::uniform(make_rect({0.0, 0.0}, {1.0, 1.0}));
  double lambda = 0.5;
  std::size_t agent_count = 1;
  // Explicit starting positions; empty means seeded random general position.
  std::vector<Point> initial_positions;
  PolicyKind policy = PolicyKind::no_comm;
  double dt = 0.01;
  double horizon = 1000.0;
  std::uint64_t seed = 1;
  // Steps between trail samples and H_m / MVT-residual evaluations;
  // 0 disables periodic sampling (final values are always computed).
  long metric_cadence = 100000;
  int integrator_budget = 200000;
  double warmup_fraction = 0.1;  // excluded from steady-state statistics

  void validate() const;  // throws std::invalid_argument with the reason
};

struct TargetRecord {
  long id = -1;
  Point position;
  double t_arrival = 0.0;
  double t_service = std::numeric_limits<double>::quiet_NaN();
  long agent_id = -1;  // -1 while outstanding
  bool serviced() const { return agent_id >= 0; }
  double wait() const { return t_service - t_arrival; }
};

struct MetricSample {
  double t = 0.0;
  double value = 0.0;
};

struct TrailSample {
  double t = 0.0;
  std::size_t agent_id = 0;
  Point reference;
  Point position;
};

struct RunMetrics {
  double lambda = 0.0;
  double horizon = 0.0;
  double warmup_time = 0.0;
  long total_arrived = 0;
  long total_serviced = 0;
  long post_warmup_serviced = 0;
  // Mean wait over targets arriving after warm-up and serviced by the horizon.
  double mean_wait = std::numeric_limits<double>::quiet_NaN();
  double mean_wait_all = std::numeric_limits<double>::quiet_NaN();
  // Time-average outstanding count over the post-warm-up window, plus the
  // two half-window averages backing the stability flag.
  double avg_outstanding = std::numeric_limits<double>::quiet_NaN();
  double avg_outstanding_first_half = 0.0;
  double avg_outstanding_second_half = 0.0;
  bool unstable = false;
  std::vector<long> serviced_per_agent;
  std::vector<TrailSample> trails;
  std::vector<MetricSample> hm_values;      // H_m at the reference points
  std::vector<MetricSample> mvt_residuals;  // MVT residual of the reference points
  double final_hm = std::numeric_limits<double>::quiet_NaN();
  double final_hm_stderr = std::numeric_limits<double>::quiet_NaN();
  double final_mvt_residual = std::numeric_limits<double>::quiet_NaN();
};

// n-bar / (lambda * mean wait); ~1 for a stable run past its transient.
// Requires at least 100 post-warm-up services, else throws std::runtime_error.
double little_check(const RunMetrics& metrics);

struct RunResult {
  RunMetrics metrics;
  std::vector<TargetRecord> targets;
  std::vector<Point> final_references;
};

// Fixed-step loop with exact intra-step event handling: arrivals are
// inserted at their exact timestamps, capture times are computed from
// distances (unit speed), and every agent re-decides at each event instant.
class Simulation {
 public:
  explicit Simulation(SimConfig config);

  void step();  // advance one decision interval (clipped to the horizon)
  bool done() const { return time_ >= config_.horizon; }
  RunResult finish();

  double time() const { return time_; }
  long steps_taken() const { return step_count_; }
  const SimConfig& config() const { return config_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  const std::vector<TargetRecord>& targets() const { return records_; }
  std::size_t demand_size() const { return demand_ids_.size(); }

 private:
  void recompute_goals();
  void move_agents(double delta);
  void accumulate_outstanding(double from, double to);
  void handle_capture(std::size_t agent_index, double at);
  void sample_metrics();
  std::vector<Point> reference_points() const;

  SimConfig config_;
  ArrivalStream stream_;
  std::vector<AgentState> agents_;
  std::vector<Point> positions_;  // cached copies of agent positions
  std::vector<GoalChoice> goals_;
  std::vector<TargetRecord> records_;
  std::vector<long> demand_ids_;     // ascending target ids
  std::vector<Point> demand_points_;
  double time_ = 0.0;
  long step_count_ = 0;

  double warmup_time_ = 0.0;
  double waits_sum_all_ = 0.0;
  double waits_sum_pw_ = 0.0;
  long waits_count_pw_ = 0;
  double outstanding_integral_pw_first_ = 0.0;
  double outstanding_integral_pw_second_ = 0.0;
  RunMetrics metrics_;
  double last_metric_time_ = -1.0;
};

RunResult run(const SimConfig& config);

// Runs independent configurations in parallel worker threads (0 workers
// means hardware concurrency); results come back in input order. Each run
// is single-threaded, so batching never perturbs determinism.
std::vector<RunResult> run_batch(const std::vector<SimConfig>& configs,
                                 unsigned max_parallel = 0);

// Output schemas (fixed):
//   targets: target_id,t_arrival,t_service,agent_id,wait
//   trails:  t,agent_id,ref_x,ref_y,pos_x,pos_y
//   summary: line-oriented `key = value`
void write_targets_csv(std::ostream& out, const std::vector<TargetRecord>& targets);
void write_trails_csv(std::ostream& out, const std::vector<TrailSample>& trails);
void write_summary(std::ostream& out, const SimConfig& config, const RunMetrics& metrics);

}  // namespace mvr
