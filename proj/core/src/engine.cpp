#include "mvr/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <thread>

namespace mvr {

namespace {

constexpr double kDistinctTol = 1e-9;
constexpr double kWorkspaceTol = 1e-9;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::vector<Point> sample_initial_positions(const SimConfig& cfg) {
  std::mt19937_64 rng = make_rng(cfg.seed, "init");
  const BoundingBox box = polygon_bounds(cfg.workspace);
  std::vector<Point> positions;
  positions.reserve(cfg.agent_count);
  int guard = 0;
  while (positions.size() < cfg.agent_count) {
    if (++guard > 1000000) {
      throw std::runtime_error("initial positions: rejection cap exhausted");
    }
    const Point p{box.lo.x + canonical_open(rng) * (box.hi.x - box.lo.x),
                  box.lo.y + canonical_open(rng) * (box.hi.y - box.lo.y)};
    if (!point_in_convex_polygon(p, cfg.workspace)) continue;
    bool clash = false;
    for (const Point& q : positions) {
      if (dist(p, q) < kDistinctTol) {
        clash = true;
        break;
      }
    }
    if (!clash) positions.push_back(p);
  }
  return positions;
}

}  // namespace

void SimConfig::validate() const {
  if (workspace.size() < 3 || polygon_area(workspace) <= 0.0) {
    throw std::invalid_argument("config: workspace must be a counterclockwise convex polygon");
  }
  if (lambda < 0.0) throw std::invalid_argument("config: lambda must be nonnegative");
  if (agent_count < 1) throw std::invalid_argument("config: need at least one agent");
  if (dt <= 0.0) throw std::invalid_argument("config: dt must be positive");
  if (horizon < dt) throw std::invalid_argument("config: horizon must be at least dt");
  if (warmup_fraction < 0.0 || warmup_fraction >= 1.0) {
    throw std::invalid_argument("config: warmup_fraction must be in [0, 1)");
  }
  if (integrator_budget < 2) throw std::invalid_argument("config: integrator_budget too small");
  if (!initial_positions.empty()) {
    if (initial_positions.size() != agent_count) {
      throw std::invalid_argument("config: initial_positions size differs from agent_count");
    }
    for (std::size_t i = 0; i < initial_positions.size(); ++i) {
      if (!point_in_convex_polygon(initial_positions[i], workspace, kWorkspaceTol)) {
        throw std::invalid_argument("config: initial position " + std::to_string(i) +
                                    " outside the workspace");
      }
      for (std::size_t j = i + 1; j < initial_positions.size(); ++j) {
        if (dist(initial_positions[i], initial_positions[j]) < kDistinctTol) {
          throw std::invalid_argument("config: initial positions " + std::to_string(i) +
                                      " and " + std::to_string(j) + " coincide");
        }
      }
    }
  }
  for (const Point& v : density.support()) {
    if (!point_in_convex_polygon(v, workspace, kWorkspaceTol)) {
      throw std::invalid_argument("config: density support leaves the workspace");
    }
  }
}

Simulation::Simulation(SimConfig config)
    : config_((config.validate(), std::move(config))),
      stream_(config_.lambda, config_.seed, &config_.density) {
  warmup_time_ = config_.warmup_fraction * config_.horizon;

  std::vector<Point> starts = config_.initial_positions.empty()
                                  ? sample_initial_positions(config_)
                                  : config_.initial_positions;
  agents_.resize(config_.agent_count);
  positions_.resize(config_.agent_count);
  for (std::size_t i = 0; i < config_.agent_count; ++i) {
    agents_[i].id = i;
    agents_[i].position = starts[i];
    agents_[i].reference = starts[i];  // defined pre-first-service for logging
    positions_[i] = starts[i];
  }
  goals_.resize(config_.agent_count);

  metrics_.lambda = config_.lambda;
  metrics_.horizon = config_.horizon;
  metrics_.warmup_time = warmup_time_;
  metrics_.serviced_per_agent.assign(config_.agent_count, 0);

  if (config_.metric_cadence > 0) sample_metrics();
}

std::vector<Point> Simulation::reference_points() const {
  std::vector<Point> refs(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) refs[i] = agents_[i].reference;
  return refs;
}

void Simulation::recompute_goals() {
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    goals_[i] = policy_goal(config_.policy, agents_[i], positions_, demand_points_);
  }
}

void Simulation::move_agents(double delta) {
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const GoalChoice& g = goals_[i];
    if (g.type == GoalChoice::Type::none) continue;
    const double d = dist(agents_[i].position, g.goal);
    if (d <= kDistinctTol) continue;
    const double len = std::min(delta, d);
    agents_[i].position = agents_[i].position + len * vers(g.goal - agents_[i].position);
    positions_[i] = agents_[i].position;
  }
}

void Simulation::accumulate_outstanding(double from, double to) {
  if (to <= from) return;
  const double n = static_cast<double>(demand_ids_.size());
  const double lo = std::max(from, warmup_time_);
  if (to <= lo) return;
  const double mid = 0.5 * (warmup_time_ + config_.horizon);
  const double first = std::max(0.0, std::min(to, mid) - lo);
  const double second = std::max(0.0, to - std::max(lo, mid));
  outstanding_integral_pw_first_ += n * first;
  outstanding_integral_pw_second_ += n * second;
}

void Simulation::handle_capture(std::size_t agent_index, double at) {
  const GoalChoice& g = goals_[agent_index];
  const std::size_t k = g.target_index;
  const long id = demand_ids_[k];
  TargetRecord& rec = records_[static_cast<std::size_t>(id)];
  rec.t_service = at;
  rec.agent_id = static_cast<long>(agent_index);

  // land exactly on the target; the straight-line move already got us within
  // rounding of it
  agents_[agent_index].position = rec.position;
  positions_[agent_index] = rec.position;
  record_service(agents_[agent_index], rec.position);
  metrics_.serviced_per_agent[agent_index] += 1;
  metrics_.total_serviced += 1;

  const double wait = rec.wait();
  waits_sum_all_ += wait;
  if (rec.t_arrival >= warmup_time_) {
    waits_sum_pw_ += wait;
    waits_count_pw_ += 1;
  }

  demand_ids_.erase(demand_ids_.begin() + static_cast<std::ptrdiff_t>(k));
  demand_points_.erase(demand_points_.begin() + static_cast<std::ptrdiff_t>(k));
}

void Simulation::step() {
  if (done()) return;
  const double t_end = std::min(time_ + config_.dt, config_.horizon);
  auto arrivals = stream_.sample_arrivals(time_, t_end);
  std::size_t next_arrival = 0;
  double tau = time_;
  recompute_goals();

  while (true) {
    enum class Ev { window_end, arrival, capture } ev = Ev::window_end;
    double t_next = t_end;
    if (next_arrival < arrivals.size() && arrivals[next_arrival].first < t_next) {
      t_next = arrivals[next_arrival].first;
      ev = Ev::arrival;
    }
    std::size_t capturer = 0;
    double t_cap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      if (goals_[i].type != GoalChoice::Type::target) continue;
      const double at = tau + dist(agents_[i].position, goals_[i].goal);
      if (at < t_cap) {  // strict: equal times keep the lowest agent id
        t_cap = at;
        capturer = i;
      }
    }
    if (t_cap <= t_next) {
      t_next = t_cap;
      ev = Ev::capture;
    }

    move_agents(t_next - tau);
    accumulate_outstanding(tau, t_next);
    tau = t_next;

    if (ev == Ev::window_end) break;
    if (ev == Ev::arrival) {
      TargetRecord rec;
      rec.id = static_cast<long>(records_.size());
      rec.position = arrivals[next_arrival].second;
      rec.t_arrival = tau;
      records_.push_back(rec);
      demand_ids_.push_back(rec.id);
      demand_points_.push_back(rec.position);
      metrics_.total_arrived += 1;
      ++next_arrival;
    } else {
      handle_capture(capturer, tau);
    }
    recompute_goals();
  }

  time_ = t_end;
  ++step_count_;

  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (!point_in_convex_polygon(agents_[i].position, config_.workspace, kWorkspaceTol)) {
      throw std::logic_error("engine: agent " + std::to_string(i) +
                             " left the workspace (internal error)");
    }
  }

  if (config_.metric_cadence > 0 && step_count_ % config_.metric_cadence == 0) {
    sample_metrics();
  }
}

void Simulation::sample_metrics() {
  last_metric_time_ = time_;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    metrics_.trails.push_back({time_, i, agents_[i].reference, agents_[i].position});
  }
  const std::vector<Point> refs = reference_points();
  const DensityIntegrator integrator(&config_.density, config_.integrator_budget,
                                     config_.seed ^ 0x9e3779b97f4a7c15ULL);
  metrics_.hm_values.push_back(
      {time_, multimedian_value(refs, integrator, config_.workspace).value});
  double residual = std::numeric_limits<double>::quiet_NaN();
  try {
    residual = mvt_residual(refs, integrator, config_.workspace);
  } catch (const ZeroMassCell&) {
    // all cells empty of mass: leave the sample as NaN
  }
  metrics_.mvt_residuals.push_back({time_, residual});
}

RunResult Simulation::finish() {
  if (config_.metric_cadence <= 0 || last_metric_time_ < time_) sample_metrics();

  metrics_.mean_wait_all = metrics_.total_serviced > 0
                               ? waits_sum_all_ / metrics_.total_serviced
                               : std::numeric_limits<double>::quiet_NaN();
  metrics_.post_warmup_serviced = waits_count_pw_;
  metrics_.mean_wait = waits_count_pw_ > 0
                           ? waits_sum_pw_ / waits_count_pw_
                           : std::numeric_limits<double>::quiet_NaN();
  const double window = time_ - warmup_time_;
  if (window > 0.0) {
    metrics_.avg_outstanding =
        (outstanding_integral_pw_first_ + outstanding_integral_pw_second_) / window;
    const double half = 0.5 * window;
    metrics_.avg_outstanding_first_half = outstanding_integral_pw_first_ / half;
    metrics_.avg_outstanding_second_half = outstanding_integral_pw_second_ / half;
    metrics_.unstable = metrics_.avg_outstanding_second_half >
                        2.0 * metrics_.avg_outstanding_first_half + 5.0;
  }
  if (!metrics_.hm_values.empty()) {
    metrics_.final_hm = metrics_.hm_values.back().value;
    const DensityIntegrator integrator(&config_.density, config_.integrator_budget,
                                       config_.seed ^ 0x9e3779b97f4a7c15ULL);
    metrics_.final_hm_stderr =
        multimedian_value(reference_points(), integrator, config_.workspace).stderror;
  }
  if (!metrics_.mvt_residuals.empty()) {
    metrics_.final_mvt_residual = metrics_.mvt_residuals.back().value;
  }

  RunResult result;
  result.metrics = metrics_;
  result.targets = records_;
  result.final_references = reference_points();
  return result;
}

double little_check(const RunMetrics& metrics) {
  if (metrics.post_warmup_serviced < 100) {
    throw std::runtime_error("little_check: fewer than 100 post-warm-up services");
  }
  if (!(metrics.lambda > 0.0) || !std::isfinite(metrics.mean_wait) ||
      metrics.mean_wait <= 0.0) {
    throw std::runtime_error("little_check: undefined ratio");
  }
  return metrics.avg_outstanding / (metrics.lambda * metrics.mean_wait);
}

RunResult run(const SimConfig& config) {
  Simulation sim(config);
  while (!sim.done()) sim.step();
  return sim.finish();
}

std::vector<RunResult> run_batch(const std::vector<SimConfig>& configs,
                                 unsigned max_parallel) {
  if (max_parallel == 0) {
    max_parallel = std::max(1u, std::thread::hardware_concurrency());
  }
  std::vector<RunResult> results(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= configs.size()) return;
      try {
        results[i] = run(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<unsigned>(max_parallel, static_cast<unsigned>(configs.size()));
  pool.reserve(n);
  for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

void write_targets_csv(std::ostream& out, const std::vector<TargetRecord>& targets) {
  out << "target_id,t_arrival,t_service,agent_id,wait\n";
  for (const TargetRecord& t : targets) {
    out << t.id << ',' << fmt(t.t_arrival) << ',';
    if (t.serviced()) {
      out << fmt(t.t_service) << ',' << t.agent_id << ',' << fmt(t.wait());
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

void write_trails_csv(std::ostream& out, const std::vector<TrailSample>& trails) {
  out << "t,agent_id,ref_x,ref_y,pos_x,pos_y\n";
  for (const TrailSample& s : trails) {
    out << fmt(s.t) << ',' << s.agent_id << ',' << fmt(s.reference.x) << ','
        << fmt(s.reference.y) << ',' << fmt(s.position.x) << ',' << fmt(s.position.y)
        << '\n';
  }
}

void write_summary(std::ostream& out, const SimConfig& config, const RunMetrics& metrics) {
  out << "policy = " << (config.policy == PolicyKind::no_comm ? "nc" : "sb") << '\n';
  out << "lambda = " << fmt(config.lambda) << '\n';
  out << "agents = " << config.agent_count << '\n';
  out << "seed = " << config.seed << '\n';
  out << "dt = " << fmt(config.dt) << '\n';
  out << "horizon = " << fmt(config.horizon) << '\n';
  out << "warmup_time = " << fmt(metrics.warmup_time) << '\n';
  out << "total_arrived = " << metrics.total_arrived << '\n';
  out << "total_serviced = " << metrics.total_serviced << '\n';
  out << "post_warmup_serviced = " << metrics.post_warmup_serviced << '\n';
  out << "mean_wait = " << fmt(metrics.mean_wait) << '\n';
  out << "mean_wait_all = " << fmt(metrics.mean_wait_all) << '\n';
  out << "avg_outstanding = " << fmt(metrics.avg_outstanding) << '\n';
  double ratio = std::numeric_limits<double>::quiet_NaN();
  try {
    ratio = little_check(metrics);
  } catch (const std::runtime_error&) {
  }
  out << "little_ratio = " << fmt(ratio) << '\n';
  out << "unstable = " << (metrics.unstable ? 1 : 0) << '\n';
  out << "serviced_per_agent =";
  for (long c : metrics.serviced_per_agent) out << ' ' << c;
  out << '\n';
  out << "final_hm = " << fmt(metrics.final_hm) << '\n';
  out << "final_hm_stderr = " << fmt(metrics.final_hm_stderr) << '\n';
  out << "final_mvt_residual = " << fmt(metrics.final_mvt_residual) << '\n';
}

}  // namespace mvr
