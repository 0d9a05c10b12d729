#include "mvr/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace mvr {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct RawEntry {
  std::string value;
  int line = 0;
};

const char* const kKnownKeys[] = {
    "workspace", "support",  "density",        "lambda",
    "agents",    "policy",   "dt",             "horizon",
    "seed",      "seeds",    "metric_cadence", "integrator_budget",
    "initial_positions",     "out",            "sweep_lambda",
    "sweep_policies",
};

bool known_key(const std::string& key) {
  for (const char* k : kKnownKeys) {
    if (key == k) return true;
  }
  return false;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const std::string& key, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ScenarioParseError("key '" + key + "': expected a number, got '" + text +
                                 "' (line " + std::to_string(line) + ")",
                             line);
  }
  if (used != text.size() || !std::isfinite(v)) {
    throw ScenarioParseError("key '" + key + "': expected a number, got '" + text +
                                 "' (line " + std::to_string(line) + ")",
                             line);
  }
  return v;
}

long parse_long(const std::string& text, const std::string& key, int line) {
  const double v = parse_double(text, key, line);
  const long n = static_cast<long>(v);
  if (static_cast<double>(n) != v) {
    throw ScenarioParseError("key '" + key + "': expected an integer (line " +
                                 std::to_string(line) + ")",
                             line);
  }
  return n;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

std::vector<double> parse_number_list(const std::string& text, const std::string& key,
                                      int line) {
  std::vector<double> out;
  for (const std::string& tok : split(text, ',')) {
    out.push_back(parse_double(tok, key, line));
  }
  return out;
}

PolicyKind parse_policy(const std::string& text, int line) {
  if (text == "nc") return PolicyKind::no_comm;
  if (text == "sb") return PolicyKind::sensor_based;
  throw ScenarioParseError("policy must be 'nc' or 'sb', got '" + text + "' (line " +
                               std::to_string(line) + ")",
                           line);
}

Polygon parse_region(const std::string& text, const std::string& key, int line) {
  std::istringstream in(text);
  std::string shape;
  in >> shape;
  std::vector<double> nums;
  double v;
  while (in >> v) nums.push_back(v);
  if (!in.eof()) {
    throw ScenarioParseError("key '" + key + "': non-numeric coordinate (line " +
                                 std::to_string(line) + ")",
                             line);
  }
  if (shape == "rect") {
    if (nums.size() != 4 || nums[2] <= nums[0] || nums[3] <= nums[1]) {
      throw ScenarioParseError("key '" + key + "': rect needs 'x0 y0 x1 y1' with x0<x1, y0<y1 (line " +
                                   std::to_string(line) + ")",
                               line);
    }
    return make_rect({nums[0], nums[1]}, {nums[2], nums[3]});
  }
  if (shape == "polygon") {
    if (nums.size() < 6 || nums.size() % 2 != 0) {
      throw ScenarioParseError("key '" + key + "': polygon needs at least 3 'x y' pairs (line " +
                                   std::to_string(line) + ")",
                               line);
    }
    Polygon poly;
    for (std::size_t i = 0; i < nums.size(); i += 2) poly.push_back({nums[i], nums[i + 1]});
    return poly;
  }
  throw ScenarioParseError("key '" + key + "': unknown region shape '" + shape +
                               "' (line " + std::to_string(line) + ")",
                           line);
}

std::string run_tag(const Scenario& sc, std::uint64_t seed) {
  return sc.name + "_seed" + std::to_string(seed);
}

void write_run_outputs(const Scenario& sc, const SimConfig& cfg, const RunResult& result) {
  fs::create_directories(sc.out_dir);
  const std::string stem = (fs::path(sc.out_dir) / run_tag(sc, cfg.seed)).string();
  {
    std::ofstream out(stem + "_targets.csv");
    if (!out) throw std::runtime_error("cannot write " + stem + "_targets.csv");
    write_targets_csv(out, result.targets);
  }
  {
    std::ofstream out(stem + "_trails.csv");
    if (!out) throw std::runtime_error("cannot write " + stem + "_trails.csv");
    write_trails_csv(out, result.metrics.trails);
  }
  {
    std::ofstream out(stem + "_summary.txt");
    if (!out) throw std::runtime_error("cannot write " + stem + "_summary.txt");
    write_summary(out, cfg, result.metrics);
  }
}

}  // namespace

Scenario parse_scenario_text(std::string_view text, const std::string& name,
                             const std::string& base_dir) {
  std::map<std::string, RawEntry> entries;
  {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ScenarioParseError("expected 'key = value' (line " + std::to_string(line_no) + ")",
                                 line_no);
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (!known_key(key)) {
        throw ScenarioParseError("unknown key '" + key + "' (line " + std::to_string(line_no) + ")",
                                 line_no);
      }
      if (entries.count(key)) {
        throw ScenarioParseError("duplicate key '" + key + "' (line " + std::to_string(line_no) +
                                     ", first at line " + std::to_string(entries[key].line) + ")",
                                 line_no);
      }
      entries[key] = {value, line_no};
    }
  }

  auto required = [&](const std::string& key) -> const RawEntry& {
    const auto it = entries.find(key);
    if (it == entries.end()) {
      throw ScenarioParseError("missing required key: " + key);
    }
    return it->second;
  };
  auto optional = [&](const std::string& key) -> const RawEntry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };

  Scenario sc;
  sc.name = name;
  sc.base.workspace = parse_region(required("workspace").value, "workspace",
                                   required("workspace").line);
  Polygon support = sc.base.workspace;
  if (const RawEntry* e = optional("support")) {
    support = parse_region(e->value, "support", e->line);
  }

  {
    const RawEntry& e = required("density");
    std::istringstream in(e.value);
    std::string kind;
    in >> kind;
    if (kind == "uniform") {
      sc.base.density = SpatialDensity::uniform(support);
    } else if (kind == "normal") {
      double cx, cy, sigma;
      if (!(in >> cx >> cy >> sigma)) {
        throw ScenarioParseError("density normal needs 'normal CX CY SIGMA' (line " +
                                     std::to_string(e.line) + ")",
                                 e.line);
      }
      sc.base.density = SpatialDensity::truncated_normal({cx, cy}, sigma, support);
    } else if (kind == "grid") {
      std::string path;
      in >> path;
      if (path.empty()) {
        throw ScenarioParseError("density grid needs a file path (line " +
                                     std::to_string(e.line) + ")",
                                 e.line);
      }
      fs::path raster_path(path);
      if (raster_path.is_relative() && !base_dir.empty()) {
        raster_path = fs::path(base_dir) / raster_path;
      }
      sc.base.density = SpatialDensity::grid(load_density_raster(raster_path.string()));
    } else {
      throw ScenarioParseError("unknown density kind '" + kind + "' (line " +
                                   std::to_string(e.line) + ")",
                               e.line);
    }
  }

  if (const RawEntry* e = optional("sweep_lambda")) {
    sc.sweep_lambdas = parse_number_list(e->value, "sweep_lambda", e->line);
    if (sc.sweep_lambdas.empty()) {
      throw ScenarioParseError("sweep_lambda: empty list (line " + std::to_string(e->line) + ")",
                               e->line);
    }
    for (double l : sc.sweep_lambdas) {
      if (l < 0.0) {
        throw ScenarioParseError("sweep_lambda: negative rate (line " + std::to_string(e->line) + ")",
                                 e->line);
      }
    }
  }
  if (const RawEntry* e = optional("sweep_policies")) {
    for (const std::string& tok : split(e->value, ',')) {
      sc.sweep_policies.push_back(parse_policy(tok, e->line));
    }
    if (sc.sweep_policies.empty()) {
      throw ScenarioParseError("sweep_policies: empty list (line " + std::to_string(e->line) + ")",
                               e->line);
    }
  }

  if (sc.sweep_lambdas.empty()) {
    const RawEntry& e = required("lambda");
    sc.base.lambda = parse_double(e.value, "lambda", e.line);
  } else if (const RawEntry* e = optional("lambda")) {
    sc.base.lambda = parse_double(e->value, "lambda", e->line);
  } else {
    sc.base.lambda = sc.sweep_lambdas.front();
  }
  if (sc.base.lambda < 0.0) {
    throw ScenarioParseError("lambda must be nonnegative (line " +
                                 std::to_string(required("lambda").line) + ")",
                             required("lambda").line);
  }

  {
    const RawEntry& e = required("agents");
    const long n = parse_long(e.value, "agents", e.line);
    if (n < 1) {
      throw ScenarioParseError("agents must be >= 1 (line " + std::to_string(e.line) + ")",
                               e.line);
    }
    sc.base.agent_count = static_cast<std::size_t>(n);
  }

  if (const RawEntry* e = optional("policy")) {
    sc.base.policy = parse_policy(e->value, e->line);
    sc.policy_given = true;
  } else if (sc.sweep_policies.empty()) {
    throw ScenarioParseError("missing required key: policy");
  }

  if (const RawEntry* e = optional("dt")) {
    sc.base.dt = parse_double(e->value, "dt", e->line);
  }
  {
    const RawEntry& e = required("horizon");
    sc.base.horizon = parse_double(e.value, "horizon", e.line);
  }
  if (const RawEntry* e = optional("seed")) {
    sc.base.seed = static_cast<std::uint64_t>(parse_long(e->value, "seed", e->line));
  }
  if (const RawEntry* e = optional("seeds")) {
    for (double v : parse_number_list(e->value, "seeds", e->line)) {
      sc.seeds.push_back(static_cast<std::uint64_t>(v));
    }
    if (sc.seeds.empty()) {
      throw ScenarioParseError("seeds: empty list (line " + std::to_string(e->line) + ")",
                               e->line);
    }
  } else {
    sc.seeds.push_back(sc.base.seed);
  }
  if (const RawEntry* e = optional("metric_cadence")) {
    sc.base.metric_cadence = parse_long(e->value, "metric_cadence", e->line);
  }
  if (const RawEntry* e = optional("integrator_budget")) {
    sc.base.integrator_budget = static_cast<int>(parse_long(e->value, "integrator_budget", e->line));
  }
  if (const RawEntry* e = optional("initial_positions")) {
    if (e->value != "random") {
      for (const std::string& pair : split(e->value, ';')) {
        std::istringstream in(pair);
        Point p;
        if (!(in >> p.x >> p.y)) {
          throw ScenarioParseError("initial_positions: expected 'x y ; x y ; ...' (line " +
                                       std::to_string(e->line) + ")",
                                   e->line);
        }
        sc.base.initial_positions.push_back(p);
      }
    }
  }
  sc.out_dir = required("out").value;
  if (sc.out_dir.empty()) {
    throw ScenarioParseError("out: empty path (line " + std::to_string(required("out").line) + ")",
                             required("out").line);
  }

  sc.base.validate();
  return sc;
}

Scenario parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  // grid density paths are resolved relative to the scenario file
  return parse_scenario_text(buf.str(), fs::path(path).stem().string(),
                             fs::path(path).parent_path().string());
}

void apply_overrides(Scenario& scenario, const ScenarioOverrides& o) {
  if (o.has_seed) {
    scenario.base.seed = o.seed;
    scenario.seeds = {o.seed};
  }
  if (o.has_policy) {
    scenario.base.policy = o.policy;
    scenario.policy_given = true;
    scenario.sweep_policies.clear();
  }
  if (o.has_lambda) {
    scenario.base.lambda = o.lambda;
    scenario.sweep_lambdas.clear();
  }
  if (o.has_agents) scenario.base.agent_count = o.agents;
  if (o.has_horizon) scenario.base.horizon = o.horizon;
  if (o.has_dt) scenario.base.dt = o.dt;
  if (o.has_out) scenario.out_dir = o.out;
  scenario.base.validate();
}

int run_scenario(const Scenario& scenario, std::ostream& log) {
  try {
    std::vector<SimConfig> configs;
    configs.reserve(scenario.seeds.size());
    for (std::uint64_t seed : scenario.seeds) {
      SimConfig cfg = scenario.base;
      cfg.seed = seed;
      configs.push_back(std::move(cfg));
    }
    const std::vector<RunResult> results = run_batch(configs);
    for (std::size_t i = 0; i < results.size(); ++i) {
      write_run_outputs(scenario, configs[i], results[i]);
      log << "# run " << run_tag(scenario, configs[i].seed) << "\n";
      write_summary(log, configs[i], results[i].metrics);
      log << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

int run_sweep(const Scenario& scenario, std::ostream& log) {
  if (!scenario.has_sweep()) {
    throw ScenarioParseError("scenario has no sweep clause (sweep_lambda / sweep_policies)");
  }
  const std::vector<double> lambdas = scenario.sweep_lambdas.empty()
                                          ? std::vector<double>{scenario.base.lambda}
                                          : scenario.sweep_lambdas;
  std::vector<PolicyKind> policies = scenario.sweep_policies;
  if (policies.empty()) {
    if (!scenario.policy_given) {
      throw ScenarioParseError("sweep needs either sweep_policies or a policy key");
    }
    policies = {scenario.base.policy};
  }

  try {
    struct Row {
      double lambda;
      std::string policy;
      std::uint64_t seed;
    };
    std::vector<SimConfig> configs;
    std::vector<Row> rows;
    for (double lambda : lambdas) {
      for (PolicyKind policy : policies) {
        for (std::uint64_t seed : scenario.seeds) {
          SimConfig cfg = scenario.base;
          cfg.lambda = lambda;
          cfg.policy = policy;
          cfg.seed = seed;
          configs.push_back(std::move(cfg));
          rows.push_back({lambda, policy == PolicyKind::no_comm ? "nc" : "sb", seed});
        }
      }
      // single-vehicle baseline at the same rates
      for (std::uint64_t seed : scenario.seeds) {
        SimConfig cfg = scenario.base;
        cfg.lambda = lambda;
        cfg.policy = PolicyKind::no_comm;
        cfg.agent_count = 1;
        cfg.initial_positions.clear();
        cfg.seed = seed;
        configs.push_back(std::move(cfg));
        rows.push_back({lambda, "single", seed});
      }
    }

    const std::vector<RunResult> results = run_batch(configs);

    std::vector<std::size_t> order(rows.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (rows[a].lambda != rows[b].lambda) return rows[a].lambda < rows[b].lambda;
      if (rows[a].policy != rows[b].policy) return rows[a].policy < rows[b].policy;
      return rows[a].seed < rows[b].seed;
    });

    fs::create_directories(scenario.out_dir);
    const std::string path = (fs::path(scenario.out_dir) / "sweep.csv").string();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "lambda,policy,seed,mean_wait,little_ratio,hm_final,mvt_residual\n";
    for (std::size_t idx : order) {
      const RunMetrics& m = results[idx].metrics;
      double ratio = std::numeric_limits<double>::quiet_NaN();
      try {
        ratio = little_check(m);
      } catch (const std::runtime_error&) {
      }
      out << fmt(rows[idx].lambda) << ',' << rows[idx].policy << ',' << rows[idx].seed
          << ',' << fmt(m.mean_wait) << ',' << fmt(ratio) << ',' << fmt(m.final_hm)
          << ',' << fmt(m.final_mvt_residual) << '\n';
    }
    log << "# sweep: " << rows.size() << " runs -> " << path << "\n";
    return 0;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mvr
