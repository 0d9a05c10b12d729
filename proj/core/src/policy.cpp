#include "mvr/policy.hpp"

#include <limits>

#include "mvr/partition.hpp"

namespace mvr {

namespace {

// Lowest-index nearest member of demand, optionally filtered to the agent's
// own Voronoi cell.
bool nearest_demand(const AgentState& agent, const std::vector<Point>& demand,
                    const std::vector<Point>* positions, std::size_t* index) {
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t k = 0; k < demand.size(); ++k) {
    if (positions && !in_voronoi_cell(agent.id, demand[k], *positions)) continue;
    const double d = dist2(agent.position, demand[k]);
    if (d < best) {
      best = d;
      *index = k;
      found = true;
    }
  }
  return found;
}

VelocityCommand command_for(const AgentState& agent, const GoalChoice& goal) {
  VelocityCommand cmd;
  if (goal.type == GoalChoice::Type::none) return cmd;
  if (dist(agent.position, goal.goal) <= kArrivalTolerance) return cmd;
  cmd.direction = vers(goal.goal - agent.position);
  cmd.magnitude = 1.0;
  return cmd;
}

}  // namespace

GoalChoice nc_goal(const AgentState& agent, const std::vector<Point>& demand) {
  GoalChoice g;
  std::size_t k;
  if (nearest_demand(agent, demand, nullptr, &k)) {
    g.type = GoalChoice::Type::target;
    g.target_index = k;
    g.goal = demand[k];
  } else if (!agent.visited.empty()) {
    g.type = GoalChoice::Type::reference;
    g.goal = agent.reference;
  }
  return g;
}

VelocityCommand nc_command(const AgentState& agent, const std::vector<Point>& demand) {
  return command_for(agent, nc_goal(agent, demand));
}

GoalChoice sb_goal(const AgentState& agent, const std::vector<Point>& all_positions,
                   const std::vector<Point>& demand) {
  if (agent.visited.empty()) return nc_goal(agent, demand);
  GoalChoice g;
  std::size_t k;
  if (nearest_demand(agent, demand, &all_positions, &k)) {
    g.type = GoalChoice::Type::target;
    g.target_index = k;
    g.goal = demand[k];
  } else {
    g.type = GoalChoice::Type::reference;
    g.goal = agent.reference;
  }
  return g;
}

VelocityCommand sb_command(const AgentState& agent,
                           const std::vector<Point>& all_positions,
                           const std::vector<Point>& demand) {
  return command_for(agent, sb_goal(agent, all_positions, demand));
}

GoalChoice policy_goal(PolicyKind kind, const AgentState& agent,
                       const std::vector<Point>& all_positions,
                       const std::vector<Point>& demand) {
  return kind == PolicyKind::no_comm ? nc_goal(agent, demand)
                                     : sb_goal(agent, all_positions, demand);
}

void record_service(AgentState& agent, Point target) {
  agent.visited.push_back(target);
  agent.reference = ft_point(agent.visited, agent.reference).point;
  agent.serviced_count += 1;
}

}  // namespace mvr
