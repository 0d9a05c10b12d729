#pragma once

#include <cstddef>
#include <vector>

#include "mvr/geometry.hpp"

namespace mvr {

enum class PolicyKind { no_comm, sensor_based };

// Both policies treat goals within this distance as reached; it suppresses
// chattering at reference points. Target capture itself uses exact sub-step
// arithmetic in the engine and never depends on this.
inline constexpr double kArrivalTolerance = 1e-9;

struct AgentState {
  std::size_t id = 0;
  Point position;
  PointSet visited;       // targets serviced by this agent, in visit order
  Point reference;        // FT point of visited; initial position while empty
  long serviced_count = 0;
};

struct VelocityCommand {
  Point direction;         // unit vector, or zero
  double magnitude = 0.0;  // <= 1 (unit maximum speed)
  Point velocity() const { return magnitude * direction; }
};

// What an agent is currently steering for. The engine needs the goal itself
// (not just the direction) for exact capture arithmetic.
struct GoalChoice {
  enum class Type { none, target, reference };
  Type type = Type::none;
  std::size_t target_index = 0;  // valid when type == target
  Point goal;
};

// No-communication policy: head for the nearest outstanding target whenever
// demand exists (ties to the lowest target index), otherwise for the FT point
// of past services; agents with no history hold position.
GoalChoice nc_goal(const AgentState& agent, const std::vector<Point>& demand);
VelocityCommand nc_command(const AgentState& agent, const std::vector<Point>& demand);

// Sensor-based policy: an agent that has never serviced a target behaves as
// under the no-communication policy; afterwards it only pursues demand inside
// its own Voronoi cell and otherwise returns to its reference point.
GoalChoice sb_goal(const AgentState& agent, const std::vector<Point>& all_positions,
                   const std::vector<Point>& demand);
VelocityCommand sb_command(const AgentState& agent,
                           const std::vector<Point>& all_positions,
                           const std::vector<Point>& demand);

GoalChoice policy_goal(PolicyKind kind, const AgentState& agent,
                       const std::vector<Point>& all_positions,
                       const std::vector<Point>& demand);

// Appends the serviced target to the visit record, recomputes the reference
// point (warm-started at the previous one), and bumps the counter.
void record_service(AgentState& agent, Point target);

}  // namespace mvr
