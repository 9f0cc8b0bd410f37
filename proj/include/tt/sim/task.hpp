#ifndef TT_SIM_TASK_HPP_
#define TT_SIM_TASK_HPP_

#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "tt/sim/types.hpp"

namespace tt::sim {

enum class Task { kDirection, kSteering, kReach, kStrike, kDash };

Task parse_task(std::string_view name);  // ConfigError on unknown names
std::string task_name(Task task);
// Width of the egocentric goal observation for `task`.
int goal_dim(Task task);

inline constexpr int kProprioDim = 13;
inline constexpr int kProprioExtraDim = 4;

// World-frame goal. Only the fields of the active task are meaningful.
struct TaskGoal {
  Task task = Task::kDirection;
  Vec2 direction{1.0, 0.0};  // Direction, Steering
  double speed = 1.0;        // Direction, Steering
  Vec2 facing{1.0, 0.0};     // Steering
  Vec2 target;               // Reach
  Vec2 block;                // Strike: block spawn position
  Vec2 axis{1.0, 0.0};       // Dash corridor axis
  double line_distance = 20.0;
  double corridor_half_width = 2.0;
  Vec2 origin;               // episode start position
  double origin_heading = 0.0;
  bool operator==(const TaskGoal&) const = default;
};

struct SamplingRanges {
  double speed_min = 0.5;
  double speed_max = 1.5;
  double reach_min = 0.5;
  double reach_max = 3.0;
  double block_min = 3.0;
  double block_max = 6.0;
};

// Goal relative to a spawn at the origin facing +x.
TaskGoal sample_goal(Task task, std::mt19937_64& rng, const SamplingRanges& ranges = {});

// Egocentric goal features:
//   Direction: d (2), v*
//   Steering:  d (2), f (2), v*
//   Reach:     target position (2)
//   Strike:    block position (2), block tilt
//   Dash:      axis (2), distance left to the line, lateral offset
std::vector<double> goal_observation(const SimState& state, const TaskGoal& goal);

// sin, cos of heading, body-frame velocity, yaw rate, joint angles and
// rates, hand extension and height, two reserved zeros.
std::vector<double> proprio(const SimState& state, const SimParams& params);

// Base position and hand position in the episode-start frame.
std::vector<double> proprio_extra(const SimState& state, const TaskGoal& goal,
                                  const SimParams& params);

// Angle between the base heading and `reference`, in [0, pi].
double facing_error(const SimState& state, Vec2 reference);
// Along-axis progress past the Dash line (negative before it).
double dash_progress(const SimState& state, const TaskGoal& goal);
double dash_lateral(const SimState& state, const TaskGoal& goal);

struct RewardConfig {
  double speed_scale = 2.0;
  double facing_weight = 0.5;
  double facing_scale = 2.0;
  double reach_scale = 4.0;
  double strike_scale = 0.5;
  double strike_bonus = 10.0;
  double dash_speed_ref = 4.0;
  double dash_coast_weight = 2.0;
  double dash_coast_cap = 5.0;
};

// Dense per-step reward over one control step. `terminal` adds the Dash
// coast bonus. Always within [0, 11].
double task_reward(const SimState& prev, const SimState& next, const TaskGoal& goal,
                   const SimParams& params, bool terminal = false,
                   const RewardConfig& cfg = {});

}  // namespace tt::sim

#endif  // TT_SIM_TASK_HPP_
