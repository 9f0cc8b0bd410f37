#ifndef TT_ADAPTER_PROMPT_HPP_
#define TT_ADAPTER_PROMPT_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tt/bfm/pose_goal.hpp"
#include "tt/sim/task.hpp"

namespace tt::adapter {

// Where a prior token takes its desired world heading from.
enum class HeadingSource {
  kGoalDirection,  // Direction / Steering travel direction, Dash axis
  kGoalFacing,     // Steering facing direction
  kTowardTarget,   // from the base to the Reach target or the Strike block
  kFixed,          // episode-start heading plus a fixed offset
};

HeadingSource parse_heading_source(std::string_view name);  // ConfigError
std::string heading_source_name(HeadingSource s);

enum class Trigger {
  kAlways,
  kDistanceAbove,  // active while the distance to the target exceeds a threshold
};

Trigger parse_trigger(std::string_view name);  // ConfigError
std::string trigger_name(Trigger t);

// A user-written goal token held alongside the learned task token. It only
// uses the components the behavior model was pretrained on: a heading and,
// optionally, an arm posture.
struct PriorToken {
  HeadingSource heading = HeadingSource::kGoalDirection;
  double heading_offset = 0.0;  // radians, kFixed only
  bool has_posture = false;
  double q1 = 0.0;
  double q2 = 0.0;
  int k = 15;
  Trigger trigger = Trigger::kAlways;
  double trigger_distance = 1.5;
  bool operator==(const PriorToken&) const = default;
};

struct PromptSpec {
  std::vector<PriorToken> priors;

  // ConfigError when a prior needs a goal field `task` does not have, or
  // when k is not a pretrained lookahead.
  void validate(sim::Task task) const;
  bool operator==(const PromptSpec&) const = default;
};

// Distance used by Trigger::kDistanceAbove: base to Reach target or Strike
// block, or what is left of the Dash run-up. ConfigError for other tasks.
double trigger_distance(const sim::SimState& state, const sim::TaskGoal& goal);

// The prior's pose goal in the current base frame, or nothing while its
// trigger is inactive.
std::optional<bfm::PoseGoal> prior_goal(const PriorToken& prior, const sim::SimState& state,
                                        const sim::TaskGoal& goal);

}  // namespace tt::adapter

#endif  // TT_ADAPTER_PROMPT_HPP_
