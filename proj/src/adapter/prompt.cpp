#include "tt/adapter/prompt.hpp"

#include "tt/error.hpp"

namespace tt::adapter {

using sim::Task;

HeadingSource parse_heading_source(std::string_view name) {
  if (name == "goal_direction") return HeadingSource::kGoalDirection;
  if (name == "goal_facing") return HeadingSource::kGoalFacing;
  if (name == "toward_target") return HeadingSource::kTowardTarget;
  if (name == "fixed") return HeadingSource::kFixed;
  throw ConfigError("unknown heading source '" + std::string(name) + "'");
}

std::string heading_source_name(HeadingSource s) {
  switch (s) {
    case HeadingSource::kGoalDirection: return "goal_direction";
    case HeadingSource::kGoalFacing: return "goal_facing";
    case HeadingSource::kTowardTarget: return "toward_target";
    case HeadingSource::kFixed: return "fixed";
  }
  return "?";
}

Trigger parse_trigger(std::string_view name) {
  if (name == "always") return Trigger::kAlways;
  if (name == "distance_above") return Trigger::kDistanceAbove;
  throw ConfigError("unknown prior trigger '" + std::string(name) + "'");
}

std::string trigger_name(Trigger t) {
  return t == Trigger::kAlways ? "always" : "distance_above";
}

void PromptSpec::validate(Task task) const {
  for (std::size_t i = 0; i < priors.size(); ++i) {
    const PriorToken& p = priors[i];
    const std::string where = "prior " + std::to_string(i) + " (" +
                              heading_source_name(p.heading) + ") on " + sim::task_name(task);
    bfm::lookahead_index(p.k);
    bool ok = true;
    switch (p.heading) {
      case HeadingSource::kGoalDirection:
        ok = task == Task::kDirection || task == Task::kSteering || task == Task::kDash;
        break;
      case HeadingSource::kGoalFacing:
        ok = task == Task::kSteering;
        break;
      case HeadingSource::kTowardTarget:
        ok = task == Task::kReach || task == Task::kStrike;
        break;
      case HeadingSource::kFixed:
        break;
    }
    if (!ok) throw ConfigError(where + ": the task has no such goal field");
    if (p.trigger == Trigger::kDistanceAbove) {
      if (task != Task::kReach && task != Task::kStrike && task != Task::kDash) {
        throw ConfigError(where + ": distance trigger needs a target");
      }
      if (!(p.trigger_distance >= 0.0)) {
        throw ConfigError(where + ": trigger distance must be non-negative");
      }
    }
  }
}

double trigger_distance(const sim::SimState& s, const sim::TaskGoal& g) {
  switch (g.task) {
    case Task::kReach:
      return (g.target - s.pos).norm();
    case Task::kStrike:
      return ((s.block ? s.block->position : g.block) - s.pos).norm();
    case Task::kDash:
      return -sim::dash_progress(s, g);
    default:
      throw ConfigError("task " + sim::task_name(g.task) + " has no target distance");
  }
}

std::optional<bfm::PoseGoal> prior_goal(const PriorToken& prior, const sim::SimState& s,
                                        const sim::TaskGoal& g) {
  if (prior.trigger == Trigger::kDistanceAbove &&
      !(trigger_distance(s, g) > prior.trigger_distance)) {
    return std::nullopt;
  }
  double world = 0.0;
  switch (prior.heading) {
    case HeadingSource::kGoalDirection:
      world = (g.task == Task::kDash ? g.axis : g.direction).angle();
      break;
    case HeadingSource::kGoalFacing:
      world = g.facing.angle();
      break;
    case HeadingSource::kTowardTarget: {
      const sim::Vec2 target =
          g.task == Task::kStrike ? (s.block ? s.block->position : g.block) : g.target;
      world = (target - s.pos).angle();
      break;
    }
    case HeadingSource::kFixed:
      world = g.origin_heading + prior.heading_offset;
      break;
  }
  bfm::PoseGoal out;
  out.has_position = false;
  out.rel_pos = {};
  out.heading = sim::Vec2::unit(world - s.theta);
  out.has_posture = prior.has_posture;
  out.q1 = prior.has_posture ? prior.q1 : 0.0;
  out.q2 = prior.has_posture ? prior.q2 : 0.0;
  out.k = prior.k;
  return out;
}

}  // namespace tt::adapter
