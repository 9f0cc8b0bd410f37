#include "tt/sim/task.hpp"

#include <algorithm>

#include "tt/error.hpp"
#include "tt/sim/physics.hpp"

namespace tt::sim {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double random_angle(std::mt19937_64& rng) {
  return uniform(rng, -std::numbers::pi, std::numbers::pi);
}

// World vector into the base frame.
Vec2 ego(Vec2 v, double theta) { return v.rotated(-theta); }

}  // namespace

Task parse_task(std::string_view name) {
  if (name == "direction") return Task::kDirection;
  if (name == "steering") return Task::kSteering;
  if (name == "reach") return Task::kReach;
  if (name == "strike") return Task::kStrike;
  if (name == "dash") return Task::kDash;
  throw ConfigError("unknown task '" + std::string(name) + "'");
}

std::string task_name(Task task) {
  switch (task) {
    case Task::kDirection: return "direction";
    case Task::kSteering: return "steering";
    case Task::kReach: return "reach";
    case Task::kStrike: return "strike";
    case Task::kDash: return "dash";
  }
  return "unknown";
}

int goal_dim(Task task) {
  switch (task) {
    case Task::kDirection: return 3;
    case Task::kSteering: return 5;
    case Task::kReach: return 2;
    case Task::kStrike: return 3;
    case Task::kDash: return 4;
  }
  return 0;
}

TaskGoal sample_goal(Task task, std::mt19937_64& rng, const SamplingRanges& r) {
  TaskGoal g;
  g.task = task;
  switch (task) {
    case Task::kDirection:
      g.direction = Vec2::unit(random_angle(rng));
      g.speed = uniform(rng, r.speed_min, r.speed_max);
      break;
    case Task::kSteering:
      g.direction = Vec2::unit(random_angle(rng));
      g.facing = Vec2::unit(random_angle(rng));
      g.speed = uniform(rng, r.speed_min, r.speed_max);
      break;
    case Task::kReach: {
      // Area-uniform on the annulus.
      const double u = uniform(rng, r.reach_min * r.reach_min, r.reach_max * r.reach_max);
      g.target = Vec2::unit(random_angle(rng)) * std::sqrt(u);
      break;
    }
    case Task::kStrike: {
      const double radius = uniform(rng, r.block_min, r.block_max);
      g.block = Vec2::unit(random_angle(rng)) * radius;
      break;
    }
    case Task::kDash:
      g.axis = Vec2::unit(random_angle(rng));
      break;
  }
  return g;
}

std::vector<double> goal_observation(const SimState& s, const TaskGoal& g) {
  const double th = s.theta;
  switch (g.task) {
    case Task::kDirection: {
      const Vec2 d = ego(g.direction, th);
      return {d.x, d.y, g.speed};
    }
    case Task::kSteering: {
      const Vec2 d = ego(g.direction, th);
      const Vec2 f = ego(g.facing, th);
      return {d.x, d.y, f.x, f.y, g.speed};
    }
    case Task::kReach: {
      const Vec2 p = ego(g.target - s.pos, th);
      return {p.x, p.y};
    }
    case Task::kStrike: {
      const Vec2 b = s.block ? s.block->position : g.block;
      const Vec2 p = ego(b - s.pos, th);
      return {p.x, p.y, s.block ? s.block->tilt : 0.0};
    }
    case Task::kDash: {
      const Vec2 a = ego(g.axis, th);
      return {a.x, a.y, -dash_progress(s, g), dash_lateral(s, g)};
    }
  }
  return {};
}

std::vector<double> proprio(const SimState& s, const SimParams& p) {
  const Vec2 v = ego(s.vel, s.theta);
  const HandOffset h = hand_offset(s.q1, s.q2, p);
  return {std::sin(s.theta), std::cos(s.theta), v.x, v.y, s.omega, s.q1, s.q2, s.dq1, s.dq2,
          h.extension, h.height, 0.0, 0.0};
}

std::vector<double> proprio_extra(const SimState& s, const TaskGoal& g, const SimParams& p) {
  const Vec2 base = ego(s.pos - g.origin, g.origin_heading);
  const Vec2 hand = ego(hand_position(s, p) - g.origin, g.origin_heading);
  return {base.x, base.y, hand.x, hand.y};
}

double facing_error(const SimState& s, Vec2 reference) {
  return std::abs(wrap_angle(s.theta - reference.angle()));
}

double dash_progress(const SimState& s, const TaskGoal& g) {
  return (s.pos - g.origin).dot(g.axis) - g.line_distance;
}

double dash_lateral(const SimState& s, const TaskGoal& g) {
  const Vec2 normal{-g.axis.y, g.axis.x};
  return (s.pos - g.origin).dot(normal);
}

double task_reward(const SimState& prev, const SimState& next, const TaskGoal& g,
                   const SimParams& p, bool terminal, const RewardConfig& c) {
  const double dt = static_cast<double>(next.ticks - prev.ticks) * p.dt_sim;
  const Vec2 vel = dt > 0.0 ? (next.pos - prev.pos) * (1.0 / dt) : next.vel;
  double r = 0.0;
  switch (g.task) {
    case Task::kDirection:
      r = std::exp(-c.speed_scale * std::abs(vel.dot(g.direction) - g.speed));
      break;
    case Task::kSteering:
      r = std::exp(-c.speed_scale * std::abs(vel.dot(g.direction) - g.speed)) +
          c.facing_weight * std::exp(-c.facing_scale * facing_error(next, g.facing));
      break;
    case Task::kReach:
      r = std::exp(-c.reach_scale * (hand_position(next, p) - g.target).norm());
      break;
    case Task::kStrike: {
      const Vec2 b = next.block ? next.block->position : g.block;
      r = std::exp(-c.strike_scale * (hand_position(next, p) - b).norm());
      const bool fell = next.block && next.block->fallen && !(prev.block && prev.block->fallen);
      if (fell) r += c.strike_bonus;
      break;
    }
    case Task::kDash: {
      r = std::clamp(vel.dot(g.axis) / c.dash_speed_ref, 0.0, 1.0);
      const double coast = dash_progress(next, g);
      if (terminal && coast > 0.0) {
        r += c.dash_coast_weight * std::min(coast, c.dash_coast_cap);
      }
      break;
    }
  }
  return std::clamp(r, 0.0, 11.0);
}

}  // namespace tt::sim
