#ifndef TT_BFM_EXPERT_HPP_
#define TT_BFM_EXPERT_HPP_

#include "tt/bfm/pose_goal.hpp"
#include "tt/sim/types.hpp"

namespace tt::bfm {

struct ExpertConfig {
  double v_max = 4.0;          // cap on commanded base speed
  double velocity_gain = 10.0;  // 1/s
  double yaw_rate_max = 4.0;
  double yaw_gain = 10.0;
  double arm_frequency = 8.0;  // rad/s
  double arm_damping_ratio = 0.8;
  // Time to close the gap to the goal: max(min_horizon, horizon_scale*k*dt).
  double horizon_scale = 0.5;
  double min_horizon = 0.2;
  bool gravity_compensation = true;
};

// Seconds the expert plans to take to reach a goal with lookahead k.
double goal_horizon(int k, const sim::SimParams& params, const ExpertConfig& cfg = {});

// Scripted PD tracker: base velocity toward rel_pos / horizon, yaw rate
// toward the heading, joint PD toward the posture with gravity feedforward.
// Components missing from `goal` are held (zero velocity, zero yaw rate,
// damped arm). Output is a normalized, clamped action.
sim::Action expert_action(const sim::SimState& state, const PoseGoal& goal,
                          const sim::SimParams& params, const ExpertConfig& cfg = {});

}  // namespace tt::bfm

#endif  // TT_BFM_EXPERT_HPP_
