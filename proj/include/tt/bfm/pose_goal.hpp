#ifndef TT_BFM_POSE_GOAL_HPP_
#define TT_BFM_POSE_GOAL_HPP_

#include <array>
#include <random>
#include <vector>

#include "tt/bfm/config.hpp"
#include "tt/sim/types.hpp"

namespace tt::bfm {

// Desired base pose and arm posture k control steps ahead, relative to the
// current base frame. The three component flags let a token carry a subset
// of the goal (for example heading only).
struct PoseGoal {
  sim::Vec2 rel_pos;
  sim::Vec2 heading{1.0, 0.0};  // unit vector in the base frame
  double q1 = 0.0;
  double q2 = 0.0;
  int k = 15;
  bool has_position = true;
  bool has_heading = true;
  bool has_posture = true;
  bool operator==(const PoseGoal&) const = default;
};

// World-frame target that stays fixed while the robot moves toward it.
struct PoseTarget {
  sim::Vec2 position;
  double heading = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  int k = 15;
};

PoseGoal relative_goal(const sim::SimState& state, const PoseTarget& target);

// (rel_pos * m_p, heading * m_h, posture * m_q, m_p, m_h, m_q).
std::array<double, kPoseFeatureDim> pose_features(const PoseGoal& goal);

struct PoseSampling {
  double max_distance = 3.0;
  double q1_range = 1.2;
  double q2_range = 1.2;
};

// Target around the current base position with uniform heading and posture.
PoseTarget sample_pose_target(const sim::SimState& state, std::mt19937_64& rng,
                              const PoseSampling& s = {});

// Presence mask over goal slots; each slot kept independently with
// probability keep_prob. The state token is never part of this mask.
std::vector<bool> sample_mask(std::mt19937_64& rng, double keep_prob, int slots);

// A random view of `goal` for one token slot: all components with
// probability full_view_prob, otherwise a random non-empty subset.
PoseGoal sample_view(const PoseGoal& goal, std::mt19937_64& rng, double full_view_prob);

}  // namespace tt::bfm

#endif  // TT_BFM_POSE_GOAL_HPP_
