#include "tt/bfm/pose_goal.hpp"

#include "tt/error.hpp"

namespace tt::bfm {

int lookahead_index(int k) {
  for (std::size_t i = 0; i < kLookaheads.size(); ++i) {
    if (kLookaheads[i] == k) return static_cast<int>(i);
  }
  throw ConfigError("lookahead " + std::to_string(k) + " is not one of {5, 15, 30}");
}

void BfmConfig::validate() const {
  if (d_model <= 0 || layers < 0 || heads <= 0 || ff_width <= 0 || action_dim <= 0) {
    throw ConfigError("bfm: sizes must be positive");
  }
  if (d_model % heads != 0) {
    throw ConfigError("bfm: d_model " + std::to_string(d_model) + " is not divisible by " +
                      std::to_string(heads) + " heads");
  }
  for (int h : state_hidden) {
    if (h <= 0) throw ConfigError("bfm: state encoder widths must be positive");
  }
  for (int h : pose_hidden) {
    if (h <= 0) throw ConfigError("bfm: pose encoder widths must be positive");
  }
  if (goal_slots < 0) throw ConfigError("bfm: goal_slots must be non-negative");
  if (keep_prob < 0.0 || keep_prob > 1.0 || full_view_prob < 0.0 || full_view_prob > 1.0) {
    throw ConfigError("bfm: probabilities must lie in [0, 1]");
  }
}

PoseGoal relative_goal(const sim::SimState& s, const PoseTarget& t) {
  PoseGoal g;
  g.rel_pos = (t.position - s.pos).rotated(-s.theta);
  g.heading = sim::Vec2::unit(sim::wrap_angle(t.heading - s.theta));
  g.q1 = t.q1;
  g.q2 = t.q2;
  g.k = t.k;
  return g;
}

std::array<double, kPoseFeatureDim> pose_features(const PoseGoal& g) {
  const double mp = g.has_position ? 1.0 : 0.0;
  const double mh = g.has_heading ? 1.0 : 0.0;
  const double mq = g.has_posture ? 1.0 : 0.0;
  return {g.rel_pos.x * mp, g.rel_pos.y * mp, g.heading.x * mh, g.heading.y * mh,
          g.q1 * mq,        g.q2 * mq,        mp,               mh,
          mq};
}

PoseTarget sample_pose_target(const sim::SimState& s, std::mt19937_64& rng,
                              const PoseSampling& ps) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  PoseTarget t;
  const double r = ps.max_distance * std::sqrt(std::uniform_real_distribution<double>(0, 1)(rng));
  t.position = s.pos + sim::Vec2::unit(ang(rng)) * r;
  t.heading = ang(rng);
  t.q1 = ps.q1_range * u(rng);
  t.q2 = ps.q2_range * u(rng);
  t.k = kLookaheads[std::uniform_int_distribution<int>(0, kLookaheads.size() - 1)(rng)];
  return t;
}

std::vector<bool> sample_mask(std::mt19937_64& rng, double keep_prob, int slots) {
  std::bernoulli_distribution keep(keep_prob);
  std::vector<bool> mask(slots);
  for (int i = 0; i < slots; ++i) mask[i] = keep(rng);
  return mask;
}

PoseGoal sample_view(const PoseGoal& goal, std::mt19937_64& rng, double full_view_prob) {
  PoseGoal v = goal;
  if (std::bernoulli_distribution(full_view_prob)(rng)) return v;
  // Non-empty proper or full subset of the three components, uniformly.
  const int bits = std::uniform_int_distribution<int>(1, 7)(rng);
  v.has_position = goal.has_position && (bits & 1);
  v.has_heading = goal.has_heading && (bits & 2);
  v.has_posture = goal.has_posture && (bits & 4);
  return v;
}

}  // namespace tt::bfm
