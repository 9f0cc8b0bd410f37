#include "tt/bfm/expert.hpp"

#include <algorithm>

#include "tt/sim/physics.hpp"

namespace tt::bfm {

double goal_horizon(int k, const sim::SimParams& p, const ExpertConfig& cfg) {
  return std::max(cfg.min_horizon, cfg.horizon_scale * k * p.dt_control());
}

sim::Action expert_action(const sim::SimState& s, const PoseGoal& g, const sim::SimParams& p,
                          const ExpertConfig& cfg) {
  const double horizon = goal_horizon(g.k, p, cfg);
  const double mu = p.friction_mult;

  // Base, in the body frame.
  sim::Vec2 v_des;
  if (g.has_position) {
    v_des = g.rel_pos * (1.0 / horizon);
    const double n = v_des.norm();
    if (n > cfg.v_max) v_des = v_des * (cfg.v_max / n);
  }
  const sim::Vec2 v_body = s.vel.rotated(-s.theta);
  const sim::Vec2 force = (v_des - v_body) * (p.base_mass * cfg.velocity_gain) +
                          v_des * (mu * p.base_damping);

  double w_des = 0.0;
  if (g.has_heading) {
    const double err = std::atan2(g.heading.y, g.heading.x);
    w_des = std::clamp(err / horizon, -cfg.yaw_rate_max, cfg.yaw_rate_max);
  }
  const double torque =
      p.base_inertia * cfg.yaw_gain * (w_des - s.omega) + mu * p.yaw_damping * w_des;

  const double wn = cfg.arm_frequency;
  const double zeta = cfg.arm_damping_ratio;
  std::array<double, 2> tau{};
  const double q[2] = {s.q1, s.q2};
  const double dq[2] = {s.dq1, s.dq2};
  const double qd[2] = {g.q1, g.q2};
  const auto grav = cfg.gravity_compensation ? sim::gravity_torques(s.q1, s.q2, p)
                                             : std::array<double, 2>{0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    const double inertia = p.link_inertia(i);
    const double err = g.has_posture ? sim::wrap_angle(qd[i] - q[i]) : 0.0;
    tau[i] = inertia * (wn * wn * err - 2.0 * zeta * wn * dq[i]) + grav[i];
  }

  sim::Action a{force.x / p.action_limits[0], force.y / p.action_limits[1],
                torque / p.action_limits[2], tau[0] / p.action_limits[3],
                tau[1] / p.action_limits[4]};
  for (double& v : a) v = std::clamp(v, -1.0, 1.0);
  return a;
}

}  // namespace tt::bfm
