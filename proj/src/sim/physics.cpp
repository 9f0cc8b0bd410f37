#include "tt/sim/physics.hpp"

#include <algorithm>
#include <sstream>

#include "tt/error.hpp"

namespace tt::sim {
namespace {

bool finite(const SimState& s) {
  const double v[] = {s.pos.x, s.pos.y, s.theta, s.vel.x, s.vel.y, s.omega,
                      s.q1,    s.q2,    s.dq1,   s.dq2};
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  if (s.block && (!std::isfinite(s.block->tilt) || !std::isfinite(s.block->tilt_rate))) {
    return false;
  }
  return true;
}

std::string describe(const SimState& s) {
  std::ostringstream os;
  os << "pos=(" << s.pos.x << "," << s.pos.y << ") theta=" << s.theta << " vel=(" << s.vel.x
     << "," << s.vel.y << ") omega=" << s.omega << " q=(" << s.q1 << "," << s.q2 << ") dq=("
     << s.dq1 << "," << s.dq2 << ") tick=" << s.ticks;
  return os.str();
}

// Hand inside the block cylinder (horizontal overlap and below its top).
bool touching(Vec2 hand, double hand_height, const BlockState& b, const SimParams& p) {
  return (hand - b.position).norm() < p.block_radius + p.hand_radius &&
         hand_height < p.block_height;
}

}  // namespace

void validate(const SimParams& p) {
  if (!(p.dt_sim > 0.0) || p.control_decimation < 1 ||
      std::abs(p.dt_sim * p.control_decimation - 1.0 / 30.0) > 1e-12) {
    throw ConfigError("sim: dt_sim * control_decimation must equal 1/30 s");
  }
  if (!(p.friction_mult > 0.0)) throw ConfigError("sim: friction_mult must be positive");
  if (!(p.gravity_mult >= 0.0)) throw ConfigError("sim: gravity_mult must be non-negative");
  const double positives[] = {p.base_mass,       p.base_inertia,    p.link_lengths[0],
                              p.link_lengths[1], p.link_masses[0],  p.link_masses[1],
                              p.gravity};
  for (double v : positives) {
    if (!(v > 0.0)) throw ConfigError("sim: masses, lengths and forces must be positive");
  }
  for (double l : p.action_limits) {
    if (!(l > 0.0)) throw ConfigError("sim: action limits must be positive");
  }
}

SimParams apply_perturbation(const SimParams& params, double friction_mult,
                             double gravity_mult) {
  if (!(friction_mult > 0.0) || !(gravity_mult > 0.0)) {
    throw ConfigError("perturbation multipliers must be positive");
  }
  SimParams out = params;
  out.friction_mult = params.friction_mult * friction_mult;
  out.gravity_mult = params.gravity_mult * gravity_mult;
  return out;
}

std::array<double, 2> gravity_torques(double q1, double q2, const SimParams& p) {
  const double g = p.gravity * p.gravity_mult;
  const double l1 = p.link_lengths[0], l2 = p.link_lengths[1];
  const double m1 = p.link_masses[0], m2 = p.link_masses[1];
  const double outer = m2 * 0.5 * l2 * g * std::sin(q1 + q2);
  return {(m1 * 0.5 * l1 + m2 * l1) * g * std::sin(q1) + outer, outer};
}

HandOffset hand_offset(double q1, double q2, const SimParams& p) {
  const double l1 = p.link_lengths[0], l2 = p.link_lengths[1];
  return {l1 * std::sin(q1) + l2 * std::sin(q1 + q2),
          p.shoulder_height - (l1 * std::cos(q1) + l2 * std::cos(q1 + q2))};
}

Vec2 hand_position(const SimState& s, const SimParams& p) {
  return s.pos + Vec2::unit(s.theta) * hand_offset(s.q1, s.q2, p).extension;
}

SimState physics_substep(const SimState& state, const Action& raw, const SimParams& p,
                         std::vector<ContactEvent>* events) {
  for (double a : raw) {
    if (!std::isfinite(a)) throw SimulationError("non-finite action at " + describe(state));
  }
  if (!finite(state)) throw SimulationError("non-finite state: " + describe(state));

  Action a;
  for (int i = 0; i < kActionDim; ++i) a[i] = std::clamp(raw[i], -1.0, 1.0);
  const double dt = p.dt_sim;
  const double mu = p.friction_mult;
  SimState s = state;

  // Base translation: body-frame force against friction-scaled drag.
  const Vec2 force =
      Vec2{a[0] * p.action_limits[0], a[1] * p.action_limits[1]}.rotated(state.theta);
  s.vel += (force - state.vel * (mu * p.base_damping)) * (dt / p.base_mass);
  const double speed = s.vel.norm();
  if (speed > 0.0) {
    const double slowed = std::max(0.0, speed - dt * p.rolling_decel * p.gravity_mult);
    s.vel = s.vel * (slowed / speed);
  }
  s.pos += s.vel * dt;

  // Yaw.
  s.omega += dt * (a[2] * p.action_limits[2] - mu * p.yaw_damping * state.omega) / p.base_inertia;
  s.theta = wrap_angle(state.theta + dt * s.omega);

  // Arm.
  const auto grav = gravity_torques(state.q1, state.q2, p);
  s.dq1 += dt * (a[3] * p.action_limits[3] - p.joint_damping * state.dq1 - grav[0]) /
           p.link_inertia(0);
  s.dq2 += dt * (a[4] * p.action_limits[4] - p.joint_damping * state.dq2 - grav[1]) /
           p.link_inertia(1);
  s.q1 = wrap_angle(state.q1 + dt * s.dq1);
  s.q2 = wrap_angle(state.q2 + dt * s.dq2);

  s.ticks = state.ticks + 1;

  if (s.block) {
    BlockState& b = *s.block;
    const Vec2 hand_before = hand_position(state, p);
    const Vec2 hand_after = hand_position(s, p);
    const bool touch = touching(hand_after, hand_offset(s.q1, s.q2, p).height, b, p);
    if (touch && !b.in_contact) {
      const Vec2 hand_vel = (hand_after - hand_before) * (1.0 / dt);
      const Vec2 to_center = b.position - hand_after;
      const double dist = to_center.norm();
      const double vn = dist > 0.0 ? hand_vel.dot(to_center * (1.0 / dist)) : hand_vel.norm();
      const bool impact = vn > p.impact_threshold;
      if (impact && !b.fallen) b.tilt_rate += p.impact_gain * vn;
      if (events) events->push_back({s.ticks, vn, impact});
    }
    b.in_contact = touch;

    const double g = p.gravity_mult;
    b.tilt_rate += dt * g * p.tip_stiffness * std::sin(b.tilt - p.tip_angle);
    b.tilt += dt * b.tilt_rate;
    if (b.tilt <= 0.0) {
      b.tilt = 0.0;
      b.tilt_rate = std::max(0.0, b.tilt_rate);
    } else if (b.tilt >= std::numbers::pi / 2) {
      b.tilt = std::numbers::pi / 2;
      b.tilt_rate = 0.0;
    }
    b.fallen = b.fallen || b.tilt > p.fallen_tilt;
  }

  if (!finite(s)) throw SimulationError("simulation diverged: " + describe(s));
  return s;
}

ControlResult control_step(const SimState& state, const Action& action, const SimParams& p) {
  ControlResult out{state, {}};
  for (int i = 0; i < p.control_decimation; ++i) {
    out.state = physics_substep(out.state, action, p, &out.events);
  }
  return out;
}

}  // namespace tt::sim
