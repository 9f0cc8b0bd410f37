#ifndef TT_SIM_TYPES_HPP_
#define TT_SIM_TYPES_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

namespace tt::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  bool operator==(const Vec2&) const = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  // Counter-clockwise rotation by `angle` radians.
  Vec2 rotated(double angle) const {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * x - s * y, s * x + c * y};
  }
  static Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }
  double angle() const { return std::atan2(y, x); }
};

// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

inline constexpr int kActionDim = 5;
// Normalized action in [-1, 1]^5: body-frame force (forward, left), yaw
// torque, shoulder torque, elbow torque. Scaled by SimParams limits.
using Action = std::array<double, kActionDim>;

struct SimParams {
  double dt_sim = 1.0 / 120.0;
  int control_decimation = 4;

  double base_mass = 10.0;
  double base_inertia = 2.0;
  double base_damping = 4.0;     // linear drag coefficient, scaled by friction
  double yaw_damping = 2.0;      // scaled by friction
  double rolling_decel = 0.2;    // m/s^2 at gravity 1

  std::array<double, 2> link_lengths{0.6, 0.5};
  std::array<double, 2> link_masses{1.0, 0.8};
  double shoulder_height = 1.2;
  double joint_damping = 0.5;
  double gravity = 9.81;

  // Per-channel magnitude of a unit action.
  std::array<double, kActionDim> action_limits{50.0, 50.0, 10.0, 20.0, 6.0};

  double friction_mult = 1.0;
  double gravity_mult = 1.0;

  // Target block.
  double block_radius = 0.3;
  double block_height = 1.0;
  double hand_radius = 0.1;
  double impact_threshold = 0.8;  // normal hand speed needed to register a hit
  double impact_gain = 1.0;       // tilt rate gained per unit normal speed
  double tip_stiffness = 12.0;
  double tip_angle = 0.35;        // unstable equilibrium of the tilt dynamics
  double fallen_tilt = 70.0 * std::numbers::pi / 180.0;

  double dt_control() const { return dt_sim * control_decimation; }
  // Decoupled link inertias about their joints.
  double link_inertia(int i) const;
  bool operator==(const SimParams&) const = default;
};

struct BlockState {
  Vec2 position;
  double tilt = 0.0;
  double tilt_rate = 0.0;
  bool fallen = false;
  bool in_contact = false;
  bool operator==(const BlockState&) const = default;
};

struct SimState {
  Vec2 pos;
  double theta = 0.0;
  Vec2 vel;
  double omega = 0.0;
  double q1 = 0.0;  // shoulder, 0 = hanging straight down
  double q2 = 0.0;  // elbow, relative to the upper link
  double dq1 = 0.0;
  double dq2 = 0.0;
  std::int64_t ticks = 0;  // elapsed physics substeps
  std::optional<BlockState> block;

  double time(const SimParams& p) const { return static_cast<double>(ticks) * p.dt_sim; }
  bool operator==(const SimState&) const = default;
};

inline double SimParams::link_inertia(int i) const {
  const double l1 = link_lengths[0], l2 = link_lengths[1];
  const double m1 = link_masses[0], m2 = link_masses[1];
  if (i == 0) return m1 * l1 * l1 / 3.0 + m2 * l1 * l1;
  return m2 * l2 * l2 / 3.0;
}

}  // namespace tt::sim

#endif  // TT_SIM_TYPES_HPP_
