#ifndef TT_SIM_PHYSICS_HPP_
#define TT_SIM_PHYSICS_HPP_

#include <array>
#include <vector>

#include "tt/sim/types.hpp"

namespace tt::sim {

struct ContactEvent {
  std::int64_t tick = 0;
  double normal_speed = 0.0;  // hand speed toward the block center at entry
  bool impact = false;        // normal speed exceeded the impact threshold
};

struct ControlResult {
  SimState state;
  std::vector<ContactEvent> events;
};

// Throws ConfigError unless dt_sim * decimation == 1/30, friction > 0,
// gravity >= 0 and every mass, length and limit is positive.
void validate(const SimParams& params);

// Scales friction and gravity multipliers; both must be positive.
SimParams apply_perturbation(const SimParams& params, double friction_mult,
                             double gravity_mult);

// Gravity torques on (shoulder, elbow), including gravity_mult.
std::array<double, 2> gravity_torques(double q1, double q2, const SimParams& params);

// Hand offset in the arm plane: horizontal reach along the heading and
// height above the ground.
struct HandOffset {
  double extension = 0.0;
  double height = 0.0;
};
HandOffset hand_offset(double q1, double q2, const SimParams& params);
Vec2 hand_position(const SimState& state, const SimParams& params);

// One semi-implicit Euler step of dt_sim. Actions are clamped to [-1, 1].
// Contact events, if any, are appended to `events` when it is non-null.
SimState physics_substep(const SimState& state, const Action& action, const SimParams& params,
                         std::vector<ContactEvent>* events = nullptr);

// control_decimation substeps with the action held.
ControlResult control_step(const SimState& state, const Action& action,
                           const SimParams& params);

}  // namespace tt::sim

#endif  // TT_SIM_PHYSICS_HPP_
