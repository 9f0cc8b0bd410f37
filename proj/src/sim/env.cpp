#include "tt/sim/env.hpp"

#include "tt/error.hpp"

namespace tt::sim {

Env::Env(SimParams params, EnvOptions options)
    : params_(params), options_(options) {
  validate(params_);
  if (options_.horizon < 1 || options_.window < 1) {
    throw ConfigError("env: horizon and window must be positive");
  }
}

void Env::reset(Task task, std::mt19937_64& rng) {
  TaskGoal goal = sample_goal(task, rng, options_.ranges);
  double heading = std::uniform_real_distribution<double>(-std::numbers::pi,
                                                          std::numbers::pi)(rng);
  if (task == Task::kDirection && options_.spawn_facing_away) {
    const double jitter = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    heading = wrap_angle(goal.direction.angle() + std::numbers::pi + jitter);
  }
  reset(goal, heading);
}

void Env::reset(TaskGoal goal, double spawn_heading) {
  state_ = SimState{};
  state_.theta = wrap_angle(spawn_heading);
  goal.origin = state_.pos;
  goal.origin_heading = state_.theta;
  if (goal.task == Task::kStrike) state_.block = BlockState{goal.block};
  goal_ = goal;
  steps_ = 0;
  control_cut_ = false;
  termination_ = Termination::kRunning;
  trace_ = EpisodeTrace{};
  trace_.initial = state_;
  trace_.window = options_.window;
}

StepOutcome Env::step(const Action& action) {
  if (done()) throw ContractError("env: step after episode end");
  Action applied = action;
  if (control_cut_) applied.fill(0.0);
  const SimState prev = state_;
  state_ = control_step(prev, applied, params_).state;
  ++steps_;

  Termination term = Termination::kRunning;
  if (goal_.task == Task::kDash) {
    if (!control_cut_ && dash_progress(state_, goal_) >= 0.0) control_cut_ = true;
    if (control_cut_ && state_.vel.norm() < options_.dash_stop_speed) {
      term = Termination::kCoastEnded;
    } else if (std::abs(dash_lateral(state_, goal_)) > goal_.corridor_half_width) {
      term = Termination::kLeftCorridor;
    }
  } else if ((state_.pos - goal_.origin).norm() > options_.arena_radius) {
    term = Termination::kOutOfArena;
  }
  if (goal_.task == Task::kStrike && state_.block && state_.block->fallen) {
    term = Termination::kBlockFallen;
  }
  if (term == Termination::kRunning && steps_ >= options_.horizon) {
    term = Termination::kTimeLimit;
  }

  StepOutcome out;
  out.done = term != Termination::kRunning;
  out.termination = term;
  out.reward = task_reward(prev, state_, goal_, params_, out.done, options_.reward);
  termination_ = term;
  if (options_.record_trace) {
    trace_.steps.push_back({state_, applied, out.reward});
    trace_.termination = term;
  }
  return out;
}

}  // namespace tt::sim
