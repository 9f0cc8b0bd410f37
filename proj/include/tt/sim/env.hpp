#ifndef TT_SIM_ENV_HPP_
#define TT_SIM_ENV_HPP_

#include <random>

#include "tt/sim/physics.hpp"
#include "tt/sim/task.hpp"
#include "tt/sim/trace.hpp"

namespace tt::sim {

struct EnvOptions {
  int horizon = 300;  // control steps (10 s)
  int window = 60;    // trailing measurement window (2 s)
  double arena_radius = 20.0;  // not applied to Dash
  // Direction only: spawn facing roughly opposite the target direction.
  bool spawn_facing_away = false;
  double dash_stop_speed = 0.05;
  bool record_trace = true;
  SamplingRanges ranges;
  RewardConfig reward;
};

struct StepOutcome {
  double reward = 0.0;
  bool done = false;
  Termination termination = Termination::kRunning;
};

// One task episode at a time. Value semantics; copies are independent.
class Env {
 public:
  explicit Env(SimParams params = {}, EnvOptions options = {});

  // Samples a goal and a spawn heading.
  void reset(Task task, std::mt19937_64& rng);
  // Uses `goal` relative to a spawn at the origin with the given heading.
  void reset(TaskGoal goal, double spawn_heading);

  StepOutcome step(const Action& action);

  const SimState& state() const { return state_; }
  const TaskGoal& goal() const { return goal_; }
  const SimParams& params() const { return params_; }
  const EnvOptions& options() const { return options_; }
  const EpisodeTrace& trace() const { return trace_; }
  int steps() const { return steps_; }
  bool done() const { return termination_ != Termination::kRunning; }
  Termination termination() const { return termination_; }
  // Control authority is cut after the Dash line is crossed.
  bool control_cut() const { return control_cut_; }

 private:
  SimParams params_;
  EnvOptions options_;
  SimState state_;
  TaskGoal goal_;
  EpisodeTrace trace_;
  int steps_ = 0;
  bool control_cut_ = false;
  Termination termination_ = Termination::kRunning;
};

}  // namespace tt::sim

#endif  // TT_SIM_ENV_HPP_
