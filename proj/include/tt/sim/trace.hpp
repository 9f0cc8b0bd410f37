#ifndef TT_SIM_TRACE_HPP_
#define TT_SIM_TRACE_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "tt/sim/task.hpp"
#include "tt/sim/types.hpp"

namespace tt::sim {

enum class Termination {
  kRunning,
  kTimeLimit,
  kOutOfArena,
  kBlockFallen,
  kCoastEnded,
  kLeftCorridor,
};

std::string termination_name(Termination t);

struct TraceStep {
  SimState state;  // state after the step
  Action action{};
  double reward = 0.0;
};

struct EpisodeTrace {
  SimState initial;
  std::vector<TraceStep> steps;
  Termination termination = Termination::kRunning;
  int window = 60;  // measurement window in control steps

  bool complete() const { return termination != Termination::kRunning; }
  const SimState& final_state() const {
    return steps.empty() ? initial : steps.back().state;
  }
};

struct WindowStats {
  int window_steps = 0;
  double mean_speed = 0.0;         // along the target direction
  double mean_facing_error = 0.0;  // radians; vs facing (Steering) or direction
  double min_hand_distance = 0.0;  // over the whole episode (Reach)
  bool block_fallen = false;
  double coast_distance = 0.0;     // past the Dash line at the end
};

WindowStats measure_window(const EpisodeTrace& trace, const TaskGoal& goal,
                           const SimParams& params);

struct SuccessThresholds {
  double speed_band = 0.2;  // relative
  double facing = std::numbers::pi / 4;
  double reach = 0.2;
  double coast = 1.5;
};

bool success_from_stats(const WindowStats& stats, Termination termination,
                        const TaskGoal& goal, const SuccessThresholds& th = {});

// ContractError if the trace is not complete.
bool task_success(const EpisodeTrace& trace, const TaskGoal& goal, const SimParams& params,
                  const SuccessThresholds& th = {});

// One row per control step: time, state fields, action, reward.
void write_trace_csv(std::ostream& os, const EpisodeTrace& trace, const SimParams& params);

}  // namespace tt::sim

#endif  // TT_SIM_TRACE_HPP_
