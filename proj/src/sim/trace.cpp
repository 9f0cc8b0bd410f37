#include "tt/sim/trace.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "tt/error.hpp"
#include "tt/sim/physics.hpp"

namespace tt::sim {

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::kRunning: return "running";
    case Termination::kTimeLimit: return "time_limit";
    case Termination::kOutOfArena: return "out_of_arena";
    case Termination::kBlockFallen: return "block_fallen";
    case Termination::kCoastEnded: return "coast_ended";
    case Termination::kLeftCorridor: return "left_corridor";
  }
  return "unknown";
}

WindowStats measure_window(const EpisodeTrace& trace, const TaskGoal& goal,
                           const SimParams& params) {
  WindowStats st;
  const int n = static_cast<int>(trace.steps.size());
  const int w = std::min(trace.window, n);
  st.window_steps = w;
  const Vec2 facing_ref = goal.task == Task::kSteering ? goal.facing : goal.direction;
  for (int k = n - w; k < n; ++k) {
    const SimState& prev = k == 0 ? trace.initial : trace.steps[k - 1].state;
    const SimState& next = trace.steps[k].state;
    const double dt = static_cast<double>(next.ticks - prev.ticks) * params.dt_sim;
    st.mean_speed += (next.pos - prev.pos).dot(goal.direction) / dt;
    st.mean_facing_error += facing_error(next, facing_ref);
  }
  if (w > 0) {
    st.mean_speed /= w;
    st.mean_facing_error /= w;
  }
  st.min_hand_distance = std::numeric_limits<double>::infinity();
  auto visit = [&](const SimState& s) {
    st.min_hand_distance =
        std::min(st.min_hand_distance, (hand_position(s, params) - goal.target).norm());
    st.block_fallen = st.block_fallen || (s.block && s.block->fallen);
  };
  visit(trace.initial);
  for (const TraceStep& step : trace.steps) visit(step.state);
  st.coast_distance = dash_progress(trace.final_state(), goal);
  return st;
}

bool success_from_stats(const WindowStats& st, Termination term, const TaskGoal& goal,
                        const SuccessThresholds& th) {
  const bool speed_ok = term == Termination::kTimeLimit && st.window_steps > 0 &&
                        std::abs(st.mean_speed - goal.speed) <= th.speed_band * goal.speed;
  switch (goal.task) {
    case Task::kDirection: return speed_ok;
    case Task::kSteering: return speed_ok && st.mean_facing_error <= th.facing;
    case Task::kReach: return st.min_hand_distance <= th.reach;
    case Task::kStrike: return st.block_fallen;
    case Task::kDash: return st.coast_distance > th.coast;
  }
  return false;
}

bool task_success(const EpisodeTrace& trace, const TaskGoal& goal, const SimParams& params,
                  const SuccessThresholds& th) {
  if (!trace.complete()) throw ContractError("task_success: episode trace is incomplete");
  return success_from_stats(measure_window(trace, goal, params), trace.termination, goal, th);
}

void write_trace_csv(std::ostream& os, const EpisodeTrace& trace, const SimParams& params) {
  os << "time,x,y,theta,vx,vy,omega,q1,q2,dq1,dq2,block_tilt,block_fallen,"
        "a0,a1,a2,a3,a4,reward\n";
  os.precision(17);
  for (const TraceStep& st : trace.steps) {
    const SimState& s = st.state;
    os << s.time(params) << ',' << s.pos.x << ',' << s.pos.y << ',' << s.theta << ','
       << s.vel.x << ',' << s.vel.y << ',' << s.omega << ',' << s.q1 << ',' << s.q2 << ','
       << s.dq1 << ',' << s.dq2 << ',' << (s.block ? s.block->tilt : 0.0) << ','
       << (s.block && s.block->fallen ? 1 : 0);
    for (double a : st.action) os << ',' << a;
    os << ',' << st.reward << '\n';
  }
}

}  // namespace tt::sim
