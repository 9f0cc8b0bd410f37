#ifndef TT_EVAL_EVALUATE_HPP_
#define TT_EVAL_EVALUATE_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tt/adapter/policy.hpp"
#include "tt/sim/env.hpp"

namespace tt::eval {

struct EvalOptions {
  int episodes = 256;
  int batch = 64;  // episodes stepped together
  sim::SimParams sim;
  sim::EnvOptions env;
  sim::SuccessThresholds thresholds;

  void validate() const;  // ConfigError
};

struct EpisodeRecord {
  bool success = false;
  sim::Termination termination = sim::Termination::kRunning;
  int steps = 0;
  double episode_return = 0.0;
  double mean_speed = 0.0;         // over the success window
  double mean_facing_error = 0.0;  // over the success window, radians
};

struct EvalResult {
  double success_rate = 0.0;  // percent of episodes
  std::vector<EpisodeRecord> episodes;
};

// Fills one action per running env. Envs passed in one call are distinct
// episodes stepped in lockstep.
using Controller =
    std::function<void(std::span<const sim::Env* const> envs, std::span<sim::Action> actions)>;

// Episode i is reset from make_stream(seed, i), so results do not depend on
// the batch size.
EvalResult evaluate(const Controller& controller, sim::Task task, std::uint64_t seed,
                    const EvalOptions& options);

// Deterministic evaluation: actions are the policy mean.
EvalResult evaluate(adapter::Policy<float>& policy, std::uint64_t seed,
                    const EvalOptions& options);

Controller mean_action_controller(adapter::Policy<float>& policy);

// Scripted pose tracker that walks the hand onto the Reach target.
Controller reach_expert_controller();

// Uniform actions in [-1, 1].
Controller random_controller(std::uint64_t seed);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample std; NaN for a single rate
};

// ConfigError on an empty list.
Summary seeds_summary(std::span<const double> rates);

// One training seed per entry; std is over seeds.
struct EvalReport {
  sim::Task task = sim::Task::kDirection;
  std::string mode;
  int episodes = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> rates;
  Summary summary;
};

EvalReport make_report(sim::Task task, std::string mode, int episodes,
                       std::vector<std::uint64_t> seeds, std::vector<double> rates);

void write_report_csv(std::ostream& os, const EvalReport& report);
EvalReport read_report_csv(std::istream& is);  // ConfigError on bad schema

}  // namespace tt::eval

#endif  // TT_EVAL_EVALUATE_HPP_
