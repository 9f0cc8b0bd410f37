#ifndef TT_PPO_TRAINER_HPP_
#define TT_PPO_TRAINER_HPP_

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

#include "tt/num/adam.hpp"
#include "tt/ppo/loss.hpp"
#include "tt/ppo/rollout.hpp"

namespace tt::ppo {

struct MetricsRow {
  int iteration = 0;
  long long env_steps = 0;
  // Percent of episodes finished during this iteration's collection that
  // met the task predicate; NaN when none finished.
  double success_rate = 0.0;
  double mean_reward = 0.0;  // per step
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  double approx_kl = 0.0;
};

void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const MetricsRow& row);
std::vector<MetricsRow> read_metrics_csv(std::istream& is);  // ConfigError on bad schema

// Every saved tensor of a policy and its critic.
std::vector<num::Parameter<float>*> checkpoint_parameters(adapter::Policy<float>& policy,
                                                          Critic<float>& critic);

struct TrainSetup {
  sim::Task task = sim::Task::kDirection;
  PpoConfig ppo;
  CriticConfig critic;
  sim::SimParams sim;
  sim::EnvOptions env;
  std::uint64_t seed = 0;
};

// PPO on one policy. The policy's trainable flags decide what moves; a
// prompt_only policy is rolled out for the metrics but never updated.
class Trainer {
 public:
  Trainer(adapter::Policy<float>& policy, const TrainSetup& setup);

  // One collect / advantage / update round.
  MetricsRow iterate();
  int iteration() const { return iteration_; }
  long long env_steps() const { return env_steps_; }
  long long optimizer_steps() const { return optimizer_steps_; }
  Critic<float>& critic() { return critic_; }
  adapter::Policy<float>& policy() { return policy_; }

 private:
  LossStats update(const RolloutBuffer& buf);

  adapter::Policy<float>& policy_;
  TrainSetup setup_;
  Critic<float> critic_;
  VecEnv envs_;
  std::mt19937_64 action_rng_;
  std::mt19937_64 shuffle_rng_;
  std::vector<num::Parameter<float>*> actor_params_;
  std::unique_ptr<num::Adam<float>> actor_opt_;
  std::unique_ptr<num::Adam<float>> critic_opt_;
  int iteration_ = 0;
  long long env_steps_ = 0;
  long long optimizer_steps_ = 0;
};

// Called after each iteration; return false to stop early.
using IterationHook = std::function<bool(Trainer&, const MetricsRow&)>;

struct TrainResult {
  std::vector<MetricsRow> metrics;
  long long env_steps = 0;
  long long optimizer_steps = 0;
};

// Runs iterations until ppo.total_steps is used up. Rows go to `csv` as
// they are produced. TrainingError on a non-finite loss.
TrainResult train(adapter::Policy<float>& policy, const TrainSetup& setup,
                  std::ostream* csv = nullptr, const IterationHook& hook = {});

}  // namespace tt::ppo

#endif  // TT_PPO_TRAINER_HPP_
