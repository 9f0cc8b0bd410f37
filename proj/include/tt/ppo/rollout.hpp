#ifndef TT_PPO_ROLLOUT_HPP_
#define TT_PPO_ROLLOUT_HPP_

#include <cstdint>
#include <random>
#include <vector>

#include "tt/adapter/policy.hpp"
#include "tt/ppo/config.hpp"
#include "tt/sim/env.hpp"

namespace tt::ppo {

// Goal-conditioned value function on proprio ++ goal observation.
template <typename T>
class Critic {
 public:
  Critic(sim::Task task, const CriticConfig& cfg, std::uint64_t seed);
  Critic(Critic&&) noexcept = default;
  Critic& operator=(Critic&&) noexcept = default;

  // [B x 1].
  num::Var<T> forward(num::Tape<T>& tape, const adapter::ObservationBatch<T>& obs) const;

  num::ParamSet<T>& params() { return params_; }
  const num::ParamSet<T>& params() const { return params_; }

 private:
  num::ParamSet<T> params_;
  num::Mlp<T> mlp_;
};

// N environments of one task, each reset from its own seeded stream.
class VecEnv {
 public:
  VecEnv(sim::Task task, int n, const sim::SimParams& params, const sim::EnvOptions& options,
         std::uint64_t seed);

  int size() const { return static_cast<int>(envs_.size()); }
  sim::Task task() const { return task_; }
  sim::Env& operator[](int i) { return envs_[static_cast<std::size_t>(i)]; }
  const sim::Env& operator[](int i) const { return envs_[static_cast<std::size_t>(i)]; }
  void reset(int i);

 private:
  sim::Task task_;
  std::vector<sim::Env> envs_;
  std::vector<std::mt19937_64> rngs_;
};

struct EpisodeStats {
  int episodes = 0;
  int successes = 0;
  double return_sum = 0.0;
};

// Transitions stored step-major: entry t * N + e.
struct RolloutBuffer {
  int envs = 0;
  int steps = 0;
  std::vector<adapter::Observation> obs;
  std::vector<sim::Action> actions;  // as sampled, before clamping
  std::vector<double> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<double> values;  // (T + 1) * N; the last N are bootstrap values
  std::vector<double> log_probs;
  double reward_sum = 0.0;  // environment rewards only, without bootstrap terms
  EpisodeStats episodes;

  std::size_t size() const { return actions.size(); }
};

// Steps every env T times with actions sampled from `policy`. Finished
// episodes reset in place. SimulationError names the failing env.
RolloutBuffer collect_rollouts(adapter::Policy<float>& policy, Critic<float>& critic,
                               VecEnv& envs, int steps, const PpoConfig& cfg,
                               std::mt19937_64& rng);

}  // namespace tt::ppo

#endif  // TT_PPO_ROLLOUT_HPP_
