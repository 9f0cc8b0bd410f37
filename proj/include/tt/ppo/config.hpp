#ifndef TT_PPO_CONFIG_HPP_
#define TT_PPO_CONFIG_HPP_

#include <cstdint>
#include <vector>

#include "tt/num/nn.hpp"

namespace tt::ppo {

struct PpoConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip = 0.2;
  int epochs = 4;
  int minibatches = 8;
  double value_coef = 0.5;
  double entropy_coef = 0.005;
  int rollout_length = 64;  // T steps per env per iteration
  int envs = 64;            // N
  long long total_steps = 2'000'000;
  double policy_lr = 3e-4;
  double critic_lr = 1e-3;
  double max_grad_norm = 0.5;
  // Episodes cut by the time limit bootstrap from the critic's value of
  // their final state instead of treating it as zero.
  bool bootstrap_time_limit = true;
  int checkpoint_every = 0;  // iterations; 0 keeps only the final checkpoint

  // ConfigError outside 0 < gamma <= 1, 0 <= lambda <= 1, clip > 0 or for
  // non-positive sizes.
  void validate() const;
  long long steps_per_iteration() const {
    return static_cast<long long>(rollout_length) * envs;
  }
  int iterations() const;
  bool operator==(const PpoConfig&) const = default;
};

struct CriticConfig {
  std::vector<int> hidden{1024, 1024, 1024};
  num::Activation activation = num::Activation::kTanh;
  bool operator==(const CriticConfig&) const = default;
};

}  // namespace tt::ppo

#endif  // TT_PPO_CONFIG_HPP_
