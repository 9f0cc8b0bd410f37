#include "tt/ppo/loss.hpp"

#include <cmath>

#include "tt/error.hpp"

namespace tt::ppo {

void PpoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("ppo: gamma must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("ppo: lambda must lie in [0, 1]");
  if (!(clip > 0.0)) throw ConfigError("ppo: clip must be positive");
  if (epochs < 1 || minibatches < 1 || rollout_length < 1 || envs < 1 || total_steps < 0 ||
      checkpoint_every < 0) {
    throw ConfigError("ppo: sizes must be positive");
  }
  if (static_cast<long long>(rollout_length) * envs < minibatches) {
    throw ConfigError("ppo: fewer samples per iteration than minibatches");
  }
  if (!(policy_lr > 0.0) || !(critic_lr > 0.0) || !(max_grad_norm > 0.0) ||
      value_coef < 0.0 || entropy_coef < 0.0) {
    throw ConfigError("ppo: learning rates and clip norm must be positive");
  }
}

int PpoConfig::iterations() const {
  const long long per = steps_per_iteration();
  return static_cast<int>((total_steps + per - 1) / per);
}

template <typename T>
PpoLoss<T> ppo_loss(num::Var<T> new_logp, const num::Tensor<T>& old_logp,
                    const num::Tensor<T>& advantages, num::Var<T> values,
                    const num::Tensor<T>& returns, num::Var<T> entropy, const PpoConfig& cfg) {
  num::Tape<T>& tape = *new_logp.tape;
  const T eps = static_cast<T>(cfg.clip);
  PpoLoss<T> out;
  try {
    const num::Var<T> ratio = num::exp(num::sub(new_logp, tape.constant(old_logp)));
    const num::Var<T> adv = tape.constant(advantages);
    const num::Var<T> surr1 = num::mul(ratio, adv);
    const num::Var<T> surr2 = num::mul(num::clamp(ratio, T(1) - eps, T(1) + eps), adv);
    const num::Var<T> policy = num::scale(num::mean(num::minimum(surr1, surr2)), T(-1));
    const num::Var<T> value = num::mean(num::square(num::sub(values, tape.constant(returns))));
    out.total = num::add(num::add(policy, num::scale(value, static_cast<T>(cfg.value_coef))),
                         num::scale(entropy, static_cast<T>(-cfg.entropy_coef)));
    out.stats.policy = policy.value()[0];
    out.stats.value = value.value()[0];
    out.stats.entropy = entropy.value()[0];
    out.stats.total = out.total.value()[0];
    const auto& r = ratio.value();
    double clipped = 0.0, kl = 0.0;
    for (T v : r.values()) {
      const double rv = static_cast<double>(v);
      if (std::abs(rv - 1.0) > cfg.clip) clipped += 1.0;
      kl += (rv - 1.0) - std::log(rv);
    }
    out.stats.clip_frac = clipped / static_cast<double>(r.size());
    out.stats.approx_kl = kl / static_cast<double>(r.size());
  } catch (const NumericError& e) {
    throw TrainingError(std::string("ppo loss is not finite: ") + e.what());
  }
  if (!std::isfinite(out.stats.total)) throw TrainingError("ppo loss is not finite");
  return out;
}

template PpoLoss<float> ppo_loss<float>(num::Var<float>, const num::Tensor<float>&,
                                        const num::Tensor<float>&, num::Var<float>,
                                        const num::Tensor<float>&, num::Var<float>,
                                        const PpoConfig&);
template PpoLoss<double> ppo_loss<double>(num::Var<double>, const num::Tensor<double>&,
                                          const num::Tensor<double>&, num::Var<double>,
                                          const num::Tensor<double>&, num::Var<double>,
                                          const PpoConfig&);

}  // namespace tt::ppo
