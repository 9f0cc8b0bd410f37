#ifndef TT_PPO_LOSS_HPP_
#define TT_PPO_LOSS_HPP_

#include "tt/num/gaussian.hpp"
#include "tt/ppo/config.hpp"

namespace tt::ppo {

struct LossStats {
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double total = 0.0;
  double clip_frac = 0.0;  // share of samples with |ratio - 1| > clip
  double approx_kl = 0.0;  // mean of (ratio - 1) - log ratio
};

template <typename T>
struct PpoLoss {
  num::Var<T> total;
  LossStats stats;
};

// Clipped surrogate plus value and entropy terms:
//   L = -mean(min(rho A, clip(rho, 1 - eps, 1 + eps) A))
//       + value_coef mean((V - R)^2) - entropy_coef H
// with rho = exp(new_logp - old_logp). new_logp and values are [B x 1],
// entropy is 1 x 1. TrainingError if the loss is not finite.
template <typename T>
PpoLoss<T> ppo_loss(num::Var<T> new_logp, const num::Tensor<T>& old_logp,
                    const num::Tensor<T>& advantages, num::Var<T> values,
                    const num::Tensor<T>& returns, num::Var<T> entropy, const PpoConfig& cfg);

}  // namespace tt::ppo

#endif  // TT_PPO_LOSS_HPP_
