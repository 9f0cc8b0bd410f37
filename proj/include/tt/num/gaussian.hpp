#ifndef TT_NUM_GAUSSIAN_HPP_
#define TT_NUM_GAUSSIAN_HPP_

#include "tt/num/ops.hpp"

namespace tt::num {

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Diagonal Gaussian with a state-independent log standard deviation shared
// across the batch. `log_std` is [1 x A] and already clamped.
template <typename T>
struct GaussianDist {
  Var<T> mean;     // [B x A]
  Var<T> log_std;  // [1 x A]

  int batch() const { return mean.rows(); }
  int action_dim() const { return mean.cols(); }
};

// Clamps the raw log-std into [kLogStdMin, kLogStdMax].
template <typename T>
GaussianDist<T> make_gaussian(Var<T> mean, Var<T> raw_log_std);

// Per-row log density: [B x 1]. Differentiable w.r.t. mean and log_std.
template <typename T>
Var<T> gaussian_log_prob(const GaussianDist<T>& dist, Var<T> action);

// Entropy of one sample's distribution as a 1 x 1 value.
template <typename T>
Var<T> gaussian_entropy(const GaussianDist<T>& dist);

// Draws mean + std * N(0, 1) for every row (no tape involvement).
template <typename T>
Tensor<T> gaussian_sample(const GaussianDist<T>& dist, Rng& rng);

}  // namespace tt::num

#endif  // TT_NUM_GAUSSIAN_HPP_
