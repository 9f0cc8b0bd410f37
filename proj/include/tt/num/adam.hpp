#ifndef TT_NUM_ADAM_HPP_
#define TT_NUM_ADAM_HPP_

#include <vector>

#include "tt/num/parameter.hpp"

namespace tt::num {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adaptive-moment optimizer. Parameters with trainable == false are never
// written, whatever their gradient holds.
template <typename T>
class Adam {
 public:
  Adam(std::vector<Parameter<T>*> params, AdamConfig cfg = {});

  void step();
  void zero_grad();
  long long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<Parameter<T>*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  AdamConfig cfg_;
  long long t_ = 0;
};

// Rescales the trainable gradients so their joint L2 norm is at most
// `max_norm`. Returns the norm before clipping.
template <typename T>
double clip_grad_norm(const std::vector<Parameter<T>*>& params, double max_norm);

}  // namespace tt::num

#endif  // TT_NUM_ADAM_HPP_
