#ifndef TT_ADAPTER_TASK_ENCODER_HPP_
#define TT_ADAPTER_TASK_ENCODER_HPP_

#include <cstdint>
#include <vector>

#include "tt/num/nn.hpp"
#include "tt/sim/task.hpp"

namespace tt::adapter {

struct TaskEncoderConfig {
  std::vector<int> hidden{512, 512, 512};
  // Append base and hand positions in the episode-start frame to the input.
  bool use_current_pose = true;
  num::Activation activation = num::Activation::kTanh;

  void validate() const;
  bool operator==(const TaskEncoderConfig&) const = default;
};

int encoder_input_dim(sim::Task task, const TaskEncoderConfig& cfg);

// MLP from the egocentric goal observation (plus optional pose) to one
// d_model-wide token. The last layer starts at zero, so a fresh encoder emits
// the zero token. Parameters are named task_encoder.l<i>.{w,b}.
template <typename T>
class TaskEncoder {
 public:
  TaskEncoder(sim::Task task, const TaskEncoderConfig& cfg, int d_model, std::uint64_t seed);
  TaskEncoder(TaskEncoder&&) noexcept = default;
  TaskEncoder& operator=(TaskEncoder&&) noexcept = default;

  // goal: [B x goal_dim]; extra: [B x 4], ignored unless use_current_pose.
  // ConfigError on width mismatch.
  num::Var<T> forward(num::Tape<T>& tape, const num::Tensor<T>& goal,
                      const num::Tensor<T>& extra) const;

  sim::Task task() const { return task_; }
  const TaskEncoderConfig& config() const { return cfg_; }
  int input_dim() const { return mlp_.in_dim(); }
  int output_dim() const { return mlp_.out_dim(); }
  std::size_t parameter_count() const { return mlp_.parameter_count(); }
  num::ParamSet<T>& params() { return params_; }
  const num::ParamSet<T>& params() const { return params_; }

 private:
  sim::Task task_;
  TaskEncoderConfig cfg_;
  num::ParamSet<T> params_;
  num::Mlp<T> mlp_;
};

}  // namespace tt::adapter

#endif  // TT_ADAPTER_TASK_ENCODER_HPP_
