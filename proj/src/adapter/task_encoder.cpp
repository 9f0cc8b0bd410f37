#include "tt/adapter/task_encoder.hpp"

namespace tt::adapter {

void TaskEncoderConfig::validate() const {
  for (int h : hidden) {
    if (h <= 0) throw ConfigError("task encoder: hidden widths must be positive");
  }
}

int encoder_input_dim(sim::Task task, const TaskEncoderConfig& cfg) {
  return sim::goal_dim(task) + (cfg.use_current_pose ? sim::kProprioExtraDim : 0);
}

template <typename T>
TaskEncoder<T>::TaskEncoder(sim::Task task, const TaskEncoderConfig& cfg, int d_model,
                            std::uint64_t seed)
    : task_(task), cfg_(cfg) {
  cfg_.validate();
  if (d_model <= 0) throw ConfigError("task encoder: output width must be positive");
  num::Rng rng(seed);
  mlp_ = num::Mlp<T>(params_, "task_encoder", encoder_input_dim(task, cfg_), cfg_.hidden,
                     d_model, cfg_.activation, num::Activation::kIdentity, rng, 0.0);
}

template <typename T>
num::Var<T> TaskEncoder<T>::forward(num::Tape<T>& tape, const num::Tensor<T>& goal,
                                    const num::Tensor<T>& extra) const {
  const int gd = sim::goal_dim(task_);
  if (goal.cols() != gd) {
    throw ConfigError("task encoder for " + sim::task_name(task_) + " expects " +
                      std::to_string(gd) + " goal features, got " +
                      std::to_string(goal.cols()));
  }
  num::Var<T> x = tape.constant(goal);
  if (cfg_.use_current_pose) {
    if (extra.cols() != sim::kProprioExtraDim || extra.rows() != goal.rows()) {
      throw ConfigError("task encoder expects [" + std::to_string(goal.rows()) + " x " +
                        std::to_string(sim::kProprioExtraDim) + "] pose features, got " +
                        extra.shape_string());
    }
    x = num::concat_cols<T>({x, tape.constant(extra)});
  }
  return mlp_.forward(tape, x);
}

template class TaskEncoder<float>;
template class TaskEncoder<double>;

}  // namespace tt::adapter
