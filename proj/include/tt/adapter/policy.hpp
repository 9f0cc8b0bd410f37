#ifndef TT_ADAPTER_POLICY_HPP_
#define TT_ADAPTER_POLICY_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tt/adapter/prompt.hpp"
#include "tt/adapter/task_encoder.hpp"
#include "tt/bfm/model.hpp"
#include "tt/num/gaussian.hpp"

namespace tt::adapter {

enum class Mode {
  kTaskTokens,    // learned task token into the frozen model
  kFullFinetune,  // task token plus every model weight
  kPurePpo,       // plain MLP actor, no pretrained model
  kPromptOnly,    // frozen model driven by prior tokens alone, no training
};

Mode parse_mode(std::string_view name);  // ConfigError
std::string mode_name(Mode mode);

// Everything a policy or critic reads at one control step.
struct Observation {
  std::array<double, sim::kProprioDim> proprio{};
  std::vector<double> goal;
  std::array<double, sim::kProprioExtraDim> extra{};
  std::vector<std::optional<bfm::PoseGoal>> priors;  // one per prompt prior
};

Observation observe(const sim::SimState& state, const sim::TaskGoal& goal,
                    const sim::SimParams& params, const PromptSpec& prompt);

struct ActorConfig {
  std::vector<int> hidden{512, 512, 512};
  num::Activation activation = num::Activation::kTanh;
  double log_std_init = -1.0;
  bool operator==(const ActorConfig&) const = default;
};

// Batched observation tensors.
template <typename T>
struct ObservationBatch {
  num::Tensor<T> proprio;  // [B x 13]
  num::Tensor<T> goal;     // [B x goal_dim]
  num::Tensor<T> extra;    // [B x 4]
};

template <typename T>
ObservationBatch<T> pack_observations(std::span<const Observation> obs);

// Token sequence fed to the trunk: prior tokens ++ [task token] ++ [state].
// Inactive priors stay in their slot but are masked out.
template <typename T>
struct TokenSet {
  std::vector<num::Var<T>> slots;
  num::TokenMask mask;
};

template <typename T>
TokenSet<T> assemble_tokens(bfm::Bfm<T>& model, num::Tape<T>& tape,
                            std::span<const Observation> obs,
                            const std::optional<num::Var<T>>& task_token,
                            const std::vector<PriorToken>& priors,
                            const ObservationBatch<T>& batch);

// The actor for one mode. Token modes own a behavior model (and, except
// prompt_only, a task encoder); pure_ppo owns an MLP actor with its own
// log-std. The trainable flags on the owned parameters are set by mode.
template <typename T>
class Policy {
 public:
  // task_tokens, full_finetune, prompt_only.
  Policy(Mode mode, sim::Task task, bfm::Bfm<T> model, const TaskEncoderConfig& encoder,
         PromptSpec prompt, std::uint64_t seed);
  // pure_ppo.
  Policy(sim::Task task, const ActorConfig& actor, std::uint64_t seed);

  Policy(Policy&&) noexcept = default;
  Policy& operator=(Policy&&) noexcept = default;

  num::GaussianDist<T> forward(num::Tape<T>& tape, std::span<const Observation> obs);
  // The task token alone ([B x d_model]); ContractError without an encoder.
  num::Var<T> task_token(num::Tape<T>& tape, std::span<const Observation> obs);

  Mode mode() const { return mode_; }
  sim::Task task() const { return task_; }
  const PromptSpec& prompt() const { return prompt_; }

  bfm::Bfm<T>* model() { return model_ ? model_.get() : nullptr; }
  const bfm::Bfm<T>* model() const { return model_ ? model_.get() : nullptr; }
  TaskEncoder<T>* encoder() { return encoder_ ? encoder_.get() : nullptr; }
  const TaskEncoder<T>* encoder() const { return encoder_ ? encoder_.get() : nullptr; }
  num::ParamSet<T>* actor_params() { return actor_ ? &actor_->params : nullptr; }

  // Every owned parameter, model first.
  std::vector<num::Parameter<T>*> all_parameters();
  // The owned parameters with trainable == true.
  std::vector<num::Parameter<T>*> trainable_parameters();

 private:
  struct Actor {
    num::ParamSet<T> params;
    num::Mlp<T> mlp;
    num::Parameter<T>* log_std = nullptr;
  };

  Mode mode_;
  sim::Task task_;
  PromptSpec prompt_;
  std::unique_ptr<bfm::Bfm<T>> model_;
  std::unique_ptr<TaskEncoder<T>> encoder_;
  std::unique_ptr<Actor> actor_;
};

// Loads the pretrained model a token policy needs. ConfigError when the path
// is empty or missing; checkpoint errors otherwise propagate.
bfm::Bfm<float> load_pretrained(const std::filesystem::path& path,
                                const bfm::BfmConfig* expected = nullptr);

struct TrainableSet {
  Mode mode = Mode::kTaskTokens;
  std::vector<std::string> names;
  std::size_t count = 0;
};

// Enumerates the trainable parameters `mode` would give a policy built from
// these configs. Counts are exact scalar totals.
TrainableSet trainable_parameters(Mode mode, sim::Task task, const bfm::BfmConfig& model,
                                  const TaskEncoderConfig& encoder, const ActorConfig& actor);

template <typename T>
TrainableSet trainable_set(Policy<T>& policy);

}  // namespace tt::adapter

#endif  // TT_ADAPTER_POLICY_HPP_
