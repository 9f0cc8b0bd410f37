#include "tt/adapter/policy.hpp"

#include "tt/bfm/checkpoint.hpp"
#include "tt/error.hpp"

namespace tt::adapter {

using num::Tensor;
using num::Var;

Mode parse_mode(std::string_view name) {
  if (name == "task_tokens") return Mode::kTaskTokens;
  if (name == "full_finetune") return Mode::kFullFinetune;
  if (name == "pure_ppo") return Mode::kPurePpo;
  if (name == "prompt_only") return Mode::kPromptOnly;
  throw ConfigError("unknown training mode '" + std::string(name) + "'");
}

std::string mode_name(Mode mode) {
  switch (mode) {
    case Mode::kTaskTokens: return "task_tokens";
    case Mode::kFullFinetune: return "full_finetune";
    case Mode::kPurePpo: return "pure_ppo";
    case Mode::kPromptOnly: return "prompt_only";
  }
  return "?";
}

Observation observe(const sim::SimState& state, const sim::TaskGoal& goal,
                    const sim::SimParams& params, const PromptSpec& prompt) {
  Observation o;
  const auto p = sim::proprio(state, params);
  std::copy(p.begin(), p.end(), o.proprio.begin());
  o.goal = sim::goal_observation(state, goal);
  const auto e = sim::proprio_extra(state, goal, params);
  std::copy(e.begin(), e.end(), o.extra.begin());
  o.priors.reserve(prompt.priors.size());
  for (const PriorToken& prior : prompt.priors) {
    o.priors.push_back(prior_goal(prior, state, goal));
  }
  return o;
}

template <typename T>
ObservationBatch<T> pack_observations(std::span<const Observation> obs) {
  if (obs.empty()) throw ContractError("pack_observations: empty batch");
  const int n = static_cast<int>(obs.size());
  const int gd = static_cast<int>(obs[0].goal.size());
  ObservationBatch<T> b{Tensor<T>({n, sim::kProprioDim}), Tensor<T>({n, gd}),
                        Tensor<T>({n, sim::kProprioExtraDim})};
  for (int r = 0; r < n; ++r) {
    const Observation& o = obs[r];
    if (static_cast<int>(o.goal.size()) != gd) {
      throw DimensionError("pack_observations: goal widths differ within a batch");
    }
    for (int c = 0; c < sim::kProprioDim; ++c) b.proprio.at(r, c) = static_cast<T>(o.proprio[c]);
    for (int c = 0; c < gd; ++c) b.goal.at(r, c) = static_cast<T>(o.goal[c]);
    for (int c = 0; c < sim::kProprioExtraDim; ++c) b.extra.at(r, c) = static_cast<T>(o.extra[c]);
  }
  return b;
}

template <typename T>
TokenSet<T> assemble_tokens(bfm::Bfm<T>& model, num::Tape<T>& tape,
                            std::span<const Observation> obs,
                            const std::optional<Var<T>>& task_token,
                            const std::vector<PriorToken>& priors,
                            const ObservationBatch<T>& batch) {
  const int n = static_cast<int>(obs.size());
  const int np = static_cast<int>(priors.size());
  const int slots = np + (task_token ? 1 : 0) + 1;
  TokenSet<T> out;
  out.mask = num::TokenMask::all(n, slots);
  for (int j = 0; j < np; ++j) {
    Tensor<T> features({n, bfm::kPoseFeatureDim});
    std::vector<int> k(n, bfm::lookahead_index(priors[j].k));
    for (int r = 0; r < n; ++r) {
      if (static_cast<int>(obs[r].priors.size()) != np) {
        throw ContractError("observation carries " + std::to_string(obs[r].priors.size()) +
                            " priors, prompt has " + std::to_string(np));
      }
      const auto& g = obs[r].priors[j];
      if (!g) {
        out.mask.present[static_cast<std::size_t>(r) * slots + j] = 0;
        continue;
      }
      const auto f = bfm::pose_features(*g);
      for (int c = 0; c < bfm::kPoseFeatureDim; ++c) features.at(r, c) = static_cast<T>(f[c]);
      k[r] = bfm::lookahead_index(g->k);
    }
    out.slots.push_back(model.encode_pose(tape, features, k));
  }
  if (task_token) out.slots.push_back(*task_token);
  out.slots.push_back(model.encode_state(tape, batch.proprio));
  return out;
}

template <typename T>
Policy<T>::Policy(Mode mode, sim::Task task, bfm::Bfm<T> model,
                  const TaskEncoderConfig& encoder, PromptSpec prompt, std::uint64_t seed)
    : mode_(mode), task_(task), prompt_(std::move(prompt)) {
  if (mode == Mode::kPurePpo) {
    throw ConfigError("pure_ppo policies do not use a behavior model");
  }
  prompt_.validate(task);
  model_ = std::make_unique<bfm::Bfm<T>>(std::move(model));
  model_->params().set_trainable(mode == Mode::kFullFinetune);
  if (mode != Mode::kPromptOnly) {
    encoder_ = std::make_unique<TaskEncoder<T>>(task, encoder, model_->config().d_model, seed);
  }
}

template <typename T>
Policy<T>::Policy(sim::Task task, const ActorConfig& actor, std::uint64_t seed)
    : mode_(Mode::kPurePpo), task_(task) {
  num::Rng rng(seed);
  actor_ = std::make_unique<Actor>();
  actor_->mlp = num::Mlp<T>(actor_->params, "actor",
                            sim::kProprioDim + sim::goal_dim(task), actor.hidden,
                            sim::kActionDim, actor.activation, num::Activation::kIdentity,
                            rng, 0.01);
  actor_->log_std = &actor_->params.add(
      "actor.log_std", Tensor<T>({sim::kActionDim}, static_cast<T>(actor.log_std_init)));
}

template <typename T>
Var<T> Policy<T>::task_token(num::Tape<T>& tape, std::span<const Observation> obs) {
  if (!encoder_) throw ContractError(mode_name(mode_) + " policy has no task encoder");
  const ObservationBatch<T> b = pack_observations<T>(obs);
  return encoder_->forward(tape, b.goal, b.extra);
}

template <typename T>
num::GaussianDist<T> Policy<T>::forward(num::Tape<T>& tape, std::span<const Observation> obs) {
  const ObservationBatch<T> b = pack_observations<T>(obs);
  if (actor_) {
    const Var<T> x = num::concat_cols<T>({tape.constant(b.proprio), tape.constant(b.goal)});
    return num::make_gaussian(actor_->mlp.forward(tape, x), tape.parameter(*actor_->log_std));
  }
  std::optional<Var<T>> tau;
  if (encoder_) tau = encoder_->forward(tape, b.goal, b.extra);
  const TokenSet<T> tokens = assemble_tokens(*model_, tape, obs, tau, prompt_.priors, b);
  return model_->trunk(tape, tokens.slots, tokens.mask);
}

template <typename T>
std::vector<num::Parameter<T>*> Policy<T>::all_parameters() {
  std::vector<num::Parameter<T>*> out;
  auto append = [&](num::ParamSet<T>& ps) {
    for (auto* p : ps.pointers()) out.push_back(p);
  };
  if (model_) append(model_->params());
  if (encoder_) append(encoder_->params());
  if (actor_) append(actor_->params);
  return out;
}

template <typename T>
std::vector<num::Parameter<T>*> Policy<T>::trainable_parameters() {
  std::vector<num::Parameter<T>*> out;
  for (auto* p : all_parameters()) {
    if (p->trainable) out.push_back(p);
  }
  return out;
}

template <typename T>
TrainableSet trainable_set(Policy<T>& policy) {
  TrainableSet s;
  s.mode = policy.mode();
  // prompt_only never trains, whatever the flags say.
  if (policy.mode() == Mode::kPromptOnly) return s;
  for (auto* p : policy.trainable_parameters()) {
    s.names.push_back(p->name);
    s.count += p->value.size();
  }
  return s;
}

bfm::Bfm<float> load_pretrained(const std::filesystem::path& path,
                                const bfm::BfmConfig* expected) {
  if (path.empty()) throw ConfigError("no pretrained model checkpoint configured");
  if (!std::filesystem::exists(path)) {
    throw ConfigError("pretrained model checkpoint not found: " + path.string());
  }
  return bfm::load_bfm(path, expected);
}

TrainableSet trainable_parameters(Mode mode, sim::Task task, const bfm::BfmConfig& model,
                                  const TaskEncoderConfig& encoder, const ActorConfig& actor) {
  if (mode == Mode::kPurePpo) {
    Policy<float> p(task, actor, 0);
    return trainable_set(p);
  }
  Policy<float> p(mode, task, bfm::Bfm<float>(model, 0), encoder, PromptSpec{}, 0);
  return trainable_set(p);
}

#define TT_INSTANTIATE(T)                                                                  \
  template ObservationBatch<T> pack_observations<T>(std::span<const Observation>);        \
  template TokenSet<T> assemble_tokens<T>(bfm::Bfm<T>&, num::Tape<T>&,                     \
                                          std::span<const Observation>,                    \
                                          const std::optional<Var<T>>&,                    \
                                          const std::vector<PriorToken>&,                  \
                                          const ObservationBatch<T>&);                     \
  template class Policy<T>;                                                                \
  template TrainableSet trainable_set<T>(Policy<T>&);

TT_INSTANTIATE(float)
TT_INSTANTIATE(double)

#undef TT_INSTANTIATE

}  // namespace tt::adapter
