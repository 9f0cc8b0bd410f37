#include "tt/ppo/rollout.hpp"

#include "tt/error.hpp"

namespace tt::ppo {

template <typename T>
Critic<T>::Critic(sim::Task task, const CriticConfig& cfg, std::uint64_t seed) {
  num::Rng rng(seed);
  mlp_ = num::Mlp<T>(params_, "critic", sim::kProprioDim + sim::goal_dim(task), cfg.hidden, 1,
                     cfg.activation, num::Activation::kIdentity, rng);
}

template <typename T>
num::Var<T> Critic<T>::forward(num::Tape<T>& tape, const adapter::ObservationBatch<T>& obs) const {
  return mlp_.forward(tape,
                      num::concat_cols<T>({tape.constant(obs.proprio), tape.constant(obs.goal)}));
}

template class Critic<float>;
template class Critic<double>;

VecEnv::VecEnv(sim::Task task, int n, const sim::SimParams& params,
               const sim::EnvOptions& options, std::uint64_t seed)
    : task_(task) {
  if (n < 1) throw ConfigError("VecEnv needs at least one environment");
  sim::EnvOptions opts = options;
  opts.record_trace = true;  // the success predicate reads the trace
  for (int i = 0; i < n; ++i) {
    envs_.emplace_back(params, opts);
    rngs_.push_back(num::make_stream(seed, static_cast<std::uint64_t>(i)));
    reset(i);
  }
}

void VecEnv::reset(int i) {
  envs_[static_cast<std::size_t>(i)].reset(task_, rngs_[static_cast<std::size_t>(i)]);
}

namespace {

std::vector<double> critic_values(Critic<float>& critic,
                                  std::span<const adapter::Observation> obs) {
  num::Tape<float> tape(num::GradMode::kNone);
  const num::Tensor<float>& v =
      critic.forward(tape, adapter::pack_observations<float>(obs)).value();
  return {v.values().begin(), v.values().end()};
}

}  // namespace

RolloutBuffer collect_rollouts(adapter::Policy<float>& policy, Critic<float>& critic,
                               VecEnv& envs, int steps, const PpoConfig& cfg,
                               std::mt19937_64& rng) {
  const int n = envs.size();
  RolloutBuffer buf;
  buf.envs = n;
  buf.steps = steps;
  const std::size_t cap = static_cast<std::size_t>(n) * steps;
  buf.obs.reserve(cap);
  buf.actions.reserve(cap);
  buf.rewards.reserve(cap);
  buf.dones.reserve(cap);
  buf.values.reserve(cap + n);
  buf.log_probs.reserve(cap);

  auto observe_all = [&] {
    std::vector<adapter::Observation> obs;
    obs.reserve(n);
    for (int e = 0; e < n; ++e) {
      obs.push_back(adapter::observe(envs[e].state(), envs[e].goal(), envs[e].params(),
                                     policy.prompt()));
    }
    return obs;
  };

  for (int t = 0; t < steps; ++t) {
    std::vector<adapter::Observation> obs = observe_all();
    num::Tensor<float> actions;
    num::Tensor<float> logp;
    {
      num::Tape<float> tape(num::GradMode::kNone);
      const auto dist = policy.forward(tape, obs);
      actions = num::gaussian_sample(dist, rng);
      logp = num::gaussian_log_prob(dist, tape.constant(actions)).value();
    }
    const std::vector<double> values = critic_values(critic, obs);

    std::vector<int> truncated;
    std::vector<adapter::Observation> final_obs;
    const std::size_t base = buf.rewards.size();
    for (int e = 0; e < n; ++e) {
      sim::Action a;
      for (int c = 0; c < sim::kActionDim; ++c) a[c] = actions.at(e, c);
      sim::StepOutcome out;
      try {
        out = envs[e].step(a);
      } catch (const SimulationError& err) {
        throw SimulationError("env " + std::to_string(e) + ": " + err.what());
      }
      buf.actions.push_back(a);
      buf.rewards.push_back(out.reward);
      buf.reward_sum += out.reward;
      buf.dones.push_back(out.done ? 1 : 0);
      buf.values.push_back(values[static_cast<std::size_t>(e)]);
      buf.log_probs.push_back(logp[static_cast<std::size_t>(e)]);
      if (out.done) {
        const sim::Env& env = envs[e];
        ++buf.episodes.episodes;
        if (sim::task_success(env.trace(), env.goal(), env.params())) ++buf.episodes.successes;
        for (const auto& s : env.trace().steps) buf.episodes.return_sum += s.reward;
        if (cfg.bootstrap_time_limit && out.termination == sim::Termination::kTimeLimit) {
          truncated.push_back(e);
          final_obs.push_back(adapter::observe(env.state(), env.goal(), env.params(),
                                               policy.prompt()));
        }
        envs.reset(e);
      }
    }
    if (!final_obs.empty()) {
      const std::vector<double> tail = critic_values(critic, final_obs);
      for (std::size_t i = 0; i < truncated.size(); ++i) {
        buf.rewards[base + static_cast<std::size_t>(truncated[i])] += cfg.gamma * tail[i];
      }
    }
    for (auto& o : obs) buf.obs.push_back(std::move(o));
  }
  const std::vector<double> last = critic_values(critic, observe_all());
  buf.values.insert(buf.values.end(), last.begin(), last.end());
  return buf;
}

}  // namespace tt::ppo
