#include "tt/ppo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "tt/error.hpp"
#include "tt/ppo/gae.hpp"

namespace tt::ppo {

namespace {

constexpr const char* kMetricsHeader =
    "iteration,env_steps,success_rate,mean_reward,policy_loss,value_loss,entropy,clip_frac,"
    "approx_kl";

enum Stream : std::uint64_t { kCritic = 11, kEnvs = 12, kActions = 13, kShuffle = 14 };

std::vector<num::Parameter<float>*> pointers(num::ParamSet<float>& ps) { return ps.pointers(); }

}  // namespace

void write_metrics_header(std::ostream& os) { os << kMetricsHeader << '\n'; }

void write_metrics_row(std::ostream& os, const MetricsRow& r) {
  std::ostringstream line;
  line << std::setprecision(9) << r.iteration << ',' << r.env_steps << ',' << r.success_rate
       << ',' << r.mean_reward << ',' << r.policy_loss << ',' << r.value_loss << ','
       << r.entropy << ',' << r.clip_frac << ',' << r.approx_kl << '\n';
  os << line.str();
}

std::vector<MetricsRow> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kMetricsHeader) {
    throw ConfigError("metrics csv: unexpected header '" + line + "'");
  }
  std::vector<MetricsRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw ConfigError("metrics csv: expected 9 columns in '" + line + "'");
    try {
      MetricsRow r;
      r.iteration = std::stoi(cells[0]);
      r.env_steps = std::stoll(cells[1]);
      r.success_rate = std::stod(cells[2]);
      r.mean_reward = std::stod(cells[3]);
      r.policy_loss = std::stod(cells[4]);
      r.value_loss = std::stod(cells[5]);
      r.entropy = std::stod(cells[6]);
      r.clip_frac = std::stod(cells[7]);
      r.approx_kl = std::stod(cells[8]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ConfigError("metrics csv: unparseable row '" + line + "'");
    }
  }
  return rows;
}

std::vector<num::Parameter<float>*> checkpoint_parameters(adapter::Policy<float>& policy,
                                                          Critic<float>& critic) {
  std::vector<num::Parameter<float>*> out = policy.all_parameters();
  for (auto* p : critic.params().pointers()) out.push_back(p);
  return out;
}

Trainer::Trainer(adapter::Policy<float>& policy, const TrainSetup& setup)
    : policy_(policy),
      setup_(setup),
      critic_(setup.task, setup.critic, num::make_stream(setup.seed, kCritic)()),
      envs_(setup.task, setup.ppo.envs, setup.sim, setup.env,
            num::make_stream(setup.seed, kEnvs)()),
      action_rng_(num::make_stream(setup.seed, kActions)),
      shuffle_rng_(num::make_stream(setup.seed, kShuffle)) {
  setup_.ppo.validate();
  if (policy.task() != setup.task) {
    throw ConfigError("policy was built for " + sim::task_name(policy.task()) +
                      ", training task is " + sim::task_name(setup.task));
  }
  if (policy.mode() != adapter::Mode::kPromptOnly) {
    actor_params_ = policy.trainable_parameters();
    if (!actor_params_.empty()) {
      actor_opt_ = std::make_unique<num::Adam<float>>(actor_params_,
                                                      num::AdamConfig{setup_.ppo.policy_lr});
    }
    critic_opt_ = std::make_unique<num::Adam<float>>(pointers(critic_.params()),
                                                     num::AdamConfig{setup_.ppo.critic_lr});
  }
}

MetricsRow Trainer::iterate() {
  const PpoConfig& cfg = setup_.ppo;
  const RolloutBuffer buf =
      collect_rollouts(policy_, critic_, envs_, cfg.rollout_length, cfg, action_rng_);
  env_steps_ += static_cast<long long>(buf.size());
  ++iteration_;

  MetricsRow row;
  row.iteration = iteration_;
  row.env_steps = env_steps_;
  row.success_rate = buf.episodes.episodes > 0
                         ? 100.0 * buf.episodes.successes / buf.episodes.episodes
                         : std::numeric_limits<double>::quiet_NaN();
  row.mean_reward = buf.reward_sum / static_cast<double>(buf.size());
  if (critic_opt_) {
    const LossStats s = update(buf);
    row.policy_loss = s.policy;
    row.value_loss = s.value;
    row.entropy = s.entropy;
    row.clip_frac = s.clip_frac;
    row.approx_kl = s.approx_kl;
  }
  return row;
}

LossStats Trainer::update(const RolloutBuffer& buf) {
  const PpoConfig& cfg = setup_.ppo;
  const int n = buf.envs;
  const int steps = buf.steps;
  const std::size_t total = buf.size();

  std::vector<double> adv(total);
  std::vector<double> ret(total);
  {
    std::vector<double> r(steps), v(steps + 1);
    std::vector<std::uint8_t> d(steps);
    for (int e = 0; e < n; ++e) {
      for (int t = 0; t < steps; ++t) {
        const std::size_t i = static_cast<std::size_t>(t) * n + e;
        r[t] = buf.rewards[i];
        v[t] = buf.values[i];
        d[t] = buf.dones[i];
      }
      v[steps] = buf.values[static_cast<std::size_t>(steps) * n + e];
      const GaeResult g = compute_gae(r, v, d, cfg.gamma, cfg.lambda);
      for (int t = 0; t < steps; ++t) {
        const std::size_t i = static_cast<std::size_t>(t) * n + e;
        adv[i] = g.advantages[t];
        ret[i] = g.returns[t];
      }
    }
  }
  const std::vector<double> adv_norm = normalize_advantages(adv);

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t mb = total / static_cast<std::size_t>(cfg.minibatches);
  auto critic_params = pointers(critic_.params());

  LossStats sum;
  int count = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng_);
    for (int m = 0; m < cfg.minibatches; ++m) {
      const std::size_t begin = static_cast<std::size_t>(m) * mb;
      const int rows = static_cast<int>(mb);
      std::vector<adapter::Observation> obs;
      obs.reserve(mb);
      num::Tensor<float> act({rows, sim::kActionDim});
      num::Tensor<float> old_lp({rows, 1});
      num::Tensor<float> a({rows, 1});
      num::Tensor<float> r({rows, 1});
      for (int k = 0; k < rows; ++k) {
        const std::size_t i = order[begin + static_cast<std::size_t>(k)];
        obs.push_back(buf.obs[i]);
        for (int c = 0; c < sim::kActionDim; ++c) {
          act.at(k, c) = static_cast<float>(buf.actions[i][c]);
        }
        old_lp[k] = static_cast<float>(buf.log_probs[i]);
        a[k] = static_cast<float>(adv_norm[i]);
        r[k] = static_cast<float>(ret[i]);
      }

      if (actor_opt_) actor_opt_->zero_grad();
      critic_opt_->zero_grad();
      num::Tape<float> tape(num::GradMode::kTrainableOnly);
      const auto dist = policy_.forward(tape, obs);
      const auto new_lp = num::gaussian_log_prob(dist, tape.constant(act));
      const auto values = critic_.forward(tape, adapter::pack_observations<float>(obs));
      const PpoLoss<float> loss =
          ppo_loss(new_lp, old_lp, a, values, r, num::gaussian_entropy(dist), cfg);
      tape.backward(loss.total);
      if (actor_opt_) {
        num::clip_grad_norm(actor_params_, cfg.max_grad_norm);
        actor_opt_->step();
      }
      num::clip_grad_norm(critic_params, cfg.max_grad_norm);
      critic_opt_->step();
      ++optimizer_steps_;

      sum.policy += loss.stats.policy;
      sum.value += loss.stats.value;
      sum.entropy += loss.stats.entropy;
      sum.total += loss.stats.total;
      sum.clip_frac += loss.stats.clip_frac;
      sum.approx_kl += loss.stats.approx_kl;
      ++count;
    }
  }
  const double k = count > 0 ? 1.0 / count : 0.0;
  return {sum.policy * k, sum.value * k, sum.entropy * k, sum.total * k, sum.clip_frac * k,
          sum.approx_kl * k};
}

TrainResult train(adapter::Policy<float>& policy, const TrainSetup& setup, std::ostream* csv,
                  const IterationHook& hook) {
  Trainer trainer(policy, setup);
  TrainResult result;
  if (csv) write_metrics_header(*csv);
  const int iterations = setup.ppo.iterations();
  for (int it = 0; it < iterations; ++it) {
    const MetricsRow row = trainer.iterate();
    result.metrics.push_back(row);
    if (csv) {
      write_metrics_row(*csv, row);
      csv->flush();
    }
    if (hook && !hook(trainer, row)) break;
  }
  result.env_steps = trainer.env_steps();
  result.optimizer_steps = trainer.optimizer_steps();
  return result;
}

}  // namespace tt::ppo
