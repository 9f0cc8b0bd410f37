#include "tt/bfm/pretrain.hpp"

#include <cmath>
#include <memory>
#include <ostream>

#include "tt/num/adam.hpp"
#include "tt/sim/physics.hpp"
#include "tt/sim/task.hpp"

namespace tt::bfm {
namespace {

using num::Tensor;
using num::Var;

enum Stream : std::uint64_t { kEnvStream = 1, kBetaStream, kTrainStream, kValidStream, kInit };

struct Scene {
  sim::SimState state;
  PoseTarget target;
  int segment_left = 0;
  int age = 0;
};

void reset_scene(Scene& sc, std::mt19937_64& rng, const PretrainConfig& cfg) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  sc.state = sim::SimState{};
  sc.state.theta = std::numbers::pi * u(rng);
  sc.state.q1 = cfg.pose.q1_range * u(rng);
  sc.state.q2 = cfg.pose.q2_range * u(rng);
  sc.age = 0;
  sc.segment_left = 0;
}

void advance_target(Scene& sc, std::mt19937_64& rng, const PretrainConfig& cfg) {
  if (sc.segment_left > 0) return;
  sc.target = sample_pose_target(sc.state, rng, cfg.pose);
  sc.segment_left =
      std::uniform_int_distribution<int>(cfg.segment_min, cfg.segment_max)(rng);
}

std::array<float, kStateDim> proprio_row(const sim::SimState& s, const sim::SimParams& p) {
  const auto v = sim::proprio(s, p);
  std::array<float, kStateDim> out{};
  for (int i = 0; i < kStateDim; ++i) out[i] = static_cast<float>(v[i]);
  return out;
}

// Token inputs for a batch: optional pose slots followed by the state slot.
struct TokenBatch {
  Tensor<float> proprio;
  std::vector<Tensor<float>> pose;
  std::vector<std::vector<int>> k_index;
  num::TokenMask mask;
};

num::GaussianDist<float> run_trunk(Bfm<float>& model, num::Tape<float>& tape,
                                   const TokenBatch& b) {
  std::vector<Var<float>> slots;
  for (std::size_t j = 0; j < b.pose.size(); ++j) {
    slots.push_back(model.encode_pose(tape, b.pose[j], b.k_index[j]));
  }
  slots.push_back(model.encode_state(tape, b.proprio));
  return model.trunk(tape, slots, b.mask);
}

void set_pose_row(TokenBatch& b, int slot, int row, const PoseGoal& g) {
  const auto f = pose_features(g);
  for (int c = 0; c < kPoseFeatureDim; ++c) {
    b.pose[slot].at(row, c) = static_cast<float>(f[c]);
  }
  b.k_index[slot][row] = lookahead_index(g.k);
}

void set_proprio_row(TokenBatch& b, int row, const std::array<float, kStateDim>& p) {
  for (int c = 0; c < kStateDim; ++c) b.proprio.at(row, c) = p[c];
}

// Full goal in one token plus the state token, or the state token alone.
TokenBatch fixed_view_batch(const std::vector<std::array<float, kStateDim>>& proprio,
                            const std::vector<PoseGoal>& goals, std::size_t begin,
                            std::size_t end, ValidationView view) {
  const int n = static_cast<int>(end - begin);
  TokenBatch b;
  b.proprio = Tensor<float>({n, kStateDim});
  const int slots = view == ValidationView::kFullGoal ? 1 : 0;
  b.pose.assign(slots, Tensor<float>({n, kPoseFeatureDim}));
  b.k_index.assign(slots, std::vector<int>(n));
  for (int r = 0; r < n; ++r) {
    set_proprio_row(b, r, proprio[begin + r]);
    if (slots) {
      PoseGoal g = goals[begin + r];
      g.has_position = g.has_heading = g.has_posture = true;
      set_pose_row(b, 0, r, g);
    }
  }
  b.mask = num::TokenMask::all(n, slots + 1);
  return b;
}

class Distiller {
 public:
  Distiller(const BfmConfig& bfm_cfg, const PretrainConfig& cfg, const sim::SimParams& params)
      : cfg_(cfg),
        params_(params),
        model_(bfm_cfg, num::make_stream(cfg.seed, kInit)()),
        env_rng_(num::make_stream(cfg.seed, kEnvStream)),
        beta_rng_(num::make_stream(cfg.seed, kBetaStream)),
        train_rng_(num::make_stream(cfg.seed, kTrainStream)),
        scenes_(cfg.envs) {
    cfg_.validate();
    for (Scene& sc : scenes_) reset_scene(sc, env_rng_, cfg_);
    // The action head's log-std is not fit by the squared-error objective.
    model_.params().find("log_std")->trainable = false;
    opt_ = std::make_unique<num::Adam<float>>(model_.params().pointers(),
                                              num::AdamConfig{cfg_.lr, 0.9, 0.999, 1e-8});
  }

  PretrainResult run(std::ostream* csv) {
    const DistillSet valid = collect_expert_set(cfg_, params_, cfg_.validation_states,
                                                num::make_stream(cfg_.seed, kValidStream)());
    Bfm<float>& model = model_;
    std::vector<PretrainRow> curve;
    const double initial = checked_mse(model, valid, -1);
    if (csv) write_pretrain_csv(*csv, {});
    for (int it = 0; it < cfg_.iterations; ++it) {
      const double beta = beta_at(cfg_, it);
      collect(model, beta);
      const double train = fit(model);
      const double val = checked_mse(model, valid, it);
      curve.push_back({it + 1, beta, train, val});
      if (csv) {
        *csv << it + 1 << ',' << beta << ',' << train << ',' << val << '\n';
        csv->flush();
      }
    }
    const double final_mse = curve.empty() ? initial : curve.back().val_mse;
    return PretrainResult{std::move(model_), std::move(curve), initial, final_mse, data_.size()};
  }

 private:
  double checked_mse(Bfm<float>& model, const DistillSet& valid, int it) {
    double v = 0.0;
    try {
      v = distill_mse(model, valid, ValidationView::kFullGoal);
    } catch (const NumericError& e) {
      throw TrainingError("pretraining diverged at iteration " + std::to_string(it + 1) +
                          ": " + e.what());
    }
    if (!std::isfinite(v)) {
      throw TrainingError("pretraining diverged at iteration " + std::to_string(it + 1) +
                          ": validation loss is not finite");
    }
    return v;
  }

  void collect(Bfm<float>& model, double beta) {
    const int n = static_cast<int>(scenes_.size());
    const int steps = (cfg_.states_per_iteration + n - 1) / n;
    std::bernoulli_distribution use_expert(beta);
    for (int t = 0; t < steps; ++t) {
      std::vector<std::array<float, kStateDim>> prop(n);
      std::vector<PoseGoal> goals(n);
      for (int e = 0; e < n; ++e) {
        advance_target(scenes_[e], env_rng_, cfg_);
        prop[e] = proprio_row(scenes_[e].state, params_);
        goals[e] = relative_goal(scenes_[e].state, scenes_[e].target);
      }
      Tensor<float> student;
      if (beta < 1.0) {
        num::Tape<float> tape(num::GradMode::kNone);
        student = run_trunk(model, tape, fixed_view_batch(prop, goals, 0, n,
                                                          ValidationView::kFullGoal))
                      .mean.value();
      }
      for (int e = 0; e < n; ++e) {
        Scene& sc = scenes_[e];
        const sim::Action expert = expert_action(sc.state, goals[e], params_, cfg_.expert);
        data_.proprio.push_back(prop[e]);
        data_.goal.push_back(goals[e]);
        data_.action.push_back(expert);
        sim::Action act = expert;
        if (!use_expert(beta_rng_)) {
          for (int c = 0; c < sim::kActionDim; ++c) act[c] = student.at(e, c);
        }
        sc.state = sim::control_step(sc.state, act, params_).state;
        --sc.segment_left;
        if (++sc.age >= cfg_.episode_length) reset_scene(sc, env_rng_, cfg_);
      }
    }
  }

  double fit(Bfm<float>& model) {
    const int slots = model.config().goal_slots;
    const int bs = cfg_.batch_size;
    std::uniform_int_distribution<std::size_t> pick(0, data_.size() - 1);
    auto params = model.params().pointers();
    double total = 0.0;
    for (int u = 0; u < cfg_.updates_per_iteration; ++u) {
      TokenBatch b;
      b.proprio = Tensor<float>({bs, kStateDim});
      b.pose.assign(slots, Tensor<float>({bs, kPoseFeatureDim}));
      b.k_index.assign(slots, std::vector<int>(bs));
      b.mask = num::TokenMask::all(bs, slots + 1);
      Tensor<float> target({bs, sim::kActionDim});
      for (int r = 0; r < bs; ++r) {
        const std::size_t i = pick(train_rng_);
        set_proprio_row(b, r, data_.proprio[i]);
        const auto present = sample_mask(train_rng_, model.config().keep_prob, slots);
        for (int j = 0; j < slots; ++j) {
          const double full = j == 0 ? model.config().full_view_prob : 0.0;
          set_pose_row(b, j, r, sample_view(data_.goal[i], train_rng_, full));
          b.mask.present[r * (slots + 1) + j] = present[j] ? 1 : 0;
        }
        for (int c = 0; c < sim::kActionDim; ++c) {
          target.at(r, c) = static_cast<float>(data_.action[i][c]);
        }
      }
      opt_->zero_grad();
      num::Tape<float> tape;
      const Var<float> loss = num::mse(run_trunk(model, tape, b).mean, target);
      total += loss.value()[0];
      tape.backward(loss);
      num::clip_grad_norm(params, cfg_.grad_clip);
      opt_->step();
    }
    return cfg_.updates_per_iteration > 0 ? total / cfg_.updates_per_iteration : 0.0;
  }

  PretrainConfig cfg_;
  const sim::SimParams& params_;
  Bfm<float> model_;
  std::unique_ptr<num::Adam<float>> opt_;
  std::mt19937_64 env_rng_;
  std::mt19937_64 beta_rng_;
  std::mt19937_64 train_rng_;
  std::vector<Scene> scenes_;
  DistillSet data_;
};

}  // namespace

void PretrainConfig::validate() const {
  if (iterations < 0 || states_per_iteration < 1 || envs < 1 || episode_length < 1 ||
      segment_min < 1 || segment_max < segment_min || updates_per_iteration < 0 ||
      batch_size < 1 || !(lr > 0.0) || validation_states < 1) {
    throw ConfigError("pretrain: invalid configuration");
  }
}

double beta_at(const PretrainConfig& cfg, int iteration) {
  if (cfg.beta == BetaSchedule::kConstantOne || cfg.iterations <= 1) return 1.0;
  return 1.0 - static_cast<double>(iteration) / (cfg.iterations - 1);
}

PretrainResult dagger_pretrain(const BfmConfig& bfm_cfg, const PretrainConfig& cfg,
                               const sim::SimParams& params, std::ostream* csv) {
  Distiller d(bfm_cfg, cfg, params);
  return d.run(csv);
}

PretrainResult behavior_cloning(const BfmConfig& bfm_cfg, PretrainConfig cfg,
                                const sim::SimParams& params, std::ostream* csv) {
  cfg.beta = BetaSchedule::kConstantOne;
  return dagger_pretrain(bfm_cfg, cfg, params, csv);
}

DistillSet collect_expert_set(const PretrainConfig& cfg, const sim::SimParams& params,
                              int states, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Scene> scenes(cfg.envs);
  for (Scene& sc : scenes) reset_scene(sc, rng, cfg);
  DistillSet out;
  while (static_cast<int>(out.size()) < states) {
    for (Scene& sc : scenes) {
      if (static_cast<int>(out.size()) >= states) break;
      advance_target(sc, rng, cfg);
      const PoseGoal g = relative_goal(sc.state, sc.target);
      const sim::Action a = expert_action(sc.state, g, params, cfg.expert);
      out.proprio.push_back(proprio_row(sc.state, params));
      out.goal.push_back(g);
      out.action.push_back(a);
      sc.state = sim::control_step(sc.state, a, params).state;
      --sc.segment_left;
      if (++sc.age >= cfg.episode_length) reset_scene(sc, rng, cfg);
    }
  }
  return out;
}

double distill_mse(Bfm<float>& model, const DistillSet& data, ValidationView view) {
  constexpr std::size_t kChunk = 1024;
  double sq = 0.0;
  for (std::size_t begin = 0; begin < data.size(); begin += kChunk) {
    const std::size_t end = std::min(data.size(), begin + kChunk);
    num::Tape<float> tape(num::GradMode::kNone);
    const auto dist =
        run_trunk(model, tape, fixed_view_batch(data.proprio, data.goal, begin, end, view));
    const Tensor<float>& mean = dist.mean.value();
    for (std::size_t r = begin; r < end; ++r) {
      for (int c = 0; c < sim::kActionDim; ++c) {
        const double d = mean.at(static_cast<int>(r - begin), c) - data.action[r][c];
        sq += d * d;
      }
    }
  }
  return sq / (static_cast<double>(data.size()) * sim::kActionDim);
}

void write_pretrain_csv(std::ostream& os, const std::vector<PretrainRow>& rows) {
  os << "iteration,beta,train_mse,val_mse\n";
  for (const PretrainRow& r : rows) {
    os << r.iteration << ',' << r.beta << ',' << r.train_mse << ',' << r.val_mse << '\n';
  }
}

}  // namespace tt::bfm
