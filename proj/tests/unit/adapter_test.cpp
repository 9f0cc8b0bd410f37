#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "tt/adapter/policy.hpp"
#include "tt/bfm/checkpoint.hpp"
#include "tt/error.hpp"
#include "tt/num/adam.hpp"
#include "tt/num/finite_diff.hpp"
#include "tt/sim/env.hpp"

namespace tt::adapter {
namespace {

using num::Tensor;
using sim::Task;

constexpr double kPi = std::numbers::pi;

bfm::BfmConfig small_bfm() {
  bfm::BfmConfig c;
  c.d_model = 8;
  c.layers = 1;
  c.heads = 2;
  c.ff_width = 16;
  c.state_hidden = {16};
  c.pose_hidden = {16};
  return c;
}

TaskEncoderConfig small_encoder(bool use_pose = true) {
  TaskEncoderConfig c;
  c.hidden = {16, 16};
  c.use_current_pose = use_pose;
  return c;
}

// Observations from a few random-action steps of `n` episodes.
std::vector<Observation> sample_observations(Task task, int n, std::uint64_t seed,
                                             const PromptSpec& prompt = {}) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Observation> out;
  for (int i = 0; i < n; ++i) {
    sim::Env env;
    env.reset(task, rng);
    for (int s = 0; s < 5; ++s) {
      sim::Action a;
      for (double& v : a) v = u(rng);
      env.step(a);
    }
    out.push_back(observe(env.state(), env.goal(), env.params(), prompt));
  }
  return out;
}

void randomize(num::ParamSet<double>& ps, std::uint64_t seed, double scale = 0.3) {
  num::Rng rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (auto& p : ps) {
    for (double& v : p.value.values()) v = n(rng);
  }
}

std::uint64_t model_hash(const bfm::Bfm<float>& m) { return bfm::parameter_hash(m.params()); }

// ---------------------------------------------------------------- encoder

TEST(TaskEncoder, FreshEncoderEmitsZeroToken) {
  TaskEncoder<double> enc(Task::kSteering, small_encoder(), 8, 3);
  const auto b = pack_observations<double>(sample_observations(Task::kSteering, 4, 1));
  num::Tape<double> tape;
  for (double v : enc.forward(tape, b.goal, b.extra).value().values()) EXPECT_EQ(v, 0.0);
}

TEST(TaskEncoder, WithoutPoseIgnoresExtraFeatures) {
  TaskEncoder<double> enc(Task::kReach, small_encoder(false), 8, 3);
  randomize(enc.params(), 4);
  const auto b = pack_observations<double>(sample_observations(Task::kReach, 3, 2));
  Tensor<double> other = b.extra;
  for (double& v : other.values()) v += 5.0;
  num::Tape<double> tape;
  const Tensor<double> y1 = enc.forward(tape, b.goal, b.extra).value();
  const Tensor<double> y2 = enc.forward(tape, b.goal, other).value();
  EXPECT_EQ(y1, y2);
  EXPECT_EQ(enc.input_dim(), 2);
}

TEST(TaskEncoder, ZeroWeightsGiveConstantToken) {
  TaskEncoder<double> enc(Task::kDirection, small_encoder(), 8, 3);
  for (auto& p : enc.params()) p.value.fill(0.0);
  enc.params().find("task_encoder.l2.b")->value.fill(0.7);
  const auto b = pack_observations<double>(sample_observations(Task::kDirection, 5, 6));
  num::Tape<double> tape;
  for (double v : enc.forward(tape, b.goal, b.extra).value().values()) {
    EXPECT_DOUBLE_EQ(v, 0.7);
  }
}

TEST(TaskEncoder, TwoDimensionalToyMatchesMatrixChain) {
  TaskEncoderConfig cfg;
  cfg.hidden = {2};
  cfg.use_current_pose = false;
  TaskEncoder<double> enc(Task::kReach, cfg, 2, 0);
  auto& ps = enc.params();
  ps.find("task_encoder.l0.w")->value = Tensor<double>({2, 2}, {0.5, -1.0, 2.0, 0.25});
  ps.find("task_encoder.l0.b")->value = Tensor<double>({2}, {0.1, -0.2});
  ps.find("task_encoder.l1.w")->value = Tensor<double>({2, 2}, {1.5, 0.0, -0.5, 3.0});
  ps.find("task_encoder.l1.b")->value = Tensor<double>({2}, {0.05, 0.0});
  const Tensor<double> g({1, 2}, {0.8, -0.4});
  num::Tape<double> tape;
  const Tensor<double> y = enc.forward(tape, g, Tensor<double>({1, 4})).value();
  // h = tanh(g W0 + b0), y = h W1 + b1, written out by hand.
  const double h0 = std::tanh(0.8 * 0.5 + -0.4 * 2.0 + 0.1);
  const double h1 = std::tanh(0.8 * -1.0 + -0.4 * 0.25 - 0.2);
  EXPECT_NEAR(y[0], h0 * 1.5 + h1 * -0.5 + 0.05, 1e-14);
  EXPECT_NEAR(y[1], h0 * 0.0 + h1 * 3.0, 1e-14);
}

TEST(TaskEncoder, WidthMismatchIsConfigError) {
  TaskEncoder<double> enc(Task::kDirection, small_encoder(), 8, 0);
  num::Tape<double> tape;
  EXPECT_THROW(enc.forward(tape, Tensor<double>({2, 5}), Tensor<double>({2, 4})), ConfigError);
  EXPECT_THROW(enc.forward(tape, Tensor<double>({2, 3}), Tensor<double>({2, 2})), ConfigError);
}

// ---------------------------------------------------------------- prompts

TEST(Prompt, HeadingPriorIsExpressedInTheBaseFrame) {
  sim::SimState s;
  s.theta = kPi / 2;
  sim::TaskGoal g;
  g.task = Task::kSteering;
  g.direction = {1.0, 0.0};
  g.facing = {0.0, -1.0};
  PriorToken p;
  p.heading = HeadingSource::kGoalDirection;
  const auto d = prior_goal(p, s, g);
  ASSERT_TRUE(d.has_value());
  EXPECT_FALSE(d->has_position);
  EXPECT_TRUE(d->has_heading);
  EXPECT_FALSE(d->has_posture);
  EXPECT_NEAR(d->heading.x, 0.0, 1e-12);
  EXPECT_NEAR(d->heading.y, -1.0, 1e-12);
  p.heading = HeadingSource::kGoalFacing;
  const auto f = prior_goal(p, s, g);
  EXPECT_NEAR(f->heading.x, -1.0, 1e-12);
  EXPECT_NEAR(f->heading.y, 0.0, 1e-12);
}

TEST(Prompt, TowardTargetAndPosture) {
  sim::SimState s;
  s.pos = {1.0, 1.0};
  sim::TaskGoal g;
  g.task = Task::kReach;
  g.target = {1.0, 3.0};
  PriorToken p;
  p.heading = HeadingSource::kTowardTarget;
  p.has_posture = true;
  p.q1 = 0.4;
  p.q2 = -0.3;
  p.k = 30;
  const auto out = prior_goal(p, s, g);
  EXPECT_NEAR(out->heading.x, 0.0, 1e-12);
  EXPECT_NEAR(out->heading.y, 1.0, 1e-12);
  EXPECT_TRUE(out->has_posture);
  EXPECT_EQ(out->q1, 0.4);
  EXPECT_EQ(out->q2, -0.3);
  EXPECT_EQ(out->k, 30);
}

TEST(Prompt, DistanceTriggerSwitchesOffNearTheTarget) {
  sim::SimState s;
  sim::TaskGoal g;
  g.task = Task::kStrike;
  g.block = {2.0, 0.0};
  s.block = sim::BlockState{{2.0, 0.0}};
  PriorToken p;
  p.heading = HeadingSource::kTowardTarget;
  p.trigger = Trigger::kDistanceAbove;
  p.trigger_distance = 1.5;
  EXPECT_TRUE(prior_goal(p, s, g).has_value());
  s.pos = {0.6, 0.0};
  EXPECT_FALSE(prior_goal(p, s, g).has_value());
}

TEST(Prompt, ValidationRejectsFieldsTheTaskLacks) {
  PromptSpec spec;
  spec.priors.push_back({});
  spec.priors[0].heading = HeadingSource::kTowardTarget;
  EXPECT_THROW(spec.validate(Task::kDirection), ConfigError);
  EXPECT_NO_THROW(spec.validate(Task::kReach));
  spec.priors[0].heading = HeadingSource::kGoalFacing;
  EXPECT_THROW(spec.validate(Task::kDirection), ConfigError);
  spec.priors[0].heading = HeadingSource::kGoalDirection;
  spec.priors[0].trigger = Trigger::kDistanceAbove;
  EXPECT_THROW(spec.validate(Task::kDirection), ConfigError);
  spec.priors[0].trigger = Trigger::kAlways;
  spec.priors[0].k = 7;
  EXPECT_THROW(spec.validate(Task::kDirection), ConfigError);
  EXPECT_THROW(parse_heading_source("sideways"), ConfigError);
  EXPECT_THROW(parse_trigger("sometimes"), ConfigError);
}

// ---------------------------------------------------------------- tokens

class TokenPolicyTest : public ::testing::Test {
 protected:
  Policy<double> make(Mode mode, Task task, PromptSpec prompt = {},
                      TaskEncoderConfig enc = small_encoder()) {
    bfm::Bfm<double> m(small_bfm(), 17);
    randomize(m.params(), 18);
    m.params().find("log_std")->value.fill(-0.5);
    return Policy<double>(mode, task, std::move(m), enc, std::move(prompt), 19);
  }

  static PromptSpec facing_prompt() {
    PromptSpec p;
    p.priors.push_back({});
    return p;
  }
};

TEST_F(TokenPolicyTest, SequenceLengths) {
  auto plain = make(Mode::kTaskTokens, Task::kDirection);
  const auto obs = sample_observations(Task::kDirection, 3, 4);
  const auto b = pack_observations<double>(obs);
  num::Tape<double> tape;
  const auto tau = plain.task_token(tape, obs);
  EXPECT_EQ(assemble_tokens<double>(*plain.model(), tape, obs, tau, {}, b).slots.size(), 2u);

  const PromptSpec prompt = facing_prompt();
  const auto obs_p = sample_observations(Task::kDirection, 3, 4, prompt);
  const auto ts = assemble_tokens<double>(*plain.model(), tape, obs_p, tau, prompt.priors, b);
  EXPECT_EQ(ts.slots.size(), 3u);
  EXPECT_EQ(ts.mask.count(0), 3);
}

TEST_F(TokenPolicyTest, InactivePriorIsExcluded) {
  PromptSpec prompt;
  prompt.priors.push_back({});
  prompt.priors[0].heading = HeadingSource::kTowardTarget;
  prompt.priors[0].trigger = Trigger::kDistanceAbove;
  prompt.priors[0].trigger_distance = 1e6;  // never active
  auto with = make(Mode::kTaskTokens, Task::kReach, prompt);
  auto without = make(Mode::kTaskTokens, Task::kReach);
  randomize(with.encoder()->params(), 5);
  num::copy_values(without.encoder()->params(), with.encoder()->params());
  const auto obs = sample_observations(Task::kReach, 4, 9, prompt);
  num::Tape<double> tape;
  const auto tau = with.task_token(tape, obs);
  const auto ts = assemble_tokens<double>(*with.model(), tape, obs, tau, prompt.priors,
                                          pack_observations<double>(obs));
  for (int b = 0; b < 4; ++b) {
    EXPECT_FALSE(ts.mask.at(b, 0));
    EXPECT_EQ(ts.mask.count(b), 2);
  }
  const Tensor<double> a = with.forward(tape, obs).mean.value();
  const Tensor<double> c = without.forward(tape, obs).mean.value();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], c[i], 1e-12);
}

TEST_F(TokenPolicyTest, ZeroEncoderOutputEqualsZeroToken) {
  auto policy = make(Mode::kTaskTokens, Task::kSteering);
  const auto obs = sample_observations(Task::kSteering, 4, 2);
  num::Tape<double> tape;
  const Tensor<double> mean = policy.forward(tape, obs).mean.value();
  const auto b = pack_observations<double>(obs);
  const auto zero = tape.constant(Tensor<double>({4, 8}));
  const auto ts = assemble_tokens<double>(*policy.model(), tape, obs, zero, {}, b);
  const Tensor<double> ref = policy.model()->trunk(tape, ts.slots, ts.mask).mean.value();
  EXPECT_EQ(mean, ref);
}

TEST_F(TokenPolicyTest, PriorsDoNotTouchTheTaskToken) {
  auto a = make(Mode::kTaskTokens, Task::kSteering, facing_prompt());
  auto b = make(Mode::kTaskTokens, Task::kSteering);
  randomize(a.encoder()->params(), 8);
  num::copy_values(b.encoder()->params(), a.encoder()->params());
  const auto obs_a = sample_observations(Task::kSteering, 3, 1, facing_prompt());
  const auto obs_b = sample_observations(Task::kSteering, 3, 1);
  num::Tape<double> tape;
  EXPECT_EQ(a.task_token(tape, obs_a).value(), b.task_token(tape, obs_b).value());
}

TEST_F(TokenPolicyTest, LogProbGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto policy = make(Mode::kTaskTokens, Task::kSteering, facing_prompt());
    randomize(policy.encoder()->params(), 100 + seed);
    const auto obs = sample_observations(Task::kSteering, 3, 200 + seed, facing_prompt());
    const Tensor<double> act = [&] {
      Tensor<double> t({3, sim::kActionDim});
      num::Rng rng(seed);
      std::normal_distribution<double> n(0.0, 0.5);
      for (double& v : t.values()) v = n(rng);
      return t;
    }();
    auto loss = [&](num::Tape<double>& tape) {
      const auto dist = policy.forward(tape, obs);
      return num::sum(num::gaussian_log_prob(dist, tape.constant(act)));
    };
    const auto report = num::finite_diff_check<double>(
        loss, policy.encoder()->params().pointers(), 1e-6, 1e-6);
    EXPECT_LT(report.max_rel_error, 1e-3) << report.worst_parameter;
    EXPECT_EQ(report.checked, policy.encoder()->params().scalar_count());
  }
}

TEST_F(TokenPolicyTest, FrozenModelStillPassesGradient) {
  auto policy = make(Mode::kTaskTokens, Task::kReach);
  const auto obs = sample_observations(Task::kReach, 6, 3);
  Tensor<double> act({6, sim::kActionDim}, 0.3);
  num::Tape<double> tape(num::GradMode::kTrainableOnly);
  const auto lp = num::sum(num::gaussian_log_prob(policy.forward(tape, obs), tape.constant(act)));
  for (auto* p : policy.all_parameters()) p->zero_grad();
  tape.backward(lp);
  double enc_norm = 0.0;
  for (auto& p : policy.encoder()->params()) {
    for (double g : p.grad.values()) enc_norm += g * g;
  }
  EXPECT_GT(enc_norm, 0.0);
  for (auto& p : policy.model()->params()) {
    for (double g : p.grad.values()) EXPECT_EQ(g, 0.0) << p.name;
  }
}

TEST(Freezing, OptimizerStepLeavesModelBytesUntouched) {
  bfm::Bfm<float> m(small_bfm(), 2);
  const std::uint64_t before = model_hash(m);
  Policy<float> policy(Mode::kTaskTokens, Task::kDirection, std::move(m), small_encoder(), {}, 1);
  num::Adam<float> opt(policy.trainable_parameters(), {1e-2});
  const auto obs = sample_observations(Task::kDirection, 8, 5);
  const auto enc_before = bfm::parameter_hash(policy.encoder()->params());
  for (int step = 0; step < 5; ++step) {
    opt.zero_grad();
    num::Tape<float> tape(num::GradMode::kAllParameters);
    const auto lp = num::sum(num::gaussian_log_prob(
        policy.forward(tape, obs), tape.constant(Tensor<float>({8, 5}, 0.5f))));
    tape.backward(num::scale(lp, -1.0f));
    opt.step();
  }
  EXPECT_EQ(model_hash(*policy.model()), before);
  EXPECT_NE(bfm::parameter_hash(policy.encoder()->params()), enc_before);
}

// ---------------------------------------------------------------- accounting

std::size_t closed_form(int in, const std::vector<int>& hidden, int out) {
  std::size_t n = 0;
  int fan_in = in;
  for (int h : hidden) {
    n += static_cast<std::size_t>(fan_in + 1) * h;
    fan_in = h;
  }
  return n + static_cast<std::size_t>(fan_in + 1) * out;
}

TEST(TrainableParameters, SmallEncoderCountByEnumeration) {
  num::ParamSet<float> ps;
  num::Rng rng(0);
  num::Mlp<float> mlp(ps, "task_encoder", 16, {64, 64}, 32, num::Activation::kTanh,
                      num::Activation::kIdentity, rng);
  EXPECT_EQ(ps.scalar_count(), 7328u);
  EXPECT_EQ(mlp.parameter_count(), 7328u);
  EXPECT_EQ(closed_form(16, {64, 64}, 32), 17u * 64 + 65u * 64 + 65u * 32);
}

TEST(TrainableParameters, ModesEnumerateTheRightSets) {
  const bfm::BfmConfig bc = small_bfm();
  const TaskEncoderConfig ec = small_encoder();
  ActorConfig ac;
  ac.hidden = {32};
  const auto tt = trainable_parameters(Mode::kTaskTokens, Task::kDirection, bc, ec, ac);
  EXPECT_EQ(tt.count, closed_form(3 + 4, {16, 16}, 8));
  for (const auto& n : tt.names) EXPECT_TRUE(n.starts_with("task_encoder.")) << n;

  const auto ft = trainable_parameters(Mode::kFullFinetune, Task::kDirection, bc, ec, ac);
  EXPECT_EQ(ft.count, tt.count + bfm::Bfm<float>(bc, 0).params().scalar_count());
  EXPECT_LT(tt.count, ft.count);

  EXPECT_EQ(trainable_parameters(Mode::kPromptOnly, Task::kDirection, bc, ec, ac).count, 0u);
  const auto pp = trainable_parameters(Mode::kPurePpo, Task::kDirection, bc, ec, ac);
  EXPECT_EQ(pp.count, closed_form(13 + 3, {32}, 5) + 5);
  EXPECT_THROW(parse_mode("half_finetune"), ConfigError);
}

TEST(TrainableParameters, TaskTokensBelowFullFinetuneForDefaults) {
  for (Task t : {Task::kDirection, Task::kSteering, Task::kReach, Task::kStrike, Task::kDash}) {
    const auto tt = trainable_parameters(Mode::kTaskTokens, t, {}, {}, {});
    const auto ft = trainable_parameters(Mode::kFullFinetune, t, {}, {}, {});
    EXPECT_LT(tt.count, ft.count);
  }
}

TEST(LoadPretrained, MissingCheckpointIsConfigError) {
  EXPECT_THROW(load_pretrained(""), ConfigError);
  EXPECT_THROW(load_pretrained("/nonexistent/bfm.ckpt"), ConfigError);
}

}  // namespace
}  // namespace tt::adapter
