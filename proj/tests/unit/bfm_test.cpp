#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "tt/bfm/checkpoint.hpp"
#include "tt/bfm/expert.hpp"
#include "tt/bfm/pose_goal.hpp"
#include "tt/bfm/pretrain.hpp"
#include "tt/error.hpp"
#include "tt/sim/physics.hpp"

namespace tt::bfm {
namespace {

using num::Tensor;
using num::Var;

constexpr double kPi = std::numbers::pi;

BfmConfig tiny_config() {
  BfmConfig c;
  c.d_model = 8;
  c.layers = 1;
  c.heads = 2;
  c.ff_width = 16;
  c.state_hidden = {16};
  c.pose_hidden = {16};
  return c;
}

Tensor<double> random_rows(int rows, int cols, std::uint64_t seed) {
  num::Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor<double> t({rows, cols});
  for (double& v : t.values()) v = n(rng);
  return t;
}

void fill_param(num::ParamSet<double>& ps, const std::string& name, double v) {
  ps.find(name)->value.fill(v);
}

// ---------------------------------------------------------------- encoders

TEST(StateEncoder, SingleLinearLayerMatchesHandProduct) {
  BfmConfig c = tiny_config();
  c.state_hidden = {};
  Bfm<double> model(c, 3);
  const auto& w = model.params().find("state.l0.w")->value;
  const auto& b = model.params().find("state.l0.b")->value;
  const Tensor<double> x = random_rows(3, kStateDim, 11);
  num::Tape<double> tape;
  const Tensor<double> y = model.encode_state(tape, x).value();
  for (int r = 0; r < 3; ++r) {
    for (int j = 0; j < c.d_model; ++j) {
      double expect = b[j];
      for (int i = 0; i < kStateDim; ++i) expect += x.at(r, i) * w.at(i, j);
      EXPECT_NEAR(y.at(r, j), expect, 1e-12);
    }
  }
}

TEST(StateEncoder, ZeroWeightsGiveOutputBias) {
  Bfm<double> model(tiny_config(), 1);
  for (auto& p : model.params()) {
    if (p.name.starts_with("state.")) p.value.fill(0.0);
  }
  fill_param(model.params(), "state.l1.b", 0.25);
  num::Tape<double> tape;
  const Tensor<double> y = model.encode_state(tape, random_rows(4, kStateDim, 2)).value();
  for (double v : y.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(StateEncoder, SameSeedSameOutput) {
  Bfm<double> a(tiny_config(), 9);
  Bfm<double> b(tiny_config(), 9);
  const Tensor<double> x = random_rows(2, kStateDim, 5);
  num::Tape<double> ta;
  num::Tape<double> tb;
  const Tensor<double> ya = a.encode_state(ta, x).value();
  const Tensor<double> yb = b.encode_state(tb, x).value();
  for (std::size_t i = 0; i < ya.size(); ++i) EXPECT_EQ(ya[i], yb[i]);
}

TEST(StateEncoder, WrongWidthIsDimensionError) {
  Bfm<double> model(tiny_config(), 0);
  num::Tape<double> tape;
  EXPECT_THROW(model.encode_state(tape, Tensor<double>({2, kStateDim + 1})), DimensionError);
}

TEST(PoseEncoder, ZeroWeightsLeaveOnlyLookaheadOffset) {
  Bfm<double> model(tiny_config(), 4);
  for (auto& p : model.params()) {
    if (p.name.starts_with("pose.l")) p.value.fill(0.0);
  }
  const auto& off = model.params().find("pose.k_offset")->value;
  const std::vector<int> k{0, 2, 1};
  num::Tape<double> tape;
  const Tensor<double> y =
      model.encode_pose(tape, random_rows(3, kPoseFeatureDim, 8), k).value();
  for (int r = 0; r < 3; ++r) {
    for (int j = 0; j < 8; ++j) EXPECT_DOUBLE_EQ(y.at(r, j), off.at(k[r], j));
  }
}

TEST(PoseEncoder, LookaheadChangesTheToken) {
  Bfm<double> model(tiny_config(), 4);
  Tensor<double> x({2, kPoseFeatureDim});
  const Tensor<double> row = random_rows(1, kPoseFeatureDim, 6);
  for (int i = 0; i < kPoseFeatureDim; ++i) x.at(0, i) = x.at(1, i) = row[i];
  num::Tape<double> tape;
  const Tensor<double> y = model.encode_pose(tape, x, {0, 2}).value();
  const auto& off = model.params().find("pose.k_offset")->value;
  for (int j = 0; j < 8; ++j) {
    EXPECT_NEAR(y.at(1, j) - y.at(0, j), off.at(2, j) - off.at(0, j), 1e-12);
  }
}

TEST(PoseEncoder, LookaheadIndexRejectsUnknownK) {
  EXPECT_EQ(lookahead_index(5), 0);
  EXPECT_EQ(lookahead_index(15), 1);
  EXPECT_EQ(lookahead_index(30), 2);
  EXPECT_THROW(lookahead_index(10), ConfigError);
}

TEST(BfmConfig, ValidationRejectsIndivisibleHeads) {
  BfmConfig c = tiny_config();
  c.heads = 3;
  EXPECT_THROW(Bfm<double>(c, 0), ConfigError);
  c = tiny_config();
  c.keep_prob = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
}

// ---------------------------------------------------------------- trunk

std::vector<Var<double>> make_slots(num::Tape<double>& tape, int batch, int n, int d,
                                    std::uint64_t seed) {
  std::vector<Var<double>> slots;
  for (int j = 0; j < n; ++j) slots.push_back(tape.constant(random_rows(batch, d, seed + j)));
  return slots;
}

TEST(Trunk, WithoutBlocksIsHeadOfMeanToken) {
  BfmConfig c = tiny_config();
  c.layers = 0;
  Bfm<double> model(c, 2);
  const auto& w = model.params().find("head.w")->value;
  const auto& b = model.params().find("head.b")->value;
  num::Tape<double> tape;
  const auto slots = make_slots(tape, 2, 3, c.d_model, 40);
  num::TokenMask mask = num::TokenMask::all(2, 3);
  mask.present[1] = 0;  // sample 0, token 1 absent
  const Tensor<double> mean = model.trunk(tape, slots, mask).mean.value();
  for (int r = 0; r < 2; ++r) {
    std::vector<double> pooled(c.d_model, 0.0);
    int n = 0;
    for (int t = 0; t < 3; ++t) {
      if (!mask.at(r, t)) continue;
      ++n;
      for (int j = 0; j < c.d_model; ++j) pooled[j] += slots[t].value().at(r, j);
    }
    for (double& v : pooled) v /= n;
    for (int a = 0; a < c.action_dim; ++a) {
      double expect = b[a];
      for (int j = 0; j < c.d_model; ++j) expect += pooled[j] * w.at(j, a);
      EXPECT_NEAR(mean.at(r, a), expect, 1e-12);
    }
  }
}

TEST(Trunk, TokenOrderDoesNotMatter) {
  Bfm<double> model(tiny_config(), 5);
  for (std::uint64_t s = 0; s < 10; ++s) {
    num::Tape<double> tape;
    auto slots = make_slots(tape, 3, 3, 8, 100 * s);
    const auto mask = num::TokenMask::all(3, 3);
    const Tensor<double> a = model.trunk(tape, slots, mask).mean.value();
    std::swap(slots[0], slots[2]);
    const Tensor<double> b = model.trunk(tape, slots, mask).mean.value();
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(Trunk, MaskedSlotEqualsOmittedSlot) {
  Bfm<double> model(tiny_config(), 6);
  num::Tape<double> tape;
  const auto slots = make_slots(tape, 2, 3, 8, 77);
  num::TokenMask mask = num::TokenMask::all(2, 3);
  mask.present[0 * 3 + 1] = 0;
  mask.present[1 * 3 + 1] = 0;
  const Tensor<double> masked = model.trunk(tape, slots, mask).mean.value();
  const Tensor<double> omitted =
      model.trunk(tape, {slots[0], slots[2]}, num::TokenMask::all(2, 2)).mean.value();
  for (std::size_t i = 0; i < masked.size(); ++i) EXPECT_NEAR(masked[i], omitted[i], 1e-12);
}

TEST(Trunk, SampleWithoutTokensIsContractError) {
  Bfm<double> model(tiny_config(), 0);
  num::Tape<double> tape;
  const auto slots = make_slots(tape, 2, 2, 8, 1);
  num::TokenMask mask = num::TokenMask::all(2, 2);
  mask.present[2] = mask.present[3] = 0;
  EXPECT_THROW(model.trunk(tape, slots, mask), ContractError);
  EXPECT_THROW(model.trunk(tape, {}, num::TokenMask::all(2, 0)), ContractError);
  EXPECT_THROW(model.trunk(tape, slots, num::TokenMask::all(2, 3)), ContractError);
}

TEST(Trunk, LogStdStartsAtConfiguredValue) {
  Bfm<double> model(tiny_config(), 0);
  num::Tape<double> tape;
  const auto slots = make_slots(tape, 1, 1, 8, 1);
  const auto dist = model.trunk(tape, slots, num::TokenMask::all(1, 1));
  for (double v : dist.log_std.value().values()) EXPECT_DOUBLE_EQ(v, -1.0);
}

// ---------------------------------------------------------------- goals and masks

TEST(SampleMask, ExtremeProbabilities) {
  std::mt19937_64 rng(0);
  for (int i = 0; i < 50; ++i) {
    for (bool b : sample_mask(rng, 1.0, 3)) EXPECT_TRUE(b);
    for (bool b : sample_mask(rng, 0.0, 3)) EXPECT_FALSE(b);
  }
}

TEST(SampleMask, KeepRateWithinThreeSigma) {
  std::mt19937_64 rng(12);
  const int n = 20000;
  const double p = 0.7;
  int kept = 0;
  for (int i = 0; i < n; ++i) {
    for (bool b : sample_mask(rng, p, 2)) kept += b ? 1 : 0;
  }
  const double trials = 2.0 * n;
  const double sigma = std::sqrt(trials * p * (1 - p));
  EXPECT_NEAR(kept, trials * p, 3 * sigma);
}

TEST(SampleView, FullProbabilityKeepsEverything) {
  std::mt19937_64 rng(1);
  PoseGoal g;
  g.rel_pos = {1.0, 2.0};
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_view(g, rng, 1.0), g);
}

TEST(SampleView, PartialViewsAreNonEmptySubsets) {
  std::mt19937_64 rng(2);
  PoseGoal g;
  g.rel_pos = {1.0, 2.0};
  g.q1 = 0.3;
  for (int i = 0; i < 200; ++i) {
    const PoseGoal v = sample_view(g, rng, 0.0);
    EXPECT_TRUE(v.has_position || v.has_heading || v.has_posture);
    EXPECT_EQ(v.rel_pos, g.rel_pos);
    EXPECT_EQ(v.k, g.k);
  }
}

TEST(PoseFeatures, MaskedComponentsAreZeroed) {
  PoseGoal g;
  g.rel_pos = {1.5, -0.5};
  g.heading = {0.0, 1.0};
  g.q1 = 0.4;
  g.q2 = -0.2;
  g.has_heading = false;
  const auto f = pose_features(g);
  const std::array<double, kPoseFeatureDim> expect{1.5, -0.5, 0.0, 0.0, 0.4, -0.2,
                                                    1.0, 0.0, 1.0};
  for (int i = 0; i < kPoseFeatureDim; ++i) EXPECT_DOUBLE_EQ(f[i], expect[i]);
}

TEST(RelativeGoal, InvariantToRigidMotion) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 20; ++i) {
    sim::SimState s;
    s.pos = {u(rng), u(rng)};
    s.theta = u(rng);
    s.q1 = 0.2;
    const PoseTarget t = sample_pose_target(s, rng);
    const PoseGoal g = relative_goal(s, t);

    const double rot = u(rng);
    const sim::Vec2 shift{u(rng), u(rng)};
    sim::SimState s2 = s;
    s2.pos = s.pos.rotated(rot) + shift;
    s2.theta = s.theta + rot;
    PoseTarget t2 = t;
    t2.position = t.position.rotated(rot) + shift;
    t2.heading = t.heading + rot;
    const PoseGoal g2 = relative_goal(s2, t2);
    EXPECT_NEAR(g.rel_pos.x, g2.rel_pos.x, 1e-9);
    EXPECT_NEAR(g.rel_pos.y, g2.rel_pos.y, 1e-9);
    EXPECT_NEAR(g.heading.x, g2.heading.x, 1e-9);
    EXPECT_NEAR(g.heading.y, g2.heading.y, 1e-9);
    EXPECT_NEAR(g.q1 - s.q1, g2.q1 - s2.q1, 1e-12);
  }
}

TEST(RelativeGoal, TargetAheadIsOnBodyXAxis) {
  sim::SimState s;
  s.pos = {1.0, 1.0};
  s.theta = kPi / 2;
  PoseTarget t;
  t.position = {1.0, 3.0};
  t.heading = kPi / 2;
  const PoseGoal g = relative_goal(s, t);
  EXPECT_NEAR(g.rel_pos.x, 2.0, 1e-12);
  EXPECT_NEAR(g.rel_pos.y, 0.0, 1e-12);
  EXPECT_NEAR(g.heading.x, 1.0, 1e-12);
  EXPECT_NEAR(g.heading.y, 0.0, 1e-12);
}

// ---------------------------------------------------------------- expert

TEST(Expert, HoldsEquilibrium) {
  sim::SimParams p;
  sim::SimState s;
  PoseGoal g;  // at the current pose, arm hanging
  const sim::Action a = expert_action(s, g, p);
  double n = 0.0;
  for (double v : a) n += v * v;
  EXPECT_LT(std::sqrt(n), 1e-6);
}

TEST(Expert, HeadingErrorGivesPositiveTorqueOnly) {
  sim::SimParams p;
  sim::SimState s;
  PoseGoal g;
  g.heading = {std::cos(0.5), std::sin(0.5)};
  const sim::Action a = expert_action(s, g, p);
  EXPECT_GT(a[2], 0.0);
  EXPECT_DOUBLE_EQ(a[0], 0.0);
  EXPECT_DOUBLE_EQ(a[1], 0.0);
}

TEST(Expert, ActionsStayNormalized) {
  sim::SimParams p;
  sim::SimState s;
  s.vel = {30.0, -30.0};
  s.omega = 20.0;
  PoseGoal g;
  g.rel_pos = {100.0, 0.0};
  g.q1 = 3.0;
  for (double v : expert_action(s, g, p)) {
    EXPECT_LE(v, 1.0);
    EXPECT_GE(v, -1.0);
  }
}

TEST(Expert, ReachesMostSampledGoalsWithinSixtySteps) {
  sim::SimParams p;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> heading(-kPi, kPi);
  const int n = 500;
  int reached = 0;
  for (int i = 0; i < n; ++i) {
    sim::SimState s;
    s.theta = heading(rng);
    const PoseTarget t = sample_pose_target(s, rng);
    for (int step = 0; step < 60; ++step) {
      s = sim::control_step(s, expert_action(s, relative_goal(s, t), p), p).state;
      const PoseGoal g = relative_goal(s, t);
      if (g.rel_pos.norm() <= 0.1 && std::abs(std::atan2(g.heading.y, g.heading.x)) <= 0.1 &&
          std::abs(sim::wrap_angle(t.q1 - s.q1)) <= 0.1 &&
          std::abs(sim::wrap_angle(t.q2 - s.q2)) <= 0.1) {
        ++reached;
        break;
      }
    }
  }
  EXPECT_GE(reached, static_cast<int>(0.95 * n));
}

// ---------------------------------------------------------------- pretraining

PretrainConfig tiny_pretrain() {
  PretrainConfig c;
  c.iterations = 3;
  c.states_per_iteration = 256;
  c.envs = 8;
  c.updates_per_iteration = 15;
  c.batch_size = 32;
  c.validation_states = 128;
  c.seed = 4;
  return c;
}

void expect_same_curve(const PretrainResult& a, const PretrainResult& b) {
  ASSERT_EQ(a.curve.size(), b.curve.size());
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    EXPECT_EQ(a.curve[i].train_mse, b.curve[i].train_mse);
    EXPECT_EQ(a.curve[i].val_mse, b.curve[i].val_mse);
  }
  EXPECT_EQ(parameter_hash(a.model.params()), parameter_hash(b.model.params()));
}

TEST(Pretrain, BetaOneReproducesBehaviorCloning) {
  sim::SimParams p;
  PretrainConfig c = tiny_pretrain();
  c.beta = BetaSchedule::kConstantOne;
  const PretrainResult d = dagger_pretrain(tiny_config(), c, p);
  const PretrainResult bc = behavior_cloning(tiny_config(), tiny_pretrain(), p);
  expect_same_curve(d, bc);
}

TEST(Pretrain, SameSeedIsDeterministic) {
  sim::SimParams p;
  const PretrainResult a = dagger_pretrain(tiny_config(), tiny_pretrain(), p);
  const PretrainResult b = dagger_pretrain(tiny_config(), tiny_pretrain(), p);
  expect_same_curve(a, b);
}

TEST(Pretrain, StudentRolloutsChangeTheData) {
  sim::SimParams p;
  const PretrainResult d = dagger_pretrain(tiny_config(), tiny_pretrain(), p);
  const PretrainResult bc = behavior_cloning(tiny_config(), tiny_pretrain(), p);
  ASSERT_EQ(d.curve.size(), 3u);
  EXPECT_DOUBLE_EQ(d.curve[0].beta, 1.0);
  EXPECT_DOUBLE_EQ(d.curve[1].beta, 0.5);
  EXPECT_DOUBLE_EQ(d.curve[2].beta, 0.0);
  EXPECT_NE(parameter_hash(d.model.params()), parameter_hash(bc.model.params()));
}

TEST(Pretrain, LeavesSimParamsAndAggregatesData) {
  sim::SimParams p;
  const sim::SimParams before = p;
  const PretrainResult r = dagger_pretrain(tiny_config(), tiny_pretrain(), p);
  EXPECT_EQ(p, before);
  EXPECT_EQ(r.dataset_size, 3u * 256u);
}

TEST(Pretrain, ValidationLossDrops) {
  sim::SimParams p;
  PretrainConfig c = tiny_pretrain();
  c.updates_per_iteration = 60;
  c.lr = 3e-3;
  const PretrainResult r = dagger_pretrain(tiny_config(), c, p);
  EXPECT_LT(r.final_val_mse, r.initial_val_mse);
}

TEST(Pretrain, GoalTokenHelpsAfterTraining) {
  sim::SimParams p;
  PretrainConfig c = tiny_pretrain();
  c.iterations = 4;
  c.states_per_iteration = 1024;
  c.updates_per_iteration = 100;
  c.lr = 3e-3;
  PretrainResult r = dagger_pretrain(tiny_config(), c, p);
  const DistillSet held = collect_expert_set(c, p, 256, 99);
  EXPECT_LT(distill_mse(r.model, held, ValidationView::kFullGoal),
            distill_mse(r.model, held, ValidationView::kNoGoal));
}

TEST(Pretrain, CsvHasHeaderAndOneRowPerIteration) {
  sim::SimParams p;
  std::ostringstream os;
  dagger_pretrain(tiny_config(), tiny_pretrain(), p, &os);
  const std::string text = os.str();
  EXPECT_TRUE(text.starts_with("iteration,beta,train_mse,val_mse\n"));
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}

TEST(Pretrain, InvalidConfigIsConfigError) {
  sim::SimParams p;
  PretrainConfig c = tiny_pretrain();
  c.batch_size = 0;
  EXPECT_THROW(dagger_pretrain(tiny_config(), c, p), ConfigError);
}

// ---------------------------------------------------------------- checkpoints

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("tt_ckpt_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  static std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }

  std::filesystem::path dir_;
};

TEST(Fnv, KnownVectors) {
  auto h = [](std::string_view s) {
    return fnv1a64({reinterpret_cast<const unsigned char*>(s.data()), s.size()});
  };
  EXPECT_EQ(h(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(h("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(h("foobar"), 0x85944171f73967e8ULL);
}

TEST_F(CheckpointTest, SaveLoadSaveIsByteIdentical) {
  Bfm<float> model(tiny_config(), 21);
  save_bfm(dir_ / "a.ckpt", model, {{"note", "first save"}});
  Bfm<float> loaded = load_bfm(dir_ / "a.ckpt");
  EXPECT_EQ(loaded.config(), model.config());
  save_bfm(dir_ / "b.ckpt", loaded, {{"note", "first save"}});
  EXPECT_EQ(slurp(dir_ / "a.ckpt"), slurp(dir_ / "b.ckpt"));
  EXPECT_EQ(parameter_hash(loaded.params()), parameter_hash(model.params()));
}

TEST_F(CheckpointTest, ManifestRecordsConfigAndMetadata) {
  Bfm<float> model(tiny_config(), 21);
  save_bfm(dir_ / "a.ckpt", model, {{"iterations", "3"}});
  const Manifest m = read_manifest(dir_ / "a.ckpt");
  EXPECT_EQ(m.kind, "bfm");
  ASSERT_NE(m.meta_value("iterations"), nullptr);
  EXPECT_EQ(*m.meta_value("iterations"), "3");
  EXPECT_EQ(bfm_config_from(m), tiny_config());
  EXPECT_EQ(m.tensors.size(), model.params().size());
  EXPECT_EQ(m.hash, parameter_hash(model.params()));
}

TEST_F(CheckpointTest, FlippedBlobByteIsHashMismatch) {
  Bfm<float> model(tiny_config(), 21);
  save_bfm(dir_ / "a.ckpt", model);
  std::string bytes = slurp(dir_ / "a.ckpt");
  bytes[bytes.size() - 7] ^= 0x01;
  std::ofstream(dir_ / "a.ckpt", std::ios::binary | std::ios::trunc) << bytes;
  EXPECT_THROW(load_bfm(dir_ / "a.ckpt"), HashMismatchError);
}

TEST_F(CheckpointTest, WidthMismatchIsShapeMismatch) {
  Bfm<float> model(tiny_config(), 21);
  save_bfm(dir_ / "a.ckpt", model);
  BfmConfig wider = tiny_config();
  wider.d_model = 16;
  EXPECT_THROW(load_bfm(dir_ / "a.ckpt", &wider), ShapeMismatchError);
  Bfm<float> other(wider, 0);
  const LoadedCheckpoint ck = load_checkpoint(dir_ / "a.ckpt");
  EXPECT_THROW(assign_tensors(other.params(), ck), ShapeMismatchError);
}

TEST_F(CheckpointTest, MalformedFilesAreCheckpointErrors) {
  std::ofstream(dir_ / "junk.ckpt") << "hello\n";
  EXPECT_THROW(load_checkpoint(dir_ / "junk.ckpt"), CheckpointError);
  EXPECT_THROW(load_checkpoint(dir_ / "missing.ckpt"), CheckpointError);
  Bfm<float> model(tiny_config(), 21);
  save_bfm(dir_ / "a.ckpt", model);
  std::string bytes = slurp(dir_ / "a.ckpt");
  bytes.resize(bytes.size() - 4);
  std::ofstream(dir_ / "a.ckpt", std::ios::binary | std::ios::trunc) << bytes;
  EXPECT_THROW(load_checkpoint(dir_ / "a.ckpt"), CheckpointError);
}

}  // namespace
}  // namespace tt::bfm
