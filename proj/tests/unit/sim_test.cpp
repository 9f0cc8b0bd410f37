#include <gtest/gtest.h>

#include <sstream>

#include "tt/error.hpp"
#include "tt/sim/env.hpp"

namespace tt::sim {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Physics, RestingStateOnlyAdvancesTime) {
  SimParams p;
  SimState s;
  s.theta = 0.7;
  s.pos = {1.0, -2.0};
  const SimState next = physics_substep(s, Action{}, p);
  SimState expect = s;
  expect.ticks = 1;
  EXPECT_EQ(next, expect);
}

TEST(Physics, RestingBlockStaysUpright) {
  SimParams p;
  SimState s;
  s.block = BlockState{{5.0, 0.0}};
  SimState cur = s;
  for (int i = 0; i < 100; ++i) cur = physics_substep(cur, Action{}, p);
  EXPECT_EQ(cur.block, s.block);
}

TEST(Physics, ConstantForceMatchesDiscreteRecursion) {
  SimParams p = apply_perturbation(SimParams{}, 0.01, 1.0);
  const Action a{0.5, 0.0, 0.0, 0.0, 0.0};
  const double force = 0.5 * p.action_limits[0];
  SimState s;
  double v = 0.0, x = 0.0;
  const int n = 120;
  for (int k = 0; k < n; ++k) {
    s = physics_substep(s, a, p);
    v = v + p.dt_sim * (force - p.friction_mult * p.base_damping * v) / p.base_mass;
    v = std::max(0.0, v - p.dt_sim * p.rolling_decel * p.gravity_mult);
    x += p.dt_sim * v;
  }
  EXPECT_NEAR(s.vel.x, v, 1e-12);
  EXPECT_NEAR(s.pos.x, x, 1e-12);
  EXPECT_DOUBLE_EQ(s.vel.y, 0.0);
  // Frictionless estimate f n dt / m, corrected only by the small drag terms.
  const double ideal = force * n * p.dt_sim / p.base_mass;
  EXPECT_NEAR(s.vel.x, ideal, 0.2 * ideal);
  EXPECT_LT(s.vel.x, ideal);
}

TEST(Physics, ForceIsAppliedInBodyFrame) {
  SimParams p;
  SimState s;
  s.theta = kPi / 2;
  s = physics_substep(s, Action{1.0, 0.0, 0.0, 0.0, 0.0}, p);
  EXPECT_NEAR(s.vel.x, 0.0, 1e-12);
  EXPECT_GT(s.vel.y, 0.0);
}

TEST(Physics, ZeroGravityMeansZeroArmTorque) {
  SimParams p;
  p.gravity_mult = 0.0;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const auto g = gravity_torques(u(rng), u(rng), p);
    EXPECT_EQ(g[0], 0.0);
    EXPECT_EQ(g[1], 0.0);
  }
}

TEST(Physics, GravityTorqueHandValues) {
  SimParams p;
  const double g = p.gravity;
  auto t = gravity_torques(kPi / 2, 0.0, p);
  EXPECT_NEAR(t[0], (1.0 * 0.3 + 0.8 * 0.6) * g + 0.8 * 0.25 * g, 1e-12);
  EXPECT_NEAR(t[1], 0.8 * 0.25 * g, 1e-12);
  p = apply_perturbation(p, 1.0, 1.5);
  EXPECT_NEAR(gravity_torques(kPi / 2, 0.0, p)[1], 1.5 * 0.8 * 0.25 * g, 1e-12);
}

TEST(Physics, NonFiniteInputIsSimulationError) {
  SimParams p;
  SimState s;
  EXPECT_THROW(physics_substep(s, Action{std::nan(""), 0, 0, 0, 0}, p), SimulationError);
  s.vel.x = std::numeric_limits<double>::infinity();
  EXPECT_THROW(physics_substep(s, Action{}, p), SimulationError);
}

TEST(Physics, ZeroActionNeverAddsBaseEnergy) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (double mu : {1.0, 1.5, 3.0}) {
    SimParams p = apply_perturbation(SimParams{}, mu, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      SimState s;
      s.vel = {u(rng), u(rng)};
      s.omega = u(rng);
      s.theta = u(rng);
      auto energy = [&](const SimState& st) {
        return 0.5 * p.base_mass * st.vel.dot(st.vel) + 0.5 * p.base_inertia * st.omega * st.omega;
      };
      double e = energy(s);
      for (int k = 0; k < 400; ++k) {
        s = physics_substep(s, Action{}, p);
        const double e2 = energy(s);
        ASSERT_LE(e2, e);
        e = e2;
      }
    }
  }
}

TEST(ControlStep, AdvancesExactlyOneControlPeriod) {
  SimParams p;
  SimState s;
  const auto r = control_step(s, Action{0.3, -0.2, 0.1, 0.5, -0.5}, p);
  EXPECT_EQ(r.state.ticks, 4);
  EXPECT_EQ(r.state.time(p), 1.0 / 30.0);
  EXPECT_EQ(p.dt_control(), 1.0 / 30.0);
}

TEST(ControlStep, EqualsFourSubsteps) {
  SimParams p;
  SimState s;
  s.block = BlockState{{0.5, 0.0}};
  s.vel = {1.0, 0.2};
  const Action a{0.3, -0.2, 0.1, 0.5, -0.5};
  SimState manual = s;
  for (int i = 0; i < 4; ++i) manual = physics_substep(manual, a, p);
  EXPECT_EQ(control_step(s, a, p).state, manual);
}

// Drives the base with a hanging arm straight through a block on the x axis
// and counts contact entries against the geometry of the sweep.
std::vector<ContactEvent> sweep(double start, double speed, int* entry_tick,
                                double* entry_speed) {
  SimParams p;
  SimState s;
  s.pos.x = start;
  s.vel = {speed, 0.0};
  s.block = BlockState{{1.5, 0.0}};
  std::vector<ContactEvent> events;
  const double entry_x = 1.5 - (p.block_radius + p.hand_radius);
  *entry_tick = -1;
  for (int k = 0; k < 30 && s.pos.x < 3.0; ++k) {
    auto r = control_step(s, Action{}, p);
    // Geometric oracle: the hand (at the base, arm hanging) enters the
    // block's contact disk on the first substep that crosses entry_x.
    SimState sub = s;
    for (int i = 0; i < 4; ++i) {
      const SimState nxt = physics_substep(sub, Action{}, p);
      if (*entry_tick < 0 && sub.pos.x <= entry_x && nxt.pos.x > entry_x) {
        *entry_tick = static_cast<int>(nxt.ticks);
        *entry_speed = (nxt.pos.x - sub.pos.x) / p.dt_sim;
      }
      sub = nxt;
    }
    events.insert(events.end(), r.events.begin(), r.events.end());
    s = r.state;
  }
  return events;
}

TEST(ControlStep, FastSweepEmitsOneImpact) {
  int tick = 0;
  double speed = 0.0;
  const auto events = sweep(0.0, 2.0, &tick, &speed);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_TRUE(events[0].impact);
  EXPECT_EQ(events[0].tick, tick);
  EXPECT_NEAR(events[0].normal_speed, speed, 1e-9);
}

TEST(ControlStep, SlowSweepTouchesWithoutImpact) {
  int tick = 0;
  double speed = 0.0;
  const auto events = sweep(1.0, 0.6, &tick, &speed);
  ASSERT_EQ(events.size(), 1u);
  EXPECT_FALSE(events[0].impact);
}

TEST(Block, HardHitTipsItOverAndStaysDown) {
  SimParams p;
  SimState s;
  s.vel = {3.0, 0.0};
  s.block = BlockState{{1.0, 0.0}};
  bool was_fallen = false;
  for (int k = 0; k < 120; ++k) {
    s = control_step(s, Action{}, p).state;
    if (was_fallen) {
      ASSERT_TRUE(s.block->fallen);
    }
    was_fallen = s.block->fallen;
  }
  EXPECT_TRUE(s.block->fallen);
}

TEST(Block, GentleTouchDoesNotTopple) {
  SimParams p;
  SimState s;
  s.vel = {1.0, 0.0};
  s.block = BlockState{{1.0, 0.0}};
  for (int k = 0; k < 120; ++k) s = control_step(s, Action{}, p).state;
  EXPECT_FALSE(s.block->fallen);
}

TEST(Perturbation, ScalesOnlyTheMultipliers) {
  const SimParams base;
  EXPECT_EQ(apply_perturbation(base, 1.0, 1.0), base);
  SimParams f = apply_perturbation(base, 0.4, 1.0);
  EXPECT_DOUBLE_EQ(f.friction_mult, 0.4);
  f.friction_mult = 1.0;
  EXPECT_EQ(f, base);
  SimParams g = apply_perturbation(base, 1.0, 1.5);
  EXPECT_DOUBLE_EQ(g.gravity_mult, 1.5);
  g.gravity_mult = 1.0;
  EXPECT_EQ(g, base);
  EXPECT_THROW(apply_perturbation(base, 0.0, 1.0), ConfigError);
  EXPECT_THROW(apply_perturbation(base, 1.0, -1.0), ConfigError);
}

TEST(Params, ValidateRejectsBadTiming) {
  SimParams p;
  EXPECT_NO_THROW(validate(p));
  p.control_decimation = 3;
  EXPECT_THROW(validate(p), ConfigError);
}

// ---- goals -----------------------------------------------------------------

TEST(SampleGoal, DeterministicForSeed) {
  for (Task t : {Task::kDirection, Task::kSteering, Task::kReach, Task::kStrike, Task::kDash}) {
    std::mt19937_64 a(42), b(42);
    EXPECT_EQ(sample_goal(t, a), sample_goal(t, b));
  }
}

TEST(SampleGoal, DirectionsAreUniformOnTheCircle) {
  std::mt19937_64 rng(7);
  const int n = 10000;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    const TaskGoal g = sample_goal(Task::kDirection, rng);
    EXPECT_NEAR(g.direction.norm(), 1.0, 1e-12);
    EXPECT_GE(g.speed, 0.5);
    EXPECT_LE(g.speed, 1.5);
    sx += g.direction.x;
    sy += g.direction.y;
  }
  // Each component of a uniform unit vector has variance 1/2.
  const double sigma = std::sqrt(0.5 / n);
  EXPECT_LT(std::abs(sx / n), 3 * sigma);
  EXPECT_LT(std::abs(sy / n), 3 * sigma);
}

TEST(SampleGoal, ReachAndStrikeStayInRange) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 10000; ++i) {
    const double r = sample_goal(Task::kReach, rng).target.norm();
    ASSERT_GE(r, 0.5);
    ASSERT_LE(r, 3.0);
    const double b = sample_goal(Task::kStrike, rng).block.norm();
    ASSERT_GE(b, 3.0);
    ASSERT_LE(b, 6.0);
  }
}

TEST(GoalObservation, IdentityFrameGivesWorldQuantities) {
  SimState s;
  TaskGoal g;
  g.task = Task::kSteering;
  g.direction = Vec2::unit(0.3);
  g.facing = Vec2::unit(-2.0);
  g.speed = 1.2;
  const auto obs = goal_observation(s, g);
  ASSERT_EQ(obs.size(), 5u);
  EXPECT_DOUBLE_EQ(obs[0], g.direction.x);
  EXPECT_DOUBLE_EQ(obs[1], g.direction.y);
  EXPECT_DOUBLE_EQ(obs[2], g.facing.x);
  EXPECT_DOUBLE_EQ(obs[3], g.facing.y);
  EXPECT_DOUBLE_EQ(obs[4], 1.2);
}

TEST(GoalObservation, QuarterTurnRotatesDirection) {
  SimState s;
  s.theta = kPi / 2;
  TaskGoal g;
  g.direction = {1.0, 0.0};
  const auto obs = goal_observation(s, g);
  EXPECT_NEAR(obs[0], 0.0, 1e-15);
  EXPECT_NEAR(obs[1], -1.0, 1e-15);
}

struct Scene {
  SimState state;
  SimState next;
  TaskGoal goal;
};

Scene random_scene(Task task, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  Scene sc;
  sc.goal = sample_goal(task, rng);
  sc.goal.origin = {u(rng), u(rng)};
  sc.goal.origin_heading = u(rng);
  sc.goal.target = sc.goal.target + Vec2{u(rng), u(rng)};
  SimState& s = sc.state;
  s.pos = {u(rng), u(rng)};
  s.theta = wrap_angle(u(rng));
  s.vel = {u(rng), u(rng)};
  s.omega = u(rng);
  s.q1 = u(rng) / 3;
  s.q2 = u(rng) / 3;
  if (task == Task::kStrike) s.block = BlockState{sc.goal.block, 0.2};
  sc.next = control_step(s, Action{0.5, -0.3, 0.2, 0.4, 0.1}, SimParams{}).state;
  return sc;
}

Scene transform(const Scene& sc, double alpha, Vec2 shift) {
  auto tp = [&](Vec2 p) { return p.rotated(alpha) + shift; };
  auto ts = [&](SimState s) {
    s.pos = tp(s.pos);
    s.vel = s.vel.rotated(alpha);
    s.theta = wrap_angle(s.theta + alpha);
    if (s.block) s.block->position = tp(s.block->position);
    return s;
  };
  Scene out = sc;
  out.state = ts(sc.state);
  out.next = ts(sc.next);
  TaskGoal& g = out.goal;
  g.direction = g.direction.rotated(alpha);
  g.facing = g.facing.rotated(alpha);
  g.axis = g.axis.rotated(alpha);
  g.target = tp(g.target);
  g.block = tp(g.block);
  g.origin = tp(g.origin);
  g.origin_heading = wrap_angle(g.origin_heading + alpha);
  return out;
}

TEST(GoalObservation, InvariantUnderRigidTransforms) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  SimParams p;
  for (Task t : {Task::kDirection, Task::kSteering, Task::kReach, Task::kStrike, Task::kDash}) {
    for (int i = 0; i < 200; ++i) {
      const Scene a = random_scene(t, rng);
      const Scene b = transform(a, u(rng), {u(rng) * 3, u(rng) * 3});
      const auto oa = goal_observation(a.state, a.goal);
      const auto ob = goal_observation(b.state, b.goal);
      ASSERT_EQ(oa.size(), static_cast<std::size_t>(goal_dim(t)));
      for (std::size_t k = 0; k < oa.size(); ++k) EXPECT_NEAR(oa[k], ob[k], 1e-9);
      const auto ea = proprio_extra(a.state, a.goal, p);
      const auto eb = proprio_extra(b.state, b.goal, p);
      for (std::size_t k = 0; k < ea.size(); ++k) EXPECT_NEAR(ea[k], eb[k], 1e-9);
      const auto pa = proprio(a.state, p);
      const auto pb = proprio(b.state, p);
      for (std::size_t k = 2; k < pa.size(); ++k) EXPECT_NEAR(pa[k], pb[k], 1e-9);
      EXPECT_NEAR(task_reward(a.state, a.next, a.goal, p, true),
                  task_reward(b.state, b.next, b.goal, p, true), 1e-9);
    }
  }
}

// ---- rewards ---------------------------------------------------------------

SimState moved(const SimState& s, Vec2 delta, int ticks) {
  SimState n = s;
  n.pos = s.pos + delta;
  n.ticks = s.ticks + ticks;
  return n;
}

TEST(Reward, SteeringPerfectTrackingIsOnePointFive) {
  SimParams p;
  TaskGoal g;
  g.task = Task::kSteering;
  g.direction = Vec2::unit(0.4);
  g.facing = Vec2::unit(1.0);
  g.speed = 0.9;
  SimState s;
  s.theta = 1.0;
  const SimState n = moved(s, g.direction * (0.9 / 30.0), 4);
  EXPECT_NEAR(task_reward(s, n, g, p), 1.5, 1e-12);
}

TEST(Reward, HandAtReachTargetIsOne) {
  SimParams p;
  SimState s;
  s.theta = 0.3;
  s.q1 = 0.8;
  TaskGoal g;
  g.task = Task::kReach;
  g.target = hand_position(s, p);
  EXPECT_DOUBLE_EQ(task_reward(s, s, g, p), 1.0);
}

TEST(Reward, RecordedTraceMatchesFormulas) {
  SimParams p;
  std::mt19937_64 rng(5);
  for (Task t : {Task::kDirection, Task::kSteering, Task::kReach, Task::kStrike, Task::kDash}) {
    Env env(p);
    env.reset(t, rng);
    const Action acts[3] = {{0.7, 0.1, 0.3, 0.2, 0.0}, {0.9, -0.2, 0.0, 0.5, 0.5},
                            {-0.4, 0.3, -0.6, 0.0, 0.2}};
    for (const Action& a : acts) env.step(a);
    const EpisodeTrace& tr = env.trace();
    const TaskGoal& g = env.goal();
    ASSERT_EQ(tr.steps.size(), 3u);
    for (int k = 0; k < 3; ++k) {
      const SimState& a = k == 0 ? tr.initial : tr.steps[k - 1].state;
      const SimState& b = tr.steps[k].state;
      const double vx = (b.pos.x - a.pos.x) * 30.0, vy = (b.pos.y - a.pos.y) * 30.0;
      const double along = vx * g.direction.x + vy * g.direction.y;
      const double hx = b.pos.x + std::cos(b.theta) * (0.6 * std::sin(b.q1) + 0.5 * std::sin(b.q1 + b.q2));
      const double hy = b.pos.y + std::sin(b.theta) * (0.6 * std::sin(b.q1) + 0.5 * std::sin(b.q1 + b.q2));
      double expect = 0.0;
      switch (t) {
        case Task::kDirection: expect = std::exp(-2 * std::abs(along - g.speed)); break;
        case Task::kSteering: {
          double err = std::abs(std::remainder(b.theta - std::atan2(g.facing.y, g.facing.x), 2 * kPi));
          expect = std::exp(-2 * std::abs(along - g.speed)) + 0.5 * std::exp(-2 * err);
          break;
        }
        case Task::kReach: expect = std::exp(-4 * std::hypot(hx - g.target.x, hy - g.target.y)); break;
        case Task::kStrike:
          expect = std::exp(-0.5 * std::hypot(hx - g.block.x, hy - g.block.y));
          break;
        case Task::kDash:
          expect = std::clamp((vx * g.axis.x + vy * g.axis.y) / 4.0, 0.0, 1.0);
          break;
      }
      EXPECT_NEAR(tr.steps[k].reward, expect, 1e-12) << task_name(t) << " step " << k;
    }
  }
}

TEST(Reward, StrikeBonusOnFallTransitionOnly) {
  SimParams p;
  TaskGoal g;
  g.task = Task::kStrike;
  g.block = {2.0, 0.0};
  SimState a;
  a.block = BlockState{g.block};
  SimState b = a;
  b.block->fallen = true;
  const double base = std::exp(-0.5 * 2.0);
  EXPECT_NEAR(task_reward(a, b, g, p), base + 10.0, 1e-12);
  EXPECT_NEAR(task_reward(b, b, g, p), base, 1e-12);
}

TEST(Reward, DashCoastBonusAtEnd) {
  SimParams p;
  TaskGoal g;
  g.task = Task::kDash;
  SimState a;
  a.pos = {22.0, 0.0};
  EXPECT_NEAR(task_reward(a, a, g, p, true), 2.0 * 2.0, 1e-12);
  a.pos = {40.0, 0.0};
  EXPECT_NEAR(task_reward(a, a, g, p, true), 10.0, 1e-12);
  EXPECT_NEAR(task_reward(a, a, g, p, false), 0.0, 1e-12);
}

TEST(Reward, AlwaysBounded) {
  SimParams p;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Task t : {Task::kDirection, Task::kSteering, Task::kReach, Task::kStrike, Task::kDash}) {
    Env env(p);
    env.reset(t, rng);
    for (int k = 0; k < 300 && !env.done(); ++k) {
      const auto r = env.step(Action{u(rng), u(rng), u(rng), u(rng), u(rng)});
      ASSERT_GE(r.reward, 0.0);
      ASSERT_LE(r.reward, 11.0);
    }
  }
}

// ---- success predicates ----------------------------------------------------

// A straight-line trace at constant velocity with a fixed heading.
EpisodeTrace constant_motion(Vec2 velocity, double heading, int steps,
                             Termination term = Termination::kTimeLimit) {
  EpisodeTrace tr;
  tr.initial.theta = heading;
  SimState s = tr.initial;
  for (int k = 0; k < steps; ++k) {
    s = moved(s, velocity * (1.0 / 30.0), 4);
    tr.steps.push_back({s, Action{}, 0.0});
  }
  tr.termination = term;
  return tr;
}

TaskGoal direction_goal(Task task = Task::kDirection) {
  TaskGoal g;
  g.task = task;
  g.direction = {1.0, 0.0};
  g.facing = {0.0, 1.0};
  g.speed = 1.0;
  return g;
}

TEST(Success, DirectionExactSpeedPasses) {
  SimParams p;
  EXPECT_TRUE(task_success(constant_motion({1.0, 0.0}, 0.0, 300), direction_goal(), p));
}

TEST(Success, DirectionSpeedBandIsTwentyPercent) {
  SimParams p;
  const TaskGoal g = direction_goal();
  EXPECT_FALSE(task_success(constant_motion({0.75, 0.0}, 0.0, 300), g, p));
  EXPECT_TRUE(task_success(constant_motion({0.81, 0.0}, 0.0, 300), g, p));
  EXPECT_FALSE(task_success(constant_motion({0.79, 0.0}, 0.0, 300), g, p));
  EXPECT_TRUE(task_success(constant_motion({1.19, 0.0}, 0.0, 300), g, p));
  EXPECT_FALSE(task_success(constant_motion({1.21, 0.0}, 0.0, 300), g, p));
}

TEST(Success, DirectionNeedsTimeLimitEnding) {
  SimParams p;
  EXPECT_FALSE(task_success(constant_motion({1.0, 0.0}, 0.0, 200, Termination::kOutOfArena),
                            direction_goal(), p));
}

TEST(Success, OnlyTheTrailingWindowCounts) {
  SimParams p;
  EpisodeTrace tr = constant_motion({0.0, 0.0}, 0.0, 240);
  SimState s = tr.final_state();
  for (int k = 0; k < 60; ++k) {
    s = moved(s, Vec2{1.0 / 30.0, 0.0}, 4);
    tr.steps.push_back({s, Action{}, 0.0});
  }
  EXPECT_TRUE(task_success(tr, direction_goal(), p));
}

TEST(Success, SteeringFacingToleranceIs45Degrees) {
  SimParams p;
  const TaskGoal g = direction_goal(Task::kSteering);  // facing +y
  const double deg = kPi / 180.0;
  EXPECT_TRUE(task_success(constant_motion({1.0, 0.0}, kPi / 2, 300), g, p));
  EXPECT_TRUE(task_success(constant_motion({1.0, 0.0}, kPi / 2 - 44 * deg, 300), g, p));
  EXPECT_FALSE(task_success(constant_motion({1.0, 0.0}, kPi / 2 - 46 * deg, 300), g, p));
  EXPECT_FALSE(task_success(constant_motion({0.75, 0.0}, kPi / 2, 300), g, p));
}

TEST(Success, ReachToleranceIsPointTwo) {
  SimParams p;
  TaskGoal g;
  g.task = Task::kReach;
  EpisodeTrace tr = constant_motion({0.0, 0.0}, 0.0, 10);
  g.target = {0.19, 0.0};
  EXPECT_TRUE(task_success(tr, g, p));
  g.target = {0.21, 0.0};
  EXPECT_FALSE(task_success(tr, g, p));
}

TEST(Success, StrikeNeedsFallenBlock) {
  SimParams p;
  TaskGoal g;
  g.task = Task::kStrike;
  EpisodeTrace tr = constant_motion({0.0, 0.0}, 0.0, 10);
  for (auto& st : tr.steps) st.state.block = BlockState{{3.0, 0.0}};
  EXPECT_FALSE(task_success(tr, g, p));
  tr.steps.back().state.block->fallen = true;
  EXPECT_TRUE(task_success(tr, g, p));
}

TEST(Success, DashCoastMustExceedOnePointFive) {
  SimParams p;
  TaskGoal g;
  g.task = Task::kDash;
  EpisodeTrace tr = constant_motion({0.0, 0.0}, 0.0, 2, Termination::kCoastEnded);
  tr.steps.back().state.pos = {21.6, 0.0};
  EXPECT_TRUE(task_success(tr, g, p));
  tr.steps.back().state.pos = {21.4, 0.0};
  EXPECT_FALSE(task_success(tr, g, p));
}

TEST(Success, IncompleteTraceIsContractError) {
  SimParams p;
  EXPECT_THROW(task_success(constant_motion({1, 0}, 0, 10, Termination::kRunning),
                            direction_goal(), p),
               ContractError);
}

TEST(Success, InvariantUnderRigidTransformsAndPure) {
  SimParams p;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Task t : {Task::kDirection, Task::kSteering, Task::kReach, Task::kStrike, Task::kDash}) {
    for (int ep = 0; ep < 10; ++ep) {
      Env env(p);
      env.reset(t, rng);
      while (!env.done()) env.step(Action{u(rng), u(rng), u(rng), u(rng), u(rng)});
      const bool verdict = task_success(env.trace(), env.goal(), p);
      EXPECT_EQ(task_success(env.trace(), env.goal(), p), verdict);
      // Rigidly transform the whole trace and goal.
      const double alpha = u(rng) * kPi;
      const Vec2 shift{u(rng) * 5, u(rng) * 5};
      EpisodeTrace tr = env.trace();
      Scene sc{tr.initial, tr.initial, env.goal()};
      Scene moved_sc = transform(sc, alpha, shift);
      tr.initial = moved_sc.state;
      for (auto& st : tr.steps) {
        Scene one{st.state, st.state, env.goal()};
        st.state = transform(one, alpha, shift).state;
      }
      const WindowStats a = measure_window(env.trace(), env.goal(), p);
      const WindowStats b = measure_window(tr, moved_sc.goal, p);
      EXPECT_NEAR(a.mean_speed, b.mean_speed, 1e-9);
      EXPECT_NEAR(a.mean_facing_error, b.mean_facing_error, 1e-9);
      EXPECT_EQ(task_success(tr, moved_sc.goal, p), verdict);
    }
  }
}

// ---- environment -----------------------------------------------------------

TEST(Env, IdenticalSeedsGiveIdenticalTraces) {
  SimParams p;
  for (Task t : {Task::kDirection, Task::kStrike, Task::kDash}) {
    std::string csv[2];
    for (int run = 0; run < 2; ++run) {
      std::mt19937_64 rng(77);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Env env(p);
      env.reset(t, rng);
      while (!env.done()) env.step(Action{u(rng), u(rng), u(rng), u(rng), u(rng)});
      std::ostringstream os;
      write_trace_csv(os, env.trace(), p);
      csv[run] = os.str();
    }
    EXPECT_EQ(csv[0], csv[1]);
  }
}

TEST(Env, HorizonBoundsTheTrace) {
  SimParams p;
  std::mt19937_64 rng(1);
  Env env(p);
  env.reset(Task::kReach, rng);
  while (!env.done()) env.step(Action{});
  EXPECT_EQ(env.trace().steps.size(), 300u);
  EXPECT_EQ(env.termination(), Termination::kTimeLimit);
  EXPECT_THROW(env.step(Action{}), ContractError);
  std::ostringstream os;
  write_trace_csv(os, env.trace(), p);
  const std::string csv = os.str();
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 301);
}

TEST(Env, LeavingTheArenaEndsTheEpisode) {
  SimParams p;
  EnvOptions o;
  o.arena_radius = 2.0;
  Env env(p, o);
  TaskGoal g;
  env.reset(g, 0.0);
  while (!env.done()) env.step(Action{1.0, 0, 0, 0, 0});
  EXPECT_EQ(env.termination(), Termination::kOutOfArena);
  EXPECT_LT(env.steps(), 300);
}

TEST(Env, DashCutsControlPastTheLine) {
  SimParams p;
  TaskGoal g;
  g.task = Task::kDash;
  g.line_distance = 3.0;
  Env env(p);
  env.reset(g, 0.0);
  while (!env.done()) env.step(Action{1.0, 0, 0, 0, 0});
  EXPECT_EQ(env.termination(), Termination::kCoastEnded);
  EXPECT_TRUE(env.control_cut());
  const auto& steps = env.trace().steps;
  EXPECT_EQ(steps.back().action, Action{});
  EXPECT_TRUE(task_success(env.trace(), env.goal(), p));
}

TEST(Env, FacingAwaySpawnPointsBackward) {
  SimParams p;
  EnvOptions o;
  o.spawn_facing_away = true;
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    Env env(p, o);
    env.reset(Task::kDirection, rng);
    EXPECT_GT(facing_error(env.state(), env.goal().direction), kPi - 0.5 - 1e-9);
  }
}

TEST(Env, FallenFlagIsMonotone) {
  SimParams p;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int ep = 0; ep < 20; ++ep) {
    Env env(p);
    TaskGoal g;
    g.task = Task::kStrike;
    g.block = {1.0, 0.0};
    env.reset(g, u(rng));
    bool fallen = false;
    while (!env.done()) {
      env.step(Action{u(rng), u(rng), u(rng), u(rng), u(rng)});
      if (fallen) {
        ASSERT_TRUE(env.state().block->fallen);
      }
      fallen = env.state().block->fallen;
    }
  }
}

}  // namespace
}  // namespace tt::sim
