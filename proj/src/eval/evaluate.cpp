#include "tt/eval/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>

#include "csv.hpp"
#include "tt/bfm/expert.hpp"
#include "tt/error.hpp"
#include "tt/sim/physics.hpp"

namespace tt::eval {

void EvalOptions::validate() const {
  if (episodes < 1) throw ConfigError("eval: episodes must be >= 1");
  if (batch < 1) throw ConfigError("eval: batch must be >= 1");
}

EvalResult evaluate(const Controller& controller, sim::Task task, std::uint64_t seed,
                    const EvalOptions& options) {
  options.validate();
  sim::EnvOptions env_options = options.env;
  env_options.record_trace = true;

  EvalResult result;
  result.episodes.resize(static_cast<std::size_t>(options.episodes));
  int successes = 0;
  std::vector<const sim::Env*> running;
  std::vector<int> index;
  std::vector<sim::Action> actions;

  for (int start = 0; start < options.episodes; start += options.batch) {
    const int n = std::min(options.batch, options.episodes - start);
    std::vector<sim::Env> envs;
    envs.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      envs.emplace_back(options.sim, env_options);
      auto rng = num::make_stream(seed, static_cast<std::uint64_t>(start + i));
      envs.back().reset(task, rng);
    }
    for (;;) {
      running.clear();
      index.clear();
      for (int i = 0; i < n; ++i) {
        if (!envs[i].done()) {
          running.push_back(&envs[i]);
          index.push_back(i);
        }
      }
      if (running.empty()) break;
      actions.assign(running.size(), sim::Action{});
      controller(running, actions);
      for (std::size_t k = 0; k < running.size(); ++k) {
        try {
          envs[index[k]].step(actions[k]);
        } catch (const SimulationError& e) {
          throw SimulationError("episode " + std::to_string(start + index[k]) + ": " + e.what());
        }
      }
    }
    for (int i = 0; i < n; ++i) {
      const sim::Env& env = envs[i];
      const sim::WindowStats st = sim::measure_window(env.trace(), env.goal(), env.params());
      EpisodeRecord& rec = result.episodes[static_cast<std::size_t>(start + i)];
      rec.termination = env.termination();
      rec.success =
          sim::success_from_stats(st, env.termination(), env.goal(), options.thresholds);
      rec.steps = env.steps();
      for (const auto& s : env.trace().steps) rec.episode_return += s.reward;
      rec.mean_speed = st.mean_speed;
      rec.mean_facing_error = st.mean_facing_error;
      successes += rec.success ? 1 : 0;
    }
  }
  result.success_rate = 100.0 * successes / options.episodes;
  return result;
}

Controller mean_action_controller(adapter::Policy<float>& policy) {
  return [&policy](std::span<const sim::Env* const> envs, std::span<sim::Action> actions) {
    std::vector<adapter::Observation> obs;
    obs.reserve(envs.size());
    for (const sim::Env* e : envs) {
      obs.push_back(adapter::observe(e->state(), e->goal(), e->params(), policy.prompt()));
    }
    num::Tape<float> tape(num::GradMode::kNone);
    const num::Tensor<float>& mean = policy.forward(tape, obs).mean.value();
    for (std::size_t r = 0; r < envs.size(); ++r) {
      for (int c = 0; c < sim::kActionDim; ++c) {
        actions[r][c] = mean.at(static_cast<int>(r), c);
      }
    }
  };
}

EvalResult evaluate(adapter::Policy<float>& policy, std::uint64_t seed,
                    const EvalOptions& options) {
  return evaluate(mean_action_controller(policy), policy.task(), seed, options);
}

Controller reach_expert_controller() {
  // Arm raised forward; the base parks so the hand lands on the target,
  // approaching along the spawn-to-target line.
  constexpr double kQ1 = 1.2;
  constexpr double kQ2 = 0.3;
  return [](std::span<const sim::Env* const> envs, std::span<sim::Action> actions) {
    for (std::size_t i = 0; i < envs.size(); ++i) {
      const sim::Env& env = *envs[i];
      const sim::Vec2 to_target = env.goal().target - env.goal().origin;
      const double heading = std::atan2(to_target.y, to_target.x);
      const double reach = sim::hand_offset(kQ1, kQ2, env.params()).extension;
      bfm::PoseTarget t;
      t.position = env.goal().target - sim::Vec2::unit(heading) * reach;
      t.heading = heading;
      t.q1 = kQ1;
      t.q2 = kQ2;
      actions[i] = bfm::expert_action(env.state(), bfm::relative_goal(env.state(), t),
                                      env.params());
    }
  };
}

Controller random_controller(std::uint64_t seed) {
  auto rng = std::make_shared<std::mt19937_64>(seed);
  return [rng](std::span<const sim::Env* const> envs, std::span<sim::Action> actions) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < envs.size(); ++i) {
      for (double& a : actions[i]) a = u(*rng);
    }
  };
}

Summary seeds_summary(std::span<const double> rates) {
  if (rates.empty()) throw ConfigError("seeds_summary: no rates");
  const double n = static_cast<double>(rates.size());
  Summary s;
  s.mean = std::accumulate(rates.begin(), rates.end(), 0.0) / n;
  if (rates.size() < 2) {
    s.std = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  double ss = 0.0;
  for (double r : rates) ss += (r - s.mean) * (r - s.mean);
  s.std = std::sqrt(ss / (n - 1.0));
  return s;
}

EvalReport make_report(sim::Task task, std::string mode, int episodes,
                       std::vector<std::uint64_t> seeds, std::vector<double> rates) {
  if (seeds.size() != rates.size()) {
    throw ContractError("make_report: " + std::to_string(seeds.size()) + " seeds, " +
                        std::to_string(rates.size()) + " rates");
  }
  EvalReport r;
  r.task = task;
  r.mode = std::move(mode);
  r.episodes = episodes;
  r.seeds = std::move(seeds);
  r.rates = std::move(rates);
  r.summary = seeds_summary(r.rates);
  return r;
}

namespace {
constexpr const char* kReportHeader = "task,mode,episodes,seed,success_rate,mean,std";
}

void write_report_csv(std::ostream& os, const EvalReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << kReportHeader << '\n';
  for (std::size_t i = 0; i < r.rates.size(); ++i) {
    out << sim::task_name(r.task) << ',' << r.mode << ',' << r.episodes << ',' << r.seeds[i]
        << ',' << r.rates[i] << ',' << r.summary.mean << ',' << r.summary.std << '\n';
  }
  os << out.str();
}

EvalReport read_report_csv(std::istream& is) {
  csv::expect_header(is, kReportHeader, "eval report");
  const auto rows = csv::rows(is, 7, "eval report");
  if (rows.empty()) throw ConfigError("eval report csv: no rows");
  std::vector<std::uint64_t> seeds;
  std::vector<double> rates;
  for (const auto& row : rows) {
    if (row[0] != rows[0][0] || row[1] != rows[0][1] || row[2] != rows[0][2]) {
      throw ConfigError("eval report csv: rows disagree on task, mode or episodes");
    }
    try {
      seeds.push_back(std::stoull(row[3]));
    } catch (const std::logic_error&) {
      throw ConfigError("eval report csv: bad seed '" + row[3] + "'");
    }
    rates.push_back(csv::to_double(row[4], "eval report"));
  }
  return make_report(sim::parse_task(rows[0][0]), rows[0][1],
                     static_cast<int>(csv::to_double(rows[0][2], "eval report")),
                     std::move(seeds), std::move(rates));
}

}  // namespace tt::eval
