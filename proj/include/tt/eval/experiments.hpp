#ifndef TT_EVAL_EXPERIMENTS_HPP_
#define TT_EVAL_EXPERIMENTS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "tt/eval/evaluate.hpp"
#include "tt/ppo/trainer.hpp"

namespace tt::eval {

// Physics multipliers for out-of-distribution evaluation. Both grids must
// contain 1.0, the training condition.
struct SweepGrid {
  std::vector<double> friction{0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
  std::vector<double> gravity{0.5, 0.75, 1.0, 1.25, 1.5};
  sim::Task task = sim::Task::kSteering;

  void validate() const;  // ConfigError
};

struct SweepRow {
  std::string axis;  // "baseline", "friction" or "gravity"
  double friction = 1.0;
  double gravity = 1.0;
  std::vector<double> rates;  // one per seed
  Summary summary;
};

// Evaluates policies[i] with seeds[i] at every grid point (a single policy
// is shared by all seeds). The baseline point appears once, so the table
// has |friction| + |gravity| - 1 rows. Policies are never updated.
std::vector<SweepRow> ood_sweep(std::span<adapter::Policy<float>* const> policies,
                                std::span<const std::uint64_t> seeds, const SweepGrid& grid,
                                const EvalOptions& options);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
std::vector<SweepRow> read_sweep_csv(std::istream& is);

// Full factorial over task encoder variants.
struct AblationSpec {
  std::vector<std::vector<int>> hidden{{512, 512, 512}, {256, 256}};
  std::vector<bool> current_pose{true, false};
  std::vector<bool> joint_conditioning{true, false};
  adapter::PromptSpec prior;  // used by cells with joint conditioning

  std::size_t cells() const {
    return hidden.size() * current_pose.size() * joint_conditioning.size();
  }
};

struct AblationSetup {
  const bfm::Bfm<float>* model = nullptr;
  adapter::TaskEncoderConfig encoder;  // hidden and use_current_pose are overridden per cell
  ppo::TrainSetup train;               // seed is overridden per run
  EvalOptions eval;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

struct AblationCell {
  bool joint_conditioning = false;
  std::vector<int> hidden;
  bool current_pose = false;
  std::vector<double> rates;
  Summary summary;
};

// Trains and evaluates every cell with the same PPO config and seeds.
std::vector<AblationCell> ablation_run(const AblationSpec& spec, const AblationSetup& setup);

void write_ablation_csv(std::ostream& os, const std::vector<AblationCell>& cells);
std::vector<AblationCell> read_ablation_csv(std::istream& is);

}  // namespace tt::eval

#endif  // TT_EVAL_EXPERIMENTS_HPP_
