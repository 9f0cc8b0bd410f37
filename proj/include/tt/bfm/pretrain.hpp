#ifndef TT_BFM_PRETRAIN_HPP_
#define TT_BFM_PRETRAIN_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tt/bfm/expert.hpp"
#include "tt/bfm/model.hpp"
#include "tt/sim/types.hpp"

namespace tt::bfm {

enum class BetaSchedule { kLinear, kConstantOne };

struct PretrainConfig {
  int iterations = 50;
  int states_per_iteration = 20000;
  int envs = 64;
  int episode_length = 300;
  int segment_min = 30;  // control steps before the pose target is resampled
  int segment_max = 90;
  int updates_per_iteration = 200;
  int batch_size = 256;
  double lr = 1e-3;
  double grad_clip = 1.0;
  int validation_states = 4000;
  std::uint64_t seed = 0;
  BetaSchedule beta = BetaSchedule::kLinear;
  PoseSampling pose;
  ExpertConfig expert;

  void validate() const;
};

// beta for iteration i in [0, iterations): 1 -> 0 linearly, or always 1.
double beta_at(const PretrainConfig& cfg, int iteration);

struct PretrainRow {
  int iteration = 0;
  double beta = 0.0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

// Expert-labelled states. Goals are stored whole; masks are drawn when a
// minibatch is assembled.
struct DistillSet {
  std::vector<std::array<float, kStateDim>> proprio;
  std::vector<PoseGoal> goal;
  std::vector<sim::Action> action;
  std::size_t size() const { return action.size(); }
};

struct PretrainResult {
  Bfm<float> model;
  std::vector<PretrainRow> curve;
  double initial_val_mse = 0.0;
  double final_val_mse = 0.0;
  std::size_t dataset_size = 0;
};

// Online distillation from the scripted experts. Each iteration rolls out a
// beta-mixture of expert and student (per-step coin), relabels every visited
// state with the expert action, aggregates, and fits the trunk mean by MSE
// under random goal masks. TrainingError if the validation loss diverges.
// `params` is never modified.
PretrainResult dagger_pretrain(const BfmConfig& bfm_cfg, const PretrainConfig& cfg,
                               const sim::SimParams& params, std::ostream* csv = nullptr);

// Expert-only data collection with the same training loop.
PretrainResult behavior_cloning(const BfmConfig& bfm_cfg, PretrainConfig cfg,
                                const sim::SimParams& params, std::ostream* csv = nullptr);

// Which goal tokens the validation pass shows the model.
enum class ValidationView { kFullGoal, kNoGoal };

// Expert rollouts with a fixed seed, for held-out evaluation.
DistillSet collect_expert_set(const PretrainConfig& cfg, const sim::SimParams& params,
                              int states, std::uint64_t seed);

double distill_mse(Bfm<float>& model, const DistillSet& data, ValidationView view);

void write_pretrain_csv(std::ostream& os, const std::vector<PretrainRow>& rows);

}  // namespace tt::bfm

#endif  // TT_BFM_PRETRAIN_HPP_
