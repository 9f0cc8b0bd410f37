#ifndef TT_CLI_CONFIG_HPP_
#define TT_CLI_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tt/adapter/policy.hpp"
#include "tt/bfm/pretrain.hpp"
#include "tt/eval/experiments.hpp"
#include "tt/ppo/config.hpp"

namespace tt::cli {

struct EvalSection {
  int episodes = 256;
  int batch = 64;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<double> friction_grid{0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6};
  std::vector<double> gravity_grid{0.5, 0.75, 1.0, 1.25, 1.5};
  std::vector<std::vector<int>> ablation_hidden{{512, 512, 512}, {256, 256}};
  std::vector<bool> ablation_current_pose{true, false};
  std::vector<bool> ablation_joint_conditioning{true, false};
};

struct IoSection {
  std::string output = "runs";
  std::string run_id;      // empty: derived from command, task, mode and seed
  std::string checkpoint;  // pretrained model for train / ablate
};

// Every tunable of a run. The JSON form has the sections
//   seed, sim {params, episode}, bfm {model, pretrain},
//   adapter {encoder, actor, prompt}, ppo {..., critic}, eval, io.
// Absent keys keep their defaults; unknown keys are a ConfigError.
struct RunConfig {
  std::uint64_t seed = 0;
  sim::SimParams sim;
  sim::EnvOptions episode;
  bfm::BfmConfig bfm;
  bfm::PretrainConfig pretrain;
  adapter::TaskEncoderConfig encoder;
  adapter::ActorConfig actor;
  adapter::PromptSpec prompt;
  ppo::PpoConfig ppo;
  ppo::CriticConfig critic;
  EvalSection eval;
  IoSection io;

  eval::EvalOptions eval_options() const;
  eval::SweepGrid sweep_grid(sim::Task task) const;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
// Fully resolved JSON; parse_run_config(dump_run_config(c)) reproduces c.
std::string dump_run_config(const RunConfig& config);

}  // namespace tt::cli

#endif  // TT_CLI_CONFIG_HPP_
