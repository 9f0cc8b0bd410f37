#ifndef TT_CLI_APP_HPP_
#define TT_CLI_APP_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tt/cli/config.hpp"
#include "tt/ppo/trainer.hpp"

namespace tt::cli {

// Environment variable that overrides io.output (the --out flag wins over it).
inline constexpr const char* kOutputEnv = "TT_OUTPUT";

// Runs one subcommand: pretrain, train, eval, sweep, ablate or inspect.
// Returns 0 on success, 2 for bad flags (usage on `err`), 1 for runtime
// errors (diagnostic on `err`).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Trained policy plus its critic, with task, mode and network sizes recorded
// so the policy can be rebuilt without the training config.
void save_policy_checkpoint(const std::filesystem::path& path, adapter::Policy<float>& policy,
                            ppo::Critic<float>& critic, const RunConfig& config,
                            long long env_steps);

// Rebuilds a policy from a policy checkpoint, or wraps a pretrained model
// checkpoint in a fresh policy of `mode`. The prompt comes from `config`.
adapter::Policy<float> load_policy_checkpoint(const std::filesystem::path& path,
                                              const RunConfig& config,
                                              std::optional<sim::Task> task,
                                              std::optional<adapter::Mode> mode);

}  // namespace tt::cli

#endif  // TT_CLI_APP_HPP_
