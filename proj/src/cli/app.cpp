#include "tt/cli/app.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "tt/bfm/checkpoint.hpp"
#include "tt/error.hpp"

namespace tt::cli {

namespace fs = std::filesystem;

namespace {

std::string join_ints(const std::vector<int>& v) {
  if (v.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<int> split_ints(const std::string& s) {
  std::vector<int> out;
  if (s == "-") return out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      out.push_back(std::stoi(part));
    } catch (const std::logic_error&) {
      throw CheckpointError("bad size list '" + s + "' in checkpoint");
    }
  }
  return out;
}

const std::string& required(const bfm::Manifest& m, const std::string& key, bool meta) {
  const std::string* v = meta ? m.meta_value(key) : m.config_value(key);
  if (v == nullptr) throw CheckpointError("checkpoint lacks '" + key + "'");
  return *v;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

// Flags shared by every subcommand.
struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string task;
  std::string mode;
  std::string out;
  std::vector<std::string> checkpoints;
};

struct Context {
  std::string command;
  RunConfig config;
  std::optional<sim::Task> task;
  std::optional<adapter::Mode> mode;
  fs::path run_dir;
  std::ostream& out;
};

Context make_context(const std::string& command, const Flags& f, std::ostream& out) {
  RunConfig cfg = f.config.empty() ? RunConfig{} : load_run_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (const char* env = std::getenv(kOutputEnv); env != nullptr && *env != '\0') {
    cfg.io.output = env;
  }
  if (!f.out.empty()) cfg.io.output = f.out;
  Context ctx{command, cfg, std::nullopt, std::nullopt, {}, out};
  if (!f.task.empty()) ctx.task = sim::parse_task(f.task);
  if (!f.mode.empty()) ctx.mode = adapter::parse_mode(f.mode);
  return ctx;
}

// Creates <io.output>/<run id> and writes the resolved config into it.
void open_run_dir(Context& ctx) {
  std::string id = ctx.config.io.run_id;
  if (id.empty()) {
    id = ctx.command;
    if (ctx.task) id += "-" + sim::task_name(*ctx.task);
    if (ctx.mode) id += "-" + adapter::mode_name(*ctx.mode);
    id += "-seed" + std::to_string(ctx.config.seed);
  }
  ctx.run_dir = fs::path(ctx.config.io.output) / id;
  fs::create_directories(ctx.run_dir);
  auto os = open_out(ctx.run_dir / "config.json");
  os << dump_run_config(ctx.config);
}

std::string checkpoint_path(const Flags& f, const RunConfig& cfg) {
  if (!f.checkpoints.empty()) return f.checkpoints.front();
  return cfg.io.checkpoint;
}

int cmd_pretrain(Context& ctx) {
  open_run_dir(ctx);
  bfm::PretrainConfig pc = ctx.config.pretrain;
  pc.seed = ctx.config.seed;
  auto csv = open_out(ctx.run_dir / "pretrain.csv");
  bfm::PretrainResult r = bfm::dagger_pretrain(ctx.config.bfm, pc, ctx.config.sim, &csv);
  std::ostringstream a, b;
  a << std::setprecision(17) << r.initial_val_mse;
  b << std::setprecision(17) << r.final_val_mse;
  const fs::path ckpt = ctx.run_dir / "bfm.ckpt";
  bfm::save_bfm(ckpt, r.model,
                {{"seed", std::to_string(pc.seed)},
                 {"iterations", std::to_string(pc.iterations)},
                 {"initial_val_mse", a.str()},
                 {"final_val_mse", b.str()}});
  ctx.out << "validation mse " << r.initial_val_mse << " -> " << r.final_val_mse << " (ratio "
          << r.final_val_mse / r.initial_val_mse << ")\n"
          << "wrote " << ckpt.string() << '\n';
  return 0;
}

adapter::Policy<float> fresh_policy(const Context& ctx, const std::string& ckpt) {
  const sim::Task task = *ctx.task;
  const adapter::Mode mode = *ctx.mode;
  if (mode == adapter::Mode::kPurePpo) {
    return adapter::Policy<float>(task, ctx.config.actor, ctx.config.seed);
  }
  return adapter::Policy<float>(mode, task, adapter::load_pretrained(ckpt), ctx.config.encoder,
                                ctx.config.prompt, ctx.config.seed);
}

int cmd_train(Context& ctx, const Flags& f) {
  if (!ctx.task || !ctx.mode) throw ConfigError("train needs --task and --mode");
  adapter::Policy<float> policy = fresh_policy(ctx, checkpoint_path(f, ctx.config));
  open_run_dir(ctx);
  ppo::TrainSetup setup;
  setup.task = *ctx.task;
  setup.ppo = ctx.config.ppo;
  setup.critic = ctx.config.critic;
  setup.sim = ctx.config.sim;
  setup.env = ctx.config.episode;
  setup.seed = ctx.config.seed;
  const int iterations = setup.ppo.iterations();
  const int every = setup.ppo.checkpoint_every;
  auto csv = open_out(ctx.run_dir / "metrics.csv");
  const ppo::TrainResult r =
      ppo::train(policy, setup, &csv, [&](ppo::Trainer& t, const ppo::MetricsRow& row) {
        if (every > 0 && row.iteration % every == 0 && row.iteration != iterations) {
          save_policy_checkpoint(
              ctx.run_dir / ("policy-" + std::to_string(row.iteration) + ".ckpt"), t.policy(),
              t.critic(), ctx.config, t.env_steps());
        }
        if (row.iteration == iterations) {
          save_policy_checkpoint(ctx.run_dir / "policy.ckpt", t.policy(), t.critic(),
                                 ctx.config, t.env_steps());
        }
        return true;
      });
  const ppo::MetricsRow& last = r.metrics.back();
  ctx.out << "trained " << r.env_steps << " env steps, " << r.optimizer_steps
          << " optimizer steps; last success rate " << last.success_rate << "\n"
          << "wrote " << (ctx.run_dir / "metrics.csv").string() << '\n';
  return 0;
}

std::vector<adapter::Policy<float>> load_policies(const Context& ctx, const Flags& f) {
  std::vector<std::string> paths = f.checkpoints;
  if (paths.empty() && !ctx.config.io.checkpoint.empty()) paths.push_back(ctx.config.io.checkpoint);
  if (paths.empty()) throw ConfigError("no --checkpoint given");
  const auto& seeds = ctx.config.eval.seeds;
  if (paths.size() != 1 && paths.size() != seeds.size()) {
    throw ConfigError("give one checkpoint or one per eval seed (" +
                      std::to_string(seeds.size()) + ")");
  }
  std::vector<adapter::Policy<float>> out;
  for (const auto& p : paths) out.push_back(load_policy_checkpoint(p, ctx.config, ctx.task, ctx.mode));
  for (const auto& p : out) {
    if (p.task() != out.front().task() || p.mode() != out.front().mode()) {
      throw ConfigError("checkpoints disagree on task or mode");
    }
  }
  return out;
}

int cmd_eval(Context& ctx, const Flags& f) {
  auto policies = load_policies(ctx, f);
  ctx.task = policies.front().task();
  ctx.mode = policies.front().mode();
  open_run_dir(ctx);
  const auto& seeds = ctx.config.eval.seeds;
  std::vector<double> rates;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    auto& p = policies[policies.size() == 1 ? 0 : i];
    rates.push_back(eval::evaluate(p, seeds[i], ctx.config.eval_options()).success_rate);
  }
  const eval::EvalReport report = eval::make_report(
      *ctx.task, adapter::mode_name(*ctx.mode), ctx.config.eval.episodes, seeds, rates);
  auto csv = open_out(ctx.run_dir / "eval.csv");
  eval::write_report_csv(csv, report);
  ctx.out << sim::task_name(report.task) << ' ' << report.mode << " success "
          << report.summary.mean << " +- " << report.summary.std << " over " << seeds.size()
          << " seeds\n";
  return 0;
}

int cmd_sweep(Context& ctx, const Flags& f) {
  auto policies = load_policies(ctx, f);
  ctx.task = policies.front().task();
  ctx.mode = policies.front().mode();
  open_run_dir(ctx);
  std::vector<adapter::Policy<float>*> ptrs;
  for (auto& p : policies) ptrs.push_back(&p);
  const auto rows = eval::ood_sweep(ptrs, ctx.config.eval.seeds, ctx.config.sweep_grid(*ctx.task),
                                    ctx.config.eval_options());
  auto csv = open_out(ctx.run_dir / "sweep.csv");
  eval::write_sweep_csv(csv, rows);
  for (const auto& r : rows) {
    ctx.out << r.axis << " friction x" << r.friction << " gravity x" << r.gravity << ": "
            << r.summary.mean << " +- " << r.summary.std << '\n';
  }
  return 0;
}

int cmd_ablate(Context& ctx, const Flags& f) {
  if (!ctx.task) ctx.task = sim::Task::kSteering;
  if (ctx.mode && *ctx.mode != adapter::Mode::kTaskTokens) {
    throw ConfigError("ablate trains task_tokens policies only");
  }
  const bfm::Bfm<float> model = adapter::load_pretrained(checkpoint_path(f, ctx.config));
  open_run_dir(ctx);
  eval::AblationSpec spec;
  spec.hidden = ctx.config.eval.ablation_hidden;
  spec.current_pose = ctx.config.eval.ablation_current_pose;
  spec.joint_conditioning = ctx.config.eval.ablation_joint_conditioning;
  spec.prior = ctx.config.prompt;
  eval::AblationSetup setup;
  setup.model = &model;
  setup.encoder = ctx.config.encoder;
  setup.train.task = *ctx.task;
  setup.train.ppo = ctx.config.ppo;
  setup.train.critic = ctx.config.critic;
  setup.train.sim = ctx.config.sim;
  setup.train.env = ctx.config.episode;
  setup.eval = ctx.config.eval_options();
  setup.seeds = ctx.config.eval.seeds;
  const auto cells = eval::ablation_run(spec, setup);
  auto csv = open_out(ctx.run_dir / "ablation.csv");
  eval::write_ablation_csv(csv, cells);
  for (const auto& c : cells) {
    ctx.out << (c.joint_conditioning ? "J.C. " : "     ") << join_ints(c.hidden)
            << (c.current_pose ? " pose " : " no-pose ") << c.summary.mean << " +- "
            << c.summary.std << '\n';
  }
  return 0;
}

int cmd_inspect(Context& ctx, const Flags& f) {
  const std::string path = checkpoint_path(f, ctx.config);
  if (path.empty()) throw ConfigError("inspect needs --checkpoint");
  const bfm::Manifest m = bfm::read_manifest(path);
  bfm::print_manifest(ctx.out, m);
  bfm::BfmConfig model = ctx.config.bfm;
  if (m.config_value("d_model") != nullptr) model = bfm::bfm_config_from(m);
  sim::Task task = ctx.task.value_or(sim::Task::kDirection);
  if (!ctx.task && m.meta_value("task") != nullptr) task = sim::parse_task(*m.meta_value("task"));
  ctx.out << "trainable parameters (" << sim::task_name(task) << "):\n";
  for (auto mode : {adapter::Mode::kTaskTokens, adapter::Mode::kFullFinetune,
                    adapter::Mode::kPurePpo, adapter::Mode::kPromptOnly}) {
    const auto set = adapter::trainable_parameters(mode, task, model, ctx.config.encoder,
                                                   ctx.config.actor);
    ctx.out << "  " << adapter::mode_name(mode) << ' ' << set.count << '\n';
  }
  return 0;
}

}  // namespace

void save_policy_checkpoint(const fs::path& path, adapter::Policy<float>& policy,
                            ppo::Critic<float>& critic, const RunConfig& config,
                            long long env_steps) {
  bfm::KeyValues cfg;
  if (const auto* model = policy.model()) cfg = bfm::bfm_config_entries(model->config());
  cfg.emplace_back("encoder_hidden", join_ints(config.encoder.hidden));
  cfg.emplace_back("encoder_current_pose", config.encoder.use_current_pose ? "1" : "0");
  cfg.emplace_back("encoder_activation",
                   std::string(num::activation_name(config.encoder.activation)));
  cfg.emplace_back("actor_hidden", join_ints(config.actor.hidden));
  cfg.emplace_back("actor_activation", std::string(num::activation_name(config.actor.activation)));
  cfg.emplace_back("critic_hidden", join_ints(config.critic.hidden));
  cfg.emplace_back("critic_activation",
                   std::string(num::activation_name(config.critic.activation)));
  const bfm::KeyValues meta{{"task", sim::task_name(policy.task())},
                            {"mode", adapter::mode_name(policy.mode())},
                            {"seed", std::to_string(config.seed)},
                            {"env_steps", std::to_string(env_steps)}};
  bfm::ParamList params;
  for (auto* p : ppo::checkpoint_parameters(policy, critic)) params.push_back(p);
  bfm::save_checkpoint(path, "policy", cfg, meta, params);
}

adapter::Policy<float> load_policy_checkpoint(const fs::path& path, const RunConfig& config,
                                              std::optional<sim::Task> task,
                                              std::optional<adapter::Mode> mode) {
  const bfm::LoadedCheckpoint ckpt = bfm::load_checkpoint(path);
  const bfm::Manifest& m = ckpt.manifest;
  if (m.kind == "bfm") {
    if (!task) throw ConfigError("a pretrained model checkpoint needs --task");
    const adapter::Mode md = mode.value_or(adapter::Mode::kPromptOnly);
    if (md == adapter::Mode::kPurePpo) throw ConfigError("pure_ppo has no pretrained model");
    return adapter::Policy<float>(md, *task, bfm::load_bfm(path), config.encoder, config.prompt,
                                  config.seed);
  }
  if (m.kind != "policy") throw CheckpointError("unexpected checkpoint kind '" + m.kind + "'");
  const sim::Task t = sim::parse_task(required(m, "task", true));
  const adapter::Mode md = adapter::parse_mode(required(m, "mode", true));
  if (task && *task != t) throw ConfigError("checkpoint was trained on " + sim::task_name(t));
  if (mode && *mode != md) throw ConfigError("checkpoint was trained as " + adapter::mode_name(md));

  auto policy = [&]() {
    if (md == adapter::Mode::kPurePpo) {
      adapter::ActorConfig ac = config.actor;
      ac.hidden = split_ints(required(m, "actor_hidden", false));
      ac.activation = num::parse_activation(required(m, "actor_activation", false));
      return adapter::Policy<float>(t, ac, 0);
    }
    adapter::TaskEncoderConfig enc = config.encoder;
    enc.hidden = split_ints(required(m, "encoder_hidden", false));
    enc.use_current_pose = required(m, "encoder_current_pose", false) == "1";
    enc.activation = num::parse_activation(required(m, "encoder_activation", false));
    return adapter::Policy<float>(md, t, bfm::Bfm<float>(bfm::bfm_config_from(m)), enc,
                                  config.prompt, 0);
  }();
  bfm::assign_by_name(policy.all_parameters(), ckpt);
  return policy;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Task-token adaptation of a pretrained behavior model", "tt"};
  app.require_subcommand(1);
  Flags f;
  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON run config")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "overrides the config seed");
    sub->add_option("--task", f.task, "direction, steering, reach, strike or dash")
        ->check(CLI::IsMember({"direction", "steering", "reach", "strike", "dash"}));
    sub->add_option("--mode", f.mode, "task_tokens, full_finetune, pure_ppo or prompt_only")
        ->check(CLI::IsMember({"task_tokens", "full_finetune", "pure_ppo", "prompt_only"}));
    sub->add_option("--out", f.out, "output root (overrides io.output and $TT_OUTPUT)");
    sub->add_option("--checkpoint", f.checkpoints, "checkpoint file(s)");
  };
  for (const char* name : {"pretrain", "train", "eval", "sweep", "ablate", "inspect"}) {
    const char* help = "";
    const std::string n = name;
    if (n == "pretrain") help = "distill the scripted expert into the behavior model";
    if (n == "train") help = "adapt to a task with PPO";
    if (n == "eval") help = "success rate over the configured seeds";
    if (n == "sweep") help = "friction and gravity robustness sweep";
    if (n == "ablate") help = "task encoder architecture grid";
    if (n == "inspect") help = "print a checkpoint manifest and trainable counts";
    add_common(app.add_subcommand(name, help));
  }

  std::vector<const char*> argv{"tt"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    Context ctx = make_context(command, f, out);
    if (command == "pretrain") return cmd_pretrain(ctx);
    if (command == "train") return cmd_train(ctx, f);
    if (command == "eval") return cmd_eval(ctx, f);
    if (command == "sweep") return cmd_sweep(ctx, f);
    if (command == "ablate") return cmd_ablate(ctx, f);
    return cmd_inspect(ctx, f);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace tt::cli
