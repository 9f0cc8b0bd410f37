#include "tt/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tt/error.hpp"

namespace tt::cli {

using nlohmann::json;

namespace {

// Reads fields out of one JSON object and remembers which keys were used,
// so leftovers can be reported.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  void operator()(const char* key, T& field) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      field = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where() + "." + key + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void named(const char* key, T& field, Parse parse) {
    std::string s;
    (*this)(key, s);
    if (!s.empty()) field = parse(s);
  }

  template <typename F>
  void object(const char* key, F&& visit) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    Reader child(*it, where() + "." + key);
    visit(child);
    child.finish();
  }

  template <typename T, typename F>
  void list(const char* key, std::vector<T>& items, F&& visit) {
    used_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    if (!it->is_array()) throw ConfigError(where() + "." + key + ": expected an array");
    items.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      T item{};
      Reader child((*it)[i], where() + "." + key + "[" + std::to_string(i) + "]");
      visit(child, item);
      child.finish();
      items.push_back(item);
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) throw ConfigError(where() + ": unknown key '" + key + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? std::string("config") : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

class Writer {
 public:
  explicit Writer(json& j) : j_(j) { j_ = json::object(); }

  template <typename T>
  void operator()(const char* key, T& field) {
    j_[key] = field;
  }

  template <typename T, typename Parse>
  void named(const char* key, T& field, Parse) {
    j_[key] = name_of(field);
  }

  template <typename F>
  void object(const char* key, F&& visit) {
    Writer child(j_[key]);
    visit(child);
  }

  template <typename T, typename F>
  void list(const char* key, std::vector<T>& items, F&& visit) {
    json arr = json::array();
    for (T& item : items) {
      json one;
      Writer child(one);
      visit(child, item);
      arr.push_back(one);
    }
    j_[key] = arr;
  }

 private:
  static std::string name_of(num::Activation a) { return std::string(num::activation_name(a)); }
  static std::string name_of(adapter::HeadingSource s) { return adapter::heading_source_name(s); }
  static std::string name_of(adapter::Trigger t) { return adapter::trigger_name(t); }
  static std::string name_of(bfm::BetaSchedule b) {
    return b == bfm::BetaSchedule::kLinear ? "linear" : "constant_one";
  }

  json& j_;
};

num::Activation parse_act(const std::string& s) { return num::parse_activation(s); }

bfm::BetaSchedule parse_beta(const std::string& s) {
  if (s == "linear") return bfm::BetaSchedule::kLinear;
  if (s == "constant_one") return bfm::BetaSchedule::kConstantOne;
  throw ConfigError("unknown beta schedule '" + s + "' (linear, constant_one)");
}

// The one list of every config field, shared by reading and writing.
template <typename V>
void visit_config(V& v, RunConfig& c) {
  v("seed", c.seed);
  v.object("sim", [&](auto& s) {
    s.object("params", [&](auto& p) {
      auto& q = c.sim;
      p("dt_sim", q.dt_sim);
      p("control_decimation", q.control_decimation);
      p("base_mass", q.base_mass);
      p("base_inertia", q.base_inertia);
      p("base_damping", q.base_damping);
      p("yaw_damping", q.yaw_damping);
      p("rolling_decel", q.rolling_decel);
      p("link_lengths", q.link_lengths);
      p("link_masses", q.link_masses);
      p("shoulder_height", q.shoulder_height);
      p("joint_damping", q.joint_damping);
      p("gravity", q.gravity);
      p("action_limits", q.action_limits);
      p("friction_mult", q.friction_mult);
      p("gravity_mult", q.gravity_mult);
      p("block_radius", q.block_radius);
      p("block_height", q.block_height);
      p("hand_radius", q.hand_radius);
      p("impact_threshold", q.impact_threshold);
      p("impact_gain", q.impact_gain);
      p("tip_stiffness", q.tip_stiffness);
      p("tip_angle", q.tip_angle);
      p("fallen_tilt", q.fallen_tilt);
    });
    s.object("episode", [&](auto& e) {
      auto& o = c.episode;
      e("horizon", o.horizon);
      e("window", o.window);
      e("arena_radius", o.arena_radius);
      e("spawn_facing_away", o.spawn_facing_away);
      e("dash_stop_speed", o.dash_stop_speed);
      e.object("ranges", [&](auto& r) {
        r("speed_min", o.ranges.speed_min);
        r("speed_max", o.ranges.speed_max);
        r("reach_min", o.ranges.reach_min);
        r("reach_max", o.ranges.reach_max);
        r("block_min", o.ranges.block_min);
        r("block_max", o.ranges.block_max);
      });
      e.object("reward", [&](auto& r) {
        r("speed_scale", o.reward.speed_scale);
        r("facing_weight", o.reward.facing_weight);
        r("facing_scale", o.reward.facing_scale);
        r("reach_scale", o.reward.reach_scale);
        r("strike_scale", o.reward.strike_scale);
        r("strike_bonus", o.reward.strike_bonus);
        r("dash_speed_ref", o.reward.dash_speed_ref);
        r("dash_coast_weight", o.reward.dash_coast_weight);
        r("dash_coast_cap", o.reward.dash_coast_cap);
      });
    });
  });
  v.object("bfm", [&](auto& b) {
    b.object("model", [&](auto& m) {
      auto& q = c.bfm;
      m("d_model", q.d_model);
      m("layers", q.layers);
      m("heads", q.heads);
      m("ff_width", q.ff_width);
      m("state_hidden", q.state_hidden);
      m("pose_hidden", q.pose_hidden);
      m.named("activation", q.activation, parse_act);
      m("action_dim", q.action_dim);
      m("log_std_init", q.log_std_init);
      m("goal_slots", q.goal_slots);
      m("keep_prob", q.keep_prob);
      m("full_view_prob", q.full_view_prob);
    });
    b.object("pretrain", [&](auto& p) {
      auto& q = c.pretrain;
      p("iterations", q.iterations);
      p("states_per_iteration", q.states_per_iteration);
      p("envs", q.envs);
      p("episode_length", q.episode_length);
      p("segment_min", q.segment_min);
      p("segment_max", q.segment_max);
      p("updates_per_iteration", q.updates_per_iteration);
      p("batch_size", q.batch_size);
      p("lr", q.lr);
      p("grad_clip", q.grad_clip);
      p("validation_states", q.validation_states);
      p.named("beta", q.beta, parse_beta);
      p.object("pose", [&](auto& s) {
        s("max_distance", q.pose.max_distance);
        s("q1_range", q.pose.q1_range);
        s("q2_range", q.pose.q2_range);
      });
      p.object("expert", [&](auto& e) {
        e("v_max", q.expert.v_max);
        e("velocity_gain", q.expert.velocity_gain);
        e("yaw_rate_max", q.expert.yaw_rate_max);
        e("yaw_gain", q.expert.yaw_gain);
        e("arm_frequency", q.expert.arm_frequency);
        e("arm_damping_ratio", q.expert.arm_damping_ratio);
        e("horizon_scale", q.expert.horizon_scale);
        e("min_horizon", q.expert.min_horizon);
        e("gravity_compensation", q.expert.gravity_compensation);
      });
    });
  });
  v.object("adapter", [&](auto& a) {
    a.object("encoder", [&](auto& e) {
      e("hidden", c.encoder.hidden);
      e("use_current_pose", c.encoder.use_current_pose);
      e.named("activation", c.encoder.activation, parse_act);
    });
    a.object("actor", [&](auto& e) {
      e("hidden", c.actor.hidden);
      e.named("activation", c.actor.activation, parse_act);
      e("log_std_init", c.actor.log_std_init);
    });
    a.list("prompt", c.prompt.priors, [](auto& p, adapter::PriorToken& t) {
      p.named("heading", t.heading, adapter::parse_heading_source);
      p("heading_offset", t.heading_offset);
      p("has_posture", t.has_posture);
      p("q1", t.q1);
      p("q2", t.q2);
      p("k", t.k);
      p.named("trigger", t.trigger, adapter::parse_trigger);
      p("trigger_distance", t.trigger_distance);
    });
  });
  v.object("ppo", [&](auto& p) {
    auto& q = c.ppo;
    p("gamma", q.gamma);
    p("lambda", q.lambda);
    p("clip", q.clip);
    p("epochs", q.epochs);
    p("minibatches", q.minibatches);
    p("value_coef", q.value_coef);
    p("entropy_coef", q.entropy_coef);
    p("rollout_length", q.rollout_length);
    p("envs", q.envs);
    p("total_steps", q.total_steps);
    p("policy_lr", q.policy_lr);
    p("critic_lr", q.critic_lr);
    p("max_grad_norm", q.max_grad_norm);
    p("bootstrap_time_limit", q.bootstrap_time_limit);
    p("checkpoint_every", q.checkpoint_every);
    p.object("critic", [&](auto& k) {
      k("hidden", c.critic.hidden);
      k.named("activation", c.critic.activation, parse_act);
    });
  });
  v.object("eval", [&](auto& e) {
    e("episodes", c.eval.episodes);
    e("batch", c.eval.batch);
    e("seeds", c.eval.seeds);
    e("friction_grid", c.eval.friction_grid);
    e("gravity_grid", c.eval.gravity_grid);
    e("ablation_hidden", c.eval.ablation_hidden);
    e("ablation_current_pose", c.eval.ablation_current_pose);
    e("ablation_joint_conditioning", c.eval.ablation_joint_conditioning);
  });
  v.object("io", [&](auto& i) {
    i("output", c.io.output);
    i("run_id", c.io.run_id);
    i("checkpoint", c.io.checkpoint);
  });
}

}  // namespace

eval::EvalOptions RunConfig::eval_options() const {
  eval::EvalOptions o;
  o.episodes = eval.episodes;
  o.batch = eval.batch;
  o.sim = sim;
  o.env = episode;
  return o;
}

eval::SweepGrid RunConfig::sweep_grid(sim::Task task) const {
  eval::SweepGrid g;
  g.friction = eval.friction_grid;
  g.gravity = eval.gravity_grid;
  g.task = task;
  return g;
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Reader r(j, "");
  visit_config(r, c);
  r.finish();
  c.bfm.validate();
  c.ppo.validate();
  c.encoder.validate();
  eval::EvalOptions o = c.eval_options();
  o.validate();
  sim::validate(c.sim);
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& config) {
  RunConfig copy = config;
  json j;
  Writer w(j);
  visit_config(w, copy);
  return j.dump(2) + "\n";
}

}  // namespace tt::cli
