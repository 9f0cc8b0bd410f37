#include "tt/eval/experiments.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "csv.hpp"
#include "tt/error.hpp"
#include "tt/sim/physics.hpp"

namespace tt::eval {

namespace {

bool contains_one(const std::vector<double>& grid) {
  return std::find(grid.begin(), grid.end(), 1.0) != grid.end();
}

std::string hidden_string(const std::vector<int>& hidden) {
  return hidden.empty() ? std::string("-") : csv::join(hidden, 'x');
}

std::vector<int> parse_hidden(const std::string& s) {
  std::vector<int> out;
  if (s == "-") return out;
  for (const auto& part : csv::split(s, 'x')) {
    out.push_back(static_cast<int>(csv::to_double(part, "ablation")));
  }
  return out;
}

bool parse_bool(const std::string& s, const char* what) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ConfigError(std::string(what) + " csv: expected true/false, got '" + s + "'");
}

}  // namespace

void SweepGrid::validate() const {
  if (!contains_one(friction) || !contains_one(gravity)) {
    throw ConfigError("sweep grids must contain the 1.0 baseline");
  }
  for (double m : friction) {
    if (!(m > 0.0)) throw ConfigError("sweep: friction multipliers must be positive");
  }
  for (double m : gravity) {
    if (!(m > 0.0)) throw ConfigError("sweep: gravity multipliers must be positive");
  }
}

std::vector<SweepRow> ood_sweep(std::span<adapter::Policy<float>* const> policies,
                                std::span<const std::uint64_t> seeds, const SweepGrid& grid,
                                const EvalOptions& options) {
  grid.validate();
  if (seeds.empty()) throw ConfigError("ood_sweep: no seeds");
  if (policies.size() != 1 && policies.size() != seeds.size()) {
    throw ConfigError("ood_sweep: need one policy or one per seed");
  }
  for (const auto* p : policies) {
    if (p->task() != grid.task) throw ConfigError("ood_sweep: policy task differs from grid");
  }
  auto run = [&](std::string axis, double f, double g) {
    SweepRow row;
    row.axis = std::move(axis);
    row.friction = f;
    row.gravity = g;
    EvalOptions opts = options;
    opts.sim = sim::apply_perturbation(options.sim, f, g);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      adapter::Policy<float>& policy = *policies[policies.size() == 1 ? 0 : i];
      row.rates.push_back(evaluate(policy, seeds[i], opts).success_rate);
    }
    row.summary = seeds_summary(row.rates);
    return row;
  };
  std::vector<SweepRow> rows;
  rows.push_back(run("baseline", 1.0, 1.0));
  for (double f : grid.friction) {
    if (f != 1.0) rows.push_back(run("friction", f, 1.0));
  }
  for (double g : grid.gravity) {
    if (g != 1.0) rows.push_back(run("gravity", 1.0, g));
  }
  return rows;
}

namespace {
constexpr const char* kSweepHeader = "axis,friction,gravity,mean,std,rates";
constexpr const char* kAblationHeader =
    "joint_conditioning,hidden,current_pose,success_mean,success_std,rates";
}  // namespace

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out.precision(17);
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << r.axis << ',' << r.friction << ',' << r.gravity << ',' << r.summary.mean << ','
        << r.summary.std << ',' << csv::join(r.rates, ';') << '\n';
  }
  os << out.str();
}

std::vector<SweepRow> read_sweep_csv(std::istream& is) {
  csv::expect_header(is, kSweepHeader, "sweep");
  std::vector<SweepRow> out;
  for (const auto& cells : csv::rows(is, 6, "sweep")) {
    SweepRow r;
    r.axis = cells[0];
    if (r.axis != "baseline" && r.axis != "friction" && r.axis != "gravity") {
      throw ConfigError("sweep csv: unknown axis '" + r.axis + "'");
    }
    r.friction = csv::to_double(cells[1], "sweep");
    r.gravity = csv::to_double(cells[2], "sweep");
    r.rates = csv::to_doubles(cells[5], "sweep");
    r.summary = seeds_summary(r.rates);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AblationCell> ablation_run(const AblationSpec& spec, const AblationSetup& setup) {
  if (setup.model == nullptr) throw ConfigError("ablation: no pretrained model");
  if (setup.seeds.empty()) throw ConfigError("ablation: no seeds");
  if (spec.cells() == 0) throw ConfigError("ablation: empty spec");
  std::vector<AblationCell> cells;
  for (bool jc : spec.joint_conditioning) {
    for (const auto& hidden : spec.hidden) {
      for (bool pose : spec.current_pose) {
        AblationCell cell;
        cell.joint_conditioning = jc;
        cell.hidden = hidden;
        cell.current_pose = pose;
        adapter::TaskEncoderConfig enc = setup.encoder;
        enc.hidden = hidden;
        enc.use_current_pose = pose;
        for (std::uint64_t seed : setup.seeds) {
          adapter::Policy<float> policy(adapter::Mode::kTaskTokens, setup.train.task,
                                        setup.model->clone(), enc,
                                        jc ? spec.prior : adapter::PromptSpec{}, seed);
          ppo::TrainSetup train = setup.train;
          train.seed = seed;
          ppo::train(policy, train);
          cell.rates.push_back(evaluate(policy, seed, setup.eval).success_rate);
        }
        cell.summary = seeds_summary(cell.rates);
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

void write_ablation_csv(std::ostream& os, const std::vector<AblationCell>& cells) {
  std::ostringstream out;
  out.precision(17);
  out << kAblationHeader << '\n';
  for (const auto& c : cells) {
    out << (c.joint_conditioning ? "true" : "false") << ',' << hidden_string(c.hidden) << ','
        << (c.current_pose ? "true" : "false") << ',' << c.summary.mean << ','
        << c.summary.std << ',' << csv::join(c.rates, ';') << '\n';
  }
  os << out.str();
}

std::vector<AblationCell> read_ablation_csv(std::istream& is) {
  csv::expect_header(is, kAblationHeader, "ablation");
  std::vector<AblationCell> out;
  for (const auto& cells : csv::rows(is, 6, "ablation")) {
    AblationCell c;
    c.joint_conditioning = parse_bool(cells[0], "ablation");
    c.hidden = parse_hidden(cells[1]);
    c.current_pose = parse_bool(cells[2], "ablation");
    c.rates = csv::to_doubles(cells[5], "ablation");
    c.summary = seeds_summary(c.rates);
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace tt::eval
