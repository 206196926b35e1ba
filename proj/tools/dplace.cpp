// dplace: generate scenarios, place them, train the RL placer, run sweeps.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dplace/experiment.hpp"
#include "dplace/generator.hpp"
#include "dplace/scenario_io.hpp"
#include "dplace/simulation.hpp"

namespace {

using namespace dplace;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes `text` to `path`, or to stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  bool seed_given = false;
};

ExperimentPlan plan_from(const std::string& config) {
  return config.empty() ? ExperimentPlan{} : parse_plan(slurp(config));
}

int cmd_generate(const Common& c) {
  GeneratorConfig cfg = c.config.empty() ? GeneratorConfig{} : parse_generator_config(slurp(c.config));
  if (c.seed_given) cfg.seed = c.seed;
  emit(c.out, scenario_to_json(generate_scenario(cfg)));
  return 0;
}

RlPolicy policy_for(const Scenario& s, const ExperimentPlan& plan, const std::string& checkpoint, std::uint64_t seed) {
  if (!checkpoint.empty()) {
    StateLayout layout;
    NetParams p = load_checkpoint(std::filesystem::path(checkpoint), &layout);
    if (layout.num_datacenters != s.num_datacenters() || layout.max_datasets < s.num_datasets())
      throw std::runtime_error("checkpoint layout does not fit the scenario");
    return RlPolicy{layout, std::move(p.actor), plan.rl_maxstep};
  }
  ExperimentPlan p = plan;
  p.seed = seed;
  return train_policy(p, s, static_cast<std::size_t>(s.num_datasets()));
}

int cmd_place(const Common& c, const std::string& scenario_path, const std::string& strategy_name,
              const std::string& checkpoint) {
  const Scenario s = load_scenario(scenario_path);
  const ExperimentPlan plan = plan_from(c.config);
  const Strategy strategy = parse_strategy(strategy_name);
  std::optional<RlPolicy> policy;
  if (strategy == Strategy::kDymRl) policy = policy_for(s, plan, checkpoint, c.seed);
  const RunSummary sum = run_strategy(s, strategy, plan.run, c.seed, policy ? &*policy : nullptr);
  if (sum.violations.total() != 0) throw std::runtime_error("invariant violations during the run");
  std::ostringstream out;
  write_run_csv(out, sum);
  emit(c.out, out.str());
  return 0;
}

int cmd_train(const Common& c, const std::string& scenario_path, const std::string& checkpoint, int episodes) {
  const Scenario s = load_scenario(scenario_path);
  ExperimentPlan plan = plan_from(c.config);
  if (episodes > 0) plan.train.episodes = episodes;
  OptimizerConfig build_cfg = plan.run.build;
  build_cfg.seed = mix_seed(c.seed, 0);
  const BuildResult build = place_build_time(s, Metaheuristic::kDeDpso, build_cfg);
  StateLayout layout{s.num_datacenters(), s.num_datasets()};
  SimulationEnv env(s, build.placement, layout, plan.run.accounting);
  TrainConfig tc = plan.train;
  tc.seed = c.seed;
  const TrainResult res = train(env, tc);
  if (!checkpoint.empty()) save_checkpoint(std::filesystem::path(checkpoint), res.params, res.layout);
  std::ostringstream out;
  write_train_log(out, res.log);
  emit(c.out, out.str());
  return 0;
}

int cmd_sweep(const Common& c, int repeats, const std::string& strategy_name, const std::string& runs_path) {
  ExperimentPlan plan = plan_from(c.config);
  if (c.seed_given) plan.seed = c.seed;
  if (repeats > 0) plan.repeats = repeats;
  if (!strategy_name.empty()) plan.strategies = {parse_strategy(strategy_name)};
  check_plan(plan);
  const ResultTable table = run_plan(plan);
  std::ostringstream out;
  emit_csv(out, table.cells);
  emit(c.out, out.str());
  if (!runs_path.empty()) {
    std::ostringstream runs;
    write_run_log(runs, table.runs);
    emit(runs_path, runs.str());
  }
  for (const CellResult& cell : table.cells)
    if (!cell.error.empty())
      std::cerr << "cell " << cell.sweep_value << '/' << to_string(cell.strategy) << " failed: " << cell.error << '\n';
  return table.violations.total() == 0 ? 0 : 3;
}

int cmd_summarize(const Common& c, const std::string& results_path, const std::string& reference) {
  std::istringstream in(slurp(results_path));
  const auto cells = read_result_csv(in);
  std::ostringstream out;
  write_saving_csv(out, summarize_saving(cells, parse_strategy(reference)));
  emit(c.out, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"data placement for data-sharing workflows in edge-cloud systems"};
  app.require_subcommand(1);
  Common c;
  auto common = [&c](CLI::App* sub) {
    sub->add_option("--config", c.config, "JSON config (generator or plan)");
    sub->add_option("--out", c.out, "output file, stdout when omitted");
    sub->add_option("--seed", c.seed, "random seed")->each([&c](const std::string&) { c.seed_given = true; });
  };

  CLI::App* gen = app.add_subcommand("generate", "write a synthetic scenario as JSON");
  common(gen);

  std::string scenario_path;
  std::string strategy = "de_dpso";
  std::string checkpoint;
  CLI::App* place = app.add_subcommand("place", "run one strategy on one scenario");
  common(place);
  place->add_option("scenario", scenario_path, "scenario JSON")->required();
  place->add_option("--strategy", strategy, "dym_rl, de_dpso, dpso, de, ga_dpso or random");
  place->add_option("--checkpoint", checkpoint, "policy for dym_rl; trained on the fly when omitted");

  int episodes = 0;
  CLI::App* tr = app.add_subcommand("train", "train the RL placer on a scenario");
  common(tr);
  tr->add_option("scenario", scenario_path, "scenario JSON")->required();
  tr->add_option("--checkpoint", checkpoint, "where to save the trained networks");
  tr->add_option("--episodes", episodes, "override the episode count");

  int repeats = 0;
  std::string sweep_strategy;
  std::string runs_path;
  CLI::App* sw = app.add_subcommand("sweep", "run an experiment plan");
  common(sw);
  sw->add_option("--repeats", repeats, "override the repeat count");
  sw->add_option("--strategy", sweep_strategy, "restrict the plan to one strategy");
  sw->add_option("--runs", runs_path, "per-run log CSV");

  std::string results_path;
  std::string reference = "dpso";
  CLI::App* sum = app.add_subcommand("summarize", "time saving against a reference strategy");
  common(sum);
  sum->add_option("results", results_path, "result CSV from sweep")->required();
  sum->add_option("--reference", reference, "reference strategy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) return cmd_generate(c);
    if (*place) return cmd_place(c, scenario_path, strategy, checkpoint);
    if (*tr) return cmd_train(c, scenario_path, checkpoint, episodes);
    if (*sw) return cmd_sweep(c, repeats, sweep_strategy, runs_path);
    if (*sum) return cmd_summarize(c, results_path, reference);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dplace: %s\n", e.what());
    return 1;
  }
  return 1;
}
