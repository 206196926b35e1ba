#pragma once

// Sweep harness: paired-seed repeated runs over one generator dimension,
// summary statistics, time-saving tables and CSV output.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dplace/generator.hpp"
#include "dplace/rl.hpp"
#include "dplace/simulation.hpp"

namespace dplace {

enum class SweepKind { kNone, kBandwidth, kEdgeCapacity, kEdgeCount, kSharing };

std::string_view to_string(SweepKind k);
// Accepts "none", "bandwidth_multiplier", "edge_capacity", "edge_count", "sharing".
SweepKind parse_sweep_kind(std::string_view name);
// Bandwidth {0.5, 0.8, 1.5, 3, 5}; capacity 150..350 GB in 50 GB steps (as
// MB); edge count {3, 4, 5}; sharing {1, 0}; none {0}.
std::vector<double> default_sweep_values(SweepKind k);
GeneratorConfig apply_sweep(GeneratorConfig cfg, SweepKind k, double value);

struct ExperimentPlan {
  GeneratorConfig base;
  SweepKind sweep = SweepKind::kNone;
  std::vector<double> values{0};
  std::vector<Strategy> strategies{Strategy::kDymRl, Strategy::kDeDpso, Strategy::kDpso,
                                   Strategy::kDe,    Strategy::kGaDpso, Strategy::kRandom};
  int repeats = 100;
  std::uint64_t seed = 1;
  RunConfig run;
  TrainConfig train;
  int rl_maxstep = 20;
};

void check_plan(const ExperimentPlan& plan);

// JSON plan: {"generator": {...}, "sweep": {"kind", "values"}, "strategies",
// "repeats", "seed", "optimizer": {...}, "runtime_optimizer": {...},
// "rl": {...}, "accounting"}. Every key is optional.
ExperimentPlan parse_plan(std::string_view text);
// A bare generator object, or a plan whose "generator" block is used.
GeneratorConfig parse_generator_config(std::string_view text);

// Scenario of repeat r at one sweep point; the instance depends on r and the
// plan seed only, so every strategy sees the same worlds.
Scenario plan_instance(const ExperimentPlan& plan, double sweep_value, int repeat);
// World the RL policy of a sweep point is trained on.
Scenario plan_training_instance(const ExperimentPlan& plan, double sweep_value);
std::uint64_t plan_run_seed(const ExperimentPlan& plan, int repeat);

struct CellResult {
  double sweep_value = 0;
  Strategy strategy = Strategy::kRandom;
  double mean_avg_time = 0;
  double sd = 0;
  double mean_total = 0;
  int repeats = 0;
  std::string error;  // non-empty for failed cells
};

struct RunLogRow {
  double sweep_value = 0;
  Strategy strategy = Strategy::kRandom;
  int repeat = 0;
  std::uint64_t seed = 0;
  int slots = 0;
  double build_time = 0;
  double runtime_total = 0;
  double avg_slot_time = 0;
  double total = 0;
  std::int64_t violations = 0;
};

struct ResultTable {
  std::vector<CellResult> cells;
  std::vector<RunLogRow> runs;
  InvariantCounters violations;
};

// Trains the dym_rl policy for one scenario shape (run_plan reuses it across
// sweep points of that shape) with the plan's RL settings.
RlPolicy train_policy(const ExperimentPlan& plan, const Scenario& training, std::size_t max_datasets);

ResultTable run_plan(const ExperimentPlan& plan);

struct SavingRow {
  double sweep_value = 0;
  Strategy strategy = Strategy::kRandom;
  double saving_pct = 0;
};

inline double saving_percent(double t_ref, double t) { return (t_ref - t) / t_ref * 100.0; }

// Saving of every cell against the reference strategy at the same sweep
// point, on mean average slot time. Throws std::invalid_argument when the
// reference is missing.
std::vector<SavingRow> summarize_saving(const std::vector<CellResult>& cells, Strategy reference);

// Columns: sweep_value, strategy, mean_avg_time_s, sd, mean_total_s, repeats.
void emit_csv(std::ostream& out, const std::vector<CellResult>& cells);
std::vector<CellResult> read_result_csv(std::istream& in);
void write_run_log(std::ostream& out, const std::vector<RunLogRow>& runs);
void write_saving_csv(std::ostream& out, const std::vector<SavingRow>& rows);

}  // namespace dplace
