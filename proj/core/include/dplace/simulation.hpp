#pragma once

// Two-stage execution: build-time placement of initial datasets, then
// slotted runtime waves of ready tasks that fetch inputs, emit datasets and
// retire spent ones.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "dplace/model.hpp"
#include "dplace/optimizer.hpp"
#include "dplace/rl.hpp"

namespace dplace {

enum class Strategy { kDymRl, kDeDpso, kDpso, kDe, kGaDpso, kRandom };

std::string_view to_string(Strategy s);
// Accepts "dym_rl", "de_dpso", "dpso", "de", "ga_dpso", "random".
Strategy parse_strategy(std::string_view name);
// Build-time search used by a strategy; dym_rl builds with de_dpso.
Metaheuristic build_method(Strategy s);

struct InvariantCounters {
  std::int64_t capacity = 0;
  std::int64_t private_moves = 0;
  std::int64_t topological = 0;

  std::int64_t total() const { return capacity + private_moves + topological; }
  InvariantCounters& operator+=(const InvariantCounters& o) {
    capacity += o.capacity;
    private_moves += o.private_moves;
    topological += o.topological;
    return *this;
  }
};

struct SimulationState {
  int slot = 0;
  PlacementMap placement;
  std::vector<TaskId> ready;           // RQ, ascending id
  std::vector<char> finished;          // FQ membership per task
  std::vector<char> cancelled;         // tasks of departed workflows
  std::vector<char> executions;        // times each task ran
  std::vector<char> present;           // workflow arrived and not departed
  std::vector<Megabytes> used;         // per-datacenter occupied MB
  std::vector<DatasetId> pending;      // outputs awaiting placement this slot
  std::vector<DcId> producer_site;     // per dataset, where it was produced
  InvariantCounters violations;
};

// Datasets with at least one consumer, all of them finished or cancelled,
// leave the system. Final outputs stay.
void evict_consumed(SimulationState& st, const Scenario& scenario);

class Simulation;

// What a runtime placer sees when choosing locations for st.pending.
struct DecisionContext {
  const Simulation& sim;
  std::span<const DatasetId> pending;
};

class RuntimePlacer {
 public:
  virtual ~RuntimePlacer() = default;
  // One datacenter per pending dataset; the engine homes privates and
  // repairs capacity afterwards.
  virtual std::vector<DcId> place(const DecisionContext& ctx) = 0;
};

class Simulation {
 public:
  Simulation(const Scenario& scenario, const PlacementMap& build_placement,
             FetchAccounting accounting = FetchAccounting::kOncePerDestination);

  const Scenario& scenario() const { return scenario_; }
  const CostModel& costs() const { return costs_; }
  const SimulationState& state() const { return st_; }
  FetchAccounting accounting() const { return accounting_; }

  // True once every task finished or was cancelled and no event is left.
  bool done() const;

  // Phase one of a slot: events, promotion, execution, output emission.
  // Returns the fetches charged so far; st.pending lists the new outputs.
  SlotReport begin_slot();
  // Phase two: applies one choice per pending dataset, repairs capacity,
  // charges relocations of older datasets, retires finished tasks and evicts.
  SlotReport finish_slot(std::span<const DcId> choices);
  SlotReport advance_slot(RuntimePlacer& placer);

  // Current placement with pending datasets applied at `choices` and repaired.
  PlacementMap candidate(std::span<const DcId> choices, std::vector<Relocation>* moves) const;
  // Fetches that unfinished consumers of pending datasets will need under
  // `placement`, with each consumer assigned by its inputs placed so far.
  Ticks lookahead(const PlacementMap& placement) const;
  Ticks relocation_cost(std::span<const Relocation> moves) const;
  // Shipping every pending dataset from its producer's datacenter to where
  // `placement` keeps it.
  Ticks emission_cost(const PlacementMap& placement) const;
  // lookahead + relocation + emission cost of committing `choices`.
  Ticks decision_cost(std::span<const DcId> choices) const;
  std::vector<DcId> producer_choices() const;

  // Seconds charged by fully finished slots so far, and the fetch time
  // already charged inside the open slot.
  Seconds committed_time() const { return costs_.to_seconds(committed_ticks_); }
  Ticks open_slot_ticks() const { return open_ticks_; }

 private:
  void apply_events();
  void promote();
  bool predecessors_finished(TaskId t) const;

  const Scenario& scenario_;
  CostModel costs_;
  FetchAccounting accounting_;
  std::vector<std::vector<TaskId>> preds_;
  std::vector<DcId> private_home_;
  SimulationState st_;
  SlotReport open_;
  Ticks open_ticks_ = 0;
  Ticks committed_ticks_ = 0;
  bool in_slot_ = false;
};

class ProducerPlacer final : public RuntimePlacer {
 public:
  std::vector<DcId> place(const DecisionContext& ctx) override;
};

// Re-runs a metaheuristic over the pending datasets, rest of the placement
// frozen.
class OptimizerPlacer final : public RuntimePlacer {
 public:
  OptimizerPlacer(Metaheuristic kind, OptimizerConfig cfg) : kind_(kind), cfg_(cfg) {}
  std::vector<DcId> place(const DecisionContext& ctx) override;

 private:
  Metaheuristic kind_;
  OptimizerConfig cfg_;
  std::uint64_t calls_ = 0;
};

struct RlPolicy {
  StateLayout layout;
  Mlp actor;
  int maxstep = 20;
};

// Greedy actor rollout: each refinement step feeds the previous candidate
// back as the state; the cheapest candidate wins.
class RlPlacer final : public RuntimePlacer {
 public:
  explicit RlPlacer(const RlPolicy& policy) : policy_(policy) {}
  std::vector<DcId> place(const DecisionContext& ctx) override;

 private:
  const RlPolicy& policy_;
};

// DecisionEnv over a fixed scenario and build placement.
class SimulationEnv final : public DecisionEnv {
 public:
  SimulationEnv(const Scenario& scenario, PlacementMap build_placement, StateLayout layout,
                FetchAccounting accounting = FetchAccounting::kOncePerDestination);
  ~SimulationEnv() override;

  StateLayout layout() const override { return layout_; }
  void reset() override;
  bool next_decision() override;
  int slot() const override;
  Vector state() const override;
  double current_average() const override;
  Step try_action(const Vector& scores) override;
  void commit() override;

  // Summary numbers of the episode that just ran.
  Seconds runtime_total() const;
  int slots() const;

 private:
  double average_for(Ticks decision) const;

  const Scenario& scenario_;
  PlacementMap build_;
  StateLayout layout_;
  FetchAccounting accounting_;
  std::unique_ptr<Simulation> sim_;
  std::vector<DcId> best_choice_;
  Ticks best_cost_ = 0;
  bool open_ = false;
  int slots_ = 0;
};

struct RunConfig {
  OptimizerConfig build;
  OptimizerConfig runtime{20, 100, 0.15, 0.1, 0.1, 1};
  FetchAccounting accounting = FetchAccounting::kOncePerDestination;
};

struct RunSummary {
  SlotReport build;  // slot 0
  Seconds build_time;
  std::vector<SlotReport> slots;  // runtime slots 1..V
  Seconds runtime_total;
  Seconds total;
  // total / (V + 1): the build stage counts as slot 0.
  double avg_slot_time = 0;
  InvariantCounters violations;
};

BuildResult place_build_time(const Scenario& scenario, Metaheuristic method, const OptimizerConfig& cfg);

// Runtime half of a run on top of a given build placement.
RunSummary run_runtime(const Scenario& scenario, const BuildResult& build, RuntimePlacer& placer,
                       FetchAccounting accounting);

// dym_rl needs `policy`; the other strategies ignore it.
RunSummary run_strategy(const Scenario& scenario, Strategy strategy, const RunConfig& cfg, std::uint64_t seed,
                        const RlPolicy* policy = nullptr);

// Rows (slot, moves, bytes_mb, time_s) for slots 0..V, then the footer.
void write_run_csv(std::ostream& out, const RunSummary& summary);

}  // namespace dplace
