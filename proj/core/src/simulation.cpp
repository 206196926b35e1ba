#include "dplace/simulation.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>

namespace dplace {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kDymRl: return "dym_rl";
    case Strategy::kDeDpso: return "de_dpso";
    case Strategy::kDpso: return "dpso";
    case Strategy::kDe: return "de";
    case Strategy::kGaDpso: return "ga_dpso";
    case Strategy::kRandom: return "random";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  for (Strategy s : {Strategy::kDymRl, Strategy::kDeDpso, Strategy::kDpso, Strategy::kDe, Strategy::kGaDpso,
                     Strategy::kRandom})
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

Metaheuristic build_method(Strategy s) {
  switch (s) {
    case Strategy::kDymRl:
    case Strategy::kDeDpso: return Metaheuristic::kDeDpso;
    case Strategy::kDpso: return Metaheuristic::kDpso;
    case Strategy::kDe: return Metaheuristic::kDe;
    case Strategy::kGaDpso: return Metaheuristic::kGaDpso;
    case Strategy::kRandom: return Metaheuristic::kRandom;
  }
  return Metaheuristic::kRandom;
}

void evict_consumed(SimulationState& st, const Scenario& scenario) {
  bool changed = false;
  for (const Dataset& ds : scenario.datasets) {
    if (ds.consumers.empty() || !st.placement.contains(ds.id)) continue;
    const bool spent = std::all_of(ds.consumers.begin(), ds.consumers.end(), [&](TaskId t) {
      return st.finished[static_cast<std::size_t>(t)] || st.cancelled[static_cast<std::size_t>(t)];
    });
    if (spent) {
      st.placement.erase(ds.id);
      changed = true;
    }
  }
  if (changed) st.used = storage_used(scenario, st.placement);
}

Simulation::Simulation(const Scenario& scenario, const PlacementMap& build_placement, FetchAccounting accounting)
    : scenario_(scenario), costs_(scenario), accounting_(accounting) {
  const std::size_t num_tasks = scenario.tasks.size();
  preds_.resize(num_tasks);
  for (const Workflow& wf : scenario.workflows)
    for (const auto& [a, b] : wf.edges) preds_[static_cast<std::size_t>(b)].push_back(a);
  private_home_.assign(scenario.datasets.size(), kNoDatacenter);
  for (const Dataset& ds : scenario.datasets)
    if (ds.is_private()) private_home_[static_cast<std::size_t>(ds.id)] = *ds.home;

  if (build_placement.universe() != scenario.datasets.size())
    throw std::invalid_argument("build placement does not cover the scenario datasets");
  st_.placement = build_placement;
  st_.used = storage_used(scenario, st_.placement);
  st_.finished.assign(num_tasks, 0);
  st_.cancelled.assign(num_tasks, 0);
  st_.executions.assign(num_tasks, 0);
  st_.present.assign(scenario.workflows.size(), 1);
  for (const SlotEvent& ev : scenario.events)
    for (WorkflowId w : ev.arrivals) st_.present[static_cast<std::size_t>(w)] = 0;
  st_.producer_site.assign(scenario.datasets.size(), kNoDatacenter);
  if (!capacity_feasible(scenario, st_.placement)) ++st_.violations.capacity;
  for (const Dataset& ds : scenario.datasets)
    if (ds.is_private() && st_.placement.contains(ds.id) && st_.placement.at(ds.id) != *ds.home)
      ++st_.violations.private_moves;
}

bool Simulation::done() const {
  for (std::size_t t = 0; t < st_.finished.size(); ++t)
    if (!st_.finished[t] && !st_.cancelled[t]) return false;
  return std::none_of(scenario_.events.begin(), scenario_.events.end(),
                      [&](const SlotEvent& ev) { return ev.slot > st_.slot; });
}

bool Simulation::predecessors_finished(TaskId t) const {
  const auto& preds = preds_[static_cast<std::size_t>(t)];
  return std::all_of(preds.begin(), preds.end(), [&](TaskId p) { return st_.finished[static_cast<std::size_t>(p)] != 0; });
}

void Simulation::apply_events() {
  bool departed = false;
  std::vector<char> gone(scenario_.workflows.size(), 0);
  for (const SlotEvent& ev : scenario_.events) {
    if (ev.slot != st_.slot) continue;
    for (WorkflowId w : ev.arrivals) st_.present[static_cast<std::size_t>(w)] = 1;
    for (WorkflowId w : ev.departures) {
      st_.present[static_cast<std::size_t>(w)] = 0;
      gone[static_cast<std::size_t>(w)] = 1;
      departed = true;
      for (TaskId t : scenario_.workflows[static_cast<std::size_t>(w)].tasks)
        if (!st_.finished[static_cast<std::size_t>(t)]) st_.cancelled[static_cast<std::size_t>(t)] = 1;
    }
  }
  if (!departed) return;
  for (const Dataset& ds : scenario_.datasets) {
    if (!st_.placement.contains(ds.id)) continue;
    const bool unneeded = std::all_of(ds.consumers.begin(), ds.consumers.end(), [&](TaskId t) {
      return st_.finished[static_cast<std::size_t>(t)] || st_.cancelled[static_cast<std::size_t>(t)];
    });
    const bool owned = std::any_of(ds.producers.begin(), ds.producers.end(), [&](TaskId t) {
      return gone[static_cast<std::size_t>(scenario_.tasks[static_cast<std::size_t>(t)].workflow)] != 0;
    });
    if (unneeded && (!ds.consumers.empty() || owned)) st_.placement.erase(ds.id);
  }
  st_.used = storage_used(scenario_, st_.placement);
}

void Simulation::promote() {
  st_.ready.clear();
  for (const Task& t : scenario_.tasks) {
    const auto i = static_cast<std::size_t>(t.id);
    if (st_.finished[i] || st_.cancelled[i] || !st_.present[static_cast<std::size_t>(t.workflow)]) continue;
    if (!predecessors_finished(t.id)) continue;
    if (!std::all_of(t.inputs.begin(), t.inputs.end(), [&](DatasetId d) { return st_.placement.contains(d); })) continue;
    st_.ready.push_back(t.id);
  }
}

SlotReport Simulation::begin_slot() {
  if (in_slot_) throw std::logic_error("begin_slot called twice without finish_slot");
  ++st_.slot;
  apply_events();
  promote();
  const bool future_events = std::any_of(scenario_.events.begin(), scenario_.events.end(),
                                         [&](const SlotEvent& ev) { return ev.slot > st_.slot; });
  if (st_.ready.empty() && !future_events && !done())
    throw std::runtime_error("simulation stalled at slot " + std::to_string(st_.slot) + " with unfinished tasks");

  open_ = SlotReport{};
  open_.slot = st_.slot;
  open_ticks_ = 0;
  st_.pending.clear();
  std::vector<Demand> charged;
  for (TaskId t : st_.ready) {
    const auto i = static_cast<std::size_t>(t);
    if (!predecessors_finished(t) || st_.executions[i] > 0) ++st_.violations.topological;
    ++st_.executions[i];
    const Task& task = scenario_.tasks[i];
    const DcId dc = assign_task(scenario_, costs_, st_.placement, t);
    for (DatasetId d : task.inputs) {
      const Dataset& ds = scenario_.datasets[static_cast<std::size_t>(d)];
      if (ds.initial()) continue;
      const DcId from = st_.placement.at(d);
      if (from == dc) continue;
      const Demand demand{d, dc};
      if (accounting_ == FetchAccounting::kOncePerDestination) {
        if (std::find(charged.begin(), charged.end(), demand) != charged.end()) continue;
        charged.push_back(demand);
      }
      open_ticks_ += costs_.transfer(ds.size, from, dc);
      ++open_.moves;
      open_.bytes += ds.size;
    }
    for (DatasetId d : task.outputs) {
      st_.producer_site[static_cast<std::size_t>(d)] = dc;
      st_.pending.push_back(d);
    }
  }
  in_slot_ = true;
  open_.time = costs_.to_seconds(open_ticks_);
  return open_;
}

PlacementMap Simulation::candidate(std::span<const DcId> choices, std::vector<Relocation>* moves) const {
  if (choices.size() != st_.pending.size()) throw std::invalid_argument("one choice per pending dataset expected");
  PlacementMap p = st_.placement;
  std::vector<DatasetId> movable;
  for (std::size_t k = 0; k < choices.size(); ++k) {
    const DatasetId d = st_.pending[k];
    const DcId home = private_home_[static_cast<std::size_t>(d)];
    if (home != kNoDatacenter) {
      p.place(d, home);
      continue;
    }
    if (choices[k] < 0 || choices[k] >= scenario_.num_datacenters())
      throw std::invalid_argument("placement choice outside the datacenter range");
    p.place(d, choices[k]);
    movable.push_back(d);
  }
  return repair_pending(std::move(p), scenario_, movable, moves);
}

Ticks Simulation::lookahead(const PlacementMap& placement) const {
  std::vector<TaskId> consumers;
  for (DatasetId d : st_.pending)
    for (TaskId t : scenario_.datasets[static_cast<std::size_t>(d)].consumers)
      if (!st_.finished[static_cast<std::size_t>(t)] && !st_.cancelled[static_cast<std::size_t>(t)]) consumers.push_back(t);
  std::sort(consumers.begin(), consumers.end());
  consumers.erase(std::unique(consumers.begin(), consumers.end()), consumers.end());
  Ticks total = 0;
  std::vector<Demand> charged;
  for (TaskId t : consumers) {
    const DcId dc = assign_task(scenario_, costs_, placement, t);
    for (DatasetId d : scenario_.tasks[static_cast<std::size_t>(t)].inputs) {
      const Dataset& ds = scenario_.datasets[static_cast<std::size_t>(d)];
      const std::optional<DcId> from = placement.find(d);
      if (ds.initial() || !from || *from == dc) continue;
      const Demand demand{d, dc};
      if (accounting_ == FetchAccounting::kOncePerDestination) {
        if (std::find(charged.begin(), charged.end(), demand) != charged.end()) continue;
        charged.push_back(demand);
      }
      total += costs_.transfer(ds.size, *from, dc);
    }
  }
  return total;
}

Ticks Simulation::relocation_cost(std::span<const Relocation> moves) const {
  Ticks total = 0;
  for (const Relocation& m : moves)
    if (std::find(st_.pending.begin(), st_.pending.end(), m.dataset) == st_.pending.end())
      total += costs_.transfer(scenario_.datasets[static_cast<std::size_t>(m.dataset)].size, m.from, m.to);
  return total;
}

Ticks Simulation::emission_cost(const PlacementMap& placement) const {
  Ticks total = 0;
  for (DatasetId d : st_.pending) {
    const DcId at = placement.at(d);
    const DcId from = st_.producer_site[static_cast<std::size_t>(d)];
    if (at != from) total += costs_.transfer(scenario_.datasets[static_cast<std::size_t>(d)].size, from, at);
  }
  return total;
}

Ticks Simulation::decision_cost(std::span<const DcId> choices) const {
  std::vector<Relocation> moves;
  const PlacementMap p = candidate(choices, &moves);
  return lookahead(p) + relocation_cost(moves) + emission_cost(p);
}

std::vector<DcId> Simulation::producer_choices() const {
  std::vector<DcId> out;
  out.reserve(st_.pending.size());
  for (DatasetId d : st_.pending) out.push_back(st_.producer_site[static_cast<std::size_t>(d)]);
  return out;
}

SlotReport Simulation::finish_slot(std::span<const DcId> choices) {
  if (!in_slot_) throw std::logic_error("finish_slot called outside a slot");
  std::vector<Relocation> moves;
  PlacementMap next = candidate(choices, &moves);
  for (const Relocation& m : moves) {
    if (std::find(st_.pending.begin(), st_.pending.end(), m.dataset) != st_.pending.end()) continue;
    const Megabytes size = scenario_.datasets[static_cast<std::size_t>(m.dataset)].size;
    open_ticks_ += costs_.transfer(size, m.from, m.to);
    ++open_.moves;
    open_.bytes += size;
  }
  for (DatasetId d : st_.pending) {
    const DcId at = next.at(d);
    const DcId from = st_.producer_site[static_cast<std::size_t>(d)];
    if (at == from) continue;
    const Megabytes size = scenario_.datasets[static_cast<std::size_t>(d)].size;
    open_ticks_ += costs_.transfer(size, from, at);
    ++open_.moves;
    open_.bytes += size;
  }
  st_.placement = std::move(next);
  st_.used = storage_used(scenario_, st_.placement);
  if (!capacity_feasible(scenario_, st_.placement)) ++st_.violations.capacity;
  for (std::size_t d = 0; d < private_home_.size(); ++d) {
    const std::optional<DcId> at = st_.placement.find(static_cast<DatasetId>(d));
    if (private_home_[d] != kNoDatacenter && at && *at != private_home_[d]) ++st_.violations.private_moves;
  }
  for (TaskId t : st_.ready) st_.finished[static_cast<std::size_t>(t)] = 1;
  st_.ready.clear();
  st_.pending.clear();
  evict_consumed(st_, scenario_);
  in_slot_ = false;
  committed_ticks_ += open_ticks_;
  open_.time = costs_.to_seconds(open_ticks_);
  open_ticks_ = 0;
  return open_;
}

SlotReport Simulation::advance_slot(RuntimePlacer& placer) {
  begin_slot();
  std::vector<DcId> choices;
  if (!st_.pending.empty()) choices = placer.place(DecisionContext{*this, st_.pending});
  return finish_slot(choices);
}

std::vector<DcId> ProducerPlacer::place(const DecisionContext& ctx) { return ctx.sim.producer_choices(); }

namespace {

// Placement of the public pending datasets as a particle problem.
class PendingObjective final : public PlacementObjective {
 public:
  PendingObjective(const Simulation& sim, std::span<const DatasetId> pending) : sim_(sim), choices_(sim.producer_choices()) {
    for (std::size_t k = 0; k < pending.size(); ++k)
      if (!sim.scenario().datasets[static_cast<std::size_t>(pending[k])].is_private()) dims_.push_back(k);
  }

  std::size_t dimension() const override { return dims_.size(); }
  int num_datacenters() const override { return sim_.scenario().num_datacenters(); }
  Ticks ticks_per_second() const override { return sim_.costs().ticks_per_second(); }
  Ticks cost(std::span<const DcId> positions) override { return sim_.decision_cost(expand(positions)); }

  std::vector<DcId> expand(std::span<const DcId> positions) {
    for (std::size_t k = 0; k < dims_.size(); ++k) choices_[dims_[k]] = positions[k];
    return choices_;
  }

 private:
  const Simulation& sim_;
  std::vector<std::size_t> dims_;
  std::vector<DcId> choices_;
};

}  // namespace

std::vector<DcId> OptimizerPlacer::place(const DecisionContext& ctx) {
  PendingObjective objective(ctx.sim, ctx.pending);
  if (objective.dimension() == 0) return ctx.sim.producer_choices();
  CachedObjective cached(objective);
  OptimizerConfig cfg = cfg_;
  cfg.seed = mix_seed(cfg_.seed, calls_++);
  const SearchResult found = search(cached, kind_, cfg);
  return objective.expand(found.best.positions);
}

std::vector<DcId> RlPlacer::place(const DecisionContext& ctx) {
  const Simulation& sim = ctx.sim;
  const Scenario& s = sim.scenario();
  Vector state = encode_state(policy_.layout, s, sim.candidate(sim.producer_choices(), nullptr), ctx.pending);
  std::vector<DcId> best;
  Ticks best_cost = std::numeric_limits<Ticks>::max();
  for (int step = 0; step < std::max(1, policy_.maxstep); ++step) {
    const Vector scores = policy_.actor.forward(state);
    DecodedAction decoded = decode_action(scores, policy_.layout, ctx.pending, s, sim.state().placement);
    const Ticks cost = sim.lookahead(decoded.placement) + sim.relocation_cost(decoded.relocations) +
                       sim.emission_cost(decoded.placement);
    if (cost < best_cost) {
      best_cost = cost;
      best = decoded.choice;
    }
    state = encode_state(policy_.layout, s, decoded.placement, ctx.pending);
  }
  return best;
}

SimulationEnv::SimulationEnv(const Scenario& scenario, PlacementMap build_placement, StateLayout layout,
                             FetchAccounting accounting)
    : scenario_(scenario), build_(std::move(build_placement)), layout_(layout), accounting_(accounting) {
  if (layout_.num_datacenters != scenario.num_datacenters() || layout_.max_datasets < scenario.num_datasets())
    throw std::invalid_argument("state layout does not fit the scenario");
  reset();
}

SimulationEnv::~SimulationEnv() = default;

void SimulationEnv::reset() {
  sim_ = std::make_unique<Simulation>(scenario_, build_, accounting_);
  open_ = false;
  slots_ = 0;
}

bool SimulationEnv::next_decision() {
  if (open_) throw std::logic_error("next_decision called before commit");
  while (!sim_->done()) {
    sim_->begin_slot();
    ++slots_;
    const auto& pending = sim_->state().pending;
    const bool needs_choice = std::any_of(pending.begin(), pending.end(), [&](DatasetId d) {
      return !scenario_.datasets[static_cast<std::size_t>(d)].is_private();
    });
    if (needs_choice) {
      open_ = true;
      best_choice_.clear();
      best_cost_ = std::numeric_limits<Ticks>::max();
      return true;
    }
    sim_->finish_slot(sim_->producer_choices());
  }
  return false;
}

int SimulationEnv::slot() const { return sim_->state().slot; }

Vector SimulationEnv::state() const {
  return encode_state(layout_, scenario_, sim_->candidate(sim_->producer_choices(), nullptr), sim_->state().pending);
}

double SimulationEnv::average_for(Ticks decision) const {
  const Seconds t = sim_->committed_time() + sim_->costs().to_seconds(sim_->open_slot_ticks() + decision);
  return t.to_double() / static_cast<double>(std::max(1, sim_->state().slot));
}

double SimulationEnv::current_average() const { return average_for(sim_->decision_cost(sim_->producer_choices())); }

DecisionEnv::Step SimulationEnv::try_action(const Vector& scores) {
  if (!open_) throw std::logic_error("try_action called without an open decision");
  DecodedAction decoded = decode_action(scores, layout_, sim_->state().pending, scenario_, sim_->state().placement);
  const Ticks cost = sim_->lookahead(decoded.placement) + sim_->relocation_cost(decoded.relocations) +
                     sim_->emission_cost(decoded.placement);
  if (cost < best_cost_) {
    best_cost_ = cost;
    best_choice_ = decoded.choice;
  }
  return {average_for(cost), encode_state(layout_, scenario_, decoded.placement, sim_->state().pending)};
}

void SimulationEnv::commit() {
  if (!open_) throw std::logic_error("commit called without an open decision");
  sim_->finish_slot(best_choice_.empty() ? sim_->producer_choices() : best_choice_);
  open_ = false;
}

Seconds SimulationEnv::runtime_total() const { return sim_->committed_time(); }
int SimulationEnv::slots() const { return slots_; }

BuildResult place_build_time(const Scenario& scenario, Metaheuristic method, const OptimizerConfig& cfg) {
  return run_baseline(method, scenario, cfg);
}

RunSummary run_runtime(const Scenario& scenario, const BuildResult& build, RuntimePlacer& placer,
                       FetchAccounting accounting) {
  RunSummary out;
  const CostModel costs(scenario);
  const std::vector<Demand> demands = stage_demands(scenario, costs, build.placement, Stage::kBuild, accounting);
  out.build = slot_transfer_time(scenario, build.placement, demands, 0);
  out.build_time = out.build.time;
  Simulation sim(scenario, build.placement, accounting);
  while (!sim.done()) {
    out.slots.push_back(sim.advance_slot(placer));
    out.runtime_total += out.slots.back().time;
  }
  out.total = total_transfer_time(out.build_time, out.runtime_total);
  out.avg_slot_time = out.total.to_double() / static_cast<double>(out.slots.size() + 1);
  out.violations = sim.state().violations;
  return out;
}

RunSummary run_strategy(const Scenario& scenario, Strategy strategy, const RunConfig& cfg, std::uint64_t seed,
                        const RlPolicy* policy) {
  OptimizerConfig build_cfg = cfg.build;
  build_cfg.seed = mix_seed(seed, 0);
  build_cfg.accounting = cfg.accounting;
  const BuildResult build = place_build_time(scenario, build_method(strategy), build_cfg);
  switch (strategy) {
    case Strategy::kRandom: {
      ProducerPlacer placer;
      return run_runtime(scenario, build, placer, cfg.accounting);
    }
    case Strategy::kDymRl: {
      if (policy == nullptr) throw std::invalid_argument("dym_rl needs a trained policy");
      RlPlacer placer(*policy);
      return run_runtime(scenario, build, placer, cfg.accounting);
    }
    default: {
      OptimizerConfig rt = cfg.runtime;
      rt.seed = mix_seed(seed, 1);
      rt.accounting = cfg.accounting;
      OptimizerPlacer placer(build_method(strategy), rt);
      return run_runtime(scenario, build, placer, cfg.accounting);
    }
  }
}

void write_run_csv(std::ostream& out, const RunSummary& summary) {
  char buf[200];
  out << "slot,moves,bytes_mb,time_s\n";
  auto row = [&](const SlotReport& r) {
    std::snprintf(buf, sizeof buf, "%d,%lld,%lld,%.6f\n", r.slot, static_cast<long long>(r.moves),
                  static_cast<long long>(r.bytes), r.time.to_double());
    out << buf;
  };
  row(summary.build);
  for (const SlotReport& r : summary.slots) row(r);
  out << "build_time_s,runtime_total_s,avg_slot_time_s,total_s\n";
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f\n", summary.build_time.to_double(),
                summary.runtime_total.to_double(), summary.avg_slot_time, summary.total.to_double());
  out << buf;
}

}  // namespace dplace
