#include "dplace/model.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <string>

namespace dplace {

std::int64_t BandwidthTable::band(DcId from, DcId to) const {
  if (from == to) throw std::invalid_argument("bandwidth lookup on the diagonal");
  if (from < 0 || to < 0 || from >= size_ || to >= size_)
    throw std::out_of_range("bandwidth lookup outside the table");
  return band_[index(from, to)];
}

void BandwidthTable::set(DcId a, DcId b, std::int64_t mb_per_s) {
  if (a == b) throw std::invalid_argument("bandwidth on the diagonal is undefined");
  band_.at(index(a, b)) = mb_per_s;
  band_.at(index(b, a)) = mb_per_s;
}

DcId Scenario::cloud_of_region(int region) const {
  for (const auto& dc : datacenters)
    if (dc.is_cloud() && dc.region == region) return dc.id;
  throw ScenarioError("region " + std::to_string(region) + " has no cloud datacenter");
}

DcId PlacementMap::at(DatasetId d) const {
  const DcId dc = loc_.at(static_cast<std::size_t>(d));
  if (dc == kNoDatacenter) throw std::out_of_range("dataset " + std::to_string(d) + " is not placed");
  return dc;
}

std::optional<DcId> PlacementMap::find(DatasetId d) const {
  if (d < 0 || static_cast<std::size_t>(d) >= loc_.size()) return std::nullopt;
  const DcId dc = loc_[static_cast<std::size_t>(d)];
  if (dc == kNoDatacenter) return std::nullopt;
  return dc;
}

std::size_t PlacementMap::count() const {
  return static_cast<std::size_t>(
      std::count_if(loc_.begin(), loc_.end(), [](DcId dc) { return dc != kNoDatacenter; }));
}

CostModel::CostModel(const Scenario& scenario) : num_dc_(scenario.num_datacenters()) {
  constexpr Ticks kMaxTicksPerSecond = Ticks{1} << 40;
  for (DcId i = 0; i < num_dc_; ++i) {
    for (DcId j = i + 1; j < num_dc_; ++j) {
      const std::int64_t band = scenario.bandwidth.band(i, j);
      if (band <= 0) throw ScenarioError("non-positive bandwidth");
      ticks_per_second_ = std::lcm(ticks_per_second_, band);
      if (ticks_per_second_ > kMaxTicksPerSecond)
        throw ScenarioError("bandwidth values have no usable common time unit");
    }
  }
  per_mb_.assign(static_cast<std::size_t>(num_dc_) * static_cast<std::size_t>(num_dc_), 0);
  for (DcId i = 0; i < num_dc_; ++i)
    for (DcId j = 0; j < num_dc_; ++j)
      if (i != j)
        per_mb_[static_cast<std::size_t>(i) * static_cast<std::size_t>(num_dc_) +
                static_cast<std::size_t>(j)] = ticks_per_second_ / scenario.bandwidth.band(i, j);
}

namespace {

void add(std::vector<Violation>& out, std::string code, std::string message) {
  out.push_back({std::move(code), std::move(message)});
}

bool has_cycle(const Workflow& wf) {
  std::vector<TaskId> nodes = wf.tasks;
  std::sort(nodes.begin(), nodes.end());
  auto local = [&](TaskId t) {
    return static_cast<std::size_t>(std::lower_bound(nodes.begin(), nodes.end(), t) - nodes.begin());
  };
  std::vector<int> indegree(nodes.size(), 0);
  std::vector<std::vector<std::size_t>> next(nodes.size());
  for (const auto& [a, b] : wf.edges) {
    next[local(a)].push_back(local(b));
    ++indegree[local(b)];
  }
  std::queue<std::size_t> frontier;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (indegree[i] == 0) frontier.push(i);
  std::size_t seen = 0;
  while (!frontier.empty()) {
    const std::size_t n = frontier.front();
    frontier.pop();
    ++seen;
    for (std::size_t m : next[n])
      if (--indegree[m] == 0) frontier.push(m);
  }
  return seen != nodes.size();
}

bool contains(const std::vector<std::int32_t>& v, std::int32_t x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

std::vector<Violation> validate_scenario(const Scenario& s) {
  std::vector<Violation> out;
  const int num_dc = s.num_datacenters();
  const auto num_tasks = static_cast<TaskId>(s.tasks.size());
  const auto num_wf = static_cast<WorkflowId>(s.workflows.size());

  if (s.regions <= 0) add(out, "regions", "scenario needs at least one region");
  std::vector<int> clouds_per_region(static_cast<std::size_t>(std::max(s.regions, 0)), 0);
  for (DcId i = 0; i < num_dc; ++i) {
    const Datacenter& dc = s.datacenters[static_cast<std::size_t>(i)];
    const std::string name = "datacenter " + std::to_string(i);
    if (dc.id != i) add(out, "dangling-id", name + " has id " + std::to_string(dc.id));
    if (dc.region < 0 || dc.region >= s.regions) {
      add(out, "region", name + " references unknown region " + std::to_string(dc.region));
    } else if (dc.is_cloud()) {
      ++clouds_per_region[static_cast<std::size_t>(dc.region)];
    }
    if (dc.is_cloud() && dc.capacity)
      add(out, "capacity-kind", name + " is a cloud with finite capacity");
    if (!dc.is_cloud() && (!dc.capacity || *dc.capacity <= 0))
      add(out, "capacity-kind", name + " is an edge without a positive finite capacity");
  }
  for (std::size_t r = 0; r < clouds_per_region.size(); ++r)
    if (clouds_per_region[r] != 1)
      add(out, "cloud-per-region",
          "region " + std::to_string(r) + " has " + std::to_string(clouds_per_region[r]) + " clouds");

  if (s.bandwidth.size() != num_dc) {
    add(out, "bandwidth", "bandwidth table size does not match the datacenter count");
  } else {
    for (DcId i = 0; i < num_dc; ++i)
      for (DcId j = i + 1; j < num_dc; ++j)
        if (s.bandwidth.raw(i, j) <= 0 || s.bandwidth.raw(i, j) != s.bandwidth.raw(j, i))
          add(out, "bandwidth",
              "bandwidth between " + std::to_string(i) + " and " + std::to_string(j) +
                  " must be positive and symmetric");
  }

  for (WorkflowId w = 0; w < num_wf; ++w) {
    const Workflow& wf = s.workflows[static_cast<std::size_t>(w)];
    const std::string name = "workflow " + std::to_string(w);
    if (wf.id != w) add(out, "dangling-id", name + " has id " + std::to_string(wf.id));
    bool tasks_ok = true;
    for (TaskId t : wf.tasks) {
      if (t < 0 || t >= num_tasks || s.tasks[static_cast<std::size_t>(t)].workflow != w) {
        add(out, "dangling-id", name + " lists task " + std::to_string(t) + " it does not own");
        tasks_ok = false;
      }
    }
    for (const auto& [a, b] : wf.edges) {
      if (!contains(wf.tasks, a) || !contains(wf.tasks, b)) {
        add(out, "dangling-id", name + " has an edge outside its task set");
        tasks_ok = false;
      }
    }
    if (tasks_ok && has_cycle(wf)) add(out, "cycle", name + " precedence relation has a cycle");
  }

  const auto num_ds = static_cast<DatasetId>(s.datasets.size());
  auto dataset_ok = [&](DatasetId d) { return d >= 0 && d < num_ds; };
  for (TaskId t = 0; t < num_tasks; ++t) {
    const Task& task = s.tasks[static_cast<std::size_t>(t)];
    const std::string name = "task " + std::to_string(t);
    if (task.id != t) add(out, "dangling-id", name + " has id " + std::to_string(task.id));
    if (task.workflow < 0 || task.workflow >= num_wf ||
        !contains(s.workflows[static_cast<std::size_t>(task.workflow)].tasks, t))
      add(out, "dangling-id", name + " belongs to no workflow");
    for (DatasetId d : task.inputs) {
      if (!dataset_ok(d)) {
        add(out, "dangling-id", name + " reads unknown dataset " + std::to_string(d));
      } else if (!contains(s.datasets[static_cast<std::size_t>(d)].consumers, t)) {
        add(out, "consumer-consistency", name + " reads dataset " + std::to_string(d) + " without being its consumer");
      }
    }
    for (DatasetId d : task.outputs) {
      if (!dataset_ok(d)) {
        add(out, "dangling-id", name + " writes unknown dataset " + std::to_string(d));
      } else if (!contains(s.datasets[static_cast<std::size_t>(d)].producers, t)) {
        add(out, "producer-consistency", name + " writes dataset " + std::to_string(d) + " without being its producer");
      }
      if (contains(task.inputs, d)) add(out, "self-dependency", name + " reads its own output");
    }
  }

  std::vector<Megabytes> private_load(static_cast<std::size_t>(num_dc), 0);
  for (DatasetId d = 0; d < num_ds; ++d) {
    const Dataset& ds = s.datasets[static_cast<std::size_t>(d)];
    const std::string name = "dataset " + std::to_string(d);
    if (ds.id != d) add(out, "dangling-id", name + " has id " + std::to_string(ds.id));
    if (ds.size <= 0) add(out, "size", name + " has a non-positive size");
    if (ds.is_private()) {
      if (!ds.home || *ds.home < 0 || *ds.home >= num_dc ||
          s.datacenters[static_cast<std::size_t>(*ds.home)].is_cloud()) {
        add(out, "privacy-home", name + " is private but not homed on an edge datacenter");
      } else if (ds.initial()) {
        private_load[static_cast<std::size_t>(*ds.home)] += ds.size;
      }
    } else if (ds.home) {
      add(out, "privacy-home", name + " is public but declares a home");
    }
    if (ds.producers.size() > 1) add(out, "producer-count", name + " has more than one producer");
    std::vector<WorkflowId> consumer_workflows;
    for (TaskId t : ds.producers) {
      if (t < 0 || t >= num_tasks) {
        add(out, "dangling-id", name + " names unknown producer " + std::to_string(t));
      } else if (!contains(s.tasks[static_cast<std::size_t>(t)].outputs, d)) {
        add(out, "producer-consistency", name + " producer " + std::to_string(t) + " does not output it");
      }
    }
    for (TaskId t : ds.consumers) {
      if (t < 0 || t >= num_tasks) {
        add(out, "dangling-id", name + " names unknown consumer " + std::to_string(t));
        continue;
      }
      const Task& task = s.tasks[static_cast<std::size_t>(t)];
      if (!contains(task.inputs, d))
        add(out, "consumer-consistency", name + " consumer " + std::to_string(t) + " does not read it");
      if (!contains(consumer_workflows, task.workflow)) consumer_workflows.push_back(task.workflow);
    }
    if (ds.shared != (consumer_workflows.size() >= 2))
      add(out, "shared-flag", name + " shared flag disagrees with its consumer workflows");
  }
  for (DcId i = 0; i < num_dc; ++i) {
    const Datacenter& dc = s.datacenters[static_cast<std::size_t>(i)];
    if (dc.capacity && private_load[static_cast<std::size_t>(i)] > *dc.capacity)
      add(out, "private-capacity", "private datasets exceed the capacity of datacenter " + std::to_string(i));
  }

  for (const SlotEvent& ev : s.events) {
    if (ev.slot < 1) add(out, "event", "events must be scheduled at slot 1 or later");
    for (WorkflowId w : ev.arrivals)
      if (w < 0 || w >= num_wf) add(out, "dangling-id", "event names unknown workflow " + std::to_string(w));
    for (WorkflowId w : ev.departures)
      if (w < 0 || w >= num_wf) add(out, "dangling-id", "event names unknown workflow " + std::to_string(w));
  }
  return out;
}

SlotReport slot_transfer_time(const Scenario& scenario, const PlacementMap& placement,
                              std::span<const Demand> demands, int slot) {
  SlotReport report;
  report.slot = slot;
  for (const Demand& demand : demands) {
    const std::optional<DcId> from = placement.find(demand.dataset);
    if (!from) throw std::out_of_range("demand for unknown dataset " + std::to_string(demand.dataset));
    if (*from == demand.destination) continue;
    const Megabytes size = scenario.datasets.at(static_cast<std::size_t>(demand.dataset)).size;
    report.moves += 1;
    report.bytes += size;
    report.time += Seconds(size, scenario.bandwidth.band(*from, demand.destination));
  }
  return report;
}

DcId assign_task(const Scenario& scenario, const CostModel& costs, const PlacementMap& placement,
                 TaskId task) {
  const Task& t = scenario.tasks.at(static_cast<std::size_t>(task));
  DcId best = 0;
  Ticks best_cost = -1;
  for (DcId dc = 0; dc < costs.num_datacenters(); ++dc) {
    Ticks cost = 0;
    for (DatasetId d : t.inputs) {
      const DcId loc = placement.raw()[static_cast<std::size_t>(d)];
      if (loc != kNoDatacenter) cost += costs.transfer(scenario.datasets[static_cast<std::size_t>(d)].size, loc, dc);
    }
    if (best_cost < 0 || cost < best_cost) {
      best = dc;
      best_cost = cost;
    }
  }
  return best;
}

std::vector<Demand> stage_demands(const Scenario& scenario, const CostModel& costs,
                                  const PlacementMap& placement, Stage stage,
                                  FetchAccounting accounting) {
  std::vector<Demand> demands;
  const auto in_stage = [&](const Dataset& ds) {
    return stage == Stage::kBuild ? ds.initial() : !ds.initial();
  };
  for (const Task& task : scenario.tasks) {
    bool needs = false;
    for (DatasetId d : task.inputs)
      needs = needs || (placement.contains(d) && in_stage(scenario.datasets[static_cast<std::size_t>(d)]));
    if (!needs) continue;
    const DcId dc = assign_task(scenario, costs, placement, task.id);
    for (DatasetId d : task.inputs) {
      if (!placement.contains(d) || !in_stage(scenario.datasets[static_cast<std::size_t>(d)])) continue;
      const Demand demand{d, dc};
      if (accounting == FetchAccounting::kOncePerDestination &&
          std::find(demands.begin(), demands.end(), demand) != demands.end())
        continue;
      demands.push_back(demand);
    }
  }
  return demands;
}

StageTimes stage_transfer_time(const Scenario& scenario, const PlacementMap& placement, Stage stage,
                               FetchAccounting accounting) {
  const CostModel costs(scenario);
  Ticks pri = 0;
  Ticks shared = 0;
  Ticks unshared = 0;
  for (const Demand& demand : stage_demands(scenario, costs, placement, stage, accounting)) {
    const Dataset& ds = scenario.datasets[static_cast<std::size_t>(demand.dataset)];
    const Ticks t = costs.transfer(ds.size, placement.at(demand.dataset), demand.destination);
    if (ds.is_private()) {
      pri += t;
    } else if (ds.shared) {
      shared += t;
    } else {
      unshared += t;
    }
  }
  return {costs.to_seconds(pri), costs.to_seconds(shared), costs.to_seconds(unshared)};
}

std::vector<Megabytes> storage_used(const Scenario& scenario, const PlacementMap& placement) {
  std::vector<Megabytes> used(static_cast<std::size_t>(scenario.num_datacenters()), 0);
  const auto raw = placement.raw();
  for (std::size_t d = 0; d < raw.size(); ++d)
    if (raw[d] != kNoDatacenter) used[static_cast<std::size_t>(raw[d])] += scenario.datasets[d].size;
  return used;
}

bool capacity_feasible(const Scenario& scenario, const PlacementMap& placement) {
  const std::vector<Megabytes> used = storage_used(scenario, placement);
  for (const Datacenter& dc : scenario.datacenters)
    if (dc.capacity && used[static_cast<std::size_t>(dc.id)] > *dc.capacity) return false;
  return true;
}

}  // namespace dplace
