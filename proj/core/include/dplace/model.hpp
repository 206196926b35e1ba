#pragma once

// Domain model of multi-region edge-cloud data placement: datacenters, the
// bandwidth table, workflows, tasks and datasets, together with the transfer
// time and storage feasibility evaluations every optimizer is scored with.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dplace/rational.hpp"

namespace dplace {

using DcId = std::int32_t;
using DatasetId = std::int32_t;
using TaskId = std::int32_t;
using WorkflowId = std::int32_t;
using Megabytes = std::int64_t;
using Seconds = Rational;
// Integer time unit: one second is CostModel::ticks_per_second() ticks.
using Ticks = std::int64_t;

inline constexpr DcId kNoDatacenter = -1;

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when storage constraints cannot be met without moving private data.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DcKind { kCloud, kEdge };
enum class Privacy { kPublic, kPrivate };

struct Datacenter {
  DcId id = 0;
  DcKind kind = DcKind::kCloud;
  int region = 0;
  // nullopt is the unbounded capacity of a cloud datacenter.
  std::optional<Megabytes> capacity;

  bool is_cloud() const { return kind == DcKind::kCloud; }

  friend bool operator==(const Datacenter&, const Datacenter&) = default;
};

// Symmetric MB/s table over datacenter pairs. The diagonal is undefined and
// lookups on it throw.
class BandwidthTable {
 public:
  BandwidthTable() = default;
  explicit BandwidthTable(int size) : size_(size), band_(static_cast<std::size_t>(size) * size, 0) {}

  int size() const { return size_; }
  std::int64_t band(DcId from, DcId to) const;
  void set(DcId a, DcId b, std::int64_t mb_per_s);
  // Raw row-major entry, including the (zero) diagonal.
  std::int64_t raw(DcId from, DcId to) const { return band_[index(from, to)]; }

  friend bool operator==(const BandwidthTable&, const BandwidthTable&) = default;

 private:
  std::size_t index(DcId from, DcId to) const {
    return static_cast<std::size_t>(from) * static_cast<std::size_t>(size_) +
           static_cast<std::size_t>(to);
  }

  int size_ = 0;
  std::vector<std::int64_t> band_;
};

struct Dataset {
  DatasetId id = 0;
  Megabytes size = 0;
  Privacy privacy = Privacy::kPublic;
  std::optional<DcId> home;  // required iff private
  bool shared = false;       // consumers span two or more workflows
  std::vector<TaskId> producers;
  std::vector<TaskId> consumers;

  bool is_private() const { return privacy == Privacy::kPrivate; }
  bool initial() const { return producers.empty(); }
  bool final_output() const { return consumers.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Task {
  TaskId id = 0;
  WorkflowId workflow = 0;
  std::vector<DatasetId> inputs;
  std::vector<DatasetId> outputs;

  friend bool operator==(const Task&, const Task&) = default;
};

struct Workflow {
  WorkflowId id = 0;
  std::vector<TaskId> tasks;
  // Precedence relation: (a, b) means a precedes b.
  std::vector<std::pair<TaskId, TaskId>> edges;

  friend bool operator==(const Workflow&, const Workflow&) = default;
};

// One entry of the runtime event schedule: workflows joining or leaving the
// system at the start of a time slot.
struct SlotEvent {
  int slot = 1;
  std::vector<WorkflowId> arrivals;
  std::vector<WorkflowId> departures;

  friend bool operator==(const SlotEvent&, const SlotEvent&) = default;
};

struct Scenario {
  int regions = 0;
  std::vector<Datacenter> datacenters;
  BandwidthTable bandwidth;
  std::vector<Workflow> workflows;
  std::vector<Task> tasks;
  std::vector<Dataset> datasets;
  std::vector<SlotEvent> events;

  int num_datacenters() const { return static_cast<int>(datacenters.size()); }
  int num_datasets() const { return static_cast<int>(datasets.size()); }
  DcId cloud_of_region(int region) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Total map from every existing dataset to the datacenter that stores it.
class PlacementMap {
 public:
  PlacementMap() = default;
  explicit PlacementMap(std::size_t num_datasets) : loc_(num_datasets, kNoDatacenter) {}

  std::size_t universe() const { return loc_.size(); }
  bool contains(DatasetId d) const { return loc_.at(static_cast<std::size_t>(d)) != kNoDatacenter; }
  // Throws std::out_of_range when the dataset is not placed.
  DcId at(DatasetId d) const;
  std::optional<DcId> find(DatasetId d) const;
  void place(DatasetId d, DcId dc) { loc_.at(static_cast<std::size_t>(d)) = dc; }
  void erase(DatasetId d) { loc_.at(static_cast<std::size_t>(d)) = kNoDatacenter; }
  std::size_t count() const;

  // kNoDatacenter marks datasets that do not exist.
  std::span<const DcId> raw() const { return loc_; }

  friend bool operator==(const PlacementMap&, const PlacementMap&) = default;

 private:
  std::vector<DcId> loc_;
};

struct SlotReport {
  int slot = 0;
  std::int64_t moves = 0;
  Megabytes bytes = 0;
  Seconds time;

  friend bool operator==(const SlotReport&, const SlotReport&) = default;
};

// A dataset that must be readable at a datacenter.
struct Demand {
  DatasetId dataset = 0;
  DcId destination = 0;

  friend bool operator==(const Demand&, const Demand&) = default;
};

struct Violation {
  std::string code;
  std::string message;
};

enum class Stage { kBuild, kRun };

// How repeated demands for one dataset at one datacenter inside a single
// slot are charged.
enum class FetchAccounting {
  kOncePerDestination,  // the first fetch is charged, later ones are free
  kPerTask,             // every consuming task pays its own fetch
};

struct StageTimes {
  Seconds pri;
  Seconds pub_shared;
  Seconds pub_unshared;

  Seconds total() const { return pri + pub_shared + pub_unshared; }
};

// Integer transfer costs for one scenario. Every bandwidth divides
// ticks_per_second(), so size * per_mb() is exact.
class CostModel {
 public:
  explicit CostModel(const Scenario& scenario);

  Ticks ticks_per_second() const { return ticks_per_second_; }
  Ticks per_mb(DcId from, DcId to) const {
    return per_mb_[static_cast<std::size_t>(from) * static_cast<std::size_t>(num_dc_) +
                   static_cast<std::size_t>(to)];
  }
  Ticks transfer(Megabytes size, DcId from, DcId to) const {
    return from == to ? 0 : size * per_mb(from, to);
  }
  Seconds to_seconds(Ticks t) const { return Seconds(t, ticks_per_second_); }
  int num_datacenters() const { return num_dc_; }

 private:
  int num_dc_ = 0;
  Ticks ticks_per_second_ = 1;
  std::vector<Ticks> per_mb_;
};

std::vector<Violation> validate_scenario(const Scenario& scenario);

// Transfer time of an explicit demand list. Demands whose dataset already sits at
// the destination cost nothing.
SlotReport slot_transfer_time(const Scenario& scenario, const PlacementMap& placement,
                              std::span<const Demand> demands, int slot = 0);

// Datacenter minimizing the cost of fetching the task's placed inputs; ties
// go to the lowest id. Inputs absent from the placement are ignored.
DcId assign_task(const Scenario& scenario, const CostModel& costs, const PlacementMap& placement,
                 TaskId task);

// Fetches required by every task for its inputs of the given stage class
// (initial datasets for kBuild, generated ones for kRun).
std::vector<Demand> stage_demands(const Scenario& scenario, const CostModel& costs,
                                  const PlacementMap& placement, Stage stage,
                                  FetchAccounting accounting = FetchAccounting::kOncePerDestination);

StageTimes stage_transfer_time(const Scenario& scenario, const PlacementMap& placement, Stage stage,
                               FetchAccounting accounting = FetchAccounting::kOncePerDestination);

inline Seconds total_transfer_time(const Seconds& build, const Seconds& run) { return build + run; }

std::vector<Megabytes> storage_used(const Scenario& scenario, const PlacementMap& placement);

// True iff no edge datacenter stores more than its capacity.
bool capacity_feasible(const Scenario& scenario, const PlacementMap& placement);

}  // namespace dplace
