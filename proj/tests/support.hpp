#pragma once

// Fixture builders and brute-force oracles shared by the unit and
// acceptance tests. The oracles deliberately avoid CostModel ticks and the
// library's demand lists: they walk datasets one at a time in Rational.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dplace/model.hpp"
#include "dplace/optimizer.hpp"

namespace dplace::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(DPLACE_FIXTURE_DIR) / name;
}

// Incremental scenario construction; finish() derives producers, consumers,
// shared flags and the precedence edges implied by data dependencies.
class ScenarioBuilder {
 public:
  explicit ScenarioBuilder(int regions = 1) { s_.regions = regions; }

  DcId cloud(int region = 0) { return add_dc(DcKind::kCloud, region, std::nullopt); }
  DcId edge(Megabytes capacity, int region = 0) { return add_dc(DcKind::kEdge, region, capacity); }

  void band(DcId a, DcId b, std::int64_t mb_per_s) { bands_.push_back({a, b, mb_per_s}); }

  DatasetId dataset(Megabytes size, std::optional<DcId> private_home = std::nullopt) {
    Dataset d;
    d.id = static_cast<DatasetId>(s_.datasets.size());
    d.size = size;
    if (private_home) {
      d.privacy = Privacy::kPrivate;
      d.home = private_home;
    }
    s_.datasets.push_back(d);
    return d.id;
  }

  WorkflowId workflow() {
    Workflow w;
    w.id = static_cast<WorkflowId>(s_.workflows.size());
    s_.workflows.push_back(w);
    return w.id;
  }

  TaskId task(WorkflowId w, std::vector<DatasetId> inputs, std::vector<DatasetId> outputs = {}) {
    Task t;
    t.id = static_cast<TaskId>(s_.tasks.size());
    t.workflow = w;
    t.inputs = std::move(inputs);
    t.outputs = std::move(outputs);
    s_.tasks.push_back(t);
    s_.workflows[static_cast<std::size_t>(w)].tasks.push_back(t.id);
    return t.id;
  }

  void event(int slot, std::vector<WorkflowId> arrivals, std::vector<WorkflowId> departures = {}) {
    s_.events.push_back({slot, std::move(arrivals), std::move(departures)});
  }

  Scenario finish() {
    Scenario s = s_;
    s.bandwidth = BandwidthTable(s.num_datacenters());
    for (const auto& b : bands_) s.bandwidth.set(b.a, b.b, b.band);
    for (const Task& t : s.tasks) {
      for (DatasetId d : t.inputs) s.datasets[static_cast<std::size_t>(d)].consumers.push_back(t.id);
      for (DatasetId d : t.outputs) s.datasets[static_cast<std::size_t>(d)].producers.push_back(t.id);
    }
    for (Dataset& d : s.datasets) {
      std::vector<WorkflowId> owners;
      for (TaskId t : d.consumers) owners.push_back(s.tasks[static_cast<std::size_t>(t)].workflow);
      std::sort(owners.begin(), owners.end());
      d.shared = std::unique(owners.begin(), owners.end()) - owners.begin() >= 2;
      for (TaskId p : d.producers)
        for (TaskId c : d.consumers) {
          const WorkflowId w = s.tasks[static_cast<std::size_t>(p)].workflow;
          if (s.tasks[static_cast<std::size_t>(c)].workflow == w)
            s.workflows[static_cast<std::size_t>(w)].edges.emplace_back(p, c);
        }
    }
    return s;
  }

 private:
  struct Band {
    DcId a;
    DcId b;
    std::int64_t band;
  };

  DcId add_dc(DcKind kind, int region, std::optional<Megabytes> capacity) {
    Datacenter dc;
    dc.id = static_cast<DcId>(s_.datacenters.size());
    dc.kind = kind;
    dc.region = region;
    dc.capacity = capacity;
    s_.datacenters.push_back(dc);
    return dc.id;
  }

  Scenario s_;
  std::vector<Band> bands_;
};

// One cloud plus `edges` edges in a single region, bandwidths drawn from a
// small menu, up to `max_datasets` datasets over one or two workflows. Some
// tasks emit outputs that later tasks read.
inline Scenario random_small_scenario(std::mt19937_64& rng, int max_dc = 3, int max_datasets = 8,
                                      Megabytes edge_capacity = 1 << 20) {
  auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  static constexpr std::int64_t kBands[] = {5, 10, 20, 100, 150, 200};
  ScenarioBuilder b;
  const int num_dc = pick(2, max_dc);
  std::vector<DcId> edges;
  b.cloud();
  for (int i = 1; i < num_dc; ++i) edges.push_back(b.edge(edge_capacity));
  for (DcId i = 0; i < num_dc; ++i)
    for (DcId j = i + 1; j < num_dc; ++j) b.band(i, j, kBands[pick(0, 5)]);

  const int total = pick(2, max_datasets);
  const int initial = pick(1, total);
  std::vector<DatasetId> ids;
  for (int i = 0; i < total; ++i) {
    const bool priv = i < initial && pick(0, 4) == 0;
    ids.push_back(b.dataset(pick(1, 4000), priv ? std::optional<DcId>(edges[static_cast<std::size_t>(pick(0, static_cast<int>(edges.size()) - 1))])
                                                 : std::nullopt));
  }
  const int workflows = pick(1, 2);
  for (int w = 0; w < workflows; ++w) b.workflow();
  // Generated dataset k (k >= initial) is written by one task reading only
  // datasets with smaller ids, which keeps every workflow acyclic.
  std::vector<std::vector<DatasetId>> readable(1, std::vector<DatasetId>(ids.begin(), ids.begin() + initial));
  for (int k = initial; k < total; ++k) {
    std::vector<DatasetId> in;
    for (int r = pick(1, 2); r > 0; --r) in.push_back(static_cast<DatasetId>(pick(0, k - 1)));
    std::sort(in.begin(), in.end());
    in.erase(std::unique(in.begin(), in.end()), in.end());
    b.task(static_cast<WorkflowId>(pick(0, workflows - 1)), in, {static_cast<DatasetId>(k)});
  }
  for (int r = pick(1, 3); r > 0; --r) {
    std::vector<DatasetId> in;
    for (int q = pick(1, 3); q > 0; --q) in.push_back(static_cast<DatasetId>(pick(0, total - 1)));
    std::sort(in.begin(), in.end());
    in.erase(std::unique(in.begin(), in.end()), in.end());
    b.task(static_cast<WorkflowId>(pick(0, workflows - 1)), in);
  }
  return b.finish();
}

// Rational size / bandwidth; zero on the diagonal.
inline Seconds move_time(const Scenario& s, DatasetId d, DcId from, DcId to) {
  if (from == to) return Seconds(0);
  return Seconds(s.datasets[static_cast<std::size_t>(d)].size, s.bandwidth.raw(from, to));
}

// Where a task runs: cheapest datacenter for its placed inputs, lowest id
// on ties, computed in Rational.
inline DcId oracle_task_site(const Scenario& s, const PlacementMap& p, TaskId t) {
  DcId best = 0;
  std::optional<Seconds> best_cost;
  for (DcId dc = 0; dc < s.num_datacenters(); ++dc) {
    Seconds c(0);
    for (DatasetId d : s.tasks[static_cast<std::size_t>(t)].inputs)
      if (const auto at = p.find(d)) c += move_time(s, d, *at, dc);
    if (!best_cost || c < *best_cost) {
      best = dc;
      best_cost = c;
    }
  }
  return best;
}

struct OracleStage {
  Seconds pri;
  Seconds shared;
  Seconds unshared;
  std::int64_t moves = 0;
};

// Per-dataset accumulator: each placed dataset of the stage class pays once
// for every distinct datacenter its consumers run at (or once per consumer
// task when `per_task`).
inline OracleStage oracle_stage_time(const Scenario& s, const PlacementMap& p, Stage stage, bool per_task = false) {
  OracleStage out;
  for (const Dataset& ds : s.datasets) {
    if ((stage == Stage::kBuild) != ds.initial() || !p.contains(ds.id)) continue;
    std::vector<DcId> sites;
    for (TaskId t : ds.consumers) sites.push_back(oracle_task_site(s, p, t));
    if (!per_task) {
      std::sort(sites.begin(), sites.end());
      sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    }
    for (DcId dc : sites) {
      const Seconds t = move_time(s, ds.id, p.at(ds.id), dc);
      if (t == Seconds(0)) continue;
      ++out.moves;
      (ds.is_private() ? out.pri : ds.shared ? out.shared : out.unshared) += t;
    }
  }
  return out;
}

inline bool oracle_feasible(const Scenario& s, const PlacementMap& p) {
  std::vector<Megabytes> used(static_cast<std::size_t>(s.num_datacenters()), 0);
  for (const Dataset& ds : s.datasets)
    if (const auto at = p.find(ds.id)) used[static_cast<std::size_t>(*at)] += ds.size;
  for (const Datacenter& dc : s.datacenters)
    if (dc.capacity && used[static_cast<std::size_t>(dc.id)] > *dc.capacity) return false;
  return true;
}

struct Enumerated {
  Seconds best;
  std::size_t placements = 0;
  std::size_t feasible = 0;
};

// Minimum build-stage time over every feasible assignment of the public
// initial datasets, privates at home.
inline Enumerated enumerate_build_optimum(const Scenario& s) {
  std::vector<DatasetId> pub;
  PlacementMap base(s.datasets.size());
  for (const Dataset& ds : s.datasets) {
    if (!ds.initial()) continue;
    if (ds.is_private())
      base.place(ds.id, *ds.home);
    else
      pub.push_back(ds.id);
  }
  Enumerated out;
  std::optional<Seconds> best;
  std::vector<DcId> digits(pub.size(), 0);
  const DcId n = s.num_datacenters();
  while (true) {
    PlacementMap p = base;
    for (std::size_t k = 0; k < pub.size(); ++k) p.place(pub[k], digits[k]);
    ++out.placements;
    if (oracle_feasible(s, p)) {
      ++out.feasible;
      const OracleStage st = oracle_stage_time(s, p, Stage::kBuild);
      const Seconds t = st.pri + st.shared + st.unshared;
      if (!best || t < *best) best = t;
    }
    std::size_t k = 0;
    while (k < digits.size() && ++digits[k] == n) digits[k++] = 0;
    if (k == digits.size()) break;
  }
  out.best = best.value_or(Seconds(0));
  return out;
}

// Three datacenters (cloud 0, edges 1 and 2) and six public initial datasets
// read by a handful of tasks across two workflows; one private dataset rides
// along on edge 1.
inline Scenario enumerable_fixture(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  static constexpr std::int64_t kBands[] = {10, 20, 50, 100, 150};
  ScenarioBuilder b;
  b.cloud();
  b.edge(pick(6000, 12000));
  b.edge(pick(6000, 12000));
  b.band(0, 1, kBands[pick(0, 1)]);
  b.band(0, 2, kBands[pick(0, 2)]);
  b.band(1, 2, kBands[pick(2, 4)]);
  std::vector<DatasetId> pub;
  for (int i = 0; i < 6; ++i) pub.push_back(b.dataset(pick(500, 5000)));
  const DatasetId priv = b.dataset(pick(200, 2000), DcId{1});
  const WorkflowId w0 = b.workflow();
  const WorkflowId w1 = b.workflow();
  for (int t = 0; t < 6; ++t) {
    std::vector<DatasetId> in;
    for (int q = pick(1, 3); q > 0; --q) in.push_back(pub[static_cast<std::size_t>(pick(0, 5))]);
    if (pick(0, 3) == 0) in.push_back(priv);
    std::sort(in.begin(), in.end());
    in.erase(std::unique(in.begin(), in.end()), in.end());
    b.task(t % 2 == 0 ? w0 : w1, in);
  }
  return b.finish();
}

}  // namespace dplace::testing
