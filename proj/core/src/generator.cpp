#include "dplace/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

namespace dplace {

void check_config(const GeneratorConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("generator config: ") + what);
  };
  require(cfg.regions >= 1, "regions must be at least 1");
  require(cfg.edges_per_region >= 0, "edges_per_region must be non-negative");
  require(cfg.edge_capacity > 0, "edge_capacity must be positive");
  require(cfg.bandwidth_multiplier > 0, "bandwidth_multiplier must be positive");
  require(cfg.workflows >= 1, "workflows must be at least 1");
  require(cfg.min_width >= 1 && cfg.min_width <= cfg.max_width, "width range is empty");
  require(cfg.min_dataset_size >= 1 && cfg.min_dataset_size <= cfg.max_dataset_size, "dataset size range is empty");
  require(cfg.private_fraction >= 0 && cfg.private_fraction <= 1, "private_fraction outside [0, 1]");
  require(cfg.shared_fraction >= 0 && cfg.shared_fraction <= 1, "shared_fraction outside [0, 1]");
  require(cfg.arrival_spread >= 0, "arrival_spread must be non-negative");
}

Topology build_topology(const GeneratorConfig& cfg) {
  check_config(cfg);
  Topology topo;
  topo.regions = cfg.regions;
  const int per_region = cfg.edges_per_region + 1;
  for (int r = 0; r < cfg.regions; ++r) {
    for (int k = 0; k < per_region; ++k) {
      Datacenter dc;
      dc.id = r * per_region + k;
      dc.region = r;
      if (k == 0) {
        dc.kind = DcKind::kCloud;
      } else {
        dc.kind = DcKind::kEdge;
        dc.capacity = cfg.edge_capacity;
      }
      topo.datacenters.push_back(dc);
    }
  }
  const int n = static_cast<int>(topo.datacenters.size());
  topo.bandwidth = BandwidthTable(n);
  constexpr std::int64_t kEdgeEdge[] = {100, 150, 200};
  int edge_pair = 0;
  for (DcId i = 0; i < n; ++i) {
    for (DcId j = i + 1; j < n; ++j) {
      const bool ci = topo.datacenters[static_cast<std::size_t>(i)].is_cloud();
      const bool cj = topo.datacenters[static_cast<std::size_t>(j)].is_cloud();
      std::int64_t band = 0;
      if (ci && cj) {
        band = 5;
      } else if (ci || cj) {
        band = 20;
      } else {
        const double scaled = static_cast<double>(kEdgeEdge[edge_pair++ % 3]) * cfg.bandwidth_multiplier;
        band = std::max<std::int64_t>(1, std::llround(scaled));
      }
      topo.bandwidth.set(i, j, band);
    }
  }
  return topo;
}

namespace {

struct Builder {
  Scenario& s;
  std::mt19937_64& rng;
  const GeneratorConfig& cfg;

  Megabytes draw_size() {
    return std::uniform_int_distribution<Megabytes>(cfg.min_dataset_size, cfg.max_dataset_size)(rng);
  }

  DatasetId new_dataset() {
    Dataset ds;
    ds.id = s.num_datasets();
    ds.size = draw_size();
    s.datasets.push_back(ds);
    return ds.id;
  }

  TaskId new_task(Workflow& wf, std::vector<DatasetId> inputs, std::vector<DatasetId> outputs) {
    Task t;
    t.id = static_cast<TaskId>(s.tasks.size());
    t.workflow = wf.id;
    t.inputs = std::move(inputs);
    t.outputs = std::move(outputs);
    wf.tasks.push_back(t.id);
    s.tasks.push_back(std::move(t));
    return s.tasks.back().id;
  }
};

}  // namespace

Scenario generate_scenario(const GeneratorConfig& cfg) {
  Topology topo = build_topology(cfg);
  Scenario s;
  s.regions = topo.regions;
  s.datacenters = std::move(topo.datacenters);
  s.bandwidth = std::move(topo.bandwidth);

  std::mt19937_64 rng(cfg.seed);
  Builder b{s, rng, cfg};
  std::vector<std::vector<DatasetId>> raw_of(static_cast<std::size_t>(cfg.workflows));
  std::vector<std::vector<TaskId>> l0_of(static_cast<std::size_t>(cfg.workflows));

  for (WorkflowId w = 0; w < cfg.workflows; ++w) {
    Workflow wf;
    wf.id = w;
    const int width = std::uniform_int_distribution<int>(cfg.min_width, cfg.max_width)(rng);
    std::vector<DatasetId> raw, proj, diff, corr;
    for (int i = 0; i < width; ++i) raw.push_back(b.new_dataset());
    for (int i = 0; i < width; ++i) proj.push_back(b.new_dataset());
    for (int i = 0; i + 1 < width; ++i) diff.push_back(b.new_dataset());
    for (int i = 0; i < width; ++i) corr.push_back(b.new_dataset());
    const DatasetId mosaic = b.new_dataset();

    std::vector<TaskId> l0, l1, l2;
    for (int i = 0; i < width; ++i) l0.push_back(b.new_task(wf, {raw[static_cast<std::size_t>(i)]}, {proj[static_cast<std::size_t>(i)]}));
    for (int i = 0; i + 1 < width; ++i) {
      const auto k = static_cast<std::size_t>(i);
      l1.push_back(b.new_task(wf, {proj[k], proj[k + 1]}, {diff[k]}));
      wf.edges.emplace_back(l0[k], l1.back());
      wf.edges.emplace_back(l0[k + 1], l1.back());
    }
    for (int i = 0; i < width; ++i) {
      const auto k = static_cast<std::size_t>(i);
      std::vector<DatasetId> inputs{proj[k]};
      if (i >= 1) inputs.push_back(diff[k - 1]);
      if (i + 1 < width) inputs.push_back(diff[k]);
      l2.push_back(b.new_task(wf, inputs, {corr[k]}));
      wf.edges.emplace_back(l0[k], l2.back());
      if (i >= 1) wf.edges.emplace_back(l1[k - 1], l2.back());
      if (i + 1 < width) wf.edges.emplace_back(l1[k], l2.back());
    }
    const TaskId l3 = b.new_task(wf, corr, {mosaic});
    for (TaskId t : l2) wf.edges.emplace_back(t, l3);

    raw_of[static_cast<std::size_t>(w)] = raw;
    l0_of[static_cast<std::size_t>(w)] = l0;
    s.workflows.push_back(std::move(wf));
  }

  std::vector<DcId> edges;
  for (const Datacenter& dc : s.datacenters)
    if (!dc.is_cloud()) edges.push_back(dc.id);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Homes are drawn among edges that still fit the dataset; with no room
  // anywhere it stays public.
  std::vector<Megabytes> private_load(s.datacenters.size(), 0);
  for (const auto& raw : raw_of) {
    for (DatasetId d : raw) {
      const bool pick = unit(rng) < cfg.private_fraction;
      if (!pick || edges.empty()) continue;
      Dataset& ds = s.datasets[static_cast<std::size_t>(d)];
      std::vector<DcId> room;
      for (DcId e : edges)
        if (private_load[static_cast<std::size_t>(e)] + ds.size <= cfg.edge_capacity) room.push_back(e);
      if (room.empty()) continue;
      ds.privacy = Privacy::kPrivate;
      ds.home = room[std::uniform_int_distribution<std::size_t>(0, room.size() - 1)(rng)];
      private_load[static_cast<std::size_t>(*ds.home)] += ds.size;
    }
  }

  // Sharing draws happen whether or not sharing is enabled, so the shared and
  // unshared variants of one seed differ only in how the extra reads are served.
  std::vector<std::pair<DatasetId, TaskId>> extra_reads;
  if (cfg.workflows >= 2) {
    for (WorkflowId w = 0; w < cfg.workflows; ++w) {
      for (DatasetId d : raw_of[static_cast<std::size_t>(w)]) {
        const bool pick = unit(rng) < cfg.shared_fraction;
        auto other = std::uniform_int_distribution<WorkflowId>(0, cfg.workflows - 2)(rng);
        if (other >= w) ++other;
        const auto& l0 = l0_of[static_cast<std::size_t>(other)];
        const TaskId reader = l0[std::uniform_int_distribution<std::size_t>(0, l0.size() - 1)(rng)];
        if (pick && !s.datasets[static_cast<std::size_t>(d)].is_private()) extra_reads.emplace_back(d, reader);
      }
    }
  }
  for (const auto& [d, reader] : extra_reads) {
    Task& task = s.tasks[static_cast<std::size_t>(reader)];
    if (cfg.sharing_enabled) {
      task.inputs.push_back(d);
      s.datasets[static_cast<std::size_t>(d)].shared = true;
    } else {
      Dataset copy;
      copy.id = s.num_datasets();
      copy.size = s.datasets[static_cast<std::size_t>(d)].size;
      s.datasets.push_back(copy);
      task.inputs.push_back(copy.id);
    }
  }

  for (const Task& t : s.tasks) {
    for (DatasetId d : t.inputs) s.datasets[static_cast<std::size_t>(d)].consumers.push_back(t.id);
    for (DatasetId d : t.outputs) s.datasets[static_cast<std::size_t>(d)].producers.push_back(t.id);
  }
  for (Dataset& ds : s.datasets) std::sort(ds.consumers.begin(), ds.consumers.end());

  if (cfg.arrival_spread > 0) {
    std::map<int, std::vector<WorkflowId>> arrivals;
    for (WorkflowId w = 1; w < cfg.workflows; ++w)
      arrivals[std::uniform_int_distribution<int>(1, cfg.arrival_spread)(rng)].push_back(w);
    for (auto& [slot, list] : arrivals) {
      SlotEvent ev;
      ev.slot = slot;
      ev.arrivals = std::move(list);
      s.events.push_back(std::move(ev));
    }
  }
  return s;
}

}  // namespace dplace
