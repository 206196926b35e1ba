#pragma once

// Synthetic experiment worlds: the multi-region topology and Montage-like
// layered workflows (projection, overlap, background, mosaic).

#include <cstdint>

#include "dplace/model.hpp"

namespace dplace {

struct GeneratorConfig {
  int regions = 2;
  int edges_per_region = 3;
  Megabytes edge_capacity = 153600;
  double bandwidth_multiplier = 1.0;
  int workflows = 4;
  // Projection width per workflow; a workflow of width P has 3P tasks and
  // 4P datasets.
  int min_width = 2;
  int max_width = 3;
  Megabytes min_dataset_size = 10240;
  Megabytes max_dataset_size = 61440;
  double private_fraction = 0.2;
  double shared_fraction = 0.3;
  bool sharing_enabled = true;
  // Workflows other than the first arrive at a uniform slot in
  // [1, arrival_spread]; 0 keeps every workflow present from slot 1.
  int arrival_spread = 0;
  std::uint64_t seed = 1;
};

// Throws std::invalid_argument when a field is out of range.
void check_config(const GeneratorConfig& cfg);

struct Topology {
  int regions = 0;
  std::vector<Datacenter> datacenters;
  BandwidthTable bandwidth;
};

// Region r owns datacenter ids r*(E+1) .. r*(E+1)+E; the cloud comes first.
Topology build_topology(const GeneratorConfig& cfg);

// Workflows, tasks, datasets and events on top of build_topology(cfg).
Scenario generate_scenario(const GeneratorConfig& cfg);

}  // namespace dplace
