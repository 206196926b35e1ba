#include "dplace/optimizer.hpp"

#include <algorithm>
#include <limits>

namespace dplace {

std::string_view to_string(Metaheuristic m) {
  switch (m) {
    case Metaheuristic::kDeDpso: return "de_dpso";
    case Metaheuristic::kDe: return "de";
    case Metaheuristic::kDpso: return "dpso";
    case Metaheuristic::kGaDpso: return "ga_dpso";
    case Metaheuristic::kRandom: return "random";
  }
  return "unknown";
}

Metaheuristic parse_metaheuristic(std::string_view name) {
  for (Metaheuristic m : {Metaheuristic::kDeDpso, Metaheuristic::kDe, Metaheuristic::kDpso,
                          Metaheuristic::kGaDpso, Metaheuristic::kRandom})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown metaheuristic '" + std::string(name) + "'");
}

void check_config(const OptimizerConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("optimizer config: ") + what);
  };
  require(cfg.n >= 1, "n must be at least 1");
  require(cfg.itermax >= 0, "itermax must be non-negative");
  require(cfg.F >= 0 && cfg.F <= 1, "F outside [0, 1]");
  require(cfg.cr_p >= 0 && cfg.cr_p <= 1, "cr_p outside [0, 1]");
  require(cfg.cr_g >= 0 && cfg.cr_g <= 1, "cr_g outside [0, 1]");
}

Encoding::Encoding(const Scenario& scenario, std::span<const DatasetId> datasets) {
  for (DatasetId d : datasets) {
    const Dataset& ds = scenario.datasets.at(static_cast<std::size_t>(d));
    if (ds.is_private()) throw std::invalid_argument("private dataset in a particle encoding");
    dims_.push_back(d);
  }
  std::sort(dims_.begin(), dims_.end(), [&](DatasetId a, DatasetId b) {
    const bool sa = scenario.datasets[static_cast<std::size_t>(a)].shared;
    const bool sb = scenario.datasets[static_cast<std::size_t>(b)].shared;
    return sa != sb ? sa : a < b;
  });
  dims_.erase(std::unique(dims_.begin(), dims_.end()), dims_.end());
}

Encoding Encoding::build_time(const Scenario& scenario) {
  std::vector<DatasetId> ids;
  for (const Dataset& ds : scenario.datasets)
    if (ds.initial() && !ds.is_private()) ids.push_back(ds.id);
  return Encoding(scenario, ids);
}

namespace {

void check_positions(std::size_t dim, std::span<const DcId> positions, int num_dc) {
  if (positions.size() != dim) throw std::invalid_argument("particle dimension mismatch");
  for (DcId dc : positions)
    if (dc < 0 || dc >= num_dc) throw std::invalid_argument("particle entry outside the datacenter range");
}

PlacementMap initial_privates(const Scenario& scenario) {
  PlacementMap base(scenario.datasets.size());
  for (const Dataset& ds : scenario.datasets)
    if (ds.initial() && ds.is_private()) base.place(ds.id, *ds.home);
  return base;
}

// Shared by the map-level and workspace-level repair paths. `loc` is a raw
// dataset->datacenter vector, `used` the per-datacenter load matching it.
void repair_raw(std::vector<DcId>& loc, std::vector<Megabytes>& used, const Scenario& s,
                std::span<const DatasetId> movable_first, std::vector<Relocation>* moves) {
  for (const Datacenter& dc : s.datacenters) {
    if (!dc.capacity) continue;
    const auto e = static_cast<std::size_t>(dc.id);
    while (used[e] > *dc.capacity) {
      DatasetId pick = -1;
      auto better = [&](DatasetId d) {
        return pick < 0 || s.datasets[static_cast<std::size_t>(d)].size > s.datasets[static_cast<std::size_t>(pick)].size ||
               (s.datasets[static_cast<std::size_t>(d)].size == s.datasets[static_cast<std::size_t>(pick)].size && d < pick);
      };
      for (DatasetId d : movable_first)
        if (loc[static_cast<std::size_t>(d)] == dc.id && !s.datasets[static_cast<std::size_t>(d)].is_private() && better(d))
          pick = d;
      if (pick < 0)
        for (std::size_t d = 0; d < loc.size(); ++d)
          if (loc[d] == dc.id && !s.datasets[d].is_private() && better(static_cast<DatasetId>(d)))
            pick = static_cast<DatasetId>(d);
      if (pick < 0)
        throw InfeasibleError("private datasets exceed the capacity of datacenter " + std::to_string(dc.id));
      const DcId cloud = s.cloud_of_region(dc.region);
      const Megabytes size = s.datasets[static_cast<std::size_t>(pick)].size;
      loc[static_cast<std::size_t>(pick)] = cloud;
      used[e] -= size;
      used[static_cast<std::size_t>(cloud)] += size;
      if (moves != nullptr) moves->push_back({pick, dc.id, cloud});
    }
  }
}

}  // namespace

PlacementMap decode(const Particle& p, const Scenario& scenario, const Encoding& encoding,
                    const PlacementMap& base) {
  check_positions(encoding.dimension(), p.positions, scenario.num_datacenters());
  PlacementMap out = base;
  for (const Dataset& ds : scenario.datasets)
    if (ds.is_private() && ds.initial() && !out.contains(ds.id)) out.place(ds.id, *ds.home);
  const auto dims = encoding.datasets();
  for (std::size_t k = 0; k < dims.size(); ++k) out.place(dims[k], p.positions[k]);
  return out;
}

PlacementMap decode(const Particle& p, const Scenario& scenario) {
  return decode(p, scenario, Encoding::build_time(scenario), initial_privates(scenario));
}

PlacementMap repair(PlacementMap p, const Scenario& scenario) {
  return repair_pending(std::move(p), scenario, {}, nullptr);
}

PlacementMap repair_pending(PlacementMap p, const Scenario& scenario, std::span<const DatasetId> movable_first,
                            std::vector<Relocation>* moves) {
  std::vector<DcId> loc(p.raw().begin(), p.raw().end());
  std::vector<Megabytes> used = storage_used(scenario, p);
  repair_raw(loc, used, scenario, movable_first, moves);
  PlacementMap out(loc.size());
  for (std::size_t d = 0; d < loc.size(); ++d)
    if (loc[d] != kNoDatacenter) out.place(static_cast<DatasetId>(d), loc[d]);
  return out;
}

struct BuildObjective::Workspace {
  struct Input {
    DatasetId dataset;
    Megabytes size;
  };
  // Tasks that read at least one initial dataset, with those inputs.
  std::vector<std::vector<Input>> task_inputs;
  std::vector<DcId> loc;
  std::vector<Megabytes> used;
  std::vector<Megabytes> base_used;
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;
};

BuildObjective::BuildObjective(const Scenario& scenario, FetchAccounting accounting)
    : scenario_(scenario),
      costs_(scenario),
      encoding_(Encoding::build_time(scenario)),
      accounting_(accounting),
      base_(initial_privates(scenario)),
      ws_(std::make_unique<Workspace>()) {
  for (const Task& t : scenario.tasks) {
    std::vector<Workspace::Input> inputs;
    for (DatasetId d : t.inputs) {
      const Dataset& ds = scenario.datasets[static_cast<std::size_t>(d)];
      if (ds.initial()) inputs.push_back({d, ds.size});
    }
    if (!inputs.empty()) ws_->task_inputs.push_back(std::move(inputs));
  }
  ws_->loc.assign(base_.raw().begin(), base_.raw().end());
  ws_->base_used = storage_used(scenario, base_);
  ws_->stamp.assign(scenario.datasets.size() * static_cast<std::size_t>(scenario.num_datacenters()), 0);
}

BuildObjective::~BuildObjective() = default;

PlacementMap BuildObjective::placement(std::span<const DcId> positions) const {
  Particle p{{positions.begin(), positions.end()}};
  return repair(decode(p, scenario_, encoding_, base_), scenario_);
}

Ticks BuildObjective::cost(std::span<const DcId> positions) {
  const int num_dc = costs_.num_datacenters();
  check_positions(encoding_.dimension(), positions, num_dc);
  Workspace& ws = *ws_;
  const auto dims = encoding_.datasets();
  ws.used = ws.base_used;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    ws.loc[static_cast<std::size_t>(dims[k])] = positions[k];
    ws.used[static_cast<std::size_t>(positions[k])] += scenario_.datasets[static_cast<std::size_t>(dims[k])].size;
  }
  repair_raw(ws.loc, ws.used, scenario_, {}, nullptr);

  if (++ws.epoch == 0) {
    std::fill(ws.stamp.begin(), ws.stamp.end(), 0);
    ws.epoch = 1;
  }
  Ticks total = 0;
  for (const auto& inputs : ws.task_inputs) {
    DcId best = 0;
    Ticks best_cost = std::numeric_limits<Ticks>::max();
    for (DcId dc = 0; dc < num_dc; ++dc) {
      Ticks c = 0;
      for (const auto& in : inputs) c += costs_.transfer(in.size, ws.loc[static_cast<std::size_t>(in.dataset)], dc);
      if (c < best_cost) {
        best_cost = c;
        best = dc;
      }
    }
    if (accounting_ == FetchAccounting::kPerTask) {
      total += best_cost;
      continue;
    }
    for (const auto& in : inputs) {
      const DcId from = ws.loc[static_cast<std::size_t>(in.dataset)];
      if (from == best) continue;
      std::uint32_t& mark = ws.stamp[static_cast<std::size_t>(in.dataset) * static_cast<std::size_t>(num_dc) +
                                     static_cast<std::size_t>(best)];
      if (mark == ws.epoch) continue;
      mark = ws.epoch;
      total += costs_.transfer(in.size, from, best);
    }
  }
  return total;
}

std::size_t CachedObjective::Hash::operator()(const std::vector<DcId>& v) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (DcId x : v) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(x));
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

Ticks CachedObjective::cost(std::span<const DcId> positions) {
  ++evaluations_;
  std::vector<DcId> key(positions.begin(), positions.end());
  const auto it = cache_.find(key);
  if (it != cache_.end()) {
    ++hits_;
    return it->second;
  }
  const Ticks c = inner_.cost(positions);
  cache_.emplace(std::move(key), c);
  return c;
}

Seconds fitness(const Particle& p, const Scenario& scenario) {
  BuildObjective objective(scenario);
  const CostModel costs(scenario);
  return costs.to_seconds(objective.cost(p.positions));
}

namespace {

std::uniform_real_distribution<double> unit_draw() { return std::uniform_real_distribution<double>(0.0, 1.0); }

void mutate_into(std::vector<DcId>& out, const std::vector<DcId>& x, const std::vector<DcId>& a,
                 const std::vector<DcId>& b, double F, Rng& rng) {
  auto unit = unit_draw();
  out = x;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (a[k] != b[k] && unit(rng) < F) out[k] = a[k];
}

void crossover_into(std::vector<DcId>& out, const std::vector<DcId>& x1, const std::vector<DcId>& x2, double prob,
                    Rng& rng) {
  auto unit = unit_draw();
  out.resize(x1.size());
  for (std::size_t k = 0; k < x1.size(); ++k) out[k] = unit(rng) < prob ? x1[k] : x2[k];
}

void require_same(const Particle& a, const Particle& b) {
  if (a.dimension() != b.dimension()) throw std::invalid_argument("particle dimension mismatch");
}

}  // namespace

Particle mutate(const Particle& x, const Particle& a, const Particle& b, double F, Rng& rng) {
  require_same(x, a);
  require_same(x, b);
  Particle out;
  mutate_into(out.positions, x.positions, a.positions, b.positions, F, rng);
  return out;
}

Particle crossover(const Particle& x1, const Particle& x2, double prob, Rng& rng) {
  require_same(x1, x2);
  Particle out;
  crossover_into(out.positions, x1.positions, x2.positions, prob, rng);
  return out;
}

Particle select_next(const Particle& candidate, const Particle& previous, const Seconds& gbest_fitness,
                     const Scenario& scenario) {
  return fitness(candidate, scenario) < gbest_fitness ? candidate : previous;
}

SearchResult search(PlacementObjective& objective, Metaheuristic kind, const OptimizerConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);
  const std::size_t dim = objective.dimension();
  const int num_dc = objective.num_datacenters();
  std::uniform_int_distribution<DcId> any_dc(0, num_dc - 1);
  auto unit = unit_draw();
  SearchResult result;

  auto random_particle = [&] {
    std::vector<DcId> v(dim);
    for (DcId& x : v) x = any_dc(rng);
    return v;
  };

  if (kind == Metaheuristic::kRandom || dim == 0) {
    result.best.positions = random_particle();
    result.cost = objective.cost(result.best.positions);
    result.history.push_back(result.cost);
    return result;
  }

  const auto n = static_cast<std::size_t>(cfg.n);
  std::vector<std::vector<DcId>> x(n);
  std::vector<Ticks> fit(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = random_particle();
    fit[i] = objective.cost(x[i]);
  }
  std::vector<std::vector<DcId>> pbest = x;
  std::vector<Ticks> pbest_fit = fit;
  std::size_t g = static_cast<std::size_t>(std::min_element(fit.begin(), fit.end()) - fit.begin());
  std::vector<DcId> gbest = x[g];
  Ticks gbest_fit = fit[g];
  result.history.push_back(gbest_fit);

  const bool use_mutation = kind == Metaheuristic::kDeDpso || kind == Metaheuristic::kDe;
  const bool use_crossover = kind != Metaheuristic::kDe;
  std::vector<std::vector<DcId>> snapshot;
  std::vector<DcId> u, v, w;
  for (int iter = 0; iter < cfg.itermax; ++iter) {
    snapshot = x;
    for (std::size_t i = 0; i < n; ++i) {
      if (use_mutation && n >= 2) {
        const std::size_t a = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
        std::size_t b = std::uniform_int_distribution<std::size_t>(0, n - 2)(rng);
        if (b >= a) ++b;
        mutate_into(u, x[i], snapshot[a], snapshot[b], cfg.F, rng);
      } else {
        u = x[i];
      }
      if (use_crossover) {
        crossover_into(v, pbest[i], u, cfg.cr_p, rng);
        crossover_into(w, gbest, v, cfg.cr_g, rng);
      } else {
        w = u;
      }
      if (kind == Metaheuristic::kGaDpso)
        for (DcId& pos : w)
          if (unit(rng) < cfg.F) pos = any_dc(rng);

      const Ticks fw = objective.cost(w);
      const Ticks bar = cfg.selection == Selection::kAgainstGbest ? gbest_fit : fit[i];
      if (fw < bar) {
        x[i] = w;
        fit[i] = fw;
      }
      if (fit[i] < pbest_fit[i]) {
        pbest[i] = x[i];
        pbest_fit[i] = fit[i];
      }
      if (fit[i] < gbest_fit) {
        gbest = x[i];
        gbest_fit = fit[i];
      }
    }
    result.history.push_back(gbest_fit);
  }
  result.best.positions = std::move(gbest);
  result.cost = gbest_fit;
  return result;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

BuildResult run_baseline(Metaheuristic kind, const Scenario& scenario, const OptimizerConfig& cfg) {
  BuildObjective objective(scenario, cfg.accounting);
  CachedObjective cached(objective);
  const SearchResult found = search(cached, kind, cfg);
  const CostModel costs(scenario);
  return {objective.placement(found.best.positions), costs.to_seconds(found.cost)};
}

BuildResult run_de_dpso(const Scenario& scenario, const OptimizerConfig& cfg) {
  return run_baseline(Metaheuristic::kDeDpso, scenario, cfg);
}

}  // namespace dplace
