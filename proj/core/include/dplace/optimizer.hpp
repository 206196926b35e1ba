#pragma once

// Discrete particle encoding of placements and the DE-DPSO build-time
// search together with its baseline variants.

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dplace/model.hpp"

namespace dplace {

using Rng = std::mt19937_64;

struct Particle {
  std::vector<DcId> positions;

  std::size_t dimension() const { return positions.size(); }
  friend bool operator==(const Particle&, const Particle&) = default;
};

enum class Metaheuristic { kDeDpso, kDe, kDpso, kGaDpso, kRandom };

std::string_view to_string(Metaheuristic m);
// Accepts "de_dpso", "de", "dpso", "ga_dpso", "random".
Metaheuristic parse_metaheuristic(std::string_view name);

enum class Selection {
  kAgainstGbest,     // candidate replaces the particle iff it beats gbest
  kAgainstPrevious,  // candidate replaces the particle iff it beats the particle
};

struct OptimizerConfig {
  int n = 100;
  int itermax = 2000;
  double F = 0.15;
  double cr_p = 0.1;
  double cr_g = 0.1;
  std::uint64_t seed = 1;
  Selection selection = Selection::kAgainstGbest;
  FetchAccounting accounting = FetchAccounting::kOncePerDestination;
};

void check_config(const OptimizerConfig& cfg);

// Canonical ordering of the public datasets of a placement problem: shared
// datasets first, then unshared ones, each group by ascending id.
class Encoding {
 public:
  Encoding(const Scenario& scenario, std::span<const DatasetId> datasets);
  // All public initial datasets of the scenario.
  static Encoding build_time(const Scenario& scenario);

  std::size_t dimension() const { return dims_.size(); }
  std::span<const DatasetId> datasets() const { return dims_; }

 private:
  std::vector<DatasetId> dims_;
};

// Writes the particle into a copy of `base`: dimension k places
// encoding.datasets()[k]. Private datasets of the scenario that `base` does
// not place yet go to their homes. No repair happens here.
PlacementMap decode(const Particle& p, const Scenario& scenario, const Encoding& encoding,
                    const PlacementMap& base);
// Build-time decode onto an empty placement holding only initial datasets.
PlacementMap decode(const Particle& p, const Scenario& scenario);

// While an edge datacenter is over capacity, moves its largest public dataset
// (ties to the lowest id) to the cloud of its region. Throws InfeasibleError
// when private datasets alone overflow an edge.
PlacementMap repair(PlacementMap p, const Scenario& scenario);

struct Relocation {
  DatasetId dataset = 0;
  DcId from = 0;
  DcId to = 0;
};

// Runtime repair: datasets in `movable_first` are evicted to the cloud before
// any other public dataset. Every move is appended to `moves`.
PlacementMap repair_pending(PlacementMap p, const Scenario& scenario,
                            std::span<const DatasetId> movable_first, std::vector<Relocation>* moves);

// A minimisation problem over particles. cost() must be a pure function of
// the positions.
class PlacementObjective {
 public:
  virtual ~PlacementObjective() = default;
  virtual std::size_t dimension() const = 0;
  virtual int num_datacenters() const = 0;
  virtual Ticks cost(std::span<const DcId> positions) = 0;
  virtual Ticks ticks_per_second() const = 0;
};

// Build-stage transfer time of the repaired decoded placement.
class BuildObjective final : public PlacementObjective {
 public:
  explicit BuildObjective(const Scenario& scenario,
                          FetchAccounting accounting = FetchAccounting::kOncePerDestination);
  ~BuildObjective() override;

  std::size_t dimension() const override { return encoding_.dimension(); }
  int num_datacenters() const override { return scenario_.num_datacenters(); }
  Ticks cost(std::span<const DcId> positions) override;
  Ticks ticks_per_second() const override { return costs_.ticks_per_second(); }

  const Encoding& encoding() const { return encoding_; }
  PlacementMap placement(std::span<const DcId> positions) const;

 private:
  struct Workspace;
  const Scenario& scenario_;
  CostModel costs_;
  Encoding encoding_;
  FetchAccounting accounting_;
  PlacementMap base_;
  std::unique_ptr<Workspace> ws_;
};

// Memoising wrapper keyed by the positions vector.
class CachedObjective final : public PlacementObjective {
 public:
  explicit CachedObjective(PlacementObjective& inner) : inner_(inner) {}

  std::size_t dimension() const override { return inner_.dimension(); }
  int num_datacenters() const override { return inner_.num_datacenters(); }
  Ticks cost(std::span<const DcId> positions) override;
  Ticks ticks_per_second() const override { return inner_.ticks_per_second(); }

  std::size_t evaluations() const { return evaluations_; }
  std::size_t hits() const { return hits_; }

 private:
  struct Hash {
    std::size_t operator()(const std::vector<DcId>& v) const noexcept;
  };
  PlacementObjective& inner_;
  std::unordered_map<std::vector<DcId>, Ticks, Hash> cache_;
  std::size_t evaluations_ = 0;
  std::size_t hits_ = 0;
};

Seconds fitness(const Particle& p, const Scenario& scenario);

// Per dimension: where a and b differ, the output takes a[k] with
// probability F; elsewhere it keeps x[k].
Particle mutate(const Particle& x, const Particle& a, const Particle& b, double F, Rng& rng);
// Per dimension: output[k] = x1[k] if r < prob else x2[k], r uniform in [0, 1).
Particle crossover(const Particle& x1, const Particle& x2, double prob, Rng& rng);
Particle select_next(const Particle& candidate, const Particle& previous, const Seconds& gbest_fitness,
                     const Scenario& scenario);

struct SearchResult {
  Particle best;
  Ticks cost = 0;
  // gbest cost after initialisation and after every iteration.
  std::vector<Ticks> history;
};

SearchResult search(PlacementObjective& objective, Metaheuristic kind, const OptimizerConfig& cfg);

struct BuildResult {
  PlacementMap placement;
  Seconds time;
};

// Deterministic derivation of independent child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

BuildResult run_de_dpso(const Scenario& scenario, const OptimizerConfig& cfg);
BuildResult run_baseline(Metaheuristic kind, const Scenario& scenario, const OptimizerConfig& cfg);

}  // namespace dplace
