#include "dplace/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <type_traits>
#include <algorithm>
#include <sstream>

#include "json.hpp"

namespace dplace {

std::string_view to_string(SweepKind k) {
  switch (k) {
    case SweepKind::kNone: return "none";
    case SweepKind::kBandwidth: return "bandwidth_multiplier";
    case SweepKind::kEdgeCapacity: return "edge_capacity";
    case SweepKind::kEdgeCount: return "edge_count";
    case SweepKind::kSharing: return "sharing";
  }
  return "unknown";
}

SweepKind parse_sweep_kind(std::string_view name) {
  for (SweepKind k : {SweepKind::kNone, SweepKind::kBandwidth, SweepKind::kEdgeCapacity, SweepKind::kEdgeCount,
                      SweepKind::kSharing})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown sweep kind '" + std::string(name) + "'");
}

std::vector<double> default_sweep_values(SweepKind k) {
  switch (k) {
    case SweepKind::kBandwidth: return {0.5, 0.8, 1.5, 3, 5};
    case SweepKind::kEdgeCapacity: return {153600, 204800, 256000, 307200, 358400};
    case SweepKind::kEdgeCount: return {3, 4, 5};
    case SweepKind::kSharing: return {1, 0};
    case SweepKind::kNone: break;
  }
  return {0};
}

GeneratorConfig apply_sweep(GeneratorConfig cfg, SweepKind k, double value) {
  switch (k) {
    case SweepKind::kBandwidth: cfg.bandwidth_multiplier = value; break;
    case SweepKind::kEdgeCapacity: cfg.edge_capacity = static_cast<Megabytes>(std::llround(value)); break;
    case SweepKind::kEdgeCount: cfg.edges_per_region = static_cast<int>(std::lround(value)); break;
    case SweepKind::kSharing: cfg.sharing_enabled = value != 0; break;
    case SweepKind::kNone: break;
  }
  return cfg;
}

void check_plan(const ExperimentPlan& plan) {
  if (plan.strategies.empty()) throw std::invalid_argument("plan needs at least one strategy");
  if (plan.repeats < 1) throw std::invalid_argument("plan repeats must be at least 1");
  if (plan.values.empty()) throw std::invalid_argument("plan needs at least one sweep value");
  check_config(plan.base);
  check_config(plan.run.build);
  check_config(plan.run.runtime);
  for (double v : plan.values) check_config(apply_sweep(plan.base, plan.sweep, v));
}

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj.is_object()) throw std::invalid_argument(path_ + ": expected an object");
  }
  ~Reader() = default;

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw std::invalid_argument("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!it->is_number_integer()) throw std::invalid_argument("expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (it->template get<std::int64_t>() < 0) throw std::invalid_argument("expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) throw std::invalid_argument("expected a number");
      }
      out = it->template get<T>();
    } catch (const std::exception& e) {
      throw std::invalid_argument(path_ + "." + key + ": " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw std::invalid_argument(path_ + "." + it.key() + ": unknown key");
  }

  const std::string& path() const { return path_; }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_generator(const json& obj, const std::string& path, GeneratorConfig& g) {
  Reader r(obj, path);
  r.get("regions", g.regions);
  r.get("edges_per_region", g.edges_per_region);
  r.get("edge_capacity", g.edge_capacity);
  r.get("bandwidth_multiplier", g.bandwidth_multiplier);
  r.get("workflows", g.workflows);
  r.get("min_width", g.min_width);
  r.get("max_width", g.max_width);
  r.get("min_dataset_size", g.min_dataset_size);
  r.get("max_dataset_size", g.max_dataset_size);
  r.get("private_fraction", g.private_fraction);
  r.get("shared_fraction", g.shared_fraction);
  r.get("sharing_enabled", g.sharing_enabled);
  r.get("arrival_spread", g.arrival_spread);
  r.get("seed", g.seed);
  r.finish();
}

void read_optimizer(const json& obj, const std::string& path, OptimizerConfig& o) {
  Reader r(obj, path);
  r.get("n", o.n);
  r.get("itermax", o.itermax);
  r.get("F", o.F);
  r.get("cr_p", o.cr_p);
  r.get("cr_g", o.cr_g);
  r.get("seed", o.seed);
  if (const json* sel = r.child("selection")) {
    if (*sel == "gbest") {
      o.selection = Selection::kAgainstGbest;
    } else if (*sel == "previous") {
      o.selection = Selection::kAgainstPrevious;
    } else {
      throw std::invalid_argument(path + ".selection: expected \"gbest\" or \"previous\"");
    }
  }
  r.finish();
}

void read_rl(const json& obj, const std::string& path, ExperimentPlan& plan) {
  Reader r(obj, path);
  TrainConfig& t = plan.train;
  r.get("episodes", t.episodes);
  r.get("maxstep", t.maxstep);
  r.get("hidden", t.hidden);
  r.get("gamma", t.gamma);
  r.get("tau", t.tau);
  r.get("lr_actor", t.lr_actor);
  r.get("lr_critic", t.lr_critic);
  r.get("buffer", t.buffer);
  r.get("batch", t.batch);
  r.get("noise_start", t.noise_start);
  r.get("noise_end", t.noise_end);
  r.get("time_scale", t.time_scale);
  r.get("seed", t.seed);
  r.get("eval_maxstep", plan.rl_maxstep);
  if (const json* th = r.child("threshold")) {
    if (*th == "min_t") {
      t.threshold = ThresholdMode::kMinT;
    } else if (*th == "running_average") {
      t.threshold = ThresholdMode::kRunningAverage;
    } else {
      throw std::invalid_argument(path + ".threshold: expected \"min_t\" or \"running_average\"");
    }
  }
  r.finish();
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
}

}  // namespace

ExperimentPlan parse_plan(std::string_view text) {
  const json doc = parse_document(text);
  ExperimentPlan plan;
  Reader r(doc, "plan");
  if (const json* g = r.child("generator")) read_generator(*g, "plan.generator", plan.base);
  if (const json* s = r.child("sweep")) {
    Reader sr(*s, "plan.sweep");
    std::string kind = "none";
    sr.get("kind", kind);
    plan.sweep = parse_sweep_kind(kind);
    plan.values = default_sweep_values(plan.sweep);
    sr.get("values", plan.values);
    sr.finish();
  }
  if (const json* st = r.child("strategies")) {
    if (!st->is_array()) throw std::invalid_argument("plan.strategies: expected an array");
    plan.strategies.clear();
    for (const json& item : *st) {
      if (!item.is_string()) throw std::invalid_argument("plan.strategies: expected strategy names");
      plan.strategies.push_back(parse_strategy(item.get<std::string>()));
    }
  }
  r.get("repeats", plan.repeats);
  r.get("seed", plan.seed);
  if (const json* o = r.child("optimizer")) read_optimizer(*o, "plan.optimizer", plan.run.build);
  if (const json* o = r.child("runtime_optimizer")) read_optimizer(*o, "plan.runtime_optimizer", plan.run.runtime);
  if (const json* rl = r.child("rl")) read_rl(*rl, "plan.rl", plan);
  if (const json* acc = r.child("accounting")) {
    if (*acc == "once_per_destination") {
      plan.run.accounting = FetchAccounting::kOncePerDestination;
    } else if (*acc == "per_task") {
      plan.run.accounting = FetchAccounting::kPerTask;
    } else {
      throw std::invalid_argument("plan.accounting: expected \"once_per_destination\" or \"per_task\"");
    }
  }
  r.finish();
  check_plan(plan);
  return plan;
}

GeneratorConfig parse_generator_config(std::string_view text) {
  const json doc = parse_document(text);
  if (doc.is_object() && doc.contains("generator")) return parse_plan(text).base;
  GeneratorConfig cfg;
  read_generator(doc, "generator", cfg);
  check_config(cfg);
  return cfg;
}

Scenario plan_instance(const ExperimentPlan& plan, double sweep_value, int repeat) {
  GeneratorConfig cfg = apply_sweep(plan.base, plan.sweep, sweep_value);
  cfg.seed = mix_seed(plan.seed, static_cast<std::uint64_t>(repeat));
  return generate_scenario(cfg);
}

Scenario plan_training_instance(const ExperimentPlan& plan, double sweep_value) {
  GeneratorConfig cfg = apply_sweep(plan.base, plan.sweep, sweep_value);
  cfg.seed = mix_seed(plan.seed, 0xC0FFEEULL);
  return generate_scenario(cfg);
}

std::uint64_t plan_run_seed(const ExperimentPlan& plan, int repeat) {
  return mix_seed(plan.seed ^ 0x5EED5EEDULL, static_cast<std::uint64_t>(repeat));
}

RlPolicy train_policy(const ExperimentPlan& plan, const Scenario& training, std::size_t max_datasets) {
  OptimizerConfig build_cfg = plan.run.build;
  build_cfg.seed = mix_seed(plan.seed, 0xB1D);
  build_cfg.accounting = plan.run.accounting;
  const BuildResult build = place_build_time(training, Metaheuristic::kDeDpso, build_cfg);
  StateLayout layout{training.num_datacenters(), static_cast<int>(max_datasets)};
  SimulationEnv env(training, build.placement, layout, plan.run.accounting);
  TrainConfig tc = plan.train;
  tc.seed = mix_seed(plan.train.seed, plan.seed);
  TrainResult trained = train(env, tc);
  return RlPolicy{layout, std::move(trained.params.actor), plan.rl_maxstep};
}

ResultTable run_plan(const ExperimentPlan& plan) {
  check_plan(plan);
  ResultTable table;
  const bool needs_rl = std::find(plan.strategies.begin(), plan.strategies.end(), Strategy::kDymRl) != plan.strategies.end();
  // One policy per scenario shape: sweeps over bandwidth or capacity keep
  // the shape, so their points share the policy trained at the first one.
  std::optional<RlPolicy> policy;
  std::string rl_error;
  std::vector<long long> trained_shape;
  for (double value : plan.values) {
    std::vector<Scenario> instances;
    instances.reserve(static_cast<std::size_t>(plan.repeats));
    for (int r = 0; r < plan.repeats; ++r) instances.push_back(plan_instance(plan, value, r));
    if (needs_rl) {
      const GeneratorConfig g = apply_sweep(plan.base, plan.sweep, value);
      const Scenario training = plan_training_instance(plan, value);
      std::size_t max_ds = static_cast<std::size_t>(training.num_datasets());
      for (const Scenario& s : instances) max_ds = std::max(max_ds, static_cast<std::size_t>(s.num_datasets()));
      const std::vector<long long> shape{g.regions, g.edges_per_region, g.workflows, g.sharing_enabled,
                                         static_cast<long long>(max_ds)};
      if (shape != trained_shape) {
        trained_shape = shape;
        policy.reset();
        rl_error.clear();
        try {
          policy = train_policy(plan, training, max_ds);
        } catch (const std::exception& e) {
          rl_error = e.what();
        }
      }
    }
    for (Strategy strategy : plan.strategies) {
      CellResult cell;
      cell.sweep_value = value;
      cell.strategy = strategy;
      std::vector<double> avgs;
      std::vector<double> totals;
      std::vector<RunLogRow> rows;
      try {
        if (strategy == Strategy::kDymRl && !policy) throw std::runtime_error("training failed: " + rl_error);
        for (int r = 0; r < plan.repeats; ++r) {
          const std::uint64_t seed = plan_run_seed(plan, r);
          const RunSummary sum = run_strategy(instances[static_cast<std::size_t>(r)], strategy, plan.run, seed,
                                              policy ? &*policy : nullptr);
          avgs.push_back(sum.avg_slot_time);
          totals.push_back(sum.total.to_double());
          rows.push_back({value, strategy, r, seed, static_cast<int>(sum.slots.size()), sum.build_time.to_double(),
                          sum.runtime_total.to_double(), sum.avg_slot_time, sum.total.to_double(),
                          sum.violations.total()});
          table.violations += sum.violations;
        }
        const double n = static_cast<double>(avgs.size());
        double mean = 0;
        double mean_total = 0;
        for (std::size_t i = 0; i < avgs.size(); ++i) {
          mean += avgs[i];
          mean_total += totals[i];
        }
        mean /= n;
        mean_total /= n;
        double ss = 0;
        for (double a : avgs) ss += (a - mean) * (a - mean);
        cell.mean_avg_time = mean;
        cell.mean_total = mean_total;
        cell.sd = avgs.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        cell.repeats = static_cast<int>(avgs.size());
        table.runs.insert(table.runs.end(), rows.begin(), rows.end());
      } catch (const std::exception& e) {
        cell.mean_avg_time = std::nan("");
        cell.sd = std::nan("");
        cell.mean_total = std::nan("");
        cell.repeats = 0;
        cell.error = e.what();
      }
      table.cells.push_back(cell);
    }
  }
  return table;
}

std::vector<SavingRow> summarize_saving(const std::vector<CellResult>& cells, Strategy reference) {
  std::vector<SavingRow> out;
  for (const CellResult& c : cells) {
    const CellResult* ref = nullptr;
    for (const CellResult& r : cells)
      if (r.strategy == reference && r.sweep_value == c.sweep_value) ref = &r;
    if (ref == nullptr)
      throw std::invalid_argument("reference strategy " + std::string(to_string(reference)) + " missing from the table");
    out.push_back({c.sweep_value, c.strategy, saving_percent(ref->mean_avg_time, c.mean_avg_time)});
  }
  return out;
}

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string sweep_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

void emit_csv(std::ostream& out, const std::vector<CellResult>& cells) {
  out << "sweep_value,strategy,mean_avg_time_s,sd,mean_total_s,repeats\n";
  for (const CellResult& c : cells)
    out << sweep_number(c.sweep_value) << ',' << to_string(c.strategy) << ',' << number(c.mean_avg_time) << ','
        << number(c.sd) << ',' << number(c.mean_total) << ',' << c.repeats << '\n';
}

std::vector<CellResult> read_result_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "sweep_value,strategy,mean_avg_time_s,sd,mean_total_s,repeats")
    throw std::invalid_argument("result CSV: unexpected header");
  std::vector<CellResult> cells;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 6) throw std::invalid_argument("result CSV line " + std::to_string(lineno) + ": expected 6 fields");
    try {
      CellResult c;
      c.sweep_value = std::stod(f[0]);
      c.strategy = parse_strategy(f[1]);
      c.mean_avg_time = std::stod(f[2]);
      c.sd = std::stod(f[3]);
      c.mean_total = std::stod(f[4]);
      c.repeats = std::stoi(f[5]);
      cells.push_back(c);
    } catch (const std::exception& e) {
      throw std::invalid_argument("result CSV line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cells;
}

void write_run_log(std::ostream& out, const std::vector<RunLogRow>& runs) {
  out << "sweep_value,strategy,repeat,seed,slots,build_time_s,runtime_total_s,avg_slot_time_s,total_s,violations\n";
  for (const RunLogRow& r : runs)
    out << sweep_number(r.sweep_value) << ',' << to_string(r.strategy) << ',' << r.repeat << ',' << r.seed << ','
        << r.slots << ',' << number(r.build_time) << ',' << number(r.runtime_total) << ',' << number(r.avg_slot_time)
        << ',' << number(r.total) << ',' << r.violations << '\n';
}

void write_saving_csv(std::ostream& out, const std::vector<SavingRow>& rows) {
  out << "sweep_value,strategy,saving_pct\n";
  for (const SavingRow& r : rows)
    out << sweep_number(r.sweep_value) << ',' << to_string(r.strategy) << ',' << number(r.saving_pct) << '\n';
}

}  // namespace dplace
