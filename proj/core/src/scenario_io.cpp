#include "dplace/scenario_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dplace {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ScenarioError(path + ": " + what);
}

const json& member(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path.empty() ? key : path + "." + key, "missing required key");
  return *it;
}

const json* optional_member(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<std::int64_t>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

std::vector<std::int32_t> id_list(const json& v, const std::string& path) {
  std::vector<std::int32_t> out;
  const json& arr = as_array(v, path);
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(static_cast<std::int32_t>(as_int(arr[i], path + "[" + std::to_string(i) + "]")));
  return out;
}

std::string join(const std::string& path, const char* key) { return path + "." + key; }
std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

void parse_datacenters(const json& doc, Scenario& s) {
  const json& arr = as_array(member(doc, "", "datacenters"), "datacenters");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = index("datacenters", i);
    const json& item = arr[i];
    Datacenter dc;
    dc.id = static_cast<DcId>(as_int(member(item, path, "id"), join(path, "id")));
    const json& kind = member(item, path, "kind");
    if (kind == "cloud") {
      dc.kind = DcKind::kCloud;
    } else if (kind == "edge") {
      dc.kind = DcKind::kEdge;
    } else {
      fail(join(path, "kind"), "expected \"cloud\" or \"edge\"");
    }
    dc.region = static_cast<int>(as_int(member(item, path, "region"), join(path, "region")));
    if (const json* cap = optional_member(item, "capacity_mb")) dc.capacity = as_int(*cap, join(path, "capacity_mb"));
    s.datacenters.push_back(dc);
  }
}

void parse_bandwidth(const json& doc, Scenario& s) {
  const json& rows = as_array(member(doc, "", "bandwidth"), "bandwidth");
  const int n = s.num_datacenters();
  if (static_cast<int>(rows.size()) != n) fail("bandwidth", "expected one row per datacenter");
  s.bandwidth = BandwidthTable(n);
  for (int i = 0; i < n; ++i) {
    const std::string row_path = index("bandwidth", static_cast<std::size_t>(i));
    const json& row = as_array(rows[static_cast<std::size_t>(i)], row_path);
    if (static_cast<int>(row.size()) != n) fail(row_path, "expected one entry per datacenter");
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const std::int64_t v = as_int(row[static_cast<std::size_t>(j)], index(row_path, static_cast<std::size_t>(j)));
      if (v <= 0) fail(index(row_path, static_cast<std::size_t>(j)), "bandwidth must be positive");
      if (j < i && v != s.bandwidth.raw(j, i)) fail(index(row_path, static_cast<std::size_t>(j)), "bandwidth matrix must be symmetric");
      if (j > i) s.bandwidth.set(i, j, v);
    }
  }
}

void parse_workflows(const json& doc, Scenario& s) {
  const json& arr = as_array(member(doc, "", "workflows"), "workflows");
  std::size_t total = 0;
  for (std::size_t w = 0; w < arr.size(); ++w)
    total += as_array(member(arr[w], index("workflows", w), "tasks"), join(index("workflows", w), "tasks")).size();
  s.tasks.assign(total, Task{});
  std::vector<bool> seen(total, false);
  for (std::size_t w = 0; w < arr.size(); ++w) {
    const std::string path = index("workflows", w);
    Workflow wf;
    wf.id = static_cast<WorkflowId>(as_int(member(arr[w], path, "id"), join(path, "id")));
    const json& tasks = member(arr[w], path, "tasks");
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      const std::string tpath = index(join(path, "tasks"), t);
      Task task;
      task.id = static_cast<TaskId>(as_int(member(tasks[t], tpath, "id"), join(tpath, "id")));
      if (task.id < 0 || static_cast<std::size_t>(task.id) >= total || seen[static_cast<std::size_t>(task.id)])
        fail(join(tpath, "id"), "task ids must be unique and dense");
      seen[static_cast<std::size_t>(task.id)] = true;
      task.workflow = wf.id;
      task.inputs = id_list(member(tasks[t], tpath, "inputs"), join(tpath, "inputs"));
      task.outputs = id_list(member(tasks[t], tpath, "outputs"), join(tpath, "outputs"));
      wf.tasks.push_back(task.id);
      s.tasks[static_cast<std::size_t>(task.id)] = std::move(task);
    }
    if (const json* edges = optional_member(arr[w], "edges")) {
      const json& list = as_array(*edges, join(path, "edges"));
      for (std::size_t e = 0; e < list.size(); ++e) {
        const std::vector<std::int32_t> pair = id_list(list[e], index(join(path, "edges"), e));
        if (pair.size() != 2) fail(index(join(path, "edges"), e), "expected a [from, to] pair");
        wf.edges.emplace_back(pair[0], pair[1]);
      }
    }
    s.workflows.push_back(std::move(wf));
  }
}

void parse_datasets(const json& doc, Scenario& s) {
  const json& arr = as_array(member(doc, "", "datasets"), "datasets");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = index("datasets", i);
    const json& item = arr[i];
    Dataset ds;
    ds.id = static_cast<DatasetId>(as_int(member(item, path, "id"), join(path, "id")));
    if (const json* mb = optional_member(item, "size_mb")) {
      ds.size = as_int(*mb, join(path, "size_mb"));
    } else if (const json* gb = optional_member(item, "size_gb")) {
      if (!gb->is_number()) fail(join(path, "size_gb"), "expected a number");
      ds.size = gigabytes_to_mb(gb->get<double>());
    } else {
      fail(join(path, "size_mb"), "missing required key");
    }
    const json& privacy = member(item, path, "privacy");
    if (privacy == "public") {
      ds.privacy = Privacy::kPublic;
    } else if (privacy == "private") {
      ds.privacy = Privacy::kPrivate;
    } else {
      fail(join(path, "privacy"), "expected \"public\" or \"private\"");
    }
    if (const json* home = optional_member(item, "home")) ds.home = static_cast<DcId>(as_int(*home, join(path, "home")));
    if (const json* p = optional_member(item, "producers")) ds.producers = id_list(*p, join(path, "producers"));
    if (const json* c = optional_member(item, "consumers")) ds.consumers = id_list(*c, join(path, "consumers"));
    s.datasets.push_back(std::move(ds));
  }

  // Producer and consumer lists default to what the task table implies.
  const bool derive_producers = std::none_of(arr.begin(), arr.end(), [](const json& d) { return d.contains("producers"); });
  const bool derive_consumers = std::none_of(arr.begin(), arr.end(), [](const json& d) { return d.contains("consumers"); });
  const auto in_range = [&](DatasetId d) { return d >= 0 && d < s.num_datasets(); };
  for (const Task& t : s.tasks) {
    if (derive_producers)
      for (DatasetId d : t.outputs)
        if (in_range(d)) s.datasets[static_cast<std::size_t>(d)].producers.push_back(t.id);
    if (derive_consumers)
      for (DatasetId d : t.inputs)
        if (in_range(d)) s.datasets[static_cast<std::size_t>(d)].consumers.push_back(t.id);
  }
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Dataset& ds = s.datasets[i];
    if (const json* shared = optional_member(arr[i], "shared")) {
      if (!shared->is_boolean()) fail(join(index("datasets", i), "shared"), "expected a boolean");
      ds.shared = shared->get<bool>();
    } else {
      std::vector<WorkflowId> owners;
      for (TaskId t : ds.consumers)
        if (t >= 0 && static_cast<std::size_t>(t) < s.tasks.size()) owners.push_back(s.tasks[static_cast<std::size_t>(t)].workflow);
      std::sort(owners.begin(), owners.end());
      ds.shared = std::unique(owners.begin(), owners.end()) - owners.begin() >= 2;
    }
  }
}

void parse_events(const json& doc, Scenario& s) {
  const json* events = optional_member(doc, "events");
  if (events == nullptr) return;
  const json& arr = as_array(*events, "events");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = index("events", i);
    SlotEvent ev;
    ev.slot = static_cast<int>(as_int(member(arr[i], path, "slot"), join(path, "slot")));
    if (const json* a = optional_member(arr[i], "arrivals")) ev.arrivals = id_list(*a, join(path, "arrivals"));
    if (const json* d = optional_member(arr[i], "departures")) ev.departures = id_list(*d, join(path, "departures"));
    s.events.push_back(std::move(ev));
  }
}

}  // namespace

Megabytes gigabytes_to_mb(double gb) { return static_cast<Megabytes>(std::llround(gb * 1024.0)); }

Scenario scenario_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("<document>: ") + e.what());
  }
  if (!doc.is_object()) fail("<document>", "expected an object");
  Scenario s;
  s.regions = static_cast<int>(as_int(member(doc, "", "regions"), "regions"));
  parse_datacenters(doc, s);
  parse_bandwidth(doc, s);
  parse_workflows(doc, s);
  parse_datasets(doc, s);
  parse_events(doc, s);

  const std::vector<Violation> violations = validate_scenario(s);
  if (!violations.empty()) {
    std::string msg = "invalid scenario:";
    for (std::size_t i = 0; i < violations.size() && i < 5; ++i)
      msg += " [" + violations[i].code + "] " + violations[i].message + ";";
    if (violations.size() > 5) msg += " and " + std::to_string(violations.size() - 5) + " more";
    throw ScenarioError(msg);
  }
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json doc;
  doc["regions"] = s.regions;
  json dcs = json::array();
  for (const Datacenter& dc : s.datacenters) {
    json item{{"id", dc.id}, {"kind", dc.is_cloud() ? "cloud" : "edge"}, {"region", dc.region}};
    if (dc.capacity) item["capacity_mb"] = *dc.capacity;
    dcs.push_back(std::move(item));
  }
  doc["datacenters"] = std::move(dcs);
  json band = json::array();
  for (DcId i = 0; i < s.bandwidth.size(); ++i) {
    json row = json::array();
    for (DcId j = 0; j < s.bandwidth.size(); ++j) row.push_back(i == j ? 0 : s.bandwidth.raw(i, j));
    band.push_back(std::move(row));
  }
  doc["bandwidth"] = std::move(band);
  json wfs = json::array();
  for (const Workflow& wf : s.workflows) {
    json tasks = json::array();
    for (TaskId t : wf.tasks) {
      const Task& task = s.tasks.at(static_cast<std::size_t>(t));
      tasks.push_back({{"id", task.id}, {"inputs", task.inputs}, {"outputs", task.outputs}});
    }
    json edges = json::array();
    for (const auto& [a, b] : wf.edges) edges.push_back({a, b});
    wfs.push_back({{"id", wf.id}, {"tasks", std::move(tasks)}, {"edges", std::move(edges)}});
  }
  doc["workflows"] = std::move(wfs);
  json dss = json::array();
  for (const Dataset& ds : s.datasets) {
    json item{{"id", ds.id},
              {"size_mb", ds.size},
              {"privacy", ds.is_private() ? "private" : "public"},
              {"shared", ds.shared},
              {"producers", ds.producers},
              {"consumers", ds.consumers}};
    if (ds.home) item["home"] = *ds.home;
    dss.push_back(std::move(item));
  }
  doc["datasets"] = std::move(dss);
  json events = json::array();
  for (const SlotEvent& ev : s.events)
    events.push_back({{"slot", ev.slot}, {"arrivals", ev.arrivals}, {"departures", ev.departures}});
  doc["events"] = std::move(events);
  return doc.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write scenario file " + path.string());
  out << scenario_to_json(scenario);
  if (!out) throw std::runtime_error("failed writing scenario file " + path.string());
}

}  // namespace dplace
