#pragma once

// JSON scenario files. Sizes are integer MB (`size_mb`); `size_gb` is also
// accepted on input and rounded to the nearest MB with 1 GB = 1024 MB.
// Saving always writes the canonical form, so save(load(save(s))) is
// byte-identical to save(s).

#include <filesystem>
#include <string>
#include <string_view>

#include "dplace/model.hpp"

namespace dplace {

// Malformed documents raise ScenarioError whose message starts with the
// offending key path, e.g. "datasets[3].size_mb: expected an integer".
// Documents that parse but break model invariants raise ScenarioError listing
// the violation codes.
Scenario scenario_from_json(std::string_view text);
std::string scenario_to_json(const Scenario& scenario);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

Megabytes gigabytes_to_mb(double gb);

}  // namespace dplace
