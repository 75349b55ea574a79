#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "scanreg/region_table.hpp"

namespace scanreg {

enum class Approach { population, expectation };

/// Planted hot/cold scenario with Gaussian outcomes:
///   population:  y_i ~ N(alpha_pop + theta_i, sigma)
///   expectation: y_i ~ N(theta_i, sigma)
/// theta_i is theta_hot inside hot_zone, theta_cold inside cold_zone, 0 elsewhere.
/// sigma is the standard deviation.
struct ScenarioSpec {
  Approach mode = Approach::population;
  std::vector<std::string> hot_zone;
  std::vector<std::string> cold_zone;
  double alpha_pop = 5.0;
  double theta_hot = 5.0;
  double theta_cold = -5.0;
  double sigma = 0.5;
  std::uint64_t seed = 1;
};

/// Key-value file, one `key = value` per line, '#' or ';' comments. Keys are
/// exactly the ScenarioSpec field names; zones are comma-separated region ids;
/// mode is "population" or "expectation".
ScenarioSpec load_scenario(const std::filesystem::path& path);
ScenarioSpec read_scenario(std::istream& in);
void write_scenario(const ScenarioSpec& spec, std::ostream& out);

/// Replaces the outcome column of `geometry` by a draw from the scenario.
/// Real-valued and untruncated. Deterministic in spec.seed: one normal draw
/// per region in row order from make_stream(seed, 0).
RegionTable simulate_scenario(const RegionTable& geometry, const ScenarioSpec& spec);

/// Region row indices of a list of ids; throws invalid_argument on unknown ids.
std::vector<std::size_t> resolve_ids(const RegionTable& table, const std::vector<std::string>& ids);

}  // namespace scanreg
