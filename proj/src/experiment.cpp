#include "scanreg/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "scanreg/closed_form.hpp"

namespace scanreg {

ZoneMatch match_zone(std::span<const std::uint32_t> detected, std::span<const std::size_t> planted, std::size_t zone_id) {
  ZoneMatch m;
  m.zone_id = zone_id;
  if (detected.empty() || planted.empty()) return m;
  const std::unordered_set<std::size_t> truth(planted.begin(), planted.end());
  double both = 0.0;
  for (std::uint32_t i : detected) both += truth.count(i) ? 1.0 : 0.0;
  const double d = static_cast<double>(detected.size());
  const double p = static_cast<double>(truth.size());
  m.jaccard = both / (d + p - both);
  m.recall = both / p;
  m.precision = both / d;
  return m;
}

ZoneMatch best_top_match(const ScanResult& result, const ZoneSet& zones, std::span<const std::size_t> planted) {
  ZoneMatch best;
  for (std::size_t id : result.top) {
    const ZoneMatch m = match_zone(zones.zone(id).members, planted, id);
    if (m.jaccard > best.jaccard) best = m;
  }
  return best;
}

InterceptSummary summarize_intercepts(const RegionTable& data, const ZoneSet& zones) {
  InterceptSummary s;
  for (const Zone& z : zones.zones()) {
    if (z.size() >= data.size()) continue;
    s.estimates.push_back(intercept_estimate_gaussian(data.outcome(), z.members));
  }
  const double k = static_cast<double>(s.estimates.size());
  if (k < 2) return s;
  for (double a : s.estimates) s.mean += a;
  s.mean /= k;
  for (double a : s.estimates) s.sd += (a - s.mean) * (a - s.mean);
  s.sd = std::sqrt(s.sd / (k - 1.0));
  s.standard_error = s.sd / std::sqrt(k);
  s.z = s.standard_error > 0.0 ? s.mean / s.standard_error : 0.0;
  return s;
}

namespace {

MethodOutcome run_method(const RegionTable& data, const ZoneSet& zones, Approach approach,
                         const std::vector<std::size_t>& hot, const std::vector<std::size_t>& cold,
                         const ScanOptions& options) {
  const ModelSpec spec{Family::gaussian_unknown, approach, false};
  ScanResult result = scan(data, zones, spec, options);
  MethodOutcome out{spec, std::move(result), {}, {}, {}, {}};
  out.hot_top = best_top_match(out.scan, zones, hot);
  out.cold_top = best_top_match(out.scan, zones, cold);
  if (out.scan.mlc_id != 0) {
    const auto& members = zones.zone(out.scan.mlc_id).members;
    out.hot_mlc = match_zone(members, hot, out.scan.mlc_id);
    out.cold_mlc = match_zone(members, cold, out.scan.mlc_id);
  }
  return out;
}

}  // namespace

PlantedRun run_planted(const RegionTable& geometry, const ScenarioSpec& scenario, const PlantedRunOptions& options) {
  std::vector<std::string> warnings;
  if (scenario.hot_zone.size() != 40) {
    warnings.push_back("hot zone has " + std::to_string(scenario.hot_zone.size()) + " regions, scenario expects 40");
  }
  if (scenario.cold_zone.size() != 61) {
    warnings.push_back("cold zone has " + std::to_string(scenario.cold_zone.size()) + " regions, scenario expects 61");
  }
  RegionTable data = simulate_scenario(geometry, scenario);
  ZoneSet zones = circular_zones(data, options.zones);
  std::vector<std::size_t> hot = resolve_ids(data, scenario.hot_zone);
  std::vector<std::size_t> cold = resolve_ids(data, scenario.cold_zone);
  MethodOutcome pop = run_method(data, zones, Approach::population, hot, cold, options.scan);
  MethodOutcome exp = run_method(data, zones, Approach::expectation, hot, cold, options.scan);
  std::optional<InterceptSummary> intercepts;
  if (scenario.mode == Approach::expectation) intercepts = summarize_intercepts(data, zones);
  return PlantedRun{scenario,        std::move(data),      std::move(zones), std::move(hot),
                    std::move(cold), std::move(pop),       std::move(exp),   std::move(intercepts),
                    std::move(warnings)};
}

}  // namespace scanreg
