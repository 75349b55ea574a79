#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scanreg/model.hpp"
#include "scanreg/region_table.hpp"
#include "scanreg/scan.hpp"
#include "scanreg/scenario.hpp"
#include "scanreg/zones.hpp"

namespace scanreg {

/// Agreement between a detected zone and a planted one.
struct ZoneMatch {
  std::size_t zone_id = 0;  // 0: nothing detected
  double jaccard = 0.0;
  double recall = 0.0;     // share of the planted regions covered
  double precision = 0.0;  // share of the detected regions that are planted
};

ZoneMatch match_zone(std::span<const std::uint32_t> detected, std::span<const std::size_t> planted, std::size_t zone_id = 0);

/// Best Jaccard match among the reported top clusters.
ZoneMatch best_top_match(const ScanResult& result, const ZoneSet& zones, std::span<const std::size_t> planted);

struct MethodOutcome {
  ModelSpec model;
  ScanResult scan;
  ZoneMatch hot_top, cold_top;  // best over the top clusters
  ZoneMatch hot_mlc, cold_mlc;  // most likely cluster only
};

struct InterceptSummary {
  std::vector<double> estimates;  // outside mean per zone, zone order
  double mean = 0.0;
  double sd = 0.0;
  double standard_error = 0.0;  // sd / sqrt(K)
  double z = 0.0;               // mean / standard_error
};

struct PlantedRunOptions {
  PlantedRunOptions() {
    zones.max_fraction = 0.3;
    scan.non_overlapping = true;
  }
  CircularOptions zones;
  ScanOptions scan;
};

/// Planted hot/cold experiment on one geometry: simulates the scenario,
/// builds circular zones, scans with the population-based and
/// expectation-based unknown-variance Gaussian statistics, and in
/// expectation mode summarizes the per-zone outside-mean intercepts.
struct PlantedRun {
  ScenarioSpec scenario;
  RegionTable data;
  ZoneSet zones;
  std::vector<std::size_t> hot;
  std::vector<std::size_t> cold;
  MethodOutcome population_statistic;
  MethodOutcome expectation_statistic;
  std::optional<InterceptSummary> intercepts;
  std::vector<std::string> warnings;
};

PlantedRun run_planted(const RegionTable& geometry, const ScenarioSpec& scenario, const PlantedRunOptions& options = {});

InterceptSummary summarize_intercepts(const RegionTable& data, const ZoneSet& zones);

}  // namespace scanreg
