#pragma once

#include <iosfwd>
#include <optional>

#include <json.hpp>

#include "scanreg/cli.hpp"
#include "scanreg/experiment.hpp"
#include "scanreg/inference.hpp"
#include "scanreg/scan.hpp"
#include "scanreg/zones.hpp"

namespace scanreg::cli {

using nlohmann::json;

json config_json(const RunConfig& config);
json zones_json(const ZoneSet& zones);
json record_json(const ZoneRecord& record);
json cluster_json(const RegionTable& table, const ZoneSet& zones, const ZoneRecord& record, std::size_t rank);
json scan_json(const RegionTable& table, const ZoneSet& zones, const ScanResult& result,
               std::optional<std::size_t> zone_table_limit);
json mc_json(const McResult& mc);
json planted_json(const PlantedRun& run);

/// One row per (cluster, member region): rank, zone_id, llr, theta, p_value, region_id, x, y.
void write_membership_csv(std::ostream& out, const RegionTable& table, const ZoneSet& zones, const ScanResult& result,
                          const McResult* mc);
void write_zone_table_csv(std::ostream& out, const ScanResult& result);
/// FeatureCollection with one MultiPoint feature per reported cluster.
void write_geojson(std::ostream& out, const RegionTable& table, const ZoneSet& zones, const ScanResult& result,
                   const McResult* mc);
void write_intercepts_csv(std::ostream& out, const PlantedRun& run);

}  // namespace scanreg::cli
