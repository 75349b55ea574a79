#include "report.hpp"

#include <cmath>
#include <ostream>

#include "scanreg/io.hpp"

namespace scanreg::cli {

namespace {

// JSON has no infinity; +inf llr values are written as null next to their flag.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string csv_number(double v) {
  if (std::isnan(v)) return "";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

}  // namespace

json config_json(const RunConfig& c) {
  json j;
  j["command"] = to_string(c.command);
  j["input"] = c.input;
  j["columns"] = {{"id", c.columns.id},
                  {"x", c.columns.x},
                  {"y", c.columns.y},
                  {"outcome", c.columns.outcome},
                  {"baseline", c.columns.baseline},
                  {"variance", c.columns.variance},
                  {"covariate_prefix", c.columns.covariate_prefix},
                  {"time", c.columns.time}};
  j["model"] = c.model;
  j["zones"] = c.zone_method;
  if (!c.zone_file.empty()) j["zone_file"] = c.zone_file;
  j["max_fraction"] = c.max_fraction;
  j["max_population_fraction"] = c.max_population_fraction ? json(*c.max_population_fraction) : json(nullptr);
  j["distance"] = c.distance;
  j["max_duration"] = c.max_duration;
  j["top"] = c.top;
  j["non_overlapping"] = c.non_overlapping;
  j["side"] = c.side;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["output"] = c.output;
  j["format"] = to_string(c.format);
  j["zone_table_limit"] = c.zone_table_limit ? json(*c.zone_table_limit) : json(nullptr);
  if (!c.scenario.empty()) j["scenario"] = c.scenario;
  if (c.mode) j["mode"] = *c.mode;
  return j;
}

json zones_json(const ZoneSet& zones) {
  json params = json::object();
  for (const auto& [k, v] : zones.parameters()) params[k] = v;
  std::size_t largest = 0;
  for (const auto& z : zones.zones()) largest = std::max(largest, z.size());
  return {{"method", zones.method()}, {"parameters", params}, {"count", zones.size()}, {"largest", largest}};
}

json record_json(const ZoneRecord& r) {
  json j{{"zone_id", r.zone_id}, {"size", r.size}, {"llr", number(r.llr)}, {"theta", number(r.theta)}};
  if (r.alpha) j["alpha"] = number(*r.alpha);
  if (r.sigma2) j["sigma2"] = number(*r.sigma2);
  if (!r.beta.empty()) {
    json b = json::array();
    for (double v : r.beta) b.push_back(number(v));
    j["beta"] = b;
  }
  if (r.degenerate_variance) j["degenerate_variance"] = true;
  if (r.filtered) j["filtered"] = true;
  if (r.error) j["error"] = to_string(*r.error);
  return j;
}

json cluster_json(const RegionTable& table, const ZoneSet& zones, const ZoneRecord& record, std::size_t rank) {
  json j = record_json(record);
  j["rank"] = rank;
  const Zone& z = zones.zone(record.zone_id);
  if (z.center) j["center"] = table.id(*z.center);
  if (z.t_start > 0) j["periods"] = {z.t_start, z.t_end};
  json members = json::array();
  for (std::uint32_t i : z.members) members.push_back(table.id(i));
  j["members"] = members;
  return j;
}

json scan_json(const RegionTable& table, const ZoneSet& zones, const ScanResult& result,
               std::optional<std::size_t> zone_table_limit) {
  json j;
  j["mlc"] = result.mlc_id == 0 ? json(nullptr) : cluster_json(table, zones, result.record(result.mlc_id), 1);
  json clusters = json::array();
  std::size_t rank = 1;
  for (std::size_t id : result.top) clusters.push_back(cluster_json(table, zones, result.record(id), rank++));
  j["clusters"] = clusters;

  json rows = json::array();
  const std::size_t limit = zone_table_limit.value_or(result.records.size());
  for (std::size_t id : result.ranking) {
    if (rows.size() >= limit) break;
    rows.push_back(record_json(result.record(id)));
  }
  for (const auto& r : result.records) {
    if (rows.size() >= limit) break;
    if (!r.usable()) rows.push_back(record_json(r));
  }
  j["zone_table"] = rows;
  j["zone_table_truncated"] = rows.size() < result.records.size();
  return j;
}

json mc_json(const McResult& mc) {
  json reps = json::array();
  for (double v : mc.replicate_max_llr) reps.push_back(number(v));
  return {{"p_value", mc.p_value},
          {"replicates", mc.replicates},
          {"observed_max_llr", number(mc.observed_max_llr)},
          {"observed_mlc", mc.observed_mlc},
          {"seed", mc.seed},
          {"replicate_max_llr", reps}};
}

namespace {

json match_json(const ZoneMatch& m) {
  return {{"zone_id", m.zone_id}, {"jaccard", m.jaccard}, {"recall", m.recall}, {"precision", m.precision}};
}

json method_json(const PlantedRun& run, const MethodOutcome& m) {
  json clusters = json::array();
  std::size_t rank = 1;
  for (std::size_t id : m.scan.top) clusters.push_back(cluster_json(run.data, run.zones, m.scan.record(id), rank++));
  return {{"model", model_name(m.model)},
          {"mlc", m.scan.mlc_id},
          {"top_clusters", clusters},
          {"hot", {{"best_of_top", match_json(m.hot_top)}, {"mlc", match_json(m.hot_mlc)}}},
          {"cold", {{"best_of_top", match_json(m.cold_top)}, {"mlc", match_json(m.cold_mlc)}}}};
}

}  // namespace

json planted_json(const PlantedRun& run) {
  json j;
  j["scenario"] = {{"mode", to_string(run.scenario.mode)},
                   {"alpha_pop", run.scenario.alpha_pop},
                   {"theta_hot", run.scenario.theta_hot},
                   {"theta_cold", run.scenario.theta_cold},
                   {"sigma", run.scenario.sigma},
                   {"seed", run.scenario.seed},
                   {"hot_zone", run.scenario.hot_zone},
                   {"cold_zone", run.scenario.cold_zone}};
  j["zones"] = zones_json(run.zones);
  j["methods"] = {method_json(run, run.population_statistic), method_json(run, run.expectation_statistic)};
  if (run.intercepts) {
    const auto& s = *run.intercepts;
    j["intercepts"] = {{"count", s.estimates.size()},
                       {"mean", s.mean},
                       {"sd", s.sd},
                       {"standard_error", s.standard_error},
                       {"z", s.z}};
  } else {
    j["intercepts"] = nullptr;
  }
  j["warnings"] = run.warnings;
  return j;
}

void write_membership_csv(std::ostream& out, const RegionTable& table, const ZoneSet& zones, const ScanResult& result,
                          const McResult* mc) {
  out << "rank,zone_id,llr,theta,p_value,region_id,x,y\n";
  std::size_t rank = 1;
  for (std::size_t id : result.top) {
    const ZoneRecord& r = result.record(id);
    const std::string p = mc && id == result.mlc_id ? format_double(mc->p_value) : "";
    for (std::uint32_t i : zones.zone(id).members) {
      out << rank << ',' << id << ',' << csv_number(r.llr) << ',' << csv_number(r.theta) << ',' << p << ','
          << csv_field(table.id(i)) << ',' << format_double(table.coords()[i].x) << ','
          << format_double(table.coords()[i].y) << '\n';
    }
    ++rank;
  }
}

void write_zone_table_csv(std::ostream& out, const ScanResult& result) {
  out << "zone_id,size,llr,theta,alpha,sigma2,degenerate_variance,filtered,error\n";
  for (const auto& r : result.records) {
    out << r.zone_id << ',' << r.size << ',' << csv_number(r.llr) << ',' << csv_number(r.theta) << ','
        << (r.alpha ? csv_number(*r.alpha) : "") << ',' << (r.sigma2 ? csv_number(*r.sigma2) : "") << ','
        << (r.degenerate_variance ? 1 : 0) << ',' << (r.filtered ? 1 : 0) << ','
        << (r.error ? std::string(to_string(*r.error)) : "") << '\n';
  }
}

void write_geojson(std::ostream& out, const RegionTable& table, const ZoneSet& zones, const ScanResult& result,
                   const McResult* mc) {
  json features = json::array();
  std::size_t rank = 1;
  for (std::size_t id : result.top) {
    const ZoneRecord& r = result.record(id);
    json coords = json::array();
    json members = json::array();
    for (std::uint32_t i : zones.zone(id).members) {
      coords.push_back({table.coords()[i].x, table.coords()[i].y});
      members.push_back(table.id(i));
    }
    json props{{"rank", rank++}, {"zone_id", id}, {"llr", number(r.llr)}, {"theta", number(r.theta)},
               {"size", r.size}, {"members", members}};
    if (mc && id == result.mlc_id) props["p_value"] = mc->p_value;
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "MultiPoint"}, {"coordinates", coords}}},
                        {"properties", props}});
  }
  out << json{{"type", "FeatureCollection"}, {"features", features}}.dump(2) << '\n';
}

void write_intercepts_csv(std::ostream& out, const PlantedRun& run) {
  out << "zone_id,size,intercept\n";
  if (!run.intercepts) return;
  std::size_t k = 0;
  for (const Zone& z : run.zones.zones()) {
    if (z.size() >= run.data.size()) continue;
    out << z.id << ',' << z.size() << ',' << format_double(run.intercepts->estimates[k++]) << '\n';
  }
}

}  // namespace scanreg::cli
