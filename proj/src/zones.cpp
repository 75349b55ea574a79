#include "scanreg/zones.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include <boost/algorithm/string.hpp>
#include <boost/container_hash/hash.hpp>

#include "scanreg/error.hpp"
#include "scanreg/io.hpp"

namespace scanreg {

namespace {

struct MembersHash {
  std::size_t operator()(const std::vector<std::uint32_t>& m) const noexcept {
    return boost::hash_range(m.begin(), m.end());
  }
};

std::string format_fraction(double v) { return format_double(v); }

}  // namespace

bool Zone::contains(std::uint32_t i) const { return std::binary_search(members.begin(), members.end(), i); }

ZoneSet ZoneSet::create(std::size_t index_size, std::vector<Zone> zones, std::string method,
                        std::map<std::string, std::string> parameters) {
  ZoneSet set;
  set.index_size_ = index_size;
  set.method_ = std::move(method);
  set.parameters_ = std::move(parameters);
  std::unordered_set<std::vector<std::uint32_t>, MembersHash> seen;
  seen.reserve(zones.size());
  for (std::size_t k = 0; k < zones.size(); ++k) {
    Zone& z = zones[k];
    if (z.members.empty()) {
      throw Error(ErrorCode::invalid_argument, "zone " + std::to_string(k + 1) + " is empty");
    }
    std::sort(z.members.begin(), z.members.end());
    if (std::adjacent_find(z.members.begin(), z.members.end()) != z.members.end()) {
      throw Error(ErrorCode::invalid_argument, "zone " + std::to_string(k + 1) + " lists a member twice");
    }
    if (z.members.back() >= index_size) {
      throw Error(ErrorCode::invalid_argument, "zone " + std::to_string(k + 1) + " has member index " +
                                                   std::to_string(z.members.back()) + " outside 0.." +
                                                   std::to_string(index_size - 1));
    }
    if (!seen.insert(z.members).second) continue;
    z.id = set.zones_.size() + 1;
    set.zones_.push_back(std::move(z));
  }
  if (set.zones_.empty()) throw Error(ErrorCode::invalid_argument, "zone set is empty");
  return set;
}

std::vector<double> ZoneSet::indicator(std::size_t id) const {
  std::vector<double> z(index_size_, 0.0);
  for (std::uint32_t i : zone(id).members) z[i] = 1.0;
  return z;
}

bool ZoneSet::pairwise_disjoint() const {
  std::vector<char> used(index_size_, 0);
  for (const Zone& z : zones_) {
    for (std::uint32_t i : z.members) {
      if (used[i]) return false;
      used[i] = 1;
    }
  }
  return true;
}

ZoneSet ZoneSet::truncated(std::size_t count) const {
  std::vector<Zone> first(zones_.begin(), zones_.begin() + std::min(count, zones_.size()));
  auto params = parameters_;
  params["truncated_to"] = std::to_string(first.size());
  return create(index_size_, std::move(first), method_, std::move(params));
}

double distance(Point a, Point b, DistanceMode mode) {
  if (mode == DistanceMode::euclidean) return std::hypot(a.x - b.x, a.y - b.y);
  constexpr double kEarthRadiusKm = 6371.0088;
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  const double lat1 = a.y * kDeg;
  const double lat2 = b.y * kDeg;
  const double dlat = lat2 - lat1;
  const double dlon = (b.x - a.x) * kDeg;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

ZoneSet circular_zones(const RegionTable& table, const CircularOptions& options) {
  if (!(options.max_fraction > 0.0 && options.max_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "max_fraction must lie in (0, 1]");
  }
  if (options.max_population_fraction &&
      !(*options.max_population_fraction > 0.0 && *options.max_population_fraction <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "max_population_fraction must lie in (0, 1]");
  }
  const std::size_t n = table.size();
  // The epsilon keeps max_fraction = m / N from rounding up to m + 1.
  const auto max_size = static_cast<std::size_t>(
      std::clamp(std::ceil(options.max_fraction * static_cast<double>(n) - 1e-9), 1.0, static_cast<double>(n)));
  const auto coords = table.coords();
  const auto baseline = table.baseline();
  const double population_cap =
      options.max_population_fraction
          ? *options.max_population_fraction * std::accumulate(baseline.begin(), baseline.end(), 0.0)
          : 0.0;

  std::vector<Zone> zones;
  std::vector<std::uint32_t> order(n);
  std::vector<double> dist(n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) dist[i] = distance(coords[c], coords[i], options.distance);
    std::iota(order.begin(), order.end(), 0u);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(max_size), order.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        if (a == c || b == c) return a == c && b != c;
                        return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                      });
    double population = 0.0;
    for (std::size_t m = 1; m <= max_size; ++m) {
      population += baseline[order[m - 1]];
      if (options.max_population_fraction && m > 1 && population > population_cap) break;
      Zone z;
      z.members.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
      z.center = c;
      zones.push_back(std::move(z));
    }
  }
  std::map<std::string, std::string> params{
      {"max_fraction", format_fraction(options.max_fraction)},
      {"max_size", std::to_string(max_size)},
      {"distance", options.distance == DistanceMode::euclidean ? "euclidean" : "haversine"}};
  if (options.max_population_fraction) {
    params["max_population_fraction"] = format_fraction(*options.max_population_fraction);
  }
  return ZoneSet::create(n, std::move(zones), "circular", std::move(params));
}

ZoneSet singleton_zones(std::size_t region_count) {
  if (region_count == 0) throw Error(ErrorCode::invalid_argument, "singleton zones need at least one region");
  std::vector<Zone> zones(region_count);
  for (std::size_t i = 0; i < region_count; ++i) {
    zones[i].members = {static_cast<std::uint32_t>(i)};
    zones[i].center = i;
  }
  return ZoneSet::create(region_count, std::move(zones), "singleton");
}

ZoneSet singleton_zones(const RegionTable& table) { return singleton_zones(table.size()); }

ZoneSet cylinder_zones(std::size_t region_count, std::size_t periods, const ZoneSet& base, std::size_t max_duration) {
  if (periods == 0) throw Error(ErrorCode::invalid_argument, "cylinders need at least one period");
  if (max_duration < 1 || max_duration > periods) {
    throw Error(ErrorCode::invalid_argument, "max_duration must lie in [1, " + std::to_string(periods) + "], got " +
                                                 std::to_string(max_duration));
  }
  if (base.index_size() != region_count) {
    throw Error(ErrorCode::invalid_argument, "base zones do not match the region count");
  }
  std::vector<Zone> zones;
  std::size_t windows = 0;
  for (std::size_t d = 1; d <= max_duration; ++d) windows += periods - d + 1;
  zones.reserve(base.size() * windows);
  for (const Zone& b : base.zones()) {
    for (std::size_t d = 1; d <= max_duration; ++d) {
      for (std::size_t t0 = 0; t0 + d <= periods; ++t0) {
        Zone z;
        z.members.reserve(b.size() * d);
        for (std::size_t t = t0; t < t0 + d; ++t) {
          for (std::uint32_t i : b.members) z.members.push_back(static_cast<std::uint32_t>(t * region_count + i));
        }
        z.center = b.center;
        z.base_zone = b.id;
        z.t_start = static_cast<int>(t0 + 1);
        z.t_end = static_cast<int>(t0 + d);
        zones.push_back(std::move(z));
      }
    }
  }
  auto params = base.parameters();
  params["base_method"] = base.method();
  params["periods"] = std::to_string(periods);
  params["max_duration"] = std::to_string(max_duration);
  return ZoneSet::create(region_count * periods, std::move(zones), "cylinder", std::move(params));
}

ZoneSet cylinder_zones(const SpaceTimeTable& st, const ZoneSet& base, std::size_t max_duration) {
  return cylinder_zones(st.regions(), st.periods(), base, max_duration);
}

ZoneSet read_zones(std::istream& in, const RegionTable& table) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, "empty zone file");
  boost::algorithm::trim(line);
  if (line != "zone_id,region_id") throw Error(ErrorCode::parse, "zone file header must be 'zone_id,region_id'");
  std::vector<Zone> zones;
  std::map<std::string, std::size_t> slot;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    boost::algorithm::trim(line);
    if (line.empty()) continue;
    ++row;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::parse, "zone file row " + std::to_string(row) + ": expected 2 fields");
    const std::string zid = boost::algorithm::trim_copy(line.substr(0, comma));
    const std::string rid = boost::algorithm::trim_copy(line.substr(comma + 1));
    auto idx = table.index_of(rid);
    if (!idx) throw Error(ErrorCode::parse, "zone file row " + std::to_string(row) + ": unknown region id '" + rid + "'");
    auto [it, fresh] = slot.emplace(zid, zones.size());
    if (fresh) zones.emplace_back();
    zones[it->second].members.push_back(static_cast<std::uint32_t>(*idx));
  }
  if (zones.empty()) throw Error(ErrorCode::parse, "zone file lists no zones");
  try {
    return ZoneSet::create(table.size(), std::move(zones), "imported");
  } catch (const Error& e) {
    throw Error(ErrorCode::parse, std::string("zone file: ") + e.what());
  }
}

ZoneSet load_zones(const std::filesystem::path& path, const RegionTable& table) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, "cannot open zone file '" + path.string() + "'");
  return read_zones(in, table);
}

void write_zones(const ZoneSet& zones, const RegionTable& table, std::ostream& out) {
  if (zones.index_size() != table.size()) {
    throw Error(ErrorCode::invalid_argument, "zone set does not match the region table");
  }
  out << "zone_id,region_id\n";
  for (const Zone& z : zones.zones()) {
    for (std::uint32_t i : z.members) out << z.id << ',' << table.id(i) << '\n';
  }
}

}  // namespace scanreg
