#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scanreg/region_table.hpp"

namespace scanreg {

/// A potential cluster. `id` runs 1..K within its ZoneSet; id 0 is reserved
/// for the empty cluster and never stored. Members are sorted ascending,
/// 0-based row indices (cells for space-time zones).
struct Zone {
  std::size_t id = 0;
  std::vector<std::uint32_t> members;

  // Provenance: circular zones record their center row; cylinders record the
  // spatial base zone and the 1-based inclusive period range.
  std::optional<std::size_t> center;
  std::size_t base_zone = 0;
  int t_start = 0;
  int t_end = 0;

  std::size_t size() const noexcept { return members.size(); }
  bool contains(std::uint32_t i) const;
};

/// Immutable collection S_1..S_K over an index space of `index_size` rows.
class ZoneSet {
 public:
  /// Validates members (non-empty, in range, no duplicates), drops later
  /// zones whose member set repeats an earlier one, and numbers 1..K in
  /// input order. Member lists need not be sorted on input.
  static ZoneSet create(std::size_t index_size, std::vector<Zone> zones, std::string method = "explicit",
                        std::map<std::string, std::string> parameters = {});

  std::size_t size() const noexcept { return zones_.size(); }
  std::size_t index_size() const noexcept { return index_size_; }
  const Zone& zone(std::size_t id) const { return zones_.at(id - 1); }
  std::span<const Zone> zones() const noexcept { return zones_; }
  const std::string& method() const noexcept { return method_; }
  const std::map<std::string, std::string>& parameters() const noexcept { return parameters_; }

  /// Z_{k,i} materialized on demand.
  std::vector<double> indicator(std::size_t id) const;

  /// True when no two zones share a member.
  bool pairwise_disjoint() const;

  /// First `count` zones (renumbered 1..count).
  ZoneSet truncated(std::size_t count) const;

 private:
  ZoneSet() = default;

  std::size_t index_size_ = 0;
  std::vector<Zone> zones_;
  std::string method_;
  std::map<std::string, std::string> parameters_;
};

enum class DistanceMode { euclidean, haversine };

/// Planar distance, or great-circle km with x = longitude and y = latitude in degrees.
double distance(Point a, Point b, DistanceMode mode);

struct CircularOptions {
  double max_fraction = 0.5;                   // cap on zone size as a fraction of the region count
  DistanceMode distance = DistanceMode::euclidean;
  std::optional<double> max_population_fraction;  // optional cap on the baseline share of a zone
};

/// For each center, the nested zones of its 1st..m-th nearest regions
/// (center included, distance ties broken by row index), m <= ceil(max_fraction * N).
/// Duplicates are dropped; order is center row, then size.
ZoneSet circular_zones(const RegionTable& table, const CircularOptions& options = {});

/// Zone k = {k} for every row.
ZoneSet singleton_zones(std::size_t region_count);
ZoneSet singleton_zones(const RegionTable& table);

/// Cylinders over cells t * N + i: every base zone crossed with every period
/// window of length 1..max_duration, ordered by base zone, length, start.
/// K = K_base * sum_{d=1..D} (T - d + 1).
ZoneSet cylinder_zones(std::size_t region_count, std::size_t periods, const ZoneSet& base, std::size_t max_duration);
ZoneSet cylinder_zones(const SpaceTimeTable& st, const ZoneSet& base, std::size_t max_duration);

/// Zone CSV: header `zone_id,region_id`, one row per membership. Zones keep
/// the order of first appearance and are renumbered 1..K on import.
ZoneSet read_zones(std::istream& in, const RegionTable& table);
ZoneSet load_zones(const std::filesystem::path& path, const RegionTable& table);
void write_zones(const ZoneSet& zones, const RegionTable& table, std::ostream& out);

}  // namespace scanreg
