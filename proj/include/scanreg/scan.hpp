#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "scanreg/closed_form.hpp"
#include "scanreg/error.hpp"
#include "scanreg/glm.hpp"
#include "scanreg/model.hpp"
#include "scanreg/region_table.hpp"
#include "scanreg/zones.hpp"

namespace scanreg {

enum class Sidedness { two_sided, hot, cold };

struct ScanOptions {
  std::size_t top = 3;
  bool non_overlapping = false;  // drop ranked zones that intersect a better one
  Sidedness sidedness = Sidedness::two_sided;
  unsigned threads = 0;  // 0: default_threads()
  GlmOptions glm;
};

struct ZoneRecord {
  std::size_t zone_id = 0;
  std::size_t size = 0;
  double llr = 0.0;
  double theta = 0.0;
  std::optional<double> alpha;
  std::optional<double> sigma2;
  std::vector<double> beta;
  bool degenerate_variance = false;
  bool filtered = false;              // removed by the one-sided filter
  std::optional<ErrorCode> error;     // zone could not be evaluated

  bool usable() const noexcept { return !error && !filtered; }
};

/// Result of evaluating every zone. `records[k - 1]` belongs to zone k.
/// `mlc_id` is 0 when no zone has a positive statistic. `ranking` holds the
/// usable zones by descending llr with the MLC first; `top` is its first
/// `top` entries with positive llr (after the optional overlap filter).
struct ScanResult {
  ModelSpec model;
  std::vector<ZoneRecord> records;
  std::size_t mlc_id = 0;
  std::vector<std::size_t> ranking;
  std::vector<std::size_t> top;
  std::size_t errored = 0;

  const ZoneRecord& record(std::size_t zone_id) const { return records.at(zone_id - 1); }
  /// llr of the MLC, 0 for the empty cluster.
  double max_llr() const noexcept { return mlc_id == 0 ? 0.0 : records[mlc_id - 1].llr; }
};

/// Closed-form evaluator, or the GLM engine when spec.glm is set. The table
/// must outlive the evaluator.
std::unique_ptr<ZoneEvaluator> make_evaluator(const RegionTable& table, const ModelSpec& spec,
                                              const GlmOptions& glm = {});

ScanResult scan(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec, const ScanOptions& options = {});

/// Fills ranking, top and mlc_id from records. Ties within a relative 1e-9
/// go to the smaller zone, then the smaller id; a best llr within that
/// tolerance of 0 selects the empty cluster.
void rank_zones(ScanResult& result, const ZoneSet& zones, const ScanOptions& options);

/// SCANREG_THREADS if set, else the hardware concurrency (at least 1).
unsigned default_threads();

/// Runs body(i) for i in [0, count) on up to `threads` workers. If any call
/// throws, the exception of the smallest index is rethrown after all finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace scanreg
