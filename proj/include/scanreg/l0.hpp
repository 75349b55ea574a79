#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "scanreg/model.hpp"
#include "scanreg/region_table.hpp"
#include "scanreg/scan.hpp"
#include "scanreg/zones.hpp"

namespace scanreg {

enum class Overlap { forbid, allow };

/// Sparse-regression form of the scan. `budget` bounds the number of zones
/// with a non-zero effect.
struct L0Config {
  std::size_t budget = 1;
  double lambda = 0.0;
  Overlap overlap = Overlap::forbid;
};

struct L0Selection {
  std::size_t zone_id = 0;
  double theta = 0.0;
};

struct L0Result {
  std::vector<L0Selection> selected;  // in selection order (exact: ascending id)
  double loglik = 0.0;                // maximized log-likelihood of the selected model
  double null_loglik = 0.0;           // log-likelihood with every theta = 0
  bool exact = false;                 // subset enumeration rather than greedy search
  bool experimental = false;          // overlapping zones, no optimality claim
};

/// Full maximized log-likelihood (constants included) of the model where each
/// group gets its own effect and the remaining rows keep the null. Groups
/// must be disjoint and the spec must not use covariates.
///
/// Population approach: the remainder has a free common level; expectation
/// approach: the remainder is fixed at the nominal null (rate 1, mean 0,
/// probability 1/2). Returns +inf for an exact unknown-variance fit.
class PartitionLikelihood {
 public:
  PartitionLikelihood(const RegionTable& table, const ModelSpec& spec);

  double loglik(std::span<const std::span<const std::uint32_t>> groups, std::vector<double>* theta = nullptr) const;
  double null_loglik() const { return loglik({}); }

 private:
  struct Part {
    double n = 0, y = 0, y2 = 0, g = 0, a = 0, b = 0, yy_over_v = 0, log_terms = 0;
  };
  Part part(std::span<const std::uint32_t> members) const;
  double group_loglik(const Part& p, bool free, double* level) const;

  ModelSpec spec_;
  const RegionTable* table_;
  Part total_;
};

/// Single-cluster problem solved by enumerating S_0..S_K and refitting each
/// model through its partition log-likelihood. records[k-1].llr holds the
/// log-likelihood gain over S_0; the MLC rule matches scan().
ScanResult solve_l0_single(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec,
                           const ScanOptions& options = {});

/// Up to `budget` zones with their own effects. Disjoint zones with K <= 20
/// are solved exactly by enumerating every subset of size <= budget; larger
/// sets use greedy forward selection while the log-likelihood gain is
/// positive. overlap = allow runs the greedy search on joint GLM fits and is
/// flagged experimental.
L0Result solve_l0_multi(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec, const L0Config& config,
                        const GlmOptions& glm = {});

}  // namespace scanreg
