#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "scanreg/model.hpp"
#include "scanreg/region_table.hpp"
#include "scanreg/rng.hpp"
#include "scanreg/scan.hpp"
#include "scanreg/zones.hpp"

namespace scanreg {

struct McOptions {
  std::size_t replicates = 999;
  std::uint64_t seed = 1;
  ScanOptions scan;  // threads here parallelize replicates; each replicate scans single-threaded
};

struct McResult {
  double p_value = 1.0;
  std::size_t replicates = 0;
  std::vector<double> replicate_max_llr;
  double observed_max_llr = 0.0;
  std::size_t observed_mlc = 0;
  std::uint64_t seed = 0;
};

/// Draws outcome vectors from the null model of a spec:
///
///   poisson-pop        multinomial of the observed total, probabilities baseline / sum(baseline)
///   poisson-exp        Poisson(baseline)
///   bernoulli-pop      random permutation of the observed outcomes
///   bernoulli-exp      Bernoulli(1/2)
///   gauss-fixed-pop    N(baseline (1 + alpha0), var), alpha0 the null estimate
///   gauss-fixed-exp    N(baseline, var)
///   gauss-unknown-pop  N(mean(y), sum (y - mean)^2 / N)
///   gauss-unknown-exp  N(0, sum y^2 / N)
///   glm-*              parametric bootstrap from the fitted null GLM
class NullModel {
 public:
  NullModel(const RegionTable& table, const ModelSpec& spec, const GlmOptions& glm = {});

  std::vector<double> draw(Engine& engine) const;

 private:
  ModelSpec spec_;
  std::vector<double> observed_;
  std::vector<double> mean_;      // per-row mean (Poisson rate, probability or Gaussian mean)
  std::vector<double> sd_;        // per-row standard deviation, Gaussian families
  std::vector<double> cumulative_;  // multinomial cell boundaries
  std::uint64_t total_ = 0;
};

/// Monte Carlo test of the most likely cluster. Replicate r draws from
/// make_stream(seed, r + 1), so the result does not depend on the number of
/// threads. p = (1 + #{r : T_r >= T_obs}) / (R + 1). When the observed scan
/// finds no cluster the p-value is 1.
McResult mc_test(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec, const McOptions& options = {});
McResult mc_test(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec, const ScanResult& observed,
                 const McOptions& options);

double monte_carlo_p_value(double observed, std::span<const double> replicates);

}  // namespace scanreg
