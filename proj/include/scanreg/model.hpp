#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "scanreg/region_table.hpp"
#include "scanreg/scenario.hpp"

namespace scanreg {

enum class Family {
  poisson,           // log link, offset log(baseline)
  gaussian_fixed,    // mean baseline * (1 + alpha + theta Z), known per-region variance
  gaussian_unknown,  // mean alpha + theta Z, one unknown variance
  bernoulli,         // logit link
};

/// Which statistic to evaluate. `approach` decides the intercept: population
/// fits alpha under both hypotheses, expectation fixes alpha = 0. `glm`
/// selects the iterative engine that also accepts covariates; without it the
/// closed-form statistic is used and covariates are ignored.
struct ModelSpec {
  Family family = Family::poisson;
  Approach approach = Approach::population;
  bool glm = false;

  bool has_intercept() const noexcept { return approach == Approach::population; }
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Model names used on the command line and in result files:
/// poisson-pop, poisson-exp, gauss-fixed-pop, gauss-fixed-exp,
/// gauss-unknown-pop, gauss-unknown-exp, bernoulli-pop, bernoulli-exp,
/// and the covariate-adjusted glm-poisson-*, glm-gauss-fixed-*, glm-gauss-*,
/// glm-bernoulli-* variants (suffix -pop or -exp).
std::string model_name(const ModelSpec& spec);
std::optional<ModelSpec> parse_model(std::string_view name);
std::vector<std::string> model_names();

std::string_view to_string(Family family) noexcept;
std::string_view to_string(Approach approach) noexcept;

/// Model-specific data invariants: positive baselines for Poisson, non-zero
/// baselines and positive variances for fixed-variance Gaussian, 0/1
/// outcomes for Bernoulli, non-negative counts for Poisson. Throws
/// ErrorCode::invalid_data naming the first offending row.
void check_table_for(const RegionTable& table, const ModelSpec& spec);

/// Estimates for one zone. `llr` is +infinity (with degenerate_variance set)
/// when an unknown-variance fit is exact. theta and alpha may be infinite at
/// boundary MLEs, e.g. a zone without cases under the Poisson model.
struct FitReport {
  double llr = 0.0;
  double theta = 0.0;
  std::optional<double> alpha;
  std::optional<double> sigma2;
  std::vector<double> beta;
  bool degenerate_variance = false;
};

}  // namespace scanreg
