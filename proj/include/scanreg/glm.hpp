#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scanreg/closed_form.hpp"
#include "scanreg/model.hpp"
#include "scanreg/region_table.hpp"

namespace scanreg {

struct GlmOptions {
  double tolerance = 1e-10;  // on |dev - dev_old| / (|dev| + 0.1)
  // Also required: |dev - dev_old| below this (or a few ulps of the
  // log-likelihood). Boundary fits drift towards infinite coefficients and
  // would otherwise stop while the likelihood still moves by ~1e-9.
  double absolute_tolerance = 1e-11;
  int max_iterations = 100;
};

struct GlmFit {
  Eigen::VectorXd coef;
  double loglik = 0.0;  // full log-likelihood at coef, constants included
  double sigma2 = 0.0;  // unknown-variance Gaussian only: RSS / N
  int iterations = 0;
  bool degenerate_variance = false;  // RSS at the numeric floor, loglik is +inf
};

/// Maximum likelihood for one family on fixed data, for any design matrix.
///
///   poisson           log mu = X b + log(baseline)
///   bernoulli         logit pi = X b
///   gaussian_fixed    mu = baseline * (1 + X b), variance per row
///   gaussian_unknown  mu = X b, common variance profiled out
///
/// Poisson and Bernoulli use iteratively reweighted least squares (Newton
/// steps for the canonical link, halved while the log-likelihood drops);
/// the Gaussian families are solved directly by QR.
class GlmProblem {
 public:
  GlmProblem(Family family, std::span<const double> y, std::span<const double> baseline,
             std::span<const double> variance, GlmOptions options = {});

  /// Throws rank_deficient when X lacks full column rank and non_convergence
  /// when the iteration cap is reached.
  GlmFit fit(const Eigen::MatrixXd& design, const Eigen::VectorXd* start = nullptr) const;

  double loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& coef) const;

  std::size_t size() const noexcept { return static_cast<std::size_t>(y_.size()); }

 private:
  GlmFit fit_iterative(const Eigen::MatrixXd& design, const Eigen::VectorXd* start) const;
  GlmFit fit_gaussian(const Eigen::MatrixXd& design) const;
  double deviance(double loglik) const noexcept { return 2.0 * (saturated_ - loglik); }

  Family family_;
  Eigen::VectorXd y_;
  Eigen::VectorXd baseline_;
  Eigen::VectorXd variance_;
  Eigen::VectorXd offset_;
  GlmOptions options_;
  double constant_ = 0.0;   // data-only terms of the log-likelihood
  double saturated_ = 0.0;  // log-likelihood of the saturated model
};

/// Covariate-adjusted log-likelihood ratio: alternative design [1?, Z, X]
/// against null design [1?, X], intercept present for the population
/// approach. The null fit is computed once at construction and reused for
/// every zone; each alternative fit starts from it with theta = 0.
class GlmStatistic final : public ZoneEvaluator {
 public:
  GlmStatistic(const RegionTable& table, const ModelSpec& spec, GlmOptions options = {});

  FitReport evaluate(std::span<const std::uint32_t> members) const override;

  /// Joint fit with one indicator column per zone (zones may overlap).
  /// Returns the fit; thetas are coef entries [first_zone_column, +zones.size()).
  GlmFit fit_zones(std::span<const std::span<const std::uint32_t>> zones) const;
  std::size_t first_zone_column() const noexcept { return spec_.has_intercept() ? 1 : 0; }

  const GlmFit& null_fit() const noexcept { return null_; }
  const ModelSpec& spec() const noexcept { return spec_; }
  const GlmProblem& problem() const noexcept { return problem_; }

 private:
  Eigen::MatrixXd design(std::span<const std::span<const std::uint32_t>> zones) const;
  void check_zone(std::span<const std::uint32_t> members) const;

  ModelSpec spec_;
  std::size_t n_ = 0;
  Eigen::MatrixXd covariates_;
  GlmProblem problem_;
  GlmFit null_;
  double total_outcome_ = 0.0;
};

/// One-off llr for a single zone (fits the null as well).
FitReport llr_glm(const RegionTable& table, std::span<const std::uint32_t> zone, const ModelSpec& spec,
                  GlmOptions options = {});

}  // namespace scanreg
