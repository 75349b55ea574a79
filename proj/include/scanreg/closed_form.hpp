#pragma once

#include <cstdint>
#include <span>

#include "scanreg/error.hpp"
#include "scanreg/model.hpp"

namespace scanreg {

/// Evaluates one zone given its member rows. Implementations are immutable
/// after construction and safe to call from several threads at once.
class ZoneEvaluator {
 public:
  virtual ~ZoneEvaluator() = default;
  virtual FitReport evaluate(std::span<const std::uint32_t> members) const = 0;
};

/// Additive sufficient statistics over a set of regions.
struct Sums {
  double n = 0.0;   // region count
  double y = 0.0;   // sum y
  double yc = 0.0;  // sum (y - mean(y)), centered by the global mean
  double y2 = 0.0;  // sum y^2
  double g = 0.0;   // sum baseline
  double a = 0.0;   // sum y * baseline / var
  double b = 0.0;   // sum baseline^2 / var

  Sums& operator+=(const Sums& o) noexcept;
  friend Sums operator-(Sums l, const Sums& r) noexcept;
};

/// Closed-form log-likelihood ratio for every (family, approach) pair without
/// covariates. Totals are computed once; evaluate() is O(|zone|).
///
/// 0 log 0 is taken as 0. Population statistics reject a zone covering every
/// region; expectation statistics accept it. Unknown-variance fits whose
/// residual sum of squares falls below 1e-12 * sum y^2 return the +infinity
/// sentinel (degenerate_variance); when the null fit is already exact the
/// statistic is 0.
class ClosedFormStatistic final : public ZoneEvaluator {
 public:
  /// `variance` may be empty unless the family is gaussian_fixed.
  ClosedFormStatistic(ModelSpec spec, std::span<const double> y, std::span<const double> baseline,
                      std::span<const double> variance = {});

  FitReport evaluate(std::span<const std::uint32_t> members) const override;
  FitReport evaluate_sums(const Sums& inside) const;

  Sums inside(std::span<const std::uint32_t> members) const noexcept;
  const Sums& totals() const noexcept { return total_; }
  const ModelSpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return y_.size(); }

  /// Zone-level precondition of this statistic (see ErrorCode); nullopt when
  /// the zone can be evaluated.
  std::optional<ErrorCode> check(const Sums& inside, std::string* message = nullptr) const;

 private:
  FitReport poisson(const Sums& in) const;
  FitReport gaussian_fixed(const Sums& in) const;
  FitReport gaussian_unknown(const Sums& in) const;
  FitReport bernoulli(const Sums& in) const;

  ModelSpec spec_;
  std::span<const double> y_;
  std::span<const double> g_;
  std::span<const double> v_;
  double mean_ = 0.0;
  double sst_ = 0.0;
  Sums total_;
};

// Per-statistic entry points. Each validates its inputs and throws Error on
// the documented degenerate cases, including degenerate_variance for the
// unknown-variance statistics.
FitReport llr_poisson_population(std::span<const double> y, std::span<const double> baseline,
                                 std::span<const std::uint32_t> zone);
FitReport llr_poisson_expectation(std::span<const double> y, std::span<const double> baseline,
                                  std::span<const std::uint32_t> zone);
FitReport llr_gaussian_fixed_population(std::span<const double> y, std::span<const double> baseline,
                                        std::span<const double> variance, std::span<const std::uint32_t> zone);
FitReport llr_gaussian_fixed_expectation(std::span<const double> y, std::span<const double> baseline,
                                         std::span<const double> variance, std::span<const std::uint32_t> zone);
FitReport llr_gaussian_unknown_population(std::span<const double> y, std::span<const std::uint32_t> zone);
FitReport llr_gaussian_unknown_expectation(std::span<const double> y, std::span<const std::uint32_t> zone);
FitReport llr_bernoulli_population(std::span<const double> y, std::span<const std::uint32_t> zone);
FitReport llr_bernoulli_expectation(std::span<const double> y, std::span<const std::uint32_t> zone);

/// Closed form for any spec without covariates, on a whole table.
FitReport llr_closed_form(const RegionTable& table, std::span<const std::uint32_t> zone, const ModelSpec& spec);

/// Mean of the outcomes outside the zone: the intercept the population-based
/// unknown-variance fit assigns to the zone's complement.
double intercept_estimate_gaussian(std::span<const double> y, std::span<const std::uint32_t> zone);

/// x log x with 0 log 0 = 0.
double xlogx(double x) noexcept;
/// x log(x / d) with 0 log(0 / d) = 0.
double xlog_ratio(double x, double d) noexcept;

}  // namespace scanreg
