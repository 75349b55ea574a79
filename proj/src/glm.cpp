#include "scanreg/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "scanreg/error.hpp"

namespace scanreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

double log1p_exp(double eta) noexcept { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double logistic(double eta) noexcept {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

// pi (1 - pi) without cancellation for large |eta|.
double logistic_variance(double eta) noexcept {
  const double e = std::exp(-std::abs(eta));
  return e / ((1.0 + e) * (1.0 + e));
}

Eigen::VectorXd to_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

GlmProblem::GlmProblem(Family family, std::span<const double> y, std::span<const double> baseline,
                       std::span<const double> variance, GlmOptions options)
    : family_(family), y_(to_vector(y)), options_(options) {
  const auto n = y_.size();
  if (family_ == Family::poisson || family_ == Family::gaussian_fixed) {
    if (static_cast<Eigen::Index>(baseline.size()) != n) {
      throw Error(ErrorCode::invalid_argument, "baseline length differs from outcome");
    }
    baseline_ = to_vector(baseline);
  }
  switch (family_) {
    case Family::poisson:
      offset_ = baseline_.array().log().matrix();
      for (Eigen::Index i = 0; i < n; ++i) {
        constant_ -= std::lgamma(y_[i] + 1.0);
        saturated_ += xlogx(y_[i]) - y_[i];
      }
      saturated_ += constant_;
      break;
    case Family::gaussian_fixed:
      if (static_cast<Eigen::Index>(variance.size()) != n) {
        throw Error(ErrorCode::invalid_argument, "variance length differs from outcome");
      }
      variance_ = to_vector(variance);
      for (Eigen::Index i = 0; i < n; ++i) constant_ -= 0.5 * std::log(2.0 * std::numbers::pi * variance_[i]);
      saturated_ = constant_;
      break;
    case Family::bernoulli:
    case Family::gaussian_unknown:
      break;
  }
}

double GlmProblem::loglik(const Eigen::MatrixXd& design, const Eigen::VectorXd& coef) const {
  const Eigen::Index n = y_.size();
  Eigen::VectorXd eta = design.cols() > 0 ? Eigen::VectorXd(design * coef) : Eigen::VectorXd::Zero(n);
  double ll = 0.0;
  switch (family_) {
    case Family::poisson:
      eta += offset_;
      for (Eigen::Index i = 0; i < n; ++i) ll += y_[i] * eta[i] - std::exp(eta[i]);
      return ll + constant_;
    case Family::bernoulli:
      for (Eigen::Index i = 0; i < n; ++i) ll += y_[i] * eta[i] - log1p_exp(eta[i]);
      return ll;
    case Family::gaussian_fixed:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double r = y_[i] - baseline_[i] * (1.0 + eta[i]);
        ll -= 0.5 * r * r / variance_[i];
      }
      return ll + constant_;
    case Family::gaussian_unknown: {
      const double rss = (y_ - eta).squaredNorm();
      const double nd = static_cast<double>(n);
      return -0.5 * nd * (std::log(2.0 * std::numbers::pi * rss / nd) + 1.0);
    }
  }
  return ll;
}

GlmFit GlmProblem::fit(const Eigen::MatrixXd& design, const Eigen::VectorXd* start) const {
  if (design.rows() != y_.size()) throw Error(ErrorCode::invalid_argument, "design rows differ from outcome length");
  if (design.cols() > 0) {
    if (design.cols() > design.rows()) {
      throw Error(ErrorCode::rank_deficient, "design has more columns than rows");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < design.cols()) {
      throw Error(ErrorCode::rank_deficient, "design matrix has rank " + std::to_string(qr.rank()) + " < " +
                                                 std::to_string(design.cols()) + " columns");
    }
  }
  if (family_ == Family::gaussian_fixed || family_ == Family::gaussian_unknown) return fit_gaussian(design);
  return fit_iterative(design, start);
}

GlmFit GlmProblem::fit_gaussian(const Eigen::MatrixXd& design) const {
  GlmFit fit;
  const Eigen::Index n = y_.size();
  if (family_ == Family::gaussian_unknown) {
    Eigen::VectorXd resid = y_;
    if (design.cols() > 0) {
      fit.coef = design.colPivHouseholderQr().solve(y_);
      resid -= design * fit.coef;
    } else {
      fit.coef.resize(0);
    }
    const double rss = resid.squaredNorm();
    fit.sigma2 = rss / static_cast<double>(n);
    if (rss <= 1e-12 * y_.squaredNorm()) {
      fit.degenerate_variance = true;
      fit.loglik = kInf;
    } else {
      fit.loglik = loglik(design, fit.coef);
    }
    return fit;
  }
  // Weighted least squares on y - baseline = diag(baseline) X b.
  const Eigen::VectorXd w = variance_.array().rsqrt().matrix();
  if (design.cols() > 0) {
    const Eigen::MatrixXd a = (w.array() * baseline_.array()).matrix().asDiagonal() * design;
    const Eigen::VectorXd rhs = (w.array() * (y_ - baseline_).array()).matrix();
    fit.coef = a.colPivHouseholderQr().solve(rhs);
  } else {
    fit.coef.resize(0);
  }
  fit.loglik = loglik(design, fit.coef);
  return fit;
}

GlmFit GlmProblem::fit_iterative(const Eigen::MatrixXd& design, const Eigen::VectorXd* start) const {
  const Eigen::Index n = y_.size();
  const Eigen::Index p = design.cols();
  GlmFit fit;
  fit.coef = start && start->size() == p ? *start : Eigen::VectorXd::Zero(p);
  fit.loglik = loglik(design, fit.coef);
  if (!std::isfinite(fit.loglik)) {
    fit.coef.setZero();
    fit.loglik = loglik(design, fit.coef);
  }
  if (p == 0) return fit;

  Eigen::VectorXd mu(n);
  Eigen::VectorXd weight(n);
  for (int it = 1; it <= options_.max_iterations; ++it) {
    fit.iterations = it;
    Eigen::VectorXd eta = design * fit.coef;
    if (family_ == Family::poisson) eta += offset_;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (family_ == Family::poisson) {
        mu[i] = std::exp(eta[i]);
        weight[i] = mu[i];
      } else {
        mu[i] = logistic(eta[i]);
        weight[i] = logistic_variance(eta[i]);
      }
    }
    const Eigen::VectorXd score = design.transpose() * (y_ - mu);
    const Eigen::MatrixXd info = design.transpose() * weight.asDiagonal() * design;
    Eigen::VectorXd step = info.ldlt().solve(score);
    if (!step.allFinite()) return fit;  // flat likelihood along a diverging direction

    Eigen::VectorXd next = fit.coef + step;
    double next_ll = loglik(design, next);
    for (int halving = 0; !(next_ll >= fit.loglik) && halving < 50; ++halving) {
      step *= 0.5;
      next = fit.coef + step;
      next_ll = loglik(design, next);
    }
    if (!(next_ll >= fit.loglik)) return fit;  // no ascent left at double precision

    const double dev_old = deviance(fit.loglik);
    const double dev_new = deviance(next_ll);
    fit.coef = next;
    fit.loglik = next_ll;
    const double change = std::abs(dev_new - dev_old);
    const double floor = std::max(options_.absolute_tolerance, 16.0 * kEps * std::abs(next_ll));
    if (change / (std::abs(dev_new) + 0.1) < options_.tolerance && change < floor) return fit;
  }
  throw Error(ErrorCode::non_convergence,
              "IRLS did not converge in " + std::to_string(options_.max_iterations) + " iterations");
}

GlmStatistic::GlmStatistic(const RegionTable& table, const ModelSpec& spec, GlmOptions options)
    : spec_(spec),
      n_(table.size()),
      problem_(spec.family, table.outcome(), table.baseline(), table.variance(), options) {
  check_table_for(table, spec_);
  const auto p = static_cast<Eigen::Index>(table.covariate_count());
  covariates_.resize(static_cast<Eigen::Index>(n_), p);
  for (std::size_t i = 0; i < n_; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) covariates_(static_cast<Eigen::Index>(i), j) = table.covariate(i, static_cast<std::size_t>(j));
  }
  for (double v : table.outcome()) total_outcome_ += v;
  if (spec_.has_intercept()) {
    if (spec_.family == Family::poisson && total_outcome_ == 0.0) {
      throw Error(ErrorCode::zero_total, "no cases in any region");
    }
    if (spec_.family == Family::bernoulli && (total_outcome_ == 0.0 || total_outcome_ == static_cast<double>(n_))) {
      throw Error(ErrorCode::degenerate_outcome, "outcome is constant over all regions");
    }
  }
  null_ = problem_.fit(design({}));
}

Eigen::MatrixXd GlmStatistic::design(std::span<const std::span<const std::uint32_t>> zones) const {
  const Eigen::Index n = static_cast<Eigen::Index>(n_);
  const Eigen::Index lead = spec_.has_intercept() ? 1 : 0;
  const Eigen::Index k = static_cast<Eigen::Index>(zones.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, lead + k + covariates_.cols());
  if (lead) x.col(0).setOnes();
  for (Eigen::Index z = 0; z < k; ++z) {
    for (std::uint32_t i : zones[static_cast<std::size_t>(z)]) x(static_cast<Eigen::Index>(i), lead + z) = 1.0;
  }
  if (covariates_.cols() > 0) x.rightCols(covariates_.cols()) = covariates_;
  return x;
}

void GlmStatistic::check_zone(std::span<const std::uint32_t> members) const {
  if (members.empty()) throw Error(ErrorCode::degenerate_zone, "empty zone");
  for (std::uint32_t i : members) {
    if (i >= n_) throw Error(ErrorCode::invalid_argument, "zone member out of range");
  }
  if (spec_.has_intercept() && members.size() >= n_) {
    throw Error(ErrorCode::degenerate_zone, "zone covers every region, outside part is empty");
  }
}

GlmFit GlmStatistic::fit_zones(std::span<const std::span<const std::uint32_t>> zones) const {
  for (const auto& z : zones) check_zone(z);
  const Eigen::MatrixXd x = design(zones);
  const Eigen::Index lead = spec_.has_intercept() ? 1 : 0;
  const Eigen::Index k = static_cast<Eigen::Index>(zones.size());
  Eigen::VectorXd start = Eigen::VectorXd::Zero(x.cols());
  if (lead) start[0] = null_.coef[0];
  if (covariates_.cols() > 0) start.tail(covariates_.cols()) = null_.coef.tail(covariates_.cols());
  (void)k;
  return problem_.fit(x, &start);
}

FitReport GlmStatistic::evaluate(std::span<const std::uint32_t> members) const {
  const std::span<const std::uint32_t> one[] = {members};
  const GlmFit alt = fit_zones(one);
  const Eigen::Index lead = spec_.has_intercept() ? 1 : 0;

  FitReport r;
  r.theta = alt.coef[lead];
  if (lead) r.alpha = alt.coef[0];
  for (Eigen::Index j = lead + 1; j < alt.coef.size(); ++j) r.beta.push_back(alt.coef[j]);
  if (spec_.family == Family::gaussian_unknown) r.sigma2 = alt.sigma2;

  if (null_.degenerate_variance) {
    r.llr = 0.0;
    return r;
  }
  if (alt.degenerate_variance) {
    r.llr = kInf;
    r.degenerate_variance = true;
    return r;
  }
  const double llr = alt.loglik - null_.loglik;
  if (llr < 0.0) {
    if (llr < -1e-9 * std::max(1.0, std::abs(null_.loglik))) {
      throw Error(ErrorCode::internal_consistency,
                  "alternative fit below the null fit by " + std::to_string(-llr));
    }
    r.llr = 0.0;
  } else {
    r.llr = llr;
  }
  return r;
}

FitReport llr_glm(const RegionTable& table, std::span<const std::uint32_t> zone, const ModelSpec& spec,
                  GlmOptions options) {
  return GlmStatistic(table, spec, options).evaluate(zone);
}

}  // namespace scanreg
