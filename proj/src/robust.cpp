#include "scanreg/robust.hpp"

#include <algorithm>
#include <cmath>

#include "scanreg/error.hpp"

namespace scanreg {

std::vector<double> hard_threshold(std::span<const double> residuals, double lambda) {
  const double cut = static_cast<double>(residuals.size()) * lambda;
  std::vector<double> theta(residuals.size(), 0.0);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (residuals[i] * residuals[i] > cut) theta[i] = residuals[i];
  }
  return theta;
}

double mean_shift_objective(std::span<const double> residuals, std::span<const double> theta, double lambda) {
  if (residuals.size() != theta.size()) throw Error(ErrorCode::invalid_argument, "residual and shift lengths differ");
  double ss = 0.0;
  double nonzero = 0.0;
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    const double d = residuals[i] - theta[i];
    ss += d * d;
    if (theta[i] != 0.0) nonzero += 1.0;
  }
  return ss / static_cast<double>(residuals.size()) + lambda * nonzero;
}

double skipped_mean_loss(double a, double tau) { return std::min(a * a, tau * tau); }

RobustResult robust_mean_shift(const RegionTable& table, double lambda, const RobustOptions& options) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_argument, "lambda must be positive");
  const auto n = static_cast<Eigen::Index>(table.size());
  const auto p = static_cast<Eigen::Index>(table.covariate_count());
  const Eigen::Index lead = options.intercept ? 1 : 0;
  Eigen::MatrixXd x(n, lead + p);
  if (lead) x.col(0).setOnes();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      x(i, lead + j) = table.covariate(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  if (x.cols() > 0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> check(x);
    check.setThreshold(1e-10);
    if (check.rank() < x.cols()) throw Error(ErrorCode::rank_deficient, "covariate design lacks full column rank");
  }
  const auto qr = x.colPivHouseholderQr();
  const Eigen::Map<const Eigen::VectorXd> y(table.outcome().data(), n);

  RobustResult out;
  out.threshold = std::sqrt(static_cast<double>(n) * lambda);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd coef = Eigen::VectorXd::Zero(x.cols());
  std::vector<double> resid(static_cast<std::size_t>(n));
  auto residuals = [&] {
    const Eigen::VectorXd r = x.cols() > 0 ? Eigen::VectorXd(y - x * coef) : Eigen::VectorXd(y);
    for (Eigen::Index i = 0; i < n; ++i) resid[static_cast<std::size_t>(i)] = r[i];
  };
  auto objective = [&] {
    return mean_shift_objective(resid, std::span<const double>(theta.data(), static_cast<std::size_t>(n)), lambda);
  };

  std::vector<char> support(static_cast<std::size_t>(n), 0);
  for (int it = 1; it <= options.max_iterations; ++it) {
    out.iterations = it;
    if (x.cols() > 0) coef = qr.solve(Eigen::VectorXd(y - theta));
    residuals();
    out.objective.push_back(objective());

    const std::vector<double> next = hard_threshold(resid, lambda);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      const char s = next[k] != 0.0 ? 1 : 0;
      changed = changed || s != support[k];
      support[k] = s;
      theta[i] = next[k];
    }
    out.objective.push_back(objective());
    if (!changed) {
      out.converged = true;
      break;
    }
  }

  out.theta.assign(theta.data(), theta.data() + n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (theta[i] != 0.0) out.outliers.push_back(static_cast<std::uint32_t>(i));
  }
  if (lead) out.alpha = coef[0];
  for (Eigen::Index j = lead; j < coef.size(); ++j) out.beta.push_back(coef[j]);
  return out;
}

}  // namespace scanreg
