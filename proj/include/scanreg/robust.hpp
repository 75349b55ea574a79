#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "scanreg/region_table.hpp"

namespace scanreg {

struct RobustOptions {
  int max_iterations = 100;
  bool intercept = true;
};

struct RobustResult {
  std::vector<std::uint32_t> outliers;  // rows with a non-zero shift
  std::vector<double> theta;            // per-row mean shift
  double alpha = 0.0;
  std::vector<double> beta;
  double threshold = 0.0;               // sqrt(N * lambda)
  std::vector<double> objective;        // after every half-step, non-increasing
  int iterations = 0;
  bool converged = false;
};

/// Mean-shift regression with one shift per region and an l0 penalty:
///
///   minimize (1/N) sum (y_i - alpha - x_i' beta - theta_i)^2 + lambda ||theta||_0
///
/// by alternating hard thresholding of the residuals at sqrt(N lambda) with
/// least squares for (alpha, beta) on y - theta, until the support stops
/// changing. Uses the outcome and covariate columns of the table. A run that
/// reaches max_iterations returns its last iterate with converged = false.
RobustResult robust_mean_shift(const RegionTable& table, double lambda, const RobustOptions& options = {});

/// theta_i = r_i when r_i^2 > N lambda, else 0.
std::vector<double> hard_threshold(std::span<const double> residuals, double lambda);

/// Value of the penalized objective above for residuals r = y - alpha - x'beta.
double mean_shift_objective(std::span<const double> residuals, std::span<const double> theta, double lambda);

/// Profile of the objective over theta_i for one residual, times N:
/// min(a^2, tau^2) with tau^2 = N lambda.
double skipped_mean_loss(double a, double tau);

}  // namespace scanreg
