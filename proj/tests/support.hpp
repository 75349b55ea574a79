#pragma once

// Shared fixtures for the unit and acceptance tests: small tables, random
// instances per statistic, and a derivative-free likelihood maximizer that
// does not share code with the library's estimators.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "scanreg/model.hpp"
#include "scanreg/region_table.hpp"
#include "scanreg/zones.hpp"

namespace scanreg::testing {

inline RegionTable make_table(std::vector<double> y, std::vector<double> baseline = {},
                              std::vector<double> variance = {}, std::vector<double> covariates = {},
                              std::size_t covariate_count = 0) {
  RegionColumns c;
  for (std::size_t i = 0; i < y.size(); ++i) {
    c.ids.push_back("r" + std::to_string(i + 1));
    c.coords.push_back({static_cast<double>(i), 0.0});
  }
  c.outcome = std::move(y);
  c.baseline = std::move(baseline);
  c.variance = std::move(variance);
  c.covariates = std::move(covariates);
  c.covariate_count = covariate_count;
  for (std::size_t k = 0; k < covariate_count; ++k) c.covariate_names.push_back("cov_" + std::to_string(k + 1));
  return RegionTable::create(std::move(c));
}

/// Eight closed-form (family, approach) pairs in a fixed order.
inline std::vector<ModelSpec> closed_form_specs() {
  std::vector<ModelSpec> out;
  for (Family f : {Family::poisson, Family::gaussian_fixed, Family::gaussian_unknown, Family::bernoulli}) {
    for (Approach a : {Approach::population, Approach::expectation}) out.push_back({f, a, false});
  }
  return out;
}

struct Instance {
  std::vector<double> y, g, v;
  std::vector<std::uint32_t> zone;
};

/// Random data valid for `spec` with N in [n_min, n_max] and a random proper
/// zone. Counts are small so that boundary cases (empty inside or outside
/// totals) appear regularly.
inline Instance random_instance(const ModelSpec& spec, std::mt19937_64& rng, std::size_t n_min = 3,
                                std::size_t n_max = 30) {
  std::uniform_int_distribution<std::size_t> size(n_min, n_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t n = size(rng);
  Instance in;
  in.y.resize(n);
  in.g.assign(n, 1.0);
  in.v.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    switch (spec.family) {
      case Family::poisson:
        in.g[i] = 0.2 + 3.0 * unit(rng);
        in.y[i] = static_cast<double>(std::poisson_distribution<int>(in.g[i] * (0.5 + unit(rng)))(rng));
        break;
      case Family::gaussian_fixed:
        in.g[i] = 0.5 + 2.0 * unit(rng);
        in.v[i] = 0.2 + 2.0 * unit(rng);
        in.y[i] = in.g[i] * (1.0 + std::normal_distribution<double>(0.3, 1.0)(rng));
        break;
      case Family::gaussian_unknown:
        in.y[i] = std::normal_distribution<double>(1.0, 2.0)(rng);
        break;
      case Family::bernoulli:
        in.y[i] = unit(rng) < 0.4 ? 1.0 : 0.0;
        break;
    }
  }
  // Keep the instance inside the statistic's domain.
  if (spec.family == Family::poisson && std::accumulate(in.y.begin(), in.y.end(), 0.0) == 0.0) in.y[0] = 1.0;
  if (spec.family == Family::bernoulli && spec.has_intercept()) {
    in.y[0] = 1.0;
    in.y[1] = 0.0;
  }
  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t max_zone = spec.has_intercept() ? n - 1 : n;
  const std::size_t m = std::uniform_int_distribution<std::size_t>(1, max_zone)(rng);
  in.zone.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
  std::sort(in.zone.begin(), in.zone.end());
  return in;
}

inline RegionTable table_of(const Instance& in, const ModelSpec& spec) {
  return make_table(in.y, in.g, spec.family == Family::gaussian_fixed ? in.v : std::vector<double>{});
}

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi, double* argmax = nullptr) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double x = fc >= fd ? c : d;
  if (argmax) *argmax = x;
  return std::max(fc, fd);
}

/// Log-likelihood of (alpha, theta) written from the model definitions, with
/// the unknown Gaussian variance profiled out. Constants that cancel in the
/// ratio are dropped.
inline double model_loglik(const ModelSpec& spec, const Instance& in, double alpha, double theta) {
  std::vector<char> z(in.y.size(), 0);
  for (auto i : in.zone) z[i] = 1;
  double ll = 0.0, rss = 0.0;
  for (std::size_t i = 0; i < in.y.size(); ++i) {
    const double eta = alpha + (z[i] ? theta : 0.0);
    switch (spec.family) {
      case Family::poisson: {
        const double mu = in.g[i] * std::exp(eta);
        ll += (in.y[i] > 0 ? in.y[i] * std::log(mu) : 0.0) - mu;
        break;
      }
      case Family::gaussian_fixed: {
        const double r = in.y[i] - in.g[i] * (1.0 + eta);
        ll -= r * r / (2.0 * in.v[i]);
        break;
      }
      case Family::gaussian_unknown: {
        const double r = in.y[i] - eta;
        rss += r * r;
        break;
      }
      case Family::bernoulli:
        ll += in.y[i] * eta - (eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)));
        break;
    }
  }
  if (spec.family == Family::gaussian_unknown) {
    const double n = static_cast<double>(in.y.size());
    return -0.5 * n * std::log(rss / n);
  }
  return ll;
}

struct NumericFit {
  double llr = 0.0;
  double theta = 0.0;
};

/// llr and theta by nested golden-section search over a bounded box. Only
/// meaningful when the MLE is interior and inside the box.
inline NumericFit numeric_llr(const ModelSpec& spec, const Instance& in, double bound = 12.0) {
  const bool pop = spec.has_intercept();
  auto profile = [&](double theta) {
    if (!pop) return model_loglik(spec, in, 0.0, theta);
    return golden_max([&](double a) { return model_loglik(spec, in, a, theta); }, -bound, bound);
  };
  double null_ll = pop ? profile(0.0) : model_loglik(spec, in, 0.0, 0.0);
  NumericFit fit;
  const double alt_ll = golden_max(profile, -bound, bound, &fit.theta);
  fit.llr = std::max(0.0, alt_ll - null_ll);
  return fit;
}

}  // namespace scanreg::testing
