#include "scanreg/inference.hpp"

#include <algorithm>
#include <cmath>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "scanreg/glm.hpp"

namespace scanreg {

namespace {

double logistic(double eta) noexcept {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

}  // namespace

NullModel::NullModel(const RegionTable& table, const ModelSpec& spec, const GlmOptions& glm)
    : spec_(spec), observed_(table.outcome().begin(), table.outcome().end()) {
  check_table_for(table, spec);
  const std::size_t n = table.size();
  const auto y = table.outcome();
  const auto g = table.baseline();
  mean_.assign(n, 0.0);
  sd_.assign(n, 0.0);

  if (spec.glm) {
    const GlmStatistic stat(table, spec, glm);
    const Eigen::VectorXd& coef = stat.null_fit().coef;
    const std::size_t lead = spec.has_intercept() ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i) {
      double eta = lead ? coef[0] : 0.0;
      for (std::size_t j = 0; j < table.covariate_count(); ++j) {
        eta += coef[static_cast<Eigen::Index>(lead + j)] * table.covariate(i, j);
      }
      switch (spec.family) {
        case Family::poisson: mean_[i] = g[i] * std::exp(eta); break;
        case Family::bernoulli: mean_[i] = logistic(eta); break;
        case Family::gaussian_fixed:
          mean_[i] = g[i] * (1.0 + eta);
          sd_[i] = std::sqrt(table.variance()[i]);
          break;
        case Family::gaussian_unknown:
          mean_[i] = eta;
          sd_[i] = std::sqrt(stat.null_fit().sigma2);
          break;
      }
    }
    return;
  }

  const bool population = spec.has_intercept();
  double sum = 0.0;
  for (double v : y) sum += v;
  const double nd = static_cast<double>(n);
  switch (spec.family) {
    case Family::poisson:
      if (population) {
        if (sum != std::floor(sum)) throw Error(ErrorCode::invalid_data, "Monte Carlo redistribution needs integer counts");
        if (sum == 0.0) throw Error(ErrorCode::zero_total, "no cases in any region");
        total_ = static_cast<std::uint64_t>(sum);
        cumulative_.resize(n);
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) cumulative_[i] = (acc += g[i]);
        for (double& c : cumulative_) c /= acc;
      } else {
        mean_.assign(g.begin(), g.end());
      }
      break;
    case Family::bernoulli:
      if (!population) mean_.assign(n, 0.5);
      break;
    case Family::gaussian_fixed: {
      const auto v = table.variance();
      double a = 1.0;
      if (population) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          num += y[i] * g[i] / v[i];
          den += g[i] * g[i] / v[i];
        }
        a = num / den;  // 1 + alpha0
      }
      for (std::size_t i = 0; i < n; ++i) {
        mean_[i] = g[i] * a;
        sd_[i] = std::sqrt(v[i]);
      }
      break;
    }
    case Family::gaussian_unknown: {
      const double center = population ? sum / nd : 0.0;
      double ss = 0.0;
      for (double v : y) ss += (v - center) * (v - center);
      mean_.assign(n, center);
      sd_.assign(n, std::sqrt(ss / nd));
      break;
    }
  }
}

std::vector<double> NullModel::draw(Engine& engine) const {
  const std::size_t n = observed_.size();
  std::vector<double> out(n, 0.0);
  const bool population = spec_.has_intercept();
  if (!spec_.glm && spec_.family == Family::poisson && population) {
    boost::random::uniform_01<double> u;
    for (std::uint64_t c = 0; c < total_; ++c) {
      const double r = u(engine);
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
      const std::size_t cell = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), n - 1);
      out[cell] += 1.0;
    }
    return out;
  }
  if (!spec_.glm && spec_.family == Family::bernoulli && population) {
    out = observed_;
    for (std::size_t i = n - 1; i > 0; --i) {
      boost::random::uniform_int_distribution<std::size_t> pick(0, i);
      std::swap(out[i], out[pick(engine)]);
    }
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    switch (spec_.family) {
      case Family::poisson:
        out[i] = mean_[i] > 0.0 ? static_cast<double>(boost::random::poisson_distribution<long, double>(mean_[i])(engine))
                                : 0.0;
        break;
      case Family::bernoulli:
        out[i] = boost::random::bernoulli_distribution<double>(mean_[i])(engine) ? 1.0 : 0.0;
        break;
      case Family::gaussian_fixed:
      case Family::gaussian_unknown:
        out[i] = sd_[i] > 0.0 ? boost::random::normal_distribution<double>(mean_[i], sd_[i])(engine) : mean_[i];
        break;
    }
  }
  return out;
}

double monte_carlo_p_value(double observed, std::span<const double> replicates) {
  std::size_t count = 0;
  for (double t : replicates) count += t >= observed ? 1 : 0;
  return static_cast<double>(1 + count) / static_cast<double>(replicates.size() + 1);
}

McResult mc_test(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec, const McOptions& options) {
  ScanOptions scan_options = options.scan;
  const ScanResult observed = scan(table, zones, spec, scan_options);
  return mc_test(table, zones, spec, observed, options);
}

McResult mc_test(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec, const ScanResult& observed,
                 const McOptions& options) {
  if (options.replicates < 1) throw Error(ErrorCode::invalid_argument, "at least one replicate is required");
  McResult result;
  result.replicates = options.replicates;
  result.seed = options.seed;
  result.observed_mlc = observed.mlc_id;
  result.observed_max_llr = observed.max_llr();
  result.replicate_max_llr.assign(options.replicates, 0.0);

  const NullModel null_model(table, spec, options.scan.glm);
  ScanOptions inner = options.scan;
  inner.threads = 1;
  inner.top = 0;
  const unsigned threads = options.scan.threads ? options.scan.threads : default_threads();
  parallel_for(options.replicates, threads, [&](std::size_t r) {
    Engine engine = make_stream(options.seed, r + 1);
    const RegionTable replicate = table.with_outcome(null_model.draw(engine));
    try {
      result.replicate_max_llr[r] = scan(replicate, zones, spec, inner).max_llr();
    } catch (const Error& e) {
      throw Error(e.code(), "replicate " + std::to_string(r + 1) + ": " + e.what());
    }
  });

  result.p_value = observed.mlc_id == 0 ? 1.0 : monte_carlo_p_value(result.observed_max_llr, result.replicate_max_llr);
  return result;
}

}  // namespace scanreg
