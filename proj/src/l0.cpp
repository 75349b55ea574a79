#include "scanreg/l0.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>

#include "scanreg/closed_form.hpp"
#include "scanreg/glm.hpp"

namespace scanreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logit(double c, double n) noexcept {
  const double lc = c > 0.0 ? std::log(c) : -kInf;
  const double ln = n - c > 0.0 ? std::log(n - c) : -kInf;
  return lc - ln;
}

double clamp_gain(double gain, double scale) {
  if (std::isnan(gain)) throw Error(ErrorCode::internal_consistency, "log-likelihood gain is NaN");
  if (gain >= 0.0) return gain;
  if (gain >= -1e-9 * std::max(1.0, std::abs(scale))) return 0.0;
  throw Error(ErrorCode::internal_consistency, "model with a cluster fits worse than the null by " + std::to_string(-gain));
}

RegionTable without_covariates(const RegionTable& table) {
  if (table.covariate_count() == 0) return table;
  RegionColumns cols = table.columns();
  cols.covariates.clear();
  cols.covariate_count = 0;
  cols.covariate_names.clear();
  return RegionTable::create(std::move(cols));
}

bool better(double ll, double best_ll, std::size_t zones, std::size_t best_zones, std::size_t members,
            std::size_t best_members, const std::vector<std::size_t>& ids, const std::vector<std::size_t>& best_ids) {
  const double tol = std::isinf(best_ll) ? 0.0 : 1e-9 * std::max(1.0, std::abs(best_ll));
  if (ll > best_ll + tol) return true;
  if (ll < best_ll - tol || (std::isinf(best_ll) && ll != best_ll)) return false;
  if (zones != best_zones) return zones < best_zones;
  if (members != best_members) return members < best_members;
  return ids < best_ids;
}

}  // namespace

PartitionLikelihood::PartitionLikelihood(const RegionTable& table, const ModelSpec& spec)
    : spec_(spec), table_(&table) {
  check_table_for(table, spec);
  std::vector<std::uint32_t> all(table.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<std::uint32_t>(i);
  total_ = part(all);
}

PartitionLikelihood::Part PartitionLikelihood::part(std::span<const std::uint32_t> members) const {
  const auto y = table_->outcome();
  const auto g = table_->baseline();
  const auto v = table_->variance();
  Part p;
  for (std::uint32_t i : members) {
    p.n += 1.0;
    p.y += y[i];
    p.y2 += y[i] * y[i];
    switch (spec_.family) {
      case Family::poisson:
        p.g += g[i];
        p.log_terms += (y[i] > 0.0 ? y[i] * std::log(g[i]) : 0.0) - std::lgamma(y[i] + 1.0);
        break;
      case Family::gaussian_fixed:
        p.a += y[i] * g[i] / v[i];
        p.b += g[i] * g[i] / v[i];
        p.yy_over_v += y[i] * y[i] / v[i];
        p.log_terms -= 0.5 * std::log(2.0 * std::numbers::pi * v[i]);
        break;
      default:
        break;
    }
  }
  if (spec_.family == Family::gaussian_unknown && p.n > 0.0) {
    // Centered sum of squares, used as the free-group residual.
    const double mean = p.y / p.n;
    double ss = 0.0;
    for (std::uint32_t i : members) ss += (y[i] - mean) * (y[i] - mean);
    p.a = ss;
  }
  return p;
}

// Maximized log-likelihood contribution of one group. `free` fits the group's
// own level; otherwise the level is the nominal null. For the unknown-variance
// family this returns the residual sum of squares instead.
double PartitionLikelihood::group_loglik(const Part& p, bool free, double* level) const {
  switch (spec_.family) {
    case Family::poisson: {
      const double r = free ? p.y / p.g : 1.0;
      if (level) *level = std::log(r);
      return (free ? xlog_ratio(p.y, p.g) : 0.0) - r * p.g + p.log_terms;
    }
    case Family::gaussian_fixed: {
      const double m = free ? p.a / p.b : 1.0;
      if (level) *level = m;
      return p.log_terms - 0.5 * (p.yy_over_v - 2.0 * m * p.a + m * m * p.b);
    }
    case Family::bernoulli:
      if (level) *level = free ? logit(p.y, p.n) : 0.0;
      return free ? xlog_ratio(p.y, p.n) + xlog_ratio(p.n - p.y, p.n) : -p.n * std::numbers::ln2;
    case Family::gaussian_unknown:
      if (level) *level = free ? p.y / p.n : 0.0;
      return free ? p.a : p.y2;
  }
  return 0.0;
}

double PartitionLikelihood::loglik(std::span<const std::span<const std::uint32_t>> groups,
                                   std::vector<double>* theta) const {
  const std::size_t n = table_->size();
  std::vector<char> used(n, 0);
  for (const auto& grp : groups) {
    if (grp.empty()) throw Error(ErrorCode::degenerate_zone, "empty zone");
    for (std::uint32_t i : grp) {
      if (i >= n) throw Error(ErrorCode::invalid_argument, "zone member out of range");
      if (used[i]) throw Error(ErrorCode::invalid_argument, "groups of a partition overlap");
      used[i] = 1;
    }
  }
  std::vector<std::uint32_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) rest.push_back(static_cast<std::uint32_t>(i));
  }
  const bool population = spec_.has_intercept();
  if (population && rest.empty()) {
    throw Error(ErrorCode::degenerate_zone, "zones cover every region, outside part is empty");
  }

  double rest_level = 0.0;
  double total = rest.empty() ? 0.0 : group_loglik(part(rest), population, &rest_level);
  if (theta) theta->clear();
  for (const auto& grp : groups) {
    double level = 0.0;
    total += group_loglik(part(grp), true, &level);
    if (theta) {
      double base = rest_level;
      if (!population && spec_.family == Family::gaussian_fixed) base = 1.0;
      theta->push_back(level - base);
    }
  }
  if (spec_.family != Family::gaussian_unknown) return total;

  const double rss = total;
  if (rss <= 1e-12 * total_.y2) return kInf;
  const double nd = static_cast<double>(n);
  return -0.5 * nd * (std::log(2.0 * std::numbers::pi * rss / nd) + 1.0);
}

ScanResult solve_l0_single(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec,
                           const ScanOptions& options) {
  if (zones.size() == 0) throw Error(ErrorCode::invalid_argument, "zone set is empty");
  if (zones.index_size() != table.size()) throw Error(ErrorCode::invalid_argument, "zone set does not match the table");

  ScanResult result;
  result.model = spec;
  result.records.resize(zones.size());

  std::optional<PartitionLikelihood> partition;
  std::optional<ClosedFormStatistic> checks;
  std::optional<GlmStatistic> glm;
  double null_ll = 0.0;
  try {
    if (spec.glm) {
      glm.emplace(table, spec, options.glm);
      null_ll = glm->null_fit().loglik;
    } else {
      partition.emplace(table, spec);
      checks.emplace(ModelSpec{spec.family, spec.approach, false}, table.outcome(), table.baseline(), table.variance());
      null_ll = partition->null_loglik();
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::zero_total || e.code() == ErrorCode::degenerate_outcome) {
      throw Error(ErrorCode::empty_result, std::string("no zone can be evaluated: ") + e.what());
    }
    throw;
  }

  for (std::size_t k = 0; k < zones.size(); ++k) {
    const Zone& zone = zones.zones()[k];
    ZoneRecord& rec = result.records[k];
    rec.zone_id = zone.id;
    rec.size = zone.size();
    try {
      double ll = 0.0;
      if (glm) {
        const std::span<const std::uint32_t> one[] = {zone.members};
        const GlmFit fit = glm->fit_zones(one);
        ll = fit.loglik;
        rec.theta = fit.coef[static_cast<Eigen::Index>(glm->first_zone_column())];
      } else {
        std::string message;
        if (auto code = checks->check(checks->inside(zone.members), &message)) throw Error(*code, message);
        const std::span<const std::uint32_t> one[] = {zone.members};
        std::vector<double> theta;
        ll = partition->loglik(one, &theta);
        rec.theta = theta.front();
      }
      if (std::isinf(null_ll) && null_ll > 0.0) {
        rec.llr = 0.0;
      } else if (std::isinf(ll) && ll > 0.0) {
        rec.llr = kInf;
        rec.degenerate_variance = true;
      } else {
        rec.llr = clamp_gain(ll - null_ll, null_ll);
      }
      if (options.sidedness == Sidedness::hot) rec.filtered = !(rec.theta > 0.0);
      if (options.sidedness == Sidedness::cold) rec.filtered = !(rec.theta < 0.0);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::internal_consistency || e.code() == ErrorCode::invalid_argument) throw;
      rec.error = e.code();
    }
  }
  for (const auto& r : result.records) result.errored += r.error ? 1 : 0;
  if (result.errored == result.records.size()) {
    throw Error(ErrorCode::empty_result, "every zone is degenerate for model " + model_name(spec));
  }
  rank_zones(result, zones, options);
  return result;
}

L0Result solve_l0_multi(const RegionTable& table, const ZoneSet& zones, const ModelSpec& spec, const L0Config& config,
                        const GlmOptions& glm_options) {
  const std::size_t k_total = zones.size();
  if (config.budget < 1) throw Error(ErrorCode::invalid_argument, "cluster budget must be at least 1");
  if (config.budget > k_total) throw Error(ErrorCode::invalid_argument, "cluster budget exceeds the number of zones");
  if (config.lambda < 0.0) throw Error(ErrorCode::invalid_argument, "lambda must be non-negative");
  if (zones.index_size() != table.size()) throw Error(ErrorCode::invalid_argument, "zone set does not match the table");
  const bool disjoint = zones.pairwise_disjoint();
  if (config.overlap == Overlap::forbid && !disjoint) {
    throw Error(ErrorCode::invalid_argument, "zones overlap; pass overlap=allow for the experimental greedy search");
  }

  // Log-likelihood of a zone subset and its effects; nullopt when the subset
  // cannot be fitted (degenerate or rank-deficient).
  std::function<std::optional<double>(const std::vector<std::size_t>&, std::vector<double>*)> fit;
  std::optional<PartitionLikelihood> partition;
  std::optional<RegionTable> plain;
  std::optional<GlmStatistic> glm;
  L0Result result;
  result.experimental = config.overlap == Overlap::allow && !disjoint;

  auto spans_of = [&](const std::vector<std::size_t>& ids) {
    std::vector<std::span<const std::uint32_t>> groups;
    for (std::size_t id : ids) groups.emplace_back(zones.zone(id).members);
    return groups;
  };

  if (spec.glm || !disjoint) {
    ModelSpec g = spec;
    g.glm = true;
    if (!spec.glm) plain.emplace(without_covariates(table));
    glm.emplace(plain ? *plain : table, g, glm_options);
    result.null_loglik = glm->null_fit().loglik;
    fit = [&](const std::vector<std::size_t>& ids, std::vector<double>* theta) -> std::optional<double> {
      try {
        const auto groups = spans_of(ids);
        const GlmFit f = glm->fit_zones(groups);
        if (theta) {
          theta->clear();
          for (std::size_t j = 0; j < ids.size(); ++j) {
            theta->push_back(f.coef[static_cast<Eigen::Index>(glm->first_zone_column() + j)]);
          }
        }
        return f.loglik;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::internal_consistency) throw;
        return std::nullopt;
      }
    };
  } else {
    partition.emplace(table, spec);
    const ClosedFormStatistic checks(ModelSpec{spec.family, spec.approach, false}, table.outcome(), table.baseline(),
                                     table.variance());
    Sums probe;
    probe.n = 1.0;
    std::string message;
    if (auto code = checks.check(probe, &message); code && *code != ErrorCode::degenerate_zone) {
      throw Error(*code, message);
    }
    result.null_loglik = partition->null_loglik();
    fit = [&](const std::vector<std::size_t>& ids, std::vector<double>* theta) -> std::optional<double> {
      try {
        return partition->loglik(spans_of(ids), theta);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_zone) throw;
        return std::nullopt;
      }
    };
  }

  auto members_of = [&](const std::vector<std::size_t>& ids) {
    std::size_t m = 0;
    for (std::size_t id : ids) m += zones.zone(id).size();
    return m;
  };

  std::vector<std::size_t> best_ids;
  double best_ll = result.null_loglik;
  if (disjoint && k_total <= 20) {
    result.exact = true;
    std::vector<std::size_t> current;
    std::function<void(std::size_t)> extend = [&](std::size_t next) {
      if (!current.empty()) {
        if (auto ll = fit(current, nullptr);
            ll && better(*ll, best_ll, current.size(), best_ids.size(), members_of(current), members_of(best_ids),
                         current, best_ids)) {
          best_ll = *ll;
          best_ids = current;
        }
      }
      if (current.size() == config.budget) return;
      for (std::size_t id = next; id <= k_total; ++id) {
        current.push_back(id);
        extend(id + 1);
        current.pop_back();
      }
    };
    extend(1);
  } else {
    while (best_ids.size() < config.budget) {
      std::vector<std::size_t> step_ids;
      double step_ll = -kInf;
      for (std::size_t id = 1; id <= k_total; ++id) {
        if (std::find(best_ids.begin(), best_ids.end(), id) != best_ids.end()) continue;
        std::vector<std::size_t> trial = best_ids;
        trial.push_back(id);
        auto ll = fit(trial, nullptr);
        if (!ll) continue;
        if (step_ids.empty() || better(*ll, step_ll, 1, 1, zones.zone(id).size(), zones.zone(step_ids.back()).size(),
                                       {id}, {step_ids.back()})) {
          step_ll = *ll;
          step_ids = trial;
        }
      }
      if (step_ids.empty()) break;
      const double tol = std::isinf(best_ll) ? 0.0 : 1e-9 * std::max(1.0, std::abs(best_ll));
      if (!(step_ll > best_ll + tol)) break;
      best_ll = step_ll;
      best_ids = step_ids;
    }
  }

  result.loglik = best_ll;
  std::vector<double> theta;
  if (!best_ids.empty()) fit(best_ids, &theta);
  for (std::size_t j = 0; j < best_ids.size(); ++j) result.selected.push_back({best_ids[j], theta[j]});
  return result;
}

}  // namespace scanreg
