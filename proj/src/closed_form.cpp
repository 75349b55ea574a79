#include "scanreg/closed_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scanreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rounding in the sums can push an exactly-zero statistic slightly negative.
double finish(double llr, double scale) {
  if (llr >= 0.0) return llr;
  if (llr >= -1e-9 * std::max(1.0, scale)) return 0.0;
  throw Error(ErrorCode::internal_consistency, "negative log-likelihood ratio " + std::to_string(llr));
}

double safe_log(double x) noexcept { return x > 0.0 ? std::log(x) : -kInf; }

double log_odds(double cases, double n) noexcept { return safe_log(cases) - safe_log(n - cases); }

}  // namespace

double xlogx(double x) noexcept { return x > 0.0 ? x * std::log(x) : 0.0; }

double xlog_ratio(double x, double d) noexcept { return x > 0.0 ? x * std::log(x / d) : 0.0; }

Sums& Sums::operator+=(const Sums& o) noexcept {
  n += o.n;
  y += o.y;
  yc += o.yc;
  y2 += o.y2;
  g += o.g;
  a += o.a;
  b += o.b;
  return *this;
}

Sums operator-(Sums l, const Sums& r) noexcept {
  l.n -= r.n;
  l.y -= r.y;
  l.yc -= r.yc;
  l.y2 -= r.y2;
  l.g -= r.g;
  l.a -= r.a;
  l.b -= r.b;
  return l;
}

ClosedFormStatistic::ClosedFormStatistic(ModelSpec spec, std::span<const double> y, std::span<const double> baseline,
                                         std::span<const double> variance)
    : spec_(spec), y_(y), g_(baseline), v_(variance) {
  const std::size_t n = y_.size();
  if (n < 1) throw Error(ErrorCode::invalid_argument, "empty outcome vector");
  const bool needs_baseline = spec_.family == Family::poisson || spec_.family == Family::gaussian_fixed;
  if (needs_baseline && g_.size() != n) throw Error(ErrorCode::invalid_argument, "baseline length differs from outcome");
  if (spec_.family == Family::gaussian_fixed && v_.size() != n) {
    throw Error(ErrorCode::invalid_argument, "variance length differs from outcome");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::string row = ", row " + std::to_string(i + 1);
    if (!std::isfinite(y_[i])) throw Error(ErrorCode::invalid_data, "non-finite outcome" + row);
    switch (spec_.family) {
      case Family::poisson:
        if (!(g_[i] > 0.0)) throw Error(ErrorCode::invalid_data, "non-positive baseline" + row);
        if (y_[i] < 0.0) throw Error(ErrorCode::invalid_data, "negative count" + row);
        break;
      case Family::gaussian_fixed:
        if (g_[i] == 0.0 || !std::isfinite(g_[i])) throw Error(ErrorCode::invalid_data, "zero baseline" + row);
        if (!(v_[i] > 0.0)) throw Error(ErrorCode::invalid_data, "non-positive variance" + row);
        break;
      case Family::bernoulli:
        if (y_[i] != 0.0 && y_[i] != 1.0) throw Error(ErrorCode::invalid_data, "Bernoulli outcome not in {0,1}" + row);
        break;
      case Family::gaussian_unknown:
        break;
    }
  }
  double sum = 0.0;
  for (double v : y_) sum += v;
  mean_ = sum / static_cast<double>(n);
  for (double v : y_) sst_ += (v - mean_) * (v - mean_);

  std::vector<std::uint32_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<std::uint32_t>(i);
  total_ = inside(all);
  total_.yc = 0.0;
}

Sums ClosedFormStatistic::inside(std::span<const std::uint32_t> members) const noexcept {
  Sums s;
  const bool baseline = !g_.empty();
  const bool variance = !v_.empty();
  for (std::uint32_t i : members) {
    const double yi = y_[i];
    s.n += 1.0;
    s.y += yi;
    s.yc += yi - mean_;
    s.y2 += yi * yi;
    if (baseline) {
      const double gi = g_[i];
      s.g += gi;
      if (variance) {
        s.a += yi * gi / v_[i];
        s.b += gi * gi / v_[i];
      }
    }
  }
  return s;
}

std::optional<ErrorCode> ClosedFormStatistic::check(const Sums& in, std::string* message) const {
  auto fail = [&](ErrorCode code, const char* what) {
    if (message) *message = what;
    return std::optional<ErrorCode>(code);
  };
  const bool population = spec_.has_intercept();
  if (spec_.family == Family::poisson && population && total_.y == 0.0) {
    return fail(ErrorCode::zero_total, "no cases in any region");
  }
  if (spec_.family == Family::bernoulli && population && (total_.y == 0.0 || total_.y == total_.n)) {
    return fail(ErrorCode::degenerate_outcome, "outcome is constant over all regions");
  }
  if (in.n < 1.0) return fail(ErrorCode::degenerate_zone, "empty zone");
  if (population && in.n >= total_.n) {
    return fail(ErrorCode::degenerate_zone, "zone covers every region, outside part is empty");
  }
  return std::nullopt;
}

FitReport ClosedFormStatistic::evaluate(std::span<const std::uint32_t> members) const {
  return evaluate_sums(inside(members));
}

FitReport ClosedFormStatistic::evaluate_sums(const Sums& in) const {
  std::string message;
  if (auto code = check(in, &message)) throw Error(*code, message);
  switch (spec_.family) {
    case Family::poisson: return poisson(in);
    case Family::gaussian_fixed: return gaussian_fixed(in);
    case Family::gaussian_unknown: return gaussian_unknown(in);
    case Family::bernoulli: return bernoulli(in);
  }
  throw Error(ErrorCode::internal_consistency, "unknown family");
}

FitReport ClosedFormStatistic::poisson(const Sums& in) const {
  FitReport r;
  if (spec_.has_intercept()) {
    const Sums out = total_ - in;
    const double t_in = xlog_ratio(in.y, in.g);
    const double t_out = xlog_ratio(out.y, out.g);
    const double t_all = xlog_ratio(total_.y, total_.g);
    r.llr = finish(t_in + t_out - t_all, std::abs(t_in) + std::abs(t_out) + std::abs(t_all));
    r.alpha = safe_log(out.y / out.g);
    r.theta = safe_log(in.y / in.g) - *r.alpha;
  } else {
    const double t_in = xlog_ratio(in.y, in.g);
    r.llr = finish(t_in + in.g - in.y, std::abs(t_in) + in.g + in.y);
    r.theta = safe_log(in.y / in.g);
  }
  return r;
}

FitReport ClosedFormStatistic::gaussian_fixed(const Sums& in) const {
  // Same values as the sum-of-squares expressions, written as a single
  // non-negative product.
  FitReport r;
  if (spec_.has_intercept()) {
    const Sums out = total_ - in;
    const double ratio_in = in.a / in.b;
    const double ratio_out = out.a / out.b;
    const double diff = ratio_in - ratio_out;
    r.llr = 0.5 * in.b * out.b / total_.b * diff * diff;
    r.theta = diff;
    r.alpha = ratio_out - 1.0;
  } else {
    r.theta = in.a / in.b - 1.0;
    r.llr = 0.5 * in.b * r.theta * r.theta;
  }
  return r;
}

FitReport ClosedFormStatistic::gaussian_unknown(const Sums& in) const {
  FitReport r;
  const double n = total_.n;
  const double floor = 1e-12 * total_.y2;
  double null_rss = 0.0;
  double alt_rss = 0.0;
  if (spec_.has_intercept()) {
    const double n_out = n - in.n;
    null_rss = sst_;
    alt_rss = sst_ - in.yc * in.yc * n / (in.n * n_out);
    const double mean_in = mean_ + in.yc / in.n;
    const double mean_out = mean_ - in.yc / n_out;
    r.alpha = mean_out;
    r.theta = mean_in - mean_out;
  } else {
    null_rss = total_.y2;
    alt_rss = (total_.y2 - in.y2) + (in.y2 - in.y * in.y / in.n);
    r.theta = in.y / in.n;
  }
  if (null_rss <= floor) {
    // The null model already fits exactly; theta cannot improve it.
    r.llr = 0.0;
    r.sigma2 = std::max(alt_rss, 0.0) / n;
    return r;
  }
  if (alt_rss <= floor) {
    r.llr = kInf;
    r.degenerate_variance = true;
    r.sigma2 = std::max(alt_rss, 0.0) / n;
    return r;
  }
  r.sigma2 = alt_rss / n;
  r.llr = finish(0.5 * n * std::log(null_rss / alt_rss), 1.0);
  return r;
}

FitReport ClosedFormStatistic::bernoulli(const Sums& in) const {
  FitReport r;
  const double c_in = in.y;
  const double n_in = in.n;
  const double t_in = xlog_ratio(c_in, n_in) + xlog_ratio(n_in - c_in, n_in);
  if (spec_.has_intercept()) {
    const double c_out = total_.y - c_in;
    const double n_out = total_.n - n_in;
    const double t_out = xlog_ratio(c_out, n_out) + xlog_ratio(n_out - c_out, n_out);
    const double t_all = xlog_ratio(total_.y, total_.n) + xlog_ratio(total_.n - total_.y, total_.n);
    r.llr = finish(t_in + t_out - t_all, std::abs(t_in) + std::abs(t_out) + std::abs(t_all));
    r.alpha = log_odds(c_out, n_out);
    r.theta = log_odds(c_in, n_in) - *r.alpha;
  } else {
    r.llr = finish(t_in + n_in * std::log(2.0), std::abs(t_in) + n_in);
    r.theta = log_odds(c_in, n_in);
  }
  return r;
}

namespace {

FitReport strict(const ClosedFormStatistic& stat, std::span<const std::uint32_t> zone) {
  for (std::uint32_t i : zone) {
    if (i >= stat.size()) throw Error(ErrorCode::invalid_argument, "zone member out of range");
  }
  std::vector<std::uint32_t> sorted(zone.begin(), zone.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorCode::invalid_argument, "duplicate zone member");
  }
  FitReport r = stat.evaluate(zone);
  if (r.degenerate_variance) {
    throw Error(ErrorCode::degenerate_variance, "residual variance at the numeric floor: the zone separates the data exactly");
  }
  return r;
}

}  // namespace

FitReport llr_poisson_population(std::span<const double> y, std::span<const double> baseline,
                                 std::span<const std::uint32_t> zone) {
  return strict(ClosedFormStatistic({Family::poisson, Approach::population}, y, baseline), zone);
}

FitReport llr_poisson_expectation(std::span<const double> y, std::span<const double> baseline,
                                  std::span<const std::uint32_t> zone) {
  return strict(ClosedFormStatistic({Family::poisson, Approach::expectation}, y, baseline), zone);
}

FitReport llr_gaussian_fixed_population(std::span<const double> y, std::span<const double> baseline,
                                        std::span<const double> variance, std::span<const std::uint32_t> zone) {
  return strict(ClosedFormStatistic({Family::gaussian_fixed, Approach::population}, y, baseline, variance), zone);
}

FitReport llr_gaussian_fixed_expectation(std::span<const double> y, std::span<const double> baseline,
                                         std::span<const double> variance, std::span<const std::uint32_t> zone) {
  return strict(ClosedFormStatistic({Family::gaussian_fixed, Approach::expectation}, y, baseline, variance), zone);
}

FitReport llr_gaussian_unknown_population(std::span<const double> y, std::span<const std::uint32_t> zone) {
  if (y.size() < 3) throw Error(ErrorCode::invalid_argument, "population-based unknown-variance statistic needs N >= 3");
  return strict(ClosedFormStatistic({Family::gaussian_unknown, Approach::population}, y, {}), zone);
}

FitReport llr_gaussian_unknown_expectation(std::span<const double> y, std::span<const std::uint32_t> zone) {
  return strict(ClosedFormStatistic({Family::gaussian_unknown, Approach::expectation}, y, {}), zone);
}

FitReport llr_bernoulli_population(std::span<const double> y, std::span<const std::uint32_t> zone) {
  return strict(ClosedFormStatistic({Family::bernoulli, Approach::population}, y, {}), zone);
}

FitReport llr_bernoulli_expectation(std::span<const double> y, std::span<const std::uint32_t> zone) {
  return strict(ClosedFormStatistic({Family::bernoulli, Approach::expectation}, y, {}), zone);
}

FitReport llr_closed_form(const RegionTable& table, std::span<const std::uint32_t> zone, const ModelSpec& spec) {
  ModelSpec closed = spec;
  closed.glm = false;
  return strict(ClosedFormStatistic(closed, table.outcome(), table.baseline(), table.variance()), zone);
}

double intercept_estimate_gaussian(std::span<const double> y, std::span<const std::uint32_t> zone) {
  std::vector<char> in(y.size(), 0);
  for (std::uint32_t i : zone) {
    if (i >= y.size()) throw Error(ErrorCode::invalid_argument, "zone member out of range");
    in[i] = 1;
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!in[i]) {
      sum += y[i];
      ++count;
    }
  }
  if (count == 0) throw Error(ErrorCode::degenerate_zone, "zone covers every region, no outside mean");
  return sum / static_cast<double>(count);
}

}  // namespace scanreg
