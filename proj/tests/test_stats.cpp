#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "scanreg/closed_form.hpp"
#include "scanreg/error.hpp"
#include "scanreg/glm.hpp"
#include "support.hpp"

using namespace scanreg;
using testing::Instance;
using testing::make_table;

namespace {

using Members = std::vector<std::uint32_t>;

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::internal_consistency;
}

/// Entry point for one closed-form statistic by spec.
FitReport closed(const ModelSpec& spec, const Instance& in) {
  const std::span<const std::uint32_t> z = in.zone;
  switch (spec.family) {
    case Family::poisson:
      return spec.has_intercept() ? llr_poisson_population(in.y, in.g, z) : llr_poisson_expectation(in.y, in.g, z);
    case Family::gaussian_fixed:
      return spec.has_intercept() ? llr_gaussian_fixed_population(in.y, in.g, in.v, z)
                                  : llr_gaussian_fixed_expectation(in.y, in.g, in.v, z);
    case Family::gaussian_unknown:
      return spec.has_intercept() ? llr_gaussian_unknown_population(in.y, z) : llr_gaussian_unknown_expectation(in.y, z);
    case Family::bernoulli:
      return spec.has_intercept() ? llr_bernoulli_population(in.y, z) : llr_bernoulli_expectation(in.y, z);
  }
  return {};
}

Instance inst(std::vector<double> y, std::vector<std::uint32_t> zone, std::vector<double> g = {},
              std::vector<double> v = {}) {
  Instance in;
  in.g = g.empty() ? std::vector<double>(y.size(), 1.0) : std::move(g);
  in.v = v.empty() ? std::vector<double>(y.size(), 1.0) : std::move(v);
  in.y = std::move(y);
  in.zone = std::move(zone);
  return in;
}

ModelSpec spec_of(Family f, Approach a) { return {f, a, false}; }

constexpr Approach pop = Approach::population;
constexpr Approach exq = Approach::expectation;

/// Whether the MLE is finite: every group that carries its own parameter has
/// data on both sides of the boundary.
bool interior(const ModelSpec& spec, const Instance& in) {
  std::vector<char> z(in.y.size(), 0);
  for (auto i : in.zone) z[i] = 1;
  double yin = 0, yout = 0, nin = 0, nout = 0;
  for (std::size_t i = 0; i < in.y.size(); ++i) {
    (z[i] ? yin : yout) += in.y[i];
    (z[i] ? nin : nout) += 1;
  }
  if (spec.family == Family::poisson) return yin > 0 && (!spec.has_intercept() || yout > 0);
  if (spec.family == Family::bernoulli) {
    return yin > 0 && yin < nin && (!spec.has_intercept() || (yout > 0 && yout < nout));
  }
  return true;
}

}  // namespace

TEST_SUITE("stats") {
  TEST_CASE("worked examples") {
    struct Case {
      ModelSpec spec;
      Instance in;
      double llr;
    };
    const std::vector<Case> cases{
        {spec_of(Family::poisson, pop), inst({3, 1, 2}, {0}, {1, 1, 2}), 3 * std::log(3.0) - 6 * std::log(1.5)},
        {spec_of(Family::poisson, exq), inst({4, 1}, {0}, {2, 1}), 4 * std::log(2.0) - 2},
        {spec_of(Family::gaussian_fixed, pop), inst({3, 1}, {0}), 1.0},
        {spec_of(Family::gaussian_fixed, exq), inst({3, 0}, {0}), 2.0},
        {spec_of(Family::gaussian_unknown, pop), inst({3, 1, 0, 0}, {0, 1}), 2 * std::log(3.0)},
        {spec_of(Family::gaussian_unknown, exq), inst({3, 1, 0, 0}, {0, 1}), 2 * std::log(5.0)},
        {spec_of(Family::bernoulli, pop), inst({1, 1, 0, 0}, {0, 1}), 4 * std::log(2.0)},
        {spec_of(Family::bernoulli, exq), inst({1, 1, 0}, {0, 1}), 2 * std::log(2.0)},
    };
    for (const auto& c : cases) {
      INFO(model_name(c.spec));
      const FitReport r = closed(c.spec, c.in);
      CHECK(r.llr == doctest::Approx(c.llr).epsilon(1e-12));
      const RegionTable t = testing::table_of(c.in, c.spec);
      CHECK(llr_closed_form(t, c.in.zone, c.spec).llr == doctest::Approx(c.llr).epsilon(1e-12));
    }
    CHECK(3 * std::log(3.0) - 6 * std::log(1.5) == doctest::Approx(0.86305).epsilon(1e-5));
  }

  TEST_CASE("worked examples against the numeric maximizer") {
    // Finite optima only: the separable Gaussian and Bernoulli examples above
    // have MLEs at infinity or an exact fit.
    const std::vector<std::pair<ModelSpec, Instance>> cases{
        {spec_of(Family::poisson, pop), inst({3, 1, 2}, {0}, {1, 1, 2})},
        {spec_of(Family::poisson, exq), inst({4, 1}, {0}, {2, 1})},
        {spec_of(Family::gaussian_fixed, pop), inst({3, 1}, {0})},
        {spec_of(Family::gaussian_fixed, exq), inst({3, 0}, {0})},
        {spec_of(Family::gaussian_unknown, pop), inst({3, 1, 0, 0}, {0, 1})},
        {spec_of(Family::gaussian_unknown, exq), inst({3, 1, 0, 0}, {0, 1})},
    };
    for (const auto& [spec, in] : cases) {
      INFO(model_name(spec));
      const auto num = testing::numeric_llr(spec, in);
      const FitReport r = closed(spec, in);
      CHECK(r.llr == doctest::Approx(num.llr).epsilon(1e-7));
      CHECK(r.theta == doctest::Approx(num.theta).epsilon(1e-6));
    }
  }

  TEST_CASE("no signal gives zero") {
    CHECK(llr_poisson_population(std::vector<double>{2, 4, 6}, std::vector<double>{1, 2, 3}, Members{0}).llr == 0.0);
    CHECK(llr_poisson_expectation(std::vector<double>{2, 5}, std::vector<double>{2, 1}, Members{0}).llr == 0.0);
    CHECK(llr_gaussian_fixed_population(std::vector<double>{2, 4, 6}, std::vector<double>{1, 2, 3},
                                        std::vector<double>{1, 1, 2}, Members{1})
              .llr == doctest::Approx(0.0));
    CHECK(llr_gaussian_fixed_expectation(std::vector<double>{1, 7}, std::vector<double>{1, 2},
                                         std::vector<double>{1, 1}, Members{0})
              .llr == 0.0);
    CHECK(llr_gaussian_unknown_population(std::vector<double>{2, 0, 1, 1}, Members{0, 1}).llr == doctest::Approx(0.0));
    CHECK(llr_gaussian_unknown_expectation(std::vector<double>{1, -1, 3, 2}, Members{0, 1}).llr == 0.0);
    CHECK(llr_bernoulli_population(std::vector<double>{1, 0, 1, 0}, Members{0, 1}).llr == doctest::Approx(0.0));
    CHECK(llr_bernoulli_expectation(std::vector<double>{1, 0, 1}, Members{0, 1}).llr == 0.0);
  }

  TEST_CASE("intercept estimate is the outside mean") {
    CHECK(intercept_estimate_gaussian(std::vector<double>{5, 5, 0, 0}, Members{0, 1}) == 0.0);
    CHECK(intercept_estimate_gaussian(std::vector<double>{3, 1, 0, 0}, Members{0, 1}) == 0.0);
    CHECK(intercept_estimate_gaussian(std::vector<double>{0, 0, 1, 3}, Members{0, 1}) == 2.0);
    CHECK(code_of([] { intercept_estimate_gaussian(std::vector<double>{1, 2}, Members{0, 1}); }) ==
          ErrorCode::degenerate_zone);
  }

  TEST_CASE("fitted theta matches its formula and the numeric argmax") {
    std::mt19937_64 rng(17);
    for (const ModelSpec& spec : testing::closed_form_specs()) {
      INFO(model_name(spec));
      int checked = 0;
      for (int rep = 0; rep < 400 && checked < 40; ++rep) {
        const Instance in = testing::random_instance(spec, rng, 3, 12);
        if (!interior(spec, in)) continue;
        FitReport r;
        try {
          r = closed(spec, in);
        } catch (const Error&) {
          continue;
        }
        const auto num = testing::numeric_llr(spec, in, 15.0);
        if (std::abs(num.theta) > 14.0) continue;
        CHECK(r.theta == doctest::Approx(num.theta).epsilon(1e-6).scale(1.0));
        CHECK(r.llr == doctest::Approx(num.llr).epsilon(1e-7).scale(1.0));
        ++checked;
      }
      CHECK(checked >= 20);
    }
    // Explicit expressions for the Poisson family.
    const FitReport p = llr_poisson_population(std::vector<double>{3, 1, 2}, std::vector<double>{1, 1, 2}, Members{0});
    CHECK(p.theta == doctest::Approx(std::log(3.0 / (3.0 / 3.0))));
    const FitReport e = llr_poisson_expectation(std::vector<double>{4, 1}, std::vector<double>{2, 1}, Members{0});
    CHECK(e.theta == doctest::Approx(std::log(2.0)));
    const FitReport u = llr_gaussian_unknown_population(std::vector<double>{3, 1, 0, 0}, Members{0, 1});
    CHECK(u.theta == doctest::Approx(2.0));
    CHECK(*u.alpha == doctest::Approx(0.0));
  }

  TEST_CASE("llr is non-negative and finite on random instances") {
    std::mt19937_64 rng(23);
    for (const ModelSpec& spec : testing::closed_form_specs()) {
      for (int rep = 0; rep < 300; ++rep) {
        const Instance in = testing::random_instance(spec, rng);
        try {
          const FitReport r = closed(spec, in);
          CHECK(r.llr >= 0.0);
          CHECK_FALSE(std::isnan(r.llr));
        } catch (const Error& e) {
          CHECK(e.code() == ErrorCode::degenerate_variance);
        }
      }
    }
  }

  TEST_CASE("empty inside or outside counts give finite values") {
    const std::vector<double> g{1, 2, 1, 1};
    CHECK(std::isfinite(llr_poisson_population(std::vector<double>{0, 0, 3, 1}, g, Members{0, 1}).llr));
    CHECK(std::isfinite(llr_poisson_population(std::vector<double>{2, 1, 0, 0}, g, Members{0, 1}).llr));
    CHECK(std::isfinite(llr_poisson_expectation(std::vector<double>{0, 0, 3, 1}, g, Members{0, 1}).llr));
    CHECK(std::isfinite(llr_bernoulli_population(std::vector<double>{1, 1, 0, 0}, Members{0, 1}).llr));
    CHECK(std::isfinite(llr_bernoulli_expectation(std::vector<double>{0, 0, 0}, Members{0, 1, 2}).llr));
    CHECK(xlogx(0.0) == 0.0);
    CHECK(xlog_ratio(0.0, 0.0) == 0.0);
    const FitReport empty = llr_poisson_population(std::vector<double>{0, 0, 3, 1}, g, Members{0, 1});
    CHECK(std::isinf(empty.theta));
    CHECK(empty.theta < 0);
  }

  TEST_CASE("degenerate inputs") {
    const std::vector<double> y{1, 2, 3};
    const std::vector<double> g{1, 1, 1};
    CHECK(code_of([&] { llr_poisson_population(y, g, Members{0, 1, 2}); }) == ErrorCode::degenerate_zone);
    CHECK(code_of([&] { llr_poisson_population(std::vector<double>{0, 0, 0}, g, Members{0}); }) ==
          ErrorCode::zero_total);
    CHECK(code_of([&] { llr_bernoulli_population(std::vector<double>{1, 1, 1}, Members{0}); }) ==
          ErrorCode::degenerate_outcome);
    CHECK(code_of([&] { llr_bernoulli_population(std::vector<double>{1, 0, 1}, Members{0, 1, 2}); }) ==
          ErrorCode::degenerate_zone);
    CHECK(code_of([&] { llr_poisson_population(y, std::vector<double>{1, 0, 1}, Members{0}); }) ==
          ErrorCode::invalid_data);
    CHECK(code_of([&] { llr_bernoulli_expectation(std::vector<double>{1, 2, 0}, Members{0}); }) ==
          ErrorCode::invalid_data);
    CHECK(code_of([&] { llr_poisson_expectation(y, g, Members{}); }) == ErrorCode::degenerate_zone);
    CHECK(code_of([&] { llr_poisson_expectation(y, g, Members{0, 0}); }) == ErrorCode::invalid_argument);
    // Expectation statistics accept the whole region set.
    CHECK(llr_poisson_expectation(y, g, Members{0, 1, 2}).llr > 0.0);

    // Exact two-group separation.
    CHECK(code_of([] { llr_gaussian_unknown_population(std::vector<double>{1, 1, 0, 0}, Members{0, 1}); }) ==
          ErrorCode::degenerate_variance);
    const std::vector<double> sep{1, 1, 0, 0};
    const ClosedFormStatistic stat({Family::gaussian_unknown, pop, false}, sep, {});
    const FitReport r = stat.evaluate(Members{0, 1});
    CHECK(std::isinf(r.llr));
    CHECK(r.degenerate_variance);
    // A constant outcome is already fitted exactly by the null.
    const std::vector<double> flat{2, 2, 2, 2};
    const ClosedFormStatistic null_exact({Family::gaussian_unknown, pop, false}, flat, {});
    CHECK(null_exact.evaluate(Members{0}).llr == 0.0);
  }

  TEST_CASE("population Poisson is invariant under baseline rescaling") {
    std::mt19937_64 rng(31);
    const ModelSpec spec = spec_of(Family::poisson, pop);
    for (int rep = 0; rep < 200; ++rep) {
      Instance in = testing::random_instance(spec, rng);
      const double before = closed(spec, in).llr;
      const double c = std::exp(std::uniform_real_distribution<double>(-3.0, 3.0)(rng));
      for (double& g : in.g) g *= c;
      CHECK(std::abs(closed(spec, in).llr - before) <= 1e-10);
    }
  }

  TEST_CASE("expectation Poisson is not invariant under baseline rescaling") {
    Instance in = inst({4, 1}, {0}, {2, 1});
    const double before = closed(spec_of(Family::poisson, exq), in).llr;
    for (double& g : in.g) g *= 2.0;
    const double after = closed(spec_of(Family::poisson, exq), in).llr;
    CHECK(std::abs(after - before) > 0.1);
    CHECK(after == doctest::Approx(0.0));
  }

  TEST_CASE("population unknown-variance Gaussian is invariant under location shifts") {
    std::mt19937_64 rng(37);
    const ModelSpec spec = spec_of(Family::gaussian_unknown, pop);
    for (int rep = 0; rep < 200; ++rep) {
      Instance in = testing::random_instance(spec, rng);
      const double before = closed(spec, in).llr;
      const double c = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
      for (double& y : in.y) y += c;
      CHECK(std::abs(closed(spec, in).llr - before) <= 1e-8);
    }
    Instance w = inst({3, 1, 0, 0}, {0, 1});
    const ModelSpec e = spec_of(Family::gaussian_unknown, exq);
    const double before = closed(e, w).llr;
    for (double& y : w.y) y += 1.0;
    CHECK(std::abs(closed(e, w).llr - before) > 0.1);
  }

  TEST_CASE("sign and label symmetries") {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 100; ++rep) {
      const ModelSpec gf = spec_of(Family::gaussian_fixed, pop);
      Instance in = testing::random_instance(gf, rng);
      const double a = closed(gf, in).llr;
      for (double& y : in.y) y = -y;
      CHECK(closed(gf, in).llr == doctest::Approx(a).epsilon(1e-10));

      const ModelSpec bp = spec_of(Family::bernoulli, pop);
      Instance b = testing::random_instance(bp, rng);
      const double before = closed(bp, b).llr;
      for (double& y : b.y) y = 1.0 - y;
      CHECK(closed(bp, b).llr == doctest::Approx(before).epsilon(1e-10));
    }
  }

  TEST_CASE("fixed-variance expectation grows quadratically with the inside signal") {
    const Instance base = inst({3, 0, 0}, {0});
    const ModelSpec spec = spec_of(Family::gaussian_fixed, exq);
    Instance in = base;
    in.y[0] = 101.0;  // A_in = 101, B_in = 1: llr = (A - B)^2 / 2B
    CHECK(closed(spec, in).llr == doctest::Approx(100.0 * 100.0 / 2.0));
    in.y[0] = 201.0;
    CHECK(closed(spec, in).llr == doctest::Approx(200.0 * 200.0 / 2.0));
  }

  TEST_CASE("GLM engine without covariates matches the closed forms") {
    std::mt19937_64 rng(43);
    for (const ModelSpec& spec : testing::closed_form_specs()) {
      INFO(model_name(spec));
      ModelSpec g = spec;
      g.glm = true;
      for (int rep = 0; rep < 150; ++rep) {
        const Instance in = testing::random_instance(spec, rng);
        const RegionTable t = testing::table_of(in, spec);
        const ClosedFormStatistic cf(spec, t.outcome(), t.baseline(), t.variance());
        const FitReport a = cf.evaluate(in.zone);
        const FitReport b = llr_glm(t, in.zone, g);
        CHECK(a.degenerate_variance == b.degenerate_variance);
        if (std::isfinite(a.llr)) CHECK(std::abs(a.llr - b.llr) <= 1e-8);
      }
    }
  }

  TEST_CASE("GLM with one covariate matches least squares by hand") {
    // Population unknown-variance Gaussian, design [1, Z, x] against [1, x].
    std::mt19937_64 rng(47);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 20; ++rep) {
      const std::size_t n = 12;
      std::vector<double> y(n), x(n);
      for (std::size_t i = 0; i < n; ++i) {
        x[i] = nd(rng);
        y[i] = 1.0 + 0.5 * x[i] + nd(rng) + (i < 4 ? 1.5 : 0.0);
      }
      const RegionTable t = make_table(y, {}, {}, x, 1);
      const Members zone{0, 1, 2, 3};
      // Residual sums of squares from the normal equations, solved by Cramer's rule.
      auto rss = [&](bool with_zone) {
        const std::size_t p = with_zone ? 3 : 2;
        std::vector<std::vector<double>> cols;
        cols.push_back(std::vector<double>(n, 1.0));
        if (with_zone) {
          std::vector<double> z(n, 0.0);
          for (auto i : zone) z[i] = 1.0;
          cols.push_back(z);
        }
        cols.push_back(x);
        double m[3][4] = {};
        for (std::size_t a = 0; a < p; ++a) {
          for (std::size_t b = 0; b < p; ++b) {
            for (std::size_t i = 0; i < n; ++i) m[a][b] += cols[a][i] * cols[b][i];
          }
          for (std::size_t i = 0; i < n; ++i) m[a][3] += cols[a][i] * y[i];
        }
        auto det = [&](int skip_col) {
          double s[3][3];
          for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b < p; ++b) s[a][b] = (static_cast<int>(b) == skip_col) ? m[a][3] : m[a][b];
          }
          if (p == 2) return s[0][0] * s[1][1] - s[0][1] * s[1][0];
          return s[0][0] * (s[1][1] * s[2][2] - s[1][2] * s[2][1]) - s[0][1] * (s[1][0] * s[2][2] - s[1][2] * s[2][0]) +
                 s[0][2] * (s[1][0] * s[2][1] - s[1][1] * s[2][0]);
        };
        const double d = det(-1);
        std::vector<double> coef(p);
        for (std::size_t c = 0; c < p; ++c) coef[c] = det(static_cast<int>(c)) / d;
        double r = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          double fit = 0.0;
          for (std::size_t c = 0; c < p; ++c) fit += coef[c] * cols[c][i];
          r += (y[i] - fit) * (y[i] - fit);
        }
        return std::make_pair(r, with_zone ? coef[1] : 0.0);
      };
      const auto [r0, t0] = rss(false);
      const auto [r1, theta] = rss(true);
      const FitReport f = llr_glm(t, zone, {Family::gaussian_unknown, pop, true});
      CHECK(f.llr == doctest::Approx(0.5 * n * std::log(r0 / r1)).epsilon(1e-9));
      CHECK(f.theta == doctest::Approx(theta).epsilon(1e-9));
      REQUIRE(f.beta.size() == 1);
    }
  }

  TEST_CASE("a covariate equal to the zone indicator is rank deficient") {
    const std::vector<double> y{3, 1, 2, 5, 4};
    const std::vector<double> x{1, 1, 0, 0, 0};
    const RegionTable t = make_table(y, {1, 1, 1, 1, 1}, {}, x, 1);
    CHECK(code_of([&] { llr_glm(t, Members{0, 1}, {Family::poisson, pop, true}); }) == ErrorCode::rank_deficient);
    CHECK(code_of([&] { llr_glm(t, Members{0, 1}, {Family::gaussian_unknown, exq, true}); }) ==
          ErrorCode::rank_deficient);
  }

  TEST_CASE("GLM statistic preconditions") {
    const RegionTable zero = make_table({0, 0, 0});
    CHECK(code_of([&] { GlmStatistic(zero, {Family::poisson, pop, true}); }) == ErrorCode::zero_total);
    const RegionTable ones = make_table({1, 1, 1});
    CHECK(code_of([&] { GlmStatistic(ones, {Family::bernoulli, pop, true}); }) == ErrorCode::degenerate_outcome);
    const RegionTable t = make_table({1, 0, 2});
    const GlmStatistic s(t, {Family::poisson, pop, true});
    CHECK(code_of([&] { s.evaluate(Members{0, 1, 2}); }) == ErrorCode::degenerate_zone);
  }

  TEST_CASE("model names") {
    CHECK(model_names().size() == 16);
    for (const std::string& n : model_names()) {
      const auto spec = parse_model(n);
      REQUIRE(spec.has_value());
      CHECK(model_name(*spec) == n);
    }
    CHECK_FALSE(parse_model("poisson").has_value());
    CHECK(*parse_model("gauss-unknown-pop") == ModelSpec{Family::gaussian_unknown, pop, false});
    CHECK(parse_model("glm-bernoulli-exp")->glm);
  }

  TEST_CASE("model-specific table checks") {
    CHECK(code_of([] { check_table_for(make_table({1, -1}), {Family::poisson, pop, false}); }) ==
          ErrorCode::invalid_data);
    CHECK(code_of([] { check_table_for(make_table({1, 0.5}), {Family::bernoulli, exq, false}); }) ==
          ErrorCode::invalid_data);
    CHECK(code_of([] { check_table_for(make_table({1, 2}), {Family::gaussian_fixed, exq, false}); }) ==
          ErrorCode::invalid_data);
    CHECK_NOTHROW(check_table_for(make_table({1.5, -2}), {Family::gaussian_unknown, exq, false}));
  }
}
