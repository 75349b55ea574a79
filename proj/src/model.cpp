#include "scanreg/model.hpp"

#include <array>
#include <cmath>

#include "scanreg/error.hpp"

namespace scanreg {

namespace {

struct NamedFamily {
  std::string_view stem;
  Family family;
  bool glm;
};

constexpr std::array<NamedFamily, 8> kFamilies{{
    {"poisson", Family::poisson, false},
    {"gauss-fixed", Family::gaussian_fixed, false},
    {"gauss-unknown", Family::gaussian_unknown, false},
    {"bernoulli", Family::bernoulli, false},
    {"glm-poisson", Family::poisson, true},
    {"glm-gauss-fixed", Family::gaussian_fixed, true},
    {"glm-gauss", Family::gaussian_unknown, true},
    {"glm-bernoulli", Family::bernoulli, true},
}};

[[noreturn]] void row_error(const std::string& what, std::size_t row) {
  throw Error(ErrorCode::invalid_data, what + ", row " + std::to_string(row + 1));
}

}  // namespace

std::string model_name(const ModelSpec& spec) {
  for (const auto& f : kFamilies) {
    if (f.family == spec.family && f.glm == spec.glm) {
      return std::string(f.stem) + (spec.approach == Approach::population ? "-pop" : "-exp");
    }
  }
  return "unknown";
}

std::optional<ModelSpec> parse_model(std::string_view name) {
  for (const auto& f : kFamilies) {
    for (Approach a : {Approach::population, Approach::expectation}) {
      ModelSpec spec{f.family, a, f.glm};
      if (model_name(spec) == name) return spec;
    }
  }
  return std::nullopt;
}

std::vector<std::string> model_names() {
  std::vector<std::string> names;
  for (const auto& f : kFamilies) {
    names.push_back(std::string(f.stem) + "-pop");
    names.push_back(std::string(f.stem) + "-exp");
  }
  return names;
}

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::poisson: return "poisson";
    case Family::gaussian_fixed: return "gaussian-fixed-var";
    case Family::gaussian_unknown: return "gaussian-unknown-var";
    case Family::bernoulli: return "bernoulli";
  }
  return "unknown";
}

std::string_view to_string(Approach approach) noexcept {
  return approach == Approach::population ? "population" : "expectation";
}

void check_table_for(const RegionTable& table, const ModelSpec& spec) {
  const auto y = table.outcome();
  const auto g = table.baseline();
  switch (spec.family) {
    case Family::poisson:
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (!(g[i] > 0.0)) row_error("non-positive baseline", i);
        if (y[i] < 0.0) row_error("negative count", i);
      }
      break;
    case Family::gaussian_fixed: {
      if (!table.has_variance()) throw Error(ErrorCode::invalid_data, "fixed-variance Gaussian model needs a 'var' column");
      const auto v = table.variance();
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (g[i] == 0.0) row_error("zero baseline", i);
        if (!(v[i] > 0.0)) row_error("non-positive variance", i);
      }
      break;
    }
    case Family::gaussian_unknown:
      break;
    case Family::bernoulli:
      for (std::size_t i = 0; i < table.size(); ++i) {
        if (y[i] != 0.0 && y[i] != 1.0) row_error("Bernoulli outcome not in {0,1}", i);
      }
      break;
  }
}

}  // namespace scanreg
