#include "scanreg/region_table.hpp"

#include <cmath>
#include <utility>

#include "scanreg/error.hpp"

namespace scanreg {

namespace {

void require_length(std::size_t got, std::size_t n, const char* name) {
  if (got != n) {
    throw Error(ErrorCode::invalid_data, std::string("column '") + name + "' has " + std::to_string(got) +
                                             " rows, expected " + std::to_string(n));
  }
}

void require_finite(const std::vector<double>& v, const char* name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorCode::invalid_data,
                  std::string("non-finite value in column '") + name + "', row " + std::to_string(i + 1));
    }
  }
}

}  // namespace

RegionTable::RegionTable(RegionColumns columns) : cols_(std::move(columns)) {
  index_.reserve(cols_.ids.size());
  for (std::size_t i = 0; i < cols_.ids.size(); ++i) {
    index_.emplace(cols_.ids[i], i);
  }
}

RegionTable RegionTable::create(RegionColumns c) {
  const std::size_t n = c.ids.size();
  if (n < 2) {
    throw Error(ErrorCode::invalid_data, "a region table needs at least 2 regions, got " + std::to_string(n));
  }
  if (c.coords.empty()) c.coords.assign(n, Point{});
  if (c.baseline.empty()) c.baseline.assign(n, 1.0);
  require_length(c.coords.size(), n, "coord");
  require_length(c.outcome.size(), n, "outcome");
  require_length(c.baseline.size(), n, "baseline");
  if (!c.variance.empty()) require_length(c.variance.size(), n, "var");
  if (!c.time.empty()) require_length(c.time.size(), n, "t");
  require_length(c.covariates.size(), n * c.covariate_count, "covariates");
  if (!c.covariate_names.empty()) require_length(c.covariate_names.size(), c.covariate_count, "covariate names");

  require_finite(c.outcome, "outcome");
  require_finite(c.baseline, "baseline");
  require_finite(c.variance, "var");
  require_finite(c.covariates, "covariates");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(c.coords[i].x) || !std::isfinite(c.coords[i].y)) {
      throw Error(ErrorCode::invalid_data, "non-finite coordinate, row " + std::to_string(i + 1));
    }
  }

  RegionTable table(std::move(c));
  if (table.index_.size() != n) {
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < n; ++i) {
      if (!seen.emplace(table.cols_.ids[i], i).second) {
        throw Error(ErrorCode::invalid_data,
                    "duplicate region id '" + table.cols_.ids[i] + "', row " + std::to_string(i + 1));
      }
    }
  }
  return table;
}

std::optional<std::size_t> RegionTable::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

RegionTable RegionTable::with_outcome(std::vector<double> outcome) const {
  RegionColumns c = cols_;
  c.outcome = std::move(outcome);
  return create(std::move(c));
}

SpaceTimeTable SpaceTimeTable::create(std::vector<RegionTable> slices) {
  if (slices.empty()) {
    throw Error(ErrorCode::invalid_data, "space-time table needs at least one period");
  }
  const RegionTable& first = slices.front();
  for (std::size_t t = 1; t < slices.size(); ++t) {
    const RegionTable& s = slices[t];
    if (s.size() != first.size() || s.covariate_count() != first.covariate_count()) {
      throw Error(ErrorCode::invalid_data, "period " + std::to_string(t + 1) + " has a different region layout");
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s.id(i) != first.id(i)) {
        throw Error(ErrorCode::invalid_data, "period " + std::to_string(t + 1) + ", row " + std::to_string(i + 1) +
                                                 ": region id '" + s.id(i) + "' differs from '" + first.id(i) + "'");
      }
    }
  }
  return SpaceTimeTable(std::move(slices));
}

RegionTable SpaceTimeTable::flatten() const {
  const std::size_t n = regions();
  const std::size_t p = slices_.front().covariate_count();
  const bool variance = slices_.front().has_variance();
  RegionColumns out;
  out.covariate_count = p;
  out.covariate_names = slices_.front().columns().covariate_names;
  for (std::size_t t = 0; t < periods(); ++t) {
    const RegionTable& s = slices_[t];
    if (s.has_variance() != variance) {
      throw Error(ErrorCode::invalid_data, "variance column present in some periods only");
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.ids.push_back(s.id(i) + "@" + std::to_string(t + 1));
      out.coords.push_back(s.coords()[i]);
      out.outcome.push_back(s.outcome()[i]);
      out.baseline.push_back(s.baseline()[i]);
      if (variance) out.variance.push_back(s.variance()[i]);
      out.time.push_back(static_cast<int>(t + 1));
      for (std::size_t j = 0; j < p; ++j) out.covariates.push_back(s.covariate(i, j));
    }
  }
  return RegionTable::create(std::move(out));
}

}  // namespace scanreg
