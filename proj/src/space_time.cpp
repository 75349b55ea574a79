#include "scanreg/space_time.hpp"

#include <string>

namespace scanreg {

namespace {

bool needs_period_intercepts(const SpaceTimeTable& st, const ModelSpec& spec) {
  return spec.has_intercept() && st.periods() > 1;
}

}  // namespace

RegionTable space_time_table(const SpaceTimeTable& st, const ModelSpec& spec) {
  RegionTable flat = st.flatten();
  if (!needs_period_intercepts(st, spec)) return flat;

  RegionColumns cols = flat.columns();
  const std::size_t n = st.regions();
  const std::size_t periods = st.periods();
  // Closed-form models ignore covariates, so only glm specs keep them.
  const std::size_t old_p = spec.glm ? cols.covariate_count : 0;
  if (!spec.glm) cols.covariate_names.clear();
  const std::size_t p = old_p + periods - 1;
  std::vector<double> cov(cols.ids.size() * p, 0.0);
  for (std::size_t t = 0; t < periods; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t row = st.cell(t, i);
      for (std::size_t j = 0; j < old_p; ++j) cov[row * p + j] = cols.covariates[row * old_p + j];
      if (t > 0) cov[row * p + old_p + t - 1] = 1.0;
    }
  }
  for (std::size_t t = 1; t < periods; ++t) cols.covariate_names.push_back("period_" + std::to_string(t + 1));
  cols.covariates = std::move(cov);
  cols.covariate_count = p;
  return RegionTable::create(std::move(cols));
}

ModelSpec space_time_model(const SpaceTimeTable& st, const ModelSpec& spec) {
  ModelSpec m = spec;
  if (needs_period_intercepts(st, spec)) m.glm = true;
  return m;
}

ScanResult space_time_scan(const SpaceTimeTable& st, const ZoneSet& cylinders, const ModelSpec& spec,
                           const ScanOptions& options) {
  const RegionTable cells = space_time_table(st, spec);
  if (cylinders.index_size() != cells.size()) {
    throw Error(ErrorCode::invalid_argument, "cylinders index " + std::to_string(cylinders.index_size()) +
                                                 " cells, the table has " + std::to_string(cells.size()));
  }
  ScanResult result = scan(cells, cylinders, space_time_model(st, spec), options);
  result.model = spec;
  return result;
}

}  // namespace scanreg
