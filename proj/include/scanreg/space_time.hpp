#pragma once

#include "scanreg/model.hpp"
#include "scanreg/region_table.hpp"
#include "scanreg/scan.hpp"
#include "scanreg/zones.hpp"

namespace scanreg {

/// The N*T cells as one table ready for scanning. Population-based models
/// with T > 1 get T - 1 time-indicator covariates (one intercept per period)
/// and switch to the GLM engine; otherwise this is SpaceTimeTable::flatten().
RegionTable space_time_table(const SpaceTimeTable& st, const ModelSpec& spec);
ModelSpec space_time_model(const SpaceTimeTable& st, const ModelSpec& spec);

/// Scan over cylinders (zones on cell indices t * N + i) with one shared
/// effect per cylinder.
ScanResult space_time_scan(const SpaceTimeTable& st, const ZoneSet& cylinders, const ModelSpec& spec,
                           const ScanOptions& options = {});

}  // namespace scanreg
