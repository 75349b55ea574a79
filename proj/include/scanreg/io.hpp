#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "scanreg/region_table.hpp"

namespace scanreg {

/// Column names looked up in the region CSV header. Optional columns are
/// used when present; covariates are every column whose name starts with
/// `covariate_prefix`, in header order.
struct ColumnMapping {
  std::string id = "id";
  std::string x = "x";
  std::string y = "y";
  std::string outcome = "outcome";
  std::string baseline = "baseline";
  std::string variance = "var";
  std::string covariate_prefix = "cov_";
  std::string time = "t";
};

/// Reads a region CSV (header row, ',' separated, '.' decimals). Errors are
/// ErrorCode::parse with the 1-based data row and the column name. A present
/// baseline column must be strictly positive; absent, every baseline is 1.0.
RegionTable load_regions(const std::filesystem::path& path, const ColumnMapping& schema = {});
RegionTable read_regions(std::istream& in, const ColumnMapping& schema = {});

/// Writes every column present in the table with round-trip precision.
void save_regions(const RegionTable& table, const std::filesystem::path& path);
void write_regions(const RegionTable& table, std::ostream& out);

/// Splits a table with a `t` column into periods (ascending t). Every period
/// must list the same region ids in the same order.
SpaceTimeTable split_by_time(const RegionTable& table);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace scanreg
