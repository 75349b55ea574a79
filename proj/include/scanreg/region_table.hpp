#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace scanreg {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Column data used to build a RegionTable. Optional columns may be left
/// empty: baseline defaults to 1.0 per row, variance and time are absent.
/// Covariates are row-major with `covariate_count` columns.
struct RegionColumns {
  std::vector<std::string> ids;
  std::vector<Point> coords;
  std::vector<double> outcome;
  std::vector<double> baseline;
  std::vector<double> variance;
  std::vector<double> covariates;
  std::size_t covariate_count = 0;
  std::vector<int> time;
  std::vector<std::string> covariate_names;
};

/// Per-region observations. Immutable once built; all accessors are const so
/// a table can be shared between scanning threads.
///
/// Structural invariants (checked by create): ids distinct, N >= 2, every
/// column of length N, all values finite. Model-specific invariants such as
/// positive baselines or 0/1 outcomes are checked against a ModelSpec by
/// check_table_for in model.hpp.
class RegionTable {
 public:
  static RegionTable create(RegionColumns columns);

  std::size_t size() const noexcept { return cols_.ids.size(); }

  const std::string& id(std::size_t i) const { return cols_.ids[i]; }
  std::span<const std::string> ids() const noexcept { return cols_.ids; }
  std::span<const Point> coords() const noexcept { return cols_.coords; }
  std::span<const double> outcome() const noexcept { return cols_.outcome; }
  std::span<const double> baseline() const noexcept { return cols_.baseline; }

  bool has_variance() const noexcept { return !cols_.variance.empty(); }
  std::span<const double> variance() const noexcept { return cols_.variance; }

  std::size_t covariate_count() const noexcept { return cols_.covariate_count; }
  double covariate(std::size_t row, std::size_t col) const {
    return cols_.covariates[row * cols_.covariate_count + col];
  }
  std::span<const double> covariates() const noexcept { return cols_.covariates; }
  std::span<const std::string> covariate_names() const noexcept { return cols_.covariate_names; }

  bool has_time() const noexcept { return !cols_.time.empty(); }
  std::span<const int> time() const noexcept { return cols_.time; }

  /// Row index of a region id, or nullopt.
  std::optional<std::size_t> index_of(const std::string& id) const;

  const RegionColumns& columns() const noexcept { return cols_; }

  /// Copy of this table with the outcome column replaced.
  RegionTable with_outcome(std::vector<double> outcome) const;

 private:
  explicit RegionTable(RegionColumns columns);

  RegionColumns cols_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A RegionTable per time index with the same regions, in the same order, at
/// every t. Cells are flattened time-major: cell = t * N + i.
class SpaceTimeTable {
 public:
  static SpaceTimeTable create(std::vector<RegionTable> slices);

  std::size_t periods() const noexcept { return slices_.size(); }
  std::size_t regions() const noexcept { return slices_.front().size(); }
  const RegionTable& slice(std::size_t t) const { return slices_[t]; }

  std::size_t cell(std::size_t t, std::size_t region) const noexcept { return t * regions() + region; }

  /// All N*T cells as one table; cell ids are "<region>@<t+1>".
  RegionTable flatten() const;

 private:
  explicit SpaceTimeTable(std::vector<RegionTable> slices) : slices_(std::move(slices)) {}

  std::vector<RegionTable> slices_;
};

}  // namespace scanreg
