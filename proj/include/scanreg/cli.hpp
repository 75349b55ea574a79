#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scanreg/error.hpp"
#include "scanreg/io.hpp"

namespace scanreg::cli {

enum class Command { scan, mc_test, simulate, reproduce_sec4, zones };
enum class Format { json, csv, geojson };

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_data = 2, exit_numeric = 3 };

struct RunConfig {
  Command command = Command::scan;
  std::string input;  // region CSV, or the geometry for simulate / reproduce-sec4
  ColumnMapping columns;
  std::string model = "poisson-pop";

  std::string zone_method = "circular";  // circular | singleton | file
  std::string zone_file;
  double max_fraction = 0.5;
  std::optional<double> max_population_fraction;
  std::string distance = "euclidean";
  std::size_t max_duration = 1;

  std::size_t top = 3;
  bool non_overlapping = false;
  std::string side = "two";  // two | hot | cold
  std::size_t replicates = 999;
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: SCANREG_THREADS or hardware concurrency

  std::string output = "-";
  Format format = Format::json;
  std::optional<std::size_t> zone_table_limit;
  std::string zone_table_path;  // extra CSV with the per-zone table

  std::string scenario;  // scenario key-value file
  std::optional<std::string> mode;
  std::optional<double> alpha_pop, theta_hot, theta_cold, sigma;
  std::string intercepts_path;  // reproduce-sec4: per-zone intercept CSV
};

std::string_view to_string(Command command) noexcept;
std::string_view to_string(Format format) noexcept;

/// Parses and runs one invocation; `args` excludes the program name. Results
/// go to the configured output (`-` is `out`); failures print one JSON line
/// to `err` and return a nonzero ExitCode.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Runs an already parsed configuration; throws scanreg::Error on failure.
void run(const RunConfig& config, std::ostream& out);

/// Exit code for a library error code.
int exit_code_for(ErrorCode code) noexcept;

}  // namespace scanreg::cli
