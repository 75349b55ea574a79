#include "scanreg/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "report.hpp"
#include "scanreg/experiment.hpp"
#include "scanreg/inference.hpp"
#include "scanreg/io.hpp"
#include "scanreg/model.hpp"
#include "scanreg/scan.hpp"
#include "scanreg/scenario.hpp"
#include "scanreg/space_time.hpp"
#include "scanreg/zones.hpp"

#ifndef SCANREG_VERSION
#define SCANREG_VERSION "0.0.0"
#endif

namespace scanreg::cli {

std::string_view to_string(Command command) noexcept {
  switch (command) {
    case Command::scan: return "scan";
    case Command::mc_test: return "mc-test";
    case Command::simulate: return "simulate";
    case Command::reproduce_sec4: return "reproduce-sec4";
    case Command::zones: return "zones";
  }
  return "unknown";
}

std::string_view to_string(Format format) noexcept {
  switch (format) {
    case Format::json: return "json";
    case Format::csv: return "csv";
    case Format::geojson: return "geojson";
  }
  return "unknown";
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
      return exit_usage;
    case ErrorCode::parse:
    case ErrorCode::invalid_data:
    case ErrorCode::zero_total:
    case ErrorCode::degenerate_outcome:
      return exit_data;
    default:
      return exit_numeric;
  }
}

namespace {

using Clock = std::chrono::steady_clock;

// Output target: stdout for "-", otherwise a file opened for writing.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw Error(ErrorCode::parse, "cannot open output file '" + path + "'");
      out_ = &file_;
    }
  }
  std::ostream& stream() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::parse, "cannot open output file '" + path + "'");
  body(f);
}

ModelSpec model_of(const RunConfig& c) {
  auto spec = parse_model(c.model);
  if (!spec) throw Error(ErrorCode::invalid_argument, "unknown model '" + c.model + "'");
  return *spec;
}

ScanOptions scan_options(const RunConfig& c) {
  ScanOptions o;
  o.top = c.top;
  o.non_overlapping = c.non_overlapping;
  o.threads = c.threads;
  if (c.side == "hot") {
    o.sidedness = Sidedness::hot;
  } else if (c.side == "cold") {
    o.sidedness = Sidedness::cold;
  } else if (c.side != "two") {
    throw Error(ErrorCode::invalid_argument, "side must be two, hot or cold");
  }
  return o;
}

ZoneSet spatial_zones(const RunConfig& c, const RegionTable& table) {
  if (c.zone_method == "singleton") return singleton_zones(table);
  if (c.zone_method == "file") {
    if (c.zone_file.empty()) throw Error(ErrorCode::invalid_argument, "--zones file needs --zone-file");
    return load_zones(c.zone_file, table);
  }
  if (c.zone_method != "circular") throw Error(ErrorCode::invalid_argument, "unknown zone method '" + c.zone_method + "'");
  CircularOptions o;
  o.max_fraction = c.max_fraction;
  o.max_population_fraction = c.max_population_fraction;
  if (c.distance == "haversine") {
    o.distance = DistanceMode::haversine;
  } else if (c.distance != "euclidean") {
    throw Error(ErrorCode::invalid_argument, "distance must be euclidean or haversine");
  }
  return circular_zones(table, o);
}

// The scanning problem a region file describes: a plain table, or the cell
// table of a multi-period file with cylinder zones.
struct Problem {
  RegionTable table;
  ZoneSet zones;
  ModelSpec spec;
  std::size_t regions = 0;
  std::size_t periods = 1;
};

Problem load_problem(const RunConfig& c) {
  const ModelSpec spec = model_of(c);
  RegionTable raw = load_regions(c.input, c.columns);
  SpaceTimeTable st = split_by_time(raw);
  if (st.periods() == 1) {
    RegionTable table = st.slice(0);
    ZoneSet zones = spatial_zones(c, table);
    return Problem{std::move(table), std::move(zones), spec, st.regions(), 1};
  }
  ZoneSet base = spatial_zones(c, st.slice(0));
  ZoneSet cylinders = cylinder_zones(st, base, c.max_duration);
  return Problem{space_time_table(st, spec), std::move(cylinders), space_time_model(st, spec), st.regions(),
                 st.periods()};
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

json header(const RunConfig& c) {
  return {{"tool", "scanreg"}, {"version", SCANREG_VERSION}, {"config", config_json(c)}, {"seed", c.seed}};
}

json metadata(Clock::time_point start, unsigned threads) {
  return {{"wall_clock_seconds", std::chrono::duration<double>(Clock::now() - start).count()},
          {"timestamp", timestamp()},
          {"threads", threads ? threads : default_threads()}};
}

void run_scan(const RunConfig& c, std::ostream& out, bool with_mc) {
  const auto start = Clock::now();
  const Problem p = load_problem(c);
  const ScanOptions options = scan_options(c);
  const ScanResult result = scan(p.table, p.zones, p.spec, options);
  std::optional<McResult> mc;
  if (with_mc) {
    McOptions mo;
    mo.replicates = c.replicates;
    mo.seed = c.seed;
    mo.scan = options;
    mc = mc_test(p.table, p.zones, p.spec, result, mo);
  }
  if (!c.zone_table_path.empty()) write_file(c.zone_table_path, [&](std::ostream& f) { write_zone_table_csv(f, result); });

  Sink sink(c.output, out);
  switch (c.format) {
    case Format::csv:
      write_membership_csv(sink.stream(), p.table, p.zones, result, mc ? &*mc : nullptr);
      return;
    case Format::geojson:
      write_geojson(sink.stream(), p.table, p.zones, result, mc ? &*mc : nullptr);
      return;
    case Format::json:
      break;
  }
  json doc = header(c);
  doc["model"] = c.model;
  doc["data"] = {{"regions", p.regions}, {"periods", p.periods}, {"cells", p.table.size()}};
  doc["zones"] = zones_json(p.zones);
  doc["result"] = scan_json(p.table, p.zones, result, c.zone_table_limit);
  doc["monte_carlo"] = mc ? mc_json(*mc) : json(nullptr);
  doc["metrics"] = {{"zones_evaluated", result.records.size() - result.errored},
                    {"zones_errored", result.errored},
                    {"clusters_reported", result.top.size()}};
  doc["metadata"] = metadata(start, c.threads);
  sink.stream() << doc.dump(2) << '\n';
}

ScenarioSpec scenario_of(const RunConfig& c, bool seed_given) {
  if (c.scenario.empty()) throw Error(ErrorCode::invalid_argument, "--scenario is required");
  ScenarioSpec s = load_scenario(c.scenario);
  if (c.mode) {
    if (*c.mode == "population") {
      s.mode = Approach::population;
    } else if (*c.mode == "expectation") {
      s.mode = Approach::expectation;
    } else {
      throw Error(ErrorCode::invalid_argument, "mode must be population or expectation");
    }
  }
  if (c.alpha_pop) s.alpha_pop = *c.alpha_pop;
  if (c.theta_hot) s.theta_hot = *c.theta_hot;
  if (c.theta_cold) s.theta_cold = *c.theta_cold;
  if (c.sigma) {
    if (!(*c.sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be positive");
    s.sigma = *c.sigma;
  }
  if (seed_given) s.seed = c.seed;
  return s;
}

void run_simulate(const RunConfig& c, std::ostream& out, bool seed_given) {
  const RegionTable geometry = load_regions(c.input, c.columns);
  const RegionTable data = simulate_scenario(geometry, scenario_of(c, seed_given));
  Sink sink(c.output, out);
  write_regions(data, sink.stream());
}

void run_reproduce(const RunConfig& c, std::ostream& out, bool seed_given) {
  const auto start = Clock::now();
  const RegionTable geometry = load_regions(c.input, c.columns);
  const ScenarioSpec scenario = scenario_of(c, seed_given);
  PlantedRunOptions options;
  options.zones.max_fraction = c.max_fraction;
  options.zones.max_population_fraction = c.max_population_fraction;
  options.scan = scan_options(c);
  options.scan.non_overlapping = true;
  const PlantedRun run = run_planted(geometry, scenario, options);
  for (const auto& w : run.warnings) std::cerr << json{{"warning", w}}.dump() << '\n';
  if (!c.intercepts_path.empty()) write_file(c.intercepts_path, [&](std::ostream& f) { write_intercepts_csv(f, run); });

  json doc = header(c);
  doc["seed"] = scenario.seed;
  doc["experiment"] = planted_json(run);
  doc["metadata"] = metadata(start, c.threads);
  Sink sink(c.output, out);
  sink.stream() << doc.dump(2) << '\n';
}

void run_zones(const RunConfig& c, std::ostream& out) {
  RegionTable raw = load_regions(c.input, c.columns);
  SpaceTimeTable st = split_by_time(raw);
  const RegionTable& geometry = st.slice(0);
  ZoneSet zones = spatial_zones(c, geometry);
  Sink sink(c.output, out);
  if (st.periods() > 1) {
    const RegionTable cells = st.flatten();
    zones = cylinder_zones(st, zones, c.max_duration);
    if (c.format == Format::csv) {
      write_zones(zones, cells, sink.stream());
      return;
    }
  } else if (c.format == Format::csv) {
    write_zones(zones, geometry, sink.stream());
    return;
  }
  if (c.format == Format::geojson) throw Error(ErrorCode::invalid_argument, "zones supports json and csv output");
  json doc = header(c);
  doc["zones"] = zones_json(zones);
  sink.stream() << doc.dump(2) << '\n';
}

struct Parsed {
  RunConfig config;
  bool seed_given = false;
};

void dispatch(const Parsed& p, std::ostream& out) {
  const RunConfig& c = p.config;
  switch (c.command) {
    case Command::scan: run_scan(c, out, false); break;
    case Command::mc_test: run_scan(c, out, true); break;
    case Command::simulate: run_simulate(c, out, p.seed_given); break;
    case Command::reproduce_sec4: run_reproduce(c, out, p.seed_given); break;
    case Command::zones: run_zones(c, out); break;
  }
}

void print_error(std::ostream& err, std::string_view code, const std::string& message, int exit) {
  err << json{{"error", {{"code", code}, {"message", message}, {"exit", exit}}}}.dump() << '\n';
}

}  // namespace

void run(const RunConfig& config, std::ostream& out) { dispatch(Parsed{config, true}, out); }

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Parsed parsed;
  RunConfig& c = parsed.config;
  CLI::App app{"Regression-based spatial scan statistics", "scanreg"};
  app.set_version_flag("--version", SCANREG_VERSION);
  app.require_subcommand(1);

  std::string format_name = "json";
  const auto models = model_names();

  auto common = [&](CLI::App* sub, const char* input_help) {
    sub->add_option("-i,--input", c.input, input_help)->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", c.output, "Output path, - for stdout");
    sub->add_option("--seed", c.seed, "Random seed");
    sub->add_option("--threads", c.threads, "Worker threads (default: SCANREG_THREADS or all cores)");
    sub->add_option("--id-col", c.columns.id, "Region id column");
    sub->add_option("--x-col", c.columns.x, "x / longitude column");
    sub->add_option("--y-col", c.columns.y, "y / latitude column");
    sub->add_option("--outcome-col", c.columns.outcome, "Outcome column");
    sub->add_option("--baseline-col", c.columns.baseline, "Baseline column");
    sub->add_option("--var-col", c.columns.variance, "Variance column");
    sub->add_option("--cov-prefix", c.columns.covariate_prefix, "Prefix of covariate columns");
    sub->add_option("--time-col", c.columns.time, "Time column");
  };
  auto zone_flags = [&](CLI::App* sub) {
    sub->add_option("--zones", c.zone_method, "Zone construction")->check(CLI::IsMember({"circular", "singleton", "file"}));
    sub->add_option("--zone-file", c.zone_file, "Zone CSV (zone_id,region_id)")->check(CLI::ExistingFile);
    sub->add_option("--max-frac", c.max_fraction, "Largest circular zone as a fraction of the regions")
        ->check(CLI::Range(1e-12, 1.0));
    sub->add_option("--max-pop-frac", c.max_population_fraction, "Largest circular zone as a share of total baseline")
        ->check(CLI::Range(1e-12, 1.0));
    sub->add_option("--distance", c.distance, "Distance")->check(CLI::IsMember({"euclidean", "haversine"}));
    sub->add_option("--max-duration", c.max_duration, "Longest cylinder in periods (multi-period input)")
        ->check(CLI::PositiveNumber);
  };
  auto scan_flags = [&](CLI::App* sub) {
    sub->add_option("--model", c.model, "Statistic")->check(CLI::IsMember(models));
    sub->add_option("--top", c.top, "Number of clusters to report");
    sub->add_flag("--non-overlap", c.non_overlapping, "Skip reported clusters overlapping a better one");
    sub->add_option("--side", c.side, "two, hot or cold")->check(CLI::IsMember({"two", "hot", "cold"}));
    sub->add_option("--format", format_name, "json, csv or geojson")->check(CLI::IsMember({"json", "csv", "geojson"}));
    sub->add_option("--zone-table-limit", c.zone_table_limit, "Rows of the zone table in JSON output");
    sub->add_option("--zone-table", c.zone_table_path, "Write the full zone table as CSV");
  };
  auto scenario_flags = [&](CLI::App* sub) {
    sub->add_option("--scenario", c.scenario, "Scenario key-value file")->check(CLI::ExistingFile);
    sub->add_option("--mode", c.mode, "population or expectation")->check(CLI::IsMember({"population", "expectation"}));
  };

  CLI::App* scan_cmd = app.add_subcommand("scan", "Evaluate every zone and report the most likely clusters");
  common(scan_cmd, "Region CSV");
  zone_flags(scan_cmd);
  scan_flags(scan_cmd);

  CLI::App* mc_cmd = app.add_subcommand("mc-test", "Scan plus a Monte Carlo p-value for the most likely cluster");
  common(mc_cmd, "Region CSV");
  zone_flags(mc_cmd);
  scan_flags(mc_cmd);
  mc_cmd->add_option("-R,--replicates", c.replicates, "Monte Carlo replicates")->check(CLI::PositiveNumber);

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Draw Gaussian outcomes for a planted hot/cold scenario");
  common(sim_cmd, "Geometry CSV");
  scenario_flags(sim_cmd);
  sim_cmd->add_option("--alpha-pop", c.alpha_pop, "Intercept (population mode)");
  sim_cmd->add_option("--theta-hot", c.theta_hot, "Hot zone effect");
  sim_cmd->add_option("--theta-cold", c.theta_cold, "Cold zone effect");
  sim_cmd->add_option("--sigma", c.sigma, "Noise standard deviation");

  CLI::App* rep_cmd = app.add_subcommand("reproduce-sec4", "Planted hot/cold experiment with both Gaussian statistics");
  common(rep_cmd, "Geometry CSV");
  scenario_flags(rep_cmd);
  rep_cmd->add_option("--max-frac", c.max_fraction, "Largest circular zone as a fraction of the regions")
      ->check(CLI::Range(1e-12, 1.0));
  rep_cmd->add_option("--top", c.top, "Number of clusters to report");
  rep_cmd->add_option("--intercepts", c.intercepts_path, "Write per-zone intercept estimates as CSV");

  CLI::App* zones_cmd = app.add_subcommand("zones", "Build a zone set and write it");
  common(zones_cmd, "Region CSV");
  zone_flags(zones_cmd);
  zones_cmd->add_option("--format", format_name, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return exit_ok;
    }
    print_error(err, "usage", e.what(), exit_usage);
    return exit_usage;
  }

  c.format = format_name == "csv" ? Format::csv : format_name == "geojson" ? Format::geojson : Format::json;
  if (scan_cmd->parsed()) c.command = Command::scan;
  if (mc_cmd->parsed()) c.command = Command::mc_test;
  if (sim_cmd->parsed()) c.command = Command::simulate;
  if (rep_cmd->parsed()) {
    c.command = Command::reproduce_sec4;
    if (rep_cmd->count("--max-frac") == 0) c.max_fraction = 0.3;
  }
  if (zones_cmd->parsed()) c.command = Command::zones;
  for (CLI::App* sub : {scan_cmd, mc_cmd, sim_cmd, rep_cmd, zones_cmd}) {
    if (sub->parsed()) parsed.seed_given = sub->count("--seed") > 0;
  }

  try {
    dispatch(parsed, out);
  } catch (const Error& e) {
    const int code = exit_code_for(e.code());
    print_error(err, to_string(e.code()), e.what(), code);
    return code;
  } catch (const std::exception& e) {
    print_error(err, "io", e.what(), exit_data);
    return exit_data;
  }
  return exit_ok;
}

}  // namespace scanreg::cli
