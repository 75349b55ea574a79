#include "scanreg/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <boost/random/normal_distribution.hpp>

#include "scanreg/error.hpp"
#include "scanreg/io.hpp"
#include "scanreg/rng.hpp"

namespace scanreg {

namespace {

std::vector<std::string> split_ids(const std::string& s) {
  std::vector<std::string> out;
  if (boost::algorithm::trim_copy(s).empty()) return out;
  boost::algorithm::split(out, s, boost::algorithm::is_any_of(","));
  for (auto& id : out) boost::algorithm::trim(id);
  return out;
}

template <typename T>
T get_value(const boost::property_tree::ptree& tree, const std::string& key, T fallback) {
  try {
    return tree.get<T>(key, fallback);
  } catch (const boost::property_tree::ptree_bad_data&) {
    throw Error(ErrorCode::parse, "scenario key '" + key + "' has an invalid value");
  }
}

}  // namespace

ScenarioSpec read_scenario(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorCode::parse, std::string("scenario file: ") + e.what());
  }
  static const std::set<std::string> known = {"mode",      "hot_zone",   "cold_zone", "alpha_pop",
                                              "theta_hot", "theta_cold", "sigma",     "seed"};
  for (const auto& [key, child] : tree) {
    if (!child.empty()) throw Error(ErrorCode::parse, "scenario file: sections are not supported ('" + key + "')");
    if (!known.count(key)) throw Error(ErrorCode::parse, "scenario file: unknown key '" + key + "'");
  }

  ScenarioSpec spec;
  const std::string mode = get_value<std::string>(tree, "mode", "population");
  if (mode == "population") {
    spec.mode = Approach::population;
  } else if (mode == "expectation") {
    spec.mode = Approach::expectation;
  } else {
    throw Error(ErrorCode::parse, "scenario key 'mode' must be population or expectation, got '" + mode + "'");
  }
  spec.hot_zone = split_ids(get_value<std::string>(tree, "hot_zone", ""));
  spec.cold_zone = split_ids(get_value<std::string>(tree, "cold_zone", ""));
  spec.alpha_pop = get_value(tree, "alpha_pop", spec.alpha_pop);
  spec.theta_hot = get_value(tree, "theta_hot", spec.theta_hot);
  spec.theta_cold = get_value(tree, "theta_cold", spec.theta_cold);
  spec.sigma = get_value(tree, "sigma", spec.sigma);
  spec.seed = get_value<std::uint64_t>(tree, "seed", spec.seed);
  if (!(spec.sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "scenario sigma must be positive");
  std::set<std::string> hot(spec.hot_zone.begin(), spec.hot_zone.end());
  for (const auto& id : spec.cold_zone) {
    if (hot.count(id)) throw Error(ErrorCode::invalid_argument, "region '" + id + "' is in both hot and cold zones");
  }
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, "cannot open scenario file '" + path.string() + "'");
  return read_scenario(in);
}

void write_scenario(const ScenarioSpec& spec, std::ostream& out) {
  out << "mode = " << (spec.mode == Approach::population ? "population" : "expectation") << '\n';
  out << "hot_zone = " << boost::algorithm::join(spec.hot_zone, ",") << '\n';
  out << "cold_zone = " << boost::algorithm::join(spec.cold_zone, ",") << '\n';
  out << "alpha_pop = " << format_double(spec.alpha_pop) << '\n';
  out << "theta_hot = " << format_double(spec.theta_hot) << '\n';
  out << "theta_cold = " << format_double(spec.theta_cold) << '\n';
  out << "sigma = " << format_double(spec.sigma) << '\n';
  out << "seed = " << spec.seed << '\n';
}

std::vector<std::size_t> resolve_ids(const RegionTable& table, const std::vector<std::string>& ids) {
  std::vector<std::size_t> rows;
  rows.reserve(ids.size());
  for (const auto& id : ids) {
    auto i = table.index_of(id);
    if (!i) throw Error(ErrorCode::invalid_argument, "unknown region id '" + id + "'");
    rows.push_back(*i);
  }
  return rows;
}

RegionTable simulate_scenario(const RegionTable& geometry, const ScenarioSpec& spec) {
  if (!(spec.sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "scenario sigma must be positive");
  std::vector<double> theta(geometry.size(), 0.0);
  std::vector<bool> hot(geometry.size(), false);
  for (std::size_t i : resolve_ids(geometry, spec.hot_zone)) {
    theta[i] = spec.theta_hot;
    hot[i] = true;
  }
  for (std::size_t i : resolve_ids(geometry, spec.cold_zone)) {
    if (hot[i]) throw Error(ErrorCode::invalid_argument, "region '" + geometry.id(i) + "' is in both zones");
    theta[i] = spec.theta_cold;
  }
  const double intercept = spec.mode == Approach::population ? spec.alpha_pop : 0.0;
  Engine engine = make_stream(spec.seed, 0);
  boost::random::normal_distribution<double> noise(0.0, spec.sigma);
  std::vector<double> y(geometry.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = intercept + theta[i] + noise(engine);
  return geometry.with_outcome(std::move(y));
}

}  // namespace scanreg
