#include "scanreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/tokenizer.hpp>

#include "scanreg/error.hpp"

namespace scanreg {

namespace {

using Tokenizer = boost::tokenizer<boost::escaped_list_separator<char>>;

std::vector<std::string> split_csv_line(const std::string& line, std::size_t row) {
  std::vector<std::string> fields;
  try {
    Tokenizer tok(line, boost::escaped_list_separator<char>('\\', ',', '"'));
    for (const auto& f : tok) fields.push_back(boost::algorithm::trim_copy(f));
  } catch (const boost::escaped_list_error& e) {
    throw Error(ErrorCode::parse, "malformed CSV line, row " + std::to_string(row) + ": " + e.what());
  }
  return fields;
}

[[noreturn]] void cell_error(const char* what, std::size_t row, const std::string& column) {
  throw Error(ErrorCode::parse, std::string(what) + ", row " + std::to_string(row) + ", column '" + column + "'");
}

double parse_double(const std::string& cell, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    cell_error("non-numeric cell", row, column);
  }
  return v;
}

int parse_int(const std::string& cell, std::size_t row, const std::string& column) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    cell_error("non-integer cell", row, column);
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

RegionTable read_regions(std::istream& in, const ColumnMapping& schema) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse, "empty region file: missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line, 0);

  auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  auto require_column = [&](const std::string& name) {
    auto c = find_column(name);
    if (!c) throw Error(ErrorCode::parse, "missing column '" + name + "'");
    return *c;
  };

  const std::size_t c_id = require_column(schema.id);
  const std::size_t c_x = require_column(schema.x);
  const std::size_t c_y = require_column(schema.y);
  const std::size_t c_out = require_column(schema.outcome);
  const auto c_base = find_column(schema.baseline);
  const auto c_var = find_column(schema.variance);
  const auto c_time = find_column(schema.time);
  std::vector<std::size_t> c_cov;
  RegionColumns cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!schema.covariate_prefix.empty() && header[j].rfind(schema.covariate_prefix, 0) == 0) {
      c_cov.push_back(j);
      cols.covariate_names.push_back(header[j]);
    }
  }
  cols.covariate_count = c_cov.size();

  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (boost::algorithm::trim_copy(line).empty()) continue;
    ++row;
    const std::vector<std::string> f = split_csv_line(line, row);
    if (f.size() != header.size()) {
      throw Error(ErrorCode::parse, "row " + std::to_string(row) + " has " + std::to_string(f.size()) +
                                        " fields, header has " + std::to_string(header.size()));
    }
    if (f[c_id].empty()) cell_error("empty id", row, schema.id);
    cols.ids.push_back(f[c_id]);
    cols.coords.push_back({parse_double(f[c_x], row, schema.x), parse_double(f[c_y], row, schema.y)});
    cols.outcome.push_back(parse_double(f[c_out], row, schema.outcome));
    if (c_base) {
      const double b = parse_double(f[*c_base], row, schema.baseline);
      if (!(b > 0.0)) cell_error("non-positive baseline", row, schema.baseline);
      cols.baseline.push_back(b);
    }
    if (c_var) {
      const double v = parse_double(f[*c_var], row, schema.variance);
      if (!(v > 0.0)) cell_error("non-positive variance", row, schema.variance);
      cols.variance.push_back(v);
    }
    if (c_time) cols.time.push_back(parse_int(f[*c_time], row, schema.time));
    for (std::size_t j : c_cov) cols.covariates.push_back(parse_double(f[j], row, header[j]));
  }

  // Duplicate ids are only a duplicate within one period for space-time files.
  std::map<std::pair<int, std::string>, std::size_t> seen;
  for (std::size_t i = 0; i < cols.ids.size(); ++i) {
    const int t = cols.time.empty() ? 0 : cols.time[i];
    if (!seen.emplace(std::make_pair(t, cols.ids[i]), i).second) {
      throw Error(ErrorCode::parse,
                  "duplicate id '" + cols.ids[i] + "', row " + std::to_string(i + 1) + ", column '" + schema.id + "'");
    }
  }

  if (!cols.time.empty()) {
    // Keep ids unique at the table level; split_by_time restores the plain ids.
    bool multi_period = std::any_of(cols.time.begin(), cols.time.end(), [&](int t) { return t != cols.time.front(); });
    if (multi_period) {
      for (std::size_t i = 0; i < cols.ids.size(); ++i) cols.ids[i] += "@" + std::to_string(cols.time[i]);
    }
  }

  try {
    return RegionTable::create(std::move(cols));
  } catch (const Error& e) {
    throw Error(ErrorCode::parse, e.what());
  }
}

RegionTable load_regions(const std::filesystem::path& path, const ColumnMapping& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, "cannot open region file '" + path.string() + "'");
  return read_regions(in, schema);
}

void write_regions(const RegionTable& table, std::ostream& out) {
  out << "id,x,y,outcome,baseline";
  if (table.has_variance()) out << ",var";
  for (std::size_t j = 0; j < table.covariate_count(); ++j) {
    auto names = table.covariate_names();
    out << ',' << (names.empty() ? "cov_" + std::to_string(j + 1) : names[j]);
  }
  if (table.has_time()) out << ",t";
  out << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::string id = table.id(i);
    if (table.has_time()) {
      const std::string suffix = "@" + std::to_string(table.time()[i]);
      if (id.size() > suffix.size() && id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0) {
        id.erase(id.size() - suffix.size());
      }
    }
    const bool quote = id.find_first_of(",\"") != std::string::npos;
    if (quote) {
      std::string escaped;
      for (char ch : id) {
        if (ch == '"' || ch == '\\') escaped += '\\';
        escaped += ch;
      }
      out << '"' << escaped << '"';
    } else {
      out << id;
    }
    out << ',' << format_double(table.coords()[i].x) << ',' << format_double(table.coords()[i].y) << ','
        << format_double(table.outcome()[i]) << ',' << format_double(table.baseline()[i]);
    if (table.has_variance()) out << ',' << format_double(table.variance()[i]);
    for (std::size_t j = 0; j < table.covariate_count(); ++j) out << ',' << format_double(table.covariate(i, j));
    if (table.has_time()) out << ',' << table.time()[i];
    out << '\n';
  }
}

void save_regions(const RegionTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::parse, "cannot write region file '" + path.string() + "'");
  write_regions(table, out);
}

SpaceTimeTable split_by_time(const RegionTable& table) {
  if (!table.has_time()) {
    return SpaceTimeTable::create({table});
  }
  std::map<int, std::vector<std::size_t>> rows;
  for (std::size_t i = 0; i < table.size(); ++i) rows[table.time()[i]].push_back(i);
  std::vector<RegionTable> slices;
  const RegionColumns& all = table.columns();
  for (const auto& [t, idx] : rows) {
    RegionColumns c;
    c.covariate_count = all.covariate_count;
    c.covariate_names = all.covariate_names;
    const std::string suffix = "@" + std::to_string(t);
    for (std::size_t i : idx) {
      std::string id = all.ids[i];
      if (rows.size() > 1 && id.size() > suffix.size() &&
          id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0) {
        id.erase(id.size() - suffix.size());
      }
      c.ids.push_back(std::move(id));
      c.coords.push_back(all.coords[i]);
      c.outcome.push_back(all.outcome[i]);
      c.baseline.push_back(all.baseline[i]);
      if (!all.variance.empty()) c.variance.push_back(all.variance[i]);
      for (std::size_t j = 0; j < all.covariate_count; ++j) c.covariates.push_back(table.covariate(i, j));
    }
    slices.push_back(RegionTable::create(std::move(c)));
  }
  return SpaceTimeTable::create(std::move(slices));
}

}  // namespace scanreg
