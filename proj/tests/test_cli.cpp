#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "scanreg/cli.hpp"
#include "scanreg/io.hpp"
#include "scanreg/scenario.hpp"
#include "support.hpp"

using namespace scanreg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::main_entry(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Scratch directory removed at scope exit.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() / ("scanreg_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

/// 30 points on a 6 x 5 grid with a Poisson excess in the 2 x 2 corner block.
std::string planted_csv(const TempDir& dir) {
  const std::string path = dir.file("planted.csv");
  std::ofstream f(path);
  f << "id,x,y,outcome,baseline\n";
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 6; ++c) {
      const bool hot = r < 2 && c < 2;
      f << "g" << r << c << ',' << c << ',' << r << ',' << (hot ? 14 : 3 + (r + c) % 3) << ",4\n";
    }
  }
  return path;
}

json without_metadata(const std::string& text) {
  json j = json::parse(text);
  j.erase("metadata");
  return j;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors") {
    TempDir dir;
    const std::string in = planted_csv(dir);
    const Run bad_model = invoke({"scan", "-i", in, "--model", "nonsense"});
    CHECK(bad_model.code == 1);
    const json e = json::parse(bad_model.err);
    CHECK(e["error"]["code"] == "usage");
    CHECK(e["error"]["exit"] == 1);
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"scan"}).code == 1);
    CHECK(invoke({"scan", "-i", dir.file("missing.csv")}).code == 1);
    const Run help = invoke({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("scan") != std::string::npos);
  }

  TEST_CASE("data errors exit with 2") {
    TempDir dir;
    const std::string path = dir.file("neg.csv");
    std::ofstream(path) << "id,x,y,outcome\nA,0,0,-1\nB,1,0,2\nC,2,0,1\n";
    const Run r = invoke({"scan", "-i", path, "--model", "poisson-pop"});
    CHECK(r.code == 2);
    CHECK(json::parse(r.err)["error"]["code"] == "invalid_data");
    const std::string broken = dir.file("broken.csv");
    std::ofstream(broken) << "id,x,y,outcome\nA,0,0,x\nB,1,0,2\n";
    CHECK(invoke({"scan", "-i", broken}).code == 2);
  }

  TEST_CASE("scan finds the planted block") {
    TempDir dir;
    const Run r = invoke({"scan", "-i", planted_csv(dir), "--model", "poisson-exp", "--zones", "circular",
                          "--max-frac", "0.5", "--top", "3", "--threads", "1"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["tool"] == "scanreg");
    CHECK(j["seed"] == 1);
    CHECK(j["model"] == "poisson-exp");
    const auto& mlc = j["result"]["mlc"];
    REQUIRE(mlc.is_object());
    std::set<std::string> members;
    for (const auto& m : mlc["members"]) members.insert(m.get<std::string>());
    for (const char* id : {"g00", "g01", "g10", "g11"}) CHECK(members.count(id) == 1);
    CHECK(j["result"]["clusters"].size() <= 3);
    CHECK(j["metadata"].contains("wall_clock_seconds"));
  }

  TEST_CASE("identical runs give identical documents apart from metadata") {
    TempDir dir;
    const std::string in = planted_csv(dir);
    const std::vector<std::string> base{"mc-test", "-i", in, "--model", "poisson-pop", "-R", "49", "--seed", "5"};
    auto with_threads = [&](const char* t) {
      auto args = base;
      args.insert(args.end(), {"--threads", t});
      return invoke(args);
    };
    const Run a = with_threads("1");
    const Run b = with_threads("1");
    const Run c = with_threads("2");
    REQUIRE(a.code == 0);
    CHECK(without_metadata(a.out).dump() == without_metadata(b.out).dump());
    CHECK(without_metadata(a.out).dump() == without_metadata(c.out).dump());
    const json j = json::parse(a.out);
    CHECK(j["monte_carlo"]["replicates"] == 49);
    CHECK(j["monte_carlo"]["p_value"].get<double>() == doctest::Approx(0.02));
    CHECK(j["seed"] == 5);
  }

  TEST_CASE("csv and geojson output") {
    TempDir dir;
    const std::string in = planted_csv(dir);
    const std::string table = dir.file("table.csv");
    const Run csv = invoke({"scan", "-i", in, "--model", "poisson-exp", "--format", "csv", "--zone-table", table});
    REQUIRE(csv.code == 0);
    CHECK(csv.out.rfind("rank,zone_id,llr,theta,p_value,region_id,x,y\n", 0) == 0);
    std::ifstream t(table);
    std::string header;
    std::getline(t, header);
    CHECK(header.rfind("zone_id,size,llr", 0) == 0);

    const std::string out = dir.file("clusters.geojson");
    const Run geo = invoke({"scan", "-i", in, "--model", "poisson-exp", "--format", "geojson", "-o", out});
    REQUIRE(geo.code == 0);
    CHECK(geo.out.empty());
    std::ifstream g(out);
    const json fc = json::parse(g);
    CHECK(fc["type"] == "FeatureCollection");
    REQUIRE_FALSE(fc["features"].empty());
    CHECK(fc["features"][0]["geometry"]["type"] == "MultiPoint");
    CHECK(fc["features"][0]["properties"]["rank"] == 1);
  }

  TEST_CASE("simulate then scan") {
    TempDir dir;
    const std::string data = dir.file("sim.csv");
    const Run sim = invoke({"simulate", "-i", SCANREG_DATA_DIR "/synthetic_281.csv", "--scenario",
                            SCANREG_DATA_DIR "/synthetic_281_population.ini", "-o", data});
    REQUIRE(sim.code == 0);
    const RegionTable t = load_regions(data);
    CHECK(t.size() == 281);
    const Run sim2 = invoke({"simulate", "-i", SCANREG_DATA_DIR "/synthetic_281.csv", "--scenario",
                             SCANREG_DATA_DIR "/synthetic_281_population.ini"});
    std::ifstream f(data);
    std::stringstream first;
    first << f.rdbuf();
    CHECK(first.str() == sim2.out);

    const Run r = invoke({"scan", "-i", data, "--model", "gauss-unknown-pop", "--max-frac", "0.3",
                          "--zone-table-limit", "5"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["result"]["mlc"].is_object());
    CHECK(j["result"]["zone_table"].size() == 5);
    CHECK(j["result"]["zone_table_truncated"] == true);
  }

  TEST_CASE("zones subcommand") {
    TempDir dir;
    const Run r = invoke({"zones", "-i", planted_csv(dir), "--max-frac", "0.1", "--format", "csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("zone_id,region_id\n", 0) == 0);
    const Run j = invoke({"zones", "-i", planted_csv(dir), "--zones", "singleton"});
    REQUIRE(j.code == 0);
    CHECK(json::parse(j.out)["zones"]["count"] == 30);
  }

  TEST_CASE("reproduction report") {
    TempDir dir;
    const std::string intercepts = dir.file("intercepts.csv");
    const Run r = invoke({"reproduce-sec4", "-i", SCANREG_DATA_DIR "/synthetic_281.csv", "--scenario",
                          SCANREG_DATA_DIR "/synthetic_281_expectation.ini", "--intercepts", intercepts});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    const auto& exp = j["experiment"];
    CHECK(exp["scenario"]["mode"] == "expectation");
    CHECK(exp["methods"].size() == 2);
    CHECK(exp["intercepts"]["count"].get<std::size_t>() > 1000);
    std::ifstream f(intercepts);
    std::string header;
    std::getline(f, header);
    CHECK(header == "zone_id,size,intercept");
  }

  TEST_CASE("exit codes by error class") {
    CHECK(cli::exit_code_for(ErrorCode::invalid_argument) == 1);
    CHECK(cli::exit_code_for(ErrorCode::parse) == 2);
    CHECK(cli::exit_code_for(ErrorCode::zero_total) == 2);
    CHECK(cli::exit_code_for(ErrorCode::non_convergence) == 3);
  }
}
