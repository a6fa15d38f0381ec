#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "waveguide/cli/app.hpp"
#include "waveguide/cli/commands.hpp"
#include "waveguide/cli/config.hpp"
#include "waveguide/errors.hpp"

using namespace waveguide;
using namespace waveguide::cli;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch() {
  const auto dir = fs::temp_directory_path() / "waveguide_cli_test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const auto p = scratch() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("ini files map onto the run configuration") {
  const auto p = write_file("ok.ini",
                            "; two discs\n"
                            "[geometry]\nconfig = two-distinct\na = 4\nb = 2.5\n"
                            "[solver]\nm = 0, 2\ntruncation = 30\nextrapolate = false\n"
                            "[output]\nout = result.json\n");
  const auto c = from_tree(Command::Spectrum, read_ini(p.string()), p.string());
  CHECK(c.geometry == Config::TwoDistinct);
  CHECK(c.a == 4.0);
  CHECK(c.b == 2.5);
  CHECK(c.m_list == std::vector<int>{0, 2});
  CHECK(c.truncation == 30);
  CHECK_FALSE(c.extrapolate);
  CHECK(c.out == "result.json");
  CHECK(c.geometry_value().b == 2.5);
}

TEST_CASE("configuration diagnostics name the field") {
  const auto reject = [](const std::string& text, const std::string& needle) {
    const auto p = write_file("bad.ini", text);
    try {
      (void)from_tree(Command::Spectrum, read_ini(p.string()), p.string());
      FAIL("accepted: " << text);
    } catch (const ConfigError& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  reject("[geometry]\na = -1\n", "geometry.a");
  reject("[geometry]\nconfig = two-distinct\na = 2\nb = 3\n", "geometry.b");
  reject("[solver]\ntruncation = 4\n", "solver.truncation");
  reject("[solver]\nm = 0, x\n", "solver.m");
  reject("[solver]\nbogus = 1\n", "solver.bogus");
  reject("[nowhere]\nx = 1\n", "nowhere");
  reject("[geometry]\nconfig = three\n", "geometry.config");

  // Syntax errors point at the line.
  const auto p = write_file("syntax.ini", "[geometry]\na = 1\n[broken\n");
  try {
    (void)read_ini(p.string());
    FAIL("accepted a broken section header");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
}

TEST_CASE("sweep configurations") {
  Tree t;
  t.put("sweep.axis", "b");
  t.put("geometry.a", "5");
  t.put("sweep.grid", "0.2, 0.1");
  CHECK_THROWS_AS(from_tree(Command::Sweep, t), ConfigError);
  t.put("sweep.grid", "0.1, 0.5, 1");
  const auto c = from_tree(Command::Sweep, t);
  CHECK(c.axis == SweepAxis::InnerRatio);
  CHECK(c.grid.size() == 3);
  Tree d;
  const auto defaults = from_tree(Command::Sweep, d);
  CHECK(defaults.grid.size() == 150);
  CHECK(defaults.grid.front() == doctest::Approx(0.2));
  CHECK(defaults.grid.back() == doctest::Approx(20.0));
  CHECK(invoke({"sweep", "--axis", "b", "--a", "5", "--grid-values", ""}).code == kExitConfig);
}

TEST_CASE("spectrum records") {
  const auto r = invoke({"spectrum", "--geometry", "two-equal", "--a", "3", "--m", "0,1,2,3", "--truncation", "20"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema"] == kSpectrumSchema);
  CHECK(j["config"]["geometry"]["a"] == 3.0);
  CHECK(j["provenance"]["truncation"] == 20);
  CHECK(j["provenance"]["wall_ms"].is_null());
  std::map<int, int> per_m;
  double previous_ground = 0.0;
  for (const auto& s : j["states"]) {
    for (const char* key : {"m", "n", "energy", "mean_radius", "residual_value", "residual_derivative", "bracket"}) {
      CHECK(s.contains(key));
    }
    CHECK(s["bracket"]["pass"] == true);
    const int m = s["m"];
    if (per_m[m]++ == 0) {
      CHECK(s["energy"].get<double>() > previous_ground);
      previous_ground = s["energy"];
    }
  }
  for (int m : {0, 1, 2, 3}) CHECK(per_m[m] >= 1);

  const auto empty = invoke({"spectrum", "--a", "0.1", "--m", "1"});
  REQUIRE(empty.code == kExitOk);
  CHECK(nlohmann::json::parse(empty.out)["states"].empty());

  // The radial problem depends on |m| only; the record keeps the sign.
  const auto plus = nlohmann::json::parse(invoke({"spectrum", "--a", "3", "--m", "1", "--truncation", "16"}).out);
  const auto minus = nlohmann::json::parse(invoke({"spectrum", "--a", "3", "--m", "-1", "--truncation", "16"}).out);
  REQUIRE(plus["states"].size() == minus["states"].size());
  for (std::size_t i = 0; i < plus["states"].size(); ++i) {
    CHECK(plus["states"][i]["energy"] == minus["states"][i]["energy"]);
    CHECK(minus["states"][i]["m"] == -1);
  }
}

TEST_CASE("identical configurations give identical bytes") {
  const std::vector<std::string> args{"spectrum", "--geometry", "two-distinct", "--a", "4", "--b", "2", "--m", "0,1",
                                      "--truncation", "16"};
  CHECK(invoke(args).out == invoke(args).out);
  const auto out = (scratch() / "det.csv").string();
  const std::vector<std::string> sweep{"sweep", "--a", "3", "--axis", "b", "--grid-values", "0.5,1", "--truncation",
                                       "12", "--out", out};
  REQUIRE(invoke(sweep).code == kExitOk);
  const auto first = slurp(out);
  const auto first_json = slurp(scratch() / "det.json");
  REQUIRE(invoke(sweep).code == kExitOk);
  CHECK(slurp(out) == first);
  CHECK(slurp(scratch() / "det.json") == first_json);
  CHECK(first.rfind("axis,state_m,state_n,E,mean_r\n", 0) == 0);
  CHECK(first.find('\r') == std::string::npos);
  CHECK(nlohmann::json::parse(first_json)["schema"] == kSweepSchema);
}

TEST_CASE("wavefunction CSV") {
  const auto r = invoke({"wavefunction", "--a", "0.74", "--m", "0", "--n", "0", "--grid-nr", "9", "--grid-nz", "3",
                         "--truncation", "20"});
  REQUIRE(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "r,z,f");
  int rows = 0;
  double first_r = -1.0, second_z = -1.0;
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string r_cell, z_cell;
    std::getline(cells, r_cell, ',');
    std::getline(cells, z_cell, ',');
    if (rows == 0) first_r = std::stod(r_cell);
    if (rows == 1) second_z = std::stod(z_cell);
    ++rows;
  }
  CHECK(rows == 27);
  // z varies fastest.
  CHECK(first_r == 0.0);
  CHECK(second_z == 0.5);
  CHECK(r.out.find('\r') == std::string::npos);
  CHECK(invoke({"wavefunction", "--a", "0.74", "--m", "0", "--n", "3"}).code == kExitConfig);
  CHECK(invoke({"wavefunction", "--a", "0.74", "--m", "0,1"}).code == kExitConfig);
}

TEST_CASE("exit codes") {
  CHECK(invoke({}).code == kExitConfig);
  CHECK(invoke({"spectrum", "--truncation", "3"}).code == kExitConfig);
  CHECK(invoke({"spectrum", "--config", "/nonexistent.ini"}).code == kExitConfig);
  CHECK(invoke({"spectrum", "--a", "1", "--unknown"}).code == kExitConfig);
  CHECK(invoke({"validate", "--inject-fault", "nonsense"}).code == kExitConfig);
  CHECK(invoke({"--help"}).code == kExitOk);
}

TEST_CASE("flags override the config file") {
  const auto p = write_file("over.ini", "[geometry]\na = 2\n[solver]\ntruncation = 16\n");
  const auto r = invoke({"spectrum", "--config", p.string(), "--a", "3"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["config"]["geometry"]["a"] == 3.0);
  CHECK(j["provenance"]["truncation"] == 16);
}

TEST_CASE("validation suites and fault injection") {
  const auto good = invoke({"validate"});
  CHECK(good.code == kExitOk);
  const auto report = nlohmann::json::parse(good.out);
  CHECK(report["schema"] == kValidateSchema);
  CHECK(report["suites"].size() == 6);
  for (const auto& s : report["suites"]) {
    CHECK(s["pass"] == true);
    CHECK(s.contains("wall_ms"));
  }
  const auto bad = invoke({"validate", "--inject-fault", "p2-sign"});
  CHECK(bad.code == kExitValidation);
  for (const auto& s : nlohmann::json::parse(bad.out)["suites"]) {
    CHECK(s["pass"] == (s["name"] != "coupling-oracle"));
  }
}
