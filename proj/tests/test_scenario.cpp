#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qbnf/error.hpp"
#include "qbnf/scenario.hpp"

using namespace qbnf;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = QBNF_SCENARIO_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qbnf_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* kMinimal = R"({
  "schema_version": 1,
  "model": {"kind": "cylinder", "orientable": true, "f": [0.0, 1.0], "mu": [MU]},
  "compute": {"N": 2, "h": [0.1], "basis": {"k_min": -3, "k_max": 3, "L_max": 4}}
})";

std::string minimal(const std::string& mu) {
  std::string s = kMinimal;
  s.replace(s.find("MU"), 2, mu);
  return s;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QBNF_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("bundled scenarios round-trip through the canonical serialization") {
    for (const char* name : {"quadratic_saddle", "quartic_saddle", "cylinder_unperturbed", "cylinder_cubic",
                             "nonorientable"}) {
      CAPTURE(name);
      const ScenarioConfig c = load_scenario(kScenarios / (std::string(name) + ".json"));
      const std::string text = serialize_scenario(c);
      const ScenarioConfig again = parse_scenario(text);
      CHECK(again == c);
      CHECK(serialize_scenario(again) == text);
    }
  }

  TEST_CASE("load-time validation names the problem") {
    CHECK_NOTHROW(parse_scenario(minimal("1.0")));
    CHECK_THROWS_WITH_AS(parse_scenario(minimal("-0.5")), doctest::Contains("mu(0)"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(minimal("0.0")), doctest::Contains("mu(0)"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario("{\"model\": {}}"), doctest::Contains("schema_version"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("not json"), ConfigError);
    std::string asc = minimal("1.0");
    asc.replace(asc.find("[0.1]"), 5, "[0.05, 0.1]");
    CHECK_THROWS_WITH_AS(parse_scenario(asc), doctest::Contains("descending"), ConfigError);
    std::string neg = minimal("1.0");
    neg.replace(neg.find("[0.1]"), 5, "[-0.1]");
    CHECK_THROWS_WITH_AS(parse_scenario(neg), doctest::Contains("positive"), ConfigError);
    std::string typo = minimal("1.0");
    typo.replace(typo.find("\"N\""), 3, "\"M\"");
    CHECK_THROWS_WITH_AS(parse_scenario(typo), doctest::Contains("'M'"), ConfigError);
    std::string version = minimal("1.0");
    version.replace(version.find("\"schema_version\": 1"), 19, "\"schema_version\": 7");
    CHECK_THROWS_AS(parse_scenario(version), ConfigError);
    std::string half = minimal("1.0");
    half.replace(half.find("\"mu\": [1.0]"), 11,
                 "\"mu\": [1.0], \"terms\": [{\"m\": 0.5, \"x\": 3, \"re\": 0.1}]");
    CHECK_THROWS_AS(parse_scenario(half), ConfigError);  // half mode on the orientable cylinder
    std::string big = minimal("1.0");
    big.replace(big.find("\"L_max\": 4"), 10, "\"L_max\": 4000");
    CHECK_THROWS_AS(parse_scenario(big), DimensionError);
  }

  TEST_CASE("plot data") {
    ResonanceLattice empty;
    CHECK(emit_plot_data(empty) == "re,im,k,l,source,pair_id\n");
    ResonanceLattice three;
    for (int k = 0; k < 3; ++k) three.entries.push_back({k, 0, Complex{0.1 * k, -0.05}});
    const std::string s = emit_plot_data(three);
    CHECK(std::count(s.begin(), s.end(), '\n') == 4);
    MatchReport r;
    r.pairs.push_back({1, 0, three.entries[1].z, three.entries[1].z + 1e-3, 1e-3});
    const std::string m = emit_plot_data(three, &r);
    CHECK(std::count(m.begin(), m.end(), '\n') == 5);
    CHECK(m.find(",1,0,predicted,0\n") != std::string::npos);
    CHECK(m.find(",1,0,computed,0\n") != std::string::npos);
    CHECK(m.find(",0,0,predicted,-1\n") != std::string::npos);
  }

  TEST_CASE("quadratic saddle run is complete and deterministic") {
    const ScenarioConfig c = load_scenario(kScenarios / "quadratic_saddle.json");
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const RunOutcome ra = run_scenario(c, Stage::Run, a);
    const RunOutcome rb = run_scenario(c, Stage::Run, b, 2);
    REQUIRE(ra.complete);
    REQUIRE(rb.complete);
    REQUIRE(ra.artifacts.size() == rb.artifacts.size());
    for (const auto& p : ra.artifacts) CHECK(slurp(p) == slurp(b / p.filename()));
    const std::string lattice = slurp(a / "lattice_h0.csv");
    CHECK(lattice.rfind("k,l,re_z,im_z\n", 0) == 0);
    // (0,0) entry is E0 + lambda2 h/2 - i lambda1 h/2 with h = 0.05.
    std::istringstream is(lattice);
    std::string header, row;
    std::getline(is, header);
    bool found = false;
    while (std::getline(is, row)) {
      if (row.rfind("0,0,", 0) != 0) continue;
      found = true;
      double re = 0, im = 0;
      REQUIRE(std::sscanf(row.c_str(), "0,0,%lf,%lf", &re, &im) == 2);
      CHECK(re == doctest::Approx(std::sqrt(2.0) * 0.025).epsilon(1e-15));
      CHECK(im == doctest::Approx(-0.025).epsilon(1e-15));
    }
    CHECK(found);
    CHECK(slurp(a / "spectrum_h0.csv").rfind("re_z,im_z,residual\n", 0) == 0);
    CHECK(slurp(a / "match_h0.csv").rfind("k,l,re_pred,im_pred,re_comp,im_comp,abs_err\n", 0) == 0);
    CHECK(slurp(a / "manifest.json").find("\"complete\"") != std::string::npos);
  }

  TEST_CASE("unperturbed cylinder lattice is the closed form") {
    const ScenarioConfig c = load_scenario(kScenarios / "cylinder_unperturbed.json");
    const fs::path out = scratch("cyl");
    REQUIRE(run_scenario(c, Stage::Lattice, out).complete);
    std::istringstream is(slurp(out / "lattice_h0.csv"));
    std::string row;
    std::getline(is, row);
    const double h = c.compute.h[0];
    const double S = std::get<CylinderModel>(c.model).action;
    int rows = 0;
    while (std::getline(is, row)) {
      int k = 0, l = 0;
      double re = 0, im = 0;
      REQUIRE(std::sscanf(row.c_str(), "%d,%d,%lf,%lf", &k, &l, &re, &im) == 4);
      CHECK(std::abs(re - (h * k - S / (2.0 * std::acos(-1.0)))) < 1e-15);
      CHECK(std::abs(im + (l + 0.5) * h) < 1e-15);
      ++rows;
    }
    CHECK(rows > 0);
    CHECK_FALSE(fs::exists(out / "spectrum_h0.csv"));
  }

  TEST_CASE("command line exit codes") {
    const fs::path out = scratch("cli");
    CHECK(run_cli("bnf --config " + (kScenarios / "cylinder_cubic.json").string() + " --out " + out.string()) == 0);
    CHECK(fs::exists(out / "normal_form.json"));
    CHECK(run_cli("run --config " + (kScenarios / "quadratic_saddle.json").string() + " --out " + out.string() +
                  " --threads AUTO --seed 5") == 0);
    const fs::path bad = out / "bad.json";
    std::ofstream(bad) << minimal("-1.0");
    CHECK(run_cli("run --config " + bad.string() + " --out " + out.string()) == 2);
    CHECK(run_cli("run --config " + (out / "missing.json").string()) == 2);
    CHECK(run_cli("lattice --config " + (kScenarios / "cylinder_cubic.json").string() + " --threads zero") == 2);
    CHECK(run_cli("frobnicate") == 2);
  }
}
