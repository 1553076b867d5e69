#include "support.hpp"

#include "accport/cli.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace accport;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(ACCPORT_SOURCE_DIR) / "configs";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("accport_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto p = s.find(from);
    REQUIRE(p != std::string::npos);
    return s.replace(p, from.size(), to);
}

}  // namespace

TEST_CASE("quantities need units of the right kind") {
    CHECK(parse_quantity("130 km/h", Dimension::speed) == doctest::Approx(130 / 3.6));
    CHECK(parse_quantity("20 m/s", Dimension::speed) == 20);
    CHECK(parse_quantity("-1 m/s^2", Dimension::acceleration) == -1);
    CHECK(parse_quantity("0.9s", Dimension::time) == doctest::Approx(0.9));
    CHECK_THROWS_AS(parse_quantity("130", Dimension::speed), ConfigError);
    CHECK_THROWS_AS(parse_quantity("130 s", Dimension::speed), ConfigError);
    CHECK_THROWS_AS(parse_quantity("5 furlong", Dimension::length), ConfigError);
    CHECK_THROWS_AS(parse_quantity("fast", Dimension::speed), ConfigError);
}

TEST_CASE("case-study config ingests in SI") {
    const RunConfig c = load_run_config(kConfigs / "case_study.json");
    REQUIRE(c.vhcs.size() == 3);
    const auto ref = case_study_vhcs();
    for (int i = 0; i < 3; ++i) {
        CHECK(c.vhcs[i].name == ref[i].name);
        CHECK(c.vhcs[i].c1 == ref[i].c1);
        CHECK(c.vhcs[i].t_cycle == ref[i].t_cycle);
        CHECK(c.vhcs[i].k == ref[i].k);
        CHECK(c.vhcs[i].a_max == ref[i].a_max);
        CHECK(c.vhcs[i].w_max == ref[i].w_max);
    }
    CHECK(c.odd.v_max == doctest::Approx(130 / 3.6));
    CHECK(c.grid.v_d.size() == 1);
    CHECK(c.controllers.size() == 2);
    CHECK(fs::exists(c.controllers[0].path));
}

TEST_CASE("config errors") {
    const std::string text = slurp(kConfigs / "case_study.json");
    CHECK_THROWS_WITH_AS(parse_run_config(replace(text, "\"5 m\"", "5"), kConfigs),
                         doctest::Contains("units are mandatory"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(replace(text, "\"max_iter\"", "\"maxiter\""), kConfigs), ConfigError);
    CHECK_THROWS_AS(parse_run_config(replace(text, "\"schema_version\": 1", "\"schema_version\": 7"), kConfigs),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(replace(text, "mpc.json", "missing.json"), kConfigs), ConfigError);
    CHECK_THROWS_AS(parse_run_config(replace(text, "\"-4 m/s^2\"", "\"-4 km/h\""), kConfigs), ConfigError);
    CHECK_THROWS_AS(parse_run_config("{", kConfigs), ConfigError);
}

TEST_CASE("safe set files round-trip") {
    const SafeSet& s = case_set(2);
    const std::string t = safe_set_to_json_text(s);
    const SafeSet back = safe_set_from_json_text(t);
    CHECK(safe_set_to_json_text(back) == t);
    CHECK((back.poly.A() - s.poly.A()).norm() == 0.0);
    CHECK((back.poly.b() - s.poly.b()).norm() == 0.0);
    CHECK(back.exit == s.exit);
    CHECK(back.vhc.k == 2);
    CHECK(safe_set_file_name("VHC3", "car") == "VHC3.car.json");
    CHECK_THROWS_AS(safe_set_from_json_text(replace(t, "\"safe_set\"", "\"report\"")), ConfigError);
}

TEST_CASE("slice assignments") {
    const SliceAssignment a = parse_assignment("v_T=20,delay=0", 2);
    REQUIRE(a.fixed.size() == 5);
    CHECK_FALSE(a.fixed[0]);
    CHECK(*a.fixed[1] == 20);
    CHECK(*a.fixed[3] == 0);
    CHECK(*a.fixed[4] == 0);
    CHECK(*parse_assignment("v_T=72 km/h", 1).fixed[1] == doctest::Approx(20));
    CHECK(*parse_assignment("delay1=-1", 1).fixed[3] == -1);
    CHECK_THROWS_AS(parse_assignment("speed=3", 1), ConfigError);
    CHECK_THROWS_AS(parse_assignment("v_T", 1), ConfigError);
    CHECK_THROWS_AS(parse_assignment("h=5 km/h", 1), ConfigError);
}

TEST_CASE("slice csv exports") {
    const SafeSet& s = case_set(0);
    const SliceOutput s3 = compute_slice(s, parse_assignment("delay=0", 1));
    CHECK(s3.free_names == std::vector<std::string>{"v", "v_T", "h"});
    const std::string facets = slice_facets_csv(s3);
    CHECK(facets.rfind("v,v_T,h,b\n", 0) == 0);
    CHECK(std::count(facets.begin(), facets.end(), '\n') == 1 + s3.poly.rows());

    const SliceOutput s2 = compute_slice(s, parse_assignment("v_T=20,delay=0", 1));
    const std::string grid = slice_grid_csv(s2, 10);
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 1 + 100);
    CHECK(grid.find(",1\n") != std::string::npos);

    const SliceOutput none = compute_slice(s, parse_assignment("h=1000,delay=0", 1));
    CHECK(none.empty);
    CHECK(slice_facets_csv(none) == "v,v_T,b\n");
    CHECK(slice_grid_csv(none, 10) == "v,v_T,inside\n");
}

TEST_CASE("slice command warns on an empty slice") {
    const fs::path dir = scratch("slice");
    std::ofstream(dir / "s.json") << safe_set_to_json_text(case_set(0));
    std::ostringstream out, err;
    CHECK(cmd_slice(dir / "s.json", "h=1000,delay=0", dir / "far.csv", 100, {out, err}) == 0);
    CHECK(err.str().find("empty") != std::string::npos);
    CHECK(slurp(dir / "far.csv") == "v,v_T,b\n");
    CHECK(fs::exists(dir / "far_grid.csv"));
}

TEST_CASE("rcis command flags an empty set") {
    const RunConfig c = load_run_config(kConfigs / "strong_disturbance.json");
    const fs::path dir = scratch("strong");
    std::ostringstream out, err;
    CHECK(cmd_rcis(c, dir, {out, err}) == 1);
    const SafeSet s = load_safe_set(dir / "VHC1.car.json");
    CHECK(s.empty);
    CHECK(slurp(dir / "rcis_summary.json").find("\"empty\": true") != std::string::npos);
}

TEST_CASE("rcis and check commands end to end") {
    RunConfig c = load_run_config(kConfigs / "case_study.json");
    c.vhcs.resize(1);
    const fs::path dir = scratch("e2e");
    std::ostringstream out, err;
    CHECK(cmd_rcis(c, dir / "sets", {out, err}) == 0);
    CHECK(fs::exists(dir / "sets" / "VHC1.car.json"));

    const int code = cmd_check(c, dir / "sets", dir / "a", {out, err});
    CHECK(code == 1);  // the MPC cell is UNSAFE
    CHECK(cmd_check(c, dir / "sets", dir / "b", {out, err}) == code);
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    CHECK(slurp(dir / "a" / "report.txt") == slurp(dir / "b" / "report.txt"));
    const std::string csv = slurp(dir / "a" / "counterexamples.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + x + x_next
    CHECK(fs::exists(dir / "a" / "timing.json"));

    // unknown controller type: ERROR cells, exit 2
    std::ofstream(dir / "odd.json") << "{\"schema_version\": 1, \"type\": \"lookup\", \"saturation\": [-4, 2]}";
    c.controllers = {{"odd", dir / "odd.json"}};
    CHECK(cmd_check(c, dir / "sets", dir / "c", {out, err}) == 2);
    CHECK(slurp(dir / "c" / "report.json").find("unknown controller type") != std::string::npos);

    // missing safe set: refused per cell
    c.controllers = load_run_config(kConfigs / "case_study.json").controllers;
    CHECK(cmd_check(c, dir / "nowhere", dir / "d", {out, err}) == 2);
    CHECK(slurp(dir / "d" / "report.json").find("safe set file not found") != std::string::npos);
}
