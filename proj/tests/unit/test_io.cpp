#include "doctest.h"
#include "support.hpp"

#include "mcf4d/cli.hpp"
#include "mcf4d/config.hpp"
#include "mcf4d/io.hpp"

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace mcf4d;
using testing::make;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "mcf4d_unit" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  return {code, out.str(), err.str()};
}

const char* kSmallGraph =
    "scenario.name = symplectic_graph\n"
    "scenario.n1 = 16\n"
    "scenario.n2 = 16\n"
    "controls.t_end = 0.05\n"
    "controls.stride = 5\n"
    "weight.x0 = node0\n"
    "weight.t0 = 1\n"
    "diag.kind = symplectic\n";

}  // namespace

TEST_SUITE("io") {

TEST_CASE("scenarios") {
  const auto torus = make(ScenarioName::clifford_torus, 64);
  CHECK((torus.positions[0] - Vec4(1, 0, 1, 0)).norm() == 0.0);

  const auto lag = make(ScenarioName::lagrangian_graph, 32);
  for (double c : build_geometry(lag).cos_alpha) CHECK(std::abs(c) < 1e-10);

  ScenarioSpec g;
  g.name = ScenarioName::grim_reaper_product;
  g.n1 = 129;
  g.n2 = 17;
  const auto grim = generate_scenario(g);
  const auto b = build_geometry(grim);
  const NodeIndex tip = grim.grid.node(64, 8);
  CHECK(std::abs(grim.positions[tip][0]) < 1e-15);
  CHECK(b.norm_a2[tip] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(*std::max_element(b.norm_a2.begin(), b.norm_a2.end()) == doctest::Approx(1.0).epsilon(1e-6));
  for (int i = 2; i < 127; ++i) {
    const NodeIndex n = grim.grid.node(i, 8);
    CHECK(b.lag_angle_unit[n].real() == doctest::Approx(std::cos(grim.positions[n][0])).epsilon(1e-6));
  }

  for (auto name : {ScenarioName::plane, ScenarioName::complex_line, ScenarioName::sphere_ode,
                    ScenarioName::clifford_torus, ScenarioName::lagrangian_graph, ScenarioName::symplectic_graph,
                    ScenarioName::grim_reaper_product}) {
    ScenarioSpec sp;
    sp.name = name;
    sp.n1 = 33;
    sp.n2 = 16;
    const auto s = generate_scenario(sp);
    const auto bb = build_geometry(s);
    for (std::size_t i = 0; i < bb.size(); ++i) CHECK(bb.norm_h2[i] <= 2 * bb.norm_a2[i] + 1e-12);
    CHECK(parse_scenario_name(scenario_name(name)) == name);
  }
}

TEST_CASE("scenario ranges") {
  ScenarioSpec s;
  s.name = ScenarioName::grim_reaper_product;
  s.n1 = 33;
  s.x_max = 1.6;
  CHECK_THROWS_AS(generate_scenario(s), Error);
  s.name = ScenarioName::symplectic_graph;
  s.amplitude = -0.1;
  CHECK_THROWS_AS(generate_scenario(s), Error);
  s.amplitude = 0.1;
  s.n2 = 4;
  CHECK_THROWS_AS(generate_scenario(s), Error);
  CHECK_THROWS_AS(parse_scenario_name("torus"), Error);
}

TEST_CASE("config parsing") {
  const auto m = parse_config_text("# comment\n a = 1 \n\nb=two # trailing\n");
  CHECK(m.size() == 2);
  CHECK(m.at("a") == "1");
  CHECK(m.at("b") == "two");

  auto bad_config = [](const std::string& text) {
    try {
      make_run_config(parse_config_text(text));
      return false;
    } catch (const Error& e) {
      return e.kind() == ErrorKind::BadConfig || e.kind() == ErrorKind::BadP;
    }
  };
  CHECK(bad_config("a = 1\na = 2\n"));
  CHECK(bad_config("no equals sign\n"));
  CHECK(bad_config(" = 3\n"));
  CHECK(bad_config("scenario.nam = plane\n"));
  CHECK(bad_config("scenario.n1 = 3.5\n"));
  CHECK(bad_config("weight.x0 = node0\n"));
  CHECK(bad_config("weight.x0 = 1,2,3\nweight.t0 = 1\n"));
  CHECK(bad_config("diag.kind = symplectic\ndiag.p = 0.7\n"));
  CHECK(bad_config("output.snapshots = maybe\n"));

  const auto c = make_run_config(parse_config_text(kSmallGraph));
  CHECK(c.scenario.name == ScenarioName::symplectic_graph);
  CHECK(c.weight_at_node0);
  REQUIRE(c.weight.has_value());
  CHECK(c.weight->reference_time == 1.0);
  CHECK(c.diagnostic_p() == 0.45);
  CHECK(c.controls.stride == 5);
}

TEST_CASE("snapshot roundtrip") {
  auto s = make(ScenarioName::symplectic_graph, 16);
  s.time = 0.1 + 1e-17;
  s.positions[3][1] = std::nextafter(1.0 / 3.0, 1.0);
  std::stringstream ss;
  write_snapshot(ss, s);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "MCF4D 1 16 16 1 1 " + format_real(s.time));
  ss.seekg(0);
  const auto snap = read_snapshot(ss);
  const auto back = restore_state(snap, s);
  CHECK(back.time == s.time);
  for (std::size_t i = 0; i < s.positions.size(); ++i) CHECK(back.positions[i] == s.positions[i]);
  CHECK(back.period_shift[0] == s.period_shift[0]);

  std::stringstream bad("MCF4D 2 16 16 1 1 0\n");
  CHECK_THROWS_AS(read_snapshot(bad), Error);
  std::stringstream cut("MCF4D 1 8 8 0 0 0\n1 2 3 4\n");
  CHECK_THROWS_AS(read_snapshot(cut), Error);
  CHECK_THROWS_AS(restore_state(snap, make(ScenarioName::symplectic_graph, 24)), Error);
}

TEST_CASE("timeseries format") {
  CHECK(std::string(kTimeseriesHeader) ==
        "step,t,area,max_A2,max_H2,min_cos_alpha,min_cos_theta,psi,rhs_drift,rhs_dissipation,rhs_gradient,min_detg");
  StepScalars row;
  row.step = 7;
  row.time = 0.5;
  row.area = 1.0 / 3.0;
  std::stringstream ss;
  write_timeseries(ss, std::span<const StepScalars>(&row, 1));
  std::string header, line;
  std::getline(ss, header);
  std::getline(ss, line);
  CHECK(header == kTimeseriesHeader);
  CHECK(line == "7,0.5,0.33333333333333331,nan,nan,nan,nan,nan,nan,nan,nan,nan");
  CHECK(format_real(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("report json fields") {
  TheoremReport r;
  r.lhs = 0.25;
  const auto j = to_json(r);
  for (const char* key : {"kind", "supA2Before", "scaleApplied", "h2", "delta", "lhs", "verdict", "hypotheses",
                          "theoremApplies", "interpretation"}) {
    CHECK(j.contains(key));
  }
  for (const char* key : {"ancient", "complete", "areaRatioChecked", "supA2Normalized"}) {
    CHECK(j["hypotheses"].contains(key));
  }
  CHECK(j["verdict"] == "satisfied");
  GradientProbe g;
  g.identity_defect = std::nan("");
  CHECK(to_json(g)["identityDefect"].is_null());
}

TEST_CASE("simulate writes outputs and is deterministic") {
  const auto dir = scratch("simulate");
  const auto cfg = write_text(dir / "run.cfg", kSmallGraph);
  const auto a = cli({"simulate", "--config", cfg.string(), "--out", (dir / "a").string()});
  const auto b = cli({"simulate", "--config", cfg.string(), "--out", (dir / "b").string()});
  REQUIRE(a.code == kExitOk);
  REQUIRE(b.code == kExitOk);
  const auto ts = slurp(dir / "a" / "timeseries.csv");
  CHECK(ts.rfind(std::string(kTimeseriesHeader) + "\n", 0) == 0);
  CHECK(ts == slurp(dir / "b" / "timeseries.csv"));
  std::size_t snaps = 0;
  for (const auto& e : fs::directory_iterator(dir / "a" / "snapshots")) {
    ++snaps;
    CHECK(slurp(e.path()) == slurp(dir / "b" / "snapshots" / e.path().filename()));
  }
  CHECK(snaps >= 2);
  const auto snap = read_snapshot(dir / "a" / "snapshots" / "snap_00000.txt");
  CHECK(snap.n1 == 16);
  CHECK(snap.time == 0.0);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("exit");
  CHECK(cli({"simulate", "--config", (dir / "missing.cfg").string()}).code == kExitPrecondition);
  CHECK(cli({"bogus"}).code == kExitPrecondition);
  CHECK(cli({"simulate"}).code == kExitPrecondition);
  CHECK(cli({"--help"}).code == kExitOk);

  const auto bad = write_text(dir / "bad.cfg", "scenario.name = plane\ncontrols.speed = 2\n");
  const auto r = cli({"simulate", "--config", bad.string(), "--out", (dir / "o").string()});
  CHECK(r.code == kExitPrecondition);
  CHECK(r.err.find("BadConfig") != std::string::npos);

  const auto flat = write_text(dir / "flat.cfg", "scenario.name = plane\nscenario.n1 = 16\nscenario.n2 = 16\n"
                                                  "controls.t_end = 0.01\n");
  const auto t = cli({"theorem", "--config", flat.string(), "--out", (dir / "t").string()});
  CHECK(t.code == kExitNumerical);
  CHECK(t.err.find("ZeroCurvature") != std::string::npos);

  const auto graph = write_text(dir / "g.cfg", kSmallGraph);
  const auto v = cli({"verify", "--config", graph.string(), "--refine", "2", "--out", (dir / "v").string()});
  CHECK(v.code == kExitPrecondition);
}

TEST_CASE("cutoff scan") {
  const auto dir = scratch("cutoff");
  const auto r = cli({"cutoff-scan", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "cutoff.json"));
  CHECK(j["c1"].get<double>() == doctest::Approx(cutoff_constants().c1));
  std::ifstream csv(dir / "cutoff.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 10002);
}

}
