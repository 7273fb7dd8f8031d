// Scenario documents and result files: strict parsing with path-qualified
// errors, exact unit round trips, canonical serialization, and the CSV/JSON
// writers the command-line tool emits.
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rs/config.hpp"
#include "rs/output.hpp"

using namespace rs;
namespace fs = std::filesystem;
using njson = nlohmann::json;

namespace {

std::string config_path(const char* stem) {
  return std::string(RS_SOURCE_DIR) + "/configs/" + stem + ".json";
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    parse_scenario_json(text);
    FAIL_CHECK("expected a config error mentioning \"" << needle << "\"");
  } catch (const ConfigError& e) {
    INFO("needle \"" << needle << "\" in \"" << std::string(e.what()) << "\"");
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

void check_same_scenario(const Scenario& a, const Scenario& b) {
  CHECK(a.name == b.name);
  CHECK(a.description == b.description);
  CHECK(a.depth == b.depth);
  CHECK(a.cells == b.cells);
  CHECK(a.area.is_constant() == b.area.is_constant());
  for (double z : {0.0, a.depth / 3.0, a.depth}) {
    CHECK(a.area.at(z) == b.area.at(z));
  }
  CHECK(a.settling.v0 == b.settling.v0);
  CHECK(a.settling.x_breve == b.settling.x_breve);
  CHECK(a.settling.eta_exp == b.settling.eta_exp);
  CHECK(a.settling.x_c == b.settling.x_c);
  CHECK(a.settling.alpha_comp == b.settling.alpha_comp);
  CHECK(a.settling.rho_s == b.settling.rho_s);
  CHECK(a.settling.rho_f == b.settling.rho_f);
  CHECK(a.settling.g == b.settling.g);
  CHECK(a.settling.x_hat == b.settling.x_hat);
  CHECK(a.settling.eps_r == b.settling.eps_r);
  CHECK(a.zero_reactions == b.zero_reactions);
  CHECK(a.asm1.Y_A == b.asm1.Y_A);
  CHECK(a.asm1.Y_H == b.asm1.Y_H);
  CHECK(a.asm1.f_P == b.asm1.f_P);
  CHECK(a.asm1.i_XB == b.asm1.i_XB);
  CHECK(a.asm1.i_XP == b.asm1.i_XP);
  CHECK(a.asm1.mu_H == b.asm1.mu_H);
  CHECK(a.asm1.K_S == b.asm1.K_S);
  CHECK(a.asm1.K_OH == b.asm1.K_OH);
  CHECK(a.asm1.K_NO == b.asm1.K_NO);
  CHECK(a.asm1.b_H == b.asm1.b_H);
  CHECK(a.asm1.eta_g == b.asm1.eta_g);
  CHECK(a.asm1.eta_h == b.asm1.eta_h);
  CHECK(a.asm1.k_h == b.asm1.k_h);
  CHECK(a.asm1.K_X == b.asm1.K_X);
  CHECK(a.asm1.mu_A == b.asm1.mu_A);
  CHECK(a.asm1.K_NH_gr == b.asm1.K_NH_gr);
  CHECK(a.asm1.K_NH == b.asm1.K_NH);
  CHECK(a.asm1.b_A == b.asm1.b_A);
  CHECK(a.asm1.K_OA == b.asm1.K_OA);
  CHECK(a.asm1.k_a == b.asm1.k_a);
  CHECK(a.oxygen_setpoint == b.oxygen_setpoint);
  CHECK(a.feed_shape == b.feed_shape);
  CHECK(a.feed_S == b.feed_S);
  CHECK(a.init_zbar == b.init_zbar);
  REQUIRE(a.init.size() == b.init.size());
  for (size_t i = 0; i < a.init.size(); ++i) {
    CHECK(a.init[i].z0 == b.init[i].z0);
    CHECK(a.init[i].z1 == b.init[i].z1);
    CHECK(a.init[i].C == b.init[i].C);
    CHECK(a.init[i].S == b.init[i].S);
  }
  REQUIRE(a.stages.size() == b.stages.size());
  for (size_t i = 0; i < a.stages.size(); ++i) {
    CHECK(a.stages[i].kind == b.stages[i].kind);
    CHECK(a.stages[i].t0 == b.stages[i].t0);
    CHECK(a.stages[i].t1 == b.stages[i].t1);
    CHECK(a.stages[i].Q_f == b.stages[i].Q_f);
    CHECK(a.stages[i].Q_u == b.stages[i].Q_u);
    CHECK(a.stages[i].Q_e == b.stages[i].Q_e);
    CHECK(a.stages[i].X_f == b.stages[i].X_f);
    CHECK(a.stages[i].aerated == b.stages[i].aerated);
  }
  CHECK(a.snapshot_every == b.snapshot_every);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bundled full-scale scenario parses with the documented cycle") {
  const Scenario sc = load_scenario(config_path("plant_sbr"));
  CHECK(sc.name == "plant_sbr");
  CHECK(sc.depth == 3.0);
  CHECK(sc.cells == 100);
  CHECK(sc.area.is_constant());
  CHECK(sc.area.at(1.5) == 395.0);
  CHECK_FALSE(sc.zero_reactions);
  CHECK(sc.oxygen_setpoint == 10.0 * 1e-3);

  REQUIRE(sc.stages.size() == 5);
  const StageKind order[] = {StageKind::kFill, StageKind::kReact,
                             StageKind::kSettle, StageKind::kDraw,
                             StageKind::kIdle};
  const double t0s[] = {0.0, 3600.0, 10800.0, 18000.0, 19800.0};
  const double t1s[] = {3600.0, 10800.0, 18000.0, 19800.0, 21600.0};
  for (size_t i = 0; i < 5; ++i) {
    CHECK(sc.stages[i].kind == order[i]);
    CHECK(sc.stages[i].t0 == t0s[i]);
    CHECK(sc.stages[i].t1 == t1s[i]);
  }
  CHECK(sc.stages[0].Q_f == 790.0 / 3600.0);
  CHECK(sc.stages[0].X_f == 5.0);
  CHECK(sc.stages[1].aerated);
  CHECK(sc.stages[3].Q_e == 1570.0 / 3600.0);
  CHECK(sc.stages[4].Q_u == 10.0 / 3600.0);
  CHECK(sc.norm_Q() == 1570.0 / 3600.0);

  CHECK(sc.init_zbar == 2.0);
  REQUIRE(sc.init.size() == 2);
  CHECK(sc.init[1].C[2] == 1.4503);
  CHECK(sc.feed_shape[1] == 0.5091);
  CHECK(sc.snapshot_every == 10.0);

  // the fill is sized to reach the rim exactly
  CHECK(sc.stages[0].Q_f * sc.stages[0].duration() ==
        doctest::Approx(sc.area.at(0.0) * sc.init_zbar).epsilon(1e-12));
}

TEST_CASE("bundled bench-scale scenarios parse with their overrides") {
  const Scenario desk = load_scenario(config_path("desk_sbr"));
  CHECK(desk.cells == 50);
  CHECK(desk.depth == 1.0);
  CHECK(desk.area.at(0.5) == 0.25);
  CHECK(desk.settling.alpha_comp == 0.02);
  CHECK(desk.settling.x_hat == 5.2);
  CHECK(desk.settling.eps_r == 0.5);
  const SettlingParams defaults{};
  CHECK(desk.settling.v0 == defaults.v0);  // untouched fields keep defaults
  CHECK(desk.settling.x_c == defaults.x_c);

  CHECK_FALSE(desk.zero_reactions);
  CHECK(desk.asm1.K_S == 100.0);
  CHECK(desk.asm1.K_OH == 20.0);
  CHECK(desk.asm1.K_OA == 80.0);
  CHECK(desk.asm1.K_NO == 10.0);
  CHECK(desk.asm1.K_NH_gr == 3.0);
  CHECK(desk.asm1.K_NH == 20.0);
  const Asm1Params adef{};
  CHECK(desk.asm1.mu_H == adef.mu_H);
  CHECK(desk.asm1.Y_H == adef.Y_H);

  REQUIRE(desk.stages.size() == 4);
  CHECK(desk.stages[0].Q_f == 5.0 / 3600.0);
  CHECK(desk.stages[0].t1 == 0.03 * 3600.0);
  CHECK(desk.stages[3].Q_u == 0.36 / 3600.0);
  CHECK(desk.total_time() == 0.2 * 3600.0);

  const Scenario settle = load_scenario(config_path("desk_settle"));
  CHECK(settle.zero_reactions);
  REQUIRE(settle.stages.size() == 1);
  CHECK(settle.stages[0].kind == StageKind::kSettle);
  CHECK(settle.stages[0].t1 == 180.0);
  CHECK(settle.init_zbar == 0.2);
}

TEST_CASE("serialization is a fixed point and inverts every unit exactly") {
  for (const char* stem : {"plant_sbr", "desk_sbr", "desk_settle"}) {
    INFO("scenario " << std::string(stem));
    const Scenario sc = load_scenario(config_path(stem));
    const std::string text = serialize_scenario(sc);
    const Scenario back = parse_scenario_json(text);
    check_same_scenario(sc, back);
    CHECK(serialize_scenario(back) == text);
  }
}

TEST_CASE("serialized documents show the human-friendly numbers") {
  const Scenario sc = load_scenario(config_path("plant_sbr"));
  const std::string text = serialize_scenario(sc);
  CHECK(text.find("\"Q_f_m3_per_h\": 790.0") != std::string::npos);
  CHECK(text.find("\"Q_e_m3_per_h\": 1570.0") != std::string::npos);
  CHECK(text.find("\"Q_u_m3_per_h\": 10.0") != std::string::npos);
  CHECK(text.find("\"to_h\": 5.5") != std::string::npos);
  CHECK(text.find("\"oxygen_setpoint_g_per_m3\": 10.0") != std::string::npos);

  const Scenario desk = load_scenario(config_path("desk_sbr"));
  const std::string dtext = serialize_scenario(desk);
  CHECK(dtext.find("\"Q_u_m3_per_h\": 0.36") != std::string::npos);
  CHECK(dtext.find("\"to_h\": 0.2") != std::string::npos);
  CHECK(dtext.find("\"Q_e_m3_per_h\": 3.75") != std::string::npos);
}

TEST_CASE("unknown keys are rejected with their path") {
  const std::string base = slurp(config_path("plant_sbr"));

  njson doc = njson::parse(base);
  doc["bogus"] = 1;
  expect_config_error(doc.dump(), "$: unknown key \"bogus\"");

  doc = njson::parse(base);
  doc["geometry"]["foo"] = 1;
  expect_config_error(doc.dump(), "$.geometry: unknown key \"foo\"");

  doc = njson::parse(base);
  doc["physics"]["nu"] = 2.0;
  expect_config_error(doc.dump(), "$.physics: unknown key \"nu\"");

  doc = njson::parse(base);
  doc["stages"][2]["ramp"] = true;
  expect_config_error(doc.dump(), "$.stages[2]: unknown key \"ramp\"");

  doc = njson::parse(slurp(config_path("desk_sbr")));
  doc["reactions"]["overrides"]["K_Z_g_per_m3"] = 1.0;
  expect_config_error(doc.dump(),
                      "$.reactions.overrides: unknown key \"K_Z_g_per_m3\"");
}

TEST_CASE("schema violations are reported before any physics runs") {
  const std::string base = slurp(config_path("plant_sbr"));

  expect_config_error("{", "not valid JSON");
  expect_config_error("[]", "top level must be an object");

  njson doc = njson::parse(base);
  doc["schema_version"] = 2;
  expect_config_error(doc.dump(), "unsupported version");

  doc = njson::parse(base);
  doc.erase("schema_version");
  expect_config_error(doc.dump(), "missing required key \"schema_version\"");

  doc = njson::parse(base);
  doc.erase("name");
  expect_config_error(doc.dump(), "missing required key \"name\"");

  doc = njson::parse(base);
  doc["geometry"].erase("depth_m");
  expect_config_error(doc.dump(), "missing required key \"depth_m\"");

  doc = njson::parse(base);
  doc["geometry"]["cells"] = 3.5;
  expect_config_error(doc.dump(), "$.geometry.cells: expected an integer");

  doc = njson::parse(base);
  doc["geometry"]["area"]["table"] = njson::array({njson::array({0.0, 395.0})});
  expect_config_error(doc.dump(), "exactly one of \"constant_m2\"");

  doc = njson::parse(base);
  doc["geometry"]["area"].erase("constant_m2");
  expect_config_error(doc.dump(), "exactly one of \"constant_m2\"");

  doc = njson::parse(base);
  doc["feed"]["solids_shape"] = njson::array({0.5, 0.5});
  expect_config_error(doc.dump(),
                      "$.feed.solids_shape: expected an array of 6 numbers");

  doc = njson::parse(base);
  doc["stages"][0]["aerated"] = 1;
  expect_config_error(doc.dump(), "expected true or false");

  doc = njson::parse(base);
  doc["stages"][0]["kind"] = "mix";
  expect_config_error(doc.dump(), "$.stages[0].kind");

  doc = njson::parse(base);
  doc["reactions"]["model"] = "fancy";
  expect_config_error(doc.dump(), "expected \"asm1\" or \"none\"");

  doc = njson::parse(slurp(config_path("desk_sbr")));
  doc["reactions"]["model"] = "none";
  expect_config_error(doc.dump(), "meaningless with model \"none\"");

  doc = njson::parse(base);
  doc["stages"] = njson::array();
  expect_config_error(doc.dump(), "$.stages: expected a non-empty array");
}

TEST_CASE("the stepping regime recorded in a document must match the stage") {
  const std::string base = slurp(config_path("plant_sbr"));

  njson doc = njson::parse(base);
  doc["stages"][1]["regime"] = "pde";  // react runs as the mixed ODE
  expect_config_error(doc.dump(), "runs as \"ode\"");

  doc = njson::parse(base);
  doc["stages"][0]["regime"] = "ode";  // fill runs as the column scheme
  expect_config_error(doc.dump(), "runs as \"pde\"");

  doc = njson::parse(base);
  doc["stages"][2]["regime"] = "sde";
  expect_config_error(doc.dump(), "expected \"pde\" or \"ode\"");
}

TEST_CASE("result files have the documented shape and are reproducible") {
  const Scenario sc = load_scenario(config_path("desk_settle"));
  const RunRecord rec = run_scenario(sc);

  const fs::path dir = fs::path("cli_writer_scratch");
  fs::create_directories(dir);
  write_run_outputs(dir.string(), sc, rec);

  const std::string profiles = slurp((dir / "profiles.csv").string());
  std::vector<std::string> lines;
  {
    std::stringstream ss(profiles);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
  }
  REQUIRE(!lines.empty());
  CHECK(lines[0] ==
        "t_s,z_m,X_I,X_S,X_BH,X_BA,X_P,X_ND,S_I,S_S,S_O,S_NO,S_NH,S_ND,X,W");
  CHECK(lines.size() == 1 + rec.snapshots.size() * static_cast<size_t>(rec.cells));

  // first snapshot: cells above the 0.2 m surface report zero mixture, the
  // first wetted cell reports the undiluted initial concentrations
  auto fields = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
  };
  const auto dry = fields(lines[1]);  // cell 1, z = 0.01 m
  REQUIRE(dry.size() == 16);
  CHECK(std::stod(dry[1]) == doctest::Approx(0.01).epsilon(1e-12));
  for (size_t c = 2; c < 16; ++c) CHECK(std::stod(dry[c]) == 0.0);
  const auto wet = fields(lines[11]);  // cell 11, z = 0.21 m, below the surface
  CHECK(std::stod(wet[2]) == doctest::Approx(0.8889).epsilon(1e-12));
  CHECK(std::stod(wet[14]) ==
        doctest::Approx(0.8889 + 0.0295 + 1.4503 + 0.0904 + 0.7371 + 0.0025)
            .epsilon(1e-12));
  CHECK(std::stod(wet[15]) > 990.0);  // mostly water

  const std::string boundary = slurp((dir / "boundary_series.csv").string());
  const size_t rows = static_cast<size_t>(
      std::count(boundary.begin(), boundary.end(), '\n'));
  CHECK(rows == 1 + rec.snapshots.size());
  CHECK(boundary.rfind("t_s,eff_X_I,", 0) == 0);

  njson audit = njson::parse(slurp((dir / "audit.json").string()));
  CHECK(audit["scenario"] == "desk_settle");
  CHECK(audit["cells"] == 50);
  CHECK(audit["variant"] == "split");
  CHECK(audit["cfl"].contains("tau_max_s"));
  CHECK(audit["cfl"]["surface_tau_s"].is_null());  // no flows anywhere
  CHECK(audit["mass_balance"]["worst_closure_rel"].get<double>() < 1e-11);
  CHECK(audit["stages"].size() == 1);
  CHECK(audit.contains("wall_seconds"));

  // rewriting the same record reproduces the CSVs byte for byte
  write_profiles_csv((dir / "profiles2.csv").string(),
                     Grid(sc.area, sc.depth, rec.cells), sc.settling, rec);
  CHECK(slurp((dir / "profiles2.csv").string()) == profiles);

  fs::remove_all(dir);
}

}  // TEST_SUITE
