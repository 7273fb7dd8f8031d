#include "rs/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace rs {

namespace {

using njson = nlohmann::json;
using ojson = nlohmann::ordered_json;

constexpr double kSecPerHour = 3600.0;
constexpr double kKgPerGram = 1e-3;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void expect_object(const njson& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
}

void expect_keys(const njson& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) fail(path, "unknown key \"" + it.key() + "\"");
  }
}

const njson* get_opt(const njson& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const njson& get_req(const njson& obj, const std::string& path,
                     const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    fail(path, std::string("missing required key \"") + key + "\"");
  }
  return *it;
}

double as_num(const njson& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

int as_int(const njson& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<int>();
}

bool as_bool(const njson& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

std::string as_str(const njson& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

std::array<double, 6> as_vec6(const njson& v, const std::string& path) {
  if (!v.is_array() || v.size() != 6) {
    fail(path, "expected an array of 6 numbers");
  }
  std::array<double, 6> out{};
  for (size_t i = 0; i < 6; ++i) {
    out[i] = as_num(v[i], path + "[" + std::to_string(i) + "]");
  }
  return out;
}

// Invert a unit conversion p -> fwd(p) so that serializing value `si`
// round-trips bit-exactly: find p near `guess` with fwd(p) == si.
template <class F>
double invert_map(double si, double guess, F fwd) {
  if (fwd(guess) == si) return guess;
  for (int dir = 0; dir < 2; ++dir) {
    double q = guess;
    const double toward = dir == 0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
    for (int it = 0; it < 4; ++it) {
      q = std::nextafter(q, toward);
      if (fwd(q) == si) return q;
    }
  }
  return guess;  // no exact preimage; closest printed value
}

double seconds_to_hours(double s) {
  return invert_map(s, s / kSecPerHour,
                    [](double p) { return p * kSecPerHour; });
}

double flow_to_per_hour(double si) {
  return invert_map(si, si * kSecPerHour,
                    [](double p) { return p / kSecPerHour; });
}

double kg_to_grams(double si) {
  return invert_map(si, si / kKgPerGram,
                    [](double p) { return p * kKgPerGram; });
}

StageKind stage_kind_from(const std::string& s, const std::string& path) {
  if (s == "fill") return StageKind::kFill;
  if (s == "react") return StageKind::kReact;
  if (s == "settle") return StageKind::kSettle;
  if (s == "draw") return StageKind::kDraw;
  if (s == "idle") return StageKind::kIdle;
  fail(path, "expected one of \"fill\", \"react\", \"settle\", \"draw\", "
             "\"idle\"");
}

void parse_physics(const njson& ph, SettlingParams& p) {
  const std::string path = "$.physics";
  expect_object(ph, path);
  expect_keys(ph, path,
              {"v0_m_per_s", "x_breve_kg_per_m3", "eta", "x_c_kg_per_m3",
               "alpha_comp_m2_per_s2", "rho_s_kg_per_m3", "rho_f_kg_per_m3",
               "g_m_per_s2", "x_hat_kg_per_m3", "eps_r_kg_per_m3"});
  auto num = [&](const char* key, double& dst) {
    if (const njson* v = get_opt(ph, key)) dst = as_num(*v, path + "." + key);
  };
  num("v0_m_per_s", p.v0);
  num("x_breve_kg_per_m3", p.x_breve);
  num("eta", p.eta_exp);
  num("x_c_kg_per_m3", p.x_c);
  num("alpha_comp_m2_per_s2", p.alpha_comp);
  num("rho_s_kg_per_m3", p.rho_s);
  num("rho_f_kg_per_m3", p.rho_f);
  num("g_m_per_s2", p.g);
  num("x_hat_kg_per_m3", p.x_hat);
  num("eps_r_kg_per_m3", p.eps_r);
}

void parse_kinetics_overrides(const njson& ov, Asm1Params& a) {
  const std::string path = "$.reactions.overrides";
  expect_object(ov, path);
  expect_keys(ov, path,
              {"Y_A", "Y_H", "f_P", "i_XB", "i_XP", "mu_H_per_d",
               "K_S_g_per_m3", "K_OH_g_per_m3", "K_NO_g_per_m3", "b_H_per_d",
               "eta_g", "eta_h", "k_h_per_d", "K_X", "mu_A_per_d",
               "K_NH_growth_g_per_m3", "K_NH_g_per_m3", "b_A_per_d",
               "K_OA_g_per_m3", "k_a_m3_per_g_d"});
  auto num = [&](const char* key, double& dst) {
    if (const njson* v = get_opt(ov, key)) dst = as_num(*v, path + "." + key);
  };
  num("Y_A", a.Y_A);
  num("Y_H", a.Y_H);
  num("f_P", a.f_P);
  num("i_XB", a.i_XB);
  num("i_XP", a.i_XP);
  num("mu_H_per_d", a.mu_H);
  num("K_S_g_per_m3", a.K_S);
  num("K_OH_g_per_m3", a.K_OH);
  num("K_NO_g_per_m3", a.K_NO);
  num("b_H_per_d", a.b_H);
  num("eta_g", a.eta_g);
  num("eta_h", a.eta_h);
  num("k_h_per_d", a.k_h);
  num("K_X", a.K_X);
  num("mu_A_per_d", a.mu_A);
  num("K_NH_growth_g_per_m3", a.K_NH_gr);
  num("K_NH_g_per_m3", a.K_NH);
  num("b_A_per_d", a.b_A);
  num("K_OA_g_per_m3", a.K_OA);
  num("k_a_m3_per_g_d", a.k_a);
}

AreaProfile parse_area(const njson& ar) {
  const std::string path = "$.geometry.area";
  expect_object(ar, path);
  expect_keys(ar, path, {"constant_m2", "table"});
  const njson* constant = get_opt(ar, "constant_m2");
  const njson* table = get_opt(ar, "table");
  if ((constant != nullptr) == (table != nullptr)) {
    fail(path, "give exactly one of \"constant_m2\" and \"table\"");
  }
  if (constant != nullptr) {
    return AreaProfile::constant(as_num(*constant, path + ".constant_m2"));
  }
  if (!table->is_array() || table->empty()) {
    fail(path + ".table", "expected a non-empty array of [depth_m, area_m2]");
  }
  std::vector<std::pair<double, double>> points;
  points.reserve(table->size());
  for (size_t i = 0; i < table->size(); ++i) {
    const std::string at = path + ".table[" + std::to_string(i) + "]";
    const njson& row = (*table)[i];
    if (!row.is_array() || row.size() != 2) {
      fail(at, "expected [depth_m, area_m2]");
    }
    points.emplace_back(as_num(row[0], at + "[0]"), as_num(row[1], at + "[1]"));
  }
  return AreaProfile::piecewise_linear(std::move(points));
}

}  // namespace

Scenario parse_scenario_json(const std::string& text) {
  njson doc;
  try {
    doc = njson::parse(text);
  } catch (const njson::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  expect_keys(doc, "$",
              {"schema_version", "name", "description", "geometry", "physics",
               "reactions", "feed", "initial", "stages", "output"});

  const int ver =
      as_int(get_req(doc, "$", "schema_version"), "$.schema_version");
  if (ver != 1) fail("$.schema_version", "unsupported version (expected 1)");

  Scenario sc;
  sc.name = as_str(get_req(doc, "$", "name"), "$.name");
  if (const njson* d = get_opt(doc, "description")) {
    sc.description = as_str(*d, "$.description");
  }

  const njson& ge = get_req(doc, "$", "geometry");
  expect_object(ge, "$.geometry");
  expect_keys(ge, "$.geometry", {"depth_m", "cells", "area"});
  sc.depth = as_num(get_req(ge, "$.geometry", "depth_m"), "$.geometry.depth_m");
  sc.cells = as_int(get_req(ge, "$.geometry", "cells"), "$.geometry.cells");
  sc.area = parse_area(get_req(ge, "$.geometry", "area"));

  if (const njson* ph = get_opt(doc, "physics")) {
    parse_physics(*ph, sc.settling);
  }

  if (const njson* re = get_opt(doc, "reactions")) {
    const std::string path = "$.reactions";
    expect_object(*re, path);
    expect_keys(*re, path, {"model", "oxygen_setpoint_g_per_m3", "overrides"});
    const std::string model =
        as_str(get_req(*re, path, "model"), path + ".model");
    if (model == "none") {
      sc.zero_reactions = true;
    } else if (model != "asm1") {
      fail(path + ".model", "expected \"asm1\" or \"none\"");
    }
    if (const njson* o = get_opt(*re, "oxygen_setpoint_g_per_m3")) {
      sc.oxygen_setpoint =
          as_num(*o, path + ".oxygen_setpoint_g_per_m3") * kKgPerGram;
    }
    if (const njson* ov = get_opt(*re, "overrides")) {
      if (sc.zero_reactions) {
        fail(path + ".overrides", "meaningless with model \"none\"");
      }
      parse_kinetics_overrides(*ov, sc.asm1);
    }
  }

  if (const njson* fe = get_opt(doc, "feed")) {
    const std::string path = "$.feed";
    expect_object(*fe, path);
    expect_keys(*fe, path, {"solids_shape", "solubles_kg_per_m3"});
    if (const njson* v = get_opt(*fe, "solids_shape")) {
      sc.feed_shape = as_vec6(*v, path + ".solids_shape");
    }
    if (const njson* v = get_opt(*fe, "solubles_kg_per_m3")) {
      sc.feed_S = as_vec6(*v, path + ".solubles_kg_per_m3");
    }
  }

  const njson& in = get_req(doc, "$", "initial");
  expect_object(in, "$.initial");
  expect_keys(in, "$.initial", {"zbar_m", "segments"});
  sc.init_zbar = as_num(get_req(in, "$.initial", "zbar_m"), "$.initial.zbar_m");
  if (const njson* segs = get_opt(in, "segments")) {
    if (!segs->is_array()) fail("$.initial.segments", "expected an array");
    sc.init.reserve(segs->size());
    for (size_t i = 0; i < segs->size(); ++i) {
      const std::string at = "$.initial.segments[" + std::to_string(i) + "]";
      const njson& seg = (*segs)[i];
      expect_object(seg, at);
      expect_keys(seg, at,
                  {"from_m", "to_m", "solids_kg_per_m3", "solubles_kg_per_m3"});
      InitSegment s;
      s.z0 = as_num(get_req(seg, at, "from_m"), at + ".from_m");
      s.z1 = as_num(get_req(seg, at, "to_m"), at + ".to_m");
      if (const njson* v = get_opt(seg, "solids_kg_per_m3")) {
        s.C = as_vec6(*v, at + ".solids_kg_per_m3");
      }
      if (const njson* v = get_opt(seg, "solubles_kg_per_m3")) {
        s.S = as_vec6(*v, at + ".solubles_kg_per_m3");
      }
      sc.init.push_back(s);
    }
  }

  const njson& sts = get_req(doc, "$", "stages");
  if (!sts.is_array() || sts.empty()) {
    fail("$.stages", "expected a non-empty array");
  }
  sc.stages.reserve(sts.size());
  for (size_t i = 0; i < sts.size(); ++i) {
    const std::string at = "$.stages[" + std::to_string(i) + "]";
    const njson& st = sts[i];
    expect_object(st, at);
    expect_keys(st, at,
                {"kind", "from_h", "to_h", "Q_f_m3_per_h", "Q_u_m3_per_h",
                 "Q_e_m3_per_h", "X_f_kg_per_m3", "aerated", "regime"});
    Stage s;
    s.kind = stage_kind_from(as_str(get_req(st, at, "kind"), at + ".kind"),
                             at + ".kind");
    s.t0 = as_num(get_req(st, at, "from_h"), at + ".from_h") * kSecPerHour;
    s.t1 = as_num(get_req(st, at, "to_h"), at + ".to_h") * kSecPerHour;
    if (const njson* v = get_opt(st, "Q_f_m3_per_h")) {
      s.Q_f = as_num(*v, at + ".Q_f_m3_per_h") / kSecPerHour;
    }
    if (const njson* v = get_opt(st, "Q_u_m3_per_h")) {
      s.Q_u = as_num(*v, at + ".Q_u_m3_per_h") / kSecPerHour;
    }
    if (const njson* v = get_opt(st, "Q_e_m3_per_h")) {
      s.Q_e = as_num(*v, at + ".Q_e_m3_per_h") / kSecPerHour;
    }
    if (const njson* v = get_opt(st, "X_f_kg_per_m3")) {
      s.X_f = as_num(*v, at + ".X_f_kg_per_m3");
    }
    if (const njson* v = get_opt(st, "aerated")) {
      s.aerated = as_bool(*v, at + ".aerated");
    }
    if (const njson* v = get_opt(st, "regime")) {
      const std::string r = as_str(*v, at + ".regime");
      if (r != "pde" && r != "ode") {
        fail(at + ".regime", "expected \"pde\" or \"ode\"");
      }
      const bool wants_ode = r == "ode";
      if (wants_ode != s.ode()) {
        fail(at + ".regime",
             std::string("a ") + to_string(s.kind) + " stage runs as \"" +
                 (s.ode() ? "ode" : "pde") + "\"");
      }
    }
    sc.stages.push_back(s);
  }

  if (const njson* ou = get_opt(doc, "output")) {
    expect_object(*ou, "$.output");
    expect_keys(*ou, "$.output", {"snapshot_every_s"});
    if (const njson* v = get_opt(*ou, "snapshot_every_s")) {
      sc.snapshot_every = as_num(*v, "$.output.snapshot_every_s");
    }
  }

  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_scenario_json(ss.str());
}

std::string serialize_scenario(const Scenario& sc) {
  ojson doc;
  doc["schema_version"] = 1;
  doc["name"] = sc.name;
  if (!sc.description.empty()) doc["description"] = sc.description;

  ojson ge;
  ge["depth_m"] = sc.depth;
  ge["cells"] = sc.cells;
  ojson area;
  if (sc.area.is_constant()) {
    area["constant_m2"] = sc.area.at(0.0);
  } else {
    ojson tbl = ojson::array();
    for (double z : sc.area.knots()) {
      tbl.push_back(ojson::array({z, sc.area.at(z)}));
    }
    area["table"] = tbl;
  }
  ge["area"] = area;
  doc["geometry"] = ge;

  ojson ph;
  ph["v0_m_per_s"] = sc.settling.v0;
  ph["x_breve_kg_per_m3"] = sc.settling.x_breve;
  ph["eta"] = sc.settling.eta_exp;
  ph["x_c_kg_per_m3"] = sc.settling.x_c;
  ph["alpha_comp_m2_per_s2"] = sc.settling.alpha_comp;
  ph["rho_s_kg_per_m3"] = sc.settling.rho_s;
  ph["rho_f_kg_per_m3"] = sc.settling.rho_f;
  ph["g_m_per_s2"] = sc.settling.g;
  ph["x_hat_kg_per_m3"] = sc.settling.x_hat;
  ph["eps_r_kg_per_m3"] = sc.settling.eps_r;
  doc["physics"] = ph;

  ojson re;
  re["model"] = sc.zero_reactions ? "none" : "asm1";
  re["oxygen_setpoint_g_per_m3"] = kg_to_grams(sc.oxygen_setpoint);
  if (!sc.zero_reactions) {
    const Asm1Params& a = sc.asm1;
    ojson ov;
    ov["Y_A"] = a.Y_A;
    ov["Y_H"] = a.Y_H;
    ov["f_P"] = a.f_P;
    ov["i_XB"] = a.i_XB;
    ov["i_XP"] = a.i_XP;
    ov["mu_H_per_d"] = a.mu_H;
    ov["K_S_g_per_m3"] = a.K_S;
    ov["K_OH_g_per_m3"] = a.K_OH;
    ov["K_NO_g_per_m3"] = a.K_NO;
    ov["b_H_per_d"] = a.b_H;
    ov["eta_g"] = a.eta_g;
    ov["eta_h"] = a.eta_h;
    ov["k_h_per_d"] = a.k_h;
    ov["K_X"] = a.K_X;
    ov["mu_A_per_d"] = a.mu_A;
    ov["K_NH_growth_g_per_m3"] = a.K_NH_gr;
    ov["K_NH_g_per_m3"] = a.K_NH;
    ov["b_A_per_d"] = a.b_A;
    ov["K_OA_g_per_m3"] = a.K_OA;
    ov["k_a_m3_per_g_d"] = a.k_a;
    re["overrides"] = ov;
  }
  doc["reactions"] = re;

  ojson fe;
  fe["solids_shape"] = sc.feed_shape;
  fe["solubles_kg_per_m3"] = sc.feed_S;
  doc["feed"] = fe;

  ojson in;
  in["zbar_m"] = sc.init_zbar;
  ojson segs = ojson::array();
  for (const InitSegment& s : sc.init) {
    ojson seg;
    seg["from_m"] = s.z0;
    seg["to_m"] = s.z1;
    seg["solids_kg_per_m3"] = s.C;
    seg["solubles_kg_per_m3"] = s.S;
    segs.push_back(seg);
  }
  in["segments"] = segs;
  doc["initial"] = in;

  ojson sts = ojson::array();
  for (const Stage& s : sc.stages) {
    ojson st;
    st["kind"] = to_string(s.kind);
    st["from_h"] = seconds_to_hours(s.t0);
    st["to_h"] = seconds_to_hours(s.t1);
    if (s.Q_f > 0.0) st["Q_f_m3_per_h"] = flow_to_per_hour(s.Q_f);
    if (s.Q_u > 0.0) st["Q_u_m3_per_h"] = flow_to_per_hour(s.Q_u);
    if (s.Q_e > 0.0) st["Q_e_m3_per_h"] = flow_to_per_hour(s.Q_e);
    if (s.X_f > 0.0) st["X_f_kg_per_m3"] = s.X_f;
    if (s.aerated) st["aerated"] = true;
    sts.push_back(st);
  }
  doc["stages"] = sts;

  ojson ou;
  ou["snapshot_every_s"] = sc.snapshot_every;
  doc["output"] = ou;

  return doc.dump(2) + "\n";
}

}  // namespace rs
