#include "rs/output.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace rs {

namespace {

using ojson = nlohmann::ordered_json;

void append_num(std::string& out, double v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific);
  out.append(buf, res.ptr);
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("output: cannot open " + path + " for writing");
  return f;
}

// JSON has no infinity; report unbounded step limits as null.
ojson finite_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::vector<double> concat12(const SolidsVec& c, const SolublesVec& s) {
  std::vector<double> out;
  out.reserve(kNumComponents);
  out.insert(out.end(), c.begin(), c.end());
  out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace

void write_profiles_csv(const std::string& path, const Grid& g,
                        const SettlingParams& p, const RunRecord& rec) {
  std::ofstream f = open_or_throw(path);
  std::string line = "t_s,z_m";
  for (const char* name : kSolidNames) {
    line += ',';
    line += name;
  }
  for (const char* name : kSolubleNames) {
    line += ',';
    line += name;
  }
  line += ",X,W\n";
  f << line;

  const int n = g.n();
  const double h = g.h();
  for (const Snapshot& sn : rec.snapshots) {
    const SurfacePos sp = g.locate_surface(sn.zbar);
    for (int j = 1; j <= n; ++j) {
      const double* C = sn.C.data() + static_cast<size_t>(j) * kNumSolids;
      const double* S = sn.S.data() + static_cast<size_t>(j) * kNumSolubles;
      // stored values are wetted-fraction scaled in the surface cell and zero
      // above it; report mixture concentrations (zero where there is none)
      double scale = 1.0;
      if (j < sp.jbar) {
        scale = 0.0;
      } else if (j == sp.jbar) {
        scale = 1.0 / sp.alpha;
      }
      double mixC[kNumSolids], mixS[kNumSolubles];
      for (int k = 0; k < kNumSolids; ++k) mixC[k] = scale * C[k];
      for (int k = 0; k < kNumSolubles; ++k) mixS[k] = scale * S[k];

      line.clear();
      append_num(line, sn.t);
      line += ',';
      append_num(line, (j - 0.5) * h);
      for (int k = 0; k < kNumSolids; ++k) {
        line += ',';
        append_num(line, mixC[k]);
      }
      for (int k = 0; k < kNumSolubles; ++k) {
        line += ',';
        append_num(line, mixS[k]);
      }
      line += ',';
      append_num(line, total_solids(mixC));
      line += ',';
      append_num(line, scale > 0.0 ? water_content(p, mixC, mixS) : 0.0);
      line += '\n';
      f << line;
    }
  }
  if (!f) throw ConfigError("output: failed writing " + path);
}

void write_boundary_csv(const std::string& path, const RunRecord& rec) {
  std::ofstream f = open_or_throw(path);
  std::string line = "t_s";
  for (const char* prefix : {"eff_", "under_"}) {
    for (const char* name : kSolidNames) {
      line += ',';
      line += prefix;
      line += name;
    }
    for (const char* name : kSolubleNames) {
      line += ',';
      line += prefix;
      line += name;
    }
  }
  line += '\n';
  f << line;

  const size_t under = static_cast<size_t>(rec.cells) + 1;
  for (const Snapshot& sn : rec.snapshots) {
    line.clear();
    append_num(line, sn.t);
    for (const size_t row : {size_t{0}, under}) {
      const double* C = sn.C.data() + row * kNumSolids;
      const double* S = sn.S.data() + row * kNumSolubles;
      for (int k = 0; k < kNumSolids; ++k) {
        line += ',';
        append_num(line, C[k]);
      }
      for (int k = 0; k < kNumSolubles; ++k) {
        line += ',';
        append_num(line, S[k]);
      }
    }
    line += '\n';
    f << line;
  }
  if (!f) throw ConfigError("output: failed writing " + path);
}

void write_audit_json(const std::string& path, const RunRecord& rec) {
  ojson doc;
  doc["scenario"] = rec.scenario;
  doc["cells"] = rec.cells;
  doc["h_m"] = rec.h;
  doc["variant"] = to_string(rec.variant);
  doc["tau_base_s"] = rec.tau_used;

  ojson cfl;
  cfl["transport_solids_per_s"] = rec.cfl.transport_solids;
  cfl["transport_solubles_per_s"] = rec.cfl.transport_solubles;
  cfl["reaction_solids_per_s"] = rec.cfl.reaction_solids;
  cfl["reaction_solubles_per_s"] = rec.cfl.reaction_solubles;
  cfl["solids_headroom_per_s"] = rec.cfl.solids_headroom;
  cfl["surface_tau_s"] = finite_or_null(rec.cfl.surface_tau);
  cfl["tau_max_s"] = rec.cfl.tau_max;
  cfl["dominant"] = rec.cfl.dominant;
  doc["cfl"] = cfl;

  ojson cases;
  for (const auto& [name, count] : rec.case_counts) cases[name] = count;
  doc["case_counts"] = cases;

  ojson stages = ojson::array();
  for (const StageReport& rep : rec.stages) {
    ojson st;
    st["kind"] = to_string(rep.kind);
    st["from_h"] = rep.t0 / 3600.0;
    st["to_h"] = rep.t1 / 3600.0;
    st["steps"] = rep.steps;
    st["tau_s"] = rep.tau;
    st["zbar_end_m"] = rep.zbar_end;
    st["closure_rel"] = rep.closure_rel;
    ojson led;
    led["feed_kg"] = concat12(rep.ledger.feed_C, rep.ledger.feed_S);
    led["underflow_out_kg"] =
        concat12(rep.ledger.under_out_C, rep.ledger.under_out_S);
    led["effluent_out_kg"] =
        concat12(rep.ledger.eff_out_C, rep.ledger.eff_out_S);
    led["flush_kg"] = concat12(rep.ledger.flush_C, rep.ledger.flush_S);
    led["reaction_kg"] = concat12(rep.ledger.react_C, rep.ledger.react_S);
    led["aeration_kg"] = concat12(SolidsVec{}, rep.ledger.aer_S);
    st["ledger"] = led;
    stages.push_back(st);
  }
  doc["stages"] = stages;

  ojson balance;
  ojson comps = ojson::array();
  for (int k = 0; k < kNumComponents; ++k) {
    const MassAuditRow& row = rec.audit.rows[k];
    ojson c;
    c["name"] = k < kNumSolids ? kSolidNames[k] : kSolubleNames[k - kNumSolids];
    c["initial_kg"] = row.initial;
    c["final_kg"] = row.final_mass;
    c["feed_kg"] = row.feed;
    c["underflow_out_kg"] = row.under_out;
    c["effluent_out_kg"] = row.eff_out;
    c["flush_kg"] = row.flush;
    c["reaction_kg"] = row.react;
    c["aeration_kg"] = row.aeration;
    c["closure_rel"] = row.closure_rel;
    comps.push_back(c);
  }
  balance["components"] = comps;
  balance["worst_closure_rel"] = rec.audit.worst_closure;
  doc["mass_balance"] = balance;

  doc["wall_seconds"] = rec.wall_seconds;

  std::ofstream f = open_or_throw(path);
  f << doc.dump(2) << '\n';
  if (!f) throw ConfigError("output: failed writing " + path);
}

void write_run_outputs(const std::string& dir, const Scenario& sc,
                       const RunRecord& rec) {
  const Grid g(sc.area, sc.depth, rec.cells);
  write_profiles_csv(dir + "/profiles.csv", g, sc.settling, rec);
  write_boundary_csv(dir + "/boundary_series.csv", rec);
  write_audit_json(dir + "/audit.json", rec);
}

}  // namespace rs
