// reactive-settling: whole-cycle driver. A Scenario describes one batch
// cycle (geometry, physics, kinetics, initial profiles, ordered stages);
// run_scenario() executes it stage by stage, switching between the column
// scheme and the fully-mixed ODE, and returns snapshots plus a mass audit.
#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "rs/constitutive.hpp"
#include "rs/core.hpp"
#include "rs/geometry.hpp"
#include "rs/mixing.hpp"
#include "rs/reactions.hpp"
#include "rs/scheme.hpp"

namespace rs {

enum class StageKind { kFill, kReact, kSettle, kDraw, kIdle };
const char* to_string(StageKind k);

// One stage of the cycle. Times are absolute seconds from cycle start; flows
// are constant over the stage. React stages run the mixed ODE, all others
// the column scheme.
struct Stage {
  StageKind kind = StageKind::kSettle;
  double t0 = 0.0, t1 = 0.0;               // [s]
  double Q_f = 0.0, Q_u = 0.0, Q_e = 0.0;  // [m^3/s]
  double X_f = 0.0;      // total feed solids while filling [kg/m^3]
  bool aerated = false;  // react only: hold dissolved oxygen at the setpoint

  bool ode() const { return kind == StageKind::kReact; }
  double duration() const { return t1 - t0; }
};

// Piecewise-constant initial profile piece on [z0, z1).
struct InitSegment {
  double z0 = 0.0, z1 = 0.0;  // depths [m]
  SolidsVec C{};
  SolublesVec S{};
};

struct Scenario {
  std::string name = "scenario";
  std::string description;
  double depth = 3.0;  // [m]
  int cells = 100;
  AreaProfile area = AreaProfile::constant(1.0);
  SettlingParams settling{};
  bool zero_reactions = false;  // replace the biokinetics by R == 0
  Asm1Params asm1{};            // literature units; converted when built
  double oxygen_setpoint = 0.010;  // aeration saturation [kg/m^3]
  SolidsVec feed_shape{};   // composition fractions of the feed solids
  SolublesVec feed_S{};     // feed solubles [kg/m^3]
  double init_zbar = 0.0;   // initial surface depth [m]
  std::vector<InitSegment> init;
  std::vector<Stage> stages;
  double snapshot_every = 10.0;  // cadence [s]; 0 = stage boundaries only

  void validate() const;  // throws ConfigError
  double total_time() const { return stages.empty() ? 0.0 : stages.back().t1; }
  // Worst-case flow magnitude over the cycle, for the step-size bound.
  double norm_Q() const;
  StepFlows flows_for(const Stage& s) const;
};

enum class Variant { kSplit, kUnsplit };
const char* to_string(Variant v);

// Full grid state at one time; C and S hold the stored (wetted-fraction
// scaled) values in the same layout as TankState.
struct Snapshot {
  double t = 0.0;
  double zbar = 0.0;
  std::vector<double> C, S;  // (n+2) x 6 row-major
};

struct StageReport {
  StageKind kind{};
  double t0 = 0.0, t1 = 0.0;  // [s]
  double tau = 0.0;           // step actually used [s]
  long steps = 0;
  MassLedger ledger;
  double zbar_end = 0.0;
  // component masses in the whole system (pipes included) at the stage ends
  std::array<double, kNumComponents> mass_start{}, mass_end{};
  double closure_rel = 0.0;  // worst component's balance residual, relative
};

// Cumulative balance per component over the whole run:
// final - initial = feed - under_out - eff_out - flush + react + aeration
struct MassAuditRow {
  double initial = 0.0, final_mass = 0.0;
  double feed = 0.0, under_out = 0.0, eff_out = 0.0, flush = 0.0;
  double react = 0.0, aeration = 0.0;
  double closure_rel = 0.0;
};

struct MassAudit {
  std::array<MassAuditRow, kNumComponents> rows{};
  double worst_closure = 0.0;
};

struct RunRecord {
  std::string scenario;
  int cells = 0;
  double h = 0.0;
  Variant variant = Variant::kSplit;
  CflReport cfl;          // bound for the worst-case flows
  double tau_used = 0.0;  // base step before per-stage rounding [s]
  std::vector<Snapshot> snapshots;
  std::vector<StageReport> stages;
  std::map<std::string, long> case_counts;  // surface-case tallies
  MassAudit audit;
  double wall_seconds = 0.0;
};

struct RunOptions {
  Variant variant = Variant::kSplit;
  int cells_override = 0;           // 0 = use the scenario's cell count
  double snapshot_override = -1.0;  // <0 = scenario cadence; 0 = boundaries
  double tau_override = 0.0;        // 0 = step-size bound; [s] otherwise
  std::vector<double> extra_snapshot_times;  // [s]
};

RunRecord run_scenario(const Scenario& sc, const RunOptions& opt = {});

// Component masses (kg) currently stored anywhere in the system: effluent
// pipe, tank cells, underflow pipe. Solids first, solubles after.
std::array<double, kNumComponents> total_mass(const Grid& g,
                                              const TankState& st);

// Sum over components of |a - b| / |b| in the cellwise L1 norm over the n
// tank cells, using the stored (wetted-fraction scaled) values so the surface
// cell enters with its exact mass. Components whose reference norm is zero
// are skipped; if `warnings` is given a note per skipped component is
// appended.
double l1_relative_difference(const Snapshot& a, const Snapshot& b, int n,
                              std::vector<std::string>* warnings = nullptr);

// The same norm between two runs on the same grid at time t. Snapshots land
// on step ends, so each run contributes its snapshot closest to t; a match
// farther than time_tol away is an error. Throws ConfigError on grid
// mismatch or a missing snapshot.
double relative_difference(const RunRecord& a, const RunRecord& b, double t,
                           std::vector<std::string>* warnings = nullptr,
                           double time_tol = 1e-6);

}  // namespace rs
