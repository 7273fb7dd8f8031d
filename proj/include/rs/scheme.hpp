// reactive-settling: explicit finite-volume update for the tank column with a
// moving surface. One call advances all concentrations by one time step;
// variants with split or inline reaction sources share the same transport
// kernel.
#pragma once

#include <vector>

#include "rs/constitutive.hpp"
#include "rs/core.hpp"
#include "rs/geometry.hpp"
#include "rs/reactions.hpp"

namespace rs {

// Concentrations on the grid. Row 0 is the effluent pipe cell, rows 1..n the
// tank cells top-down, row n+1 the underflow pipe cell. The surface cell
// stores its concentration scaled by the wetted fraction alpha (mass in the
// cell divided by the full cell volume); the mixture concentration below the
// surface is stored value / alpha.
struct TankState {
  int n = 0;
  double zbar = 0.0;            // surface depth [m]
  std::vector<double> C, S;     // (n+2) x 6 each, row-major

  static TankState zeros(int n, double zbar);

  double* Crow(int j) { return C.data() + static_cast<size_t>(j) * kNumSolids; }
  const double* Crow(int j) const {
    return C.data() + static_cast<size_t>(j) * kNumSolids;
  }
  double* Srow(int j) { return S.data() + static_cast<size_t>(j) * kNumSolubles; }
  const double* Srow(int j) const {
    return S.data() + static_cast<size_t>(j) * kNumSolubles;
  }
  double X_of(int j) const;  // total solids of row j (stored value)
};

inline double total_solids(const double* Crow) {
  double x = 0.0;
  for (int k = 0; k < kNumSolids; ++k) x += Crow[k];
  return x;
}

// Mass of water per unit volume, recovered from the phase balance.
inline double water_content(const SettlingParams& p, const double* Crow,
                            const double* Srow) {
  double sumS = 0.0;
  for (int k = 0; k < kNumSolubles; ++k) sumS += Srow[k];
  return p.rho_f * (1.0 - total_solids(Crow) / p.rho_s) - sumS;
}

// Boundary flows during one step. At most one of Q_f, Q_e may be positive:
// feeding and extracting through the same surface is not modelled.
struct StepFlows {
  double Q_f = 0.0, Q_u = 0.0, Q_e = 0.0;  // [m^3/s], all >= 0
  SolidsVec C_f{};                          // feed concentrations [kg/m^3]
  SolublesVec S_f{};

  bool extraction() const { return Q_e > 0.0; }
  // Net surface-side flow: negative while extracting.
  double Q_bar() const { return extraction() ? -Q_e : Q_f; }
  void validate() const;  // throws ConfigError
};

// How the surface moved during the step; decides which mass-redistribution
// weights apply to the two (or three) cells around it.
enum class SurfaceCase {
  kFillStay,   // no extraction, surface stays within its cell
  kFillRise,   // no extraction, surface crosses upward into the cell above
  kFillDrop,   // no extraction, surface crosses down (net outflow exceeds feed)
  kDrawStay,   // extraction, surface stays within its cell
  kDrawDrop,   // extraction, surface crosses down into the cell below
};
const char* to_string(SurfaceCase c);

struct StepContext {
  SurfaceCase scase{};
  int jbar_old = 0, jbar_new = 0;
  double alpha_old = 1.0, alpha_new = 1.0;
  // redistribution weights for rows jbar_old-1, jbar_old, jbar_old+1
  double w[3] = {0.0, 0.0, 0.0};
};

// Running totals (kg per component) of everything that crosses the model
// boundary or is created inside it; lets callers verify conservation exactly.
struct MassLedger {
  SolidsVec feed_C{}, under_out_C{}, eff_out_C{}, flush_C{}, react_C{};
  SolublesVec feed_S{}, under_out_S{}, eff_out_S{}, flush_S{}, react_S{},
      aer_S{};
  void clear();
  MassLedger& operator+=(const MassLedger& o);
};

// Step-size bound and its breakdown, for reporting which mechanism limits
// the step.
struct CflReport {
  double transport_solids = 0.0;    // [1/s] convection+settling+compression
  double transport_solubles = 0.0;  // [1/s] liquid-phase counterpart
  double reaction_solids = 0.0;     // [1/s] decay/hydrolysis loss cap
  double reaction_solubles = 0.0;   // [1/s] soluble consumption cap
  double solids_headroom = 0.0;     // [1/s] growth vs. packing-limit margin
  double surface_tau = 0.0;         // [s] one-cell-per-step surface motion
  double tau_max = 0.0;             // [s] overall admissible step
  const char* dominant = "";
};

class Scheme {
 public:
  // References must outlive the scheme. Step calls reuse an internal
  // workspace, so a Scheme instance must not be shared across threads.
  Scheme(const Grid& grid, const Constitutive& cons, const ReactionModel& react);

  const Grid& grid() const { return g_; }
  const Constitutive& constitutive() const { return cons_; }
  const ReactionModel& reactions() const { return react_; }

  // Transport only (feed source included, reaction sources off).
  StepContext transport_step(TankState& st, const StepFlows& f, double tau,
                             MassLedger& led) const;
  // Reaction sources applied after a transport step of the same length; uses
  // the surface bookkeeping of that transport step.
  void reaction_step(TankState& st, const StepContext& cx, double tau,
                     MassLedger& led) const;

  // One full step: transport then reactions (the invariant-preserving order).
  StepContext step_split(TankState& st, const StepFlows& f, double tau,
                         MassLedger& led) const;
  // One full step with reaction sources inlined into the transport update.
  StepContext step_unsplit(TankState& st, const StepFlows& f, double tau,
                           MassLedger& led) const;

  // Largest admissible step for a given worst-case flow magnitude
  // norm_Q = max over time of max(|Q_u - Q_f|, Q_u + Q_e).
  CflReport cfl_max_dt(double norm_Q) const;

 private:
  StepContext do_step(TankState& st, const StepFlows& f, double tau,
                      bool with_reactions, MassLedger& led) const;
  void check_finite(const TankState& st) const;

  const Grid& g_;
  const Constitutive& cons_;
  const ReactionModel& react_;
  // per-face flux workspace, sized once so the step loop never allocates
  mutable std::vector<double> phiC_, phiS_, xrow_;
};

}  // namespace rs
