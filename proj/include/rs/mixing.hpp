// reactive-settling: fully-mixed (reaction) stages. While an impeller or
// aeration keeps the tank homogeneous below the surface, the column state
// collapses to a single average that evolves by an ODE; afterwards it is
// spread back onto the grid.
#pragma once

#include "rs/core.hpp"
#include "rs/geometry.hpp"
#include "rs/reactions.hpp"
#include "rs/scheme.hpp"

namespace rs {

// Homogeneous state of the liquid column below the surface.
struct MixedState {
  SolidsVec C{};
  SolublesVec S{};
  double vol = 0.0;   // submerged volume on the grid [m^3]
  double zbar = 0.0;  // surface depth [m]
};

// Submerged volume as the scheme sees it: wetted fraction of the surface cell
// plus all full cells below. Matches the integral V(zbar) exactly for a
// constant cross-section.
double discrete_volume(const Grid& g, double zbar);

// Volume-weighted column average; together with redistribute() this is an
// exact round trip (up to rounding) because the surface cell already stores
// its wetted-fraction-scaled value.
MixedState average_below_surface(const Grid& g, const TankState& st);

// Spread a mixed state back onto the tank cells: zero above the surface,
// wetted-fraction-scaled in the surface cell, the plain average below. Pipe
// rows (effluent/underflow) are left untouched.
void redistribute(const Grid& g, const MixedState& m, TankState& st);

// Step-size bound for the explicit Euler integration of the mixed balance:
// half the reciprocal of the fastest consumption/growth/flow rate, so
// non-negativity and the packing limit are kept with margin. m3 is the grid's
// neighbour-area ratio (Grid::M3); it widens the solids decay cap the same
// way it does in the column step.
double mixed_max_dt(const ReactionModel& r, const SettlingParams& p,
                    const StepFlows& f, double vol_min, double m3);

// One explicit Euler substep: reaction sources plus feed/draw dilution;
// advances the surface with the net flow. Feed and reaction masses are added
// to the ledger.
void mixed_euler_substep(MixedState& m, const StepFlows& f,
                         const ReactionModel& r, const Grid& g, double tau,
                         MassLedger& led);

// Aeration keeps the dissolved oxygen at its saturation setpoint; the
// injected (or stripped) mass is booked so the balance stays closed.
void pin_oxygen(MixedState& m, double setpoint, MassLedger& led);

}  // namespace rs
