// reactive-settling: shared basic types and error categories.
#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace rs {

// Material composition: six particulate and six soluble components.
inline constexpr int kNumSolids = 6;
inline constexpr int kNumSolubles = 6;
inline constexpr int kNumComponents = kNumSolids + kNumSolubles;

using SolidsVec = std::array<double, kNumSolids>;
using SolublesVec = std::array<double, kNumSolubles>;

// Component order is fixed everywhere (state rows, CSV columns, configs).
inline constexpr std::array<const char*, kNumSolids> kSolidNames = {
    "X_I", "X_S", "X_BH", "X_BA", "X_P", "X_ND"};
inline constexpr std::array<const char*, kNumSolubles> kSolubleNames = {
    "S_I", "S_S", "S_O", "S_NO", "S_NH", "S_ND"};

// Bad or inconsistent user input (config files, CLI arguments). CLI exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The simulation itself ran into a state it cannot continue from (drained
// tank, overflow, step-size violation, non-finite value). CLI exit 3.
struct RuntimeAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Signed parts used by the upwind fluxes: a = a^- + a^+ with a^- <= 0 <= a^+.
inline double neg_part(double a) { return a < 0.0 ? a : 0.0; }
inline double pos_part(double a) { return a > 0.0 ? a : 0.0; }

}  // namespace rs
