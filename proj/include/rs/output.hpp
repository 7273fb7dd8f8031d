// reactive-settling: result serialization. CSV for the profile and boundary
// time series, JSON for the mass audit; all numbers are written in shortest
// round-trip scientific notation, independent of any locale.
#pragma once

#include <string>

#include "rs/simulator.hpp"

namespace rs {

// One row per snapshot x tank cell: time, cell midpoint depth, the twelve
// mixture concentrations, total solids X and water content W. Cells above
// the surface are reported as zero (no mixture there); the surface cell is
// un-scaled from its stored wetted-fraction value.
void write_profiles_csv(const std::string& path, const Grid& g,
                        const SettlingParams& p, const RunRecord& rec);

// One row per snapshot: effluent-pipe and underflow-pipe concentrations.
void write_boundary_csv(const std::string& path, const RunRecord& rec);

// Run metadata: step-size report, surface-case tallies, per-stage ledgers and
// the cumulative mass balance. Deterministic except for "wall_seconds".
void write_audit_json(const std::string& path, const RunRecord& rec);

// All three files (profiles.csv, boundary_series.csv, audit.json) in `dir`,
// which must already exist.
void write_run_outputs(const std::string& dir, const Scenario& sc,
                       const RunRecord& rec);

}  // namespace rs
