// reactive-settling: scenario files. JSON documents whose key names carry
// the units (hours, m^3/h, kg/m^3 ...); parsing converts to SI and validates
// strictly — unknown keys are rejected with their path.
#pragma once

#include <string>

#include "rs/simulator.hpp"

namespace rs {

// Parse a scenario document. Throws ConfigError naming the offending key
// path and reason.
Scenario parse_scenario_json(const std::string& text);

// Same, reading the document from a file.
Scenario load_scenario(const std::string& path);

// Canonical document for a scenario. Parsing the result reproduces the
// Scenario field-for-field (unit conversions are inverted exactly).
std::string serialize_scenario(const Scenario& sc);

}  // namespace rs
