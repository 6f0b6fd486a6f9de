#pragma once

#include <string>

#include <json.hpp>

#include "sesmon/analysis.hpp"

namespace sesmon {

nlohmann::json latticeToJson(const Lattice& lat);

// One entry per step: rule, consumed redex, resulting configuration and, for
// monitored traces, the monitor levels before and after.
nlohmann::json stepsToJson(const Trace& t, const Lattice& lat, bool monitored);

nlohmann::json verdictToJson(const CheckResult& r, const Lattice& lat);

// The document printed by --json: {command, program, lattice, steps, verdicts, witness}.
nlohmann::json makeReport(const std::string& command, const std::string& program, const Lattice& lat,
                          nlohmann::json steps, nlohmann::json verdicts, nlohmann::json witness);

// Text rendering of a trace, one step per line.
std::string formatTrace(const Trace& t, const Lattice& lat, bool monitored);

}  // namespace sesmon
