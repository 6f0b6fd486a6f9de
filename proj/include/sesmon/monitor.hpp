#pragma once

#include <vector>

#include "sesmon/runtime.hpp"

namespace sesmon {

// A communication redex whose subject monitor is not below the level of the
// communicated object.
struct MonitorError {
  StepLabel label;
  Level monitor;
  Level level;
  Config blocked;  // where the step would have led without the monitor
};

struct MStepResult {
  std::vector<Transition> successors;
  std::vector<MonitorError> errors;
  std::vector<std::string> diagnostics;

  bool error() const { return !errors.empty(); }
};

struct MStepOptions {
  bool canonical = true;
  NameSupply* supply = nullptr;
  // Diagnostic mode: one monitor for the whole configuration, set to the join
  // of every component monitor after each step.
  bool singleMonitor = false;
};

MStepResult stepMonitored(const Config& c, const Program& prog, MStepOptions opts = {});

// Stops at the first configuration with an erring redex.
Trace runMonitored(const Config& c, const Program& prog, const Scheduler& sched, std::size_t maxSteps,
                   bool singleMonitor = false);

}  // namespace sesmon
