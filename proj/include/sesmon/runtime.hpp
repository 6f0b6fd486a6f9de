#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sesmon/config.hpp"
#include "sesmon/parser.hpp"

namespace sesmon {

enum class Rule { Link, SendV, RecV, SendS, RecS, SendC, RecC, Label, Branch, IfT, IfF, Def };

// Rule name as written in the standard table (Link, SendV, ..., If-T, Def).
const char* ruleName(Rule r);
// The monitored counterpart (MLink, MSendV, ...).
const char* monitoredRuleName(Rule r);

struct StepLabel {
  Rule rule;
  std::vector<std::string> redex;   // printed consumed components
  std::vector<std::string> fresh;   // names created by the step
  std::size_t freshSessions = 0;    // the first freshSessions names of `fresh` are sessions
  std::string session;              // session acted on, if any
  int subjectRole = 0;              // role of the acting channel, if any
  std::optional<Level> level;       // level of the communicated object or tested guard
  std::vector<Level> monitorsBefore;
  std::vector<Level> monitorsAfter;
  std::vector<std::uint32_t> parents;   // lineages of consumed components
  std::vector<std::uint32_t> children;  // lineages of produced components
};

struct Transition {
  StepLabel label;
  Config next;
};

struct StepResult {
  std::vector<Transition> successors;
  std::vector<std::string> diagnostics;  // LevelMismatch, StuckBranchLabel, TypeMismatch, ...
};

// How fresh names are chosen for a step. With `canonical` the successor is put
// in canonical form; otherwise fresh names come from `supply` and the existing
// runtime names are preserved (the bisimulation checker needs this).
struct StepOptions {
  bool canonical = true;
  NameSupply* supply = nullptr;
};

// All one-step successors of a configuration under the standard semantics.
StepResult stepStandard(const Config& c, const Program& prog, StepOptions opts = {});

// ---------------------------------------------------------------------------
// Redexes shared by the standard and the monitored semantics.
// ---------------------------------------------------------------------------

enum class MonitorEffect { Keep, Raise, Join, Link };

struct Redex {
  Rule rule;
  std::vector<std::size_t> consumed;
  std::vector<Process> produced;
  QSet qset;
  std::optional<Level> level;  // communicated level (checked against the monitor) or guard level
  bool communication = false;
  MonitorEffect effect = MonitorEffect::Keep;
  std::string session;
  int subjectRole = 0;
  std::vector<std::string> fresh;
};

std::vector<Redex> enumerateRedexes(const Config& c, const Program& prog, NameSupply& names,
                                    std::vector<std::string>& diagnostics);

// Builds the successor of `c` obtained by firing `r`, giving every produced
// component the monitor `mu`.
Transition fire(const Config& c, const Redex& r, Level mu, const Program& prog, NameSupply& names, bool canonical);

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct Scheduler {
  enum class Kind { Deterministic, Random };
  Kind kind = Kind::Deterministic;
  std::uint64_t seed = 0;
  std::vector<int> preferRoles;  // deterministic: first act on these roles when possible
};

enum class Outcome { Terminated, Stuck, StepBound, Error, Diagnostic };
const char* toString(Outcome o);

struct ErrorInfo {
  StepLabel label;
  Level monitor;
  Level level;
  Config blocked;  // the standard successor that the monitor refuses
};

struct Trace {
  Config initial;
  std::vector<Transition> steps;
  Outcome outcome = Outcome::Terminated;
  std::optional<ErrorInfo> error;
  std::vector<std::string> diagnostics;

  const Config& final() const { return steps.empty() ? initial : steps.back().next; }
};

Trace runStandard(const Config& c, const Program& prog, const Scheduler& sched, std::size_t maxSteps);

// Picks one successor per step according to a Scheduler.
class Picker {
 public:
  explicit Picker(const Scheduler& s) : sched_(s), rng_(s.seed) {}
  std::size_t pick(const std::vector<const StepLabel*>& labels);

 private:
  Scheduler sched_;
  std::mt19937_64 rng_;
};

}  // namespace sesmon
