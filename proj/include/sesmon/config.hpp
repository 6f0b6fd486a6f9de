#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sesmon/parser.hpp"
#include "sesmon/queue.hpp"
#include "sesmon/syntax.hpp"

namespace sesmon {

// Names starting with '_' are created at run time and are always restricted:
// canonical sessions are _s1, _s2, ... and canonical services _a1, _a2, ...
inline bool isRuntimeName(const std::string& n) { return !n.empty() && n.front() == '_'; }

class NameSupply {
 public:
  explicit NameSupply(std::string prefix = "_x") : prefix_(std::move(prefix)) {}
  std::string fresh() {
    issued_.push_back(prefix_ + std::to_string(++counter_));
    return issued_.back();
  }
  const std::vector<std::string>& issued() const { return issued_; }

 private:
  std::string prefix_;
  int counter_ = 0;
  std::vector<std::string> issued_;
};

// One parallel component, possibly under a monitor. In standard
// configurations the monitor is unused and left at bottom.
struct Component {
  Process proc;
  Level monitor;
  std::uint32_t lineage = 0;
};

// (nu r) <P, H> with every restricted name a runtime name. Components are
// prefixed processes (no |, nu or def at top level), sorted canonically.
struct Config {
  std::vector<Component> parts;
  QSet qset;
  bool monitored = false;
  std::uint32_t nextLineage = 1;
};

class NameClash : public std::runtime_error {
 public:
  explicit NameClash(const std::string& s) : std::runtime_error("session '" + s + "' occurs in both configurations") {}
};

// Flattens parallel composition, extrudes restrictions to fresh runtime names,
// strips declarations (they live in the program's table), drops 0 (keeping one
// [mu]0 per level in monitored configurations), garbage-collects unused
// runtime sessions with empty queues and sorts the components.
Config normalize(std::vector<Component> parts, QSet qset, bool monitored, NameSupply& names);

// Renames runtime names to _sN/_aN in order of first occurrence. Returns the
// renaming applied.
std::map<std::string, std::string> canonicalize(Config& c);

// Jointly renames the runtime names of several process lists (used for
// pairs of related processes in the bisimulation checker).
void canonicalizeJoint(std::vector<std::vector<Component>*> lists);

// Applies a renaming of runtime names to processes and queues.
void renameRuntimeNames(Config& c, const std::map<std::string, std::string>& m);

// Full canonical form: normalize then canonicalize.
Config structNormalize(const Config& c);

// Parallel composition of configurations, eliminated by merging Q-sets.
Config composeConfigs(const Config& a, const Config& b);

// <P, H0> where H0 gives an empty queue to every free session name of P.
Config initialConfig(const Program& prog);
Config initialConfig(const Process& p, const QSet& h);

// [mu0]P distributed over the top-level parallel components.
Config wrap(const Process& p, Level mu0, const QSet& h = {});

bool isSaturated(const Config& c);
std::set<std::string> sessionsOf(const std::vector<Component>& parts);
// Session -> participants mentioned on its channels and in its actions.
std::map<std::string, std::set<int>> sessionRoles(const std::vector<Component>& parts);

Process demonitor(const Config& c);

bool allNil(const Config& c);

// Keys: processes only (no queues), optionally with monitors; [mu]0 ignored.
std::string processKey(const std::vector<Component>& parts, bool withMonitors);
std::string configKey(const Config& c);

std::string print(const Config& c, const Lattice* lat);
std::string printParts(const std::vector<Component>& parts, bool monitored, const Lattice* lat);

// Replaces every runtime name `_xyz12` by `_` so that components can be
// ordered independently of the names chosen for them.
std::string maskRuntimeNames(const std::string& s);

}  // namespace sesmon
