#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sesmon/report.hpp"

using namespace sesmon;
using nlohmann::json;

namespace {

enum Exit {
  kOk = 0,
  kFails = 1,
  kInconclusive = 2,
  kNoReplay = 3,
  kStuck = 10,
  kStepBound = 11,
  kMonitorError = 12,
  kDiagnostic = 13,
  kUsage = 64,
};

struct Options {
  std::string command;
  std::string file;
  std::optional<std::size_t> maxSteps;
  std::size_t queueBound = 2;
  std::size_t depth = 4;
  std::string scheduler = "det";
  std::optional<std::uint64_t> seed;
  std::string levels;
  bool json = false;
  std::vector<std::string> choices;
  std::string replay;
  std::vector<int> preferRoles;
  bool singleMonitor = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Choices parseChoices(const std::vector<std::string>& kvs) {
  Choices out;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--choice expects name=value, got '" + kv + "'");
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

Scheduler makeScheduler(const Options& o) {
  Scheduler s;
  if (o.scheduler == "random") {
    if (!o.seed) throw UsageError("--scheduler random requires --seed");
    s.kind = Scheduler::Kind::Random;
    s.seed = *o.seed;
  } else if (o.seed) {
    throw UsageError("--seed is only meaningful with --scheduler random");
  }
  s.preferRoles = o.preferRoles;
  return s;
}

DownSet parseLevels(const std::string& text, const Lattice& lat) {
  std::vector<Level> gens;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    if (name.empty()) continue;
    if (!lat.contains(name)) throw UsageError("unknown level '" + name + "' in --levels");
    gens.push_back(lat.level(name));
  }
  if (gens.empty()) throw UsageError("--levels needs at least one level");
  return lat.downClosure(gens);
}

int runCommand(const Options& o, const Program& prog) {
  const Lattice& lat = prog.lat();
  bool monitored = o.command == "mrun";
  Scheduler sched = makeScheduler(o);
  std::size_t maxSteps = o.maxSteps.value_or(1000);
  Config start = initialConfig(prog);
  Trace t = monitored ? runMonitored(wrap(prog.process, lat.bottom(), start.qset), prog, sched, maxSteps,
                                     o.singleMonitor)
                      : runStandard(start, prog, sched, maxSteps);

  int code = kOk;
  switch (t.outcome) {
    case Outcome::Terminated: code = kOk; break;
    case Outcome::Stuck: code = kStuck; break;
    case Outcome::StepBound: code = kStepBound; break;
    case Outcome::Error: code = kMonitorError; break;
    case Outcome::Diagnostic: code = kDiagnostic; break;
  }

  json error = nullptr;
  if (t.error) {
    error = {{"rule", monitoredRuleName(t.error->label.rule)},
             {"redex", t.error->label.redex},
             {"monitor", lat.name(t.error->monitor)},
             {"level", lat.name(t.error->level)}};
  }
  if (o.json) {
    json verdict = {{"outcome", toString(t.outcome)}, {"steps", t.steps.size()}, {"final", print(t.final(), &lat)}};
    if (!t.diagnostics.empty()) verdict["diagnostics"] = t.diagnostics;
    json report = makeReport(o.command, o.file, lat, stepsToJson(t, lat, monitored), json::array({verdict}), error);
    std::cout << report.dump(2) << "\n";
    return code;
  }
  std::cout << formatTrace(t, lat, monitored);
  std::cout << "outcome: " << toString(t.outcome) << " after " << t.steps.size() << " steps\n";
  if (t.error) {
    std::cout << "error: monitor " << lat.name(t.error->monitor) << " blocks " << t.error->label.redex.front()
              << " at level " << lat.name(t.error->level) << "\n";
  }
  for (const auto& d : t.diagnostics) std::cout << "diagnostic: " << d << "\n";
  return code;
}

int replayCommand(const Options& o, const Program& prog, const CheckBounds& b) {
  json doc;
  try {
    doc = json::parse(slurp(o.replay));
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("cannot parse ") + o.replay + ": " + e.what());
  }
  json w = doc.contains("command") ? doc["witness"] : doc;
  if (!w.is_object()) throw UsageError(o.replay + " holds no witness");
  std::string expected = o.command == "check-safe" ? "safe" : o.command == "check-noerr" ? "noerr" : "secure";
  if (w.value("property", "") != expected)
    throw UsageError("witness is for property '" + w.value("property", "") + "', not " + expected);
  std::string mismatch = replayWitness(prog, w, b);
  if (o.json) {
    json v = {{"property", expected}, {"verdict", mismatch.empty() ? "fails" : "unreplayable"}};
    if (w.contains("L")) v["L"] = w["L"];
    if (!mismatch.empty()) v["reason"] = mismatch;
    std::cout << makeReport(o.command, o.file, prog.lat(), json::array(), json::array({v}), w).dump(2) << "\n";
  } else if (mismatch.empty()) {
    std::cout << "replay: " << expected << " fails, " << w.value("summary", "") << "\n";
  } else {
    std::cout << "replay: witness does not reproduce (" << mismatch << ")\n";
  }
  return mismatch.empty() ? kFails : kNoReplay;
}

int checkCommand(const Options& o, const Program& prog) {
  const Lattice& lat = prog.lat();
  CheckBounds b;
  b.queueBound = o.queueBound;
  b.depth = o.depth;
  if (o.maxSteps) b.maxSteps = *o.maxSteps;
  if (!o.replay.empty()) return replayCommand(o, prog, b);

  std::vector<CheckResult> results;
  if (o.command == "check-safe") {
    results.push_back(checkSafe(prog, b));
  } else if (o.command == "check-noerr") {
    results.push_back(checkNoRuntimeError(prog, b));
  } else if (!o.levels.empty()) {
    results.push_back(checkSecure(prog, parseLevels(o.levels, lat), b));
  } else {
    results = checkSecureAll(prog, b);
  }
  Verdict v = overall(results);

  json witness = nullptr;
  for (const auto& r : results)
    if (r.verdict == Verdict::Fails) {
      witness = r.witness;
      break;
    }
  if (o.json) {
    json verdicts = json::array();
    for (const auto& r : results) verdicts.push_back(verdictToJson(r, lat));
    std::cout << makeReport(o.command, o.file, lat, json::array(), std::move(verdicts), witness).dump(2) << "\n";
  } else {
    for (const auto& r : results) {
      std::cout << r.property;
      if (r.L) std::cout << " " << r.L->toString(lat);
      std::cout << ": " << toString(r.verdict);
      if (!r.reason.empty()) std::cout << " (" << r.reason << ")";
      std::cout << "\n";
    }
    if (!witness.is_null()) std::cout << "witness: " << witness.value("summary", "") << "\n";
  }
  switch (v) {
    case Verdict::Holds: return kOk;
    case Verdict::Fails: return kFails;
    case Verdict::Inconclusive: return kInconclusive;
  }
  return kInconclusive;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpreter, monitor and security checker for multiparty session processes"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("file", o.file, "program file")->required();
    sub->add_option("--max-steps", o.maxSteps, "step bound for runs and checker exploration");
    sub->add_flag("--json", o.json, "print a JSON report");
    sub->add_option("--choice", o.choices, "bind a free test input, name=value");
  };
  for (const char* name : {"run", "mrun"}) {
    auto* sub = app.add_subcommand(name, std::string(name) == "run" ? "run under the standard semantics"
                                                                    : "run under the monitored semantics");
    common(sub);
    sub->add_option("--scheduler", o.scheduler, "det or random")->check(CLI::IsMember({"det", "random"}));
    sub->add_option("--seed", o.seed, "seed for the random scheduler");
    sub->add_option("--prefer-roles", o.preferRoles, "det: act on these roles first")->delimiter(',');
    if (std::string(name) == "mrun")
      sub->add_flag("--single-monitor", o.singleMonitor, "diagnostic: one monitor for the whole configuration");
  }
  for (const char* name : {"check-safe", "check-secure", "check-noerr"}) {
    auto* sub = app.add_subcommand(name, std::string("decide ") + (name + 6));
    common(sub);
    sub->add_option("--queue-bound", o.queueBound, "longest queue in the Q-set universe");
    sub->add_option("--depth", o.depth, "simulation search depth");
    sub->add_option("--replay", o.replay, "replay a witness from a JSON file");
    if (std::string(name) == "check-secure")
      sub->add_option("--levels", o.levels, "restrict to the down-closure of these levels");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    Program prog = parseProgram(slurp(o.file), parseChoices(o.choices));
    for (const auto& d : prog.diagnostics) std::cerr << o.file << ": warning: " << d << "\n";
    if (o.command == "run" || o.command == "mrun") return runCommand(o, prog);
    return checkCommand(o, prog);
  } catch (const ParseError& e) {
    std::cerr << o.file << ":" << e.line() << ":" << e.col() << ": " << toString(e.kind()) << ": " << e.message()
              << "\n";
  } catch (const LatticeError& e) {
    std::cerr << o.file << ": lattice error: " << e.what() << "\n";
  } catch (const UsageError& e) {
    std::cerr << "sesmon: " << e.what() << "\n";
  }
  return kUsage;
}
