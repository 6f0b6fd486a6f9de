// Acceptance report: one line per criterion. Exits 0 when the failing
// criteria are exactly the documented known failures.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "sesmon/analysis.hpp"
#include "sesmon/monitor.hpp"
#include "support.hpp"

#ifndef SESMON_UNIT_TESTS
#define SESMON_UNIT_TESTS "unit_tests"
#endif

using namespace sesmon;

namespace {

const std::set<int> kKnownFailures = {5};

struct Result {
  bool pass = true;
  std::ostringstream detail;
  double slowest = 0;

  void expect(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
  }
};

DownSet below(const Program& p, const std::string& level) { return p.lat().downClosure({p.lat().level(level)}); }

template <typename F>
auto timed(Result& o, F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  auto r = f();
  double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.slowest = std::max(o.slowest, dt);
  return r;
}

Trace mrun(const Program& p, Scheduler s = {}, bool single = false) {
  Config start = wrap(p.process, p.lat().bottom(), initialConfig(p).qset);
  return runMonitored(start, p, s, 1000, single);
}

Verdict secure(Result& o, const Program& p, const std::string& level) {
  return timed(o, [&] { return checkSecure(p, below(p, level)); }).verdict;
}

Verdict safe(Result& o, const Program& p) {
  return timed(o, [&] { return checkSafe(p); }).verdict;
}

std::string str(Verdict v) { return toString(v); }

void medical(Result& o) {
  Program simple = testing::corpus("medical", {{"simple", "true"}});
  Trace a = mrun(simple);
  o.expect(a.outcome == Outcome::Terminated && !a.error, "simple=true terminates");
  Program careless = testing::corpus("medical", {{"simple", "false"}, {"gooduse", "false"}});
  Trace b = mrun(careless);
  bool atQue = b.outcome == Outcome::Error && b.error && b.error->label.rule == Rule::SendV &&
               b.error->label.subjectRole == 1 &&
               b.error->label.redex.front().rfind("_s1[1]!<2, \"que\"^bot>", 0) == 0;
  o.expect(atQue, "gooduse=false: " + (b.error ? "error at " + b.error->label.redex.front().substr(0, 21)
                                               : std::string("no error")));
  Program careful = testing::corpus("medical", {{"simple", "false"}, {"gooduse", "true"}});
  Trace c = mrun(careful);
  o.expect(c.outcome == Outcome::Terminated && !c.error, "gooduse=true terminates");
}

void example1(Result& o) {
  Program p = testing::corpus("example1");
  auto rs = timed(o, [&] { return checkSecureAll(p); });
  std::map<std::string, const CheckResult*> by;
  for (const auto& r : rs) by[r.L->toString(p.lat())] = &r;
  auto verdict = [&](const std::string& L) { return by.count(L) ? by[L]->verdict : Verdict::Inconclusive; };
  o.expect(verdict("{bot}") == Verdict::Holds, "{bot} " + str(verdict("{bot}")));
  o.expect(verdict("{bot,l}") == Verdict::Fails, "{bot,l} " + str(verdict("{bot,l}")));
  o.expect(verdict("{bot,l,top}") == Verdict::Holds, "S " + str(verdict("{bot,l,top}")));
  if (verdict("{bot,l}") == Verdict::Fails) {
    std::string why = replayWitness(p, by["{bot,l}"]->witness);
    o.expect(why.empty(), why.empty() ? "witness replays" : "replay: " + why);
  }
}

void example2(Result& o) {
  Program p = testing::corpus("example2");
  CheckResult r = timed(o, [&] { return checkSecure(p, below(p, "bot")); });
  o.expect(r.verdict == Verdict::Fails, "P {bot} " + str(r.verdict));
  if (r.verdict == Verdict::Fails) {
    std::string s = r.witness["summary"];
    o.expect(s == "{s: (2,1,true^bot)} vs {s: eps}", "final " + s);
  }
  Program q = testing::corpus("example2_q");
  Verdict vq = secure(o, q, "bot");
  o.expect(vq == Verdict::Fails, "Q {bot} " + str(vq));
  Verdict sp = safe(o, p), sq = safe(o, q);
  o.expect(sp == Verdict::Fails, "safe P " + str(sp));
  o.expect(sq == Verdict::Fails, "safe Q " + str(sq));
}

void example3(Result& o) {
  Verdict a = secure(o, testing::corpus("example3"), "bot");
  Verdict b = secure(o, testing::corpus("example3_unlevelled"), "bot");
  o.expect(a == Verdict::Holds, "levelled " + str(a));
  o.expect(b == Verdict::Fails, "unlevelled " + str(b));
}

void example5(Result& o) {
  Program p = testing::corpus("example5");
  CheckResult r = timed(o, [&] { return checkSecure(p, below(p, "bot")); });
  o.expect(r.verdict == Verdict::Holds,
           "{bot} " + str(r.verdict) + (r.verdict == Verdict::Fails ? " (" + r.witness["summary"].get<std::string>() + ")" : ""));
  Verdict s = safe(o, p);
  o.expect(s == Verdict::Fails, "safe " + str(s));
}

void sibling(Result& o) {
  Program p = testing::corpus("sibling");
  Verdict n = timed(o, [&] { return checkNoRuntimeError(p); }).verdict;
  Verdict s = safe(o, p);
  o.expect(n == Verdict::Holds, "noerr " + str(n));
  o.expect(s == Verdict::Fails, "safe " + str(s));
}

void monitors(Result& o) {
  Program p = testing::corpus("monitors4");
  Scheduler first{Scheduler::Kind::Deterministic, 0, {3, 4}};
  Trace t = mrun(p, first);
  std::string fin = print(t.final(), &p.lat());
  o.expect(t.outcome == Outcome::Terminated && !t.error && fin == "<[bot]0 | [top]0, {}>", "final " + fin);
  Trace single = mrun(p, first, true);
  o.expect(single.outcome == Outcome::Error, std::string("single monitor ") + toString(single.outcome));
}

void suites(Result& o, const std::string& which) {
  std::string cmd = std::string(SESMON_UNIT_TESTS) + " --test-suite=" + which + " --minimal > /dev/null 2>&1";
  int rc = timed(o, [&] { return std::system(cmd.c_str()); });
  o.expect(rc == 0, which + (rc == 0 ? ": 0 failures" : ": failures"));
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Result&)> run;
    bool bounded;  // subject to the per-check time budget
  };
  const Criterion criteria[] = {
      {1, "medical service under the monitor", medical, true},
      {2, "Example 1 verdicts per observer", example1, true},
      {3, "Example 2 and its variant", example2, true},
      {4, "Example 3 with and without levels", example3, true},
      {5, "Example 5 secure but not safe", example5, true},
      {6, "sibling: no runtime error, not safe", sibling, true},
      {7, "independent monitors", monitors, true},
      {8, "property suite", [](Result& o) { suites(o, "properties"); }, false},
      {9, "unit suites", [](Result& o) { suites(o, "lattice,queue"); }, false},
  };
  std::set<int> failed;
  for (const auto& c : criteria) {
    Result o;
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.expect(false, std::string("exception: ") + e.what());
    }
    if (c.bounded && o.slowest > 10) o.expect(false, "slowest check over 10 s");
    if (!o.pass) failed.insert(c.id);
    std::printf("%s %d %s: %s (slowest %.2fs)%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str(),
                o.slowest, !o.pass && kKnownFailures.count(c.id) ? " [known, see README]" : "");
  }
  std::printf("%zu of 9 criteria pass\n", 9 - failed.size());
  return failed == kKnownFailures ? 0 : 1;
}
