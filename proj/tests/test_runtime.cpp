#include <doctest.h>

#include <algorithm>

#include "sesmon/runtime.hpp"
#include "support.hpp"

using namespace sesmon;

namespace {

Trace run(const std::string& src, std::size_t maxSteps = 100, Scheduler sched = {}) {
  static std::vector<Program> keep;  // traces refer to the program's lattice
  keep.push_back(parseProgram(src));
  return runStandard(initialConfig(keep.back()), keep.back(), sched, maxSteps);
}

std::vector<std::string> rules(const Trace& t) {
  std::vector<std::string> out;
  for (const auto& s : t.steps) out.push_back(ruleName(s.label.rule));
  return out;
}

std::string finalText(const Trace& t) { return print(t.final(), nullptr); }

}  // namespace

TEST_SUITE("runtime") {
  TEST_CASE("link opens a private session with an empty queue") {
    Program p = parseProgram("bar a[2] | a[1](x).x!<2, true^bot> | a[2](y).y?(1, z^bot)");
    StepResult r = stepStandard(initialConfig(p), p);
    REQUIRE(r.successors.size() == 1);
    const Transition& t = r.successors[0];
    CHECK((t.label.rule == Rule::Link));
    CHECK(t.label.fresh.size() == 1);
    CHECK(t.label.freshSessions == 1);
    CHECK(print(t.next, &p.lat()) == "(new _s1) <_s1[1]!<2, true^bot>.0 | _s1[2]?(1, z^bot).0, {_s1: eps}>");
  }

  TEST_CASE("send, receive and garbage collection of the session") {
    Trace t = run("bar a[2] | a[1](x).x!<2, true^bot> | a[2](y).y?(1, z^bot)");
    CHECK((t.outcome == Outcome::Terminated));
    CHECK(rules(t) == std::vector<std::string>{"Link", "SendV", "RecV"});
    CHECK(print(t.steps[1].next.qset, nullptr) == "{_s1: (1,2,true^0)}");
    CHECK(finalText(t) == "<0, {}>");
  }

  TEST_CASE("link needs every participant") {
    Trace t = run("bar a[3] | a[1](x).0 | a[2](y).0");
    CHECK((t.outcome == Outcome::Stuck));
    CHECK(t.steps.empty());
  }

  TEST_CASE("stuck, level mismatch and missing branch") {
    CHECK((run("s[1]?(2, x^bot)").outcome == Outcome::Stuck));
    Trace mismatch = run("s[1]!<2, true^top> | s[2]?(1, x^bot)");
    CHECK((mismatch.outcome == Outcome::Diagnostic));
    REQUIRE(mismatch.diagnostics.size() == 1);
    CHECK(mismatch.diagnostics[0].rfind("LevelMismatch", 0) == 0);
    Trace label = run("s[1] oplus^bot <2, nope> | s[2] &^bot (1, {go: 0})");
    CHECK((label.outcome == Outcome::Diagnostic));
    REQUIRE(label.diagnostics.size() == 1);
    CHECK(label.diagnostics[0].rfind("StuckBranchLabel", 0) == 0);
  }

  TEST_CASE("recursion hits the step bound") {
    Trace t = run("def X(v^bot, c) = c!<2, v^bot>.X<v^bot, c> in X<true^bot, s[1]>", 5);
    CHECK((t.outcome == Outcome::StepBound));
    CHECK(rules(t) == std::vector<std::string>{"Def", "SendV", "Def", "SendV", "Def"});
    CHECK(print(t.final().qset, nullptr) == "{s: (1,2,true^0).(1,2,true^0)}");
  }

  TEST_CASE("delegation hands over a role") {
    Trace t = run("s[1]!(((2, t[1]^bot))) | s[2]?(((d^bot, 1))).d!<2, 5^bot> | t[2]?(1, n^bot)");
    CHECK((t.outcome == Outcome::Terminated));
    CHECK(rules(t) == std::vector<std::string>{"SendC", "RecC", "SendV", "RecV"});
    CHECK(print(t.steps[1].next.parts[0].proc, nullptr) == "t[1]!<2, 5^0>.0");
  }

  TEST_CASE("service names travel and open sessions") {
    Trace t = run(
        "s[1]!<<2, a^bot>> | s[2]?((z^bot, 1)).bar z[2] | a[1](x).x oplus^bot <2, go> "
        "| a[2](y).y &^bot (1, {go: 0, stop: y!<1, 1^bot>})");
    CHECK((t.outcome == Outcome::Terminated));
    CHECK(rules(t) == std::vector<std::string>{"SendS", "RecS", "Link", "Label", "Branch"});
  }

  TEST_CASE("conditionals and multicast") {
    Trace t = run("s[1]!<{2,3}, true^bot> | s[2]?(1, x^bot).if x^bot then 0 else s[2]!<1, 0^bot> | s[3]?(1, y^bot)");
    CHECK((t.outcome == Outcome::Terminated));
    auto rs = rules(t);
    CHECK(std::count(rs.begin(), rs.end(), "RecV") == 2);
    CHECK(std::count(rs.begin(), rs.end(), "If-T") == 1);
  }

  TEST_CASE("medical service, simple path") {
    Program p = testing::corpus("medical", {{"simple", "true"}});
    Trace t = runStandard(initialConfig(p), p, {}, 100);
    CHECK((t.outcome == Outcome::Terminated));
    auto rs = rules(t);
    // Link, three value exchanges, one choice, one test.
    CHECK(rs.size() == 10);
    CHECK(std::count(rs.begin(), rs.end(), "Link") == 1);
    CHECK(std::count(rs.begin(), rs.end(), "SendV") == 3);
    CHECK(std::count(rs.begin(), rs.end(), "RecV") == 3);
    CHECK(std::count(rs.begin(), rs.end(), "Label") == 1);
    CHECK(std::count(rs.begin(), rs.end(), "Branch") == 1);
    CHECK(std::count(rs.begin(), rs.end(), "If-T") == 1);
  }

  TEST_CASE("random scheduler is reproducible by seed") {
    Program p = testing::corpus("monitors4");
    Scheduler s{Scheduler::Kind::Random, 7, {}};
    Trace a = runStandard(initialConfig(p), p, s, 50);
    Trace b = runStandard(initialConfig(p), p, s, 50);
    CHECK(rules(a) == rules(b));
    CHECK(print(a.final(), nullptr) == print(b.final(), nullptr));
    // Different seeds explore different interleavings of the two exchanges.
    std::set<std::vector<std::string>> seen;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Trace t = runStandard(initialConfig(p), p, Scheduler{Scheduler::Kind::Random, seed, {}}, 50);
      CHECK((t.outcome == Outcome::Terminated));
      std::vector<std::string> roles;
      for (const auto& st : t.steps) roles.push_back(std::to_string(st.label.subjectRole));
      seen.insert(roles);
    }
    CHECK(seen.size() > 1);
  }

  TEST_CASE("successors are canonical and deduplicated") {
    Program p = parseProgram("s[1]!<2, true^bot> | s[1]!<2, true^bot>");
    StepResult r = stepStandard(initialConfig(p), p);
    CHECK(r.successors.size() == 1);
    Program q = parseProgram("bar a[2] | bar a[2] | a[1](x).0 | a[2](y).0");
    CHECK(stepStandard(initialConfig(q), q).successors.size() == 1);
  }
}
