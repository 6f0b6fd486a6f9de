#include <doctest.h>

#include <algorithm>

#include "support.hpp"

using namespace sesmon;

namespace {

DownSet below(const Program& p, const std::string& level) { return p.lat().downClosure({p.lat().level(level)}); }

// Monotone lane contents of length at most `bound`, by brute force over all words.
std::vector<std::vector<Content>> monotoneWords(const std::vector<Content>& alphabet, std::size_t bound,
                                                const Lattice& lat) {
  std::vector<std::vector<Content>> all{{}}, frontier{{}};
  for (std::size_t len = 1; len <= bound; ++len) {
    std::vector<std::vector<Content>> next;
    for (const auto& w : frontier)
      for (const auto& c : alphabet) {
        auto v = w;
        v.push_back(c);
        next.push_back(v);
      }
    frontier = next;
    for (const auto& w : next) {
      bool up = true;
      for (std::size_t i = 1; i < w.size(); ++i) up = up && lat.leq(w[i - 1].level, w[i].level);
      if (up) all.push_back(w);
    }
  }
  return all;
}

std::size_t oracleCount(const std::vector<Content>& alphabet, const std::vector<Queue::Lane>& lanes,
                        std::size_t bound, const Lattice& lat) {
  auto words = monotoneWords(alphabet, bound, lat);
  std::size_t n = 0;
  std::vector<std::size_t> pick(lanes.size(), 0);
  while (true) {
    std::size_t total = 0;
    for (auto i : pick) total += words[i].size();
    n += total <= bound;
    std::size_t k = 0;
    while (k < pick.size() && ++pick[k] == words.size()) pick[k++] = 0;
    if (k == pick.size()) break;
  }
  return n;
}

Verdict secure(const std::string& name, const std::string& level) {
  Program p = testing::corpus(name);
  return checkSecure(p, below(p, level)).verdict;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("monotone queue enumeration matches brute force") {
    Lattice lat = Lattice::twoPoint();
    std::vector<Content> ab{Content::ofValue({true, lat.bottom()}), Content::ofValue({true, lat.top()})};
    // eps, two singletons and the three non-decreasing pairs.
    CHECK(monotoneQueues(ab, {{1, 2}}, 2, lat).size() == 6);
    CHECK(oracleCount(ab, {{1, 2}}, 2, lat) == 6);
    Lattice chain = Lattice::validate({"bot", "l", "top"}, {{"bot", "l"}, {"l", "top"}});
    std::vector<Content> ab3;
    for (Level l : chain.levels()) {
      ab3.push_back(Content::ofValue({false, l}));
      ab3.push_back(Content::ofLabel("ok", l));
    }
    for (std::size_t bound = 0; bound <= 3; ++bound)
      for (const auto& lanes : std::vector<std::vector<Queue::Lane>>{{{1, 2}}, {{1, 2}, {2, 1}}, {{1, 2}, {1, 3}, {3, 2}}}) {
        CAPTURE(bound);
        CAPTURE(lanes.size());
        auto qs = monotoneQueues(ab3, lanes, bound, chain);
        CHECK(qs.size() == oracleCount(ab3, lanes, bound, chain));
        for (const auto& q : qs) CHECK(isMonotone(q, chain));
        for (std::size_t i = 1; i < qs.size(); ++i) CHECK(qs[i - 1].size() <= qs[i].size());
      }
  }

  TEST_CASE("universe alphabet and cap") {
    Program p = testing::corpus("example2");
    auto u = QSetUniverse::fromProgram(p, 2);
    const Lattice& lat = p.lat();
    auto has = [&](const Content& c) {
      return std::find(u.alphabet().begin(), u.alphabet().end(), c) != u.alphabet().end();
    };
    for (Level l : {lat.bottom(), lat.top()}) {
      CHECK(has(Content::ofValue({true, l})));
      CHECK(has(Content::ofValue({false, l})));
    }
    Program sl = testing::corpus("servicelevels");
    auto big = QSetUniverse::fromProgram(sl, 2);
    std::map<std::string, std::set<int>> roles{{"s", {1, 2, 3}}};
    REQUIRE(big.qsets(roles) != nullptr);
    auto tiny = QSetUniverse::fromProgram(sl, 2, 10);
    CHECK(tiny.qsets(roles) == nullptr);
  }

  TEST_CASE("L-equal pairs") {
    Program p = testing::corpus("example2");
    const Lattice& lat = p.lat();
    auto u = QSetUniverse::fromProgram(p, 1);
    std::map<std::string, std::set<int>> roles{{"s", {1, 2}}};
    DownSet L = below(p, "bot");
    auto pairs = enumerateQSetPairs(u, roles, L);
    REQUIRE(pairs);
    QSet high, empty;
    high["s"].push({1, {2}, Content::ofValue({true, lat.top()})});
    empty["s"];
    CHECK(std::find(pairs->begin(), pairs->end(), std::make_pair(high, empty)) != pairs->end());
    for (const auto& [a, b] : *pairs) CHECK(eqL(a, b, L));
    // Every L-equal pair of the universe is listed.
    const auto* all = u.qsets(roles);
    std::size_t expected = 0;
    for (const auto& a : *all)
      for (const auto& b : *all) expected += eqL(a, b, L);
    CHECK(pairs->size() == expected);
  }

  TEST_CASE("Q-set JSON round trip") {
    Lattice lat = Lattice::validate({"bot", "l", "top"}, {{"bot", "l"}, {"l", "top"}});
    QSet h;
    h["s"].push({1, {2, 3}, Content::ofValue({std::int64_t{4}, lat.level("l")})});
    h["s"].push({2, {1}, Content::ofLabel("ok", lat.top())});
    h["t"].push({1, {2}, Content::ofService("a", lat.bottom())});
    h["u"];
    CHECK((qsetFromJson(qsetToJson(h, lat), lat) == h));
  }

  TEST_CASE("Example 1: secure for bot and for everything, not for bot and l") {
    Program p = testing::corpus("example1");
    auto rs = checkSecureAll(p);
    REQUIRE(rs.size() == 3);  // {bot}, {bot,l}, all
    std::map<std::string, Verdict> by;
    for (const auto& r : rs) by[r.L->toString(p.lat())] = r.verdict;
    CHECK((by["{bot}"] == Verdict::Holds));
    CHECK((by["{bot,l}"] == Verdict::Fails));
    CHECK((by["{bot,l,top}"] == Verdict::Holds));
    for (const auto& r : rs)
      if (r.verdict == Verdict::Fails) CHECK(replayWitness(p, r.witness) == "");
  }

  TEST_CASE("Example 2: a high input followed by a low output") {
    Program p = testing::corpus("example2");
    CheckResult r = checkSecure(p, below(p, "bot"));
    REQUIRE((r.verdict == Verdict::Fails));
    CHECK(r.witness["summary"] == "{s: (2,1,true^bot)} vs {s: eps}");
    QSet k1 = qsetFromJson(r.witness["final"]["H1'"], p.lat());
    QSet k2;
    k2["s"];
    CHECK(projectL(k1, below(p, "bot")) != projectL(k2, below(p, "bot")));
    CHECK(replayWitness(p, r.witness) == "");
    // A witness edited to claim a different message does not replay.
    nlohmann::json bad = r.witness;
    bad["final"]["move"]["redex"] = {"s[2]!<1, false^bot>.0"};
    CHECK(replayWitness(p, bad) != "");
    nlohmann::json wrongFinal = r.witness;
    wrongFinal["final"]["H1'"] = wrongFinal["final"]["H2"];
    CHECK(replayWitness(p, wrongFinal) != "");
    CHECK((secure("example2_q", "bot") == Verdict::Fails));
    CHECK((secure("example2", "top") == Verdict::Holds));
  }

  TEST_CASE("Example 3: levelled receives are secure") {
    CHECK((secure("example3", "bot") == Verdict::Holds));
    CHECK((secure("example3_unlevelled", "bot") == Verdict::Fails));
  }

  TEST_CASE("a high input guarding a low output is not sanitised by a low reader") {
    Program p = parseProgram("s[2]?(1, x^top).s[2]!<1, true^bot> | s[1]?(2, y^bot)");
    CheckResult r = checkSecure(p, below(p, "bot"));
    CHECK((r.verdict == Verdict::Fails));
    CHECK(replayWitness(p, r.witness) == "");
  }

  TEST_CASE("safety and absence of runtime errors on bundled programs") {
    struct Row {
      const char* name;
      Verdict safe, noerr;
    };
    const Row rows[] = {
        {"example1", Verdict::Fails, Verdict::Fails},     {"example2", Verdict::Fails, Verdict::Holds},
        {"example2_q", Verdict::Fails, Verdict::Holds},   {"example3", Verdict::Holds, Verdict::Holds},
        {"example3_unlevelled", Verdict::Fails, Verdict::Holds},
        {"example5", Verdict::Fails, Verdict::Fails},     {"sibling", Verdict::Fails, Verdict::Holds},
        {"monitors4", Verdict::Holds, Verdict::Holds},    {"linkjoin", Verdict::Fails, Verdict::Fails},
        {"nil", Verdict::Holds, Verdict::Holds},          {"servicelevels", Verdict::Fails, Verdict::Fails},
    };
    for (const auto& row : rows) {
      CAPTURE(row.name);
      Program p = testing::corpus(row.name);
      CheckResult s = checkSafe(p);
      CheckResult n = checkNoRuntimeError(p);
      CHECK((s.verdict == row.safe));
      CHECK((n.verdict == row.noerr));
      if (s.verdict == Verdict::Fails) CHECK(replayWitness(p, s.witness) == "");
      if (n.verdict == Verdict::Fails) CHECK(replayWitness(p, n.witness) == "");
    }
    Program med = testing::corpus("medical", {{"simple", "true"}});
    CHECK((checkSafe(med).verdict == Verdict::Holds));
    CHECK((checkNoRuntimeError(med).verdict == Verdict::Holds));
    CHECK((overall(checkSecureAll(med)) == Verdict::Holds));
  }

  TEST_CASE("L-high processes") {
    Program hi = parseProgram("s[1]!<2, true^top>");
    CHECK((checkLHigh(hi, below(hi, "bot")).verdict == Verdict::Holds));
    Program lo = parseProgram("s[1]!<2, true^bot>");
    CHECK((checkLHigh(lo, below(lo, "bot")).verdict == Verdict::Fails));
    CHECK((checkLHigh(lo, below(lo, "top")).verdict == Verdict::Fails));
    CHECK((checkLHigh(parseProgram("0"), below(lo, "top")).verdict == Verdict::Holds));
  }

  TEST_CASE("tight bounds give inconclusive verdicts, not wrong ones") {
    Program p = testing::corpus("example1");
    CheckBounds b;
    b.maxStates = 1;
    CHECK((checkSafe(p, b).verdict != Verdict::Holds));
    Program rec = parseProgram("def X(v^bot, c) = c!<2, v^bot>.X<v^bot, c> in X<true^bot, s[1]>");
    CheckBounds shallow;
    shallow.maxSteps = 3;
    CHECK((checkNoRuntimeError(rec, shallow).verdict == Verdict::Inconclusive));
  }
}
