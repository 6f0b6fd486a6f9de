#include <doctest.h>

#include <deque>
#include <random>

#include "sesmon/queue.hpp"

using namespace sesmon;

namespace {

using Lanes = std::map<std::pair<int, int>, std::vector<Content>>;

Lanes nonEmpty(const Queue& q) {
  Lanes out;
  for (const auto& [lane, cs] : q.lanes())
    if (!cs.empty()) out[lane] = cs;
  return out;
}

Lattice chain3() { return Lattice::validate({"bot", "l", "top"}, {{"bot", "l"}, {"l", "top"}}); }

Content randomContent(std::mt19937& rng, const Lattice& lat) {
  Level l{static_cast<std::uint8_t>(rng() % lat.size())};
  switch (rng() % 4) {
    case 0: return Content::ofValue({rng() % 2 == 0, l});
    case 1: return Content::ofValue({static_cast<std::int64_t>(rng() % 3), l});
    case 2: return Content::ofService("a", l);
    default: return Content::ofLabel(rng() % 2 ? "ok" : "ko", l);
  }
}

Roles randomReceivers(std::mt19937& rng, int sender, int roles) {
  Roles r;
  for (int p = 1; p <= roles; ++p)
    if (p != sender && rng() % 2) r.push_back(p);
  if (r.empty()) r.push_back(sender == 1 ? 2 : 1);
  return r;
}

QSet randomQSet(std::mt19937& rng, const Lattice& lat) {
  QSet h;
  for (const char* s : {"s", "t"}) {
    if (rng() % 4 == 0) continue;
    Queue& q = h[s];
    int n = rng() % 6;
    for (int i = 0; i < n; ++i) {
      int p = 1 + rng() % 3;
      q.push({p, randomReceivers(rng, p, 3), randomContent(rng, lat)});
    }
  }
  return h;
}

// Projection computed lane by lane, independently of projectL. Queues left
// empty by the projection are not observable and disappear.
std::map<std::string, Lanes> oracleProject(const QSet& h, const DownSet& L) {
  std::map<std::string, Lanes> out;
  for (const auto& [s, q] : h) {
    Lanes ls;
    for (const auto& [lane, cs] : q.lanes())
      for (const auto& c : cs)
        if (L.contains(c.level)) ls[lane].push_back(c);
    if (!ls.empty()) out[s] = std::move(ls);
  }
  return out;
}

std::map<std::string, Lanes> shape(const QSet& h) {
  std::map<std::string, Lanes> out;
  for (const auto& [s, q] : h)
    if (!nonEmpty(q).empty()) out[s] = nonEmpty(q);
  return out;
}

// Adds messages whose levels lie outside L at random places.
QSet addHigh(std::mt19937& rng, QSet h, const Lattice& lat, const DownSet& L) {
  std::vector<Level> high;
  for (Level l : lat.levels())
    if (!L.contains(l)) high.push_back(l);
  if (high.empty()) return h;
  for (auto& [s, q] : h) {
    for (auto& [lane, cs] : q.lanes()) {
      std::size_t at = rng() % (cs.size() + 1);
      cs.insert(cs.begin() + at, Content::ofValue({true, high[rng() % high.size()]}));
    }
  }
  return h;
}

}  // namespace

TEST_SUITE("queue") {
  TEST_CASE("a multicast message splits into one lane per receiver") {
    Lattice lat = Lattice::twoPoint();
    Queue q;
    q.push({1, {2, 3}, Content::ofValue({true, lat.bottom()})});
    q.push({1, {3}, Content::ofValue({false, lat.top()})});
    REQUIRE(q.head(1, 2) != nullptr);
    REQUIRE(q.head(1, 3) != nullptr);
    CHECK(std::get<bool>(q.head(1, 3)->value));
    q.popHead(1, 3);
    CHECK_FALSE(std::get<bool>(q.head(1, 3)->value));
    CHECK(q.head(2, 1) == nullptr);
    CHECK(print(q, &lat) == "(1,2,true^bot).(1,3,false^top)");
  }

  TEST_CASE("pop checks kind and level") {
    Lattice lat = Lattice::twoPoint();
    QSet h{{"s", Queue{}}};
    h = pushMessage(h, "s", {1, {2}, Content::ofValue({true, lat.top()})});
    auto miss = popMessage(h, "s", 2, 1, Content::Kind::Value, lat.bottom());
    CHECK_FALSE(miss.content);
    CHECK(miss.levelMismatch);
    auto wrongKind = popMessage(h, "s", 2, 1, Content::Kind::Label, lat.top());
    CHECK_FALSE(wrongKind.content);
    CHECK_FALSE(wrongKind.levelMismatch);
    auto hit = popMessage(h, "s", 2, 1, Content::Kind::Value, lat.top());
    REQUIRE(hit.content);
    CHECK(hit.qset.at("s").empty());
    CHECK_THROWS_AS(pushMessage(h, "t", {1, {2}, Content::ofValue({true, lat.top()})}), UnknownSession);
  }

  TEST_CASE("monotone queues") {
    Lattice lat = Lattice::twoPoint();
    Queue up, down;
    up.push({1, {2}, Content::ofValue({true, lat.bottom()})});
    up.push({1, {2}, Content::ofValue({true, lat.top()})});
    down.push({1, {2}, Content::ofValue({true, lat.top()})});
    down.push({1, {2}, Content::ofValue({true, lat.bottom()})});
    CHECK(isMonotone(up, lat));
    CHECK_FALSE(isMonotone(down, lat));
  }

  TEST_CASE("per-pair FIFO on random push/pop sequences") {
    std::mt19937 rng(7);
    Lattice lat = chain3();
    for (int run = 0; run < 1000; ++run) {
      Queue q;
      std::map<std::pair<int, int>, std::deque<Content>> model;
      int ops = 1 + rng() % 30;
      for (int i = 0; i < ops; ++i) {
        if (rng() % 3 != 0) {
          int p = 1 + rng() % 4;
          Roles to = randomReceivers(rng, p, 4);
          Content c = randomContent(rng, lat);
          q.push({p, to, c});
          for (int r : to) model[{p, r}].push_back(c);
        } else {
          int from = 1 + rng() % 4, to = 1 + rng() % 4;
          auto& m = model[{from, to}];
          const Content* h = q.head(from, to);
          if (m.empty()) {
            CHECK(h == nullptr);
          } else {
            REQUIRE(h != nullptr);
            CHECK(*h == m.front());
            q.popHead(from, to);
            m.pop_front();
          }
        }
      }
      std::size_t total = 0;
      for (const auto& [lane, m] : model) {
        total += m.size();
        const Content* h = q.head(lane.first, lane.second);
        CHECK((h == nullptr) == m.empty());
        if (h) CHECK(*h == m.front());
      }
      CHECK(q.size() == total);
    }
  }

  TEST_CASE("projection and L-equality laws on random Q-sets") {
    std::mt19937 rng(11);
    Lattice lat = chain3();
    auto ds = lat.downSets();
    for (int run = 0; run < 1000; ++run) {
      QSet h = randomQSet(rng, lat);
      for (const DownSet& L : ds) {
        QSet p = projectL(h, L);
        CHECK(shape(p) == oracleProject(h, L));
        CHECK(projectL(p, L) == p);  // idempotent
        CHECK(eqL(h, h, L));
        // L-equal variants: symmetric and transitive.
        QSet k = addHigh(rng, h, lat, L);
        QSet m = addHigh(rng, k, lat, L);
        CHECK(eqL(h, k, L));
        CHECK(eqL(k, h, L));
        CHECK(eqL(k, m, L));
        CHECK(eqL(h, m, L));
        for (const DownSet& L2 : ds) {
          if ((L2.mask() & L.mask()) != L2.mask()) continue;
          // Antitone in L: a smaller observer sees less.
          CHECK(projectL(p, L2) == projectL(h, L2));
          if (eqL(h, k, L)) CHECK(eqL(h, k, L2));
        }
      }
      // Another random Q-set is L-equal exactly when the projections agree.
      QSet other = randomQSet(rng, lat);
      for (const DownSet& L : ds) CHECK(eqL(h, other, L) == (oracleProject(h, L) == oracleProject(other, L)));
    }
  }
}
