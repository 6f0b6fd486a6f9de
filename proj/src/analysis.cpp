#include "sesmon/analysis.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <functional>
#include <tuple>
#include <unordered_map>

namespace sesmon {

using nlohmann::json;

const char* toString(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Universe
// ---------------------------------------------------------------------------

namespace {

void monotoneLane(const std::vector<Content>& alphabet, std::size_t len, const Lattice& lat,
                  std::vector<Content>& cur, std::vector<std::vector<Content>>& out) {
  if (cur.size() == len) {
    out.push_back(cur);
    return;
  }
  for (const auto& c : alphabet) {
    if (!cur.empty() && !lat.leq(cur.back().level, c.level)) continue;
    cur.push_back(c);
    monotoneLane(alphabet, len, lat, cur, out);
    cur.pop_back();
  }
}

int kindRank(const Content& c) {
  if (c.kind != Content::Kind::Value) return 10 + static_cast<int>(c.kind);
  if (const bool* b = std::get_if<bool>(&c.value)) return *b ? 0 : 1;
  return std::holds_alternative<std::int64_t>(c.value) ? 2 : 3;
}

void walk(const Process& p, const std::function<void(const Process&)>& f) {
  f(p);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Participant>) {
          walk(x.body, f);
        } else if constexpr (std::is_same_v<T, SendValue> || std::is_same_v<T, RecvValue> ||
                             std::is_same_v<T, SendService> || std::is_same_v<T, RecvService> ||
                             std::is_same_v<T, SendChannel> || std::is_same_v<T, RecvChannel> ||
                             std::is_same_v<T, Select>) {
          walk(x.cont, f);
        } else if constexpr (std::is_same_v<T, Branch>) {
          for (const auto& arm : x.arms) walk(arm.second, f);
        } else if constexpr (std::is_same_v<T, Conditional>) {
          walk(x.then_branch, f);
          walk(x.else_branch, f);
        } else if constexpr (std::is_same_v<T, Parallel>) {
          for (const auto& q : x.parts) walk(q, f);
        } else if constexpr (std::is_same_v<T, Restriction>) {
          walk(x.body, f);
        } else if constexpr (std::is_same_v<T, Definition>) {
          walk(x.decl->body, f);
          walk(x.body, f);
        }
      },
      p->term);
}

void exprLevels(const Expr& e, std::set<Level>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, VarExpr>) out.insert(x.level);
        else if constexpr (std::is_same_v<T, LitExpr>) out.insert(x.value.level);
        else if constexpr (std::is_same_v<T, NotExpr>) exprLevels(x.operand, out);
        else if constexpr (std::is_same_v<T, BinExpr>) {
          exprLevels(x.lhs, out);
          exprLevels(x.rhs, out);
        } else if constexpr (std::is_same_v<T, OracleExpr>) {
          for (const auto& a : x.args) exprLevels(a, out);
        }
      },
      e->term);
}

std::string sessionsKey(const std::map<std::string, std::set<int>>& sessions) {
  std::string k;
  for (const auto& [s, roles] : sessions) {
    k += s + ":";
    for (int r : roles) k += std::to_string(r) + ",";
    k += ";";
  }
  return k;
}

std::size_t qsetSize(const QSet& h) {
  std::size_t n = 0;
  for (const auto& [_, q] : h) n += q.size();
  return n;
}

}  // namespace

std::vector<Queue> monotoneQueues(const std::vector<Content>& alphabet, const std::vector<Queue::Lane>& lanes,
                                  std::size_t bound, const Lattice& lat) {
  // Sequences per length, shared by all lanes.
  std::vector<std::vector<std::vector<Content>>> byLen(bound + 1);
  for (std::size_t k = 0; k <= bound; ++k) {
    std::vector<Content> cur;
    monotoneLane(alphabet, k, lat, cur, byLen[k]);
  }
  std::vector<std::pair<std::size_t, Queue>> out;
  std::function<void(std::size_t, std::size_t, Queue&)> rec = [&](std::size_t li, std::size_t used, Queue& q) {
    if (li == lanes.size()) {
      out.emplace_back(used, q);
      return;
    }
    for (std::size_t k = 0; used + k <= bound; ++k) {
      for (const auto& seq : byLen[k]) {
        if (k == 0) {
          rec(li + 1, used, q);
          continue;
        }
        q.lanes()[lanes[li]] = seq;
        rec(li + 1, used + k, q);
        q.lanes().erase(lanes[li]);
      }
    }
  };
  Queue q;
  rec(0, 0, q);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Queue> qs;
  qs.reserve(out.size());
  for (auto& [_, qu] : out) qs.push_back(std::move(qu));
  return qs;
}

QSetUniverse::QSetUniverse(std::shared_ptr<const Lattice> lat, std::vector<Content> alphabet, std::size_t queueBound,
                           std::size_t cap)
    : lat_(std::move(lat)), alphabet_(std::move(alphabet)), queueBound_(queueBound), cap_(cap) {}

QSetUniverse QSetUniverse::fromProgram(const Program& prog, std::size_t queueBound, std::size_t cap) {
  const Lattice& lat = prog.lat();
  std::set<Level> levels;
  std::vector<Content> found;
  auto add = [&](Content c) {
    levels.insert(c.level);
    if (std::find(found.begin(), found.end(), c) == found.end()) found.push_back(std::move(c));
  };
  auto visit = [&](const Process& p) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, SendValue>) {
            exprLevels(x.expr, levels);
            try {
              add(Content::ofValue(evaluate(x.expr, {}, lat)));
            } catch (const EvalError&) {
            }
          } else if constexpr (std::is_same_v<T, RecvValue> || std::is_same_v<T, RecvService> ||
                               std::is_same_v<T, RecvChannel>) {
            levels.insert(x.level);
          } else if constexpr (std::is_same_v<T, SendService>) {
            if (x.service.variable) levels.insert(x.level);
            else add(Content::ofService(x.service.name, x.level));
          } else if constexpr (std::is_same_v<T, SendChannel>) {
            if (x.delegated.isVariable()) levels.insert(x.level);
            else add(Content::ofChannel(x.delegated.name, x.delegated.role, x.level));
          } else if constexpr (std::is_same_v<T, Select>) {
            add(Content::ofLabel(x.label, x.level));
          } else if constexpr (std::is_same_v<T, Branch>) {
            for (const auto& arm : x.arms) add(Content::ofLabel(arm.first, x.level));
          } else if constexpr (std::is_same_v<T, Conditional>) {
            exprLevels(x.guard, levels);
          } else if constexpr (std::is_same_v<T, Call>) {
            for (const auto& a : x.args) exprLevels(a, levels);
          }
        },
        p->term);
  };
  walk(prog.process, visit);
  for (const auto& [_, d] : prog.decls) {
    walk(d->body, visit);
    for (const auto& [__, l] : d->params) levels.insert(l);
  }
  for (Level l : levels) {
    add(Content::ofValue(Value{true, l}));
    add(Content::ofValue(Value{false, l}));
  }
  std::stable_sort(found.begin(), found.end(), [](const Content& a, const Content& b) {
    if (a.level != b.level) return a.level < b.level;
    return kindRank(a) < kindRank(b);
  });
  return QSetUniverse(prog.lattice, std::move(found), queueBound, cap);
}

const std::vector<Queue>& QSetUniverse::queuesFor(const std::set<int>& roles) const {
  auto it = queueCache_.find(roles);
  if (it != queueCache_.end()) return it->second;
  std::vector<Queue::Lane> lanes;
  for (int p : roles)
    for (int q : roles)
      if (p != q) lanes.emplace_back(p, q);
  return queueCache_[roles] = monotoneQueues(alphabet_, lanes, queueBound_, *lat_);
}

const std::vector<QSet>* QSetUniverse::qsets(const std::map<std::string, std::set<int>>& sessions) const {
  std::string k = sessionsKey(sessions);
  auto it = qsetCache_.find(k);
  if (it != qsetCache_.end()) return it->second ? &*it->second : nullptr;

  std::size_t total = 1;
  std::vector<std::pair<std::string, const std::vector<Queue>*>> parts;
  for (const auto& [s, roles] : sessions) {
    const auto& qs = queuesFor(roles);
    parts.emplace_back(s, &qs);
    total *= qs.size();
    if (total > cap_) {
      qsetCache_[k] = std::nullopt;
      return nullptr;
    }
  }
  std::vector<QSet> out;
  out.reserve(total);
  QSet cur;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == parts.size()) {
      out.push_back(cur);
      return;
    }
    for (const auto& q : *parts[i].second) {
      cur[parts[i].first] = q;
      rec(i + 1);
    }
    cur.erase(parts[i].first);
  };
  rec(0);
  std::stable_sort(out.begin(), out.end(), [](const QSet& a, const QSet& b) { return qsetSize(a) < qsetSize(b); });
  auto& slot = qsetCache_[k];
  slot = std::move(out);
  return &*slot;
}

std::optional<std::vector<std::pair<QSet, QSet>>> enumerateQSetPairs(
    const QSetUniverse& u, const std::map<std::string, std::set<int>>& sessions, const DownSet& L) {
  const auto* hs = u.qsets(sessions);
  if (!hs) return std::nullopt;
  std::map<std::string, std::vector<const QSet*>> classes;
  for (const auto& h : *hs) classes[print(projectL(h, L), nullptr)].push_back(&h);
  std::vector<std::pair<QSet, QSet>> out;
  for (const auto& h1 : *hs)
    for (const QSet* h2 : classes[print(projectL(h1, L), nullptr)]) out.emplace_back(h1, *h2);
  return out;
}

// ---------------------------------------------------------------------------
// JSON forms of Q-sets
// ---------------------------------------------------------------------------

namespace {

json payloadJson(const Payload& p) {
  if (const bool* b = std::get_if<bool>(&p)) return *b;
  if (const auto* i = std::get_if<std::int64_t>(&p)) return *i;
  return std::get<std::string>(p);
}

Payload payloadFrom(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  return j.get<std::string>();
}

}  // namespace

json qsetToJson(const QSet& h, const Lattice& lat) {
  json out = json::object();
  for (const auto& [s, q] : h) {
    json msgs = json::array();
    for (const auto& m : q.messages()) {
      json e = {{"from", m.sender}, {"to", m.receivers.front()}, {"level", lat.name(m.content.level)}};
      switch (m.content.kind) {
        case Content::Kind::Value:
          e["kind"] = "value";
          e["value"] = payloadJson(m.content.value);
          break;
        case Content::Kind::Service:
          e["kind"] = "service";
          e["name"] = m.content.name;
          break;
        case Content::Kind::Channel:
          e["kind"] = "channel";
          e["name"] = m.content.name;
          e["role"] = m.content.role;
          break;
        case Content::Kind::Label:
          e["kind"] = "label";
          e["name"] = m.content.name;
          break;
      }
      msgs.push_back(std::move(e));
    }
    out[s] = std::move(msgs);
  }
  return out;
}

QSet qsetFromJson(const json& j, const Lattice& lat) {
  QSet h;
  for (const auto& [s, msgs] : j.items()) {
    Queue& q = h[s];
    for (const auto& e : msgs) {
      Level l = lat.level(e.at("level").get<std::string>());
      std::string kind = e.at("kind").get<std::string>();
      Content c;
      if (kind == "value") c = Content::ofValue(Value{payloadFrom(e.at("value")), l});
      else if (kind == "service") c = Content::ofService(e.at("name").get<std::string>(), l);
      else if (kind == "channel") c = Content::ofChannel(e.at("name").get<std::string>(), e.at("role").get<int>(), l);
      else if (kind == "label") c = Content::ofLabel(e.at("name").get<std::string>(), l);
      else throw std::invalid_argument("unknown message kind '" + kind + "'");
      q.push(Message{e.at("from").get<int>(), {e.at("to").get<int>()}, c});
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Greatest fixpoint over an obligation graph
// ---------------------------------------------------------------------------

namespace {

// A node holds when every obligation has a live candidate. Unexplored nodes
// and truncated obligations are assumed to hold in the optimistic run and to
// fail in the pessimistic one.
struct ObligationGraph {
  struct Node {
    bool explored = false;
    std::vector<std::vector<int>> obligations;
    std::vector<char> truncated;
  };
  std::vector<Node> nodes;

  // Round in which each node was removed; -1 for survivors.
  std::vector<int> solve(bool optimistic) const {
    const std::size_t n = nodes.size();
    std::vector<int> round(n, -1);
    std::vector<std::vector<int>> users(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!optimistic && !nodes[i].explored) round[i] = 0;
      for (const auto& o : nodes[i].obligations)
        for (int c : o) users[c].push_back(static_cast<int>(i));
    }
    auto fails = [&](std::size_t i, int r) {
      const Node& nd = nodes[i];
      if (!nd.explored) return false;
      for (std::size_t k = 0; k < nd.obligations.size(); ++k) {
        if (optimistic && nd.truncated[k]) continue;
        bool live = false;
        for (int c : nd.obligations[k])
          if (round[c] == -1 || round[c] >= r) {
            live = true;
            break;
          }
        if (!live) return true;
      }
      return false;
    };
    std::vector<int> pending;
    for (std::size_t i = 0; i < n; ++i)
      if (round[i] == -1) pending.push_back(static_cast<int>(i));
    for (int r = 1; !pending.empty(); ++r) {
      std::vector<int> removed;
      for (int i : pending)
        if (round[i] == -1 && fails(i, r)) removed.push_back(i);
      for (int i : removed) round[i] = r;
      std::set<int> next;
      for (int i : removed)
        for (int u : users[i])
          if (round[u] == -1) next.insert(u);
      pending.assign(next.begin(), next.end());
    }
    return round;
  }
};

// The obligation of node i responsible for its removal in round r.
int failingObligation(const ObligationGraph& g, const std::vector<int>& round, int i) {
  const auto& nd = g.nodes[i];
  int r = round[i];
  for (std::size_t k = 0; k < nd.obligations.size(); ++k) {
    if (nd.truncated[k]) continue;
    bool live = false;
    for (int c : nd.obligations[k])
      if (round[c] == -1 || round[c] >= r) live = true;
    if (!live) return static_cast<int>(k);
  }
  return -1;
}

int earliestRemoved(const std::vector<int>& cands, const std::vector<int>& round) {
  int best = -1;
  for (std::size_t k = 0; k < cands.size(); ++k)
    if (best < 0 || round[cands[k]] < round[cands[best]]) best = static_cast<int>(k);
  return best;
}

Verdict decide(const ObligationGraph& g, int root, std::vector<int>& optimisticRounds) {
  optimisticRounds = g.solve(true);
  if (optimisticRounds[root] != -1) return Verdict::Fails;
  return g.solve(false)[root] == -1 ? Verdict::Holds : Verdict::Inconclusive;
}

json labelJson(const StepLabel& l, const std::string& next) {
  return json{{"rule", ruleName(l.rule)}, {"redex", l.redex}, {"next", next}};
}

// ---------------------------------------------------------------------------
// Bisimulation machinery shared by checkSecure and its replay
// ---------------------------------------------------------------------------

struct ReachItem {
  Config cfg;
  std::vector<StepLabel> path;
};

struct Reach {
  std::vector<ReachItem> items;
  bool truncated = false;
  // Fewest sessions opened along a path cut off by the depth bound.
  std::size_t frontierSessions = SIZE_MAX;
};

std::size_t sessionsOpened(const std::vector<StepLabel>& path) {
  std::size_t n = 0;
  for (const auto& l : path) n += l.freshSessions;
  return n;
}

// Lanes (session, from, to) that some top-level input prefix waits on.
using ReadLane = std::tuple<std::string, int, int>;

void readLanes(const Process& p, std::set<ReadLane>& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, RecvValue> || std::is_same_v<T, RecvService> ||
                      std::is_same_v<T, RecvChannel> || std::is_same_v<T, Branch>) {
          if (!x.chan.isVariable()) out.insert({x.chan.name, x.from, x.chan.role});
        } else if constexpr (std::is_same_v<T, Parallel>) {
          for (const auto& q : x.parts) readLanes(q, out);
        } else if constexpr (std::is_same_v<T, Restriction>) {
          readLanes(x.body, out);
        }
      },
      p->term);
}

// A single step reads only the heads of those lanes, so Q-sets agreeing on
// them yield the same obligations.
std::string headKey(const QSet& h, const std::set<ReadLane>& lanes) {
  std::string k;
  for (const auto& [s, from, to] : lanes) {
    k += s + ":" + std::to_string(from) + ">" + std::to_string(to) + "=";
    auto it = h.find(s);
    if (it != h.end()) {
      auto l = it->second.lanes().find({from, to});
      if (l != it->second.lanes().end() && !l->second.empty()) k += print(l->second.front(), nullptr);
    }
    k += ";";
  }
  return k;
}

struct Candidate {
  std::vector<Component> next;  // B'' with fresh names identified with A's
  QSet qset;
  std::size_t item;
};

class SecureEngine {
 public:
  SecureEngine(const Program& prog, const DownSet& L, const CheckBounds& b) : prog_(prog), L_(L), b_(b) {}

  const std::vector<Transition>& moves(const std::vector<Component>& a, const QSet& h) {
    std::string k = processKey(a, false) + "\n" + print(h, nullptr);
    auto it = moves_.find(k);
    if (it != moves_.end()) return it->second;
    NameSupply sup("_x");
    Config c{a, h, false, 1};
    return moves_[k] = stepStandard(c, prog_, {false, &sup}).successors;
  }

  const Reach& reach(const std::vector<Component>& b, const QSet& h) {
    std::string k = processKey(b, false) + "\n" + print(h, nullptr);
    auto it = reach_.find(k);
    if (it != reach_.end()) return it->second;
    Reach r;
    NameSupply sup("_y");
    std::set<std::string> seen;
    Config start{b, h, false, 1};
    seen.insert(configKey(start));
    r.items.push_back({start, {}});
    // Link steps are free: at most one fits on a useful path.
    std::vector<std::size_t> layer{0};
    for (std::size_t d = 0; d <= b_.depth && !layer.empty() && !r.truncated; ++d) {
      std::vector<std::size_t> next;
      for (std::size_t n = 0; n < layer.size(); ++n) {
        std::size_t i = layer[n];
        // One move opens at most one session, so paths opening two never match.
        if (sessionsOpened(r.items[i].path) > 1) continue;
        auto succ = stepStandard(r.items[i].cfg, prog_, {false, &sup}).successors;
        for (auto& t : succ) {
          bool link = t.label.rule == Rule::Link;
          if (!link && d == b_.depth) {
            std::size_t opened = sessionsOpened(r.items[i].path);
            if (opened < r.frontierSessions) {
              r.truncated = true;
              r.frontierSessions = opened;
            }
            continue;
          }
          if (!seen.insert(configKey(t.next)).second) continue;
          ReachItem item{std::move(t.next), r.items[i].path};
          item.path.push_back(std::move(t.label));
          r.items.push_back(std::move(item));
          (link ? layer : next).push_back(r.items.size() - 1);
        }
        if (r.items.size() > 4 * b_.maxStates) {
          r.truncated = true;
          r.frontierSessions = 0;
          break;
        }
      }
      layer = std::move(next);
    }
    return reach_[k] = std::move(r);
  }

  // Simulating configurations reachable from <B,H2> whose Q-set is L-equal to
  // the one produced by the move.
  std::vector<Candidate> candidates(const Transition& move, const Reach& r) const {
    std::vector<std::string> aS(move.label.fresh.begin(), move.label.fresh.begin() + move.label.freshSessions);
    std::vector<std::string> aA(move.label.fresh.begin() + move.label.freshSessions, move.label.fresh.end());
    QSet target = projectL(move.next.qset, L_);
    std::vector<Candidate> out;
    for (std::size_t i = 0; i < r.items.size(); ++i) {
      const ReachItem& it = r.items[i];
      std::vector<std::string> bS, bA;
      for (const auto& l : it.path) {
        bS.insert(bS.end(), l.fresh.begin(), l.fresh.begin() + l.freshSessions);
        bA.insert(bA.end(), l.fresh.begin() + l.freshSessions, l.fresh.end());
      }
      if (bS.size() > aS.size()) continue;
      std::map<std::string, std::string> m;
      for (std::size_t k = 0; k < bS.size(); ++k) m[bS[k]] = aS[k];
      for (std::size_t k = 0; k < bA.size() && k < aA.size(); ++k) m[bA[k]] = aA[k];
      Config c = it.cfg;
      if (!m.empty()) renameRuntimeNames(c, m);
      if (projectL(c.qset, L_) != target) continue;
      out.push_back({std::move(c.parts), std::move(c.qset), i});
    }
    return out;
  }

  const Program& prog() const { return prog_; }
  const DownSet& L() const { return L_; }

 private:
  const Program& prog_;
  DownSet L_;
  CheckBounds b_;
  std::unordered_map<std::string, std::vector<Transition>> moves_;
  std::unordered_map<std::string, Reach> reach_;
};

using Pair = std::pair<std::vector<Component>, std::vector<Component>>;

Pair jointPair(std::vector<Component> a, std::vector<Component> b) {
  canonicalizeJoint({&a, &b});
  return {std::move(a), std::move(b)};
}

std::string pairKey(const Pair& p) { return processKey(p.first, false) + " ~ " + processKey(p.second, false); }

}  // namespace

// ---------------------------------------------------------------------------
// checkSecure
// ---------------------------------------------------------------------------

CheckResult checkSecure(const Program& prog, const DownSet& L, const CheckBounds& b) {
  return checkSecure(prog, prog.process, L, b);
}

CheckResult checkSecure(const Program& prog, const Process& p, const DownSet& L, const CheckBounds& b) {
  const Lattice& lat = prog.lat();
  CheckResult res;
  res.property = "secure";
  res.L = L;
  if (L.empty()) return res;

  QSetUniverse u = QSetUniverse::fromProgram(prog, b.queueBound, b.maxQSets);
  SecureEngine eng(prog, L, b);

  struct Obl {
    int h1 = -1;
    int move = -1;
    int h2 = -1;
    std::vector<std::size_t> items;  // reach item per candidate
  };
  struct Meta {
    Pair pair;
    const std::vector<QSet>* hs1 = nullptr;  // over the sessions of the left process
    const std::vector<QSet>* hs2 = nullptr;  // over the sessions of the right process
    std::vector<Obl> obls;  // parallel to the graph's obligations; entry 0 is the mirror
  };
  ObligationGraph g;
  std::vector<Meta> meta;
  std::unordered_map<std::string, int> index;
  std::deque<int> work;

  auto node = [&](Pair pr) {
    std::string k = pairKey(pr);
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(meta.size());
    index.emplace(std::move(k), id);
    meta.push_back({std::move(pr), nullptr, nullptr, {}});
    g.nodes.emplace_back();
    work.push_back(id);
    return id;
  };

  QSet h0;
  for (const auto& s : freeNames(p).sessions) h0[s];
  Config init = initialConfig(p, h0);
  int root = node(jointPair(init.parts, init.parts));
  // Pairs before canonicalization map to the same node again and again.
  std::unordered_map<std::string, int> rawIndex;
  auto nodeOf = [&](const std::vector<Component>& a, const std::vector<Component>& b2) {
    std::string k = processKey(a, false) + " ~ " + processKey(b2, false);
    auto it = rawIndex.find(k);
    if (it != rawIndex.end()) return it->second;
    int id = node(jointPair(a, b2));
    rawIndex.emplace(std::move(k), id);
    return id;
  };

  std::size_t explored = 0;
  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    if (explored >= b.maxStates) {
      res.reason = "state cap reached";
      continue;
    }
    const Pair pr = meta[id].pair;
    const auto* hs = u.qsets(sessionRoles(pr.first));
    const auto* hs2 = hs ? u.qsets(sessionRoles(pr.second)) : nullptr;
    if (!hs || !hs2) {
      res.reason = "Q-set universe exceeds cap";
      continue;
    }
    ++explored;
    meta[id].hs1 = hs;
    meta[id].hs2 = hs2;
    std::map<std::string, std::vector<int>> classes;
    for (std::size_t i = 0; i < hs2->size(); ++i)
      classes[print(projectL((*hs2)[i], L), nullptr)].push_back(static_cast<int>(i));

    std::vector<std::vector<int>> obls;
    std::vector<char> trunc;
    std::vector<Obl> info;
    int mirror = nodeOf(pr.second, pr.first);
    obls.push_back({mirror});
    trunc.push_back(0);
    info.push_back({});
    // A move reads one head; its partner only sees the L-projection.
    std::set<ReadLane> reads;
    for (const auto& c : pr.first) readLanes(c.proc, reads);
    std::set<std::string> groups;
    for (std::size_t i = 0; i < hs->size(); ++i) {
      const QSet& h1 = (*hs)[i];
      std::string cls = print(projectL(h1, L), nullptr);
      if (!groups.insert(cls + "|" + headKey(h1, reads)).second) continue;
      const auto& mv = eng.moves(pr.first, h1);
      if (mv.empty()) continue;
      ++res.qsets;
      const auto& partners = classes[cls];
      for (std::size_t m = 0; m < mv.size(); ++m) {
        for (int j : partners) {
          const Reach& r = eng.reach(pr.second, (*hs2)[j]);
          auto cands = eng.candidates(mv[m], r);
          Obl o{static_cast<int>(i), static_cast<int>(m), j, {}};
          std::vector<int> ids;
          for (auto& c : cands) {
            ids.push_back(nodeOf(mv[m].next.parts, c.next));
            o.items.push_back(c.item);
          }
          obls.push_back(std::move(ids));
          trunc.push_back(r.truncated && r.frontierSessions <= mv[m].label.freshSessions ? 1 : 0);
          info.push_back(std::move(o));
        }
      }
    }
    g.nodes[id].explored = true;
    g.nodes[id].obligations = std::move(obls);
    g.nodes[id].truncated = std::move(trunc);
    meta[id].obls = std::move(info);
  }
  res.states = meta.size();

  std::vector<int> rounds;
  res.verdict = decide(g, root, rounds);
  if (res.verdict == Verdict::Inconclusive && res.reason.empty()) res.reason = "simulation search depth reached";
  if (res.verdict != Verdict::Fails) return res;

  // Follow the earliest removals down to an obligation without candidates.
  json path = json::array();
  int cur = root;
  while (true) {
    const Meta& mt = meta[cur];
    json step = {{"A", printParts(mt.pair.first, false, &lat)}, {"B", printParts(mt.pair.second, false, &lat)}};
    int k = failingObligation(g, rounds, cur);
    const auto& cands = g.nodes[cur].obligations[k];
    if (k == 0) {
      step["mirror"] = true;
      path.push_back(std::move(step));
      cur = cands[0];
      continue;
    }
    const Obl& o = mt.obls[k];
    const QSet& h1 = (*mt.hs1)[o.h1];
    const QSet& h2 = (*mt.hs2)[o.h2];
    const Transition& mv = eng.moves(mt.pair.first, h1)[o.move];
    step["H1"] = qsetToJson(h1, lat);
    step["move"] = labelJson(mv.label, printParts(mv.next.parts, false, &lat));
    step["H1'"] = qsetToJson(mv.next.qset, lat);
    step["H2"] = qsetToJson(h2, lat);
    if (cands.empty()) {
      json w = {{"property", "secure"},
                {"L", L.toString(lat)},
                {"depth", b.depth},
                {"path", std::move(path)},
                {"final", std::move(step)}};
      w["summary"] = print(mv.next.qset, &lat) + " vs " + print(h2, &lat);
      res.witness = std::move(w);
      return res;
    }
    int c = earliestRemoved(cands, rounds);
    const Reach& r = eng.reach(mt.pair.second, h2);
    auto all = eng.candidates(mv, r);
    const Candidate* chosen = nullptr;
    for (const auto& cand : all)
      if (cand.item == o.items[c]) chosen = &cand;
    json rules = json::array();
    for (const auto& l : r.items[o.items[c]].path) rules.push_back(ruleName(l.rule));
    step["candidate"] = {{"rules", rules},
                         {"next", printParts(chosen->next, false, &lat)},
                         {"H2'", qsetToJson(chosen->qset, lat)}};
    path.push_back(std::move(step));
    cur = cands[c];
  }
}

std::string replaySecureWitness(const Program& prog, const json& witness, const CheckBounds& bounds) {
  const Lattice& lat = prog.lat();
  CheckBounds b = bounds;
  if (witness.contains("depth")) b.depth = witness.at("depth").get<std::size_t>();
  DownSet L;
  {
    std::string text = witness.at("L").get<std::string>();
    bool found = false;
    for (const auto& d : lat.downSets())
      if (d.toString(lat) == text) {
        L = d;
        found = true;
      }
    if (!found) return "unknown observation set " + text;
  }
  SecureEngine eng(prog, L, b);
  QSet h0;
  for (const auto& s : freeNames(prog.process).sessions) h0[s];
  Config init = initialConfig(prog.process, h0);
  Pair cur = jointPair(init.parts, init.parts);

  auto matchMove = [&](const json& step, const QSet& h1, const Transition*& out) -> std::string {
    if (!qsetMonotone(h1, lat)) return "H1 is not monotone";
    const json& mv = step.at("move");
    for (const auto& t : eng.moves(cur.first, h1))
      if (printParts(t.next.parts, false, &lat) == mv.at("next").get<std::string>() &&
          t.next.qset == qsetFromJson(step.at("H1'"), lat) && ruleName(t.label.rule) == mv.value("rule", "") &&
          json(t.label.redex) == mv.at("redex")) {
        out = &t;
        return "";
      }
    return "no move of A reaches " + step.at("move").at("next").get<std::string>();
  };

  std::vector<json> steps(witness.at("path").begin(), witness.at("path").end());
  steps.push_back(witness.at("final"));
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const json& st = steps[i];
    bool last = i + 1 == steps.size();
    if (printParts(cur.first, false, &lat) != st.at("A").get<std::string>() ||
        printParts(cur.second, false, &lat) != st.at("B").get<std::string>())
      return "step " + std::to_string(i) + ": pair differs from the witness";
    if (st.value("mirror", false)) {
      cur = jointPair(cur.second, cur.first);
      continue;
    }
    QSet h1 = qsetFromJson(st.at("H1"), lat);
    QSet h2 = qsetFromJson(st.at("H2"), lat);
    if (!qsetMonotone(h2, lat)) return "H2 is not monotone";
    if (!eqL(h1, h2, L)) return "step " + std::to_string(i) + ": H1 and H2 are not L-equal";
    const Transition* mv = nullptr;
    if (auto err = matchMove(st, h1, mv); !err.empty()) return "step " + std::to_string(i) + ": " + err;
    auto cands = eng.candidates(*mv, eng.reach(cur.second, h2));
    if (last) {
      if (!cands.empty()) return "final step: B can still match the move";
      return "";
    }
    const json& want = st.at("candidate");
    const Candidate* chosen = nullptr;
    for (const auto& c : cands)
      if (printParts(c.next, false, &lat) == want.at("next").get<std::string>() &&
          c.qset == qsetFromJson(want.at("H2'"), lat))
        chosen = &c;
    if (!chosen) return "step " + std::to_string(i) + ": candidate not reproducible";
    cur = jointPair(mv->next.parts, chosen->next);
  }
  return "witness has no final step";
}

std::vector<CheckResult> checkSecureAll(const Program& prog, const CheckBounds& b) {
  std::vector<CheckResult> out;
  for (const auto& L : prog.lat().downSets())
    if (!L.empty()) out.push_back(checkSecure(prog, L, b));
  return out;
}

Verdict overall(const std::vector<CheckResult>& rs) {
  Verdict v = Verdict::Holds;
  for (const auto& r : rs) {
    if (r.verdict == Verdict::Fails) return Verdict::Fails;
    if (r.verdict == Verdict::Inconclusive) v = Verdict::Inconclusive;
  }
  return v;
}

// ---------------------------------------------------------------------------
// checkSafe
// ---------------------------------------------------------------------------

namespace {

std::string standardKey(const Config& m) {
  std::vector<Component> parts;
  for (const auto& c : m.parts) parts.push_back({c.proc, Level{}, 0});
  NameSupply sup("_n");
  Config s = normalize(std::move(parts), m.qset, false, sup);
  canonicalize(s);
  return configKey(s);
}

std::vector<Component> stateOf(const Config& c) {
  std::vector<Component> parts = c.parts;
  canonicalizeJoint({&parts});
  return parts;
}

}  // namespace

CheckResult checkSafe(const Program& prog, const CheckBounds& b, std::optional<Level> mu0) {
  return checkSafe(prog, prog.process, b, mu0);
}

CheckResult checkSafe(const Program& prog, const Process& p, const CheckBounds& b, std::optional<Level> mu0) {
  const Lattice& lat = prog.lat();
  CheckResult res;
  res.property = "safe";
  QSetUniverse u = QSetUniverse::fromProgram(prog, b.queueBound, b.maxQSets);

  struct Obl {
    int h = -1;
    bool error = false;
    std::size_t index = 0;  // error index, or successor index
  };
  struct Meta {
    std::vector<Component> parts;
    const std::vector<QSet>* hs = nullptr;
    std::size_t depth = 0;
    std::vector<Obl> obls;
  };
  ObligationGraph g;
  std::vector<Meta> meta;
  std::unordered_map<std::string, int> index;
  std::deque<int> work;
  auto node = [&](std::vector<Component> parts, std::size_t depth) {
    std::string k = processKey(parts, true);
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(meta.size());
    index.emplace(std::move(k), id);
    meta.push_back({std::move(parts), nullptr, depth, {}});
    g.nodes.emplace_back();
    work.push_back(id);
    return id;
  };

  Config start = wrap(p, mu0.value_or(lat.bottom()));
  int root = node(stateOf(start), 0);
  std::size_t explored = 0;

  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    if (explored >= b.maxStates) {
      res.reason = "state cap reached";
      continue;
    }
    if (meta[id].depth >= b.maxSteps) {
      res.reason = "exploration depth reached";
      continue;
    }
    const auto* hs = u.qsets(sessionRoles(meta[id].parts));
    if (!hs) {
      res.reason = "Q-set universe exceeds cap";
      continue;
    }
    ++explored;
    meta[id].hs = hs;
    std::vector<std::vector<int>> obls;
    std::vector<Obl> info;
    std::set<ReadLane> reads;
    for (const auto& c : meta[id].parts) readLanes(c.proc, reads);
    std::set<std::string> heads;
    for (std::size_t h = 0; h < hs->size(); ++h) {
      if (!heads.insert(headKey((*hs)[h], reads)).second) continue;
      Config c{meta[id].parts, (*hs)[h], true, 1};
      MStepResult r = stepMonitored(c, prog);
      if (r.successors.empty() && r.errors.empty()) continue;
      ++res.qsets;
      std::vector<std::string> keys;
      std::vector<int> ids;
      for (const auto& t : r.successors) {
        keys.push_back(standardKey(t.next));
        ids.push_back(node(stateOf(t.next), meta[id].depth + 1));
      }
      auto matching = [&](const std::string& k) {
        std::vector<int> out;
        for (std::size_t s = 0; s < keys.size(); ++s)
          if (keys[s] == k) out.push_back(ids[s]);
        return out;
      };
      for (std::size_t e = 0; e < r.errors.size(); ++e) {
        obls.push_back(matching(standardKey(r.errors[e].blocked)));
        info.push_back({static_cast<int>(h), true, e});
      }
      for (std::size_t s = 0; s < r.successors.size(); ++s) {
        obls.push_back(matching(keys[s]));
        info.push_back({static_cast<int>(h), false, s});
      }
    }
    g.nodes[id].explored = true;
    g.nodes[id].truncated.assign(obls.size(), 0);
    g.nodes[id].obligations = std::move(obls);
    meta[id].obls = std::move(info);
  }
  res.states = meta.size();

  std::vector<int> rounds;
  res.verdict = decide(g, root, rounds);
  if (res.verdict != Verdict::Fails) return res;

  json path = json::array();
  int cur = root;
  while (true) {
    int k = failingObligation(g, rounds, cur);
    const Obl& o = meta[cur].obls[k];
    const QSet& h = (*meta[cur].hs)[o.h];
    Config c{meta[cur].parts, h, true, 1};
    MStepResult r = stepMonitored(c, prog);
    json step = {{"state", printParts(meta[cur].parts, true, &lat)}, {"H", qsetToJson(h, lat)}};
    const auto& cands = g.nodes[cur].obligations[k];
    if (cands.empty()) {
      const MonitorError& e = r.errors.at(o.index);
      step["redex"] = e.label.redex;
      step["rule"] = monitoredRuleName(e.label.rule);
      step["monitor"] = lat.name(e.monitor);
      step["level"] = lat.name(e.level);
      step["blocked"] = print(e.blocked, &lat);
      res.witness = {{"property", "safe"}, {"path", std::move(path)}, {"final", std::move(step)}};
      res.witness["summary"] = "monitor " + lat.name(e.monitor) + " blocks " + e.label.redex.front() + " at level " +
                               lat.name(e.level);
      return res;
    }
    int c2 = earliestRemoved(cands, rounds);
    for (const auto& t : r.successors)
      if (standardKey(t.next) == standardKey(o.error ? r.errors[o.index].blocked : r.successors[o.index].next) &&
          processKey(stateOf(t.next), true) == processKey(meta[cands[c2]].parts, true)) {
        step["move"] = labelJson(t.label, printParts(t.next.parts, true, &lat));
        break;
      }
    path.push_back(std::move(step));
    cur = cands[c2];
  }
}

// ---------------------------------------------------------------------------
// checkNoRuntimeError
// ---------------------------------------------------------------------------

CheckResult checkNoRuntimeError(const Program& prog, const CheckBounds& b) {
  return checkNoRuntimeError(prog, prog.process, b);
}

CheckResult checkNoRuntimeError(const Program& prog, const Process& p, const CheckBounds& b) {
  const Lattice& lat = prog.lat();
  CheckResult res;
  res.property = "noerr";
  QSet h0;
  for (const auto& s : freeNames(p).sessions) h0[s];
  struct Entry {
    Config cfg;
    int parent;
    std::string via;
    std::size_t depth;
  };
  std::vector<Entry> states;
  std::unordered_map<std::string, int> seen;
  Config start = wrap(p, lat.bottom(), h0);
  states.push_back({start, -1, "", 0});
  seen.emplace(configKey(start), 0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    MStepResult r = stepMonitored(states[i].cfg, prog);
    if (r.error()) {
      json path = json::array();
      for (int j = static_cast<int>(i); j > 0; j = states[j].parent)
        path.insert(path.begin(), json{{"rule", states[j].via}, {"next", print(states[j].cfg, &lat)}});
      const MonitorError& e = r.errors.front();
      res.verdict = Verdict::Fails;
      res.states = states.size();
      res.witness = {{"property", "noerr"},
                     {"path", std::move(path)},
                     {"final",
                      {{"state", print(states[i].cfg, &lat)},
                       {"redex", e.label.redex},
                       {"rule", monitoredRuleName(e.label.rule)},
                       {"monitor", lat.name(e.monitor)},
                       {"level", lat.name(e.level)}}}};
      res.witness["summary"] = "monitor " + lat.name(e.monitor) + " blocks " + e.label.redex.front();
      return res;
    }
    if (r.successors.empty()) continue;
    if (states[i].depth >= b.maxSteps || states.size() >= b.maxStates) {
      res.verdict = Verdict::Inconclusive;
      res.reason = states[i].depth >= b.maxSteps ? "step bound reached" : "state cap reached";
      continue;
    }
    for (auto& t : r.successors) {
      std::string k = configKey(t.next);
      if (seen.count(k)) continue;
      seen.emplace(k, static_cast<int>(states.size()));
      states.push_back({std::move(t.next), static_cast<int>(i), monitoredRuleName(t.label.rule), states[i].depth + 1});
    }
  }
  res.states = states.size();
  return res;
}

// ---------------------------------------------------------------------------
// checkLHigh
// ---------------------------------------------------------------------------

CheckResult checkLHigh(const Program& prog, const DownSet& L, const CheckBounds& b) {
  return checkLHigh(prog, prog.process, L, b);
}

CheckResult checkLHigh(const Program& prog, const Process& p, const DownSet& L, const CheckBounds& b) {
  const Lattice& lat = prog.lat();
  CheckResult res;
  res.property = "L-high";
  res.L = L;
  QSetUniverse u = QSetUniverse::fromProgram(prog, b.queueBound, b.maxQSets);
  std::vector<std::pair<std::vector<Component>, std::size_t>> states;
  std::set<std::string> seen;
  Config start = initialConfig(p, {});
  states.push_back({stateOf(start), 0});
  seen.insert(processKey(states[0].first, false));
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].second >= b.maxSteps || i >= b.maxStates) {
      res.verdict = Verdict::Inconclusive;
      res.reason = "exploration bound reached";
      break;
    }
    const auto* hs = u.qsets(sessionRoles(states[i].first));
    if (!hs) {
      res.verdict = Verdict::Inconclusive;
      res.reason = "Q-set universe exceeds cap";
      continue;
    }
    for (const auto& h : *hs) {
      ++res.qsets;
      Config c{states[i].first, h, false, 1};
      for (auto& t : stepStandard(c, prog).successors) {
        if (!eqL(h, t.next.qset, L)) {
          res.verdict = Verdict::Fails;
          res.states = states.size();
          res.witness = {{"property", "L-high"},
                         {"state", printParts(states[i].first, false, &lat)},
                         {"H", qsetToJson(h, lat)},
                         {"move", labelJson(t.label, printParts(t.next.parts, false, &lat))},
                         {"H'", qsetToJson(t.next.qset, lat)}};
          res.witness["summary"] = print(h, &lat) + " becomes " + print(t.next.qset, &lat);
          return res;
        }
        auto next = stateOf(t.next);
        if (seen.insert(processKey(next, false)).second) states.push_back({std::move(next), states[i].second + 1});
      }
    }
  }
  res.states = states.size();
  return res;
}

// ---------------------------------------------------------------------------
// Replay of safe and noerr witnesses
// ---------------------------------------------------------------------------

namespace {

bool hasError(const MStepResult& r, const json& final, const Lattice& lat) {
  for (const auto& e : r.errors)
    if (json(e.label.redex) == final.at("redex") && lat.name(e.monitor) == final.at("monitor") &&
        lat.name(e.level) == final.at("level"))
      return true;
  return false;
}

std::string replaySafe(const Program& prog, const json& w) {
  const Lattice& lat = prog.lat();
  std::vector<Component> cur = stateOf(wrap(prog.process, lat.bottom()));
  std::size_t i = 0;
  for (const auto& step : w.at("path")) {
    if (printParts(cur, true, &lat) != step.at("state")) return "step " + std::to_string(i) + ": state differs";
    Config c{cur, qsetFromJson(step.at("H"), lat), true, 1};
    bool found = false;
    for (const auto& t : stepMonitored(c, prog).successors)
      if (printParts(t.next.parts, true, &lat) == step.at("move").at("next")) {
        cur = stateOf(t.next);
        found = true;
        break;
      }
    if (!found) return "step " + std::to_string(i) + ": move not available";
    ++i;
  }
  const json& f = w.at("final");
  if (printParts(cur, true, &lat) != f.at("state")) return "final state differs";
  Config c{cur, qsetFromJson(f.at("H"), lat), true, 1};
  MStepResult r = stepMonitored(c, prog);
  for (const auto& e : r.errors) {
    if (json(e.label.redex) != f.at("redex")) continue;
    std::string k = standardKey(e.blocked);
    bool matched = false;
    for (const auto& t : r.successors) matched = matched || standardKey(t.next) == k;
    if (!matched) return "";
  }
  return "final step is not an unmatched monitor error";
}

std::string replayNoerr(const Program& prog, const json& w) {
  const Lattice& lat = prog.lat();
  QSet h0;
  for (const auto& s : freeNames(prog.process).sessions) h0[s];
  Config cur = wrap(prog.process, lat.bottom(), h0);
  std::size_t i = 0;
  for (const auto& step : w.at("path")) {
    bool found = false;
    for (auto& t : stepMonitored(cur, prog).successors)
      if (print(t.next, &lat) == step.at("next")) {
        cur = std::move(t.next);
        found = true;
        break;
      }
    if (!found) return "step " + std::to_string(i) + ": move not available";
    ++i;
  }
  if (print(cur, &lat) != w.at("final").at("state")) return "final state differs";
  if (!hasError(stepMonitored(cur, prog), w.at("final"), lat)) return "final configuration does not err";
  return "";
}

}  // namespace

std::string replayWitness(const Program& prog, const json& witness, const CheckBounds& b) {
  try {
    std::string prop = witness.at("property").get<std::string>();
    if (prop == "secure") return replaySecureWitness(prog, witness, b);
    if (prop == "safe") return replaySafe(prog, witness);
    if (prop == "noerr") return replayNoerr(prog, witness);
    return "cannot replay property '" + prop + "'";
  } catch (const json::exception& e) {
    return std::string("malformed witness: ") + e.what();
  }
}

}  // namespace sesmon
