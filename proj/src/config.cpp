#include "sesmon/config.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace sesmon {

namespace {

// Renaming-only substitutions never consult the lattice.
const Lattice& renamingLattice() {
  static const Lattice lat = Lattice::twoPoint();
  return lat;
}

bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

// Runtime names in `s` in order of occurrence.
void scanRuntimeNames(const std::string& s, std::vector<std::string>& out) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '_' || (i > 0 && identChar(s[i - 1]))) continue;
    std::size_t j = i + 1;
    while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
    if (j == i + 1) continue;
    out.push_back(s.substr(i, j - i));
    i = j - 1;
  }
}

struct PartOrder {
  bool operator()(const std::pair<std::string, const Component*>& a,
                  const std::pair<std::string, const Component*>& b) const {
    if (a.first != b.first) return a.first < b.first;
    const std::string& ka = key(a.second->proc);
    const std::string& kb = key(b.second->proc);
    if (ka != kb) return ka < kb;
    return a.second->monitor < b.second->monitor;
  }
};

void sortParts(std::vector<Component>& parts) {
  std::vector<std::pair<std::string, const Component*>> keyed;
  keyed.reserve(parts.size());
  for (const auto& c : parts) keyed.emplace_back(maskRuntimeNames(key(c.proc)), &c);
  std::sort(keyed.begin(), keyed.end(), PartOrder{});
  std::vector<Component> out;
  out.reserve(parts.size());
  for (const auto& [_, c] : keyed) out.push_back(*c);
  parts = std::move(out);
}

Content renameContent(Content c, const std::map<std::string, std::string>& m) {
  if (c.kind == Content::Kind::Service || c.kind == Content::Kind::Channel) {
    auto it = m.find(c.name);
    if (it != m.end()) c.name = it->second;
  }
  return c;
}

void forEachAction(const Process& p, const std::function<void(const Process&)>& f) {
  f(p);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Participant>) {
          forEachAction(x.body, f);
        } else if constexpr (std::is_same_v<T, SendValue> || std::is_same_v<T, RecvValue> ||
                             std::is_same_v<T, SendService> || std::is_same_v<T, RecvService> ||
                             std::is_same_v<T, SendChannel> || std::is_same_v<T, RecvChannel> ||
                             std::is_same_v<T, Select>) {
          forEachAction(x.cont, f);
        } else if constexpr (std::is_same_v<T, Branch>) {
          for (const auto& arm : x.arms) forEachAction(arm.second, f);
        } else if constexpr (std::is_same_v<T, Conditional>) {
          forEachAction(x.then_branch, f);
          forEachAction(x.else_branch, f);
        } else if constexpr (std::is_same_v<T, Parallel>) {
          for (const auto& q : x.parts) forEachAction(q, f);
        } else if constexpr (std::is_same_v<T, Restriction> || std::is_same_v<T, Definition>) {
          forEachAction(x.body, f);
        }
      },
      p->term);
}

}  // namespace

std::string maskRuntimeNames(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '_' && (i == 0 || !identChar(s[i - 1])) && i + 1 < s.size() &&
        std::isalnum(static_cast<unsigned char>(s[i + 1]))) {
      std::size_t j = i + 1;
      while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) ++j;
      out += '_';
      i = j - 1;
      continue;
    }
    out += s[i];
  }
  return out;
}

Config normalize(std::vector<Component> parts, QSet qset, bool monitored, NameSupply& names) {
  Config out;
  out.monitored = monitored;
  out.qset = std::move(qset);
  std::vector<Component> work = std::move(parts);
  std::set<Level> nils;
  while (!work.empty()) {
    Component c = std::move(work.back());
    work.pop_back();
    if (const auto* par = as<Parallel>(c.proc)) {
      for (auto it = par->parts.rbegin(); it != par->parts.rend(); ++it) work.push_back({*it, c.monitor, c.lineage});
    } else if (const auto* res = as<Restriction>(c.proc)) {
      Substitution s;
      s.serviceNames[res->name] = names.fresh();
      work.push_back({substitute(res->body, s, renamingLattice()), c.monitor, c.lineage});
    } else if (const auto* def = as<Definition>(c.proc)) {
      work.push_back({def->body, c.monitor, c.lineage});
    } else if (isNil(c.proc)) {
      if (monitored && nils.insert(c.monitor).second) out.parts.push_back(std::move(c));
    } else {
      out.parts.push_back(std::move(c));
    }
  }
  std::set<std::string> live = sessionsOf(out.parts);
  std::erase_if(out.qset, [&](const auto& kv) { return isRuntimeName(kv.first) && kv.second.empty() && !live.count(kv.first); });
  sortParts(out.parts);
  return out;
}

namespace {

std::map<std::string, std::string> canonicalRenaming(const std::vector<const std::vector<Component>*>& lists,
                                                     const QSet* qset) {
  std::vector<std::string> order;
  std::set<std::string> sessions;
  for (const auto* parts : lists) {
    for (const auto& c : *parts) {
      scanRuntimeNames(key(c.proc), order);
      std::vector<std::string> ss;
      collectSessions(c.proc, ss);
      sessions.insert(ss.begin(), ss.end());
    }
  }
  if (qset) {
    std::vector<std::pair<std::string, std::string>> queues;
    for (const auto& [s, q] : *qset) {
      if (isRuntimeName(s)) sessions.insert(s);
      for (const auto& [lane, contents] : q.lanes())
        for (const auto& c : contents)
          if (c.kind == Content::Kind::Channel) sessions.insert(c.name);
      queues.emplace_back(maskRuntimeNames(print(q, nullptr)), s);
    }
    std::sort(queues.begin(), queues.end());
    for (const auto& [text, s] : queues) {
      order.push_back(s);
      scanRuntimeNames(print(qset->at(s), nullptr), order);
    }
  }
  std::map<std::string, std::string> m;
  int ns = 0, na = 0;
  for (const auto& n : order) {
    if (!isRuntimeName(n) || m.count(n)) continue;
    m[n] = sessions.count(n) ? "_s" + std::to_string(++ns) : "_a" + std::to_string(++na);
  }
  return m;
}

void applyRenaming(std::vector<Component>& parts, const std::map<std::string, std::string>& m) {
  bool identity = std::all_of(m.begin(), m.end(), [](const auto& kv) { return kv.first == kv.second; });
  if (identity) return;
  Substitution s;
  for (const auto& [from, to] : m) {
    if (from == to) continue;
    s.sessions[from] = to;
    s.serviceNames[from] = to;
  }
  for (auto& c : parts) c.proc = substitute(c.proc, s, renamingLattice());
}

QSet renameQSet(const QSet& h, const std::map<std::string, std::string>& m) {
  QSet out;
  for (const auto& [s, q] : h) {
    Queue r;
    for (const auto& [lane, contents] : q.lanes())
      for (const auto& c : contents) r.lanes()[lane].push_back(renameContent(c, m));
    auto it = m.find(s);
    out.emplace(it == m.end() ? s : it->second, std::move(r));
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> canonicalize(Config& c) {
  sortParts(c.parts);
  auto m = canonicalRenaming({&c.parts}, &c.qset);
  applyRenaming(c.parts, m);
  c.qset = renameQSet(c.qset, m);
  sortParts(c.parts);
  return m;
}

void canonicalizeJoint(std::vector<std::vector<Component>*> lists) {
  std::vector<const std::vector<Component>*> view;
  for (auto* l : lists) {
    sortParts(*l);
    view.push_back(l);
  }
  auto m = canonicalRenaming(view, nullptr);
  for (auto* l : lists) {
    applyRenaming(*l, m);
    sortParts(*l);
  }
}

void renameRuntimeNames(Config& c, const std::map<std::string, std::string>& m) {
  applyRenaming(c.parts, m);
  c.qset = renameQSet(c.qset, m);
  sortParts(c.parts);
}

Config structNormalize(const Config& c) {
  NameSupply names("_n");
  Config out = normalize(c.parts, c.qset, c.monitored, names);
  out.nextLineage = c.nextLineage;
  canonicalize(out);
  return out;
}

Config composeConfigs(const Config& a, const Config& b) {
  for (const auto& [s, _] : b.qset)
    if (!isRuntimeName(s) && a.qset.count(s)) throw NameClash(s);
  // Keep the runtime names of the two sides apart before merging.
  std::vector<std::string> bn;
  for (const auto& c : b.parts) scanRuntimeNames(key(c.proc), bn);
  for (const auto& [s, q] : b.qset) {
    bn.push_back(s);
    scanRuntimeNames(print(q, nullptr), bn);
  }
  std::map<std::string, std::string> m;
  for (const auto& n : bn)
    if (isRuntimeName(n)) m.emplace(n, "_r" + n.substr(1));
  std::vector<Component> bparts = b.parts;
  applyRenaming(bparts, m);
  QSet bq = renameQSet(b.qset, m);
  for (const auto& [s, _] : bq)
    if (a.qset.count(s)) throw NameClash(s);

  std::vector<Component> parts = a.parts;
  parts.insert(parts.end(), bparts.begin(), bparts.end());
  QSet h = a.qset;
  h.insert(bq.begin(), bq.end());
  NameSupply names("_n");
  Config out = normalize(parts, h, a.monitored || b.monitored, names);
  canonicalize(out);
  return out;
}

Config initialConfig(const Process& p, const QSet& h) {
  NameSupply names("_n");
  Config c = normalize({{p, Level{}, 0}}, h, false, names);
  canonicalize(c);
  return c;
}

Config initialConfig(const Program& prog) {
  QSet h;
  for (const auto& s : freeNames(prog.process).sessions) h[s];
  Config c = initialConfig(prog.process, h);
  return c;
}

Config wrap(const Process& p, Level mu0, const QSet& h) {
  NameSupply names("_n");
  Config c = normalize({{p, mu0, 0}}, h, true, names);
  std::uint32_t id = 0;
  for (auto& part : c.parts) part.lineage = ++id;
  c.nextLineage = id + 1;
  canonicalize(c);
  return c;
}

std::set<std::string> sessionsOf(const std::vector<Component>& parts) {
  std::vector<std::string> ss;
  for (const auto& c : parts) collectSessions(c.proc, ss);
  return {ss.begin(), ss.end()};
}

bool isSaturated(const Config& c) {
  for (const auto& s : sessionsOf(c.parts))
    if (!c.qset.count(s)) return false;
  return true;
}

std::map<std::string, std::set<int>> sessionRoles(const std::vector<Component>& parts) {
  std::map<std::string, std::set<int>> out;
  auto chan = [&](const Channel& c) -> std::set<int>* {
    if (c.isVariable()) return nullptr;
    auto& r = out[c.name];
    r.insert(c.role);
    return &r;
  };
  for (const auto& part : parts) {
    forEachAction(part.proc, [&](const Process& p) {
      std::visit(
          [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, SendValue> || std::is_same_v<T, SendService> ||
                          std::is_same_v<T, Select>) {
              if (auto* r = chan(x.chan)) r->insert(x.to.begin(), x.to.end());
            } else if constexpr (std::is_same_v<T, SendChannel>) {
              if (auto* r = chan(x.chan)) r->insert(x.to);
              chan(x.delegated);
            } else if constexpr (std::is_same_v<T, RecvValue> || std::is_same_v<T, RecvService> ||
                                 std::is_same_v<T, RecvChannel> || std::is_same_v<T, Branch>) {
              if (auto* r = chan(x.chan)) r->insert(x.from);
            } else if constexpr (std::is_same_v<T, Call>) {
              chan(x.chan);
            }
          },
          p->term);
    });
  }
  return out;
}

Process demonitor(const Config& c) {
  std::vector<Process> ps;
  for (const auto& part : c.parts)
    if (!isNil(part.proc)) ps.push_back(part.proc);
  return parallel(std::move(ps));
}

bool allNil(const Config& c) {
  return std::all_of(c.parts.begin(), c.parts.end(), [](const Component& p) { return isNil(p.proc); });
}

std::string processKey(const std::vector<Component>& parts, bool withMonitors) {
  std::string s;
  for (const auto& c : parts) {
    if (isNil(c.proc)) continue;
    if (!s.empty()) s += " | ";
    if (withMonitors) s += "[" + std::to_string(c.monitor.index) + "]";
    s += key(c.proc);
  }
  return s;
}

std::string configKey(const Config& c) { return processKey(c.parts, c.monitored) + " || " + print(c.qset, nullptr); }

std::string printParts(const std::vector<Component>& parts, bool monitored, const Lattice* lat) {
  if (parts.empty()) return "0";
  std::string s;
  for (const auto& c : parts) {
    if (!s.empty()) s += " | ";
    if (monitored) {
      std::string body = print(c.proc, lat);
      bool wrapBody = !(as<Inaction>(c.proc) || as<Initiator>(c.proc) || as<Call>(c.proc));
      s += "[" + (lat ? lat->name(c.monitor) : std::to_string(c.monitor.index)) + "]" +
           (wrapBody ? "(" + body + ")" : body);
    } else {
      s += print(c.proc, lat);
    }
  }
  return s;
}

std::string print(const Config& c, const Lattice* lat) {
  std::vector<std::string> names;
  for (const auto& p : c.parts) scanRuntimeNames(key(p.proc), names);
  for (const auto& [s, q] : c.qset) {
    names.push_back(s);
    scanRuntimeNames(print(q, nullptr), names);
  }
  std::set<std::string> restricted;
  for (const auto& n : names)
    if (isRuntimeName(n)) restricted.insert(n);
  std::string prefix;
  if (!restricted.empty()) {
    prefix = "(new ";
    bool first = true;
    for (const auto& n : restricted) {
      prefix += (first ? "" : ", ") + n;
      first = false;
    }
    prefix += ") ";
  }
  return prefix + "<" + printParts(c.parts, c.monitored, lat) + ", " + print(c.qset, lat) + ">";
}

}  // namespace sesmon
