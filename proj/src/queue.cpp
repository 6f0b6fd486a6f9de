#include "sesmon/queue.hpp"

namespace sesmon {

void Queue::push(const Message& m) {
  for (int q : m.receivers) lanes_[{m.sender, q}].push_back(m.content);
}

const Content* Queue::head(int from, int to) const {
  auto it = lanes_.find({from, to});
  if (it == lanes_.end() || it->second.empty()) return nullptr;
  return &it->second.front();
}

void Queue::popHead(int from, int to) {
  auto it = lanes_.find({from, to});
  if (it == lanes_.end() || it->second.empty()) return;
  it->second.erase(it->second.begin());
  if (it->second.empty()) lanes_.erase(it);
}

std::size_t Queue::size() const {
  std::size_t n = 0;
  for (const auto& [_, lane] : lanes_) n += lane.size();
  return n;
}

void Queue::dropEmptyLanes() {
  std::erase_if(lanes_, [](const auto& kv) { return kv.second.empty(); });
}

std::vector<Message> Queue::messages() const {
  std::vector<Message> out;
  for (const auto& [lane, contents] : lanes_)
    for (const auto& c : contents) out.push_back({lane.first, {lane.second}, c});
  return out;
}

QSet pushMessage(const QSet& h, const std::string& session, const Message& m) {
  auto it = h.find(session);
  if (it == h.end()) throw UnknownSession(session);
  QSet out = h;
  out[session].push(m);
  return out;
}

PopResult popMessage(const QSet& h, const std::string& session, int reader, int from, Content::Kind want,
                     Level level) {
  auto it = h.find(session);
  if (it == h.end()) throw UnknownSession(session);
  PopResult r;
  const Content* c = it->second.head(from, reader);
  if (!c || c->kind != want) return r;
  if (c->level != level) {
    r.levelMismatch = true;
    return r;
  }
  r.content = *c;
  r.qset = h;
  r.qset[session].popHead(from, reader);
  return r;
}

bool isMonotone(const Queue& q, const Lattice& lat) {
  for (const auto& [_, lane] : q.lanes())
    for (std::size_t i = 1; i < lane.size(); ++i)
      if (!lat.leq(lane[i - 1].level, lane[i].level)) return false;
  return true;
}

bool qsetMonotone(const QSet& h, const Lattice& lat) {
  for (const auto& [_, q] : h)
    if (!isMonotone(q, lat)) return false;
  return true;
}

QSet projectL(const QSet& h, const DownSet& L) {
  QSet out;
  for (const auto& [s, q] : h) {
    Queue p;
    for (const auto& [lane, contents] : q.lanes()) {
      for (const auto& c : contents)
        if (L.contains(c.level)) p.lanes()[lane].push_back(c);
    }
    if (!p.empty()) out.emplace(s, std::move(p));
  }
  return out;
}

bool eqL(const QSet& h, const QSet& k, const DownSet& L) { return projectL(h, L) == projectL(k, L); }

std::string print(const Content& c, const Lattice* lat) {
  std::string lv = "^" + (lat ? lat->name(c.level) : std::to_string(c.level.index));
  switch (c.kind) {
    case Content::Kind::Value:
      return print(c.value) + lv;
    case Content::Kind::Service:
      return "@" + c.name + lv;
    case Content::Kind::Channel:
      return c.name + "[" + std::to_string(c.role) + "]" + lv;
    case Content::Kind::Label:
      return "#" + c.name + lv;
  }
  return "?";
}

std::string print(const Queue& q, const Lattice* lat) {
  if (q.empty()) return "eps";
  std::string s;
  for (const auto& m : q.messages()) {
    if (!s.empty()) s += ".";
    s += "(" + std::to_string(m.sender) + "," + std::to_string(m.receivers.front()) + "," + print(m.content, lat) + ")";
  }
  return s;
}

std::string print(const QSet& h, const Lattice* lat) {
  std::string s = "{";
  bool first = true;
  for (const auto& [name, q] : h) {
    if (!first) s += ", ";
    s += name + ": " + print(q, lat);
    first = false;
  }
  return s + "}";
}

}  // namespace sesmon
