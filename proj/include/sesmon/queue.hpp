#pragma once

#include <compare>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sesmon/lattice.hpp"
#include "sesmon/syntax.hpp"

namespace sesmon {

// theta ::= v^l | a^l | s[p]^l | lambda^l
struct Content {
  enum class Kind { Value, Service, Channel, Label };

  Kind kind = Kind::Value;
  Payload value;     // Value
  std::string name;  // service name, session name or label
  int role = 0;      // Channel
  Level level;

  static Content ofValue(const Value& v) { return {Kind::Value, v.payload, {}, 0, v.level}; }
  static Content ofService(std::string a, Level l) { return {Kind::Service, false, std::move(a), 0, l}; }
  static Content ofChannel(std::string s, int p, Level l) { return {Kind::Channel, false, std::move(s), p, l}; }
  static Content ofLabel(std::string lambda, Level l) { return {Kind::Label, false, std::move(lambda), 0, l}; }

  friend auto operator<=>(const Content&, const Content&) = default;
  friend bool operator==(const Content&, const Content&) = default;
};

inline Level levOf(const Content& c) { return c.level; }

// (p, Pi, theta)
struct Message {
  int sender;
  Roles receivers;
  Content content;
};

// A queue kept in its canonical form under the commuting and splitting rules:
// one FIFO lane per (sender, receiver) pair. Two queues are structurally
// equivalent exactly when their lanes coincide.
class Queue {
 public:
  using Lane = std::pair<int, int>;

  void push(const Message& m);
  const Content* head(int from, int to) const;
  void popHead(int from, int to);

  bool empty() const { return lanes_.empty(); }
  std::size_t size() const;
  const std::map<Lane, std::vector<Content>>& lanes() const { return lanes_; }
  std::map<Lane, std::vector<Content>>& lanes() { return lanes_; }
  void dropEmptyLanes();

  // Single-receiver messages, lane by lane.
  std::vector<Message> messages() const;

  friend auto operator<=>(const Queue&, const Queue&) = default;
  friend bool operator==(const Queue&, const Queue&) = default;

 private:
  std::map<Lane, std::vector<Content>> lanes_;
};

using QSet = std::map<std::string, Queue>;

class UnknownSession : public std::runtime_error {
 public:
  explicit UnknownSession(const std::string& s) : std::runtime_error("no queue for session '" + s + "'") {}
};

QSet pushMessage(const QSet& h, const std::string& session, const Message& m);

struct PopResult {
  std::optional<Content> content;  // empty: NoMatch
  QSet qset;
  bool levelMismatch = false;  // the head has the right kind but another level
};

// Takes the head of the lane from `from` to `reader` when it has kind `want`
// and level `level`.
PopResult popMessage(const QSet& h, const std::string& session, int reader, int from, Content::Kind want,
                     Level level);

bool isMonotone(const Queue& q, const Lattice& lat);
bool qsetMonotone(const QSet& h, const Lattice& lat);

QSet projectL(const QSet& h, const DownSet& L);
bool eqL(const QSet& h, const QSet& k, const DownSet& L);

std::string print(const Content& c, const Lattice* lat);
std::string print(const Queue& q, const Lattice* lat);
std::string print(const QSet& h, const Lattice* lat);

}  // namespace sesmon
