#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sesmon/lattice.hpp"

namespace sesmon {

// ---------------------------------------------------------------------------
// Values and expressions
// ---------------------------------------------------------------------------

using Payload = std::variant<bool, std::int64_t, std::string>;

struct Value {
  Payload payload;
  Level level;

  friend bool operator==(const Value&, const Value&) = default;
};

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

enum class BinOp { And, Or, Eq };

struct VarExpr {
  std::string name;
  Level level;
};
struct LitExpr {
  Value value;
};
struct NotExpr {
  Expr operand;
};
struct BinExpr {
  BinOp op;
  Expr lhs;
  Expr rhs;
};
// An external boolean test such as gooduse(form^top). Its payload is fixed
// when the program is loaded; its level is the join of its arguments. A test
// with no value only fails when it is evaluated.
struct OracleExpr {
  std::string name;
  std::optional<Payload> value;
  std::vector<Expr> args;
};

struct ExprNode {
  std::variant<VarExpr, LitExpr, NotExpr, BinExpr, OracleExpr> term;
};

Expr makeVar(std::string name, Level level);
Expr makeLit(Payload payload, Level level);
Expr makeNot(Expr e);
Expr makeBin(BinOp op, Expr lhs, Expr rhs);
Expr makeOracle(std::string name, std::optional<Payload> value, std::vector<Expr> args);

class EvalError : public std::runtime_error {
 public:
  enum class Kind { TypeMismatch, UnboundVariable };
  EvalError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

using Env = std::map<std::string, Value>;

// Payload by ordinary boolean/integer evaluation; level is the join of the
// annotations of every variable occurrence and literal (a variable occurrence
// contributes its annotation joined with the level of its binding).
Value evaluate(const Expr& e, const Env& env, const Lattice& lat);

// ---------------------------------------------------------------------------
// Names
// ---------------------------------------------------------------------------

// c ::= alpha | s[p]
struct Channel {
  std::string name;  // channel variable, or session name when role > 0
  int role = 0;

  static Channel variable(std::string v) { return {std::move(v), 0}; }
  static Channel withRole(std::string s, int p) { return {std::move(s), p}; }
  bool isVariable() const { return role == 0; }

  friend auto operator<=>(const Channel&, const Channel&) = default;
};

// u ::= zeta | a
struct Identifier {
  std::string name;
  bool variable = false;

  static Identifier service(std::string a) { return {std::move(a), false}; }
  static Identifier var(std::string z) { return {std::move(z), true}; }

  friend auto operator<=>(const Identifier&, const Identifier&) = default;
};

// Sorted, duplicate-free, nonempty set of participants.
using Roles = std::vector<int>;

// ---------------------------------------------------------------------------
// Processes
// ---------------------------------------------------------------------------

struct ProcessNode;
using Process = std::shared_ptr<const ProcessNode>;

struct Decl {
  std::string name;
  std::vector<std::pair<std::string, Level>> params;
  std::string chan;
  Process body;
};
using DeclPtr = std::shared_ptr<const Decl>;
using DeclTable = std::map<std::string, DeclPtr>;

struct Inaction {};
struct Initiator {
  Identifier service;
  int arity;
};
struct Participant {
  Identifier service;
  int role;
  std::string chan;
  Process body;
};
struct SendValue {
  Channel chan;
  Roles to;
  Expr expr;
  Process cont;
};
struct RecvValue {
  Channel chan;
  int from;
  std::string var;
  Level level;
  Process cont;
};
struct SendService {
  Channel chan;
  Roles to;
  Identifier service;
  Level level;
  Process cont;
};
struct RecvService {
  Channel chan;
  int from;
  std::string var;
  Level level;
  Process cont;
};
struct SendChannel {
  Channel chan;
  int to;
  Channel delegated;
  Level level;
  Process cont;
};
struct RecvChannel {
  Channel chan;
  int from;
  std::string var;
  Level level;
  Process cont;
};
struct Select {
  Channel chan;
  Roles to;
  std::string label;
  Level level;
  Process cont;
};
struct Branch {
  Channel chan;
  int from;
  Level level;
  std::vector<std::pair<std::string, Process>> arms;
};
struct Conditional {
  Expr guard;
  Process then_branch;
  Process else_branch;
};
struct Parallel {
  std::vector<Process> parts;
};
struct Restriction {
  std::string name;
  Process body;
};
struct Definition {
  DeclPtr decl;
  Process body;
};
struct Call {
  std::string name;
  std::vector<Expr> args;
  Channel chan;
};

using ProcessTerm =
    std::variant<Inaction, Initiator, Participant, SendValue, RecvValue, SendService, RecvService,
                 SendChannel, RecvChannel, Select, Branch, Conditional, Parallel, Restriction,
                 Definition, Call>;

struct ProcessNode {
  ProcessTerm term;
  mutable std::string key_cache;
};

template <class T>
Process make(T term) {
  return std::make_shared<const ProcessNode>(ProcessNode{ProcessTerm(std::move(term)), {}});
}

Process nil();
Process parallel(std::vector<Process> parts);

template <class T>
const T* as(const Process& p) {
  return std::get_if<T>(&p->term);
}
inline bool isNil(const Process& p) { return as<Inaction>(p) != nullptr; }

// ---------------------------------------------------------------------------
// Monitored processes: M ::= [mu]P | M|M | (nu a)M | def D in M
// ---------------------------------------------------------------------------

struct MonitoredNode;
using MonitoredProcess = std::shared_ptr<const MonitoredNode>;

struct Monitored {
  Level monitor;
  Process proc;
};
struct MParallel {
  std::vector<MonitoredProcess> parts;
};
struct MRestriction {
  std::string name;
  MonitoredProcess body;
};
struct MDefinition {
  DeclPtr decl;
  MonitoredProcess body;
};

struct MonitoredNode {
  std::variant<Monitored, MParallel, MRestriction, MDefinition> term;
};

MonitoredProcess monitored(Level mu, Process p);
MonitoredProcess mparallel(std::vector<MonitoredProcess> parts);
MonitoredProcess mrestrict(std::string name, MonitoredProcess body);
MonitoredProcess mdefine(DeclPtr decl, MonitoredProcess body);

// Erases every monitor, homomorphically on |, nu and def.
Process demonitor(const MonitoredProcess& m);

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

// Concrete syntax accepted by the parser. With a null lattice levels print as
// their index (the form used for state keys).
std::string print(const Process& p, const Lattice* lat);
std::string print(const Expr& e, const Lattice* lat);
std::string print(const Payload& v);
std::string print(const Value& v, const Lattice* lat);
std::string print(const Channel& c);
std::string print(const MonitoredProcess& m, const Lattice* lat);
std::string printRoles(const Roles& r);

// Cached index-level rendering used for canonical ordering and hashing.
const std::string& key(const Process& p);

// ---------------------------------------------------------------------------
// Substitution and free names
// ---------------------------------------------------------------------------

struct Substitution {
  std::map<std::string, Value> values;              // x -> v
  std::map<std::string, std::string> services;      // zeta -> a
  std::map<std::string, Channel> channels;          // alpha -> s[p]
  std::map<std::string, std::string> serviceNames;  // a -> b (renaming)
  std::map<std::string, std::string> sessions;      // s -> t (renaming)

  bool empty() const {
    return values.empty() && services.empty() && channels.empty() && serviceNames.empty() &&
           sessions.empty();
  }
};

// Simultaneous, capture-avoiding. A substituted variable occurrence x^l becomes
// the literal v^(l join level(v)).
Process substitute(const Process& p, const Substitution& s, const Lattice& lat);
Expr substitute(const Expr& e, const Substitution& s, const Lattice& lat);

struct FreeNames {
  std::set<std::string> values;
  std::set<std::string> channelVars;
  std::set<std::string> serviceVars;
  std::set<std::string> serviceNames;
  std::set<std::string> sessions;
  std::set<std::string> procVars;
};

FreeNames freeNames(const Process& p);

// Session names in order of first occurrence in `p`.
void collectSessions(const Process& p, std::vector<std::string>& out);

}  // namespace sesmon
