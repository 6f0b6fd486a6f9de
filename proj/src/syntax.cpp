#include "sesmon/syntax.hpp"

#include <sstream>

namespace sesmon {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

Expr makeVar(std::string name, Level level) {
  return std::make_shared<const ExprNode>(ExprNode{VarExpr{std::move(name), level}});
}
Expr makeLit(Payload payload, Level level) {
  return std::make_shared<const ExprNode>(ExprNode{LitExpr{Value{std::move(payload), level}}});
}
Expr makeNot(Expr e) { return std::make_shared<const ExprNode>(ExprNode{NotExpr{std::move(e)}}); }
Expr makeBin(BinOp op, Expr lhs, Expr rhs) {
  return std::make_shared<const ExprNode>(ExprNode{BinExpr{op, std::move(lhs), std::move(rhs)}});
}
Expr makeOracle(std::string name, std::optional<Payload> value, std::vector<Expr> args) {
  return std::make_shared<const ExprNode>(
      ExprNode{OracleExpr{std::move(name), std::move(value), std::move(args)}});
}

Process nil() {
  static const Process kNil = make(Inaction{});
  return kNil;
}

Process parallel(std::vector<Process> parts) {
  if (parts.empty()) return nil();
  if (parts.size() == 1) return parts.front();
  return make(Parallel{std::move(parts)});
}

MonitoredProcess monitored(Level mu, Process p) {
  return std::make_shared<const MonitoredNode>(MonitoredNode{Monitored{mu, std::move(p)}});
}
MonitoredProcess mparallel(std::vector<MonitoredProcess> parts) {
  return std::make_shared<const MonitoredNode>(MonitoredNode{MParallel{std::move(parts)}});
}
MonitoredProcess mrestrict(std::string name, MonitoredProcess body) {
  return std::make_shared<const MonitoredNode>(
      MonitoredNode{MRestriction{std::move(name), std::move(body)}});
}
MonitoredProcess mdefine(DeclPtr decl, MonitoredProcess body) {
  return std::make_shared<const MonitoredNode>(
      MonitoredNode{MDefinition{std::move(decl), std::move(body)}});
}

Process demonitor(const MonitoredProcess& m) {
  return std::visit(
      Overloaded{
          [](const Monitored& x) { return x.proc; },
          [](const MParallel& x) {
            std::vector<Process> parts;
            for (const auto& part : x.parts) parts.push_back(demonitor(part));
            return make(Parallel{std::move(parts)});
          },
          [](const MRestriction& x) { return make(Restriction{x.name, demonitor(x.body)}); },
          [](const MDefinition& x) { return make(Definition{x.decl, demonitor(x.body)}); },
      },
      m->term);
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

namespace {

bool asBool(const Value& v, const char* what) {
  if (const bool* b = std::get_if<bool>(&v.payload)) return *b;
  throw EvalError(EvalError::Kind::TypeMismatch, std::string(what) + " expects a boolean");
}

}  // namespace

Value evaluate(const Expr& e, const Env& env, const Lattice& lat) {
  return std::visit(
      Overloaded{
          [&](const VarExpr& x) -> Value {
            auto it = env.find(x.name);
            if (it == env.end()) {
              throw EvalError(EvalError::Kind::UnboundVariable, "unbound variable '" + x.name + "'");
            }
            return Value{it->second.payload, lat.join(x.level, it->second.level)};
          },
          [&](const LitExpr& x) { return x.value; },
          [&](const NotExpr& x) {
            Value v = evaluate(x.operand, env, lat);
            return Value{!asBool(v, "not"), v.level};
          },
          [&](const BinExpr& x) {
            Value a = evaluate(x.lhs, env, lat);
            Value b = evaluate(x.rhs, env, lat);
            Level l = lat.join(a.level, b.level);
            switch (x.op) {
              case BinOp::And:
                return Value{asBool(a, "and") && asBool(b, "and"), l};
              case BinOp::Or:
                return Value{asBool(a, "or") || asBool(b, "or"), l};
              case BinOp::Eq:
                if (a.payload.index() != b.payload.index()) {
                  throw EvalError(EvalError::Kind::TypeMismatch, "== compares values of different types");
                }
                return Value{a.payload == b.payload, l};
            }
            throw EvalError(EvalError::Kind::TypeMismatch, "bad operator");
          },
          [&](const OracleExpr& x) {
            Level l = lat.bottom();
            if (!x.value) throw EvalError(EvalError::Kind::UnboundVariable, "no value for test '" + x.name + "'");
            for (const auto& arg : x.args) l = lat.join(l, evaluate(arg, env, lat).level);
            return Value{*x.value, l};
          },
      },
      e->term);
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

std::string levelText(Level l, const Lattice* lat) {
  return lat ? lat->name(l) : std::to_string(l.index);
}

class Printer {
 public:
  explicit Printer(const Lattice* lat) : lat_(lat) {}

  std::string expr(const Expr& e) {
    return std::visit(
        Overloaded{
            [&](const VarExpr& x) { return x.name + "^" + levelText(x.level, lat_); },
            [&](const LitExpr& x) { return print(x.value, lat_); },
            [&](const NotExpr& x) { return "not " + atom(x.operand); },
            [&](const BinExpr& x) {
              const char* op = x.op == BinOp::And ? " and " : x.op == BinOp::Or ? " or " : " == ";
              return "(" + expr(x.lhs) + op + expr(x.rhs) + ")";
            },
            [&](const OracleExpr& x) {
              std::string s = x.name + "(";
              for (std::size_t i = 0; i < x.args.size(); ++i) s += (i ? ", " : "") + expr(x.args[i]);
              return s + ")";
            },
        },
        e->term);
  }

  std::string proc(const Process& p) {
    if (const auto* par = as<Parallel>(p)) {
      if (par->parts.empty()) return "0";
      std::string s;
      for (std::size_t i = 0; i < par->parts.size(); ++i) s += (i ? " | " : "") + prefixed(par->parts[i]);
      return s;
    }
    if (const auto* def = as<Definition>(p)) {
      const Decl& d = *def->decl;
      std::string s = "def " + d.name + "(";
      for (const auto& [x, l] : d.params) s += x + "^" + levelText(l, lat_) + ", ";
      s += d.chan + ") = " + proc(d.body) + " in " + proc(def->body);
      return s;
    }
    return prefixed(p);
  }

 private:
  std::string atom(const Expr& e) {
    if (std::holds_alternative<NotExpr>(e->term)) return "(" + expr(e) + ")";
    return expr(e);
  }

  std::string lv(Level l) { return "^" + levelText(l, lat_); }

  std::string cont(const Process& p) { return "." + prefixed(p); }

  std::string prefixed(const Process& p) {
    return std::visit(
        Overloaded{
            [&](const Inaction&) -> std::string { return "0"; },
            [&](const Initiator& x) -> std::string {
              return "bar " + x.service.name + "[" + std::to_string(x.arity) + "]";
            },
            [&](const Participant& x) -> std::string {
              return x.service.name + "[" + std::to_string(x.role) + "](" + x.chan + ")" + cont(x.body);
            },
            [&](const SendValue& x) -> std::string {
              return print(x.chan) + "!<" + printRoles(x.to) + ", " + expr(x.expr) + ">" + cont(x.cont);
            },
            [&](const RecvValue& x) -> std::string {
              return print(x.chan) + "?(" + std::to_string(x.from) + ", " + x.var + lv(x.level) + ")" +
                     cont(x.cont);
            },
            [&](const SendService& x) -> std::string {
              return print(x.chan) + "!<<" + printRoles(x.to) + ", " + x.service.name + lv(x.level) +
                     ">>" + cont(x.cont);
            },
            [&](const RecvService& x) -> std::string {
              return print(x.chan) + "?((" + x.var + lv(x.level) + ", " + std::to_string(x.from) + "))" +
                     cont(x.cont);
            },
            [&](const SendChannel& x) -> std::string {
              return print(x.chan) + "!(((" + std::to_string(x.to) + ", " + print(x.delegated) +
                     lv(x.level) + ")))" + cont(x.cont);
            },
            [&](const RecvChannel& x) -> std::string {
              return print(x.chan) + "?(((" + x.var + lv(x.level) + ", " + std::to_string(x.from) + ")))" +
                     cont(x.cont);
            },
            [&](const Select& x) -> std::string {
              return print(x.chan) + " oplus" + lv(x.level) + " <" + printRoles(x.to) + ", " + x.label +
                     ">" + cont(x.cont);
            },
            [&](const Branch& x) -> std::string {
              std::string s = print(x.chan) + " &" + lv(x.level) + " (" + std::to_string(x.from) + ", {";
              for (std::size_t i = 0; i < x.arms.size(); ++i) {
                s += (i ? ", " : "") + x.arms[i].first + ": " + proc(x.arms[i].second);
              }
              return s + "})";
            },
            [&](const Conditional& x) -> std::string {
              return "if " + expr(x.guard) + " then " + prefixed(x.then_branch) + " else " +
                     prefixed(x.else_branch);
            },
            [&](const Parallel& x) -> std::string {
              if (x.parts.empty()) return "0";
              return "(" + proc(p) + ")";
            },
            [&](const Restriction& x) -> std::string { return "(new " + x.name + ") " + prefixed(x.body); },
            [&](const Definition&) -> std::string { return "(" + proc(p) + ")"; },
            [&](const Call& x) -> std::string {
              std::string s = x.name + "<";
              for (const auto& a : x.args) s += expr(a) + ", ";
              return s + print(x.chan) + ">";
            },
        },
        p->term);
  }

  const Lattice* lat_;
};

}  // namespace

std::string print(const Payload& v) {
  return std::visit(Overloaded{
                        [](bool b) -> std::string { return b ? "true" : "false"; },
                        [](std::int64_t i) { return std::to_string(i); },
                        [](const std::string& s) {
                          std::string out = "\"";
                          for (char c : s) {
                            if (c == '"' || c == '\\') out += '\\';
                            out += c;
                          }
                          return out + "\"";
                        },
                    },
                    v);
}

std::string print(const Value& v, const Lattice* lat) { return print(v.payload) + "^" + levelText(v.level, lat); }

std::string print(const Channel& c) {
  if (c.isVariable()) return c.name;
  return c.name + "[" + std::to_string(c.role) + "]";
}

std::string printRoles(const Roles& r) {
  if (r.size() == 1) return std::to_string(r.front());
  std::string s = "{";
  for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + std::to_string(r[i]);
  return s + "}";
}

std::string print(const Process& p, const Lattice* lat) { return Printer(lat).proc(p); }
std::string print(const Expr& e, const Lattice* lat) { return Printer(lat).expr(e); }

std::string print(const MonitoredProcess& m, const Lattice* lat) {
  return std::visit(
      Overloaded{
          [&](const Monitored& x) {
            std::string body = print(x.proc, lat);
            if (as<Parallel>(x.proc) || as<Definition>(x.proc)) body = "(" + body + ")";
            return "[" + levelText(x.monitor, lat) + "]" + body;
          },
          [&](const MParallel& x) {
            std::string s;
            for (std::size_t i = 0; i < x.parts.size(); ++i) s += (i ? " | " : "") + print(x.parts[i], lat);
            return x.parts.empty() ? std::string("0") : s;
          },
          [&](const MRestriction& x) { return "(new " + x.name + ") (" + print(x.body, lat) + ")"; },
          [&](const MDefinition& x) {
            return "def " + x.decl->name + " in (" + print(x.body, lat) + ")";
          },
      },
      m->term);
}

const std::string& key(const Process& p) {
  if (p->key_cache.empty()) p->key_cache = print(p, nullptr);
  return p->key_cache;
}

// ---------------------------------------------------------------------------
// Free names
// ---------------------------------------------------------------------------

namespace {

struct Bound {
  std::set<std::string> values, channelVars, serviceVars, serviceNames;
};

void freeExpr(const Expr& e, const Bound& b, FreeNames& out) {
  std::visit(Overloaded{
                 [&](const VarExpr& x) {
                   if (!b.values.count(x.name)) out.values.insert(x.name);
                 },
                 [&](const LitExpr&) {},
                 [&](const NotExpr& x) { freeExpr(x.operand, b, out); },
                 [&](const BinExpr& x) {
                   freeExpr(x.lhs, b, out);
                   freeExpr(x.rhs, b, out);
                 },
                 [&](const OracleExpr& x) {
                   for (const auto& a : x.args) freeExpr(a, b, out);
                 },
             },
             e->term);
}

void freeChan(const Channel& c, const Bound& b, FreeNames& out) {
  if (c.isVariable()) {
    if (!b.channelVars.count(c.name)) out.channelVars.insert(c.name);
  } else {
    out.sessions.insert(c.name);
  }
}

void freeIdent(const Identifier& u, const Bound& b, FreeNames& out) {
  if (u.variable) {
    if (!b.serviceVars.count(u.name)) out.serviceVars.insert(u.name);
  } else if (!b.serviceNames.count(u.name)) {
    out.serviceNames.insert(u.name);
  }
}

void freeProc(const Process& p, const Bound& b, FreeNames& out) {
  std::visit(Overloaded{
                 [&](const Inaction&) {},
                 [&](const Initiator& x) { freeIdent(x.service, b, out); },
                 [&](const Participant& x) {
                   freeIdent(x.service, b, out);
                   Bound inner = b;
                   inner.channelVars.insert(x.chan);
                   freeProc(x.body, inner, out);
                 },
                 [&](const SendValue& x) {
                   freeChan(x.chan, b, out);
                   freeExpr(x.expr, b, out);
                   freeProc(x.cont, b, out);
                 },
                 [&](const RecvValue& x) {
                   freeChan(x.chan, b, out);
                   Bound inner = b;
                   inner.values.insert(x.var);
                   freeProc(x.cont, inner, out);
                 },
                 [&](const SendService& x) {
                   freeChan(x.chan, b, out);
                   freeIdent(x.service, b, out);
                   freeProc(x.cont, b, out);
                 },
                 [&](const RecvService& x) {
                   freeChan(x.chan, b, out);
                   Bound inner = b;
                   inner.serviceVars.insert(x.var);
                   freeProc(x.cont, inner, out);
                 },
                 [&](const SendChannel& x) {
                   freeChan(x.chan, b, out);
                   freeChan(x.delegated, b, out);
                   freeProc(x.cont, b, out);
                 },
                 [&](const RecvChannel& x) {
                   freeChan(x.chan, b, out);
                   Bound inner = b;
                   inner.channelVars.insert(x.var);
                   freeProc(x.cont, inner, out);
                 },
                 [&](const Select& x) {
                   freeChan(x.chan, b, out);
                   freeProc(x.cont, b, out);
                 },
                 [&](const Branch& x) {
                   freeChan(x.chan, b, out);
                   for (const auto& arm : x.arms) freeProc(arm.second, b, out);
                 },
                 [&](const Conditional& x) {
                   freeExpr(x.guard, b, out);
                   freeProc(x.then_branch, b, out);
                   freeProc(x.else_branch, b, out);
                 },
                 [&](const Parallel& x) {
                   for (const auto& q : x.parts) freeProc(q, b, out);
                 },
                 [&](const Restriction& x) {
                   Bound inner = b;
                   inner.serviceNames.insert(x.name);
                   freeProc(x.body, inner, out);
                 },
                 [&](const Definition& x) {
                   // Declaration bodies are closed except for service and session names.
                   FreeNames body;
                   freeProc(x.decl->body, Bound{}, body);
                   for (const auto& a : body.serviceNames)
                     if (!b.serviceNames.count(a)) out.serviceNames.insert(a);
                   out.sessions.insert(body.sessions.begin(), body.sessions.end());
                   freeProc(x.body, b, out);
                 },
                 [&](const Call& x) {
                   out.procVars.insert(x.name);
                   for (const auto& a : x.args) freeExpr(a, b, out);
                   freeChan(x.chan, b, out);
                 },
             },
             p->term);
}

}  // namespace

FreeNames freeNames(const Process& p) {
  FreeNames out;
  freeProc(p, Bound{}, out);
  return out;
}

void collectSessions(const Process& p, std::vector<std::string>& out) {
  auto add = [&](const Channel& c) {
    if (!c.isVariable() && std::find(out.begin(), out.end(), c.name) == out.end()) out.push_back(c.name);
  };
  std::visit(Overloaded{
                 [&](const Inaction&) {},
                 [&](const Initiator&) {},
                 [&](const Participant& x) { collectSessions(x.body, out); },
                 [&](const SendValue& x) {
                   add(x.chan);
                   collectSessions(x.cont, out);
                 },
                 [&](const RecvValue& x) {
                   add(x.chan);
                   collectSessions(x.cont, out);
                 },
                 [&](const SendService& x) {
                   add(x.chan);
                   collectSessions(x.cont, out);
                 },
                 [&](const RecvService& x) {
                   add(x.chan);
                   collectSessions(x.cont, out);
                 },
                 [&](const SendChannel& x) {
                   add(x.chan);
                   add(x.delegated);
                   collectSessions(x.cont, out);
                 },
                 [&](const RecvChannel& x) {
                   add(x.chan);
                   collectSessions(x.cont, out);
                 },
                 [&](const Select& x) {
                   add(x.chan);
                   collectSessions(x.cont, out);
                 },
                 [&](const Branch& x) {
                   add(x.chan);
                   for (const auto& arm : x.arms) collectSessions(arm.second, out);
                 },
                 [&](const Conditional& x) {
                   collectSessions(x.then_branch, out);
                   collectSessions(x.else_branch, out);
                 },
                 [&](const Parallel& x) {
                   for (const auto& q : x.parts) collectSessions(q, out);
                 },
                 [&](const Restriction& x) { collectSessions(x.body, out); },
                 [&](const Definition& x) { collectSessions(x.body, out); },
                 [&](const Call& x) { add(x.chan); },
             },
             p->term);
}

// ---------------------------------------------------------------------------
// Substitution
// ---------------------------------------------------------------------------

namespace {

class Substituter {
 public:
  explicit Substituter(const Lattice& lat) : lat_(lat) {}

  Expr expr(const Expr& e, const Substitution& s) {
    if (s.values.empty()) return e;
    return std::visit(
        Overloaded{
            [&](const VarExpr& x) -> Expr {
              auto it = s.values.find(x.name);
              if (it == s.values.end()) return e;
              return makeLit(it->second.payload, lat_.join(x.level, it->second.level));
            },
            [&](const LitExpr&) -> Expr { return e; },
            [&](const NotExpr& x) -> Expr { return makeNot(expr(x.operand, s)); },
            [&](const BinExpr& x) -> Expr { return makeBin(x.op, expr(x.lhs, s), expr(x.rhs, s)); },
            [&](const OracleExpr& x) -> Expr {
              std::vector<Expr> args;
              for (const auto& a : x.args) args.push_back(expr(a, s));
              return makeOracle(x.name, x.value, std::move(args));
            },
        },
        e->term);
  }

  Channel chan(const Channel& c, const Substitution& s) {
    if (c.isVariable()) {
      auto it = s.channels.find(c.name);
      return it == s.channels.end() ? c : it->second;
    }
    auto it = s.sessions.find(c.name);
    return it == s.sessions.end() ? c : Channel::withRole(it->second, c.role);
  }

  Identifier ident(const Identifier& u, const Substitution& s) {
    if (u.variable) {
      auto it = s.services.find(u.name);
      return it == s.services.end() ? u : Identifier::service(it->second);
    }
    auto it = s.serviceNames.find(u.name);
    return it == s.serviceNames.end() ? u : Identifier::service(it->second);
  }

  Process proc(const Process& p, const Substitution& s) {
    if (s.empty()) return p;
    return std::visit(
        Overloaded{
            [&](const Inaction&) { return p; },
            [&](const Initiator& x) { return make(Initiator{ident(x.service, s), x.arity}); },
            [&](const Participant& x) {
              Substitution inner = s;
              inner.channels.erase(x.chan);
              return make(Participant{ident(x.service, s), x.role, x.chan, proc(x.body, inner)});
            },
            [&](const SendValue& x) {
              return make(SendValue{chan(x.chan, s), x.to, expr(x.expr, s), proc(x.cont, s)});
            },
            [&](const RecvValue& x) {
              Substitution inner = s;
              inner.values.erase(x.var);
              return make(RecvValue{chan(x.chan, s), x.from, x.var, x.level, proc(x.cont, inner)});
            },
            [&](const SendService& x) {
              return make(SendService{chan(x.chan, s), x.to, ident(x.service, s), x.level, proc(x.cont, s)});
            },
            [&](const RecvService& x) {
              Substitution inner = s;
              inner.services.erase(x.var);
              return make(RecvService{chan(x.chan, s), x.from, x.var, x.level, proc(x.cont, inner)});
            },
            [&](const SendChannel& x) {
              return make(SendChannel{chan(x.chan, s), x.to, chan(x.delegated, s), x.level, proc(x.cont, s)});
            },
            [&](const RecvChannel& x) {
              Substitution inner = s;
              inner.channels.erase(x.var);
              return make(RecvChannel{chan(x.chan, s), x.from, x.var, x.level, proc(x.cont, inner)});
            },
            [&](const Select& x) {
              return make(Select{chan(x.chan, s), x.to, x.label, x.level, proc(x.cont, s)});
            },
            [&](const Branch& x) {
              std::vector<std::pair<std::string, Process>> arms;
              for (const auto& [label, q] : x.arms) arms.emplace_back(label, proc(q, s));
              return make(Branch{chan(x.chan, s), x.from, x.level, std::move(arms)});
            },
            [&](const Conditional& x) {
              return make(Conditional{expr(x.guard, s), proc(x.then_branch, s), proc(x.else_branch, s)});
            },
            [&](const Parallel& x) {
              std::vector<Process> parts;
              for (const auto& q : x.parts) parts.push_back(proc(q, s));
              return make(Parallel{std::move(parts)});
            },
            [&](const Restriction& x) {
              Substitution inner = s;
              inner.serviceNames.erase(x.name);
              std::set<std::string> range;
              for (const auto& [_, a] : inner.services) range.insert(a);
              for (const auto& [_, a] : inner.serviceNames) range.insert(a);
              std::string binder = x.name;
              if (range.count(binder)) {
                FreeNames fn = freeNames(x.body);
                int k = 1;
                do {
                  binder = x.name + "_" + std::to_string(k++);
                } while (range.count(binder) || fn.serviceNames.count(binder));
                inner.serviceNames[x.name] = binder;
              }
              return make(Restriction{binder, proc(x.body, inner)});
            },
            [&](const Definition& x) { return make(Definition{x.decl, proc(x.body, s)}); },
            [&](const Call& x) {
              std::vector<Expr> args;
              for (const auto& a : x.args) args.push_back(expr(a, s));
              return make(Call{x.name, std::move(args), chan(x.chan, s)});
            },
        },
        p->term);
  }

 private:
  const Lattice& lat_;
};

}  // namespace

Process substitute(const Process& p, const Substitution& s, const Lattice& lat) {
  return Substituter(lat).proc(p, s);
}

Expr substitute(const Expr& e, const Substitution& s, const Lattice& lat) {
  return Substituter(lat).expr(e, s);
}

}  // namespace sesmon
