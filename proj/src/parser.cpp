#include "sesmon/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <set>

namespace sesmon {

ParseError::ParseError(Kind kind, int line, int col, const std::string& msg)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + toString(kind) + ": " +
                         msg),
      kind_(kind),
      line_(line),
      col_(col),
      msg_(msg) {}

const char* toString(ParseError::Kind k) {
  switch (k) {
    case ParseError::Kind::SyntaxError:
      return "SyntaxError";
    case ParseError::Kind::UnknownLevel:
      return "UnknownLevel";
    case ParseError::Kind::UnboundVariable:
      return "UnboundVariable";
    case ParseError::Kind::ArityMismatch:
      return "ArityMismatch";
    case ParseError::Kind::InvalidLattice:
      return "InvalidLattice";
  }
  return "?";
}

Payload parseChoiceValue(std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  std::int64_t n = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec == std::errc() && ptr == text.data() + text.size() && !text.empty()) return n;
  return std::string(text);
}

namespace {

enum class Tok { Ident, Int, String, Sym, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    int l = line, cl = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      std::string word(src.substr(i, j - i));
      if (word.front() == '_') {
        throw ParseError(ParseError::Kind::SyntaxError, l, cl, "identifiers may not start with '_'");
      }
      out.push_back({Tok::Ident, word, l, cl});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::Int, std::string(src.substr(i, j - i)), l, cl});
      advance(j - i);
      continue;
    }
    if (c == '"') {
      std::string s;
      advance(1);
      while (i < src.size() && src[i] != '"') {
        if (src[i] == '\\' && i + 1 < src.size()) advance(1);
        s += src[i];
        advance(1);
      }
      if (i >= src.size()) throw ParseError(ParseError::Kind::SyntaxError, l, cl, "unterminated string");
      advance(1);
      out.push_back({Tok::String, s, l, cl});
      continue;
    }
    if (c == '=' && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({Tok::Sym, "==", l, cl});
      advance(2);
      continue;
    }
    static const std::string kSyms = "!?<>(){}[],.:;|^&=";
    if (kSyms.find(c) != std::string::npos) {
      out.push_back({Tok::Sym, std::string(1, c), l, cl});
      advance(1);
      continue;
    }
    throw ParseError(ParseError::Kind::SyntaxError, l, cl, std::string("unexpected character '") + c + "'");
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

const std::set<std::string> kKeywords = {"bar", "if",  "then", "else", "new",   "def",  "in",
                                         "oplus", "not", "and", "or",   "true", "false"};

struct Scope {
  std::map<std::string, Level> values;
  std::set<std::string> channels;
  std::set<std::string> serviceVars;
  std::set<std::string> restricted;
  std::set<std::string> forbidden;  // restricted outside the enclosing declaration
  std::map<std::string, DeclPtr> procs;
  bool inDecl = false;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, const Choices& choices) : toks_(std::move(toks)), choices_(choices) {}

  Program program() {
    Program prog;
    if (isIdent("lattice")) {
      prog.lattice = std::make_shared<const Lattice>(latticeBlock());
    } else {
      prog.lattice = std::make_shared<const Lattice>(Lattice::twoPoint());
    }
    lat_ = prog.lattice.get();
    prog.process = processTop();
    prog.decls = decls_;
    checkArities();
    prog.arities = initiatorArity_;
    prog.diagnostics = diagnostics_;
    return prog;
  }

  Process processTop() {
    Scope scope;
    Process p = parallelProc(scope);
    if (peek().kind != Tok::End) fail(ParseError::Kind::SyntaxError, "unexpected '" + peek().text + "'");
    return p;
  }

  void setLattice(const Lattice* lat) { lat_ = lat; }
  const DeclTable& decls() const { return decls_; }
  void checkArities() {
    for (const auto& [name, roles] : participantRoles_) {
      auto it = initiatorArity_.find(name);
      if (it == initiatorArity_.end()) continue;
      for (const auto& [role, tok] : roles) {
        if (role > it->second) {
          throw ParseError(ParseError::Kind::ArityMismatch, tok.line, tok.col,
                           "participant " + std::to_string(role) + " exceeds arity " + std::to_string(it->second) +
                               " of service '" + name + "'");
        }
      }
    }
  }

 private:
  // ----- token helpers -----
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool isSym(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Sym && peek(k).text == s;
  }
  bool isIdent(std::string_view s, std::size_t k = 0) const {
    return peek(k).kind == Tok::Ident && peek(k).text == s;
  }
  [[noreturn]] void fail(ParseError::Kind kind, const std::string& msg) const {
    throw ParseError(kind, peek().line, peek().col, msg);
  }
  [[noreturn]] static void failAt(const Token& t, ParseError::Kind kind, const std::string& msg) {
    throw ParseError(kind, t.line, t.col, msg);
  }
  void expectSym(std::string_view s) {
    if (!isSym(s)) fail(ParseError::Kind::SyntaxError, "expected '" + std::string(s) + "' but found '" + peek().text + "'");
    next();
  }
  void expectKeyword(std::string_view s) {
    if (!isIdent(s)) fail(ParseError::Kind::SyntaxError, "expected '" + std::string(s) + "' but found '" + peek().text + "'");
    next();
  }
  std::string name() {
    if (peek().kind != Tok::Ident || kKeywords.count(peek().text)) {
      fail(ParseError::Kind::SyntaxError, "expected a name but found '" + peek().text + "'");
    }
    return next().text;
  }
  int integer() {
    if (peek().kind != Tok::Int) fail(ParseError::Kind::SyntaxError, "expected an integer but found '" + peek().text + "'");
    return std::stoi(next().text);
  }
  int participant() {
    const Token& t = peek();
    int p = integer();
    if (p < 1) failAt(t, ParseError::Kind::SyntaxError, "participants are numbered from 1");
    return p;
  }
  Level level() {
    const Token& t = peek();
    std::string n = name();
    if (!lat_->contains(n)) failAt(t, ParseError::Kind::UnknownLevel, "unknown level '" + n + "'");
    return lat_->level(n);
  }
  Level annotation() {
    expectSym("^");
    return level();
  }

  // ----- lattice -----
  Lattice latticeBlock() {
    const Token& start = peek();
    expectKeyword("lattice");
    expectSym("{");
    std::vector<std::string> elements;
    std::vector<std::pair<std::string, std::string>> order;
    while (!isSym("}")) {
      if (isIdent("elements")) {
        next();
        expectSym(":");
        do {
          elements.push_back(name());
        } while (isSym(",") && (next(), true));
        expectSym(";");
      } else if (isIdent("order")) {
        next();
        expectSym(":");
        if (!isSym(";")) {
          do {
            std::string lo = name();
            expectSym("<");
            std::string hi = name();
            order.emplace_back(lo, hi);
            while (isSym("<")) {
              next();
              lo = hi;
              hi = name();
              order.emplace_back(lo, hi);
            }
          } while (isSym(",") && (next(), true));
        }
        expectSym(";");
      } else {
        fail(ParseError::Kind::SyntaxError, "expected 'elements' or 'order' in lattice block");
      }
    }
    expectSym("}");
    try {
      return Lattice::validate(elements, order);
    } catch (const LatticeError& e) {
      throw ParseError(e.kind() == LatticeError::Kind::UnknownElement ? ParseError::Kind::UnknownLevel
                                                                       : ParseError::Kind::InvalidLattice,
                       start.line, start.col, e.what());
    }
  }

  // ----- processes -----
  Process parallelProc(const Scope& scope) {
    std::vector<Process> parts;
    parts.push_back(prefixed(scope));
    while (isSym("|")) {
      next();
      parts.push_back(prefixed(scope));
    }
    if (parts.size() == 1) return parts.front();
    return make(Parallel{std::move(parts)});
  }

  Process continuation(const Scope& scope) {
    if (!isSym(".")) return nil();
    next();
    return prefixed(scope);
  }

  Roles roles() {
    Roles r;
    if (isSym("{")) {
      next();
      do {
        r.push_back(participant());
      } while (isSym(",") && (next(), true));
      expectSym("}");
    } else {
      r.push_back(participant());
    }
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return r;
  }

  Identifier identifier(const std::string& n, const Scope& scope) {
    if (scope.serviceVars.count(n)) return Identifier::var(n);
    if (scope.forbidden.count(n)) {
      fail(ParseError::Kind::SyntaxError, "declaration body refers to restricted name '" + n + "'");
    }
    return Identifier::service(n);
  }

  Channel channelRef(const Scope& scope) {
    const Token& t = peek();
    std::string n = name();
    if (isSym("[")) {
      next();
      int p = participant();
      expectSym("]");
      return Channel::withRole(n, p);
    }
    if (!scope.channels.count(n)) failAt(t, ParseError::Kind::UnboundVariable, "unbound channel variable '" + n + "'");
    return Channel::variable(n);
  }

  Process prefixed(const Scope& scope) {
    const Token& t = peek();
    if (t.kind == Tok::Int && t.text == "0") {
      next();
      return nil();
    }
    if (isIdent("bar")) {
      next();
      std::string a = name();
      expectSym("[");
      const Token& nt = peek();
      int n = integer();
      if (n < 2) failAt(nt, ParseError::Kind::ArityMismatch, "service arity must be at least 2");
      expectSym("]");
      Identifier u = identifier(a, scope);
      if (!u.variable) {
        auto [it, fresh] = initiatorArity_.emplace(a, n);
        if (!fresh && it->second != n) {
          failAt(nt, ParseError::Kind::ArityMismatch, "service '" + a + "' initiated with arities " +
                                                          std::to_string(it->second) + " and " + std::to_string(n));
        }
      }
      return make(Initiator{u, n});
    }
    if (isIdent("if")) {
      next();
      Expr guard = expression(scope);
      expectKeyword("then");
      Process p = prefixed(scope);
      expectKeyword("else");
      Process q = prefixed(scope);
      return make(Conditional{guard, p, q});
    }
    if (isIdent("def")) return definition(scope);
    if (isSym("(")) {
      next();
      if (isIdent("new")) {
        next();
        std::string a = name();
        expectSym(")");
        Scope inner = scope;
        inner.serviceVars.erase(a);
        inner.restricted.insert(a);
        inner.forbidden.erase(a);
        return make(Restriction{a, prefixed(inner)});
      }
      Process p = parallelProc(scope);
      expectSym(")");
      return p;
    }
    if (t.kind != Tok::Ident || kKeywords.count(t.text)) {
      fail(ParseError::Kind::SyntaxError, "expected a process but found '" + t.text + "'");
    }
    // Call: X<...>
    if (isSym("<", 1)) return call(scope);
    // Participant: u[p](alpha).P
    if (isSym("[", 1) && peek(2).kind == Tok::Int && isSym("]", 3) && isSym("(", 4)) {
      std::string u = name();
      next();
      const Token& rt = peek();
      int p = participant();
      next();
      next();
      std::string alpha = name();
      expectSym(")");
      Identifier id = identifier(u, scope);
      if (!id.variable) participantRoles_[u].emplace_back(p, rt);
      Scope inner = scope;
      inner.channels.insert(alpha);
      return make(Participant{id, p, alpha, continuation(inner)});
    }
    Channel c = channelRef(scope);
    return action(c, scope);
  }

  Process action(const Channel& c, const Scope& scope) {
    if (isSym("!")) {
      next();
      if (isSym("<") && isSym("<", 1)) {
        next();
        next();
        Roles to = roles();
        expectSym(",");
        std::string u = name();
        Level l = annotation();
        expectSym(">");
        expectSym(">");
        Identifier id = identifier(u, scope);
        return make(SendService{c, to, id, l, continuation(scope)});
      }
      if (isSym("<")) {
        next();
        Roles to = roles();
        expectSym(",");
        Expr e = expression(scope);
        expectSym(">");
        return make(SendValue{c, to, e, continuation(scope)});
      }
      if (isSym("(") && isSym("(", 1) && isSym("(", 2)) {
        next();
        next();
        next();
        int q = participant();
        expectSym(",");
        Channel d = channelRef(scope);
        Level l = annotation();
        for (int k = 0; k < 3; ++k) expectSym(")");
        return make(SendChannel{c, q, d, l, continuation(scope)});
      }
      fail(ParseError::Kind::SyntaxError, "malformed send");
    }
    if (isSym("?")) {
      next();
      int parens = 0;
      while (isSym("(") && parens < 3) {
        next();
        ++parens;
      }
      if (parens == 1) {
        int p = participant();
        expectSym(",");
        std::string x = name();
        Level l = annotation();
        expectSym(")");
        Scope inner = scope;
        inner.values[x] = l;
        return make(RecvValue{c, p, x, l, continuation(inner)});
      }
      if (parens == 2 || parens == 3) {
        std::string v = name();
        Level l = annotation();
        expectSym(",");
        int p = participant();
        for (int k = 0; k < parens; ++k) expectSym(")");
        Scope inner = scope;
        if (parens == 2) {
          inner.serviceVars.insert(v);
          inner.forbidden.erase(v);
          return make(RecvService{c, p, v, l, continuation(inner)});
        }
        inner.channels.insert(v);
        return make(RecvChannel{c, p, v, l, continuation(inner)});
      }
      fail(ParseError::Kind::SyntaxError, "malformed receive");
    }
    if (isIdent("oplus")) {
      next();
      Level l = annotation();
      expectSym("<");
      Roles to = roles();
      expectSym(",");
      std::string label = name();
      expectSym(">");
      return make(Select{c, to, label, l, continuation(scope)});
    }
    if (isSym("&")) {
      next();
      Level l = annotation();
      expectSym("(");
      int p = participant();
      expectSym(",");
      expectSym("{");
      std::vector<std::pair<std::string, Process>> arms;
      std::set<std::string> seen;
      do {
        const Token& lt = peek();
        std::string label = name();
        if (!seen.insert(label).second) failAt(lt, ParseError::Kind::SyntaxError, "duplicate label '" + label + "'");
        expectSym(":");
        arms.emplace_back(label, parallelProc(scope));
      } while (isSym(",") && (next(), true));
      expectSym("}");
      expectSym(")");
      return make(Branch{c, p, l, std::move(arms)});
    }
    fail(ParseError::Kind::SyntaxError, "expected an action on channel '" + print(c) + "'");
  }

  Process definition(const Scope& scope) {
    expectKeyword("def");
    std::string x = name();
    expectSym("(");
    std::vector<std::pair<std::string, Level>> params;
    std::string alpha;
    while (true) {
      std::string n = name();
      if (isSym("^")) {
        params.emplace_back(n, annotation());
        expectSym(",");
        continue;
      }
      alpha = n;
      break;
    }
    expectSym(")");
    expectSym("=");

    std::string unique = x;
    for (int k = 2; usedDeclNames_.count(unique); ++k) unique = x + "_" + std::to_string(k);
    usedDeclNames_.insert(unique);
    if (unique != x) diagnostics_.push_back("declaration '" + x + "' renamed to '" + unique + "'");

    // The body is parsed before the declaration exists, so recursive calls
    // resolve through a placeholder that is patched afterwards.
    auto decl = std::make_shared<Decl>();
    decl->name = unique;
    decl->params = params;
    decl->chan = alpha;

    Scope body;
    body.inDecl = true;
    body.forbidden = scope.forbidden;
    body.forbidden.insert(scope.restricted.begin(), scope.restricted.end());
    body.procs = scope.procs;
    body.procs[x] = decl;
    for (const auto& [p, l] : params) body.values[p] = l;
    body.channels.insert(alpha);
    decl->body = parallelProc(body);
    expectKeyword("in");
    decls_[unique] = decl;

    Scope inner = scope;
    inner.procs[x] = decl;
    Process q = parallelProc(inner);
    return make(Definition{decl, q});
  }

  Process call(const Scope& scope) {
    const Token& t = peek();
    std::string x = name();
    auto it = scope.procs.find(x);
    if (it == scope.procs.end()) failAt(t, ParseError::Kind::UnboundVariable, "unknown process '" + x + "'");
    expectSym("<");
    std::vector<Expr> args;
    std::optional<Channel> chan;
    while (true) {
      bool chanNext = peek().kind == Tok::Ident &&
                      (isSym(">", 1) || (isSym("[", 1) && peek(2).kind == Tok::Int && isSym("]", 3) && isSym(">", 4)));
      if (chanNext) {
        chan = channelRef(scope);
        break;
      }
      args.push_back(expression(scope));
      expectSym(",");
    }
    expectSym(">");
    const DeclPtr& d = it->second;
    if (args.size() != d->params.size()) {
      failAt(t, ParseError::Kind::ArityMismatch, "process '" + x + "' expects " + std::to_string(d->params.size()) +
                                                     " values but got " + std::to_string(args.size()));
    }
    return make(Call{d->name, std::move(args), *chan});
  }

  // ----- expressions -----
  Expr expression(const Scope& scope) {
    Expr e = conjunction(scope);
    while (isIdent("or")) {
      next();
      e = makeBin(BinOp::Or, e, conjunction(scope));
    }
    return e;
  }
  Expr conjunction(const Scope& scope) {
    Expr e = equality(scope);
    while (isIdent("and")) {
      next();
      e = makeBin(BinOp::And, e, equality(scope));
    }
    return e;
  }
  Expr equality(const Scope& scope) {
    Expr e = unary(scope);
    if (isSym("==")) {
      next();
      e = makeBin(BinOp::Eq, e, unary(scope));
    }
    return e;
  }
  Expr unary(const Scope& scope) {
    if (isIdent("not")) {
      next();
      return makeNot(unary(scope));
    }
    return atom(scope);
  }
  Expr atom(const Scope& scope) {
    const Token& t = peek();
    if (isSym("(")) {
      next();
      Expr e = expression(scope);
      expectSym(")");
      return e;
    }
    if (isIdent("true") || isIdent("false")) {
      bool b = next().text == "true";
      return makeLit(b, annotation());
    }
    if (t.kind == Tok::Int) {
      std::int64_t n = std::stoll(next().text);
      return makeLit(n, annotation());
    }
    if (t.kind == Tok::String) {
      std::string s = next().text;
      return makeLit(s, annotation());
    }
    std::string n = name();
    if (isSym("(")) {
      next();
      std::vector<Expr> args;
      if (!isSym(")")) {
        do {
          args.push_back(expression(scope));
        } while (isSym(",") && (next(), true));
      }
      expectSym(")");
      auto c = choices_.find(n);
      if (c == choices_.end()) return makeOracle(n, std::nullopt, std::move(args));
      return makeOracle(n, parseChoiceValue(c->second), std::move(args));
    }
    auto bound = scope.values.find(n);
    std::optional<Level> ann;
    if (isSym("^")) ann = annotation();
    if (bound != scope.values.end()) return makeVar(n, ann.value_or(bound->second));
    auto c = choices_.find(n);
    if (c == choices_.end() || scope.inDecl) {
      failAt(t, ParseError::Kind::UnboundVariable, "unbound variable '" + n + "'");
    }
    return makeLit(parseChoiceValue(c->second), ann.value_or(lat_->bottom()));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Choices& choices_;
  const Lattice* lat_ = nullptr;
  DeclTable decls_;
  std::set<std::string> usedDeclNames_;
  std::map<std::string, int> initiatorArity_;
  std::map<std::string, std::vector<std::pair<int, Token>>> participantRoles_;
  std::vector<std::string> diagnostics_;
};

}  // namespace

Program parseProgram(std::string_view text, const Choices& choices) {
  Parser p(tokenize(text), choices);
  return p.program();
}

Process parseProcess(std::string_view text, const Lattice& lat, const Choices& choices, DeclTable* decls) {
  Parser p(tokenize(text), choices);
  p.setLattice(&lat);
  Process proc = p.processTop();
  p.checkArities();
  if (decls) {
    for (const auto& [k, v] : p.decls()) (*decls)[k] = v;
  }
  return proc;
}

}  // namespace sesmon
