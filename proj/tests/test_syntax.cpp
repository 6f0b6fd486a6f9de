#include <doctest.h>

#include "sesmon/parser.hpp"
#include "support.hpp"

using namespace sesmon;

namespace {

ParseError::Kind errorKind(const std::string& src) {
  try {
    parseProgram(src);
  } catch (const ParseError& e) {
    return e.kind();
  }
  FAIL("parsed without error: " << src);
  return ParseError::Kind::SyntaxError;
}

std::string roundTrip(const std::string& src, const Lattice& lat) {
  DeclTable d;
  return print(parseProcess(src, lat, {}, &d), &lat);
}

}  // namespace

TEST_SUITE("syntax") {
  TEST_CASE("printing is a fixed point of parsing") {
    Lattice lat = Lattice::twoPoint();
    const char* terms[] = {
        "bar a[2] | a[1](x).x!<2, true^bot>.x?(2, y^top).0",
        "a[2](x).x?(1, v^bot).if v^bot then x oplus^bot <1, ok>.0 else x &^top (1, {ok: 0, ko: x!<<1, b^top>>.0})",
        "def X(v^bot, c) = c!<2, v^bot>.X<v^bot, c> in (new s) X<true^bot, s[1]>",
        "s[1]!(((2, t[3]^top))).s[1]?(((d^top, 2))).d!<1, 3^bot>.0",
        "s[1]?((z^bot, 2)).bar z[2]",
        "s[1]!<2, (not true^bot and (1^top == 2^bot))>.0",
        "s[1]!<{2,3}, \"pwd\"^top>.0",
    };
    for (const char* t : terms) {
      CAPTURE(t);
      std::string once = roundTrip(t, lat);
      CHECK(roundTrip(once, lat) == once);
    }
    CHECK(roundTrip("a[1](x).x!<2, 1^bot>", lat) == "a[1](x).x!<2, 1^bot>.0");
  }

  TEST_CASE("bundled programs parse and print stably") {
    for (const char* name : testing::kCorpus) {
      CAPTURE(name);
      Program p = testing::corpus(name, {{"simple", "true"}, {"gooduse", "true"}});
      std::string once = print(p.process, &p.lat());
      DeclTable d;
      CHECK(print(parseProcess(once, p.lat(), {}, &d), &p.lat()) == once);
    }
  }

  TEST_CASE("lattice block") {
    Program p = parseProgram("lattice { elements: bot, l, top; order: bot < l < top; } 0");
    CHECK(p.lat().size() == 3);
    CHECK(p.lat().leq(p.lat().level("bot"), p.lat().level("top")));
    Program q = parseProgram("0");
    CHECK((q.lat() == Lattice::twoPoint()));
    CHECK((errorKind("lattice { elements: a, b; order: ; } 0") == ParseError::Kind::InvalidLattice));
  }

  TEST_CASE("errors carry a kind and a position") {
    CHECK((errorKind("a[1](x).x!<2") == ParseError::Kind::SyntaxError));
    CHECK((errorKind("a[1](x).x!<2, 1^mid>") == ParseError::Kind::UnknownLevel));
    CHECK((errorKind("a[1](x).y!<2, 1^bot>") == ParseError::Kind::UnboundVariable));
    CHECK((errorKind("a[1](x).x!<2, v^bot>") == ParseError::Kind::UnboundVariable));
    CHECK((errorKind("X<1^bot, s[1]>") == ParseError::Kind::UnboundVariable));
    CHECK((errorKind("def X(v^bot, c) = 0 in X<s[1]>") == ParseError::Kind::ArityMismatch));
    try {
      parseProgram("0 |\n  a[1](x).x!<2, 1^mid>");
      FAIL("no error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.col() == 19);
    }
  }

  TEST_CASE("choices bind free tests") {
    Program p = parseProgram("s[1]!<2, flag^bot>", {{"flag", "true"}});
    CHECK(print(p.process, &p.lat()) == "s[1]!<2, true^bot>.0");
    Program q = parseProgram("s[1]!<2, n^top>", {{"n", "3"}});
    CHECK(print(q.process, &q.lat()) == "s[1]!<2, 3^top>.0");
    // An oracle without a value parses; evaluating it is an error.
    Program r = parseProgram("if probe(1^top) then 0 else 0");
    const auto* c = as<Conditional>(r.process);
    REQUIRE(c != nullptr);
    CHECK_THROWS_AS(evaluate(c->guard, {}, r.lat()), EvalError);
    Program o = parseProgram("if probe(1^top) then 0 else 0", {{"probe", "false"}});
    Value v = evaluate(as<Conditional>(o.process)->guard, {}, o.lat());
    CHECK_FALSE(std::get<bool>(v.payload));
    CHECK(v.level == o.lat().top());
  }

  TEST_CASE("evaluation joins the levels it reads") {
    Lattice lat = Lattice::validate({"bot", "l", "top"}, {{"bot", "l"}, {"l", "top"}});
    Level bot = lat.bottom(), l = lat.level("l");
    Expr e = makeBin(BinOp::And, makeVar("x", bot), makeLit(true, l));
    Value v = evaluate(e, {{"x", Value{true, bot}}}, lat);
    CHECK(std::get<bool>(v.payload));
    CHECK(v.level == l);
    // The binding's level joins with the occurrence's annotation.
    CHECK(evaluate(makeVar("x", bot), {{"x", Value{false, lat.top()}}}, lat).level == lat.top());
    CHECK_THROWS_AS(evaluate(makeNot(makeLit(std::int64_t{1}, bot)), {}, lat), EvalError);
    CHECK_THROWS_AS(evaluate(makeVar("y", bot), {}, lat), EvalError);
    CHECK_THROWS_AS(evaluate(makeBin(BinOp::Eq, makeLit(true, bot), makeLit(std::int64_t{1}, bot)), {}, lat),
                    EvalError);
  }

  TEST_CASE("substitution raises the level of the replaced occurrence") {
    Lattice lat = Lattice::twoPoint();
    Process open = make(SendValue{Channel::withRole("s", 1), {2}, makeVar("y", lat.bottom()), nil()});
    Substitution high;
    high.values["y"] = Value{true, lat.top()};
    CHECK(print(substitute(open, high, lat), &lat) == "s[1]!<2, true^top>.0");
    Process openTop = make(SendValue{Channel::withRole("s", 1), {2}, makeVar("y", lat.top()), nil()});
    Substitution low;
    low.values["y"] = Value{false, lat.bottom()};
    CHECK(print(substitute(openTop, low, lat), &lat) == "s[1]!<2, false^top>.0");
    // Bound occurrences are untouched.
    Process p = parseProcess("s[1]?(2, x^top).s[1]!<2, x^top>", lat, {}, nullptr);
    Substitution xs;
    xs.values["x"] = Value{true, lat.bottom()};
    CHECK(print(substitute(p, xs, lat), &lat) == print(p, &lat));
    // Session renaming reaches channels and is capture-free under service restriction.
    Process q = parseProcess("(new a) s[1]!<<2, a^bot>>.s[1]!<2, 1^bot>", lat, {}, nullptr);
    Substitution ren;
    ren.sessions["s"] = "t";
    ren.serviceNames["b"] = "a";
    CHECK(print(substitute(q, ren, lat), &lat) == "(new a_1) t[1]!<<2, a_1^bot>>.t[1]!<2, 1^bot>.0");
  }

  TEST_CASE("free names") {
    Lattice lat = Lattice::twoPoint();
    // Restriction binds service names; sessions are only bound at run time.
    Process p = parseProcess("bar a[2] | (new b) s[1]!<<2, b^bot>>.t[1]!<2, true^bot>", lat, {}, nullptr);
    FreeNames fn = freeNames(p);
    CHECK((fn.serviceNames == std::set<std::string>{"a"}));
    CHECK((fn.sessions == std::set<std::string>{"s", "t"}));
  }
}
