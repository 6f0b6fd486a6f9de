#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sesmon/lattice.hpp"
#include "sesmon/syntax.hpp"

namespace sesmon {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { SyntaxError, UnknownLevel, UnboundVariable, ArityMismatch, InvalidLattice };

  ParseError(Kind kind, int line, int col, const std::string& msg);
  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& message() const { return msg_; }

 private:
  Kind kind_;
  int line_;
  int col_;
  std::string msg_;
};

const char* toString(ParseError::Kind k);

// A parsed program. Declarations are hoisted into `decls` under names that are
// unique across the whole program; the Definition nodes stay in `process`.
struct Program {
  std::shared_ptr<const Lattice> lattice;
  Process process;
  DeclTable decls;
  std::map<std::string, int> arities;  // service name -> n, from initiators
  std::vector<std::string> diagnostics;

  const Lattice& lat() const { return *lattice; }
};

// Values for free value variables and oracle tests, e.g. {"simple", "true"}.
using Choices = std::map<std::string, std::string>;

Payload parseChoiceValue(std::string_view text);

Program parseProgram(std::string_view text, const Choices& choices = {});

// Parses a bare process term against an existing lattice; used for printed
// round trips and tests.
Process parseProcess(std::string_view text, const Lattice& lat, const Choices& choices = {},
                     DeclTable* decls = nullptr);

}  // namespace sesmon
