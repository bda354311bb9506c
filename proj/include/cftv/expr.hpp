#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cftv/errors.hpp"
#include "cftv/time.hpp"
#include "cftv/value.hpp"

namespace cftv::btm {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Guard / value expression tree.
struct Expr {
  enum class Op { Lit, Clock, Var, Local, Event, Not, Neg, And, Or, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div };
  Op op = Op::Lit;
  Value lit;          // Lit
  std::string name;   // clock / local / event name, or raw path for Var
  ExprPtr a, b;
};

struct Action {
  enum class Kind { Force, Release, Set, Reset, Emit };
  Kind kind = Kind::Emit;
  std::string target;  // path, local, clock or event name
  ExprPtr value;       // Force, Set
};

/// Throws ExprSyntaxError.
ExprPtr parse_expr(std::string_view text);
Action parse_action(std::string_view text);

/// Names an expression may refer to.
struct Declarations {
  std::set<std::string> clocks;
  std::set<std::string> locals;
  std::set<std::string> events_in;
  std::set<std::string> events_out;
};

/// Static checks: referenced clocks/locals/events declared, operand types
/// compatible, guard is boolean. Throws ExprTypeError.
void check_guard(const Expr& e, const Declarations& d);
void check_action(const Action& a, const Declarations& d);

/// Every var()/force()/release() path mentioned.
void collect_paths(const Expr& e, std::vector<std::string>& out);

class Environment {
 public:
  virtual ~Environment() = default;
  virtual Time clock(const std::string& name) const = 0;
  virtual Value var(const std::string& path) const = 0;
  virtual Value local(const std::string& name) const = 0;
  virtual bool event(const std::string& name) const = 0;
};

/// Throws ExprTypeError on operand mismatches at run time.
Value evaluate(const Expr& e, const Environment& env);
bool evaluate_guard(const Expr& e, const Environment& env);

/// Value of an expression built only from literals, if it is one.
std::optional<Value> constant_value(const Expr& e);

}  // namespace cftv::btm
