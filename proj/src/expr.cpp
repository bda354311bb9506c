#include "cftv/expr.hpp"

#include <cctype>
#include <charconv>

namespace cftv::btm {

namespace {

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

ExprPtr make(Expr::Op op, ExprPtr a = nullptr, ExprPtr b = nullptr) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr make_lit(Value v) {
  auto e = std::make_shared<Expr>();
  e->lit = std::move(v);
  return e;
}

ExprPtr make_named(Expr::Op op, std::string name) {
  auto e = std::make_shared<Expr>();
  e->op = op;
  e->name = std::move(name);
  return e;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  ExprPtr expression() { return disjunction(); }

  Action action() {
    std::string fn = ident();
    expect('(');
    Action a;
    if (fn == "force") {
      a.kind = Action::Kind::Force;
      a.target = raw_path();
      expect(',');
      a.value = expression();
    } else if (fn == "release") {
      a.kind = Action::Kind::Release;
      a.target = raw_path();
    } else if (fn == "set") {
      a.kind = Action::Kind::Set;
      a.target = ident();
      expect(',');
      a.value = expression();
    } else if (fn == "reset") {
      a.kind = Action::Kind::Reset;
      a.target = ident();
    } else if (fn == "emit") {
      a.kind = Action::Kind::Emit;
      a.target = ident();
    } else {
      fail("unknown action '" + fn + "'");
    }
    expect(')');
    return a;
  }

  void finish() {
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExprSyntaxError(what + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip();
    if (s_.substr(pos_, tok.size()) != tok) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(char c) {
    if (!accept(std::string_view(&c, 1))) fail(std::string("expected '") + c + "'");
  }

  std::string ident() {
    skip();
    std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    if (start == pos_) fail("expected identifier");
    return std::string(s_.substr(start, pos_ - start));
  }

  // Raw injector path up to the next top-level ',' or ')'.
  std::string raw_path() {
    skip();
    std::size_t start = pos_;
    int depth = 0;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (c == '[' || c == '(') ++depth;
      else if ((c == ']' || c == ')') && depth > 0) --depth;
      else if ((c == ',' || c == ')') && depth == 0) break;
      ++pos_;
    }
    std::string p(s_.substr(start, pos_ - start));
    while (!p.empty() && std::isspace(static_cast<unsigned char>(p.back()))) p.pop_back();
    if (p.empty()) fail("expected path");
    return p;
  }

  ExprPtr disjunction() {
    ExprPtr e = conjunction();
    while (accept("||")) e = make(Expr::Op::Or, e, conjunction());
    return e;
  }

  ExprPtr conjunction() {
    ExprPtr e = comparison();
    while (accept("&&")) e = make(Expr::Op::And, e, comparison());
    return e;
  }

  ExprPtr comparison() {
    ExprPtr e = additive();
    static const std::pair<std::string_view, Expr::Op> ops[] = {
        {"==", Expr::Op::Eq}, {"!=", Expr::Op::Ne}, {"<=", Expr::Op::Le},
        {">=", Expr::Op::Ge}, {"<", Expr::Op::Lt},  {">", Expr::Op::Gt}};
    for (const auto& [tok, op] : ops)
      if (accept(tok)) return make(op, e, additive());
    return e;
  }

  ExprPtr additive() {
    ExprPtr e = multiplicative();
    while (true) {
      if (accept("+")) e = make(Expr::Op::Add, e, multiplicative());
      else if (accept("-")) e = make(Expr::Op::Sub, e, multiplicative());
      else return e;
    }
  }

  ExprPtr multiplicative() {
    ExprPtr e = unary();
    while (true) {
      if (accept("*")) e = make(Expr::Op::Mul, e, unary());
      else if (accept("/")) e = make(Expr::Op::Div, e, unary());
      else return e;
    }
  }

  ExprPtr unary() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '!' && s_.substr(pos_, 2) != "!=") {
      ++pos_;
      return make(Expr::Op::Not, unary());
    }
    if (accept("-")) return make(Expr::Op::Neg, unary());
    return primary();
  }

  ExprPtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = expression();
      expect(')');
      return e;
    }
    if (c == '"' || c == '\'') return string_literal(c);
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    std::string id = ident();
    if (id == "true") return make_lit(true);
    if (id == "false") return make_lit(false);
    expect('(');
    ExprPtr e;
    if (id == "var") e = make_named(Expr::Op::Var, raw_path());
    else if (id == "clock") e = make_named(Expr::Op::Clock, ident());
    else if (id == "local") e = make_named(Expr::Op::Local, ident());
    else if (id == "event") e = make_named(Expr::Op::Event, ident());
    else fail("unknown function '" + id + "'");
    expect(')');
    return e;
  }

  ExprPtr string_literal(char quote) {
    ++pos_;
    std::string out;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
      out += s_[pos_++];
    }
    if (pos_ >= s_.size()) fail("unterminated string");
    ++pos_;
    return make_lit(out);
  }

  ExprPtr number() {
    std::size_t start = pos_;
    if (s_.substr(pos_, 2) == "0x" || s_.substr(pos_, 2) == "0X") {
      pos_ += 2;
      std::size_t digits = pos_;
      while (pos_ < s_.size() && std::isxdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s_.data() + digits, s_.data() + pos_, v, 16);
      if (digits == pos_ || ec != std::errc{}) fail("bad hex literal");
      return make_lit(v);
    }
    bool real = false;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      real |= s_[pos_] == '.';
      ++pos_;
    }
    std::string_view num = s_.substr(start, pos_ - start);
    // Optional time unit.
    std::size_t save = pos_;
    skip();
    std::size_t ustart = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    std::string_view unit = s_.substr(ustart, pos_ - ustart);
    if (unit == "ps" || unit == "ns" || unit == "us" || unit == "ms" || unit == "s") {
      try {
        return make_lit(parse_time(std::string(num) + " " + std::string(unit)));
      } catch (const Error&) {
        fail("bad time literal");
      }
    }
    pos_ = save;
    if (real) {
      try {
        std::size_t used = 0;
        double d = std::stod(std::string(num), &used);
        if (used != num.size()) fail("bad number");
        return make_lit(d);
      } catch (const std::logic_error&) {
        fail("bad number");
      }
    }
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
    if (ec != std::errc{} || p != num.data() + num.size()) fail("bad integer");
    return make_lit(v);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

// --- static typing ----------------------------------------------------------------

enum class Type { Bool, Num, Str, Null, Other, Any };

Type type_of(const Value& v) {
  if (v.is_bool()) return Type::Bool;
  if (v.is_number()) return Type::Num;
  if (v.is_string()) return Type::Str;
  if (v.is_null()) return Type::Null;
  return Type::Other;
}

const char* type_name(Type t) {
  switch (t) {
    case Type::Bool: return "bool";
    case Type::Num: return "number";
    case Type::Str: return "string";
    case Type::Null: return "null";
    case Type::Other: return "structured value";
    default: return "any";
  }
}

void require(Type t, std::initializer_list<Type> allowed, const char* what) {
  if (t == Type::Any) return;
  for (Type a : allowed)
    if (t == a) return;
  throw ExprTypeError(std::string(what) + " applied to " + type_name(t));
}

Type check(const Expr& e, const Declarations& d) {
  using Op = Expr::Op;
  switch (e.op) {
    case Op::Lit:
      return type_of(e.lit);
    case Op::Clock:
      if (!d.clocks.count(e.name)) throw ExprTypeError("undeclared clock '" + e.name + "'");
      return Type::Num;
    case Op::Local:
      if (!d.locals.count(e.name)) throw ExprTypeError("undeclared local '" + e.name + "'");
      return Type::Any;
    case Op::Event:
      if (!d.events_in.count(e.name)) throw ExprTypeError("event '" + e.name + "' is not subscribed");
      return Type::Bool;
    case Op::Var:
      return Type::Any;
    case Op::Not:
      require(check(*e.a, d), {Type::Bool, Type::Num}, "'!'");
      return Type::Bool;
    case Op::Neg:
      require(check(*e.a, d), {Type::Num}, "unary '-'");
      return Type::Num;
    case Op::And:
    case Op::Or:
      require(check(*e.a, d), {Type::Bool, Type::Num}, "logical operator");
      require(check(*e.b, d), {Type::Bool, Type::Num}, "logical operator");
      return Type::Bool;
    case Op::Eq:
    case Op::Ne: {
      Type a = check(*e.a, d), b = check(*e.b, d);
      if (a != Type::Any && b != Type::Any && a != b && a != Type::Null && b != Type::Null)
        throw ExprTypeError(std::string("comparing ") + type_name(a) + " with " + type_name(b));
      return Type::Bool;
    }
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: {
      Type a = check(*e.a, d), b = check(*e.b, d);
      require(a, {Type::Num, Type::Str}, "ordering");
      require(b, {Type::Num, Type::Str}, "ordering");
      if (a != Type::Any && b != Type::Any && a != b)
        throw ExprTypeError(std::string("ordering ") + type_name(a) + " against " + type_name(b));
      return Type::Bool;
    }
    default:
      require(check(*e.a, d), {Type::Num}, "arithmetic");
      require(check(*e.b, d), {Type::Num}, "arithmetic");
      return Type::Num;
  }
}

// --- evaluation ---------------------------------------------------------------------

bool truthy(const Value& v) {
  if (v.is_bool()) return v.as_bool();
  if (v.is_number()) return v.as_number() != 0.0;
  if (v.is_null()) return false;
  throw ExprTypeError("value of type " + v.type_name() + " used as condition");
}

int compare(const Value& a, const Value& b) {
  if (a.is_int() && b.is_int()) return a.as_int() < b.as_int() ? -1 : a.as_int() > b.as_int();
  if (a.is_number() && b.is_number()) return a.as_number() < b.as_number() ? -1 : a.as_number() > b.as_number();
  if (a.is_string() && b.is_string()) return a.as_string().compare(b.as_string()) < 0 ? -1 : a.as_string() != b.as_string();
  throw ExprTypeError("cannot order " + a.type_name() + " against " + b.type_name());
}

Value arith(Expr::Op op, const Value& a, const Value& b) {
  if (a.is_null() || b.is_null()) return {};
  if (!a.is_number() || !b.is_number())
    throw ExprTypeError("arithmetic on " + a.type_name() + " and " + b.type_name());
  if (a.is_int() && b.is_int()) {
    std::int64_t x = a.as_int(), y = b.as_int();
    switch (op) {
      case Expr::Op::Add: return x + y;
      case Expr::Op::Sub: return x - y;
      case Expr::Op::Mul: return x * y;
      default:
        if (y == 0) throw ExprTypeError("division by zero");
        return x / y;
    }
  }
  double x = a.as_number(), y = b.as_number();
  switch (op) {
    case Expr::Op::Add: return x + y;
    case Expr::Op::Sub: return x - y;
    case Expr::Op::Mul: return x * y;
    default:
      if (y == 0.0) throw ExprTypeError("division by zero");
      return x / y;
  }
}

}  // namespace

ExprPtr parse_expr(std::string_view text) {
  Parser p(text);
  ExprPtr e = p.expression();
  p.finish();
  return e;
}

Action parse_action(std::string_view text) {
  Parser p(text);
  Action a = p.action();
  p.finish();
  return a;
}

void check_guard(const Expr& e, const Declarations& d) {
  Type t = check(e, d);
  if (t != Type::Bool && t != Type::Any) throw ExprTypeError(std::string("guard is ") + type_name(t) + ", not bool");
}

void check_action(const Action& a, const Declarations& d) {
  switch (a.kind) {
    case Action::Kind::Force:
      check(*a.value, d);
      break;
    case Action::Kind::Set:
      if (!d.locals.count(a.target)) throw ExprTypeError("undeclared local '" + a.target + "'");
      check(*a.value, d);
      break;
    case Action::Kind::Reset:
      if (!d.clocks.count(a.target)) throw ExprTypeError("undeclared clock '" + a.target + "'");
      break;
    case Action::Kind::Emit:
      if (!d.events_out.count(a.target)) throw ExprTypeError("event '" + a.target + "' is not declared as emitted");
      break;
    case Action::Kind::Release:
      break;
  }
}

void collect_paths(const Expr& e, std::vector<std::string>& out) {
  if (e.op == Expr::Op::Var) out.push_back(e.name);
  if (e.a) collect_paths(*e.a, out);
  if (e.b) collect_paths(*e.b, out);
}

Value evaluate(const Expr& e, const Environment& env) {
  using Op = Expr::Op;
  switch (e.op) {
    case Op::Lit: return e.lit;
    case Op::Clock: return env.clock(e.name);
    case Op::Var: return env.var(e.name);
    case Op::Local: return env.local(e.name);
    case Op::Event: return env.event(e.name);
    case Op::Not: return !truthy(evaluate(*e.a, env));
    case Op::Neg: {
      Value v = evaluate(*e.a, env);
      if (v.is_int()) return -v.as_int();
      if (v.is_real()) return -v.as_number();
      if (v.is_null()) return v;
      throw ExprTypeError("negating " + v.type_name());
    }
    case Op::And: return truthy(evaluate(*e.a, env)) && truthy(evaluate(*e.b, env));
    case Op::Or: return truthy(evaluate(*e.a, env)) || truthy(evaluate(*e.b, env));
    case Op::Eq: return evaluate(*e.a, env) == evaluate(*e.b, env);
    case Op::Ne: return !(evaluate(*e.a, env) == evaluate(*e.b, env));
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge: {
      Value a = evaluate(*e.a, env), b = evaluate(*e.b, env);
      if (a.is_null() || b.is_null()) return false;
      int c = compare(a, b);
      if (e.op == Op::Lt) return c < 0;
      if (e.op == Op::Le) return c <= 0;
      if (e.op == Op::Gt) return c > 0;
      return c >= 0;
    }
    default:
      return arith(e.op, evaluate(*e.a, env), evaluate(*e.b, env));
  }
}

bool evaluate_guard(const Expr& e, const Environment& env) { return truthy(evaluate(e, env)); }

std::optional<Value> constant_value(const Expr& e) {
  using Op = Expr::Op;
  switch (e.op) {
    case Op::Lit:
      return e.lit;
    case Op::Neg:
      if (auto v = constant_value(*e.a); v && v->is_number())
        return v->is_int() ? Value(-v->as_int()) : Value(-v->as_number());
      return std::nullopt;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      auto a = constant_value(*e.a), b = constant_value(*e.b);
      if (!a || !b) return std::nullopt;
      try {
        return arith(e.op, *a, *b);
      } catch (const Error&) {
        return std::nullopt;
      }
    }
    default:
      return std::nullopt;
  }
}

}  // namespace cftv::btm
