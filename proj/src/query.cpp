#include <cctype>
#include <charconv>
#include <map>
#include <set>

#include "cftv/monitors.hpp"

namespace cftv::mon {

namespace {

QueryPtr node(Query::Op op, QueryPtr a = nullptr, QueryPtr b = nullptr, bool universal = true) {
  auto q = std::make_shared<Query>();
  q->op = op;
  q->a = std::move(a);
  q->b = std::move(b);
  q->universal = universal;
  return q;
}

class QueryParser {
 public:
  explicit QueryParser(const std::string& text) : s_(text) {}

  QueryPtr parse() {
    QueryPtr q = disjunction();
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return q;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ExprSyntaxError("query: " + what + " at offset " + std::to_string(pos_) + " in '" + s_ + "'");
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(const std::string& tok) {
    skip();
    if (s_.compare(pos_, tok.size(), tok) != 0) return false;
    pos_ += tok.size();
    return true;
  }

  void expect(const std::string& tok) {
    if (!accept(tok)) fail("expected '" + tok + "'");
  }

  // Keyword followed by a non-identifier character.
  bool keyword(const std::string& kw) {
    skip();
    if (s_.compare(pos_, kw.size(), kw) != 0) return false;
    std::size_t after = pos_ + kw.size();
    if (after < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[after])) || s_[after] == '_')) return false;
    pos_ = after;
    return true;
  }

  QueryPtr disjunction() {
    QueryPtr q = conjunction();
    while (accept("||")) q = node(Query::Op::Or, q, conjunction());
    return q;
  }

  QueryPtr conjunction() {
    QueryPtr q = unary();
    while (accept("&&")) q = node(Query::Op::And, q, unary());
    return q;
  }

  QueryPtr unary() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '!' && s_.compare(pos_, 2, "!=") != 0) {
      ++pos_;
      return node(Query::Op::Not, unary());
    }
    for (char path : {'A', 'E'}) {
      bool universal = path == 'A';
      for (auto [suffix, op] : {std::pair{'G', Query::Op::G}, std::pair{'F', Query::Op::F}, std::pair{'X', Query::Op::X}}) {
        if (keyword(std::string{path, suffix})) {
          expect("(");
          QueryPtr inner = disjunction();
          expect(")");
          return node(op, inner, nullptr, universal);
        }
      }
      skip();
      if (s_.compare(pos_, 2, std::string{path, '['}) == 0) {
        pos_ += 2;
        QueryPtr lhs = disjunction();
        if (!keyword("U")) fail("expected 'U'");
        QueryPtr rhs = disjunction();
        expect("]");
        return node(Query::Op::U, lhs, rhs, universal);
      }
    }
    if (accept("(")) {
      QueryPtr q = disjunction();
      expect(")");
      return q;
    }
    if (keyword("true")) return node(Query::Op::True);
    if (keyword("false")) return node(Query::Op::False);
    if (keyword("sig")) return atom();
    fail("expected formula");
  }

  QueryPtr atom() {
    expect("(");
    std::size_t start = pos_;
    int depth = 0;
    while (pos_ < s_.size() && !(s_[pos_] == ')' && depth == 0)) {
      if (s_[pos_] == '[') ++depth;
      if (s_[pos_] == ']') --depth;
      ++pos_;
    }
    std::string path = s_.substr(start, pos_ - start);
    while (!path.empty() && std::isspace(static_cast<unsigned char>(path.back()))) path.pop_back();
    while (!path.empty() && std::isspace(static_cast<unsigned char>(path.front()))) path.erase(0, 1);
    if (path.empty()) fail("empty signal path");
    expect(")");
    auto q = std::make_shared<Query>();
    q->op = Query::Op::Atom;
    q->signal = path;
    for (const char* rel : {"==", "!=", "<=", ">=", "<", ">"})
      if (accept(rel)) {
        q->relation = rel;
        break;
      }
    if (q->relation.empty()) fail("expected comparison");
    q->literal = literal();
    return q;
  }

  Value literal() {
    skip();
    if (pos_ >= s_.size()) fail("expected literal");
    char c = s_[pos_];
    if (c == '"' || c == '\'') {
      ++pos_;
      std::string out;
      while (pos_ < s_.size() && s_[pos_] != c) out += s_[pos_++];
      if (pos_ >= s_.size()) fail("unterminated string");
      ++pos_;
      return out;
    }
    if (keyword("true")) return true;
    if (keyword("false")) return false;
    if (keyword("null")) return Value{};
    std::size_t start = pos_;
    if (c == '-') ++pos_;
    if (s_.compare(pos_, 2, "0x") == 0) {
      pos_ += 2;
      std::size_t d = pos_;
      while (pos_ < s_.size() && std::isxdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(s_.data() + d, s_.data() + pos_, v, 16);
      if (d == pos_ || ec != std::errc{}) fail("bad hex literal");
      return c == '-' ? -v : v;
    }
    bool real = false;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      real |= s_[pos_] == '.';
      ++pos_;
    }
    std::string num = s_.substr(start, pos_ - start);
    if (num.empty() || num == "-") fail("expected literal");
    try {
      if (real) return std::stod(num);
      return static_cast<std::int64_t>(std::stoll(num));
    } catch (const std::logic_error&) {
      fail("bad number");
    }
  }

  std::string s_;
  std::size_t pos_ = 0;
};

void signals_of(const Query& q, std::set<std::string>& out) {
  if (q.op == Query::Op::Atom) out.insert(q.signal);
  if (q.a) signals_of(*q.a, out);
  if (q.b) signals_of(*q.b, out);
}

using State = std::map<std::string, Value>;

bool holds(const State& s, const Query& q) {
  auto it = s.find(q.signal);
  if (it == s.end() || it->second.is_null()) return q.relation == "!=" ? !q.literal.is_null() : q.literal.is_null() && q.relation == "==";
  const Value& v = it->second;
  if (q.relation == "==") return v == q.literal;
  if (q.relation == "!=") return !(v == q.literal);
  int c;
  if (v.is_number() && q.literal.is_number()) {
    if (v.is_int() && q.literal.is_int()) c = v.as_int() < q.literal.as_int() ? -1 : v.as_int() > q.literal.as_int();
    else c = v.as_number() < q.literal.as_number() ? -1 : v.as_number() > q.literal.as_number();
  } else if (v.is_string() && q.literal.is_string()) {
    c = v.as_string() < q.literal.as_string() ? -1 : v.as_string() > q.literal.as_string();
  } else {
    return false;
  }
  if (q.relation == "<") return c < 0;
  if (q.relation == "<=") return c <= 0;
  if (q.relation == ">") return c > 0;
  return c >= 0;
}

std::vector<bool> sat(const std::vector<State>& states, const Query& q) {
  const std::size_t n = states.size();
  std::vector<bool> out(n, false);
  switch (q.op) {
    case Query::Op::True:
      out.assign(n, true);
      break;
    case Query::Op::False:
      break;
    case Query::Op::Atom:
      for (std::size_t i = 0; i < n; ++i) out[i] = holds(states[i], q);
      break;
    case Query::Op::Not: {
      auto a = sat(states, *q.a);
      for (std::size_t i = 0; i < n; ++i) out[i] = !a[i];
      break;
    }
    case Query::Op::And:
    case Query::Op::Or: {
      auto a = sat(states, *q.a), b = sat(states, *q.b);
      for (std::size_t i = 0; i < n; ++i) out[i] = q.op == Query::Op::And ? a[i] && b[i] : a[i] || b[i];
      break;
    }
    case Query::Op::X: {
      auto a = sat(states, *q.a);
      for (std::size_t i = 0; i + 1 < n; ++i) out[i] = a[i + 1];
      break;
    }
    case Query::Op::G: {
      auto a = sat(states, *q.a);
      bool acc = true;
      for (std::size_t i = n; i-- > 0;) out[i] = acc = acc && a[i];
      break;
    }
    case Query::Op::F: {
      auto a = sat(states, *q.a);
      bool acc = false;
      for (std::size_t i = n; i-- > 0;) out[i] = acc = acc || a[i];
      break;
    }
    case Query::Op::U: {
      auto a = sat(states, *q.a), b = sat(states, *q.b);
      bool acc = false;
      for (std::size_t i = n; i-- > 0;) out[i] = acc = b[i] || (a[i] && acc);
      break;
    }
  }
  return out;
}

// Truth on a trace without states: G holds vacuously, eventualities fail.
bool vacuous(const Query& q) {
  switch (q.op) {
    case Query::Op::True:
    case Query::Op::G:
      return true;
    case Query::Op::Not:
      return !vacuous(*q.a);
    case Query::Op::And:
      return vacuous(*q.a) && vacuous(*q.b);
    case Query::Op::Or:
      return vacuous(*q.a) || vacuous(*q.b);
    default:
      return false;
  }
}

std::string literal_text(const Value& v) {
  if (v.is_string()) return nlohmann::json(v.as_string()).dump();
  return to_string(v);
}

}  // namespace

QueryPtr parse_query(const std::string& text) { return QueryParser(text).parse(); }

std::string to_string(const Query& q) {
  std::string p = q.universal ? "A" : "E";
  switch (q.op) {
    case Query::Op::True: return "true";
    case Query::Op::False: return "false";
    case Query::Op::Atom: return "sig(" + q.signal + ") " + q.relation + " " + literal_text(q.literal);
    case Query::Op::Not: return "!(" + to_string(*q.a) + ")";
    case Query::Op::And: return "(" + to_string(*q.a) + " && " + to_string(*q.b) + ")";
    case Query::Op::Or: return "(" + to_string(*q.a) + " || " + to_string(*q.b) + ")";
    case Query::Op::G: return p + "G(" + to_string(*q.a) + ")";
    case Query::Op::F: return p + "F(" + to_string(*q.a) + ")";
    case Query::Op::X: return p + "X(" + to_string(*q.a) + ")";
    case Query::Op::U: return p + "[" + to_string(*q.a) + " U " + to_string(*q.b) + "]";
  }
  return "";
}

bool check_query(const Trace& trace, const Query& q) {
  std::set<std::string> sigs;
  signals_of(q, sigs);
  for (const auto& s : sigs)
    if (!trace.declares(s)) throw UnknownSignalInQuery("query signal '" + s + "' is not traced");
  std::vector<State> states;
  State current;
  std::optional<Time> last;
  for (const auto& r : trace.records) {
    if (!sigs.count(r.signal)) continue;
    if (last && *last != r.t) states.push_back(current);
    current[r.signal] = r.value;
    last = r.t;
  }
  if (last) states.push_back(current);
  if (states.empty()) return vacuous(q);
  return sat(states, q)[0];
}

}  // namespace cftv::mon
