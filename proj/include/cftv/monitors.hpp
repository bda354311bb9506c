#pragma once

#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cftv/model.hpp"
#include "cftv/sim.hpp"
#include "json.hpp"

namespace cftv::mon {

using sim::Trace;
using sim::TraceRecord;

// --- alignment ------------------------------------------------------------------

struct AlignedPair {
  std::optional<TraceRecord> ref;
  std::optional<TraceRecord> inj;
  /// inj.t - ref.t for matched pairs.
  Time dt = 0;
  bool matched() const { return ref && inj; }
};

/// Time pairing ranks matchings by number of pairs first; Value pairing
/// ranks by number of equal-valued pairs first (suits counters and ids,
/// where a lagging stream should pair with its own values).
enum class Pairing { Time, Value };

/// Order-preserving matching of the records of one signal. Among matchings
/// that only pair records within `window` of each other, picks one with the
/// most pairs, then the smallest total |dt|, then the fewest value
/// differences. Unmatched records appear as ref-only / inj-only entries.
/// Output is ordered by time.
std::vector<AlignedPair> align(const std::vector<TraceRecord>& ref, const std::vector<TraceRecord>& inj,
                               Time window, Pairing pairing = Pairing::Time);

/// Median gap between consecutive records; kTimeMax with fewer than two.
Time default_window(const std::vector<TraceRecord>& ref);

// --- classification -------------------------------------------------------------

enum class Comparator { Exact, Numeric };

struct Evidence {
  std::optional<TraceRecord> ref;
  std::optional<TraceRecord> inj;
  Time dt = 0;
  FailureClass failure_class = FailureClass::Erratic;
};

struct Classification {
  std::set<FailureClass> classes;
  std::vector<Evidence> evidence;

  bool empty() const { return classes.empty(); }
  bool has(FailureClass c) const { return classes.count(c) > 0; }
  /// halt > late/early/content > erratic.
  std::optional<FailureClass> primary() const;
  std::vector<std::string> class_names() const;
};

Classification classify(const std::vector<AlignedPair>& pairs, Time eps_t, Comparator cmp = Comparator::Exact,
                        double abs_tol = 0.0);

// --- temporal queries -----------------------------------------------------------

struct Query;
using QueryPtr = std::shared_ptr<const Query>;

struct Query {
  enum class Op { True, False, Atom, Not, And, Or, G, F, X, U };
  Op op = Op::True;
  bool universal = true;  // A- vs E-form; identical on linear traces
  std::string signal;     // Atom
  std::string relation;   // Atom: == != < <= > >=
  Value literal;          // Atom
  QueryPtr a, b;
};

/// Grammar: AG(f) AF(f) AX(f) EG(f) EF(f) EX(f) A[f U g] E[f U g], !, &&, ||,
/// parentheses, true/false, atoms `sig(path) op literal`. Throws ExprSyntaxError.
QueryPtr parse_query(const std::string& text);
std::string to_string(const Query& q);

/// Finite linear-trace semantics over the states of the signals the query
/// mentions (one state per distinct timestamp). Throws UnknownSignalInQuery.
bool check_query(const Trace& trace, const Query& q);

// --- monitors -------------------------------------------------------------------

struct MonitorSpec {
  std::string signal;
  Time eps_t = 0;
  std::optional<Time> window;  // default: median reference gap
  Pairing pairing = Pairing::Time;
  Comparator comparator = Comparator::Exact;
  double abs_tol = 0.0;
  std::string query;  // empty = none

  nlohmann::json to_json() const;
  /// Throws SchemaError.
  static MonitorSpec from_json(const nlohmann::json& j);
};

struct MonitorVerdict {
  Classification classification;
  std::optional<bool> query_ref;
  std::optional<bool> query_inj;
  bool query_mismatch = false;

  bool triggered() const { return !classification.empty() || query_mismatch; }
};

/// Throws UnknownSignal if the signal is not declared by both traces.
MonitorVerdict monitor_verdict(const Trace& ref, const Trace& inj, const MonitorSpec& m);

nlohmann::json to_json(const Evidence& e);

}  // namespace cftv::mon
