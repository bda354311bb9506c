#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cftv/expr.hpp"
#include "cftv/sim.hpp"
#include "json.hpp"

namespace cftv::btm {

struct BtmState {
  std::string name;
  bool initial = false;
};

struct BtmTransition {
  std::size_t src = 0;
  std::size_t tgt = 0;
  std::string guard_text;  // empty = always enabled
  ExprPtr guard;
  std::vector<std::string> action_texts;
  std::vector<Action> actions;
};

/// Behavioral threat model: a timed automaton whose actions force/release
/// simulation variables. A definition with placeholders (`${target}` etc.) is
/// a template; `instantiate` binds them.
struct BtmDefinition {
  std::string name;
  std::vector<std::string> clocks;
  std::map<std::string, Value> locals;
  std::vector<std::string> events_in;
  std::vector<std::string> events_out;
  std::vector<BtmState> states;
  std::vector<BtmTransition> transitions;
  std::vector<std::string> placeholders;
  nlohmann::json source;  // document as written (placeholders unexpanded)

  bool is_template() const { return !placeholders.empty(); }
  std::size_t initial_state() const;
  Declarations declarations() const;
  /// Every injector/signal path mentioned in guards and actions, first
  /// occurrence order, without repeats.
  std::vector<std::string> paths() const;
};

/// Throws SchemaError, ExprSyntaxError, ExprTypeError. Templates are checked
/// with neutral stand-in values for their placeholders.
BtmDefinition parse_btm(const nlohmann::json& doc);
BtmDefinition load_btm_file(const std::string& path);

/// Substitutes placeholders textually and re-parses. Throws
/// UnboundPlaceholder if a declared placeholder has no binding.
BtmDefinition instantiate(const BtmDefinition& def, const std::map<std::string, std::string>& bindings);

/// Renders a binding value as expression text: strings that already parse as
/// expressions (e.g. "0x00", "170 ms") are inserted verbatim, other strings
/// quoted, numbers in decimal.
std::string placeholder_text(const nlohmann::json& value);

/// Running automaton bound to a simulation.
class BtmInstance {
 public:
  explicit BtmInstance(BtmDefinition def);

  const BtmDefinition& definition() const { return def_; }
  std::size_t state() const { return state_; }
  const std::string& state_name() const { return def_.states[state_].name; }
  Time clock(const std::string& name, Time now) const;
  const std::map<std::string, Value>& locals() const { return locals_; }

  /// Fires the first enabled transition from the current state, if any.
  /// Events in `pending` enable event() guards; the fired transition consumes
  /// the ones it tested and `emitted` receives its emit() actions.
  /// Throws ActionError.
  std::optional<std::size_t> step(sim::Simulation& sim, std::set<std::string>& pending,
                                  std::vector<std::string>& emitted);

  /// Earliest time strictly after `now` at which a clock guard of the
  /// current state could become true.
  std::optional<Time> next_wakeup(Time now) const;

 private:
  BtmDefinition def_;
  std::size_t state_;
  std::map<std::string, Time> reset_at_;
  std::map<std::string, Value> locals_;
};

/// Injection control module: evaluates all installed BTM instances at every
/// kernel evaluation point.
class Controller final : public sim::EvaluationHook {
 public:
  /// Checks that every path the definition mentions exists in `sim`; throws
  /// ActionError otherwise.
  void install(sim::Simulation& sim, BtmDefinition def);

  void evaluate(sim::Simulation& sim) override;
  std::optional<Time> next_wakeup(Time now) const override;

  const std::vector<BtmInstance>& instances() const { return instances_; }
  /// (time, instance index, transition index) of every firing.
  const std::vector<std::tuple<Time, std::size_t, std::size_t>>& firings() const { return firings_; }

 private:
  std::vector<BtmInstance> instances_;
  std::set<std::string> pending_;
  Time pending_at_ = -1;
  std::vector<std::tuple<Time, std::size_t, std::size_t>> firings_;
};

}  // namespace cftv::btm
