#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cftv/model.hpp"

namespace cftv {

/// A subset of components analysed as one unit.
struct Scope {
  std::set<std::string> members;

  /// Parses "a,b,c"; "all" (or "*") selects every component of `model`.
  static Scope parse(const std::string& text, const SystemModel& model);
  std::string label() const;  // members joined by ','
};

/// Failure mode together with its owning component. `ref()` is the
/// qualified id "component.mode" used as literal / OFM reference.
struct ScopedFailureMode {
  std::string component;
  FailureMode mode;

  std::string ref() const { return component + "." + mode.id; }
};

struct ScopedBasicEvent {
  std::string component;
  BasicEvent event;

  std::string ref() const { return component + "." + event.id; }
};

/// Interface sets of a scope, each sorted by qualified id.
struct ScopeInterface {
  std::vector<ScopedFailureMode> input_failure_modes;
  std::vector<ScopedFailureMode> output_failure_modes;
  std::vector<ScopedBasicEvent> basic_events;
};

/// IFMs on inports fed from outside the scope or unconnected; OFMs on
/// outports feeding outside the scope or unconnected; every member's basic
/// events. Throws UnknownComponent, EmptyScope.
ScopeInterface scope_interface(const SystemModel& model, const Scope& scope);

/// Collapses the scope into one CFT element whose node ids are qualified
/// ("component.node"). Connections internal to the scope are spliced by
/// substitution, so the element's only leaves are IFM(S) and B(S).
/// Throws PropagationCycle, UnknownComponent, EmptyScope.
CftElement reduce_scope(const SystemModel& model, const Scope& scope);

struct CutSet {
  std::vector<std::string> literals;  // sorted, unique

  friend auto operator<=>(const CutSet&, const CutSet&) = default;
};

struct McaResult {
  std::string top;
  std::vector<CutSet> cuts;  // sorted, pairwise non-subsuming
};

/// Top-down MOCUS expansion followed by subsumption minimisation.
/// Literals are the element's IFMs and basic events. Throws UnknownTop,
/// UnsupportedGate (an input that is neither a literal nor a gate).
McaResult minimal_cut_sets(const CftElement& element, const std::string& top);

/// Convenience: MCA of a scope OFM ("component.ofm") after reduce_scope.
McaResult minimal_cut_sets(const SystemModel& model, const Scope& scope,
                           const std::string& top);

/// Qualified basic-event id -> FIT for every rated basic event.
std::map<std::string, double> basic_event_rates(const SystemModel& model);

/// Rare-event approximation sum over cuts of the product of literal
/// probabilities; basic events use p = 1 - exp(-lambda T) with lambda taken
/// from FIT. Clamped to [0, 1]. Throws MissingRate, BadParameter.
double top_probability(const McaResult& mca, const std::map<std::string, double>& rates_fit,
                       double mission_hours,
                       const std::map<std::string, double>& ifm_probabilities = {});

/// Probability of one literal under the same rules as top_probability.
double literal_probability(const std::string& literal,
                           const std::map<std::string, double>& rates_fit, double mission_hours,
                           const std::map<std::string, double>& ifm_probabilities);

}  // namespace cftv
