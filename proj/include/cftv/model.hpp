#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace cftv {

enum class FailureClass { Content, Early, Late, Halt, Erratic, Custom };

std::string to_string(FailureClass c);
/// Accepts the five standard names; anything else is rejected.
std::optional<FailureClass> parse_failure_class(const std::string& s);

/// Input or output failure mode. `port` is the inport (IFM) or outport (OFM)
/// it is attached to. For an IFM on a connected inport, `source` names the
/// upstream OFM ("component.ofm") whose occurrence it receives.
struct FailureMode {
  std::string id;
  std::string name;
  FailureClass failure_class = FailureClass::Content;
  std::string custom_class;  // set iff failure_class == Custom
  std::string port;
  std::string source;

  std::string class_name() const;
};

struct BasicEvent {
  std::string id;
  std::string name;
  std::optional<double> fit;  // failures per 1e9 hours
};

enum class GateKind { And, Or };

struct Gate {
  std::string id;
  GateKind kind = GateKind::Or;
};

/// Directed edge from an IFM, basic event or gate to a gate or OFM.
struct Edge {
  std::string src;
  std::string dst;
};

enum class NodeKind { Ifm, Ofm, BasicEvent, Gate, None };

/// Failure logic of one component.
struct CftElement {
  std::vector<FailureMode> ifms;
  std::vector<FailureMode> ofms;
  std::vector<BasicEvent> basic_events;
  std::vector<Gate> gates;
  std::vector<Edge> edges;

  NodeKind kind_of(const std::string& node) const;
  const FailureMode* ifm(const std::string& id) const;
  const FailureMode* ofm(const std::string& id) const;
  const BasicEvent* basic_event(const std::string& id) const;
  const Gate* gate(const std::string& id) const;
  /// Sources of every edge ending in `node`, in document order.
  std::vector<std::string> inputs_of(const std::string& node) const;
};

struct Component {
  std::string id;
  std::vector<std::string> inports;
  std::vector<std::string> outports;
  std::optional<CftElement> cft;

  bool has_inport(const std::string& p) const;
  bool has_outport(const std::string& p) const;
};

struct PortRef {
  std::string component;
  std::string port;

  std::string str() const { return component + "." + port; }
  friend auto operator<=>(const PortRef&, const PortRef&) = default;
};

struct Connection {
  PortRef from;  // outport
  PortRef to;    // inport
};

/// Component architecture plus per-component failure logic. Immutable once
/// loaded; all analyses take it by const reference.
struct SystemModel {
  std::vector<Component> components;
  std::vector<Connection> connections;

  const Component* component(const std::string& id) const;
  /// The connection feeding an inport, if any.
  const Connection* incoming(const PortRef& inport) const;
  std::vector<const Connection*> outgoing(const PortRef& outport) const;
};

/// Qualified upstream OFM of an IFM. `source` may be written qualified
/// ("comp.ofm") or as a bare OFM id resolved through the connection feeding
/// the IFM's inport. Empty if it cannot be resolved.
std::string source_ref(const SystemModel& model, const std::string& component, const FailureMode& ifm);

/// Splits "comp.node" at the first dot.
std::pair<std::string, std::string> split_ref(const std::string& ref);

// --- loading ----------------------------------------------------------------

/// Parses a `.cft.json` document. MTBF inputs (`mtbf_hours`) are converted to
/// FIT. Throws SchemaError, DanglingReference, DuplicateId, UnsupportedGate.
SystemModel load_system(const nlohmann::json& doc);
SystemModel load_system_file(const std::string& path);
nlohmann::json save_system(const SystemModel& model);

// --- validation ---------------------------------------------------------------

enum class Severity { Warning, Error };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string location;
  std::string message;
};

std::vector<Diagnostic> validate(const SystemModel& model);
bool has_errors(const std::vector<Diagnostic>& diags);
nlohmann::json to_json(const Diagnostic& d);

// --- classic fault tree -------------------------------------------------------

struct FtNode;
using FtNodePtr = std::shared_ptr<const FtNode>;

/// Node of a classic fault tree. Subtrees reached along several paths are
/// shared, so the structure is a DAG.
struct FtNode {
  enum class Kind { BasicEvent, External, And, Or, False };
  Kind kind = Kind::False;
  std::string id;  // qualified "component.node"; empty for False
  std::vector<FtNodePtr> children;
};

struct FaultTree {
  std::string top;
  FtNodePtr root;

  /// Qualified ids of basic-event and external leaves, sorted.
  std::vector<std::string> leaves() const;
  bool evaluate(const std::set<std::string>& active) const;
};

bool evaluate(const FtNode& node, const std::set<std::string>& active);

/// Expands OFMs through connections into a tree over basic events. IFMs whose
/// inport is unconnected, or fed from a component outside `scope` (when
/// given), become External leaves. Memoized per node.
class FaultTreeBuilder {
 public:
  explicit FaultTreeBuilder(const SystemModel& model,
                            std::optional<std::set<std::string>> scope = {});

  /// Throws UnknownTop, PropagationCycle.
  FtNodePtr ofm(const std::string& component, const std::string& ofm_id);

 private:
  FtNodePtr node(const std::string& component, const std::string& id);
  FtNodePtr ifm(const Component& comp, const FailureMode& fm);

  const SystemModel& model_;
  std::optional<std::set<std::string>> scope_;
  std::map<std::string, FtNodePtr> memo_;
  std::set<std::string> active_;
};

/// Throws UnknownTop, PropagationCycle.
FaultTree to_classic_fault_tree(const SystemModel& model, const std::string& top);

}  // namespace cftv
