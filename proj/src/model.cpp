#include "cftv/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "cftv/errors.hpp"

namespace cftv {

std::string to_string(FailureClass c) {
  switch (c) {
    case FailureClass::Content: return "content";
    case FailureClass::Early: return "early";
    case FailureClass::Late: return "late";
    case FailureClass::Halt: return "halt";
    case FailureClass::Erratic: return "erratic";
    case FailureClass::Custom: return "custom";
  }
  return "custom";
}

std::optional<FailureClass> parse_failure_class(const std::string& s) {
  if (s == "content") return FailureClass::Content;
  if (s == "early") return FailureClass::Early;
  if (s == "late") return FailureClass::Late;
  if (s == "halt") return FailureClass::Halt;
  if (s == "erratic") return FailureClass::Erratic;
  return std::nullopt;
}

std::string FailureMode::class_name() const {
  if (failure_class == FailureClass::Custom) return "custom:" + custom_class;
  return to_string(failure_class);
}

NodeKind CftElement::kind_of(const std::string& node) const {
  if (ifm(node)) return NodeKind::Ifm;
  if (ofm(node)) return NodeKind::Ofm;
  if (basic_event(node)) return NodeKind::BasicEvent;
  if (gate(node)) return NodeKind::Gate;
  return NodeKind::None;
}

namespace {
template <typename T>
const T* find_by_id(const std::vector<T>& items, const std::string& id) {
  for (const auto& x : items)
    if (x.id == id) return &x;
  return nullptr;
}
}  // namespace

const FailureMode* CftElement::ifm(const std::string& id) const {
  return find_by_id(ifms, id);
}
const FailureMode* CftElement::ofm(const std::string& id) const {
  return find_by_id(ofms, id);
}
const BasicEvent* CftElement::basic_event(const std::string& id) const {
  return find_by_id(basic_events, id);
}
const Gate* CftElement::gate(const std::string& id) const {
  return find_by_id(gates, id);
}

std::vector<std::string> CftElement::inputs_of(const std::string& node) const {
  std::vector<std::string> out;
  for (const auto& e : edges)
    if (e.dst == node) out.push_back(e.src);
  return out;
}

bool Component::has_inport(const std::string& p) const {
  return std::find(inports.begin(), inports.end(), p) != inports.end();
}
bool Component::has_outport(const std::string& p) const {
  return std::find(outports.begin(), outports.end(), p) != outports.end();
}

const Component* SystemModel::component(const std::string& id) const {
  return find_by_id(components, id);
}

const Connection* SystemModel::incoming(const PortRef& inport) const {
  for (const auto& c : connections)
    if (c.to == inport) return &c;
  return nullptr;
}

std::vector<const Connection*> SystemModel::outgoing(const PortRef& outport) const {
  std::vector<const Connection*> out;
  for (const auto& c : connections)
    if (c.from == outport) out.push_back(&c);
  return out;
}

std::pair<std::string, std::string> split_ref(const std::string& ref) {
  auto dot = ref.find('.');
  if (dot == std::string::npos) return {ref, ""};
  return {ref.substr(0, dot), ref.substr(dot + 1)};
}

// --- validation ---------------------------------------------------------------

namespace {

class DiagnosticSink {
 public:
  void error(std::string code, std::string loc, std::string msg) {
    diags_.push_back({Severity::Error, std::move(code), std::move(loc), std::move(msg)});
  }
  void warning(std::string code, std::string loc, std::string msg) {
    diags_.push_back({Severity::Warning, std::move(code), std::move(loc), std::move(msg)});
  }
  std::vector<Diagnostic> take() { return std::move(diags_); }

 private:
  std::vector<Diagnostic> diags_;
};

void validate_element(const SystemModel& model, const Component& comp,
                      const CftElement& cft, DiagnosticSink& sink) {
  const std::string& cid = comp.id;
  std::set<std::string> ids;
  auto claim = [&](const std::string& id) {
    if (!ids.insert(id).second)
      sink.error("duplicate-id", cid + "." + id, "duplicate CFT node id");
  };
  for (const auto& f : cft.ifms) claim(f.id);
  for (const auto& f : cft.ofms) claim(f.id);
  for (const auto& b : cft.basic_events) claim(b.id);
  for (const auto& g : cft.gates) claim(g.id);

  for (const auto& f : cft.ifms) {
    std::string loc = cid + "." + f.id;
    if (!comp.has_inport(f.port)) {
      sink.error("ifm-port", loc, "IFM attached to unknown inport '" + f.port + "'");
      continue;
    }
    const Connection* in = model.incoming({cid, f.port});
    if (in && f.source.empty()) {
      sink.error("ifm-source", loc, "IFM on connected inport has no source OFM");
    } else if (!in && !f.source.empty()) {
      sink.error("ifm-source", loc, "IFM names a source but its inport is unconnected");
    } else if (in) {
      auto [sc, so] = split_ref(source_ref(model, cid, f));
      const Component* up = model.component(sc);
      const FailureMode* ofm = (up && up->cft) ? up->cft->ofm(so) : nullptr;
      if (!ofm) {
        sink.error("ifm-source", loc, "source OFM '" + f.source + "' not found");
      } else if (sc != in->from.component || ofm->port != in->from.port) {
        sink.error("ifm-source", loc,
                   "source OFM '" + f.source + "' is not on the connected outport " +
                       in->from.str());
      }
    }
  }
  for (const auto& f : cft.ofms)
    if (!comp.has_outport(f.port))
      sink.error("ofm-port", cid + "." + f.id,
                 "OFM attached to unknown outport '" + f.port + "'");

  for (const auto& b : cft.basic_events)
    if (b.fit && !(*b.fit > 0.0 && std::isfinite(*b.fit)))
      sink.error("rate", cid + "." + b.id, "failure rate must be positive and finite");

  std::map<std::string, std::vector<std::string>> succ;
  for (const auto& e : cft.edges) {
    std::string loc = cid + "." + e.src + "->" + e.dst;
    NodeKind s = cft.kind_of(e.src);
    NodeKind d = cft.kind_of(e.dst);
    if (s == NodeKind::None || d == NodeKind::None) {
      sink.error("edge-endpoint", loc, "edge references unknown node");
      continue;
    }
    if (s == NodeKind::Ofm)
      sink.error("edge-direction", loc, "OFM cannot be an edge source");
    if (d == NodeKind::Ifm || d == NodeKind::BasicEvent)
      sink.error("edge-direction", loc, "edge must end in a gate or OFM");
    succ[e.src].push_back(e.dst);
  }
  for (const auto& f : cft.ofms) {
    auto n = cft.inputs_of(f.id).size();
    if (n != 1)
      sink.error("ofm-in-degree", cid + "." + f.id,
                 "OFM must have exactly one incoming edge, has " + std::to_string(n));
  }
  for (const auto& g : cft.gates) {
    auto n = cft.inputs_of(g.id).size();
    if (n == 0)
      sink.error("gate-arity", cid + "." + g.id, "gate has no inputs");
    else if (g.kind == GateKind::And && n < 2)
      sink.error("and-arity", cid + "." + g.id, "AND gate arity < 2");
  }

  // Cycle detection over the node graph (iterative colouring).
  std::map<std::string, int> colour;
  std::function<bool(const std::string&)> visit = [&](const std::string& n) {
    colour[n] = 1;
    for (const auto& m : succ[n]) {
      if (colour[m] == 1) return true;
      if (colour[m] == 0 && visit(m)) return true;
    }
    colour[n] = 2;
    return false;
  };
  for (const auto& [n, _] : succ) {
    if (colour[n] == 0 && visit(n)) {
      sink.error("cft-cycle", cid, "cycle in CFT element");
      break;
    }
  }
}

}  // namespace

std::vector<Diagnostic> validate(const SystemModel& model) {
  DiagnosticSink sink;
  std::set<std::string> comp_ids;
  for (const auto& c : model.components) {
    if (!comp_ids.insert(c.id).second)
      sink.error("duplicate-id", c.id, "duplicate component id");
    std::set<std::string> ports;
    for (const auto& p : c.inports)
      if (!ports.insert(p).second)
        sink.error("duplicate-id", c.id + "." + p, "duplicate port id");
    for (const auto& p : c.outports)
      if (!ports.insert(p).second)
        sink.error("duplicate-id", c.id + "." + p, "duplicate port id");
  }

  std::set<PortRef> fed;
  for (const auto& con : model.connections) {
    std::string loc = con.from.str() + "->" + con.to.str();
    const Component* a = model.component(con.from.component);
    const Component* b = model.component(con.to.component);
    if (!a || !a->has_outport(con.from.port))
      sink.error("dangling-reference", loc, "no outport " + con.from.str());
    if (!b || !b->has_inport(con.to.port))
      sink.error("dangling-reference", loc, "no inport " + con.to.str());
    if (con.from.component == con.to.component)
      sink.error("self-connection", loc, "connection joins ports of the same component");
    if (!fed.insert(con.to).second)
      sink.error("fan-in", con.to.str(), "inport has more than one incoming connection");
  }

  for (const auto& c : model.components)
    if (c.cft) validate_element(model, c, *c.cft, sink);

  return sink.take();
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

nlohmann::json to_json(const Diagnostic& d) {
  return {{"severity", d.severity == Severity::Error ? "error" : "warning"},
          {"code", d.code},
          {"location", d.location},
          {"message", d.message}};
}

// --- classic fault tree -------------------------------------------------------

bool evaluate(const FtNode& node, const std::set<std::string>& active) {
  switch (node.kind) {
    case FtNode::Kind::BasicEvent:
    case FtNode::Kind::External:
      return active.count(node.id) > 0;
    case FtNode::Kind::And:
      return std::all_of(node.children.begin(), node.children.end(),
                         [&](const FtNodePtr& c) { return evaluate(*c, active); });
    case FtNode::Kind::Or:
      return std::any_of(node.children.begin(), node.children.end(),
                         [&](const FtNodePtr& c) { return evaluate(*c, active); });
    case FtNode::Kind::False:
      return false;
  }
  return false;
}

std::vector<std::string> FaultTree::leaves() const {
  std::set<std::string> out;
  std::set<const FtNode*> seen;
  std::function<void(const FtNode&)> walk = [&](const FtNode& n) {
    if (!seen.insert(&n).second) return;
    if (n.kind == FtNode::Kind::BasicEvent || n.kind == FtNode::Kind::External)
      out.insert(n.id);
    for (const auto& c : n.children) walk(*c);
  };
  if (root) walk(*root);
  return {out.begin(), out.end()};
}

bool FaultTree::evaluate(const std::set<std::string>& active) const {
  return root && cftv::evaluate(*root, active);
}

FaultTreeBuilder::FaultTreeBuilder(const SystemModel& model,
                                   std::optional<std::set<std::string>> scope)
    : model_(model), scope_(std::move(scope)) {}

FtNodePtr FaultTreeBuilder::ofm(const std::string& component, const std::string& ofm_id) {
  const Component* comp = model_.component(component);
  if (!comp || !comp->cft || !comp->cft->ofm(ofm_id))
    throw UnknownTop("no output failure mode '" + component + "." + ofm_id + "'");
  return node(component, ofm_id);
}

FtNodePtr FaultTreeBuilder::node(const std::string& component, const std::string& id) {
  std::string key = component + "." + id;
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  if (!active_.insert(key).second)
    throw PropagationCycle("failure propagation cycle through " + key);

  const Component& comp = *model_.component(component);
  const CftElement& cft = *comp.cft;
  FtNodePtr result;
  switch (cft.kind_of(id)) {
    case NodeKind::BasicEvent: {
      auto n = std::make_shared<FtNode>();
      n->kind = FtNode::Kind::BasicEvent;
      n->id = key;
      result = n;
      break;
    }
    case NodeKind::Ifm:
      result = ifm(comp, *cft.ifm(id));
      break;
    case NodeKind::Ofm: {
      auto inputs = cft.inputs_of(id);
      if (inputs.size() != 1)
        throw PropagationCycle("OFM " + key + " has no single defining input");
      result = node(component, inputs.front());
      break;
    }
    case NodeKind::Gate: {
      auto n = std::make_shared<FtNode>();
      n->kind = cft.gate(id)->kind == GateKind::And ? FtNode::Kind::And : FtNode::Kind::Or;
      n->id = key;
      for (const auto& in : cft.inputs_of(id)) n->children.push_back(node(component, in));
      result = n;
      break;
    }
    case NodeKind::None:
      throw DanglingReference("unknown CFT node " + key);
  }
  active_.erase(key);
  memo_[key] = result;
  return result;
}

FtNodePtr FaultTreeBuilder::ifm(const Component& comp, const FailureMode& fm) {
  const Connection* in = model_.incoming({comp.id, fm.port});
  bool external = !in || (scope_ && !scope_->count(in->from.component));
  if (external) {
    auto n = std::make_shared<FtNode>();
    n->kind = FtNode::Kind::External;
    n->id = comp.id + "." + fm.id;
    return n;
  }
  if (fm.source.empty()) return std::make_shared<FtNode>();  // never occurs
  auto [sc, so] = split_ref(source_ref(model_, comp.id, fm));
  const Component* up = model_.component(sc);
  if (!up || !up->cft || !up->cft->ofm(so))
    throw DanglingReference("IFM source '" + fm.source + "' not found");
  return node(sc, so);
}

std::string source_ref(const SystemModel& model, const std::string& component, const FailureMode& ifm) {
  if (ifm.source.empty()) return {};
  if (ifm.source.find('.') != std::string::npos) return ifm.source;
  const Connection* in = model.incoming({component, ifm.port});
  return in ? in->from.component + "." + ifm.source : std::string{};
}

FaultTree to_classic_fault_tree(const SystemModel& model, const std::string& top) {
  auto [comp, ofm] = split_ref(top);
  FaultTreeBuilder builder(model);
  return FaultTree{top, builder.ofm(comp, ofm)};
}

}  // namespace cftv
