#include "cftv/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iterator>
#include <sstream>

#include "cftv/errors.hpp"

namespace cftv {

Scope Scope::parse(const std::string& text, const SystemModel& model) {
  Scope s;
  if (text == "all" || text == "*") {
    for (const auto& c : model.components) s.members.insert(c.id);
    return s;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) s.members.insert(item);
  return s;
}

std::string Scope::label() const {
  std::string out;
  for (const auto& m : members) {
    if (!out.empty()) out += ",";
    out += m;
  }
  return out;
}

namespace {

void check_scope(const SystemModel& model, const Scope& scope) {
  if (scope.members.empty()) throw EmptyScope("scope has no members");
  for (const auto& m : scope.members)
    if (!model.component(m)) throw UnknownComponent("unknown component '" + m + "' in scope");
}

}  // namespace

ScopeInterface scope_interface(const SystemModel& model, const Scope& scope) {
  check_scope(model, scope);
  ScopeInterface out;
  for (const auto& c : model.components) {
    if (!scope.members.count(c.id) || !c.cft) continue;
    for (const auto& f : c.cft->ifms) {
      const Connection* in = model.incoming({c.id, f.port});
      if (!in || !scope.members.count(in->from.component))
        out.input_failure_modes.push_back({c.id, f});
    }
    for (const auto& f : c.cft->ofms) {
      auto outs = model.outgoing({c.id, f.port});
      bool boundary = outs.empty() || std::any_of(outs.begin(), outs.end(), [&](const Connection* x) {
                        return !scope.members.count(x->to.component);
                      });
      if (boundary) out.output_failure_modes.push_back({c.id, f});
    }
    for (const auto& b : c.cft->basic_events) out.basic_events.push_back({c.id, b});
  }
  auto by_ref = [](const auto& a, const auto& b) { return a.ref() < b.ref(); };
  std::sort(out.input_failure_modes.begin(), out.input_failure_modes.end(), by_ref);
  std::sort(out.output_failure_modes.begin(), out.output_failure_modes.end(), by_ref);
  std::sort(out.basic_events.begin(), out.basic_events.end(), by_ref);
  return out;
}

namespace {

/// Removes constant-false nodes. Returns nullptr when the node itself is
/// constant false.
FtNodePtr drop_false(const FtNodePtr& n, std::map<const FtNode*, FtNodePtr>& memo) {
  if (auto it = memo.find(n.get()); it != memo.end()) return it->second;
  FtNodePtr result = n;
  if (n->kind == FtNode::Kind::False) {
    result = nullptr;
  } else if (n->kind == FtNode::Kind::And || n->kind == FtNode::Kind::Or) {
    auto copy = std::make_shared<FtNode>(*n);
    copy->children.clear();
    bool dead = false;
    for (const auto& c : n->children) {
      FtNodePtr s = drop_false(c, memo);
      if (s) copy->children.push_back(s);
      else if (n->kind == FtNode::Kind::And) dead = true;
    }
    if (dead || copy->children.empty()) result = nullptr;
    else result = copy;
  }
  memo[n.get()] = result;
  return result;
}

}  // namespace

CftElement reduce_scope(const SystemModel& model, const Scope& scope) {
  ScopeInterface iface = scope_interface(model, scope);
  FaultTreeBuilder builder(model, scope.members);
  CftElement el;
  for (const auto& f : iface.input_failure_modes) {
    FailureMode m = f.mode;
    m.id = f.ref();
    m.port = f.component + "." + f.mode.port;
    m.source.clear();
    el.ifms.push_back(std::move(m));
  }
  for (const auto& b : iface.basic_events) {
    BasicEvent e = b.event;
    e.id = b.ref();
    el.basic_events.push_back(std::move(e));
  }

  std::map<const FtNode*, FtNodePtr> simplified;
  std::set<const FtNode*> emitted;
  std::function<void(const FtNode&)> emit_gate = [&](const FtNode& n) {
    if (n.kind != FtNode::Kind::And && n.kind != FtNode::Kind::Or) return;
    if (!emitted.insert(&n).second) return;
    el.gates.push_back({n.id, n.kind == FtNode::Kind::And ? GateKind::And : GateKind::Or});
    for (const auto& c : n.children) {
      el.edges.push_back({c->id, n.id});
      emit_gate(*c);
    }
  };
  for (const auto& f : iface.output_failure_modes) {
    FailureMode m = f.mode;
    m.id = f.ref();
    m.port = f.component + "." + f.mode.port;
    FtNodePtr root = drop_false(builder.ofm(f.component, f.mode.id), simplified);
    if (root) {
      emit_gate(*root);
      el.edges.push_back({root->id, m.id});
    }
    el.ofms.push_back(std::move(m));
  }
  return el;
}

McaResult minimal_cut_sets(const CftElement& element, const std::string& top) {
  if (!element.ofm(top)) throw UnknownTop("no output failure mode '" + top + "'");
  McaResult result{top, {}};
  auto roots = element.inputs_of(top);
  if (roots.empty()) return result;

  // Index nodes; literals get indices [0, n_literals), gates the rest.
  std::vector<std::string> names;
  std::map<std::string, int> index;
  auto add = [&](const std::string& id) {
    index[id] = static_cast<int>(names.size());
    names.push_back(id);
  };
  std::vector<std::string> literal_ids;
  for (const auto& f : element.ifms) literal_ids.push_back(f.id);
  for (const auto& b : element.basic_events) literal_ids.push_back(b.id);
  std::sort(literal_ids.begin(), literal_ids.end());
  for (const auto& id : literal_ids) add(id);
  const int n_literals = static_cast<int>(names.size());
  for (const auto& g : element.gates) add(g.id);

  std::vector<GateKind> kind(names.size());
  std::vector<std::vector<int>> children(names.size());
  for (const auto& g : element.gates) {
    int gi = index.at(g.id);
    kind[gi] = g.kind;
    for (const auto& in : element.inputs_of(g.id)) {
      auto it = index.find(in);
      if (it == index.end())
        throw UnsupportedGate("gate '" + g.id + "' has input '" + in +
                              "' that is neither a literal nor a gate");
      children[gi].push_back(it->second);
    }
  }
  auto root_it = index.find(roots.front());
  if (roots.size() != 1 || root_it == index.end())
    throw UnsupportedGate("OFM '" + top + "' must have one literal or gate input");

  // Cut families per gate, bottom-up and memoized so shared subtrees are
  // expanded once. Every family is kept minimal, which bounds intermediate
  // sizes by the final answer rather than by the number of tree paths.
  using Row = std::vector<int>;
  using Family = std::vector<Row>;
  auto minimize = [](Family rows) {
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    Family out;
    for (auto& r : rows) {
      bool subsumed = std::any_of(out.begin(), out.end(), [&](const Row& m) {
        return std::includes(r.begin(), r.end(), m.begin(), m.end());
      });
      if (!subsumed) out.push_back(std::move(r));
    }
    return out;
  };
  std::map<int, Family> memo;
  std::set<int> on_stack;
  std::function<const Family&(int)> family = [&](int n) -> const Family& {
    if (auto it = memo.find(n); it != memo.end()) return it->second;
    if (n < n_literals) return memo[n] = Family{Row{n}};
    if (!on_stack.insert(n).second) throw PropagationCycle("cycle through gate '" + names[n] + "'");
    Family acc;
    if (kind[n] == GateKind::And) {
      acc = {Row{}};
      for (int c : children[n]) {
        const Family& f = family(c);
        Family next;
        for (const auto& a : acc)
          for (const auto& b : f) {
            Row r;
            std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
            next.push_back(std::move(r));
          }
        acc = minimize(std::move(next));
      }
    } else {
      for (int c : children[n]) {
        const Family& f = family(c);
        acc.insert(acc.end(), f.begin(), f.end());
      }
      acc = minimize(std::move(acc));
    }
    on_stack.erase(n);
    return memo[n] = std::move(acc);
  };
  Family minimal = family(root_it->second);
  for (const auto& r : minimal) {
    CutSet cut;
    for (int x : r) cut.literals.push_back(names[x]);  // indices follow sorted ids
    result.cuts.push_back(std::move(cut));
  }
  std::sort(result.cuts.begin(), result.cuts.end());
  return result;
}

McaResult minimal_cut_sets(const SystemModel& model, const Scope& scope, const std::string& top) {
  return minimal_cut_sets(reduce_scope(model, scope), top);
}

std::map<std::string, double> basic_event_rates(const SystemModel& model) {
  std::map<std::string, double> out;
  for (const auto& c : model.components)
    if (c.cft)
      for (const auto& b : c.cft->basic_events)
        if (b.fit) out[c.id + "." + b.id] = *b.fit;
  return out;
}

double literal_probability(const std::string& literal,
                           const std::map<std::string, double>& rates_fit, double mission_hours,
                           const std::map<std::string, double>& ifm_probabilities) {
  if (auto it = ifm_probabilities.find(literal); it != ifm_probabilities.end()) return it->second;
  if (auto it = rates_fit.find(literal); it != rates_fit.end()) {
    double lambda = it->second * 1e-9;  // per hour
    return -std::expm1(-lambda * mission_hours);
  }
  throw MissingRate("no failure rate or probability for '" + literal + "'");
}

double top_probability(const McaResult& mca, const std::map<std::string, double>& rates_fit,
                       double mission_hours,
                       const std::map<std::string, double>& ifm_probabilities) {
  if (!(mission_hours > 0.0) || !std::isfinite(mission_hours))
    throw BadParameter("mission time must be positive");
  double sum = 0.0;
  for (const auto& cut : mca.cuts) {
    double p = 1.0;
    for (const auto& lit : cut.literals)
      p *= literal_probability(lit, rates_fit, mission_hours, ifm_probabilities);
    sum += p;
  }
  return std::clamp(sum, 0.0, 1.0);
}

}  // namespace cftv
