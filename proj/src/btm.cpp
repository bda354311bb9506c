#include "cftv/btm.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <tuple>
#include <regex>

namespace cftv::btm {

using nlohmann::json;

namespace {

const std::regex kPlaceholder(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");

void scan_placeholders(const json& j, std::set<std::string>& out) {
  if (j.is_string()) {
    const std::string& s = j.get_ref<const std::string&>();
    for (std::sregex_iterator it(s.begin(), s.end(), kPlaceholder), end; it != end; ++it) out.insert((*it)[1]);
  } else if (j.is_array() || j.is_object()) {
    for (const auto& e : j) scan_placeholders(e, out);
  }
}

json substitute(const json& j, const std::map<std::string, std::string>& bindings) {
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    std::string out;
    std::size_t last = 0;
    for (std::sregex_iterator it(s.begin(), s.end(), kPlaceholder), end; it != end; ++it) {
      out += s.substr(last, it->position() - last);
      auto b = bindings.find((*it)[1]);
      out += b == bindings.end() ? it->str() : b->second;
      last = it->position() + it->length();
    }
    return out + s.substr(last);
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& e : j) out.push_back(substitute(e, bindings));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = substitute(v, bindings);
    return out;
  }
  return j;
}

std::vector<std::string> string_list(const json& doc, const char* key, const std::string& where) {
  std::vector<std::string> out;
  if (!doc.contains(key)) return out;
  if (!doc.at(key).is_array()) throw SchemaError(where + ": '" + key + "' must be an array");
  for (const auto& e : doc.at(key)) {
    if (!e.is_string()) throw SchemaError(where + ": '" + key + "' entries must be strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

// Parses a document whose placeholders have already been replaced.
BtmDefinition parse_concrete(const json& doc, const std::string& name) {
  BtmDefinition d;
  d.name = name;
  d.clocks = string_list(doc, "clocks", name);
  if (doc.contains("locals")) {
    if (!doc.at("locals").is_object()) throw SchemaError(name + ": 'locals' must be an object");
    for (const auto& [k, v] : doc.at("locals").items()) d.locals[k] = from_json(v);
  }
  if (doc.contains("events")) {
    const json& ev = doc.at("events");
    if (!ev.is_object()) throw SchemaError(name + ": 'events' must be an object");
    d.events_in = string_list(ev, "in", name);
    d.events_out = string_list(ev, "out", name);
  }
  if (!doc.contains("states") || !doc.at("states").is_array() || doc.at("states").empty())
    throw SchemaError(name + ": at least one state required");
  std::map<std::string, std::size_t> index;
  int initial = 0;
  for (const auto& s : doc.at("states")) {
    if (!s.is_object() || !s.contains("name") || !s.at("name").is_string())
      throw SchemaError(name + ": state entries need a name");
    BtmState st{s.at("name").get<std::string>(), s.value("initial", false)};
    if (!index.emplace(st.name, d.states.size()).second)
      throw SchemaError(name + ": duplicate state '" + st.name + "'");
    initial += st.initial;
    d.states.push_back(st);
  }
  if (initial != 1) throw SchemaError(name + ": exactly one initial state required");

  Declarations decl = d.declarations();
  for (const auto& t : doc.value("transitions", json::array())) {
    if (!t.is_object()) throw SchemaError(name + ": transitions must be objects");
    BtmTransition tr;
    for (auto [key, slot] : {std::pair{"src", &tr.src}, std::pair{"tgt", &tr.tgt}}) {
      if (!t.contains(key) || !t.at(key).is_string()) throw SchemaError(name + ": transition needs '" + key + "'");
      auto it = index.find(t.at(key).get<std::string>());
      if (it == index.end()) throw SchemaError(name + ": unknown state '" + t.at(key).get<std::string>() + "'");
      *slot = it->second;
    }
    tr.guard_text = t.value("guard", "");
    if (tr.guard_text.find_first_not_of(" \t") != std::string::npos) {
      tr.guard = parse_expr(tr.guard_text);
      check_guard(*tr.guard, decl);
    }
    tr.action_texts = string_list(t, "actions", name);
    for (const auto& a : tr.action_texts) {
      tr.actions.push_back(parse_action(a));
      check_action(tr.actions.back(), decl);
    }
    d.transitions.push_back(std::move(tr));
  }
  return d;
}

}  // namespace

std::size_t BtmDefinition::initial_state() const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].initial) return i;
  return 0;
}

Declarations BtmDefinition::declarations() const {
  Declarations d;
  d.clocks.insert(clocks.begin(), clocks.end());
  for (const auto& [k, _] : locals) d.locals.insert(k);
  d.events_in.insert(events_in.begin(), events_in.end());
  d.events_out.insert(events_out.begin(), events_out.end());
  return d;
}

std::vector<std::string> BtmDefinition::paths() const {
  std::vector<std::string> out;
  for (const auto& t : transitions) {
    if (t.guard) collect_paths(*t.guard, out);
    for (const auto& a : t.actions) {
      if (a.kind == Action::Kind::Force || a.kind == Action::Kind::Release) out.push_back(a.target);
      if (a.value) collect_paths(*a.value, out);
    }
  }
  std::vector<std::string> unique;
  for (auto& p : out)
    if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(std::move(p));
  return unique;
}

BtmDefinition parse_btm(const json& doc) {
  if (!doc.is_object()) throw SchemaError("BTM document must be an object");
  if (!doc.contains("name") || !doc.at("name").is_string()) throw SchemaError("BTM needs a string 'name'");
  std::string name = doc.at("name").get<std::string>();
  std::vector<std::string> declared = string_list(doc, "placeholders", name);
  std::set<std::string> used;
  scan_placeholders(doc, used);
  for (const auto& u : used)
    if (std::find(declared.begin(), declared.end(), u) == declared.end())
      throw SchemaError(name + ": placeholder '${" + u + "}' is not declared");

  std::map<std::string, std::string> stand_in;
  for (const auto& p : declared) {
    if (p == "target") stand_in[p] = "placeholder.target";
    else if (p == "t_start") stand_in[p] = "0 s";
    else if (p == "period") stand_in[p] = "1 ms";
    else stand_in[p] = "0";
  }
  json concrete = substitute(doc, stand_in);
  BtmDefinition d = parse_concrete(concrete, name);
  d.placeholders = declared;
  d.source = doc;
  return d;
}

BtmDefinition load_btm_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  try {
    return parse_btm(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

BtmDefinition instantiate(const BtmDefinition& def, const std::map<std::string, std::string>& bindings) {
  for (const auto& p : def.placeholders)
    if (!bindings.count(p)) throw UnboundPlaceholder(def.name + ": no binding for '${" + p + "}'");
  json doc = substitute(def.source, bindings);
  doc.erase("placeholders");
  BtmDefinition d = parse_concrete(doc, def.name);
  d.source = doc;
  return d;
}

std::string placeholder_text(const json& value) {
  if (value.is_string()) {
    const std::string& s = value.get_ref<const std::string&>();
    try {
      parse_expr(s);
      return s;
    } catch (const ExprSyntaxError&) {
      return json(s).dump();
    }
  }
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  return value.dump();
}

// --- instance -------------------------------------------------------------------------

namespace {

class SimEnvironment final : public Environment {
 public:
  SimEnvironment(const BtmInstance& inst, sim::Simulation& sim, const std::set<std::string>& pending)
      : inst_(inst), sim_(sim), pending_(pending) {}

  Time clock(const std::string& name) const override { return inst_.clock(name, sim_.now()); }
  Value var(const std::string& path) const override { return sim_.read_signal(path); }
  Value local(const std::string& name) const override {
    auto it = inst_.locals().find(name);
    return it == inst_.locals().end() ? Value{} : it->second;
  }
  bool event(const std::string& name) const override { return pending_.count(name) > 0; }

 private:
  const BtmInstance& inst_;
  sim::Simulation& sim_;
  const std::set<std::string>& pending_;
};

void collect_events(const Expr& e, std::vector<std::string>& out) {
  if (e.op == Expr::Op::Event) out.push_back(e.name);
  if (e.a) collect_events(*e.a, out);
  if (e.b) collect_events(*e.b, out);
}

}  // namespace

BtmInstance::BtmInstance(BtmDefinition def)
    : def_(std::move(def)), state_(def_.initial_state()), locals_(def_.locals) {
  if (def_.is_template()) throw UnboundPlaceholder(def_.name + ": template used without instantiation");
  for (const auto& c : def_.clocks) reset_at_[c] = 0;
}

Time BtmInstance::clock(const std::string& name, Time now) const {
  auto it = reset_at_.find(name);
  return it == reset_at_.end() ? now : now - it->second;
}

std::optional<std::size_t> BtmInstance::step(sim::Simulation& sim, std::set<std::string>& pending,
                                             std::vector<std::string>& emitted) {
  try {
    SimEnvironment env(*this, sim, pending);
    for (std::size_t i = 0; i < def_.transitions.size(); ++i) {
      const BtmTransition& t = def_.transitions[i];
      if (t.src != state_) continue;
      if (t.guard && !evaluate_guard(*t.guard, env)) continue;
      if (t.guard) {
        std::vector<std::string> used;
        collect_events(*t.guard, used);
        for (const auto& e : used) pending.erase(e);
      }
      for (const Action& a : t.actions) {
        switch (a.kind) {
          case Action::Kind::Force:
            sim.force(a.target, evaluate(*a.value, env));
            break;
          case Action::Kind::Release:
            sim.release(a.target);
            break;
          case Action::Kind::Set:
            locals_[a.target] = evaluate(*a.value, env);
            break;
          case Action::Kind::Reset:
            reset_at_[a.target] = sim.now();
            break;
          case Action::Kind::Emit:
            emitted.push_back(a.target);
            break;
        }
      }
      state_ = t.tgt;
      return i;
    }
    return std::nullopt;
  } catch (const ActionError&) {
    throw;
  } catch (const Error& e) {
    throw ActionError(def_.name + ": " + e.what());
  }
}

std::optional<Time> BtmInstance::next_wakeup(Time now) const {
  std::optional<Time> best;
  auto consider = [&](Time t) {
    if (t > now && (!best || t < *best)) best = t;
  };
  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    using Op = Expr::Op;
    bool cmp = e.op == Op::Eq || e.op == Op::Ge || e.op == Op::Gt || e.op == Op::Le || e.op == Op::Lt;
    if (cmp) {
      Op op = e.op;
      const Expr* clk = e.a.get();
      const Expr* other = e.b.get();
      if (clk->op != Op::Clock) {
        std::swap(clk, other);
        if (op == Op::Gt) op = Op::Lt;
        else if (op == Op::Ge) op = Op::Le;
        else if (op == Op::Lt) op = Op::Gt;
        else if (op == Op::Le) op = Op::Ge;
      }
      if (clk->op == Op::Clock) {
        auto k = constant_value(*other);
        auto r = reset_at_.find(clk->name);
        if (k && k->is_number() && r != reset_at_.end()) {
          Time lim = k->is_int() ? k->as_int() : static_cast<Time>(k->as_number());
          if (op == Op::Eq || op == Op::Ge) consider(r->second + lim);
          else if (op == Op::Gt) consider(r->second + lim + 1);
        }
        return;
      }
    }
    if (e.a) walk(*e.a);
    if (e.b) walk(*e.b);
  };
  for (const auto& t : def_.transitions)
    if (t.src == state_ && t.guard) walk(*t.guard);
  return best;
}

// --- controller -------------------------------------------------------------------------

void Controller::install(sim::Simulation& sim, BtmDefinition def) {
  for (const auto& t : def.transitions)
    for (const auto& a : t.actions)
      if ((a.kind == Action::Kind::Force || a.kind == Action::Kind::Release) && !sim.has_injectable(a.target))
        throw ActionError(def.name + ": no injectable '" + a.target + "'");
  for (const auto& p : def.paths()) {
    if (sim.has_injectable(p)) continue;
    if (!sim.has_signal(p)) throw ActionError(def.name + ": no signal or injectable '" + p + "'");
  }
  instances_.emplace_back(std::move(def));
}

void Controller::evaluate(sim::Simulation& sim) {
  if (sim.now() != pending_at_) {
    pending_.clear();
    pending_at_ = sim.now();
  }
  for (std::size_t pass = 0; pass <= instances_.size(); ++pass) {
    bool emitted_any = false;
    for (std::size_t i = 0; i < instances_.size(); ++i) {
      BtmInstance& inst = instances_[i];
      for (std::size_t k = 0; k < inst.definition().states.size(); ++k) {
        std::vector<std::string> emitted;
        auto fired = inst.step(sim, pending_, emitted);
        if (!fired) break;
        firings_.emplace_back(sim.now(), i, *fired);
        for (auto& e : emitted) pending_.insert(e);
        emitted_any |= !emitted.empty();
        const BtmTransition& t = inst.definition().transitions[*fired];
        if (t.src == t.tgt) break;
      }
    }
    if (!emitted_any) break;
  }
}

std::optional<Time> Controller::next_wakeup(Time now) const {
  std::optional<Time> best;
  for (const auto& inst : instances_)
    if (auto w = inst.next_wakeup(now); w && (!best || *w < *best)) best = w;
  return best;
}

}  // namespace cftv::btm
