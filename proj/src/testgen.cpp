#include "cftv/testgen.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "cftv/hash.hpp"

namespace cftv::tg {

using nlohmann::json;

std::string to_string(MonitorRole r) {
  switch (r) {
    case MonitorRole::Target: return "target";
    case MonitorRole::Predicted: return "predicted";
    default: return "unpredicted";
  }
}

namespace {

MonitorRole parse_role(const std::string& s) {
  if (s == "target") return MonitorRole::Target;
  if (s == "predicted") return MonitorRole::Predicted;
  if (s == "unpredicted") return MonitorRole::Unpredicted;
  throw SchemaError("unknown monitor role '" + s + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

bool subset_of(const CutSet& small, const CutSet& big) {
  return std::includes(big.literals.begin(), big.literals.end(), small.literals.begin(), small.literals.end());
}

json case_key(const TestCase& tc) {
  json btms = json::array();
  for (const auto& b : tc.btms) btms.push_back({b.literal, b.template_name, b.bindings});
  json mons = json::array();
  for (const auto& m : tc.monitors) mons.push_back({m.ofm, m.spec.to_json()});
  return {btms, mons};
}

}  // namespace

// --- binding map ----------------------------------------------------------------

BindingMap BindingMap::from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("binding map must be an object");
  BindingMap b;
  try {
    const json literals_doc = doc.value("literals", json::object());
    for (const auto& [lit, j] : literals_doc.items()) {
      LiteralBinding lb;
      lb.target = j.at("target").get<std::string>();
      if (j.at("templates").is_string()) lb.templates.push_back(j.at("templates").get<std::string>());
      else lb.templates = j.at("templates").get<std::vector<std::string>>();
      if (lb.templates.empty()) throw SchemaError(lit + ": at least one template required");
      lb.params = j.value("params", json::object());
      if (!lb.params.is_object()) throw SchemaError(lit + ": params must be an object");
      const json template_params_doc = j.value("template_params", json::object());
      for (const auto& [t, p] : template_params_doc.items()) lb.template_params[t] = p;
      b.literals[lit] = std::move(lb);
    }
    const json monitors_doc = doc.value("monitors", json::object());
    for (const auto& [ofm, j] : monitors_doc.items())
      b.monitors[ofm] = mon::MonitorSpec::from_json(j);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed binding map: ") + e.what());
  }
  return b;
}

BindingMap BindingMap::from_file(const std::string& path) { return from_json(read_json_file(path)); }

json BindingMap::to_json() const {
  json lits = json::object();
  for (const auto& [lit, lb] : literals) {
    json j{{"target", lb.target}, {"templates", lb.templates}};
    if (!lb.params.empty()) j["params"] = lb.params;
    if (!lb.template_params.empty()) j["template_params"] = lb.template_params;
    lits[lit] = j;
  }
  json mons = json::object();
  for (const auto& [ofm, m] : monitors) mons[ofm] = m.to_json();
  return {{"literals", lits}, {"monitors", mons}};
}

BtmLibrary load_btm_library(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw SchemaError("BTM directory '" + dir + "' not found");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename().string().ends_with(".btm.json")) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  BtmLibrary lib;
  for (const auto& f : files) {
    btm::BtmDefinition d = btm::load_btm_file(f.string());
    std::string name = d.name;
    if (!lib.emplace(name, std::move(d)).second) throw SchemaError("duplicate BTM name '" + name + "'");
  }
  return lib;
}

// --- suites ---------------------------------------------------------------------

json TestSuite::to_json() const {
  json cs = json::array();
  for (const auto& tc : cases) {
    json btms = json::array();
    for (const auto& b : tc.btms)
      btms.push_back({{"literal", b.literal}, {"template", b.template_name}, {"bindings", b.bindings}});
    json mons = json::array();
    for (const auto& m : tc.monitors)
      mons.push_back({{"ofm", m.ofm}, {"class", m.failure_class}, {"role", to_string(m.role)},
                      {"monitor", m.spec.to_json()}});
    cs.push_back({{"id", tc.id},
                  {"scope", tc.scope},
                  {"targets", tc.targets},
                  {"cut", tc.cut.literals},
                  {"cross", tc.cross},
                  {"btms", btms},
                  {"monitors", mons},
                  {"subsets", tc.subsets}});
  }
  json tpl = json::object();
  for (const auto& [k, v] : templates) tpl[k] = v;
  return {{"suite_id", id}, {"model_hash", model_hash}, {"model", model}, {"templates", tpl}, {"cases", cs}};
}

TestSuite TestSuite::from_json(const json& doc) {
  TestSuite s;
  try {
    s.id = doc.at("suite_id").get<std::string>();
    s.model_hash = doc.value("model_hash", "");
    s.model = doc.value("model", json::object());
    const json templates_doc = doc.value("templates", json::object());
    for (const auto& [k, v] : templates_doc.items()) s.templates[k] = v;
    for (const auto& c : doc.at("cases")) {
      TestCase tc;
      tc.id = c.at("id").get<std::string>();
      tc.scope = c.at("scope").get<std::vector<std::string>>();
      tc.targets = c.at("targets").get<std::vector<std::string>>();
      tc.cut.literals = c.at("cut").get<std::vector<std::string>>();
      tc.cross = c.value("cross", false);
      for (const auto& b : c.at("btms"))
        tc.btms.push_back({b.at("literal").get<std::string>(), b.at("template").get<std::string>(),
                           b.value("bindings", std::map<std::string, std::string>{})});
      for (const auto& m : c.at("monitors"))
        tc.monitors.push_back({m.at("ofm").get<std::string>(), m.value("class", ""),
                               parse_role(m.value("role", "target")), mon::MonitorSpec::from_json(m.at("monitor"))});
      tc.subsets = c.value("subsets", std::vector<std::vector<std::string>>{});
      if (tc.cut.literals.empty()) throw SchemaError(tc.id + ": empty cut");
      s.cases.push_back(std::move(tc));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed test suite: ") + e.what());
  }
  return s;
}

TestSuite TestSuite::from_file(const std::string& path) { return from_json(read_json_file(path)); }

BtmLibrary TestSuite::library() const {
  BtmLibrary lib;
  for (const auto& [name, src] : templates) lib.emplace(name, btm::parse_btm(src));
  return lib;
}

std::string model_hash(const SystemModel& model) { return hex64(fnv1a64(save_system(model).dump())); }

// --- generation -----------------------------------------------------------------

namespace {

BoundBtm bind_literal(const std::string& literal, const LiteralBinding& lb, const std::string& tpl,
                      const BtmLibrary& library) {
  auto it = library.find(tpl);
  if (it == library.end()) throw UnknownTemplate("literal " + literal + ": unknown BTM template '" + tpl + "'");
  const btm::BtmDefinition& def = it->second;
  json params = lb.params;
  if (auto o = lb.template_params.find(tpl); o != lb.template_params.end())
    for (const auto& [k, v] : o->second.items()) params[k] = v;
  BoundBtm b{literal, tpl, {}};
  for (const auto& p : def.placeholders) {
    if (p == "target") b.bindings[p] = lb.target;
    else if (params.contains(p)) b.bindings[p] = btm::placeholder_text(params.at(p));
    else if (p != "t_start")
      throw UnboundPlaceholder("literal " + literal + ", template " + tpl + ": no value for '${" + p + "}'");
  }
  // Surface syntax errors now rather than at verification time.
  auto probe = b.bindings;
  probe.emplace("t_start", "0 s");
  btm::instantiate(def, probe);
  return b;
}

std::vector<TestCase> generate(const SystemModel& model, const Scope& scope, const BindingMap& bindings,
                               const BtmLibrary& library, bool cross) {
  ScopeInterface iface = scope_interface(model, scope);
  CftElement element = reduce_scope(model, scope);
  std::vector<std::string> scope_members(scope.members.begin(), scope.members.end());

  std::vector<std::pair<ScopedFailureMode, McaResult>> ofms;
  for (const auto& o : iface.output_failure_modes) {
    if (!bindings.monitors.count(o.ref())) throw MissingBinding("no monitor binding for OFM " + o.ref());
    ofms.emplace_back(o, minimal_cut_sets(element, o.ref()));
  }
  for (const auto& [o, mca] : ofms)
    for (const auto& cut : mca.cuts)
      for (const auto& lit : cut.literals)
        if (!bindings.literals.count(lit)) throw MissingBinding("no injection binding for literal " + lit);

  std::vector<TestCase> out;
  std::map<std::string, std::size_t> seen;  // dedup key -> index in out
  for (const auto& [target, mca] : ofms) {
    for (const auto& cut : mca.cuts) {
      // Cartesian product over template choices, in binding order.
      std::vector<std::size_t> choice(cut.literals.size(), 0);
      while (true) {
        TestCase tc;
        tc.scope = scope_members;
        tc.targets = {target.ref()};
        tc.cut = cut;
        tc.cross = cross;
        std::vector<std::string> tpl_names;
        for (std::size_t i = 0; i < cut.literals.size(); ++i) {
          const auto& lb = bindings.literals.at(cut.literals[i]);
          tc.btms.push_back(bind_literal(cut.literals[i], lb, lb.templates[choice[i]], library));
          tpl_names.push_back(lb.templates[choice[i]]);
        }
        for (const auto& [o, omca] : ofms) {
          bool is_target = o.ref() == target.ref();
          if (!cross && !is_target) continue;
          MonitorRole role = MonitorRole::Target;
          if (!is_target) {
            bool predicted = std::any_of(omca.cuts.begin(), omca.cuts.end(),
                                         [&](const CutSet& c) { return subset_of(c, cut); });
            role = predicted ? MonitorRole::Predicted : MonitorRole::Unpredicted;
          }
          tc.monitors.push_back({o.ref(), o.mode.class_name(), role, bindings.monitors.at(o.ref())});
        }
        if (cut.literals.size() >= 2)
          for (std::size_t skip = 0; skip < cut.literals.size(); ++skip) {
            std::vector<std::string> sub;
            for (std::size_t i = 0; i < cut.literals.size(); ++i)
              if (i != skip) sub.push_back(cut.literals[i]);
            tc.subsets.push_back(sub);
          }
        tc.id = (cross ? "x:" : "") + scope.label() + "|" + target.ref() + "|" + join(cut.literals, "+") + "|" +
                join(tpl_names, "+");

        std::string key = case_key(tc).dump();
        if (auto s = seen.find(key); s != seen.end()) {
          TestCase& first = out[s->second];
          first.targets.push_back(target.ref());
          for (auto& m : first.monitors)
            if (m.ofm == target.ref()) m.role = MonitorRole::Target;
        } else {
          seen.emplace(key, out.size());
          out.push_back(std::move(tc));
        }

        std::size_t k = 0;
        for (; k < choice.size(); ++k) {
          if (++choice[k] < bindings.literals.at(cut.literals[k]).templates.size()) break;
          choice[k] = 0;
        }
        if (k == choice.size()) break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<TestCase> generate_test_cases(const SystemModel& model, const Scope& scope, const BindingMap& bindings,
                                          const BtmLibrary& library) {
  return generate(model, scope, bindings, library, false);
}

std::vector<TestCase> generate_cross_tests(const SystemModel& model, const Scope& scope,
                                           const BindingMap& bindings, const BtmLibrary& library) {
  return generate(model, scope, bindings, library, true);
}

TestSuite build_suite(const SystemModel& model, const std::vector<Scope>& scopes, const BindingMap& bindings,
                      const BtmLibrary& library, bool cross) {
  TestSuite s;
  s.model = save_system(model);
  s.model_hash = model_hash(model);
  std::set<std::string> ids;
  auto add = [&](std::vector<TestCase> cases) {
    for (auto& tc : cases) {
      if (!ids.insert(tc.id).second) continue;  // same scope listed twice
      for (const auto& b : tc.btms) s.templates[b.template_name] = library.at(b.template_name).source;
      s.cases.push_back(std::move(tc));
    }
  };
  for (const auto& scope : scopes) {
    add(generate_test_cases(model, scope, bindings, library));
    if (cross) add(generate_cross_tests(model, scope, bindings, library));
  }
  json cases = s.to_json().at("cases");
  s.id = hex64(fnv1a64(cases.dump()));
  return s;
}

std::vector<std::string> dry_run(const TestSuite& suite, const sim::SimulationConfig& config,
                                 const sim::EntityRegistry& registry) {
  std::vector<std::string> problems;
  sim::Simulation probe(config, registry);
  BtmLibrary lib = suite.library();
  for (const auto& tc : suite.cases) {
    for (const auto& b : tc.btms) {
      auto it = lib.find(b.template_name);
      if (it == lib.end()) {
        problems.push_back(tc.id + ": template '" + b.template_name + "' not embedded");
        continue;
      }
      auto binds = b.bindings;
      binds.emplace("t_start", "0 s");
      try {
        btm::BtmDefinition def = btm::instantiate(it->second, binds);
        for (const auto& p : def.paths())
          if (!probe.has_injectable(p) && !probe.has_signal(p))
            problems.push_back(tc.id + ": BTM " + def.name + " refers to unknown path '" + p + "'");
      } catch (const Error& e) {
        problems.push_back(tc.id + ": " + e.what());
      }
    }
    for (const auto& m : tc.monitors)
      if (!probe.has_signal(m.spec.signal))
        problems.push_back(tc.id + ": monitor for " + m.ofm + " watches unknown signal '" + m.spec.signal + "'");
  }
  return problems;
}

}  // namespace cftv::tg
