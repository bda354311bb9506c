#include "cftv/fixtures.hpp"

#include <filesystem>

#include "cftv/io.hpp"

namespace cftv::fx {

using nlohmann::json;

namespace {

struct Part {
  std::string id;
  std::vector<std::string> inports;                   // each with IFM "i_<port>" fed by the upstream OFM
  std::vector<std::string> bes;
  std::vector<std::pair<std::string, json>> ofms;     // id -> CFT rule over IFMs/BEs
  std::vector<std::pair<std::string, json>> outputs;  // port -> simulated rule over inports/flags
};

struct Link {
  std::string from_part, from_ofm, to_part, to_port;
};

std::string instance(const std::string& part) { return "L_" + part; }

// OFM ids double as output port names, so CFT and simulation line up one to one.
void add_rule(json& cft, const json& rule, const std::string& dst, int& gates) {
  if (rule.is_string()) {
    cft["edges"].push_back({{"src", rule}, {"dst", dst}});
    return;
  }
  std::string kind = rule.contains("and") ? "AND" : "OR";
  std::string g = "g" + std::to_string(++gates);
  cft["gates"].push_back({{"id", g}, {"kind", kind}});
  cft["edges"].push_back({{"src", g}, {"dst", dst}});
  for (const auto& r : rule.begin().value()) add_rule(cft, r, g, gates);
}

Fixture assemble(const std::string& name, const std::vector<Part>& parts, const std::vector<Link>& links) {
  Fixture f;
  f.name = name;
  json comps = json::array(), cons = json::array(), entities = json::array(), bindings = json::array();
  json lits = json::object(), mons = json::object();
  for (const auto& p : parts) {
    json cft{{"basic_events", json::array()}, {"ifms", json::array()}, {"ofms", json::array()},
             {"gates", json::array()}, {"edges", json::array()}};
    for (const auto& b : p.bes) {
      cft["basic_events"].push_back({{"id", b}, {"fit", 10}});
      lits[p.id + "." + b] = {{"target", instance(p.id) + "." + b}, {"templates", {"stuck_at"}}, {"params", {{"value", 1}}}};
    }
    for (const auto& port : p.inports) {
      auto up = std::find_if(links.begin(), links.end(),
                             [&](const Link& l) { return l.to_part == p.id && l.to_port == port; });
      cft["ifms"].push_back({{"id", "i_" + port}, {"class", "content"}, {"port", port}, {"source", up->from_ofm}});
    }
    json outports = json::array();
    int gates = 0;
    for (const auto& [ofm, rule] : p.ofms) {
      cft["ofms"].push_back({{"id", ofm}, {"class", "content"}, {"port", ofm}});
      add_rule(cft, rule, ofm, gates);
      outports.push_back(ofm);
      mons[p.id + "." + ofm] = {{"signal", instance(p.id) + "." + ofm}, {"eps_t", "0 s"}};
    }
    comps.push_back({{"id", p.id}, {"inports", p.inports}, {"outports", outports}, {"cft", cft}});
    json outputs = json::object();
    for (const auto& [port, rule] : p.outputs) outputs[port] = rule;
    entities.push_back({{"type", "Logic"},
                        {"name", instance(p.id)},
                        {"params", {{"inports", p.inports}, {"flags", p.bes}, {"outputs", outputs}, {"period", "100 ms"}}}});
  }
  for (const auto& l : links) {
    cons.push_back({{"from", l.from_part + "." + l.from_ofm}, {"to", l.to_part + "." + l.to_port}});
    bindings.push_back({{"from", instance(l.from_part) + "." + l.from_ofm}, {"to", instance(l.to_part) + "." + l.to_port}});
  }
  f.model_doc = {{"components", comps}, {"connections", cons}};
  f.model = load_system(f.model_doc);
  f.config = sim::SimulationConfig::from_json(
      {{"entities", entities}, {"bindings", bindings}, {"trace", {"*"}}, {"stop_time", "1 s"}, {"seed", 0}});
  f.bindings_doc = {{"literals", lits}, {"monitors", mons}};
  f.bindings = tg::BindingMap::from_json(f.bindings_doc);
  f.btm_doc = {{"name", "stuck_at"},
               {"clocks", {"c"}},
               {"placeholders", {"target", "value", "t_start"}},
               {"states", {{{"name", "ok"}, {"initial", true}}, {{"name", "stuck"}}}},
               {"transitions",
                {{{"src", "ok"}, {"tgt", "stuck"}, {"guard", "clock(c) == ${t_start}"},
                  {"actions", {"force(${target}, ${value})"}}}}}};
  f.library.emplace("stuck_at", btm::parse_btm(f.btm_doc));
  return f;
}

json any(const char* op, std::vector<json> xs) { return {{op, xs}}; }

}  // namespace

std::vector<std::string> fixture_names() {
  return {"or_single", "and_single", "chain", "fan_out", "masked_and", "extra_path"};
}

Fixture build_fixture(const std::string& name) {
  using O = ver::Outcome;
  Fixture f;
  if (name == "or_single") {
    json r = any("or", {"b1", "b2"});
    f = assemble(name, {{"c", {}, {"b1", "b2"}, {{"f", r}}, {{"f", r}}}}, {});
    f.expected = {{"c.f|c.b1", O::Confirmed}, {"c.f|c.b2", O::Confirmed}};
  } else if (name == "and_single") {
    json r = any("and", {"b1", "b2"});
    f = assemble(name, {{"c", {}, {"b1", "b2"}, {{"f", r}}, {{"f", r}}}}, {});
    f.expected = {{"c.f|c.b1+c.b2", O::Confirmed}};
  } else if (name == "chain") {
    f = assemble(name,
                 {{"a", {}, {"b1"}, {{"fa", "b1"}}, {{"fa", "b1"}}},
                  {"b", {"in"}, {"b2"}, {{"fb", any("or", {"i_in", "b2"})}}, {{"fb", any("or", {"in", "b2"})}}}},
                 {{"a", "fa", "b", "in"}});
    // a.fa feeds b inside scope "all", so only b.fb is a scope OFM there.
    f.expected = {{"b.fb|a.b1", O::Confirmed}, {"b.fb|b.b2", O::Confirmed}};
  } else if (name == "fan_out") {
    f = assemble(name,
                 {{"a", {}, {"b1"}, {{"fa", "b1"}}, {{"fa", "b1"}}},
                  {"b", {"in"}, {}, {{"fb", "i_in"}}, {{"fb", "in"}}},
                  {"c", {"in"}, {}, {{"fc", "i_in"}}, {{"fc", "in"}}}},
                 {{"a", "fa", "b", "in"}, {"a", "fa", "c", "in"}});
    f.expected = {{"b.fb|a.b1", O::Confirmed}, {"c.fc|a.b1", O::Confirmed}};
  } else if (name == "masked_and") {
    // Modeled as b1 AND b2; the implementation fails on b1 alone.
    f = assemble(name, {{"c", {}, {"b1", "b2"}, {{"f", any("and", {"b1", "b2"})}}, {{"f", "b1"}}}}, {});
    f.expected = {{"c.f|c.b1+c.b2", O::MaskedSubsetEffect}};
  } else if (name == "extra_path") {
    // b1 also corrupts o2, which the CFT does not model.
    f = assemble(name, {{"c", {}, {"b1", "b2"}, {{"f1", "b1"}, {"f2", "b2"}}, {{"f1", "b1"}, {"f2", any("or", {"b1", "b2"})}}}},
                 {});
    f.expected = {{"c.f1|c.b1", O::Confirmed}, {"c.f2|c.b2", O::Confirmed}};
    f.expected_paths = {"c.b1 -> c.f2"};
  } else {
    throw BadParameter("unknown fixture '" + name + "'");
  }
  return f;
}

std::vector<std::string> export_fixture(const std::string& name, const std::string& dir) {
  namespace fs = std::filesystem;
  Fixture f = build_fixture(name);
  std::vector<std::string> written;
  auto put = [&](const std::string& file, const json& doc) {
    std::string path = (fs::path(dir) / file).string();
    write_file_atomic(path, doc.dump(2) + "\n");
    written.push_back(path);
  };
  put(name + ".cft.json", f.model_doc);
  put(name + ".sim.json", f.config.to_json());
  put(name + ".bind.json", f.bindings_doc);
  put("btm/stuck_at.btm.json", f.btm_doc);
  return written;
}

}  // namespace cftv::fx
