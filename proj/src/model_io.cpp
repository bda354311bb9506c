#include <fstream>
#include <set>

#include "cftv/errors.hpp"
#include "cftv/model.hpp"

namespace cftv {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw SchemaError(where + ": missing key '" + key + "'");
  return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key) {
  if (obj.contains(key) && obj.at(key).is_string()) return obj.at(key).get<std::string>();
  return {};
}

const json& require_array(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array()) throw SchemaError(where + ": '" + key + "' must be an array");
  return v;
}

std::vector<std::string> read_ports(const json& obj, const char* key, const std::string& where) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  for (const auto& p : require_array(obj, key, where)) {
    if (p.is_string()) out.push_back(p.get<std::string>());
    else out.push_back(require_string(p, "id", where + "." + key));
  }
  return out;
}

FailureMode read_failure_mode(const json& j, const std::string& where) {
  FailureMode f;
  f.id = require_string(j, "id", where);
  f.name = j.contains("name") ? require_string(j, "name", where) : f.id;
  std::string cls = require_string(j, "class", where + "." + f.id);
  if (auto c = parse_failure_class(cls)) {
    f.failure_class = *c;
  } else if (cls.rfind("custom:", 0) == 0 && cls.size() > 7) {
    f.failure_class = FailureClass::Custom;
    f.custom_class = cls.substr(7);
  } else {
    throw SchemaError(where + "." + f.id + ": unknown failure class '" + cls + "'");
  }
  f.port = require_string(j, "port", where + "." + f.id);
  f.source = optional_string(j, "source");
  return f;
}

PortRef read_port_ref(const json& obj, const char* key, const std::string& where) {
  std::string s = require_string(obj, key, where);
  auto [c, p] = split_ref(s);
  if (c.empty() || p.empty())
    throw SchemaError(where + ": port reference '" + s + "' must be 'component.port'");
  return {c, p};
}

CftElement read_cft(const json& j, const Component& comp) {
  const std::string where = comp.id + ".cft";
  if (!j.is_object()) throw SchemaError(where + ": must be an object");
  CftElement cft;
  auto each = [&](const char* key, auto fn) {
    if (!j.contains(key)) return;
    for (const auto& x : require_array(j, key, where)) fn(x);
  };
  each("ifms", [&](const json& x) { cft.ifms.push_back(read_failure_mode(x, where)); });
  each("ofms", [&](const json& x) { cft.ofms.push_back(read_failure_mode(x, where)); });
  each("basic_events", [&](const json& x) {
    BasicEvent b;
    b.id = require_string(x, "id", where);
    b.name = x.contains("name") ? require_string(x, "name", where) : b.id;
    if (x.contains("fit")) {
      if (!x.at("fit").is_number()) throw SchemaError(where + "." + b.id + ": fit must be a number");
      b.fit = x.at("fit").get<double>();
    } else if (x.contains("mtbf_hours")) {
      if (!x.at("mtbf_hours").is_number())
        throw SchemaError(where + "." + b.id + ": mtbf_hours must be a number");
      b.fit = 1e9 / x.at("mtbf_hours").get<double>();
    }
    cft.basic_events.push_back(std::move(b));
  });
  each("gates", [&](const json& x) {
    Gate g;
    g.id = require_string(x, "id", where);
    std::string kind = require_string(x, "kind", where + "." + g.id);
    if (kind == "AND" || kind == "and") g.kind = GateKind::And;
    else if (kind == "OR" || kind == "or") g.kind = GateKind::Or;
    else throw UnsupportedGate(where + "." + g.id + ": unsupported gate kind '" + kind + "'");
    cft.gates.push_back(std::move(g));
  });
  each("edges", [&](const json& x) {
    cft.edges.push_back({require_string(x, "src", where), require_string(x, "dst", where)});
  });

  std::set<std::string> ids;
  auto claim = [&](const std::string& id) {
    if (!ids.insert(id).second) throw DuplicateId("duplicate CFT node id " + comp.id + "." + id);
  };
  for (const auto& f : cft.ifms) claim(f.id);
  for (const auto& f : cft.ofms) claim(f.id);
  for (const auto& b : cft.basic_events) claim(b.id);
  for (const auto& g : cft.gates) claim(g.id);

  for (const auto& f : cft.ifms)
    if (!comp.has_inport(f.port))
      throw DanglingReference(comp.id + "." + f.id + ": no inport '" + f.port + "'");
  for (const auto& f : cft.ofms)
    if (!comp.has_outport(f.port))
      throw DanglingReference(comp.id + "." + f.id + ": no outport '" + f.port + "'");
  for (const auto& e : cft.edges)
    for (const auto* end : {&e.src, &e.dst})
      if (!ids.count(*end))
        throw DanglingReference(comp.id + ": edge references unknown node '" + *end + "'");
  return cft;
}

json write_failure_mode(const FailureMode& f, bool ifm) {
  json j{{"id", f.id}, {"name", f.name}, {"class", f.class_name()}, {"port", f.port}};
  if (ifm && !f.source.empty()) j["source"] = f.source;
  return j;
}

}  // namespace

SystemModel load_system(const json& doc) {
  if (!doc.is_object()) throw SchemaError("model document must be a JSON object");
  SystemModel model;
  if (doc.contains("components")) {
    for (const auto& cj : require_array(doc, "components", "model")) {
      Component c;
      c.id = require_string(cj, "id", "component");
      c.inports = read_ports(cj, "inports", c.id);
      c.outports = read_ports(cj, "outports", c.id);
      std::set<std::string> ports;
      for (const auto& p : c.inports)
        if (!ports.insert(p).second) throw DuplicateId("duplicate port " + c.id + "." + p);
      for (const auto& p : c.outports)
        if (!ports.insert(p).second) throw DuplicateId("duplicate port " + c.id + "." + p);
      if (model.component(c.id)) throw DuplicateId("duplicate component " + c.id);
      model.components.push_back(std::move(c));
    }
    // Elements are read after all components exist so error messages can
    // refer to ports by component.
    const auto& arr = doc.at("components");
    for (std::size_t i = 0; i < arr.size(); ++i)
      if (arr[i].contains("cft"))
        model.components[i].cft = read_cft(arr[i].at("cft"), model.components[i]);
  }
  if (doc.contains("connections")) {
    for (const auto& x : require_array(doc, "connections", "model")) {
      Connection con{read_port_ref(x, "from", "connection"), read_port_ref(x, "to", "connection")};
      const Component* a = model.component(con.from.component);
      if (!a || !a->has_outport(con.from.port))
        throw DanglingReference("connection source " + con.from.str() + " is not an outport");
      const Component* b = model.component(con.to.component);
      if (!b || !b->has_inport(con.to.port))
        throw DanglingReference("connection target " + con.to.str() + " is not an inport");
      model.connections.push_back(std::move(con));
    }
  }
  for (const auto& c : model.components) {
    if (!c.cft) continue;
    for (const auto& f : c.cft->ifms) {
      std::string src = source_ref(model, c.id, f);
      if (src.empty()) continue;  // unconnected inport; reported by validate()
      auto [sc, so] = split_ref(src);
      const Component* up = model.component(sc);
      if (!up || !up->cft || !up->cft->ofm(so))
        throw DanglingReference(c.id + "." + f.id + ": source OFM '" + f.source + "' not found");
    }
  }
  return model;
}

SystemModel load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return load_system(doc);
}

json save_system(const SystemModel& model) {
  json comps = json::array();
  for (const auto& c : model.components) {
    json cj{{"id", c.id}, {"inports", c.inports}, {"outports", c.outports}};
    if (c.cft) {
      json cft{{"ifms", json::array()}, {"ofms", json::array()}, {"basic_events", json::array()},
               {"gates", json::array()}, {"edges", json::array()}};
      for (const auto& f : c.cft->ifms) cft["ifms"].push_back(write_failure_mode(f, true));
      for (const auto& f : c.cft->ofms) cft["ofms"].push_back(write_failure_mode(f, false));
      for (const auto& b : c.cft->basic_events) {
        json bj{{"id", b.id}, {"name", b.name}};
        if (b.fit) bj["fit"] = *b.fit;
        cft["basic_events"].push_back(bj);
      }
      for (const auto& g : c.cft->gates)
        cft["gates"].push_back({{"id", g.id}, {"kind", g.kind == GateKind::And ? "AND" : "OR"}});
      for (const auto& e : c.cft->edges) cft["edges"].push_back({{"src", e.src}, {"dst", e.dst}});
      cj["cft"] = cft;
    }
    comps.push_back(cj);
  }
  json cons = json::array();
  for (const auto& c : model.connections)
    cons.push_back({{"from", c.from.str()}, {"to", c.to.str()}});
  return {{"components", comps}, {"connections", cons}};
}

}  // namespace cftv
