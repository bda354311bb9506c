#pragma once

// Independent oracles and generators shared by the unit, property and
// acceptance tests. Nothing here calls into the analysis code.

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

namespace oracle {

using nlohmann::json;
using Cut = std::set<std::string>;
using CutFamily = std::set<Cut>;

/// Evaluates an OFM of a `.cft.json` document directly on the JSON, following
/// IFM sources (qualified or bare) through connections.
class JsonEvaluator {
 public:
  explicit JsonEvaluator(const json& doc) : doc_(doc) {
    for (const auto& c : doc.at("components")) comps_[c.at("id").get<std::string>()] = &c;
  }

  bool ofm(const std::string& qualified, const std::set<std::string>& active) const {
    auto dot = qualified.find('.');
    return node(qualified.substr(0, dot), qualified.substr(dot + 1), active);
  }

 private:
  bool node(const std::string& comp, const std::string& id, const std::set<std::string>& active) const {
    const json& cft = comps_.at(comp)->at("cft");
    auto find = [&](const char* key) -> const json* {
      if (!cft.contains(key)) return nullptr;
      for (const auto& n : cft.at(key))
        if (n.at("id") == id) return &n;
      return nullptr;
    };
    if (find("basic_events")) return active.count(comp + "." + id) > 0;
    if (const json* f = find("ifms")) {
      std::string src = f->value("source", "");
      if (src.empty()) return active.count(comp + "." + id) > 0;
      if (src.find('.') != std::string::npos) return ofm(src, active);
      std::string port = f->at("port");
      for (const auto& con : doc_.at("connections"))
        if (con.at("to") == comp + "." + port) {
          std::string from = con.at("from");
          return node(from.substr(0, from.find('.')), src, active);
        }
      return active.count(comp + "." + id) > 0;
    }
    std::vector<std::string> inputs;
    if (cft.contains("edges"))
      for (const auto& e : cft.at("edges"))
        if (e.at("dst") == id) inputs.push_back(e.at("src"));
    if (find("ofms")) return !inputs.empty() && node(comp, inputs.front(), active);
    const json* g = find("gates");
    bool is_and = g->at("kind") == "AND";
    for (const auto& in : inputs) {
      bool v = node(comp, in, active);
      if (is_and && !v) return false;
      if (!is_and && v) return true;
    }
    return is_and;
  }

  const json& doc_;
  std::map<std::string, const json*> comps_;
};

/// Minimal satisfying assignments of a monotone function by exhaustive
/// enumeration: every true point whose true set has no true proper subset.
inline CutFamily minimal_true_sets(const std::vector<std::string>& literals,
                                   const std::function<bool(const std::set<std::string>&)>& f) {
  const std::size_t n = literals.size();
  std::vector<char> truth(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < truth.size(); ++mask) {
    std::set<std::string> active;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) active.insert(literals[i]);
    truth[mask] = f(active);
  }
  CutFamily out;
  for (std::size_t mask = 0; mask < truth.size(); ++mask) {
    if (!truth[mask]) continue;
    bool minimal = true;
    for (std::size_t i = 0; i < n && minimal; ++i)
      if ((mask >> i & 1) && truth[mask & ~(std::size_t{1} << i)]) minimal = false;
    if (!minimal) continue;
    Cut c;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) c.insert(literals[i]);
    out.insert(c);
  }
  return out;
}

/// Exact probability of the union of independent-literal cuts.
inline double inclusion_exclusion(const std::vector<Cut>& cuts, const std::map<std::string, double>& p) {
  double total = 0.0;
  const std::size_t k = cuts.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << k); ++mask) {
    Cut u;
    int terms = 0;
    for (std::size_t i = 0; i < k; ++i)
      if (mask >> i & 1) {
        u.insert(cuts[i].begin(), cuts[i].end());
        ++terms;
      }
    double prod = 1.0;
    for (const auto& l : u) prod *= p.at(l);
    total += (terms % 2 ? 1.0 : -1.0) * prod;
  }
  return total;
}

struct RandomSystem {
  json doc;
  std::string top;
  std::vector<std::string> basic_events;  // qualified
};

/// Chain of 1..3 components; each has its own basic events, IFMs fed by the
/// upstream OFMs and 1..2 OFMs defined by random AND/OR trees. At most
/// `max_literals` basic events in total.
inline RandomSystem random_system(std::mt19937_64& rng, int max_literals = 12) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RandomSystem rs;
  int n_comp = pick(1, 3);
  int budget = max_literals;
  json comps = json::array(), cons = json::array();
  std::vector<std::string> upstream_ofms;
  for (int ci = 0; ci < n_comp; ++ci) {
    std::string cid = "c" + std::to_string(ci);
    int left = n_comp - ci - 1;
    int n_be = std::min(pick(1, 5), budget - left);
    budget -= n_be;
    json cft{{"basic_events", json::array()}, {"ifms", json::array()}, {"ofms", json::array()},
             {"gates", json::array()}, {"edges", json::array()}};
    std::vector<std::string> leaves;
    for (int b = 0; b < n_be; ++b) {
      std::string id = "b" + std::to_string(b);
      cft["basic_events"].push_back({{"id", id}, {"fit", pick(1, 1000)}});
      leaves.push_back(id);
      rs.basic_events.push_back(cid + "." + id);
    }
    for (const auto& up : upstream_ofms) {
      std::string id = "i_" + up;
      cft["ifms"].push_back({{"id", id}, {"class", "content"}, {"port", "in"}, {"source", up}});
      leaves.push_back(id);
    }
    int gates = 0;
    std::function<std::string(int)> build = [&](int depth) -> std::string {
      if (depth == 0 || leaves.size() < 2 || pick(0, 3) == 0) return leaves[pick(0, (int)leaves.size() - 1)];
      std::string g = "g" + std::to_string(++gates);
      cft["gates"].push_back({{"id", g}, {"kind", pick(0, 1) ? "AND" : "OR"}});
      int arity = pick(2, 3);
      std::set<std::string> used;
      for (int k = 0; k < arity; ++k) {
        std::string child = build(depth - 1);
        if (!used.insert(child).second) continue;
        cft["edges"].push_back({{"src", child}, {"dst", g}});
      }
      if (used.size() < 2) {
        // Keep AND arity >= 2: pad with a different leaf.
        for (const auto& l : leaves)
          if (!used.count(l)) {
            cft["edges"].push_back({{"src", l}, {"dst", g}});
            break;
          }
      }
      return g;
    };
    int n_ofm = pick(1, 2);
    std::vector<std::string> ofms;
    for (int o = 0; o < n_ofm; ++o) {
      std::string id = "o" + std::to_string(o);
      cft["ofms"].push_back({{"id", id}, {"class", "content"}, {"port", "out"}});
      cft["edges"].push_back({{"src", build(3)}, {"dst", id}});
      ofms.push_back(id);
    }
    json comp{{"id", cid}, {"inports", ci ? json::array({"in"}) : json::array()}, {"outports", {"out"}}, {"cft", cft}};
    comps.push_back(comp);
    if (ci) cons.push_back({{"from", "c" + std::to_string(ci - 1) + ".out"}, {"to", cid + ".in"}});
    upstream_ofms = ofms;
    rs.top = cid + ".o0";
  }
  rs.doc = {{"components", comps}, {"connections", cons}};
  return rs;
}

}  // namespace oracle
