#include "cftv/monitors.hpp"

#include <algorithm>
#include <cmath>

namespace cftv::mon {

using nlohmann::json;

// --- alignment ------------------------------------------------------------------

Time default_window(const std::vector<TraceRecord>& ref) {
  if (ref.size() < 2) return kTimeMax;
  std::vector<Time> gaps;
  for (std::size_t i = 1; i < ref.size(); ++i) gaps.push_back(ref[i].t - ref[i - 1].t);
  std::sort(gaps.begin(), gaps.end());
  return gaps[(gaps.size() - 1) / 2];
}

namespace {

struct Score {
  std::int32_t matches = 0;
  std::int64_t cost = 0;
  std::int32_t mismatches = 0;

  bool better(const Score& o, bool by_value) const {
    if (by_value && matches - mismatches != o.matches - o.mismatches)
      return matches - mismatches > o.matches - o.mismatches;
    if (matches != o.matches) return matches > o.matches;
    if (cost != o.cost) return cost < o.cost;
    return mismatches < o.mismatches;
  }
};

Time abs_dt(Time a, Time b) { return a > b ? a - b : b - a; }

std::int64_t sat_add(std::int64_t a, std::int64_t b) { return a > kTimeMax - b ? kTimeMax : a + b; }

// Fallback for very long signals: nearest unmatched inj record per ref record.
std::vector<AlignedPair> align_greedy(const std::vector<TraceRecord>& ref, const std::vector<TraceRecord>& inj,
                                      Time window) {
  std::vector<AlignedPair> out;
  std::size_t next = 0;
  for (const auto& r : ref) {
    std::size_t best = inj.size();
    for (std::size_t j = next; j < inj.size() && inj[j].t <= r.t + std::min(window, kTimeMax - r.t); ++j)
      if (abs_dt(inj[j].t, r.t) <= window && (best == inj.size() || abs_dt(inj[j].t, r.t) < abs_dt(inj[best].t, r.t)))
        best = j;
    if (best == inj.size()) {
      out.push_back({r, std::nullopt, 0});
      continue;
    }
    for (; next < best; ++next) out.push_back({std::nullopt, inj[next], 0});
    out.push_back({r, inj[best], inj[best].t - r.t});
    next = best + 1;
  }
  for (; next < inj.size(); ++next) out.push_back({std::nullopt, inj[next], 0});
  return out;
}

Time key(const AlignedPair& p) { return p.ref ? p.ref->t : p.inj->t; }

}  // namespace

std::vector<AlignedPair> align(const std::vector<TraceRecord>& ref, const std::vector<TraceRecord>& inj,
                               Time window, Pairing pairing) {
  const bool by_value = pairing == Pairing::Value;
  const std::size_t n = ref.size(), m = inj.size();
  std::vector<AlignedPair> out;
  if ((n + 1) * (m + 1) > 25'000'000) {
    out = align_greedy(ref, inj, window);
  } else {
    // dir: 0 match, 1 skip ref, 2 skip inj
    std::vector<std::uint8_t> dir((n + 1) * (m + 1), 0);
    std::vector<Score> prev(m + 1), cur(m + 1);
    for (std::size_t j = 1; j <= m; ++j) dir[j] = 2;
    for (std::size_t i = 1; i <= n; ++i) {
      cur[0] = prev[0];
      dir[i * (m + 1)] = 1;
      for (std::size_t j = 1; j <= m; ++j) {
        Score best = prev[j];
        std::uint8_t d = 1;
        if (cur[j - 1].better(best, by_value)) {
          best = cur[j - 1];
          d = 2;
        }
        Time delta = abs_dt(inj[j - 1].t, ref[i - 1].t);
        if (delta <= window) {
          Score s = prev[j - 1];
          s.matches += 1;
          s.cost = sat_add(s.cost, delta);
          s.mismatches += !(ref[i - 1].value == inj[j - 1].value);
          if (!best.better(s, by_value)) {
            best = s;
            d = 0;
          }
        }
        cur[j] = best;
        dir[i * (m + 1) + j] = d;
      }
      std::swap(prev, cur);
    }
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
      std::uint8_t d = dir[i * (m + 1) + j];
      if (d == 0) {
        out.push_back({ref[i - 1], inj[j - 1], inj[j - 1].t - ref[i - 1].t});
        --i;
        --j;
      } else if (d == 1) {
        out.push_back({ref[i - 1], std::nullopt, 0});
        --i;
      } else {
        out.push_back({std::nullopt, inj[j - 1], 0});
        --j;
      }
    }
    std::reverse(out.begin(), out.end());
  }
  std::stable_sort(out.begin(), out.end(), [](const AlignedPair& a, const AlignedPair& b) { return key(a) < key(b); });
  return out;
}

// --- classification -------------------------------------------------------------

std::optional<FailureClass> Classification::primary() const {
  for (FailureClass c : {FailureClass::Halt, FailureClass::Late, FailureClass::Early, FailureClass::Content,
                         FailureClass::Erratic})
    if (has(c)) return c;
  return std::nullopt;
}

std::vector<std::string> Classification::class_names() const {
  std::vector<std::string> out;
  for (FailureClass c : classes) out.push_back(to_string(c));
  return out;
}

namespace {

bool values_equal(const Value& a, const Value& b, Comparator cmp, double abs_tol) {
  if (cmp == Comparator::Numeric && a.is_number() && b.is_number())
    return std::fabs(a.as_number() - b.as_number()) <= abs_tol;
  return a == b;
}

}  // namespace

Classification classify(const std::vector<AlignedPair>& pairs, Time eps_t, Comparator cmp, double abs_tol) {
  Classification c;
  // Start of the maximal ref-only suffix (in reference order).
  std::optional<Time> suffix_start;
  for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) {
    if (!it->ref) continue;
    if (it->inj) break;
    suffix_start = it->ref->t;
  }
  bool halted = false;
  if (suffix_start) {
    halted = std::none_of(pairs.begin(), pairs.end(),
                          [&](const AlignedPair& p) { return p.inj && p.inj->t > *suffix_start; });
  }

  for (const auto& p : pairs) {
    Evidence e{p.ref, p.inj, p.dt, FailureClass::Erratic};
    if (p.matched()) {
      bool equal = values_equal(p.ref->value, p.inj->value, cmp, abs_tol);
      bool on_time = (p.dt < 0 ? -p.dt : p.dt) <= eps_t;
      if (on_time && equal) continue;
      if (on_time) e.failure_class = FailureClass::Content;
      else if (equal) e.failure_class = p.dt < 0 ? FailureClass::Early : FailureClass::Late;
    } else if (p.ref && halted && p.ref->t >= *suffix_start) {
      e.failure_class = FailureClass::Halt;
    }
    c.classes.insert(e.failure_class);
    c.evidence.push_back(std::move(e));
  }
  int timing_value = c.has(FailureClass::Content) + c.has(FailureClass::Early) + c.has(FailureClass::Late);
  if (!c.has(FailureClass::Halt) && timing_value >= 2) c.classes.insert(FailureClass::Erratic);
  return c;
}

// --- monitors -------------------------------------------------------------------

namespace {

json time_json(Time t) { return format_time(t); }

Time time_from(const json& j, const std::string& what) {
  try {
    if (j.is_number_integer()) return j.get<Time>();
    if (j.is_string()) return parse_time(j.get<std::string>());
  } catch (const Error& e) {
    throw SchemaError(what + ": " + e.what());
  }
  throw SchemaError(what + " must be a time string or integer picoseconds");
}

}  // namespace

json MonitorSpec::to_json() const {
  json j{{"signal", signal}, {"eps_t", time_json(eps_t)}};
  if (window) j["window"] = time_json(*window);
  if (comparator == Comparator::Numeric) {
    j["comparator"] = "numeric";
    j["abs_tol"] = abs_tol;
  }
  if (pairing == Pairing::Value) j["pairing"] = "value";
  if (!query.empty()) j["query"] = query;
  return j;
}

MonitorSpec MonitorSpec::from_json(const json& j) {
  if (!j.is_object() || !j.contains("signal") || !j.at("signal").is_string())
    throw SchemaError("monitor needs a 'signal'");
  MonitorSpec m;
  m.signal = j.at("signal").get<std::string>();
  if (j.contains("eps_t")) m.eps_t = time_from(j.at("eps_t"), "eps_t");
  if (j.contains("window") && !j.at("window").is_null()) m.window = time_from(j.at("window"), "window");
  std::string cmp = j.value("comparator", "exact");
  if (cmp == "numeric") m.comparator = Comparator::Numeric;
  else if (cmp != "exact") throw SchemaError("comparator must be 'exact' or 'numeric'");
  m.abs_tol = j.value("abs_tol", 0.0);
  m.query = j.value("query", "");
  if (m.eps_t < 0 || m.abs_tol < 0) throw SchemaError("monitor tolerances must not be negative");
  if (m.window && *m.window < m.eps_t) throw SchemaError("monitor window smaller than eps_t");
  std::string pairing = j.value("pairing", "time");
  if (pairing == "value") m.pairing = Pairing::Value;
  else if (pairing != "time") throw SchemaError("pairing must be 'time' or 'value'");
  if (!m.query.empty()) parse_query(m.query);
  return m;
}

MonitorVerdict monitor_verdict(const Trace& ref, const Trace& inj, const MonitorSpec& m) {
  if (!ref.declares(m.signal) || !inj.declares(m.signal))
    throw UnknownSignal("signal '" + m.signal + "' is not traced");
  auto r = ref.of(m.signal);
  auto i = inj.of(m.signal);
  Time window = m.window ? *m.window : default_window(r);
  window = std::max(window, m.eps_t);
  MonitorVerdict v;
  v.classification = classify(align(r, i, window, m.pairing), m.eps_t, m.comparator, m.abs_tol);
  if (!m.query.empty()) {
    QueryPtr q = parse_query(m.query);
    v.query_ref = check_query(ref, *q);
    v.query_inj = check_query(inj, *q);
    v.query_mismatch = *v.query_ref != *v.query_inj;
  }
  return v;
}

json to_json(const Evidence& e) {
  json j{{"class", to_string(e.failure_class)}};
  if (e.ref) j["ref"] = {{"t", format_time(e.ref->t)}, {"v", cftv::to_json(e.ref->value)}};
  if (e.inj) j["inj"] = {{"t", format_time(e.inj->t)}, {"v", cftv::to_json(e.inj->value)}};
  if (e.ref && e.inj) j["dt"] = format_time(e.dt);
  return j;
}

}  // namespace cftv::mon
