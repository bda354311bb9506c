#include "cftv/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <thread>

#include "cftv/io.hpp"

namespace cftv::ver {

using nlohmann::json;

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Confirmed: return "Confirmed";
    case Outcome::NotReproduced: return "NotReproduced";
    case Outcome::MaskedSubsetEffect: return "MaskedSubsetEffect";
    case Outcome::UnmodeledPath: return "UnmodeledPath";
    default: return "InjectionError";
  }
}

namespace {

Outcome parse_outcome(const std::string& s) {
  for (Outcome o : {Outcome::Confirmed, Outcome::NotReproduced, Outcome::MaskedSubsetEffect, Outcome::UnmodeledPath,
                    Outcome::InjectionError})
    if (to_string(o) == s) return o;
  throw SchemaError("unknown outcome '" + s + "'");
}

// --- reference cache -------------------------------------------------------------

std::mutex cache_mutex;
std::map<std::string, std::shared_ptr<const sim::Trace>> cache;
std::atomic<std::size_t> cache_hits{0};

}  // namespace

sim::Trace run_reference(const sim::SimulationConfig& config, const sim::EntityRegistry& registry) {
  std::string key = config.hash();
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find(key); it != cache.end()) {
      ++cache_hits;
      return *it->second;
    }
  }
  std::string disk;
  if (const char* dir = std::getenv("CFTV_CACHE_DIR"); dir && *dir) {
    disk = (std::filesystem::path(dir) / (key + ".ref.jsonl")).string();
    if (std::filesystem::exists(disk)) {
      auto t = std::make_shared<const sim::Trace>(sim::Trace::from_jsonl(read_file(disk)));
      if (t->config_hash == key) {
        ++cache_hits;
        std::lock_guard lock(cache_mutex);
        cache.emplace(key, t);
        return *t;
      }
    }
  }
  sim::Simulation s(config, registry);
  auto t = std::make_shared<const sim::Trace>(s.run());
  if (!disk.empty()) write_file_atomic(disk, t->to_jsonl());
  std::lock_guard lock(cache_mutex);
  cache.emplace(key, t);
  return *t;
}

std::size_t reference_cache_hits() { return cache_hits.load(); }

void clear_reference_cache() {
  std::lock_guard lock(cache_mutex);
  cache.clear();
  cache_hits = 0;
}

// --- runs ------------------------------------------------------------------------

InjectionRun run_injection(const sim::SimulationConfig& config, const sim::EntityRegistry& registry,
                           const std::vector<btm::BtmDefinition>& btms) {
  sim::Simulation s(config, registry);
  btm::Controller controller;
  InjectionRun out;
  try {
    for (const auto& def : btms) controller.install(s, def);
    s.add_hook(&controller);
    out.trace = s.run();
  } catch (const sim::EntityFault& e) {
    out.trace = e.partial();
    out.error = std::string("entity fault: ") + e.what();
  } catch (const Error& e) {
    out.trace = s.trace();
    out.error = e.kind() + ": " + e.what();
  }
  return out;
}

namespace {

std::vector<btm::BtmDefinition> instantiate_for(const tg::TestCase& tc, const std::vector<std::string>& literals,
                                               const tg::BtmLibrary& library, const sim::SimulationConfig& config) {
  std::vector<btm::BtmDefinition> out;
  for (const auto& b : tc.btms) {
    if (std::find(literals.begin(), literals.end(), b.literal) == literals.end()) continue;
    auto it = library.find(b.template_name);
    if (it == library.end()) throw UnknownTemplate("template '" + b.template_name + "' not available");
    auto binds = b.bindings;
    binds.emplace("t_start", format_time(config.stop_time / 10));
    out.push_back(btm::instantiate(it->second, binds));
  }
  return out;
}

bool unpredicted_trigger(const MonitorOutcome& m) {
  const auto& v = m.verdict;
  if (v.query_mismatch) return true;
  auto cls = parse_failure_class(m.failure_class);
  if (!cls) return !v.classification.empty();  // custom class: any deviation
  return v.classification.has(*cls);
}

std::vector<MonitorOutcome> observe(const tg::TestCase& tc, const sim::Trace& ref, const sim::Trace& inj) {
  std::vector<MonitorOutcome> out;
  for (const auto& m : tc.monitors) {
    MonitorOutcome mo{m.ofm, m.role, m.failure_class, mon::monitor_verdict(ref, inj, m.spec), false};
    mo.triggered = m.role == tg::MonitorRole::Unpredicted ? unpredicted_trigger(mo) : mo.verdict.triggered();
    out.push_back(std::move(mo));
  }
  return out;
}

}  // namespace

Verdict execute_test(const tg::TestCase& tc, const sim::Trace& ref, const sim::SimulationConfig& run_config,
                     const sim::EntityRegistry& registry, const tg::BtmLibrary& library,
                     sim::Trace* full_trace) {
  Verdict v;
  v.id = tc.id;
  v.scope = tc.scope;
  v.targets = tc.targets;
  v.cut = tc.cut.literals;
  for (const auto& b : tc.btms) v.templates.push_back(b.template_name);

  auto fail = [&](const std::string& msg) {
    v.outcome = Outcome::InjectionError;
    v.error = msg;
    return v;
  };

  InjectionRun full;
  try {
    full = run_injection(run_config, registry, instantiate_for(tc, tc.cut.literals, library, run_config));
  } catch (const Error& e) {
    return fail(e.kind() + ": " + e.what());
  }
  v.trace_digest = full.trace.digest();
  if (full_trace) *full_trace = full.trace;
  if (full.error) return fail(*full.error);
  v.monitors = observe(tc, ref, full.trace);

  bool all_targets = !tc.targets.empty();
  for (const auto& m : v.monitors) {
    if (m.role == tg::MonitorRole::Target) {
      all_targets &= m.triggered;
      auto cls = parse_failure_class(m.failure_class);
      if (m.triggered && cls && !m.verdict.classification.has(*cls) && !m.verdict.classification.empty()) {
        auto names = m.verdict.classification.class_names();
        std::string seen;
        for (const auto& n : names) seen += (seen.empty() ? "" : ",") + n;
        v.warnings.push_back(m.ofm + ": declared class " + m.failure_class + ", observed {" + seen + "}");
      }
    }
    if (m.role == tg::MonitorRole::Unpredicted && m.triggered)
      v.findings.push_back({tc.cut.literals, m.ofm, m.verdict.classification.class_names()});
  }
  v.target_status = all_targets ? Outcome::Confirmed : Outcome::NotReproduced;

  bool masked = false;
  for (const auto& subset : tc.subsets) {
    SubsetRun sr{subset, {}, std::nullopt};
    try {
      InjectionRun run = run_injection(run_config, registry, instantiate_for(tc, subset, library, run_config));
      if (run.error) {
        sr.error = run.error;
      } else {
        for (const auto& m : observe(tc, ref, run.trace))
          if (m.role == tg::MonitorRole::Target && m.triggered) sr.triggered_targets.push_back(m.ofm);
      }
    } catch (const Error& e) {
      sr.error = e.kind() + ": " + e.what();
    }
    if (sr.error) return fail("subset run {" + [&] {
      std::string s;
      for (const auto& l : subset) s += (s.empty() ? "" : ",") + l;
      return s;
    }() + "}: " + *sr.error);
    masked |= !sr.triggered_targets.empty();
    v.subsets.push_back(std::move(sr));
  }

  if (all_targets) v.outcome = masked ? Outcome::MaskedSubsetEffect : Outcome::Confirmed;
  else v.outcome = v.findings.empty() ? Outcome::NotReproduced : Outcome::UnmodeledPath;
  return v;
}

// --- suggested edits ----------------------------------------------------------------

namespace {

// IFMs and basic events an OFM depends on inside its own element.
std::set<std::string> local_inputs(const CftElement& e, const std::string& ofm) {
  std::set<std::string> out, seen;
  std::vector<std::string> stack{ofm};
  while (!stack.empty()) {
    std::string n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    NodeKind k = e.kind_of(n);
    if (k == NodeKind::Ifm || k == NodeKind::BasicEvent) {
      out.insert(n);
      continue;
    }
    for (const auto& i : e.inputs_of(n)) stack.push_back(i);
  }
  return out;
}

}  // namespace

std::vector<SuggestedEdit> suggest_edits(const SystemModel& model, const std::vector<std::string>& scope,
                                         const std::vector<std::string>& literals, const std::string& ofm) {
  std::set<std::string> members(scope.begin(), scope.end());
  // Per component: OFM -> local inputs.
  std::map<std::string, std::map<std::string, std::set<std::string>>> deps;
  for (const auto& c : model.components) {
    if (!members.count(c.id) || !c.cft) continue;
    for (const auto& o : c.cft->ofms) deps[c.id][o.id] = local_inputs(*c.cft, o.id);
  }
  std::set<std::string> reached(literals.begin(), literals.end());
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& c : model.components) {
      if (!deps.count(c.id)) continue;
      for (const auto& [o, ins] : deps[c.id]) {
        std::string ref = c.id + "." + o;
        if (reached.count(ref)) continue;
        for (const auto& i : ins)
          if (reached.count(c.id + "." + i)) {
            reached.insert(ref);
            changed = true;
            break;
          }
      }
      for (const auto& f : c.cft->ifms) {
        std::string ref = c.id + "." + f.id;
        std::string src = source_ref(model, c.id, f);
        if (!src.empty() && reached.count(src) && reached.insert(ref).second) changed = true;
      }
    }
  }
  // Backward cone of the observed OFM.
  std::set<std::string> cone;
  std::vector<std::string> stack{ofm};
  while (!stack.empty()) {
    std::string ref = stack.back();
    stack.pop_back();
    if (!cone.insert(ref).second) continue;
    auto [comp, node] = split_ref(ref);
    const Component* c = model.component(comp);
    if (!c || !c->cft || !deps.count(comp)) continue;
    if (deps[comp].count(node)) {
      for (const auto& i : deps[comp][node]) stack.push_back(comp + "." + i);
    } else if (const FailureMode* f = c->cft->ifm(node); f && !f->source.empty()) {
      stack.push_back(source_ref(model, comp, *f));
    }
  }
  std::vector<SuggestedEdit> out;
  for (const auto& c : model.components) {
    if (!deps.count(c.id)) continue;
    std::vector<std::string> from, to;
    for (const auto& f : c.cft->ifms)
      if (reached.count(c.id + "." + f.id)) from.push_back(c.id + "." + f.id);
    for (const auto& b : c.cft->basic_events)
      if (reached.count(c.id + "." + b.id)) from.push_back(c.id + "." + b.id);
    for (const auto& o : c.cft->ofms) {
      std::string ref = c.id + "." + o.id;
      if (cone.count(ref) && !reached.count(ref)) to.push_back(ref);
    }
    for (const auto& a : from)
      for (const auto& b : to) out.push_back({c.id, a, b});
  }
  std::sort(out.begin(), out.end());
  return out;
}

// --- report ----------------------------------------------------------------------

namespace {

constexpr std::size_t kEvidenceLimit = 10;

json monitor_json(const MonitorOutcome& m) {
  json j{{"ofm", m.ofm},
         {"role", tg::to_string(m.role)},
         {"class", m.failure_class},
         {"triggered", m.triggered},
         {"observed", m.verdict.classification.class_names()}};
  if (m.verdict.query_ref) {
    j["query_ref"] = *m.verdict.query_ref;
    j["query_inj"] = *m.verdict.query_inj;
  }
  json ev = json::array();
  const auto& all = m.verdict.classification.evidence;
  for (std::size_t i = 0; i < all.size() && i < kEvidenceLimit; ++i) ev.push_back(mon::to_json(all[i]));
  j["evidence"] = ev;
  std::size_t omitted = m.evidence_omitted + (all.size() > kEvidenceLimit ? all.size() - kEvidenceLimit : 0);
  if (omitted) j["evidence_omitted"] = omitted;
  return j;
}

json verdict_json(const Verdict& v) {
  json mons = json::array();
  for (const auto& m : v.monitors) mons.push_back(monitor_json(m));
  json subs = json::array();
  for (const auto& s : v.subsets) subs.push_back({{"literals", s.literals}, {"triggered", s.triggered_targets}});
  json finds = json::array();
  for (const auto& f : v.findings) finds.push_back({{"literals", f.literals}, {"ofm", f.ofm}, {"observed", f.observed}});
  json j{{"id", v.id},
         {"scope", v.scope},
         {"targets", v.targets},
         {"cut", v.cut},
         {"templates", v.templates},
         {"outcome", to_string(v.outcome)},
         {"target_status", to_string(v.target_status)},
         {"monitors", mons},
         {"subsets", subs},
         {"findings", finds},
         {"warnings", v.warnings},
         {"trace_digest", v.trace_digest}};
  if (v.error) j["error"] = *v.error;
  if (!v.trace_file.empty()) j["trace_file"] = v.trace_file;
  return j;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

}  // namespace

std::size_t VerificationReport::count(Outcome o) const {
  return std::count_if(verdicts.begin(), verdicts.end(), [&](const Verdict& v) { return v.outcome == o; });
}

bool VerificationReport::has_findings() const {
  return !discovered.empty() || count(Outcome::Confirmed) != verdicts.size();
}

json VerificationReport::to_json() const {
  json vs = json::array();
  for (const auto& v : verdicts) vs.push_back(verdict_json(v));
  json ds = json::array();
  for (const auto& d : discovered) {
    json sugg = json::array();
    for (const auto& s : d.suggestions) sugg.push_back({{"component", s.component}, {"from", s.from}, {"to", s.to}});
    ds.push_back({{"kind", "UnmodeledPath"},
                  {"literals", d.literals},
                  {"ofm", d.ofm},
                  {"observed", d.observed},
                  {"tests", d.tests},
                  {"suggested_edits", sugg}});
  }
  std::size_t warnings = 0;
  for (const auto& v : verdicts) warnings += v.warnings.size();
  json summary{{"total", verdicts.size()},
               {"confirmed", count(Outcome::Confirmed)},
               {"not_reproduced", count(Outcome::NotReproduced)},
               {"masked_subset_effect", count(Outcome::MaskedSubsetEffect)},
               {"unmodeled_path", count(Outcome::UnmodeledPath)},
               {"injection_error", count(Outcome::InjectionError)},
               {"discovered_paths", discovered.size()},
               {"warnings", warnings}};
  return {{"model_hash", model_hash}, {"config_hash", config_hash}, {"suite_id", suite_id},
          {"summary", summary},       {"verdicts", vs},             {"discovered_paths", ds}};
}

VerificationReport VerificationReport::from_json(const json& doc) {
  VerificationReport r;
  try {
    r.model_hash = doc.at("model_hash").get<std::string>();
    r.config_hash = doc.at("config_hash").get<std::string>();
    r.suite_id = doc.at("suite_id").get<std::string>();
    for (const auto& j : doc.at("verdicts")) {
      Verdict v;
      v.id = j.at("id").get<std::string>();
      v.scope = j.at("scope").get<std::vector<std::string>>();
      v.targets = j.at("targets").get<std::vector<std::string>>();
      v.cut = j.at("cut").get<std::vector<std::string>>();
      v.templates = j.value("templates", std::vector<std::string>{});
      v.outcome = parse_outcome(j.at("outcome").get<std::string>());
      v.target_status = parse_outcome(j.value("target_status", "NotReproduced"));
      v.warnings = j.value("warnings", std::vector<std::string>{});
      for (const auto& f : j.value("findings", json::array()))
        v.findings.push_back({f.at("literals").get<std::vector<std::string>>(), f.at("ofm").get<std::string>(),
                              f.value("observed", std::vector<std::string>{})});
      for (const auto& s : j.value("subsets", json::array()))
        v.subsets.push_back({s.at("literals").get<std::vector<std::string>>(),
                             s.value("triggered", std::vector<std::string>{}), std::nullopt});
      for (const auto& m : j.value("monitors", json::array())) {
        MonitorOutcome mo;
        mo.ofm = m.at("ofm").get<std::string>();
        mo.failure_class = m.value("class", "");
        mo.triggered = m.value("triggered", false);
        std::string role = m.value("role", "target");
        mo.role = role == "target" ? tg::MonitorRole::Target
                  : role == "predicted" ? tg::MonitorRole::Predicted : tg::MonitorRole::Unpredicted;
        for (const auto& c : m.value("observed", std::vector<std::string>{}))
          if (auto fc = parse_failure_class(c)) mo.verdict.classification.classes.insert(*fc);
        if (m.contains("query_ref")) {
          mo.verdict.query_ref = m.at("query_ref").get<bool>();
          mo.verdict.query_inj = m.at("query_inj").get<bool>();
          mo.verdict.query_mismatch = *mo.verdict.query_ref != *mo.verdict.query_inj;
        }
        const json evidence = m.value("evidence", json::array());
        for (const auto& e : evidence) {
          mon::Evidence ev;
          auto record = [](const json& r) {
            return sim::TraceRecord{parse_time(r.at("t").get<std::string>()), "", cftv::from_json(r.at("v"))};
          };
          if (e.contains("ref")) ev.ref = record(e.at("ref"));
          if (e.contains("inj")) ev.inj = record(e.at("inj"));
          ev.dt = parse_time(e.value("dt", "0 s"));
          if (auto fc = parse_failure_class(e.at("class").get<std::string>())) ev.failure_class = *fc;
          mo.verdict.classification.evidence.push_back(std::move(ev));
        }
        mo.evidence_omitted = m.value("evidence_omitted", std::size_t{0});
        v.monitors.push_back(std::move(mo));
      }
      if (j.contains("error")) v.error = j.at("error").get<std::string>();
      v.trace_digest = j.value("trace_digest", "");
      v.trace_file = j.value("trace_file", "");
      r.verdicts.push_back(std::move(v));
    }
    for (const auto& d : doc.value("discovered_paths", json::array())) {
      DiscoveredPath p;
      p.literals = d.at("literals").get<std::vector<std::string>>();
      p.ofm = d.at("ofm").get<std::string>();
      p.observed = d.value("observed", std::vector<std::string>{});
      p.tests = d.value("tests", std::vector<std::string>{});
      for (const auto& s : d.value("suggested_edits", json::array()))
        p.suggestions.push_back({s.at("component").get<std::string>(), s.at("from").get<std::string>(),
                                 s.at("to").get<std::string>()});
      r.discovered.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string VerificationReport::to_text() const {
  std::vector<std::array<std::string, 4>> rows{{"Scope", "Fault injection", "Failure monitor", "Verdict"}};
  for (const auto& v : verdicts) {
    std::string verdict = to_string(v.outcome);
    if (!v.findings.empty() && v.outcome != Outcome::UnmodeledPath) verdict += " +finding";
    if (!v.warnings.empty()) verdict += " (class mismatch)";
    std::string injection = join(v.cut, " AND ");
    if (!v.templates.empty()) injection += " [" + join(v.templates, ",") + "]";
    rows.push_back({join(v.scope, ","), injection, join(v.targets, ", "), verdict});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& r : rows)
    for (std::size_t i = 0; i < 4; ++i) width[i] = std::max(width[i], r[i].size());
  std::string out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < 4; ++i) {
      out += rows[k][i];
      if (i < 3) out += std::string(width[i] - rows[k][i].size() + 2, ' ');
    }
    out += '\n';
    if (k == 0) {
      for (std::size_t i = 0; i < 4; ++i) out += std::string(width[i], '-') + (i < 3 ? "  " : "");
      out += '\n';
    }
  }
  out += "\n" + std::to_string(verdicts.size()) + " tests: " + std::to_string(count(Outcome::Confirmed)) +
         " confirmed, " + std::to_string(count(Outcome::NotReproduced)) + " not reproduced, " +
         std::to_string(count(Outcome::MaskedSubsetEffect)) + " masked subset effect, " +
         std::to_string(count(Outcome::UnmodeledPath)) + " unmodeled path, " +
         std::to_string(count(Outcome::InjectionError)) + " injection error\n";
  if (!discovered.empty()) {
    out += "\nDiscovered propagation paths:\n";
    for (const auto& d : discovered) {
      out += "  " + join(d.literals, " AND ") + " -> " + d.ofm + " {" + join(d.observed, ",") + "}\n";
      for (const auto& s : d.suggestions) out += "    suggest in " + s.component + ": " + s.from + " -> " + s.to + "\n";
    }
  }
  return out;
}

sim::SimulationConfig run_config_for(const tg::TestSuite& suite, const sim::SimulationConfig& config) {
  sim::SimulationConfig rc = config;
  std::set<std::string> wanted;
  for (const auto& tc : suite.cases)
    for (const auto& m : tc.monitors) wanted.insert(m.spec.signal);
  for (const auto& s : wanted)
    if (std::find(rc.trace.begin(), rc.trace.end(), s) == rc.trace.end() &&
        std::find(rc.trace.begin(), rc.trace.end(), "*") == rc.trace.end())
      rc.trace.push_back(s);
  return rc;
}

VerificationReport assemble_report(std::vector<Verdict> verdicts, const tg::TestSuite& suite,
                                   const sim::SimulationConfig& config) {
  VerificationReport r;
  r.model_hash = suite.model_hash;
  r.config_hash = config.hash();
  r.suite_id = suite.id;
  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  r.verdicts = std::move(verdicts);

  std::optional<SystemModel> model;
  if (!suite.model.empty()) model = load_system(suite.model);
  std::map<std::pair<std::vector<std::string>, std::string>, DiscoveredPath> paths;
  for (const auto& v : r.verdicts)
    for (const auto& f : v.findings) {
      auto& p = paths[{f.literals, f.ofm}];
      if (p.ofm.empty()) {
        p.literals = f.literals;
        p.ofm = f.ofm;
        if (model) p.suggestions = suggest_edits(*model, v.scope, f.literals, f.ofm);
      }
      for (const auto& c : f.observed)
        if (std::find(p.observed.begin(), p.observed.end(), c) == p.observed.end()) p.observed.push_back(c);
      std::sort(p.observed.begin(), p.observed.end());
      p.tests.push_back(v.id);
    }
  for (auto& [_, p] : paths) r.discovered.push_back(std::move(p));
  return r;
}

VerificationReport verify_suite(const tg::TestSuite& suite, const sim::SimulationConfig& config,
                                const sim::EntityRegistry& registry, const VerifyOptions& options) {
  sim::SimulationConfig rc = run_config_for(suite, config);
  sim::Trace ref = run_reference(rc, registry);
  tg::BtmLibrary library = suite.library();
  if (!options.trace_dir.empty())
    write_file_atomic((std::filesystem::path(options.trace_dir) / "reference.jsonl").string(), ref.to_jsonl());

  std::vector<Verdict> verdicts(suite.cases.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      std::size_t i = next++;
      if (i >= suite.cases.size()) return;
      try {
        // Reuse of the reference is part of the contract; count it.
        sim::Trace shared_ref = run_reference(rc, registry);
        sim::Trace trace;
        verdicts[i] = execute_test(suite.cases[i], shared_ref, rc, registry, library, &trace);
        if (!options.trace_dir.empty()) {
          std::string name = verdicts[i].id;
          for (char& c : name)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-') c = '_';
          verdicts[i].trace_file = name + ".jsonl";
          write_file_atomic((std::filesystem::path(options.trace_dir) / verdicts[i].trace_file).string(),
                            trace.to_jsonl());
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  return assemble_report(std::move(verdicts), suite, config);
}

}  // namespace cftv::ver
