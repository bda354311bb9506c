// cftv: command-line front end of the CFT verification pipeline.
//
// Exit codes: 0 success, 1 findings present, 2 usage or input error,
// 3 internal error. Diagnostics go to stderr as one JSON object per line.

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cftv/case_study.hpp"
#include "cftv/entities.hpp"
#include "cftv/fixtures.hpp"
#include "cftv/io.hpp"
#include "cftv/verifier.hpp"

using namespace cftv;
using nlohmann::json;

namespace {

constexpr int kOk = 0, kFindings = 1, kInputError = 2, kInternalError = 3;

void diag(const std::string& level, const std::string& kind, const std::string& message) {
  std::cerr << json{{"level", level}, {"kind", kind}, {"message", message}}.dump() << "\n";
}

std::map<std::string, std::string> parse_assignments(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& s : items) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw BadParameter("expected key=value, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

int cmd_validate(const std::string& path) {
  SystemModel model = load_system_file(path);
  auto diags = validate(model);
  for (const auto& d : diags) std::cerr << to_json(d).dump() << "\n";
  return has_errors(diags) ? kInputError : kOk;
}

struct MincutArgs {
  std::string model, top, scope, format = "json";
  bool prob = false;
  double mission_hours = 1.0;
  std::vector<std::string> ifm_prob;
};

int cmd_mincut(const MincutArgs& a) {
  SystemModel model = load_system_file(a.model);
  std::string scope_text = a.scope.empty() ? split_ref(a.top).first : a.scope;
  Scope scope = Scope::parse(scope_text, model);
  McaResult mca = minimal_cut_sets(model, scope, a.top);
  std::optional<double> p;
  if (a.prob) {
    std::map<std::string, double> ifm;
    for (const auto& [k, v] : parse_assignments(a.ifm_prob)) {
      try {
        ifm[k] = std::stod(v);
      } catch (const std::exception&) {
        throw BadParameter("bad probability for " + k + ": '" + v + "'");
      }
    }
    p = top_probability(mca, basic_event_rates(model), a.mission_hours, ifm);
  }
  if (a.format == "json") {
    json cuts = json::array();
    for (const auto& c : mca.cuts) cuts.push_back(c.literals);
    json out{{"top", mca.top}, {"scope", scope.label()}, {"cuts", cuts}};
    if (p) out["probability"] = *p;
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& c : mca.cuts) {
      std::string line;
      for (const auto& l : c.literals) line += (line.empty() ? "" : ", ") + l;
      std::cout << "{" << line << "}\n";
    }
    if (p) {
      std::ostringstream os;
      os.precision(6);
      os << std::scientific << *p;
      std::cout << "P(" << mca.top << ") ~ " << os.str() << " over " << a.mission_hours << " h\n";
    }
  }
  return kOk;
}

struct GentestsArgs {
  std::string model, bind, btm_dir, out;
  std::vector<std::string> scopes;
  bool cross = false;
};

int cmd_gentests(const GentestsArgs& a) {
  SystemModel model = load_system_file(a.model);
  auto diags = validate(model);
  for (const auto& d : diags) std::cerr << to_json(d).dump() << "\n";
  if (has_errors(diags)) return kInputError;
  std::vector<Scope> scopes;
  for (const auto& s : a.scopes) scopes.push_back(Scope::parse(s, model));
  auto bindings = tg::BindingMap::from_file(a.bind);
  auto library = tg::load_btm_library(a.btm_dir);
  tg::TestSuite suite = tg::build_suite(model, scopes, bindings, library, a.cross);
  write_file_atomic(a.out, suite.to_json().dump(2) + "\n");
  diag("info", "gentests", std::to_string(suite.cases.size()) + " test cases written to " + a.out);
  return kOk;
}

struct SimulateArgs {
  std::string config, trace;
  std::vector<std::string> btms, sets;
};

int cmd_simulate(const SimulateArgs& a) {
  auto config = sim::SimulationConfig::from_file(a.config);
  auto sets = parse_assignments(a.sets);
  std::vector<btm::BtmDefinition> defs;
  for (const auto& f : a.btms) {
    btm::BtmDefinition def = btm::load_btm_file(f);
    std::map<std::string, std::string> bind;
    for (const auto& p : def.placeholders)
      if (auto it = sets.find(p); it != sets.end())
        bind[p] = p == "target" ? it->second : btm::placeholder_text(json(it->second));
    defs.push_back(def.is_template() ? btm::instantiate(def, bind) : def);
  }
  ver::InjectionRun run = ver::run_injection(config, sim::standard_registry(), defs);
  std::string text = run.trace.to_jsonl();
  if (a.trace.empty()) std::cout << text;
  else write_file_atomic(a.trace, text);
  if (run.error) {
    diag("error", "InjectionError", *run.error);
    return kInputError;
  }
  return kOk;
}

struct VerifyArgs {
  std::string config, suite, out, trace_dir;
  unsigned jobs = 1;
};

int cmd_verify(const VerifyArgs& a) {
  auto config = sim::SimulationConfig::from_file(a.config);
  auto suite = tg::TestSuite::from_file(a.suite);
  auto problems = tg::dry_run(suite, config, sim::standard_registry());
  for (const auto& p : problems) diag("error", "DryRun", p);
  if (!problems.empty()) return kInputError;
  ver::VerifyOptions opt;
  opt.jobs = std::max(1u, a.jobs);
  opt.trace_dir = a.trace_dir;
  auto report = ver::verify_suite(suite, config, sim::standard_registry(), opt);
  write_file_atomic(a.out, report.to_json().dump(2) + "\n");
  for (const auto& v : report.verdicts)
    for (const auto& w : v.warnings) diag("warning", "Verdict", v.id + ": " + w);
  return report.has_findings() ? kFindings : kOk;
}

int cmd_report(const std::string& path, const std::string& format) {
  auto report = ver::VerificationReport::from_json(json::parse(read_file(path)));
  if (format == "json") std::cout << report.to_json().dump(2) << "\n";
  else std::cout << report.to_text();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verify component fault trees by simulation-based fault injection", "cftv"};
  app.require_subcommand(1);

  std::string path;
  auto* validate_cmd = app.add_subcommand("validate", "Check a CFT model for structural errors");
  validate_cmd->add_option("model", path, "Model file (*.cft.json)")->required();

  MincutArgs mc;
  auto* mincut_cmd = app.add_subcommand("mincut", "Minimal cut sets of a scope OFM");
  mincut_cmd->add_option("model", mc.model)->required();
  mincut_cmd->add_option("--top", mc.top, "Top OFM as component.ofm")->required();
  mincut_cmd->add_option("--scope", mc.scope, "Comma-separated components or 'all' (default: the top's component)");
  mincut_cmd->add_flag("--prob", mc.prob, "Also estimate the top event probability");
  mincut_cmd->add_option("--mission-hours", mc.mission_hours)->check(CLI::PositiveNumber);
  mincut_cmd->add_option("--ifm-prob", mc.ifm_prob, "Probability of a scope IFM, as literal=p");
  mincut_cmd->add_option("--format", mc.format)->check(CLI::IsMember({"text", "json"}));

  GentestsArgs gt;
  auto* gentests_cmd = app.add_subcommand("gentests", "Generate a fault-injection test suite");
  gentests_cmd->add_option("model", gt.model)->required();
  gentests_cmd->add_option("--scope", gt.scopes, "Scope (repeatable)")->required();
  gentests_cmd->add_option("--bind", gt.bind, "Binding map (*.bind.json)")->required();
  gentests_cmd->add_option("--btm-dir", gt.btm_dir, "Directory of *.btm.json templates")->required();
  gentests_cmd->add_flag("--cross", gt.cross, "Also generate cross tests monitoring every scope OFM");
  gentests_cmd->add_option("-o,--output", gt.out)->required();

  SimulateArgs sm;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run one simulation and write its trace");
  simulate_cmd->add_option("config", sm.config)->required();
  simulate_cmd->add_option("--btm", sm.btms, "BTM file to install (repeatable)");
  simulate_cmd->add_option("--set", sm.sets, "Placeholder binding name=value (repeatable)");
  simulate_cmd->add_option("--trace", sm.trace, "Trace output file (default stdout)");

  VerifyArgs vf;
  auto* verify_cmd = app.add_subcommand("verify", "Execute a test suite against a simulation config");
  verify_cmd->add_option("config", vf.config)->required();
  verify_cmd->add_option("suite", vf.suite)->required();
  verify_cmd->add_option("-o,--output", vf.out)->required();
  verify_cmd->add_option("--jobs", vf.jobs)->check(CLI::PositiveNumber);
  verify_cmd->add_option("--trace-dir", vf.trace_dir, "Write reference and per-test traces here");

  std::string format = "text";
  auto* report_cmd = app.add_subcommand("report", "Render a verification report");
  report_cmd->add_option("report", path)->required();
  report_cmd->add_option("--format", format)->check(CLI::IsMember({"text", "json"}));

  std::string dir;
  auto* export_cs_cmd = app.add_subcommand("export-case-study", "Write the coasting-assistant data files");
  export_cs_cmd->add_option("dir", dir)->required();

  std::string fixture;
  auto* export_fx_cmd = app.add_subcommand("export-fixture", "Write a seeded Boolean fixture");
  export_fx_cmd->add_option("name", fixture)->required()->check(CLI::IsMember(fx::fixture_names()));
  export_fx_cmd->add_option("dir", dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    diag("error", "Usage", e.what());
    return kInputError;
  }

  try {
    if (*validate_cmd) return cmd_validate(path);
    if (*mincut_cmd) return cmd_mincut(mc);
    if (*gentests_cmd) return cmd_gentests(gt);
    if (*simulate_cmd) return cmd_simulate(sm);
    if (*verify_cmd) return cmd_verify(vf);
    if (*report_cmd) return cmd_report(path, format);
    if (*export_cs_cmd) {
      for (const auto& f : cs::export_case_study(dir)) std::cout << f << "\n";
      return kOk;
    }
    if (*export_fx_cmd) {
      for (const auto& f : fx::export_fixture(fixture, dir)) std::cout << f << "\n";
      return kOk;
    }
  } catch (const Error& e) {
    diag("error", e.kind(), e.what());
    return kInputError;
  } catch (const json::exception& e) {
    diag("error", "SchemaError", e.what());
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    diag("error", "IoError", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    diag("error", "Internal", e.what());
    return kInternalError;
  }
  return kInternalError;
}
